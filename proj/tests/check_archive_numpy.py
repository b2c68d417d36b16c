"""Cross-checks the archive format against numpy.

numpy writes the inputs (stored and deflated, plain and MedMNIST-style
keys) and reads the tool's outputs back.

usage: check_archive_numpy.py <cubehodge executable> <scratch dir>
"""

import json
import pathlib
import shutil
import subprocess
import sys
import zipfile

import numpy as np


def run(cli, *args):
    return subprocess.run([cli, *map(str, args)], capture_output=True, text=True).returncode


def main():
    cli, tmp = sys.argv[1], pathlib.Path(sys.argv[2])
    shutil.rmtree(tmp, ignore_errors=True)
    tmp.mkdir(parents=True)
    rng = np.random.default_rng(7)
    failures = []

    def check(cond, what):
        if not cond:
            failures.append(what)
            print("FAIL", what)

    images = rng.integers(0, 256, (5, 20, 18), dtype=np.uint8)
    labels = rng.integers(0, 4, (5, 1)).astype(np.int64)
    np.savez(tmp / "plain.npz", images=images, labels=labels)
    np.savez_compressed(tmp / "deflated.npz", images=images, labels=labels)
    np.savez(tmp / "med.npz", train_images=images[:3], train_labels=labels[:3], test_images=images[3:], test_labels=labels[3:])

    check(run(cli, "decompose", "-i", tmp / "plain.npz", "-o", tmp / "plain_out.npz") == 0, "decompose plain")
    check(run(cli, "decompose", "-i", tmp / "deflated.npz", "-o", tmp / "deflated_out.npz", "-j", 3) == 0,
          "decompose deflated")
    check((tmp / "plain_out.npz").read_bytes() == (tmp / "deflated_out.npz").read_bytes(),
          "stored and deflated inputs give identical archives")

    with np.load(tmp / "plain_out.npz") as out:
        check(sorted(out.files) == ["decomposed", "labels"], "member names")
        d = out["decomposed"]
        check(d.dtype == np.float32 and d.shape == (5, 6, 19, 17), f"decomposed shape {d.shape} {d.dtype}")
        check(np.isfinite(d).all(), "finite values")
        check(np.array_equal(out["labels"], labels), "labels copied through")

    with zipfile.ZipFile(tmp / "plain_out.npz") as z:
        check(z.testzip() is None, "CRC check")
        check(all(i.date_time == (1980, 1, 1, 0, 0, 0) for i in z.infolist()), "fixed timestamps")

    check(run(cli, "decompose", "-i", tmp / "med.npz", "--split", "test", "-o", tmp / "med_out.npz") == 0,
          "decompose split")
    with np.load(tmp / "med_out.npz") as out:
        check(out["decomposed"].shape == (2, 6, 19, 17), "split selects test_images")
        check(np.array_equal(out["labels"], labels[3:]), "split labels")

    zeros = np.zeros((4, 28, 28), dtype=np.uint8)
    np.savez(tmp / "zeros.npz", images=zeros)
    check(run(cli, "decompose", "-i", tmp / "zeros.npz", "-o", tmp / "zeros_out.npz") == 0, "decompose zeros")
    with np.load(tmp / "zeros_out.npz") as out:
        check(out["decomposed"].shape == (4, 6, 27, 27) and not out["decomposed"].any(), "zero images give zeros")

    volumes = rng.random((1, 7, 8, 9), dtype=np.float32)
    np.savez(tmp / "vol.npz", images=volumes)
    check(run(cli, "decompose", "-i", tmp / "vol.npz", "-o", tmp / "vol_out.npz") == 0, "decompose 3D")
    with np.load(tmp / "vol_out.npz") as out:
        check(out["decomposed"].shape == (1, 9, 6, 7, 8), "3D shape")

    broken = rng.random((3, 12, 12)).astype(np.float64)
    broken[1, 4, 4] = np.nan
    np.savez(tmp / "broken.npz", images=broken)
    check(run(cli, "decompose", "-i", tmp / "broken.npz", "-o", tmp / "broken_out.npz") == 1, "partial exit code")
    with np.load(tmp / "broken_out.npz") as out:
        check(out["decomposed"].shape == (2, 6, 11, 11), "skipped image left out")
    side = json.loads((tmp / "broken_out.npz.json").read_text())
    check([s["index"] for s in side["skipped"]] == [1], "skip recorded in sidecar")

    np.savez(tmp / "fortran.npz", images=np.asfortranarray(rng.random((2, 6, 6))))
    check(run(cli, "decompose", "-i", tmp / "fortran.npz", "-o", tmp / "f_out.npz") == 2, "Fortran order rejected")

    if failures:
        print(f"{len(failures)} check(s) failed")
        return 1
    print("all numpy archive checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
