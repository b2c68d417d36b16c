#include "cubehodge/pipeline/zip.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include <zlib.h>

#include "cubehodge/errors.hpp"

namespace cubehodge::pipeline {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint32_t kZip64EndSig = 0x06064b50;
constexpr std::uint32_t kZip64LocatorSig = 0x07064b50;
constexpr std::uint32_t k32 = 0xffffffffu;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1; // 1980-01-01
constexpr std::uint16_t kDosTime = 0;

std::uint64_t get(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> read_range(std::ifstream& in, std::uint64_t offset, std::uint64_t size) {
  std::vector<std::uint8_t> buf(size);
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
  if (!in || static_cast<std::uint64_t>(in.gcount()) != size) throw IoError("truncated zip archive");
  return buf;
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes, std::uint32_t crc = 0) {
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = static_cast<std::uint32_t>(crc32(crc, bytes.data() + pos, static_cast<uInt>(n)));
    pos += n;
  }
  return crc;
}

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in, std::uint64_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw IoError("zlib initialization failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw IoError("corrupt deflate stream in zip archive");
  return out;
}

} // namespace

ZipReader::ZipReader(const std::filesystem::path& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive " + path.string());
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
  if (file_size < 22) throw IoError("not a zip archive: " + path.string());

  const std::uint64_t tail = std::min<std::uint64_t>(file_size, 22 + 65535);
  const auto buf = read_range(in, file_size - tail, tail);
  std::int64_t eocd = -1;
  for (std::int64_t i = static_cast<std::int64_t>(tail) - 22; i >= 0; --i) {
    if (get(&buf[i], 4) == kEndSig) {
      eocd = i;
      break;
    }
  }
  if (eocd < 0) throw IoError("not a zip archive: " + path.string());
  const std::uint8_t* e = &buf[eocd];
  std::uint64_t count = get(e + 10, 2);
  std::uint64_t cd_size = get(e + 12, 4);
  std::uint64_t cd_offset = get(e + 16, 4);

  const std::uint64_t eocd_abs = file_size - tail + static_cast<std::uint64_t>(eocd);
  if ((count == 0xffff || cd_size == k32 || cd_offset == k32) && eocd_abs >= 20) {
    const auto loc = read_range(in, eocd_abs - 20, 20);
    if (get(loc.data(), 4) == kZip64LocatorSig) {
      const auto rec = read_range(in, get(loc.data() + 8, 8), 56);
      if (get(rec.data(), 4) != kZip64EndSig) throw IoError("corrupt zip64 end record");
      count = get(rec.data() + 32, 8);
      cd_size = get(rec.data() + 40, 8);
      cd_offset = get(rec.data() + 48, 8);
    }
  }
  if (cd_offset + cd_size > file_size) throw IoError("corrupt zip central directory");

  const auto cd = read_range(in, cd_offset, cd_size);
  std::size_t pos = 0;
  for (std::uint64_t n = 0; n < count; ++n) {
    if (pos + 46 > cd.size() || get(&cd[pos], 4) != kCentralSig) throw IoError("corrupt zip central directory");
    const std::uint8_t* h = &cd[pos];
    Entry entry;
    entry.method = static_cast<std::uint16_t>(get(h + 10, 2));
    entry.crc = static_cast<std::uint32_t>(get(h + 16, 4));
    entry.compressed = get(h + 20, 4);
    entry.uncompressed = get(h + 24, 4);
    const std::size_t name_len = get(h + 28, 2), extra_len = get(h + 30, 2), comment_len = get(h + 32, 2);
    entry.local_offset = get(h + 42, 4);
    if (pos + 46 + name_len + extra_len + comment_len > cd.size()) throw IoError("corrupt zip central directory");
    entry.name.assign(reinterpret_cast<const char*>(h + 46), name_len);

    // zip64 extra: only the fields saturated in the fixed header are present, in order.
    const std::uint8_t* x = h + 46 + name_len;
    for (std::size_t off = 0; off + 4 <= extra_len;) {
      const std::uint64_t id = get(x + off, 2), len = get(x + off + 2, 2);
      if (id == 0x0001) {
        const std::uint8_t* f = x + off + 4;
        std::size_t used = 0;
        auto take = [&](std::uint64_t& field) {
          if (field != k32) return;
          if (used + 8 > len) throw IoError("corrupt zip64 extra field");
          field = get(f + used, 8);
          used += 8;
        };
        take(entry.uncompressed);
        take(entry.compressed);
        take(entry.local_offset);
      }
      off += 4 + len;
    }
    if (entry.method != 0 && entry.method != 8)
      throw IoError("unsupported zip compression method " + std::to_string(entry.method) + " for " + entry.name);
    entries_.push_back(std::move(entry));
    pos += 46 + name_len + extra_len + comment_len;
  }
}

std::vector<std::string> ZipReader::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

bool ZipReader::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

const ZipReader::Entry& ZipReader::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw IoError("archive member '" + name + "' not found in " + path_.string());
}

std::vector<std::uint8_t> ZipReader::read(const std::string& name) const {
  const Entry& entry = find(name);
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError("cannot open archive " + path_.string());
  const auto local = read_range(in, entry.local_offset, 30);
  if (get(local.data(), 4) != kLocalSig) throw IoError("corrupt local header for " + name);
  const std::uint64_t data = entry.local_offset + 30 + get(&local[26], 2) + get(&local[28], 2);
  auto raw = read_range(in, data, entry.compressed);
  if (entry.method == 8) raw = inflate_raw(raw, entry.uncompressed);
  if (raw.size() != entry.uncompressed) throw IoError("size mismatch for " + name);
  if (crc_of(raw) != entry.crc) throw IoError("CRC mismatch for " + name);
  return raw;
}

ZipWriter::ZipWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot create archive " + path.string());
}

ZipWriter::~ZipWriter() {
  try {
    close();
  } catch (const std::exception&) {
  }
}

void ZipWriter::add(const std::string& name, std::span<const std::uint8_t> bytes) {
  begin(name);
  write(bytes);
  end();
}

void ZipWriter::begin(const std::string& name, std::size_t reserved_prefix) {
  if (open_entry_ || closed_) throw IoError("zip writer misuse: member already open or archive closed");
  if (name.size() > 0xffff) throw IoError("archive member name too long");
  Entry entry;
  entry.name = name;
  entry.local_offset = static_cast<std::uint64_t>(out_.tellp());
  entries_.push_back(entry);

  // Sizes are unknown until end(); the header always carries a zip64 extra
  // so it can be patched in place whatever the final size.
  std::vector<std::uint8_t> h;
  put(h, kLocalSig, 4);
  put(h, 45, 2);
  put(h, 0, 2);
  put(h, 0, 2);
  put(h, kDosTime, 2);
  put(h, kDosDate, 2);
  put(h, 0, 4);
  put(h, k32, 4);
  put(h, k32, 4);
  put(h, name.size(), 2);
  put(h, 20, 2);
  h.insert(h.end(), name.begin(), name.end());
  put(h, 0x0001, 2);
  put(h, 16, 2);
  put(h, 0, 8);
  put(h, 0, 8);
  h.resize(h.size() + reserved_prefix, 0);
  out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));

  open_entry_ = true;
  reserved_ = reserved_prefix;
  data_start_ = entry.local_offset + 30 + name.size() + 20;
  body_crc_ = 0;
  body_size_ = 0;
}

void ZipWriter::write(std::span<const std::uint8_t> bytes) {
  if (!open_entry_) throw IoError("zip writer misuse: no open member");
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  body_crc_ = crc_of(bytes, body_crc_);
  body_size_ += bytes.size();
}

void ZipWriter::end(std::span<const std::uint8_t> prefix) {
  if (!open_entry_) throw IoError("zip writer misuse: no open member");
  if (prefix.size() != reserved_) throw IoError("zip writer misuse: prefix size differs from the reservation");
  Entry& entry = entries_.back();
  entry.size = reserved_ + body_size_;
  entry.crc = reserved_ == 0 ? body_crc_
                             : static_cast<std::uint32_t>(crc32_combine(crc_of(prefix), body_crc_,
                                                                        static_cast<z_off_t>(body_size_)));
  const auto end_pos = out_.tellp();

  std::vector<std::uint8_t> sizes;
  put(sizes, entry.crc, 4);
  put(sizes, entry.size >= k32 ? k32 : entry.size, 4);
  put(sizes, entry.size >= k32 ? k32 : entry.size, 4);
  out_.seekp(static_cast<std::streamoff>(entry.local_offset + 14));
  out_.write(reinterpret_cast<const char*>(sizes.data()), static_cast<std::streamsize>(sizes.size()));

  std::vector<std::uint8_t> extra;
  put(extra, entry.size, 8);
  put(extra, entry.size, 8);
  out_.seekp(static_cast<std::streamoff>(data_start_ - 16));
  out_.write(reinterpret_cast<const char*>(extra.data()), static_cast<std::streamsize>(extra.size()));
  if (reserved_ > 0) out_.write(reinterpret_cast<const char*>(prefix.data()), static_cast<std::streamsize>(reserved_));
  out_.seekp(end_pos);
  if (!out_) throw IoError("write failed for archive member " + entry.name);
  open_entry_ = false;
}

void ZipWriter::close() {
  if (closed_) return;
  if (open_entry_) throw IoError("zip writer misuse: member still open at close");
  closed_ = true;
  const std::uint64_t cd_offset = static_cast<std::uint64_t>(out_.tellp());
  std::vector<std::uint8_t> cd;
  for (const Entry& e : entries_) {
    const bool big_size = e.size >= k32, big_offset = e.local_offset >= k32;
    std::vector<std::uint8_t> extra;
    if (big_size || big_offset) {
      put(extra, 0x0001, 2);
      put(extra, (big_size ? 16 : 0) + (big_offset ? 8 : 0), 2);
      if (big_size) {
        put(extra, e.size, 8);
        put(extra, e.size, 8);
      }
      if (big_offset) put(extra, e.local_offset, 8);
    }
    put(cd, kCentralSig, 4);
    put(cd, 45, 2);
    put(cd, 45, 2);
    put(cd, 0, 2);
    put(cd, 0, 2);
    put(cd, kDosTime, 2);
    put(cd, kDosDate, 2);
    put(cd, e.crc, 4);
    put(cd, big_size ? k32 : e.size, 4);
    put(cd, big_size ? k32 : e.size, 4);
    put(cd, e.name.size(), 2);
    put(cd, extra.size(), 2);
    put(cd, 0, 2);
    put(cd, 0, 2);
    put(cd, 0, 2);
    put(cd, 0, 4);
    put(cd, big_offset ? k32 : e.local_offset, 4);
    cd.insert(cd.end(), e.name.begin(), e.name.end());
    cd.insert(cd.end(), extra.begin(), extra.end());
  }
  const std::uint64_t cd_size = cd.size();
  const std::uint64_t count = entries_.size();
  const bool zip64 = count >= 0xffff || cd_offset >= k32 || cd_size >= k32;
  if (zip64) {
    const std::uint64_t record = cd_offset + cd_size;
    put(cd, kZip64EndSig, 4);
    put(cd, 44, 8);
    put(cd, 45, 2);
    put(cd, 45, 2);
    put(cd, 0, 4);
    put(cd, 0, 4);
    put(cd, count, 8);
    put(cd, count, 8);
    put(cd, cd_size, 8);
    put(cd, cd_offset, 8);
    put(cd, kZip64LocatorSig, 4);
    put(cd, 0, 4);
    put(cd, record, 8);
    put(cd, 1, 4);
  }
  put(cd, kEndSig, 4);
  put(cd, 0, 2);
  put(cd, 0, 2);
  put(cd, zip64 ? 0xffff : count, 2);
  put(cd, zip64 ? 0xffff : count, 2);
  put(cd, zip64 ? k32 : cd_size, 4);
  put(cd, zip64 ? k32 : cd_offset, 4);
  put(cd, 0, 2);
  out_.write(reinterpret_cast<const char*>(cd.data()), static_cast<std::streamsize>(cd.size()));
  out_.flush();
  if (!out_) throw IoError("failed to finish zip archive");
  out_.close();
}

} // namespace cubehodge::pipeline
