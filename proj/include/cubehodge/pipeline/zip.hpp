#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace cubehodge::pipeline {

/// Reads stored and deflated members of a zip archive, including zip64.
class ZipReader {
public:
  explicit ZipReader(const std::filesystem::path& path);

  std::vector<std::string> names() const;
  bool contains(const std::string& name) const;
  /// Decompressed member bytes; CRC is verified. Throws IoError.
  std::vector<std::uint8_t> read(const std::string& name) const;

private:
  struct Entry {
    std::string name;
    std::uint16_t method = 0;
    std::uint32_t crc = 0;
    std::uint64_t compressed = 0;
    std::uint64_t uncompressed = 0;
    std::uint64_t local_offset = 0;
  };
  const Entry& find(const std::string& name) const;

  std::filesystem::path path_;
  std::vector<Entry> entries_;
};

/// Writes an uncompressed zip archive with fixed timestamps so equal
/// content gives equal bytes. Members can be streamed; a reserved prefix
/// can be filled in when the member is finished (used for .npy headers
/// whose shape is only known at the end).
class ZipWriter {
public:
  explicit ZipWriter(const std::filesystem::path& path);
  ~ZipWriter();
  ZipWriter(const ZipWriter&) = delete;
  ZipWriter& operator=(const ZipWriter&) = delete;

  void add(const std::string& name, std::span<const std::uint8_t> bytes);

  void begin(const std::string& name, std::size_t reserved_prefix = 0);
  void write(std::span<const std::uint8_t> bytes);
  /// prefix must be exactly reserved_prefix bytes long.
  void end(std::span<const std::uint8_t> prefix = {});

  /// Writes the central directory. Called by the destructor if needed, but
  /// errors are only reported when called explicitly.
  void close();

private:
  struct Entry {
    std::string name;
    std::uint32_t crc = 0;
    std::uint64_t size = 0;
    std::uint64_t local_offset = 0;
  };

  std::ofstream out_;
  std::vector<Entry> entries_;
  bool open_entry_ = false;
  bool closed_ = false;
  std::size_t reserved_ = 0;
  std::uint64_t data_start_ = 0;
  std::uint32_t body_crc_ = 0;
  std::uint64_t body_size_ = 0;
};

} // namespace cubehodge::pipeline
