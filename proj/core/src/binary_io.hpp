#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ccreid/error.hpp"

namespace ccreid {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

// Buffered little-endian writer; the file is only created on finish().
class BinaryWriter {
 public:
  explicit BinaryWriter(std::filesystem::path path) : path_(std::move(path)) {}

  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename T>
  void pod(T v) { bytes(&v, sizeof v); }
  void u8(std::uint8_t v) { pod(v); }
  void u16(std::uint16_t v) { pod(v); }
  void u32(std::uint32_t v) { pod(v); }
  void u64(std::uint64_t v) { pod(v); }
  void i32(std::int32_t v) { pod(v); }
  void i64(std::int64_t v) { pod(v); }
  void f64(double v) { pod(v); }

  void finish() {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path_.string() + " for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::vector<char> buf_;
};

// Reads a whole file into memory; every accessor names the field it was
// reading so truncation errors point at the spot.
class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void bytes(void* p, std::size_t n, const char* field) {
    if (remaining() < n) throw Error(ErrorCode::FormatError, std::string("truncated while reading ") + field);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T pod(const char* field) {
    T v;
    bytes(&v, sizeof v, field);
    return v;
  }
  std::uint8_t u8(const char* f) { return pod<std::uint8_t>(f); }
  std::uint16_t u16(const char* f) { return pod<std::uint16_t>(f); }
  std::uint32_t u32(const char* f) { return pod<std::uint32_t>(f); }
  std::uint64_t u64(const char* f) { return pod<std::uint64_t>(f); }
  std::int32_t i32(const char* f) { return pod<std::int32_t>(f); }
  std::int64_t i64(const char* f) { return pod<std::int64_t>(f); }
  double f64(const char* f) { return pod<double>(f); }

  std::size_t remaining() const noexcept { return buf_.size() - pos_; }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace ccreid
