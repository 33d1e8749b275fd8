#pragma once

// Little-endian byte encoding shared by the model, feature and code files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fasthash/error.hpp"

namespace fasthash {

class ByteWriter {
 public:
  void bytes(std::string_view raw) { buffer_.insert(buffer_.end(), raw.begin(), raw.end()); }
  void u8(std::uint8_t v) { buffer_.push_back(v); }
  void i8(std::int8_t v) { buffer_.push_back(static_cast<std::uint8_t>(v)); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  const std::vector<std::uint8_t>& data() const noexcept { return buffer_; }
  std::vector<std::uint8_t> release() { return std::move(buffer_); }

 private:
  void put(std::uint64_t v, int width) {
    for (int b = 0; b < width; ++b) buffer_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  std::vector<std::uint8_t> buffer_;
};

// Every read past the end throws TruncatedFileError.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  std::string bytes(std::size_t count) {
    need(count);
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), count);
    pos_ += count;
    return out;
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::int8_t i8() { return static_cast<std::int8_t>(u8()); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

  // Guards allocations driven by counts read from the file.
  void need(std::size_t count) const {
    if (count > remaining()) throw TruncatedFileError(what_ + ": file is truncated");
  }

 private:
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) v |= std::uint64_t{data_[pos_ + b]} << (8 * b);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace fasthash
