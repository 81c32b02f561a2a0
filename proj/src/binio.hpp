#pragma once

// Little-endian byte buffers for the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "s5dscr/error.hpp"

namespace s5dscr::detail {

class ByteWriter {
 public:
  template <typename U>
  void put(U value) {
    if constexpr (std::is_floating_point_v<U>) {
      using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
      put<Bits>(std::bit_cast<Bits>(value));
    } else {
      for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<unsigned char>((value >> (8 * i)) & 0xFF));
    }
  }
  void put_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) buf_.push_back(b[i]);
  }
  void put_zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    put_bytes(s.data(), s.size());
  }

  const std::vector<unsigned char>& bytes() const { return buf_; }
  void reserve(std::size_t n) { buf_.reserve(n); }

  void write_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    S5DSCR_CHECK(out.good(), ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    S5DSCR_CHECK(out.good(), ErrorCode::Io, "write failed for " + path.string());
  }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> bytes, ErrorCode short_read) : buf_(std::move(bytes)), short_(short_read) {}

  static std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    S5DSCR_CHECK(in.good(), ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  template <typename U>
  U get() {
    need(sizeof(U));
    if constexpr (std::is_floating_point_v<U>) {
      using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
      return std::bit_cast<U>(get<Bits>());
    } else {
      U v = 0;
      for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf_[pos_ + i]) << (8 * i);
      pos_ += sizeof(U);
      return v;
    }
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool starts_with(const char* magic, std::size_t n) const {
    return buf_.size() >= n && std::memcmp(buf_.data(), magic, n) == 0;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  std::size_t remaining() const { return buf_.size() - pos_; }
  std::size_t position() const { return pos_; }
  const unsigned char* cursor() const { return buf_.data() + pos_; }

 private:
  void need(std::size_t n) const {
    S5DSCR_CHECK(buf_.size() - pos_ >= n, short_, "unexpected end of data at byte " + std::to_string(pos_));
  }

  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
  ErrorCode short_;
};

}  // namespace s5dscr::detail
