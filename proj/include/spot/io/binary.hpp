#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "spot/errors.hpp"

// Little-endian primitive readers/writers shared by the on-disk formats.
namespace spot::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <class T>
void write_pod(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const char* what) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) {
    throw FormatError(std::string("truncated file while reading ") + what);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, const char* what,
                               std::uint32_t max_len = 1u << 20) {
  const auto len = read_pod<std::uint32_t>(in, what);
  if (len > max_len) {
    throw FormatError(std::string("implausible length for ") + what);
  }
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) {
    throw FormatError(std::string("truncated file while reading ") + what);
  }
  return s;
}

inline void write_magic(std::ostream& out, const char (&magic)[9]) {
  out.write(magic, 8);
}

inline void expect_magic(std::istream& in, const char (&magic)[9],
                         const char* format_name) {
  char bytes[8];
  if (!in.read(bytes, 8) || std::memcmp(bytes, magic, 8) != 0) {
    throw FormatError(std::string("bad magic bytes: not a ") + format_name +
                      " file");
  }
}

}  // namespace spot::io
