#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace resilisim {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order and assume little-endian hosts");

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    out_.write(bytes.data(), bytes.size());
  }

  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void put_magic(const char (&magic)[5]) { out_.write(magic, 4); }

  std::ostream& stream() { return out_; }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    std::array<char, sizeof(T)> bytes;
    if (!in_.read(bytes.data(), bytes.size())) throw FormatError("unexpected end of binary file");
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
  }

  std::string get_string(std::uint32_t max_len = 1u << 20) {
    const auto n = get<std::uint32_t>();
    if (n > max_len) throw FormatError("string length out of range");
    std::string s(n, '\0');
    if (n > 0 && !in_.read(s.data(), n)) throw FormatError("unexpected end of binary file");
    return s;
  }

  void expect_magic(const char (&magic)[5]) {
    char buf[4];
    if (!in_.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
      throw FormatError(std::string("bad magic, expected ") + magic);
    }
  }

  std::istream& stream() { return in_; }

 private:
  std::istream& in_;
};

}  // namespace resilisim
