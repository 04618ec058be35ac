#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "objf/common/error.hpp"

namespace objf {

// All container formats in this project are little-endian; the implementation
// assumes a little-endian host and writes scalar bytes directly.
static_assert(sizeof(float) == 4 && sizeof(double) == 8, "unexpected float sizes");

uint32_t crc32_bytes(const void* data, size_t size, uint32_t seed = 0);

class BinaryWriter {
public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void write_bytes(const void* data, size_t size);
  void write_u8(uint8_t v) { write_bytes(&v, 1); }
  void write_u32(uint32_t v) { write_bytes(&v, 4); }
  void write_u64(uint64_t v) { write_bytes(&v, 8); }
  void write_i32(int32_t v) { write_bytes(&v, 4); }
  void write_f32(float v) { write_bytes(&v, 4); }
  void write_f64(double v) { write_bytes(&v, 8); }
  void write_magic(const char tag[4]) { write_bytes(tag, 4); }

  // Length-prefixed (u32) string.
  void write_string(const std::string& s);

  template <typename T>
  void write_array(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    write_u64(v.size());
    if (!v.empty()) write_bytes(v.data(), v.size() * sizeof(T));
  }

private:
  std::ostream& out_;
};

class BinaryReader {
public:
  explicit BinaryReader(std::istream& in, std::string context = "binary_io")
      : in_(in), context_(std::move(context)) {}

  void read_bytes(void* data, size_t size);
  uint8_t read_u8() { uint8_t v; read_bytes(&v, 1); return v; }
  uint32_t read_u32() { uint32_t v; read_bytes(&v, 4); return v; }
  uint64_t read_u64() { uint64_t v; read_bytes(&v, 8); return v; }
  int32_t read_i32() { int32_t v; read_bytes(&v, 4); return v; }
  float read_f32() { float v; read_bytes(&v, 4); return v; }
  double read_f64() { double v; read_bytes(&v, 8); return v; }

  void expect_magic(const char tag[4]);
  std::string read_string(size_t max_len = 1 << 20);

  template <typename T>
  std::vector<T> read_array(uint64_t max_count = uint64_t(1) << 32) {
    static_assert(std::is_trivially_copyable_v<T>);
    uint64_t n = read_u64();
    require(n <= max_count, ErrorKind::Parse, context_, "array length out of range");
    std::vector<T> v(n);
    if (n) read_bytes(v.data(), n * sizeof(T));
    return v;
  }

  bool at_eof();

private:
  std::istream& in_;
  std::string context_;
};

// Tagged section with payload CRC, the framing used by the object container.
// Layout: tag u32, length u64, payload bytes, crc32 u32.
void write_section(std::ostream& out, uint32_t tag, const std::string& payload);

struct SectionData {
  uint32_t tag = 0;
  std::string payload;
};

SectionData read_section(std::istream& in, const std::string& context);

uint32_t fourcc(const char tag[4]);

}  // namespace objf
