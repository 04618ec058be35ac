#include "objf/common/binary_io.hpp"

#include <zlib.h>

namespace objf {

uint32_t crc32_bytes(const void* data, size_t size, uint32_t seed) {
  return static_cast<uint32_t>(
      ::crc32(seed, static_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

void BinaryWriter::write_bytes(const void* data, size_t size) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out_) raise(ErrorKind::Io, "binary_io", "write failed");
}

void BinaryWriter::write_string(const std::string& s) {
  write_u32(static_cast<uint32_t>(s.size()));
  if (!s.empty()) write_bytes(s.data(), s.size());
}

void BinaryReader::read_bytes(void* data, size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (in_.gcount() != static_cast<std::streamsize>(size)) {
    raise(ErrorKind::Parse, context_, "unexpected end of data");
  }
}

void BinaryReader::expect_magic(const char tag[4]) {
  char got[4];
  read_bytes(got, 4);
  if (std::memcmp(got, tag, 4) != 0) {
    raise(ErrorKind::Parse, context_,
          "bad magic, expected '" + std::string(tag, 4) + "'");
  }
}

std::string BinaryReader::read_string(size_t max_len) {
  uint32_t n = read_u32();
  require(n <= max_len, ErrorKind::Parse, context_, "string length out of range");
  std::string s(n, '\0');
  if (n) read_bytes(s.data(), n);
  return s;
}

bool BinaryReader::at_eof() {
  return in_.peek() == std::char_traits<char>::eof();
}

uint32_t fourcc(const char tag[4]) {
  uint32_t v;
  std::memcpy(&v, tag, 4);
  return v;
}

void write_section(std::ostream& out, uint32_t tag, const std::string& payload) {
  BinaryWriter w(out);
  w.write_u32(tag);
  w.write_u64(payload.size());
  if (!payload.empty()) w.write_bytes(payload.data(), payload.size());
  w.write_u32(crc32_bytes(payload.data(), payload.size()));
}

SectionData read_section(std::istream& in, const std::string& context) {
  BinaryReader r(in, context);
  SectionData s;
  s.tag = r.read_u32();
  uint64_t len = r.read_u64();
  require(len <= (uint64_t(1) << 33), ErrorKind::Parse, context, "section too large");
  s.payload.resize(len);
  if (len) r.read_bytes(s.payload.data(), len);
  uint32_t stored = r.read_u32();
  uint32_t actual = crc32_bytes(s.payload.data(), s.payload.size());
  require(stored == actual, ErrorKind::Parse, context, "section checksum mismatch");
  return s;
}

}  // namespace objf
