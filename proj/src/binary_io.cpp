#include "urbanfuse/binary_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "urbanfuse/error.hpp"

namespace urbanfuse {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xFF));
    }
    return out;
  } else {
    return v;
  }
}

}  // namespace

void ByteWriter::put_bytes(std::string_view bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::put_u8(std::uint8_t v) { buffer_.push_back(v); }

void ByteWriter::put_u16(std::uint16_t v) {
  v = to_little(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buffer_.insert(buffer_.end(), p, p + sizeof v);
}

void ByteWriter::put_u32(std::uint32_t v) {
  v = to_little(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buffer_.insert(buffer_.end(), p, p + sizeof v);
}

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::put_f64(double v) {
  auto bits = to_little(std::bit_cast<std::uint64_t>(v));
  const auto* p = reinterpret_cast<const std::uint8_t*>(&bits);
  buffer_.insert(buffer_.end(), p, p + sizeof bits);
}

void ByteReader::require(std::size_t n) const {
  if (remaining() < n) {
    throw Error(ErrorKind::format, source_ + ": truncated payload (need " + std::to_string(n) +
                                       " more bytes at offset " + std::to_string(offset_) + ")");
  }
}

std::string ByteReader::get_bytes(std::size_t n) {
  require(n);
  std::string out(reinterpret_cast<const char*>(bytes_.data() + offset_), n);
  offset_ += n;
  return out;
}

std::uint8_t ByteReader::get_u8() {
  require(1);
  return bytes_[offset_++];
}

std::uint16_t ByteReader::get_u16() {
  require(2);
  std::uint16_t v;
  std::memcpy(&v, bytes_.data() + offset_, 2);
  offset_ += 2;
  return to_little(v);
}

std::uint32_t ByteReader::get_u32() {
  require(4);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + offset_, 4);
  offset_ += 4;
  return to_little(v);
}

float ByteReader::get_f32() { return std::bit_cast<float>(get_u32()); }

double ByteReader::get_f64() {
  require(8);
  std::uint64_t v;
  std::memcpy(&v, bytes_.data() + offset_, 8);
  offset_ += 8;
  return std::bit_cast<double>(to_little(v));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::size_t NamedArray::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_container(std::span<const NamedArray> arrays) {
  ByteWriter w;
  w.put_bytes(kCheckpointMagic);
  w.put_u32(kCheckpointVersion);
  w.put_u32(static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    if (a.name.size() > UINT16_MAX) throw Error(ErrorKind::invalid_argument, "array name too long");
    if (a.dims.size() > UINT8_MAX) throw Error(ErrorKind::invalid_argument, "too many dimensions");
    if (a.element_count() != a.data.size()) {
      throw Error(ErrorKind::dimension, "array '" + a.name + "' dims disagree with payload size");
    }
    w.put_u16(static_cast<std::uint16_t>(a.name.size()));
    w.put_bytes(a.name);
    w.put_u8(static_cast<std::uint8_t>(a.dims.size()));
    for (auto d : a.dims) w.put_u32(d);
    for (double v : a.data) w.put_f64(v);
  }
  return w.bytes();
}

std::vector<NamedArray> decode_container(std::span<const std::uint8_t> bytes,
                                         const std::string& source) {
  ByteReader r(bytes, source);
  if (bytes.size() < 4 || r.get_bytes(4) != kCheckpointMagic) {
    throw Error(ErrorKind::format, source + ": bad magic (expected MMCK)");
  }
  const auto version = r.get_u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::format, source + ": unsupported version " + std::to_string(version));
  }
  const auto count = r.get_u32();
  std::vector<NamedArray> arrays;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.get_bytes(r.get_u16());
    const auto ndim = r.get_u8();
    std::size_t elements = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      a.dims.push_back(r.get_u32());
      elements *= a.dims.back();
    }
    if (elements > r.remaining() / 8) {
      throw Error(ErrorKind::format, source + ": truncated payload in array '" + a.name + "'");
    }
    a.data.resize(elements);
    for (auto& v : a.data) v = r.get_f64();
    arrays.push_back(std::move(a));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorKind::format, source + ": trailing bytes after last array");
  }
  return arrays;
}

void write_container(const std::filesystem::path& path, std::span<const NamedArray> arrays) {
  write_file_bytes(path, encode_container(arrays));
}

std::vector<NamedArray> read_container(const std::filesystem::path& path) {
  return decode_container(read_file_bytes(path), path.string());
}

const NamedArray& require_array(std::span<const NamedArray> arrays, std::string_view name,
                                const std::string& source) {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw Error(ErrorKind::format, source + ": missing array '" + std::string(name) + "'");
}

}  // namespace urbanfuse
