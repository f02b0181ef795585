#ifndef URBANFUSE_BINARY_IO_HPP
#define URBANFUSE_BINARY_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace urbanfuse {

/// Appends little-endian encoded values to a byte buffer.
class ByteWriter {
 public:
  void put_bytes(std::string_view bytes);
  void put_u8(std::uint8_t v);
  void put_u16(std::uint16_t v);
  void put_u32(std::uint32_t v);
  void put_f32(float v);
  void put_f64(double v);

  const std::vector<std::uint8_t>& bytes() const { return buffer_; }

 private:
  std::vector<std::uint8_t> buffer_;
};

/// Reads little-endian values; throws ErrorKind::format on truncation.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  std::string get_bytes(std::size_t n);
  std::uint8_t get_u8();
  std::uint16_t get_u16();
  std::uint32_t get_u32();
  float get_f32();
  double get_f64();

  std::size_t remaining() const { return bytes_.size() - offset_; }
  const std::string& source() const { return source_; }

 private:
  void require(std::size_t n) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
  std::string source_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// "MMCK" container: a flat list of named f64 arrays.

struct NamedArray {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<double> data;  // row-major

  std::size_t element_count() const;
};

inline constexpr std::string_view kCheckpointMagic = "MMCK";
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_container(std::span<const NamedArray> arrays);
std::vector<NamedArray> decode_container(std::span<const std::uint8_t> bytes,
                                         const std::string& source);

void write_container(const std::filesystem::path& path, std::span<const NamedArray> arrays);
std::vector<NamedArray> read_container(const std::filesystem::path& path);

/// Looks up an array by name; throws ErrorKind::format naming the source when absent.
const NamedArray& require_array(std::span<const NamedArray> arrays, std::string_view name,
                                const std::string& source);

}  // namespace urbanfuse

#endif
