#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace beamccs {

/// File-level failure with a machine-checkable kind. Loaders distinguish a
/// malformed header, a truncated payload and a checksum mismatch.
struct IoError : std::runtime_error {
  enum class Kind {
    open_failed,
    write_failed,
    bad_magic,
    bad_manifest,
    truncated,
    checksum_mismatch,
    structural,
  };

  IoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}

  Kind kind;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::string to_hex64(std::uint64_t value);

// Little-endian scalar append.
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);
void put_f64(std::vector<std::uint8_t>& out, double v);

/// Cursor over a little-endian byte buffer; reads past the end throw
/// IoError{truncated}.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16();
  std::uint64_t u64();
  float f32();
  double f64();
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

/// Container layout shared by datasets and checkpoints:
/// 8-byte magic, u64 manifest length, UTF-8 JSON manifest, raw payload.
struct FramedFile {
  nlohmann::json manifest;
  std::vector<std::uint8_t> payload;
};

void write_framed(const std::string& path, const char magic[8],
                  const nlohmann::json& manifest,
                  std::span<const std::uint8_t> payload);
FramedFile read_framed(const std::string& path, const char magic[8]);

/// Reads the magic of a file on disk; empty string when shorter than 8 bytes.
std::string peek_magic(const std::string& path);

}  // namespace beamccs
