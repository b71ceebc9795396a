#include "beamccs/io_util.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace beamccs {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string to_hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(bytes[pos + i]) << (8 * i);
  }
  return v;
}

}  // namespace

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) { put_le(out, v); }
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) { put_le(out, v); }

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_le(out, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v));
}

void ByteReader::need(std::size_t n) const {
  if (pos_ + n > bytes_.size()) {
    throw IoError(IoError::Kind::truncated, "payload ends unexpectedly");
  }
}

std::uint16_t ByteReader::u16() {
  need(2);
  const auto v = get_le<std::uint16_t>(bytes_, pos_);
  pos_ += 2;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  const auto v = get_le<std::uint64_t>(bytes_, pos_);
  pos_ += 8;
  return v;
}

float ByteReader::f32() {
  need(4);
  const auto v = get_le<std::uint32_t>(bytes_, pos_);
  pos_ += 4;
  return std::bit_cast<float>(v);
}

double ByteReader::f64() {
  need(8);
  const auto v = get_le<std::uint64_t>(bytes_, pos_);
  pos_ += 8;
  return std::bit_cast<double>(v);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(IoError::Kind::open_failed, "cannot open " + path);
  }
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  if (size > 0 &&
      !in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(size))) {
    throw IoError(IoError::Kind::open_failed, "cannot read " + path);
  }
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out ||
      !out.write(reinterpret_cast<const char*>(bytes.data()),
                 static_cast<std::streamsize>(bytes.size()))) {
    throw IoError(IoError::Kind::write_failed, "cannot write " + path);
  }
}

void write_framed(const std::string& path, const char magic[8],
                  const nlohmann::json& manifest,
                  std::span<const std::uint8_t> payload) {
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + text.size() + payload.size());
  bytes.insert(bytes.end(), magic, magic + 8);
  put_u64(bytes, text.size());
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  write_file(path, bytes);
}

FramedFile read_framed(const std::string& path, const char magic[8]) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), magic, 8) != 0) {
    throw IoError(IoError::Kind::bad_magic, path + ": unrecognized header");
  }
  const auto manifest_len = [&] {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[8 + i]) << (8 * i);
    return v;
  }();
  if (manifest_len > bytes.size() - 16) {
    throw IoError(IoError::Kind::truncated, path + ": manifest ends unexpectedly");
  }
  FramedFile out;
  try {
    out.manifest = nlohmann::json::parse(bytes.begin() + 16,
                                         bytes.begin() + 16 + manifest_len);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoError::Kind::bad_manifest,
                  path + ": manifest is not valid JSON: " + e.what());
  }
  out.payload.assign(bytes.begin() + 16 + manifest_len, bytes.end());
  return out;
}

std::string peek_magic(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 8) return {};
  return std::string(bytes.begin(), bytes.begin() + 8);
}

}  // namespace beamccs
