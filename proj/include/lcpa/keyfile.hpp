#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/error.hpp"

namespace lcpa::keyfile {

// Layout: "PAK1" | u64 little-endian bit length | ceil(len/8) packed bytes,
// LSB first, zero-padded final byte. Seeds use the same container.

inline constexpr std::array<char, 4> magic = {'P', 'A', 'K', '1'};
inline constexpr std::size_t header_size = 12;

inline std::vector<std::uint8_t> encode(const BitString& bits) {
  std::vector<std::uint8_t> out(header_size);
  std::memcpy(out.data(), magic.data(), magic.size());
  const std::uint64_t len = bits.size();
  for (int i = 0; i < 8; ++i) out[4 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  const auto body = bits.to_bytes();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

inline BitString decode(std::span<const std::uint8_t> data) {
  if (data.size() < magic.size()) throw ParseError(data.size(), "truncated magic");
  if (std::memcmp(data.data(), magic.data(), magic.size()) != 0) throw ParseError(0, "bad magic, expected PAK1");
  if (data.size() < header_size) throw ParseError(data.size(), "truncated bit-length header");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= std::uint64_t{data[4 + i]} << (8 * i);
  const std::uint64_t need = (len + 7) / 8;
  const std::size_t body = data.size() - header_size;
  if (body < need) {
    throw ParseError(data.size(), "body ends after " + std::to_string(body) + " bytes, header declares " +
                                      std::to_string(len) + " bits (" + std::to_string(need) + " bytes)");
  }
  if (body > need) throw ParseError(header_size + need, "trailing bytes after declared body");
  try {
    return BitString::from_bytes(data.subspan(header_size), static_cast<std::size_t>(len));
  } catch (const ParseError& e) {
    throw ParseError(header_size + e.offset(), "non-zero padding bits in final byte");
  }
}

inline void write(const std::filesystem::path& path, const BitString& bits) {
  const auto bytes = encode(bits);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::parse, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::parse, "short write to " + path.string());
}

inline BitString read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw ParseError(0, "read failed on " + path.string());
  return decode(bytes);
}

}  // namespace lcpa::keyfile
