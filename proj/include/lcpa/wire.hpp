#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/error.hpp"

namespace lcpa::wire {

// Frame: u32 LE payload length | u8 type | payload. All integers little
// endian, bit strings packed LSB first.

enum class MessageType : std::uint8_t { seed = 1, confirm = 2, result = 3 };

enum class Outcome : std::uint8_t { confirmed = 0, mismatch = 1, aborted_no_key = 2 };

inline const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::seed: return "SEED";
    case MessageType::confirm: return "CONFIRM";
    case MessageType::result: return "RESULT";
  }
  return "?";
}

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::confirmed: return "confirmed";
    case Outcome::mismatch: return "mismatch";
    case Outcome::aborted_no_key: return "aborted-no-key";
  }
  return "?";
}

inline constexpr std::size_t frame_header_size = 5;

struct Frame {
  MessageType type{};
  std::vector<std::uint8_t> payload;
};

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{in[at + i]} << (8 * i);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > UINT32_MAX) throw ContractError("frame payload exceeds 4 GiB");
  std::vector<std::uint8_t> out;
  out.reserve(frame_header_size + f.payload.size());
  detail::put_le(out, f.payload.size(), 4);
  out.push_back(static_cast<std::uint8_t>(f.type));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

// Parses the 5-byte header; returns the payload length.
inline std::uint32_t decode_header(std::span<const std::uint8_t> header, MessageType& type) {
  if (header.size() != frame_header_size) throw ProtocolError("frame header must be 5 bytes");
  const std::uint8_t t = header[4];
  if (t < 1 || t > 3) throw ProtocolError("unknown message type " + std::to_string(t));
  type = static_cast<MessageType>(t);
  return static_cast<std::uint32_t>(detail::get_le(header, 0, 4));
}

struct SeedMessage {
  std::uint64_t n = 0;
  std::uint64_t l = 0;
  BitString bits;  // n + l - 1 bits
};

struct ConfirmMessage {
  std::uint32_t tag_bits = 0;
  BitString digest;
};

struct ResultMessage {
  Outcome outcome{};
};

inline Frame encode(const SeedMessage& m) {
  Frame f{MessageType::seed, {}};
  detail::put_le(f.payload, m.n, 8);
  detail::put_le(f.payload, m.l, 8);
  const auto body = m.bits.to_bytes();
  f.payload.insert(f.payload.end(), body.begin(), body.end());
  return f;
}

inline Frame encode(const ConfirmMessage& m) {
  Frame f{MessageType::confirm, {}};
  detail::put_le(f.payload, m.tag_bits, 4);
  const auto body = m.digest.to_bytes();
  f.payload.insert(f.payload.end(), body.begin(), body.end());
  return f;
}

inline Frame encode(const ResultMessage& m) {
  return Frame{MessageType::result, {static_cast<std::uint8_t>(m.outcome)}};
}

inline void expect_type(const Frame& f, MessageType t) {
  if (f.type != t) {
    throw ProtocolError(std::string("expected ") + to_string(t) + ", received " + to_string(f.type));
  }
}

inline SeedMessage decode_seed(const Frame& f) {
  expect_type(f, MessageType::seed);
  const std::span<const std::uint8_t> p = f.payload;
  if (p.size() < 16) throw ProtocolError("SEED payload shorter than its (n, l) header");
  SeedMessage m;
  m.n = detail::get_le(p, 0, 8);
  m.l = detail::get_le(p, 8, 8);
  if (m.n < 1 || m.l < 1) throw ProtocolError("SEED declares n or l of zero");
  const std::uint64_t bits = m.n + m.l - 1;
  if (p.size() - 16 != (bits + 7) / 8) {
    throw ProtocolError("SEED body has " + std::to_string(p.size() - 16) + " bytes, (n, l) imply " +
                        std::to_string((bits + 7) / 8));
  }
  try {
    m.bits = BitString::from_bytes(p.subspan(16), static_cast<std::size_t>(bits));
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("SEED body: ") + e.what());
  }
  return m;
}

inline ConfirmMessage decode_confirm(const Frame& f) {
  expect_type(f, MessageType::confirm);
  const std::span<const std::uint8_t> p = f.payload;
  if (p.size() < 4) throw ProtocolError("CONFIRM payload shorter than its tag length");
  ConfirmMessage m;
  m.tag_bits = static_cast<std::uint32_t>(detail::get_le(p, 0, 4));
  if (p.size() - 4 != (std::size_t{m.tag_bits} + 7) / 8) throw ProtocolError("CONFIRM digest length mismatch");
  try {
    m.digest = BitString::from_bytes(p.subspan(4), m.tag_bits);
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("CONFIRM body: ") + e.what());
  }
  return m;
}

inline ResultMessage decode_result(const Frame& f) {
  expect_type(f, MessageType::result);
  if (f.payload.size() != 1 || f.payload[0] > 2) throw ProtocolError("malformed RESULT payload");
  return ResultMessage{static_cast<Outcome>(f.payload[0])};
}

}  // namespace lcpa::wire
