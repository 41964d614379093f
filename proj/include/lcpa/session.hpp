#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/entropy.hpp"
#include "lcpa/error.hpp"
#include "lcpa/finite_size.hpp"
#include "lcpa/pipeline.hpp"
#include "lcpa/toeplitz.hpp"
#include "lcpa/transport.hpp"
#include "lcpa/wire.hpp"

namespace lcpa {

// Two-party amplification over an authenticated byte stream:
//
//   alice -> bob   SEED     (n, l, Toeplitz seed)
//   bob   -> alice CONFIRM  (digest of bob's key)
//   alice -> bob   RESULT   (confirmed | mismatch)
//
// When the key rate is not positive alice sends RESULT(aborted-no-key)
// alone and no seed is ever generated.

enum class Role { alice, bob };

struct SessionConfig {
  Role role = Role::alice;
  std::size_t n = 0;
  FiniteSizeParams finite_size;  // n is taken from the field above
  RateInputs rate;
  std::string transport;  // endpoint, for reporting
  std::uint32_t confirm_tag_bits = 64;
  PipelineOptions pipeline;
};

struct TranscriptEntry {
  wire::MessageType type{};
  bool sent = false;
  std::size_t length = 0;  // payload bytes
  std::uint64_t digest = 0;
};

struct SessionTranscript {
  std::vector<TranscriptEntry> messages;
  wire::Outcome outcome = wire::Outcome::aborted_no_key;
  // Digest of the SEED payload re-encoded from the seed this side hashed with.
  std::uint64_t applied_seed_digest = 0;

  // SEED, CONFIRM, RESULT in that order; an abort is a lone RESULT.
  bool order_valid() const {
    using wire::MessageType;
    if (messages.size() == 1) return messages[0].type == MessageType::result;
    return messages.size() == 3 && messages[0].type == MessageType::seed &&
           messages[1].type == MessageType::confirm && messages[2].type == MessageType::result;
  }
};

struct SessionResult {
  BitString key;  // empty unless confirmed
  SessionTranscript transcript;
  KeyRateResult rate;
};

class SessionError : public Error {
 public:
  SessionError(ErrorKind kind, const std::string& what, SessionTranscript transcript)
      : Error(kind, what), transcript_(std::move(transcript)) {}

  const SessionTranscript& transcript() const noexcept { return transcript_; }

 private:
  SessionTranscript transcript_;
};

inline std::uint64_t payload_digest(std::span<const std::uint8_t> bytes) {
  return std::hash<std::string_view>{}(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

// Key-confirmation tag: a second Toeplitz hash of the key down to tag_bits.
// Its seed is expanded from a digest of the amplification seed, so both
// sides derive it without an extra message.
inline BitString confirm_digest(const BitString& key, const ToeplitzSeed& pa_seed, std::uint32_t tag_bits) {
  if (key.empty() || tag_bits < 1) throw ContractError("confirmation needs a non-empty key and tag");
  const auto words = pa_seed.bits().words();
  const std::uint64_t h = std::hash<std::string_view>{}(std::string_view(
      reinterpret_cast<const char*>(words.data()), words.size() * sizeof(BitString::word_type)));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(pa_seed.n()), static_cast<std::uint32_t>(pa_seed.l()), tag_bits,
                    0x636f6e66u};
  std::mt19937_64 gen(seq);
  ToeplitzSeed confirm(random_bits(key.size() + tag_bits - 1, gen), key.size(), tag_bits);
  return hash_direct(key, confirm);
}

namespace detail {

class Recorder {
 public:
  Recorder(Channel& channel, SessionTranscript& transcript) : channel_(channel), transcript_(transcript) {}

  void send(const wire::Frame& f) {
    channel_.send_frame(f);
    transcript_.messages.push_back({f.type, true, f.payload.size(), payload_digest(f.payload)});
  }

  wire::Frame recv() {
    wire::Frame f = channel_.recv_frame();
    transcript_.messages.push_back({f.type, false, f.payload.size(), payload_digest(f.payload)});
    return f;
  }

 private:
  Channel& channel_;
  SessionTranscript& transcript_;
};

inline std::uint64_t seed_digest(const ToeplitzSeed& seed) {
  return payload_digest(wire::encode(wire::SeedMessage{seed.n(), seed.l(), seed.bits()}).payload);
}

inline void run_alice(const SessionConfig& cfg, const BitString& weak_key, Recorder& io,
                               SessionResult& result, const EntropySource& entropy) {
  const std::size_t l = result.rate.l;
  if (l == 0) {
    io.send(wire::encode(wire::ResultMessage{wire::Outcome::aborted_no_key}));
    result.transcript.outcome = wire::Outcome::aborted_no_key;
    return;
  }
  const ToeplitzSeed seed = generate_seed(cfg.n, l, entropy);
  io.send(wire::encode(wire::SeedMessage{seed.n(), seed.l(), seed.bits()}));
  result.transcript.applied_seed_digest = seed_digest(seed);

  BitString key = run_pipeline(weak_key, seed, cfg.pipeline).key;
  const BitString mine = confirm_digest(key, seed, cfg.confirm_tag_bits);

  const wire::ConfirmMessage theirs = wire::decode_confirm(io.recv());
  if (theirs.tag_bits != cfg.confirm_tag_bits) {
    throw ProtocolError("peer confirmation tag has " + std::to_string(theirs.tag_bits) + " bits, expected " +
                        std::to_string(cfg.confirm_tag_bits));
  }
  const auto outcome = theirs.digest == mine ? wire::Outcome::confirmed : wire::Outcome::mismatch;
  io.send(wire::encode(wire::ResultMessage{outcome}));
  result.transcript.outcome = outcome;
  if (outcome == wire::Outcome::confirmed) result.key = std::move(key);
}

inline void run_bob(const SessionConfig& cfg, const BitString& weak_key, Recorder& io,
                             SessionResult& result) {
  const wire::Frame first = io.recv();
  if (first.type == wire::MessageType::result) {
    const auto r = wire::decode_result(first);
    if (r.outcome != wire::Outcome::aborted_no_key) throw ProtocolError("RESULT before SEED must be an abort");
    result.transcript.outcome = r.outcome;
    return;
  }
  const wire::SeedMessage sm = wire::decode_seed(first);
  if (sm.n != weak_key.size()) {
    throw ProtocolError("SEED is for n = " + std::to_string(sm.n) + ", local weak key has " +
                        std::to_string(weak_key.size()) + " bits");
  }
  if (sm.l != result.rate.l) {
    throw ProtocolError("SEED is for l = " + std::to_string(sm.l) + ", local parameters give l = " +
                        std::to_string(result.rate.l));
  }
  const ToeplitzSeed seed(sm.bits, sm.n, sm.l);
  result.transcript.applied_seed_digest = seed_digest(seed);

  BitString key = run_pipeline(weak_key, seed, cfg.pipeline).key;
  io.send(wire::encode(wire::ConfirmMessage{cfg.confirm_tag_bits, confirm_digest(key, seed, cfg.confirm_tag_bits)}));

  const auto r = wire::decode_result(io.recv());
  if (r.outcome == wire::Outcome::aborted_no_key) throw ProtocolError("abort received after SEED");
  result.transcript.outcome = r.outcome;
  if (r.outcome == wire::Outcome::confirmed) result.key = std::move(key);
}

}  // namespace detail

/// Runs one side of the protocol over `channel`. Both sides derive l from
/// their own finite-size parameters; bob rejects a SEED whose (n, l)
/// disagrees. Keys are returned only when the confirmation digests match.
inline SessionResult run_session(const SessionConfig& cfg, const BitString& weak_key, Channel& channel,
                                 const EntropySource& entropy = system_entropy) {
  if (weak_key.size() != cfg.n) {
    throw ShapeError("weak key has " + std::to_string(weak_key.size()) + " bits, session expects " +
                     std::to_string(cfg.n));
  }
  if (cfg.confirm_tag_bits < 64) throw ParameterError("confirm_tag_bits", "must be >= 64");

  SessionResult result;
  FiniteSizeParams fs = cfg.finite_size;
  fs.n = cfg.n;
  result.rate = evaluate_key_rate(fs, cfg.rate);
  detail::Recorder io(channel, result.transcript);
  try {
    if (cfg.role == Role::alice) {
      detail::run_alice(cfg, weak_key, io, result, entropy);
    } else {
      detail::run_bob(cfg, weak_key, io, result);
    }
  } catch (const Error& e) {
    throw SessionError(e.kind(), e.what(), result.transcript);
  }
  return result;
}

}  // namespace lcpa
