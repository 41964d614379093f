#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "lcpa/entropy.hpp"
#include "lcpa/keyfile.hpp"
#include "lcpa/transport.hpp"
#include "lcpa/wire.hpp"

using namespace lcpa;

TEST(KeyFile, RoundTrip) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {1u, 7u, 8u, 13u, 64u, 1000u, 4097u}) {
    const BitString s = random_bits(n, rng);
    const auto bytes = keyfile::encode(s);
    EXPECT_EQ(bytes.size(), keyfile::header_size + (n + 7) / 8);
    EXPECT_EQ(keyfile::decode(bytes), s);
  }
  const auto path = std::filesystem::temp_directory_path() / "lcpa_keyfile_test.pak";
  const BitString s = random_bits(12345, rng);
  keyfile::write(path, s);
  EXPECT_EQ(keyfile::read(path), s);
  std::filesystem::remove(path);
}

TEST(KeyFile, RejectsCorruptInput) {
  auto bytes = keyfile::encode(BitString::from_string("1011001110"));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(keyfile::decode(truncated), ParseError);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(keyfile::decode(longer), ParseError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(keyfile::decode(bad_magic), ParseError);
  auto padded = bytes;
  padded.back() |= 0x80;
  EXPECT_THROW(keyfile::decode(padded), ParseError);
  EXPECT_THROW(keyfile::decode(std::vector<std::uint8_t>{'P', 'A', 'K', '1', 1}), ParseError);
  EXPECT_THROW(keyfile::read("/nonexistent/lcpa.pak"), ParseError);
}

TEST(Wire, FramesRoundTrip) {
  std::mt19937_64 rng(2);
  const wire::SeedMessage sm{50, 7, random_bits(56, rng)};
  const wire::SeedMessage back = wire::decode_seed(wire::encode(sm));
  EXPECT_EQ(back.n, 50u);
  EXPECT_EQ(back.l, 7u);
  EXPECT_EQ(back.bits, sm.bits);

  const wire::ConfirmMessage cm{64, random_bits(64, rng)};
  EXPECT_EQ(wire::decode_confirm(wire::encode(cm)).digest, cm.digest);
  EXPECT_EQ(wire::decode_result(wire::encode(wire::ResultMessage{wire::Outcome::mismatch})).outcome,
            wire::Outcome::mismatch);

  const auto raw = wire::encode_frame(wire::encode(wire::ResultMessage{wire::Outcome::confirmed}));
  EXPECT_EQ(raw, (std::vector<std::uint8_t>{1, 0, 0, 0, 3, 0}));
}

TEST(Wire, RejectsMalformed) {
  wire::Frame f = wire::encode(wire::SeedMessage{10, 3, BitString(12)});
  f.payload.pop_back();
  EXPECT_THROW(wire::decode_seed(f), ProtocolError);
  EXPECT_THROW(wire::decode_confirm(wire::encode(wire::ResultMessage{})), ProtocolError);
  EXPECT_THROW(wire::decode_result(wire::Frame{wire::MessageType::result, {7}}), ProtocolError);
  wire::MessageType t{};
  const std::vector<std::uint8_t> header = {0, 0, 0, 0, 9};
  EXPECT_THROW(wire::decode_header(header, t), ProtocolError);
}

TEST(Transport, SocketPairCarriesFrames) {
  auto [a, b] = Channel::pair();
  a.send_frame(wire::encode(wire::ConfirmMessage{64, BitString(64)}));
  const wire::Frame f = b.recv_frame();
  EXPECT_EQ(f.type, wire::MessageType::confirm);
  EXPECT_EQ(wire::decode_confirm(f).tag_bits, 64u);
}

TEST(Transport, ClosedPeerIsTransportError) {
  auto [a, b] = Channel::pair();
  { Channel gone = std::move(b); }
  EXPECT_THROW(a.recv_frame(), TransportError);
}

TEST(Transport, EndpointParse) {
  EXPECT_EQ(Endpoint::parse("127.0.0.1:9000").port, 9000);
  EXPECT_EQ(Endpoint::parse(":1").host, "127.0.0.1");
  EXPECT_THROW(Endpoint::parse("nohost"), ParameterError);
  EXPECT_THROW(Endpoint::parse("h:99999"), ParameterError);
}

TEST(Entropy, SeedLength) {
  EXPECT_EQ(generate_seed(100, 10).bits().size(), 109u);
  EXPECT_THROW(generate_seed(0, 10), ParameterError);
}

TEST(Entropy, InjectedZeroSource) {
  const ToeplitzSeed s = generate_seed(77, 13, [](std::span<std::uint8_t> out) { std::fill(out.begin(), out.end(), 0); });
  EXPECT_EQ(s.bits(), BitString(89));
}

TEST(Entropy, FailingSourcePropagates) {
  EXPECT_THROW(generate_seed(8, 8, [](std::span<std::uint8_t>) { throw EntropyError("no entropy"); }), EntropyError);
}

TEST(Entropy, ConsecutiveSeedsDifferInAboutHalfTheBits) {
  const std::size_t n = std::size_t{1} << 20;
  const ToeplitzSeed a = generate_seed(n / 2, n / 2 + 1), b = generate_seed(n / 2, n / 2 + 1);
  ASSERT_EQ(a.bits().size(), n);
  const double diff = static_cast<double>((a.bits() ^ b.bits()).popcount());
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_LT(std::fabs(diff - n / 2.0), 5 * sigma);
  // Full-bit coverage, including the masked final byte.
  const ToeplitzSeed odd = generate_seed(5, 1, [](std::span<std::uint8_t> out) { std::fill(out.begin(), out.end(), 0xff); });
  EXPECT_EQ(odd.bits().popcount(), 5u);
}
