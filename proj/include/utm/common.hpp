#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace utm {

/// Currency in its smallest denomination.
using Amount = std::int64_t;

/// Seconds since the scenario epoch. Never wall-clock time.
using Timestamp = std::int64_t;

using DroneId = std::uint64_t;

enum class ErrorCode {
  InvalidArgument,
  AccessDenied,
  UnknownDrone,
  MalformedRid,
  InvalidDms,
  InvalidDeparture,
  ScenarioInvalid,
  SchemaMismatch,
  CorruptPayload,
  ParseError,
  UnknownDemo,
};

std::string_view to_string(ErrorCode code);

/// Non-contract failure: bad API use, bad input files, access control.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A contract-level revert. The ledger catches it, rolls state back and
/// records `reason` verbatim in the transaction result.
class Revert : public std::runtime_error {
 public:
  explicit Revert(const std::string& reason) : std::runtime_error(reason) {}

  std::string_view reason() const noexcept { return what(); }
};

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Accepts an optional "0x" prefix. Lowercase only, so every value has
/// exactly one textual form.
std::vector<std::uint8_t> from_hex(std::string_view text);

template <std::size_t N, typename Tag>
struct FixedBytes {
  std::array<std::uint8_t, N> bytes{};

  static constexpr std::size_t size() { return N; }

  static FixedBytes from_hex(std::string_view text) {
    auto raw = utm::from_hex(text);
    if (raw.size() != N) {
      throw Error(ErrorCode::InvalidArgument,
                  "expected " + std::to_string(N) + " bytes of hex, got " +
                      std::to_string(raw.size()));
    }
    FixedBytes out;
    for (std::size_t i = 0; i < N; ++i) out.bytes[i] = raw[i];
    return out;
  }

  static FixedBytes from_span(std::span<const std::uint8_t> raw) {
    if (raw.size() != N) {
      throw Error(ErrorCode::InvalidArgument, "wrong byte length");
    }
    FixedBytes out;
    for (std::size_t i = 0; i < N; ++i) out.bytes[i] = raw[i];
    return out;
  }

  std::string hex() const { return "0x" + to_hex(bytes); }

  bool is_zero() const {
    for (auto b : bytes) {
      if (b != 0) return false;
    }
    return true;
  }

  std::span<const std::uint8_t> span() const { return bytes; }

  auto operator<=>(const FixedBytes&) const = default;
};

struct AccountIdTag {};
struct DigestTag {};
struct NonceTag {};

/// 20-byte opaque account address.
using AccountId = FixedBytes<20, AccountIdTag>;
/// SHA-256 output.
using Digest = FixedBytes<32, DigestTag>;
/// Per-mission secret held by the USS.
using Nonce = FixedBytes<16, NonceTag>;

}  // namespace utm
