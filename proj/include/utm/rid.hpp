#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "utm/common.hpp"
#include "utm/geo.hpp"

// Remote ID broadcast: the regulator-mandated fields followed by the
// verification code that commits the flight to a USS-issued plan.
//
// Wire layout, big-endian, 64 bytes:
//   0  u64  timestamp (s)
//   8  i32  drone latitude (arcsec)
//  12  i32  drone longitude (arcsec)
//  16  i32  control station latitude (arcsec)
//  20  i32  control station longitude (arcsec)
//  24  u32  altitude (cm)
//  28  u32  velocity (cm/s)
//  32  [32] verification code

namespace utm::rid {

inline constexpr std::size_t kWireSize = 64;

using Wire = std::array<std::uint8_t, kWireSize>;

struct RidFaa {
  Timestamp timestamp = 0;
  DmsPoint drone_location;
  DmsPoint control_station;
  std::int64_t altitude_cm = 0;
  std::int64_t velocity_cms = 0;

  bool operator==(const RidFaa&) const = default;
};

struct RidMessage {
  RidFaa faa;
  Digest rid_vc;

  bool operator==(const RidMessage&) const = default;
};

/// Throws Error(MalformedRid) for negative or out-of-range fields.
Wire encode(const RidMessage& msg);

/// Throws Error(MalformedRid) on wrong length or out-of-range fields.
RidMessage decode(std::span<const std::uint8_t> bytes);

std::string encode_hex(const RidMessage& msg);
RidMessage decode_hex(std::string_view hex);

/// The plan details a verification code commits to.
struct PlanCommitment {
  Nonce nonce;
  AccountId owner;
  DmsPoint source;
  DmsPoint destination;
  std::string departure_date;  // ddmmyyyy
  std::string departure_time;  // hhmm

  bool operator==(const PlanCommitment&) const = default;
};

/// nonce bytes, then the UTF-8 fields (owner hex, source, destination,
/// date, time), each preceded by a 0x1F unit separator.
std::vector<std::uint8_t> commitment_preimage(const PlanCommitment& plan);

Digest compute_rid_vc(const PlanCommitment& plan);

inline Digest compute_rid_vc(const Nonce& nonce, const AccountId& owner,
                             const DmsPoint& source, const DmsPoint& destination,
                             std::string_view date, std::string_view time) {
  return compute_rid_vc(PlanCommitment{nonce, owner, source, destination,
                                       std::string(date), std::string(time)});
}

/// False for any candidate that is not exactly 32 bytes.
bool verify_rid_vc(std::span<const std::uint8_t> candidate,
                   const PlanCommitment& plan);

}  // namespace utm::rid
