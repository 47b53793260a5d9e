#include "utm/rid.hpp"

#include <limits>

#include "utm/sha256.hpp"

namespace utm::rid {

namespace {

constexpr std::uint8_t kUnitSeparator = 0x1F;

Error malformed(const std::string& why) {
  return Error(ErrorCode::MalformedRid, "malformed-rid: " + why);
}

template <typename T>
void put_be(std::uint8_t* out, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[sizeof(T) - 1 - i] = static_cast<std::uint8_t>(u & 0xff);
    u >>= 8;
  }
}

template <typename T>
T get_be(const std::uint8_t* in) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u = static_cast<U>((u << 8) | in[i]);
  return static_cast<T>(u);
}

void check_point(const DmsPoint& p, const char* which) {
  if (!in_range(p)) throw malformed(std::string(which) + " out of range");
}

}  // namespace

Wire encode(const RidMessage& msg) {
  const auto& f = msg.faa;
  if (f.timestamp < 0) throw malformed("negative timestamp");
  if (f.altitude_cm < 0) throw malformed("negative altitude");
  if (f.velocity_cms < 0) throw malformed("negative velocity");
  if (f.altitude_cm > std::numeric_limits<std::uint32_t>::max()) throw malformed("altitude overflow");
  if (f.velocity_cms > std::numeric_limits<std::uint32_t>::max()) throw malformed("velocity overflow");
  check_point(f.drone_location, "drone location");
  check_point(f.control_station, "control station location");

  Wire out{};
  put_be<std::uint64_t>(&out[0], static_cast<std::uint64_t>(f.timestamp));
  put_be<std::int32_t>(&out[8], f.drone_location.lat_arcsec);
  put_be<std::int32_t>(&out[12], f.drone_location.lon_arcsec);
  put_be<std::int32_t>(&out[16], f.control_station.lat_arcsec);
  put_be<std::int32_t>(&out[20], f.control_station.lon_arcsec);
  put_be<std::uint32_t>(&out[24], static_cast<std::uint32_t>(f.altitude_cm));
  put_be<std::uint32_t>(&out[28], static_cast<std::uint32_t>(f.velocity_cms));
  std::copy(msg.rid_vc.bytes.begin(), msg.rid_vc.bytes.end(), out.begin() + 32);
  return out;
}

RidMessage decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kWireSize) {
    throw malformed("expected " + std::to_string(kWireSize) + " bytes, got " +
                    std::to_string(bytes.size()));
  }
  const std::uint8_t* p = bytes.data();
  auto ts = get_be<std::uint64_t>(p);
  if (ts > static_cast<std::uint64_t>(std::numeric_limits<Timestamp>::max())) {
    throw malformed("timestamp overflow");
  }
  RidMessage msg;
  msg.faa.timestamp = static_cast<Timestamp>(ts);
  msg.faa.drone_location = {get_be<std::int32_t>(p + 8), get_be<std::int32_t>(p + 12)};
  msg.faa.control_station = {get_be<std::int32_t>(p + 16), get_be<std::int32_t>(p + 20)};
  msg.faa.altitude_cm = get_be<std::uint32_t>(p + 24);
  msg.faa.velocity_cms = get_be<std::uint32_t>(p + 28);
  check_point(msg.faa.drone_location, "drone location");
  check_point(msg.faa.control_station, "control station location");
  std::copy(p + 32, p + 64, msg.rid_vc.bytes.begin());
  return msg;
}

std::string encode_hex(const RidMessage& msg) { return to_hex(encode(msg)); }

RidMessage decode_hex(std::string_view hex) {
  std::vector<std::uint8_t> raw;
  try {
    raw = from_hex(hex);
  } catch (const Error&) {
    throw malformed("not a hex string");
  }
  return decode(raw);
}

std::vector<std::uint8_t> commitment_preimage(const PlanCommitment& plan) {
  std::vector<std::uint8_t> out(plan.nonce.bytes.begin(), plan.nonce.bytes.end());
  auto field = [&](std::string_view s) {
    out.push_back(kUnitSeparator);
    out.insert(out.end(), s.begin(), s.end());
  };
  field(plan.owner.hex());
  field(format_dms_point(plan.source));
  field(format_dms_point(plan.destination));
  field(plan.departure_date);
  field(plan.departure_time);
  return out;
}

Digest compute_rid_vc(const PlanCommitment& plan) {
  return sha256(commitment_preimage(plan));
}

bool verify_rid_vc(std::span<const std::uint8_t> candidate,
                   const PlanCommitment& plan) {
  if (candidate.size() != Digest::size()) return false;
  Digest expected = compute_rid_vc(plan);
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < Digest::size(); ++i) diff |= candidate[i] ^ expected.bytes[i];
  return diff == 0;
}

}  // namespace utm::rid
