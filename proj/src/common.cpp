#include "utm/common.hpp"

namespace utm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::AccessDenied: return "access-denied";
    case ErrorCode::UnknownDrone: return "unknown-drone";
    case ErrorCode::MalformedRid: return "malformed-rid";
    case ErrorCode::InvalidDms: return "invalid-dms";
    case ErrorCode::InvalidDeparture: return "invalid-departure";
    case ErrorCode::ScenarioInvalid: return "scenario-invalid";
    case ErrorCode::SchemaMismatch: return "schema-mismatch";
    case ErrorCode::CorruptPayload: return "corrupt-payload";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::UnknownDemo: return "unknown-demo";
  }
  return "unknown";
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

std::vector<std::uint8_t> from_hex(std::string_view text) {
  if (text.starts_with("0x")) text.remove_prefix(2);
  if (text.size() % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "odd-length hex string");
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    int hi = nibble(text[i]);
    int lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::InvalidArgument, "invalid hex digit");
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

}  // namespace utm
