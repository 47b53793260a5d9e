#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "utm/ledger.hpp"

// File formats. Every artifact starts with a schema header
// {"name": ..., "major": ..., "minor": ...}; loaders reject other names
// and unknown major versions. JSON is written compact with sorted keys,
// currency as decimal strings and digests as 0x-prefixed hex.
namespace utm::persist {

using nlohmann::json;

inline constexpr int kMajor = 1;
inline constexpr int kMinor = 0;

inline constexpr std::string_view kStateSchema = "utm.state";
inline constexpr std::string_view kChainSchema = "utm.chain";
inline constexpr std::string_view kEventsSchema = "utm.events";
inline constexpr std::string_view kScenarioSchema = "utm.scenario";
inline constexpr std::string_view kMetricsSchema = "utm.metrics";

struct SchemaVersion {
  std::string name;
  int major = kMajor;
  int minor = kMinor;
};

json schema_header(std::string_view name);
/// Throws Error(SchemaMismatch) on a different name or unknown major.
SchemaVersion check_schema(const json& header, std::string_view name);

/// Parses JSON text; syntax errors become Error(code) with the parser's
/// line/column message.
json parse_json(std::string_view text, ErrorCode code);

// Amount and Fixed fields accept strings or plain JSON numbers on input.
Amount amount_from(const json& j);
Fixed fixed_from(const json& j);

json to_json(const economics::FeeParams& p);
/// Missing keys keep their defaults.
void merge_from_json(economics::FeeParams& p, const json& j);
json to_json(const uss::UssConfig& c, bool include_seed);
void merge_from_json(uss::UssConfig& c, const json& j);
json to_json(const LedgerConfig& c, bool include_seed);
void merge_from_json(LedgerConfig& c, const json& j);

enum class Visibility {
  Private,    // checkpoint: nonces, seed and the full block list included
  Shareable,  // nonces and seed dropped, serials hashed, blocks omitted
};

json snapshot_json(const Ledger& ledger, Visibility v);
/// Canonical snapshot text (one line, trailing newline).
std::string snapshot(const Ledger& ledger, Visibility v = Visibility::Private);
/// Restores a private snapshot. Throws Error(SchemaMismatch) for shareable
/// exports and Error(CorruptPayload) for anything malformed.
Ledger restore(std::string_view text);
Ledger restore_json(const json& j);

/// Chain log: schema header line, then one block per line.
std::string write_chain_log(std::span<const Block> blocks);

struct ChainLogCheck {
  bool ok = false;
  bool parse_error = false;  // empty file or unreadable header
  std::optional<std::uint64_t> first_bad_block;
  std::uint64_t block_count = 0;
  std::string reason;
};

/// Reads and verifies a chain log. A block line that does not parse, is not
/// in canonical form or breaks the hash chain is reported by block index.
ChainLogCheck verify_chain_log(std::string_view text);
/// Throws Error(ParseError) for an unreadable file and
/// Error(CorruptPayload) naming the block for anything else.
std::vector<Block> read_chain_log(std::string_view text);

/// Event stream: header line, then {"txId","block","name","data"} per event.
std::string write_event_log(std::span<const Block> blocks);

}  // namespace utm::persist
