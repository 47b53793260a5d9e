#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "utm/common.hpp"

namespace utm {

using nlohmann::json;

struct Event {
  std::string name;
  json data;

  bool operator==(const Event&) const = default;
};

struct TxResult {
  bool success = false;
  json payload;        // success only
  std::string reason;  // revert only

  bool operator==(const TxResult&) const = default;
};

/// One caller-attributed call against a contract, successful or reverted.
struct Transaction {
  std::uint64_t tx_id = 0;
  AccountId caller;
  AccountId to;
  std::string op;
  json args = json::object();
  Amount value = 0;
  Timestamp timestamp = 0;
  TxResult result;
  std::vector<Event> events;
  std::uint64_t state_writes = 0;
  /// Placeholder for a caller signature; attribution is trusted today.
  std::string signature;

  bool reverted() const { return !result.success; }
  bool operator==(const Transaction&) const = default;
};

json to_json(const Transaction& tx);
Transaction transaction_from_json(const json& j);

/// Compact JSON with sorted keys. This is the hashed form.
std::string canonical_bytes(const Transaction& tx);
Digest transaction_hash(const Transaction& tx);

struct Block {
  std::uint64_t index = 0;
  Digest prev_hash;
  std::vector<Transaction> transactions;
  Digest hash;

  bool operator==(const Block&) const = default;
};

/// SHA-256(index as u64 big-endian || prev_hash || each tx's canonical
/// bytes followed by '\n').
Digest compute_block_hash(std::uint64_t index, const Digest& prev_hash,
                          std::span<const Transaction> txs);

Block make_block(std::uint64_t index, const Digest& prev_hash,
                 std::vector<Transaction> txs);

json to_json(const Block& block);
Block block_from_json(const json& j);

struct ChainCheck {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_block;
  std::string reason;
};

ChainCheck check_chain(std::span<const Block> blocks);

inline bool verify_chain(std::span<const Block> blocks) {
  return check_chain(blocks).ok;
}

}  // namespace utm
