#include "utm/chain.hpp"

#include "utm/sha256.hpp"

namespace utm {

namespace {

Amount parse_amount(const json& j) {
  const auto& s = j.get_ref<const std::string&>();
  if (s.empty() || s.size() > 18) throw Error(ErrorCode::CorruptPayload, "bad amount");
  Amount v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw Error(ErrorCode::CorruptPayload, "bad amount");
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

json to_json(const Transaction& tx) {
  json events = json::array();
  for (const auto& e : tx.events) events.push_back({{"name", e.name}, {"data", e.data}});
  json result = tx.result.success
                    ? json{{"ok", true}, {"payload", tx.result.payload}}
                    : json{{"ok", false}, {"reason", tx.result.reason}};
  return json{{"txId", tx.tx_id},
              {"caller", tx.caller.hex()},
              {"to", tx.to.hex()},
              {"op", tx.op},
              {"args", tx.args},
              {"value", std::to_string(tx.value)},
              {"timestamp", tx.timestamp},
              {"result", std::move(result)},
              {"events", std::move(events)},
              {"writes", tx.state_writes},
              {"signature", tx.signature}};
}

Transaction transaction_from_json(const json& j) {
  Transaction tx;
  tx.tx_id = j.at("txId").get<std::uint64_t>();
  tx.caller = AccountId::from_hex(j.at("caller").get<std::string>());
  tx.to = AccountId::from_hex(j.at("to").get<std::string>());
  tx.op = j.at("op").get<std::string>();
  tx.args = j.at("args");
  tx.value = parse_amount(j.at("value"));
  tx.timestamp = j.at("timestamp").get<Timestamp>();
  const auto& r = j.at("result");
  tx.result.success = r.at("ok").get<bool>();
  if (tx.result.success) {
    tx.result.payload = r.at("payload");
  } else {
    tx.result.reason = r.at("reason").get<std::string>();
  }
  for (const auto& e : j.at("events")) {
    tx.events.push_back(Event{e.at("name").get<std::string>(), e.at("data")});
  }
  tx.state_writes = j.at("writes").get<std::uint64_t>();
  tx.signature = j.at("signature").get<std::string>();
  return tx;
}

std::string canonical_bytes(const Transaction& tx) { return to_json(tx).dump(); }

Digest transaction_hash(const Transaction& tx) { return sha256(canonical_bytes(tx)); }

Digest compute_block_hash(std::uint64_t index, const Digest& prev_hash,
                          std::span<const Transaction> txs) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 0; i < 8; ++i) be[7 - i] = static_cast<std::uint8_t>(index >> (8 * i));
  Sha256 h;
  h.update(be).update(prev_hash.span());
  for (const auto& tx : txs) {
    h.update(canonical_bytes(tx));
    h.update(std::string_view("\n"));
  }
  return h.finish();
}

Block make_block(std::uint64_t index, const Digest& prev_hash,
                 std::vector<Transaction> txs) {
  Block b{index, prev_hash, std::move(txs), {}};
  b.hash = compute_block_hash(b.index, b.prev_hash, b.transactions);
  return b;
}

json to_json(const Block& block) {
  json txs = json::array();
  for (const auto& tx : block.transactions) txs.push_back(to_json(tx));
  return json{{"index", block.index},
              {"prevHash", block.prev_hash.hex()},
              {"hash", block.hash.hex()},
              {"transactions", std::move(txs)}};
}

Block block_from_json(const json& j) {
  Block b;
  b.index = j.at("index").get<std::uint64_t>();
  b.prev_hash = Digest::from_hex(j.at("prevHash").get<std::string>());
  b.hash = Digest::from_hex(j.at("hash").get<std::string>());
  for (const auto& t : j.at("transactions")) b.transactions.push_back(transaction_from_json(t));
  return b;
}

ChainCheck check_chain(std::span<const Block> blocks) {
  Digest expected_prev{};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    auto fail = [&](std::string why) {
      return ChainCheck{false, static_cast<std::uint64_t>(i), std::move(why)};
    };
    if (b.index != i) return fail("block index out of sequence");
    if (b.prev_hash != expected_prev) return fail("previous-hash link broken");
    if (compute_block_hash(b.index, b.prev_hash, b.transactions) != b.hash) {
      return fail("block hash does not recompute");
    }
    expected_prev = b.hash;
  }
  return {};
}

}  // namespace utm
