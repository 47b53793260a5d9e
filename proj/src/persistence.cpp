#include "utm/persistence.hpp"

#include <sstream>

namespace utm::persist {

namespace {

json amount_json(Amount a) { return std::to_string(a); }

template <typename T>
json optional_amount(const std::optional<T>& v) {
  return v ? json(std::to_string(*v)) : json(nullptr);
}

void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptPayload, what); }

json account_json(const Account& a) {
  return {{"id", a.id.hex()}, {"role", to_string(a.role)}, {"balance", amount_json(a.balance)}};
}

json record_json(const authority::DroneRecord& d) {
  return {{"droneId", d.id},
          {"serial", d.serial},
          {"ownerNationalIdHash", d.owner_national_id_hash.hex()},
          {"owner", d.owner.hex()},
          {"rewards", d.rewards},
          {"penalties", d.penalties},
          {"hasActivePlan", d.has_active_plan},
          {"signTAC", d.sign_tac}};
}

authority::DroneRecord record_from(const json& j) {
  authority::DroneRecord d;
  d.id = j.at("droneId").get<DroneId>();
  d.serial = j.at("serial").get<std::string>();
  d.owner_national_id_hash = Digest::from_hex(j.at("ownerNationalIdHash").get<std::string>());
  d.owner = AccountId::from_hex(j.at("owner").get<std::string>());
  d.rewards = j.at("rewards").get<std::uint64_t>();
  d.penalties = j.at("penalties").get<std::uint64_t>();
  d.has_active_plan = j.at("hasActivePlan").get<bool>();
  d.sign_tac = j.at("signTAC").get<bool>();
  return d;
}

json uss_book_json(const uss::UssBook& book, bool include_nonces) {
  json subs = json::array();
  for (const auto& [id, s] : book.subscriptions) {
    subs.push_back({{"droneId", id},
                    {"subscriber", s.subscriber.hex()},
                    {"paidFee", amount_json(s.paid_fee)},
                    {"expiry", s.expiry}});
  }
  json plans = json::array();
  for (const auto& [id, p] : book.plans) plans.push_back(uss::to_json(p, include_nonces));
  json reps = json::array();
  for (const auto& [id, r] : book.reputations) {
    reps.push_back({{"account", id.hex()},
                    {"reputation", r.reputation.to_string()},
                    {"k", r.k.to_string()},
                    {"missions", r.missions}});
  }
  json j{{"subscriptions", std::move(subs)}, {"plans", std::move(plans)}, {"reputations", std::move(reps)}};
  if (include_nonces) j["nonceCounter"] = book.nonce_counter;
  return j;
}

uss::UssBook uss_book_from(const json& j) {
  uss::UssBook book;
  for (const auto& s : j.at("subscriptions")) {
    DroneId id = s.at("droneId").get<DroneId>();
    book.subscriptions[id] = uss::Subscription{id, AccountId::from_hex(s.at("subscriber").get<std::string>()),
                                               amount_from(s.at("paidFee")), s.at("expiry").get<Timestamp>()};
  }
  for (const auto& p : j.at("plans")) {
    uss::MissionPlan plan = uss::plan_from_json(p);
    DroneId id = plan.drone;
    book.plans.emplace(id, std::move(plan));
  }
  for (const auto& r : j.at("reputations")) {
    economics::ReputationState st;
    st.reputation = Fixed::parse(r.at("reputation").get<std::string>());
    st.k = Fixed::parse(r.at("k").get<std::string>());
    st.missions = r.at("missions").get<std::uint64_t>();
    book.reputations[AccountId::from_hex(r.at("account").get<std::string>())] = st;
  }
  if (!j.contains("nonceCounter")) throw Error(ErrorCode::SchemaMismatch, "snapshot has no nonce counter");
  book.nonce_counter = j.at("nonceCounter").get<std::uint64_t>();
  return book;
}

}  // namespace

json schema_header(std::string_view name) {
  return {{"name", std::string(name)}, {"major", kMajor}, {"minor", kMinor}};
}

SchemaVersion check_schema(const json& header, std::string_view name) {
  SchemaVersion v;
  try {
    v.name = header.at("name").get<std::string>();
    v.major = header.at("major").get<int>();
    v.minor = header.at("minor").get<int>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::SchemaMismatch, "missing or malformed schema header");
  }
  if (v.name != name) {
    throw Error(ErrorCode::SchemaMismatch,
                "expected schema '" + std::string(name) + "', found '" + v.name + "'");
  }
  if (v.major != kMajor) {
    throw Error(ErrorCode::SchemaMismatch,
                "unsupported " + v.name + " major version " + std::to_string(v.major));
  }
  return v;
}

json parse_json(std::string_view text, ErrorCode code) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(code, e.what());
  }
}

Amount amount_from(const json& j) {
  if (j.is_number_integer()) return j.get<Amount>();
  const std::string& s = j.get_ref<const std::string&>();
  std::size_t used = 0;
  Amount v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorCode::InvalidArgument, "bad amount '" + s + "'");
  return v;
}

Fixed fixed_from(const json& j) {
  if (j.is_string()) return Fixed::parse(j.get<std::string>());
  if (j.is_number_integer()) return Fixed::from_int(j.get<std::int64_t>());
  if (j.is_number()) return Fixed::from_double(j.get<double>());
  throw Error(ErrorCode::InvalidArgument, "expected a decimal value");
}

json to_json(const economics::FeeParams& p) {
  return {{"baseCost", amount_json(p.base_cost)},
          {"rcd", amount_json(p.rcd)},
          {"surchargePerMission", amount_json(p.surcharge_per_mission)},
          {"alpha", p.alpha.to_string()},
          {"kMin", p.k_min.to_string()},
          {"initialK", p.initial_k.to_string()}};
}

void merge_from_json(economics::FeeParams& p, const json& j) {
  if (j.contains("baseCost")) p.base_cost = amount_from(j.at("baseCost"));
  if (j.contains("rcd")) p.rcd = amount_from(j.at("rcd"));
  if (j.contains("surchargePerMission")) p.surcharge_per_mission = amount_from(j.at("surchargePerMission"));
  if (j.contains("alpha")) p.alpha = fixed_from(j.at("alpha"));
  if (j.contains("kMin")) p.k_min = fixed_from(j.at("kMin"));
  if (j.contains("initialK")) p.initial_k = fixed_from(j.at("initialK"));
}

json to_json(const uss::UssConfig& c, bool include_seed) {
  json j{{"fees", to_json(c.fees)},
         {"subscriptionFee", amount_json(c.subscription_fee)},
         {"fineUnit", optional_amount(c.fine_unit)},
         {"bonusUnit", optional_amount(c.bonus_unit)},
         {"reporterReward", optional_amount(c.reporter_reward)},
         {"subscriptionPeriodS", c.subscription_period_s},
         {"cellSizeM", c.cell_size_m},
         {"altitudeCm", c.altitude_cm},
         {"altitudeBandCm", c.altitude_band_cm},
         {"cruiseSpeedCms", c.cruise_speed_cms},
         {"matchWindowS", c.match_window_s},
         {"matchRadiusCells", c.match_radius_cells},
         {"deconflictionCells", c.deconfliction_cells},
         {"deconflictionS", c.deconfliction_s},
         {"epochDate", c.epoch_date}};
  if (include_seed) j["nonceSeed"] = c.nonce_seed;
  return j;
}

void merge_from_json(uss::UssConfig& c, const json& j) {
  auto opt = [&](const char* key, std::optional<Amount>& out) {
    if (!j.contains(key)) return;
    out = j.at(key).is_null() ? std::nullopt : std::optional<Amount>(amount_from(j.at(key)));
  };
  if (j.contains("fees")) merge_from_json(c.fees, j.at("fees"));
  if (j.contains("subscriptionFee")) c.subscription_fee = amount_from(j.at("subscriptionFee"));
  opt("fineUnit", c.fine_unit);
  opt("bonusUnit", c.bonus_unit);
  opt("reporterReward", c.reporter_reward);
  if (j.contains("subscriptionPeriodS")) c.subscription_period_s = j.at("subscriptionPeriodS").get<Timestamp>();
  if (j.contains("cellSizeM")) c.cell_size_m = j.at("cellSizeM").get<std::int32_t>();
  if (j.contains("altitudeCm")) c.altitude_cm = j.at("altitudeCm").get<std::int64_t>();
  if (j.contains("altitudeBandCm")) c.altitude_band_cm = j.at("altitudeBandCm").get<std::int64_t>();
  if (j.contains("cruiseSpeedCms")) c.cruise_speed_cms = j.at("cruiseSpeedCms").get<std::int64_t>();
  if (j.contains("matchWindowS")) c.match_window_s = j.at("matchWindowS").get<Timestamp>();
  if (j.contains("matchRadiusCells")) c.match_radius_cells = j.at("matchRadiusCells").get<std::int64_t>();
  if (j.contains("deconflictionCells")) c.deconfliction_cells = j.at("deconflictionCells").get<std::int64_t>();
  if (j.contains("deconflictionS")) c.deconfliction_s = j.at("deconflictionS").get<Timestamp>();
  if (j.contains("epochDate")) c.epoch_date = j.at("epochDate").get<std::string>();
  if (j.contains("nonceSeed")) c.nonce_seed = j.at("nonceSeed").get<std::uint64_t>();
}

json to_json(const LedgerConfig& c, bool include_seed) {
  return {{"uss", to_json(c.uss, include_seed)},
          {"treasuryFunding", amount_json(c.treasury_funding)},
          {"allowEmptyBlocks", c.allow_empty_blocks}};
}

void merge_from_json(LedgerConfig& c, const json& j) {
  if (j.contains("uss")) merge_from_json(c.uss, j.at("uss"));
  if (j.contains("treasuryFunding")) c.treasury_funding = amount_from(j.at("treasuryFunding"));
  if (j.contains("allowEmptyBlocks")) c.allow_empty_blocks = j.at("allowEmptyBlocks").get<bool>();
}

json snapshot_json(const Ledger& ledger, Visibility v) {
  bool priv = v == Visibility::Private;
  const WorldState& s = ledger.state();

  json accounts = json::array();
  for (const auto& [id, a] : s.accounts.all()) accounts.push_back(account_json(a));
  json registry = json::array();
  if (priv) {
    for (const auto& d : s.registry.records()) registry.push_back(record_json(d));
  } else {
    registry = authority::export_registry(s.registry);
  }
  json pending = json::array();
  for (const auto& tx : ledger.pending()) pending.push_back(to_json(tx));

  json chain{{"height", ledger.blocks().size()}, {"headHash", ledger.head_hash().hex()}};
  if (priv) {
    json blocks = json::array();
    for (const auto& b : ledger.blocks()) blocks.push_back(to_json(b));
    chain["blocks"] = std::move(blocks);
  }

  return {{"schema", schema_header(kStateSchema)},
          {"visibility", priv ? "private" : "shareable"},
          {"config", to_json(ledger.config(), priv)},
          {"accounts", std::move(accounts)},
          {"nextAccountIndex", s.accounts.next_index()},
          {"registry", std::move(registry)},
          {"uss", uss_book_json(s.uss, priv)},
          {"ledger",
           {{"nextTxId", ledger.next_tx_id()},
            {"now", ledger.now()},
            {"pending", std::move(pending)},
            {"chain", std::move(chain)}}}};
}

std::string snapshot(const Ledger& ledger, Visibility v) {
  return snapshot_json(ledger, v).dump() + "\n";
}

Ledger restore(std::string_view text) {
  return restore_json(parse_json(text, ErrorCode::CorruptPayload));
}

Ledger restore_json(const json& j) {
  try {
    check_schema(j.at("schema"), kStateSchema);
    if (j.at("visibility") != "private") {
      throw Error(ErrorCode::SchemaMismatch, "shareable exports omit nonces and cannot be restored");
    }
    LedgerConfig config;
    merge_from_json(config, j.at("config"));

    WorldState s;
    for (const auto& a : j.at("accounts")) {
      s.accounts.insert_raw(Account{AccountId::from_hex(a.at("id").get<std::string>()),
                                    amount_from(a.at("balance")),
                                    parse_role(a.at("role").get<std::string>())});
    }
    s.accounts.set_next_index(j.at("nextAccountIndex").get<std::uint64_t>());
    for (const auto& r : j.at("registry")) s.registry.insert_raw(record_from(r));
    s.uss = uss_book_from(j.at("uss"));

    const json& l = j.at("ledger");
    std::vector<Transaction> pending;
    for (const auto& tx : l.at("pending")) pending.push_back(transaction_from_json(tx));
    std::vector<Block> blocks;
    for (const auto& b : l.at("chain").at("blocks")) blocks.push_back(block_from_json(b));
    if (blocks.size() != l.at("chain").at("height").get<std::size_t>()) corrupt("block count mismatch");

    Ledger ledger = Ledger::from_parts(std::move(config), std::move(s), std::move(blocks), std::move(pending),
                                       l.at("nextTxId").get<std::uint64_t>(), l.at("now").get<Timestamp>());
    if (ledger.head_hash().hex() != l.at("chain").at("headHash").get<std::string>()) {
      corrupt("head hash mismatch");
    }
    if (!ledger.verify_chain()) corrupt("embedded chain does not verify");
    return ledger;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaMismatch || e.code() == ErrorCode::CorruptPayload) throw;
    throw Error(ErrorCode::CorruptPayload, std::string("corrupt snapshot: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptPayload, std::string("corrupt snapshot: ") + e.what());
  }
}

std::string write_chain_log(std::span<const Block> blocks) {
  std::string out = json{{"schema", schema_header(kChainSchema)}}.dump() + "\n";
  for (const auto& b : blocks) out += to_json(b).dump() + "\n";
  return out;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

}  // namespace

ChainLogCheck verify_chain_log(std::string_view text) {
  ChainLogCheck out;
  auto lines = split_lines(text);
  if (lines.empty()) {
    out.parse_error = true;
    out.reason = "empty chain log";
    return out;
  }
  try {
    json header = parse_json(lines[0], ErrorCode::ParseError);
    check_schema(header.at("schema"), kChainSchema);
  } catch (const std::exception& e) {
    out.parse_error = true;
    out.reason = std::string("unreadable chain header: ") + e.what();
    return out;
  }

  std::vector<Block> blocks;
  Digest prev{};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::uint64_t index = i - 1;
    auto bad = [&](std::string why) {
      out.first_bad_block = index;
      out.block_count = lines.size() - 1;
      out.reason = std::move(why);
      return out;
    };
    try {
      json j = json::parse(lines[i]);
      if (j.dump() != lines[i]) return bad("block line is not in canonical form");
      blocks.push_back(block_from_json(j));
    } catch (const std::exception& e) {
      return bad(std::string("unreadable block: ") + e.what());
    }
    const Block& b = blocks.back();
    if (b.index != index) return bad("block index out of sequence");
    if (b.prev_hash != prev) return bad("previous-hash link broken");
    if (compute_block_hash(b.index, b.prev_hash, b.transactions) != b.hash) {
      return bad("block hash does not recompute");
    }
    prev = b.hash;
  }
  out.ok = true;
  out.block_count = blocks.size();
  return out;
}

std::vector<Block> read_chain_log(std::string_view text) {
  ChainLogCheck check = verify_chain_log(text);
  if (check.parse_error) throw Error(ErrorCode::ParseError, check.reason);
  if (!check.ok) {
    throw Error(ErrorCode::CorruptPayload,
                "block " + std::to_string(*check.first_bad_block) + ": " + check.reason);
  }
  auto lines = split_lines(text);
  std::vector<Block> blocks;
  for (std::size_t i = 1; i < lines.size(); ++i) blocks.push_back(block_from_json(json::parse(lines[i])));
  return blocks;
}

std::string write_event_log(std::span<const Block> blocks) {
  std::string out = json{{"schema", schema_header(kEventsSchema)}}.dump() + "\n";
  for (const auto& b : blocks) {
    for (const auto& tx : b.transactions) {
      for (const auto& e : tx.events) {
        out += json{{"block", b.index}, {"txId", tx.tx_id}, {"name", e.name}, {"data", e.data}}.dump() + "\n";
      }
    }
  }
  return out;
}

}  // namespace utm::persist
