#include "utm/ledger.hpp"

#include <array>

namespace utm {

namespace {

enum class Target { Authority, Uss };

struct OperationSpec {
  std::string_view name;
  Target target;
  bool payable;
  bool view;
};

constexpr std::array<OperationSpec, 6> kOperations{{
    {ops::kRegisterDrone, Target::Authority, false, false},
    {ops::kSubscribe, Target::Uss, true, false},
    {ops::kRequestQuote, Target::Uss, false, true},
    {ops::kRequestPlan, Target::Uss, true, false},
    {ops::kReportDrone, Target::Uss, false, false},
    {ops::kMissionCompleted, Target::Uss, false, false},
}};

const OperationSpec* find_operation(std::string_view name) {
  for (const auto& spec : kOperations) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

// Hex that fails to parse becomes an empty buffer; the contract then
// rejects it with its own message.
std::vector<std::uint8_t> lenient_hex(const json& j) {
  try {
    return from_hex(j.get<std::string>());
  } catch (const Error&) {
    return {};
  }
}

json settlement_json(const uss::Settlement& s) {
  return json{{"droneId", s.drone},
              {"owner", s.owner.hex()},
              {"payout", std::to_string(s.payout)},
              {"rewards", s.rewards},
              {"penalties", s.penalties},
              {"reputation", s.reputation.to_string()},
              {"k", s.k.to_string()},
              {"ridVc", s.rid_vc.hex()}};
}

}  // namespace

Ledger::Ledger(Restore, LedgerConfig config) : config_(std::move(config)) {}

Ledger::Ledger(LedgerConfig config) : config_(std::move(config)) {
  config_.uss.validate();
  if (config_.treasury_funding < 0) {
    throw Error(ErrorCode::InvalidArgument, "treasury funding must be non-negative");
  }
  authority_contract_ = create_account(Role::Authority);
  uss_contract_ = create_account(Role::Uss);
  uss_treasury_ = create_account(Role::Uss, config_.treasury_funding);
}

Ledger Ledger::from_parts(LedgerConfig config, WorldState state, std::vector<Block> blocks,
                          std::vector<Transaction> pending, std::uint64_t next_tx_id,
                          Timestamp now) {
  config.uss.validate();
  Ledger l(Restore{}, std::move(config));
  l.state_ = std::move(state);
  l.blocks_ = std::move(blocks);
  l.pending_ = std::move(pending);
  l.next_tx_id_ = next_tx_id;
  l.now_ = now;
  l.authority_contract_ = derive_account_id(0);
  l.uss_contract_ = derive_account_id(1);
  l.uss_treasury_ = derive_account_id(2);
  if (!l.state_.accounts.contains(l.uss_treasury_)) {
    throw Error(ErrorCode::CorruptPayload, "snapshot lacks contract accounts");
  }
  return l;
}

void Ledger::set_time(Timestamp now) {
  if (now < now_) throw Error(ErrorCode::InvalidArgument, "ledger time cannot go backwards");
  now_ = now;
}

void Ledger::log(Transaction tx) { pending_.push_back(std::move(tx)); }

AccountId Ledger::create_account(Role role, Amount initial_balance) {
  AccountId id = state_.accounts.create(role, initial_balance);
  Transaction tx;
  tx.tx_id = next_tx_id_++;
  tx.to = id;
  tx.op = ops::kCreateAccount;
  tx.args = json{{"role", to_string(role)}, {"balance", std::to_string(initial_balance)}};
  tx.value = initial_balance;
  tx.timestamp = now_;
  tx.result = TxResult{true, json{{"account", id.hex()}}, {}};
  tx.state_writes = 1;
  log(std::move(tx));
  return id;
}

Transaction Ledger::submit(const AccountId& caller, std::string_view op, json args,
                           Amount value) {
  Transaction tx;
  tx.tx_id = next_tx_id_++;
  tx.caller = caller;
  tx.op = std::string(op);
  tx.args = std::move(args);
  tx.value = value;
  tx.timestamp = now_;

  auto revert = [&](std::string_view reason) {
    tx.result = TxResult{false, {}, std::string(reason)};
  };

  const OperationSpec* spec = find_operation(op);
  if (spec != nullptr) {
    tx.to = spec->target == Target::Authority ? authority_contract_ : uss_contract_;
  }

  if (spec == nullptr) {
    revert(kUnknownOperation);
  } else if (!state_.accounts.contains(caller)) {
    revert(kUnknownAccount);
  } else if (value < 0) {
    revert("negative-amount");
  } else if (value > 0 && !spec->payable) {
    revert(kNonPayable);
  } else if (state_.accounts.balance(caller) < value) {
    revert(kInsufficientBalance);
  } else {
    std::vector<Event> events;
    uss::CallContext ctx{caller, value, now_, &events};
    if (spec->view) {
      try {
        tx.result = TxResult{true, execute_view(state_, ctx, op, tx.args), {}};
      } catch (const Revert& r) {
        revert(r.reason());
      } catch (const Error& e) {
        revert(to_string(e.code()));
      } catch (const json::exception&) {
        revert(kBadArguments);
      }
    } else {
      WorldState backup = state_;
      try {
        state_.accounts.transfer(caller, tx.to, value);
        json payload = execute(state_, ctx, op, tx.args);
        tx.state_writes = count_state_writes(backup, state_);
        tx.events = std::move(events);
        tx.result = TxResult{true, std::move(payload), {}};
      } catch (const Revert& r) {
        state_ = std::move(backup);
        revert(r.reason());
      } catch (const Error& e) {
        state_ = std::move(backup);
        revert(to_string(e.code()));
      } catch (const json::exception&) {
        state_ = std::move(backup);
        revert(kBadArguments);
      }
    }
  }
  log(tx);
  return tx;
}

json Ledger::execute_view(const WorldState& state, const uss::CallContext& ctx,
                          std::string_view op, const json& args) const {
  if (op == ops::kRequestQuote) {
    uss::Quote q = uss::quote(config_.uss, state.registry, state.uss, ctx.caller,
                              args.at("droneId").get<DroneId>());
    return json{{"fee", std::to_string(q.fee)},
                {"k", q.k.to_string()},
                {"activeMissions", q.active_missions},
                {"surcharge", std::to_string(q.surcharge)}};
  }
  throw Revert(std::string(kUnknownOperation));
}

json Ledger::execute(WorldState& state, const uss::CallContext& ctx, std::string_view op,
                     const json& args) const {
  if (op == ops::kRegisterDrone) {
    DroneId id = state.registry.register_drone(ctx.caller, args.at("droneSerial").get<std::string>(),
                                               args.at("ownerId").get<std::string>(),
                                               args.at("signTAC").get<bool>());
    return json{{"droneId", id}};
  }

  uss::UssContract uss(config_.uss, state.accounts, state.registry, state.uss, uss_contract_,
                       uss_treasury_);
  DroneId drone = args.at("droneId").get<DroneId>();

  if (op == ops::kSubscribe) {
    uss.subscribe(ctx, drone);
    return json{{"droneId", drone}, {"expiry", state.uss.subscriptions.at(drone).expiry}};
  }
  if (op == ops::kRequestPlan) {
    uss::PlanRequest req;
    req.drone = drone;
    req.source = parse_dms_point(args.at("sourceLocation").get<std::string>());
    req.destination = parse_dms_point(args.at("destinationLocation").get<std::string>());
    req.departure_date = args.at("departureDate").get<std::string>();
    req.departure_time = args.at("departureTime").get<std::string>();
    validate_date(req.departure_date);
    validate_time(req.departure_time);
    if (args.contains("speedCms")) req.speed_cms = args.at("speedCms").get<std::int64_t>();
    const uss::MissionPlan& plan = uss.request_plan(ctx, req);
    return uss::to_json(plan, false);
  }
  if (op == ops::kReportDrone) {
    auto wire = lenient_hex(args.at("rid"));
    DmsPoint where = parse_dms_point(args.at("sightingLocation").get<std::string>());
    Timestamp when = args.at("sightingTime").get<Timestamp>();
    uss::ReportOutcome out = uss.report_drone(ctx, drone, wire, where, when);
    return json{{"droneId", drone},
                {"verdict", uss::to_string(out.verdict)},
                {"reporterReward", std::to_string(out.reporter_reward)}};
  }
  if (op == ops::kMissionCompleted) {
    auto rid_vc = lenient_hex(args.at("ridVc"));
    return settlement_json(uss.report_completion(ctx, drone, rid_vc));
  }
  throw Revert(std::string(kUnknownOperation));
}

std::optional<Block> Ledger::seal_block() {
  if (pending_.empty() && !config_.allow_empty_blocks) return std::nullopt;
  Block b = make_block(blocks_.size(), head_hash(), std::move(pending_));
  pending_.clear();
  blocks_.push_back(b);
  return b;
}

Digest Ledger::head_hash() const { return blocks_.empty() ? Digest{} : blocks_.back().hash; }

Ledger replay(const LedgerConfig& config, std::span<const Block> blocks) {
  Ledger l(config);
  for (const Block& b : blocks) {
    for (const Transaction& tx : b.transactions) {
      if (tx.tx_id < l.next_tx_id()) continue;  // genesis accounts made by the constructor
      if (tx.tx_id != l.next_tx_id()) {
        throw Error(ErrorCode::CorruptPayload, "transaction ids are not contiguous");
      }
      l.set_time(tx.timestamp);
      if (tx.op == ops::kCreateAccount) {
        AccountId id = l.create_account(parse_role(tx.args.at("role").get<std::string>()), tx.value);
        if (id != tx.to) throw Error(ErrorCode::CorruptPayload, "account creation does not reproduce");
      } else {
        l.submit(tx.caller, tx.op, tx.args, tx.value);
      }
    }
    l.seal_block();
  }
  return l;
}

}  // namespace utm
