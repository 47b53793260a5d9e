#include "utm/demo.hpp"

#include <algorithm>
#include <sstream>

#include "utm/rid.hpp"

namespace utm::demo {

namespace {

const std::string kSource = "+25°12′00″,+055°16′00″";
const std::string kDestination = "+25°12′00″,+055°17′30″";

struct Script {
  Ledger ledger;
  AccountId op;
  AccountId reporter;
  DroneId drone = 0;
  std::vector<Transaction> log;

  Script() : ledger(config()) {
    op = ledger.create_account(Role::Operator, 100'000);
    reporter = ledger.create_account(Role::Reporter);
  }

  static LedgerConfig config() {
    LedgerConfig c;
    c.treasury_funding = 100'000;
    c.uss.nonce_seed = 2025;
    return c;
  }

  Transaction call(const AccountId& who, std::string_view op_name, json args, Amount value = 0) {
    Transaction tx = ledger.submit(who, op_name, std::move(args), value);
    log.push_back(tx);
    return tx;
  }

  Transaction register_drone() {
    auto tx = call(op, ops::kRegisterDrone,
                   {{"droneSerial", "DJI-M300-0001"}, {"ownerId", "784-1990-1234567-1"}, {"signTAC", true}});
    drone = tx.result.payload.at("droneId").get<DroneId>();
    return tx;
  }
  Transaction subscribe() {
    return call(op, ops::kSubscribe, {{"droneId", drone}}, ledger.config().uss.subscription_fee);
  }
  Transaction quote() { return call(op, ops::kRequestQuote, {{"droneId", drone}}); }
  Transaction plan() {
    Amount fee = std::stoll(ledger.submit(op, ops::kRequestQuote, {{"droneId", drone}})
                                .result.payload.at("fee").get<std::string>());
    return call(op, ops::kRequestPlan,
                {{"droneId", drone},
                 {"sourceLocation", kSource},
                 {"destinationLocation", kDestination},
                 {"departureDate", "15032025"},
                 {"departureTime", "0930"}},
                fee);
  }
  Transaction report() {
    const auto& p = ledger.state().uss.plans.at(drone);
    Timestamp t = (p.departure + p.arrival) / 2;
    ledger.set_time(t);
    rid::RidMessage m;
    m.faa.timestamp = t;
    m.faa.drone_location = p.position_at(t);
    m.faa.control_station = p.source;
    m.faa.altitude_cm = p.altitude_cm;
    m.faa.velocity_cms = p.speed_cms;
    m.rid_vc = p.rid_vc;
    return call(reporter, ops::kReportDrone,
                {{"droneId", drone},
                 {"rid", rid::encode_hex(m)},
                 {"sightingLocation", format_dms_point(m.faa.drone_location)},
                 {"sightingTime", t}});
  }
  Transaction complete() {
    const auto& p = ledger.state().uss.plans.at(drone);
    ledger.set_time(p.arrival + 30);
    return call(op, ops::kMissionCompleted, {{"droneId", drone}, {"ridVc", p.rid_vc.hex()}});
  }
};

std::string contract_name(const Transaction& tx, const Ledger& l) {
  if (tx.to == l.authority_contract()) return "AuthorityContract";
  if (tx.to == l.uss_contract()) return "UssContract";
  return "account";
}

void indent_json(std::ostringstream& out, const json& j) {
  std::string text = j.dump(2);
  std::size_t start = 0;
  bool first = true;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    out << (first ? "" : std::string(18, ' ')) << line << '\n';
    first = false;
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
}

}  // namespace

const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"register", "subscribe", "quote", "plan", "report", "complete", "full"};
  return n;
}

std::string format_record(const Transaction& tx, const Ledger& ledger) {
  std::ostringstream out;
  auto row = [&](const char* label) { out << label << std::string(18 - std::string_view(label).size(), ' '); };
  row("status");
  out << (tx.result.success ? "success" : "reverted") << '\n';
  row("transaction hash");
  out << transaction_hash(tx).hex() << '\n';
  row("from");
  out << tx.caller.hex() << '\n';
  row("to");
  out << contract_name(tx, ledger) << '.' << tx.op << ' ' << tx.to.hex() << '\n';
  row("decoded input");
  indent_json(out, tx.args);
  row("decoded output");
  if (tx.result.success) {
    indent_json(out, tx.result.payload);
  } else {
    out << "revert: " << tx.result.reason << '\n';
  }
  row("logs");
  json logs = json::array();
  for (const auto& e : tx.events) logs.push_back({{"event", e.name}, {"args", e.data}});
  indent_json(out, logs);
  row("value");
  out << tx.value << " units\n";
  row("state writes");
  out << tx.state_writes << '\n';
  return out.str();
}

std::vector<Transaction> run(std::string_view name, std::ostream& out) {
  if (std::find(names().begin(), names().end(), name) == names().end()) {
    throw Error(ErrorCode::UnknownDemo, "unknown demo '" + std::string(name) + "'");
  }
  Script s;
  std::vector<Transaction> shown;
  auto steps = std::vector<std::pair<std::string, Transaction (Script::*)()>>{
      {"register", &Script::register_drone}, {"subscribe", &Script::subscribe}, {"quote", &Script::quote},
      {"plan", &Script::plan},               {"report", &Script::report},       {"complete", &Script::complete}};
  for (const auto& [step, fn] : steps) {
    Transaction tx = (s.*fn)();
    if (name == "full" || name == step) shown.push_back(tx);
    if (name == step) break;
  }
  s.ledger.seal_block();
  for (std::size_t i = 0; i < shown.size(); ++i) {
    if (i) out << '\n';
    out << format_record(shown[i], s.ledger);
  }
  if (name == "report" || name == "full") {
    out << "\nreporter balance  " << s.ledger.state().accounts.balance(s.reporter) << " units\n";
  }
  return shown;
}

}  // namespace utm::demo
