#pragma once

// Ledger fixture shared by the contract-level tests.

#include <string>
#include <vector>

#include "utm/ledger.hpp"
#include "utm/rid.hpp"

namespace testutil {

using namespace utm;

inline const std::string kSource = "+25°12′00″,+055°16′00″";
inline const std::string kDestination = "+25°13′00″,+055°17′00″";

struct World {
  Ledger ledger;
  AccountId op;
  AccountId other_op;
  std::vector<AccountId> reporters;

  explicit World(LedgerConfig config = default_config(), int reporter_count = 5)
      : ledger(std::move(config)) {
    op = ledger.create_account(Role::Operator, 1'000'000);
    other_op = ledger.create_account(Role::Operator, 1'000'000);
    for (int i = 0; i < reporter_count; ++i) reporters.push_back(ledger.create_account(Role::Reporter));
  }

  static LedgerConfig default_config() {
    LedgerConfig c;
    c.treasury_funding = 1'000'000;
    c.uss.nonce_seed = 7;
    return c;
  }

  const uss::UssConfig& uss() const { return ledger.config().uss; }
  const WorldState& state() const { return ledger.state(); }
  Amount balance(const AccountId& id) const { return state().accounts.balance(id); }

  Transaction register_drone(const AccountId& who, const std::string& serial, bool tac = true) {
    return ledger.submit(who, ops::kRegisterDrone,
                         {{"droneSerial", serial}, {"ownerId", "NID-" + serial}, {"signTAC", tac}});
  }
  Transaction subscribe(const AccountId& who, DroneId d, std::optional<Amount> value = {}) {
    return ledger.submit(who, ops::kSubscribe, {{"droneId", d}}, value.value_or(uss().subscription_fee));
  }
  Transaction quote(const AccountId& who, DroneId d) {
    return ledger.submit(who, ops::kRequestQuote, {{"droneId", d}});
  }
  Amount quoted_fee(const AccountId& who, DroneId d) {
    auto tx = quote(who, d);
    return std::stoll(tx.result.payload.at("fee").get<std::string>());
  }
  Transaction plan(const AccountId& who, DroneId d, std::optional<Amount> value = {},
                   const std::string& src = kSource, const std::string& dst = kDestination,
                   const std::string& date = "01012025", const std::string& time = "0100") {
    Amount v = value ? *value : quoted_fee(who, d);
    return ledger.submit(who, ops::kRequestPlan,
                         {{"droneId", d},
                          {"sourceLocation", src},
                          {"destinationLocation", dst},
                          {"departureDate", date},
                          {"departureTime", time}},
                         v);
  }
  // Registers, subscribes and plans one drone for `who`.
  DroneId ready_drone(const AccountId& who, const std::string& serial, const std::string& time = "0100") {
    auto reg = register_drone(who, serial);
    DroneId d = reg.result.payload.at("droneId").get<DroneId>();
    subscribe(who, d);
    auto p = plan(who, d, std::nullopt, kSource, kDestination, "01012025", time);
    if (p.reverted()) throw std::runtime_error("fixture plan failed: " + p.result.reason);
    return d;
  }

  const uss::MissionPlan& active_plan(DroneId d) const { return state().uss.plans.at(d); }

  // The broadcast a compliant drone emits at time t.
  rid::RidMessage broadcast(DroneId d, Timestamp t) const {
    const auto& p = active_plan(d);
    rid::RidMessage m;
    m.faa.timestamp = t;
    m.faa.drone_location = p.position_at(t);
    m.faa.control_station = p.source;
    m.faa.altitude_cm = p.altitude_cm;
    m.faa.velocity_cms = p.speed_cms;
    m.rid_vc = p.rid_vc;
    return m;
  }

  Transaction report(const AccountId& who, DroneId d, const rid::RidMessage& m,
                     const DmsPoint& where, Timestamp when) {
    return ledger.submit(who, ops::kReportDrone,
                         {{"droneId", d},
                          {"rid", rid::encode_hex(m)},
                          {"sightingLocation", format_dms_point(where)},
                          {"sightingTime", when}});
  }
  Transaction report_on_route(const AccountId& who, DroneId d, Timestamp when) {
    auto m = broadcast(d, when);
    return report(who, d, m, m.faa.drone_location, when);
  }
  Transaction complete(const AccountId& who, DroneId d, std::optional<std::string> vc = {}) {
    std::string hex = vc ? *vc : active_plan(d).rid_vc.hex();
    return ledger.submit(who, ops::kMissionCompleted, {{"droneId", d}, {"ridVc", hex}});
  }
};

// Moves a point `cells` whole grid cells north.
inline DmsPoint cells_north(const DmsPoint& p, int cells, int cell_size_m) {
  return offset_m(p, static_cast<double>(cells) * cell_size_m, 0.0);
}

}  // namespace testutil
