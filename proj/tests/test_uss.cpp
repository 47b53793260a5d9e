#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracle/airspace.hpp"
#include "oracle/rational.hpp"
#include "oracle/sha256_reference.hpp"
#include "world.hpp"

using namespace utm;
using testutil::World;

namespace {

oracle::Flight flight_of(const uss::MissionPlan& p) {
  return {p.source.lat_arcsec, p.source.lon_arcsec, p.destination.lat_arcsec,
          p.destination.lon_arcsec, p.departure, p.arrival};
}

Amount escrow_sum(const WorldState& s) {
  Amount total = 0;
  for (const auto& [id, p] : s.uss.plans) total += p.escrow();
  return total;
}

}  // namespace

TEST_CASE("subscribe") {
  World w;
  DroneId d = w.register_drone(w.op, "SN-1").result.payload.at("droneId");
  Amount fee = w.uss().subscription_fee;
  Amount treasury = w.balance(w.ledger.uss_treasury());

  CHECK(w.subscribe(w.other_op, d).result.reason == "Not the owner of the registered drone");
  CHECK(w.subscribe(w.op, 42).result.reason == "Not the owner of the registered drone");

  auto before = w.state();
  CHECK(w.subscribe(w.op, d, fee - 1).result.reason == "Please make sure to pay the subscription fee");
  CHECK(w.subscribe(w.op, d, fee + 1).result.reason == "Please make sure to pay the subscription fee");
  CHECK(w.state() == before);

  CHECK(w.subscribe(w.op, d).result.success);
  CHECK(w.balance(w.ledger.uss_treasury()) == treasury + fee);
  CHECK(w.balance(w.ledger.uss_contract()) == 0);
  CHECK(w.state().uss.subscriptions.at(d).paid_fee == fee);
  CHECK(w.subscribe(w.op, d).result.reason == "Drone is already subscribed");
}

TEST_CASE("quote is a pure view") {
  World w;
  DroneId d = w.register_drone(w.op, "SN-1").result.payload.at("droneId");
  CHECK(w.quote(w.other_op, d).result.reason == "Not the owner of a registered drone");
  CHECK(w.quote(w.op, d).result.reason == "Drone is not subscribed");
  w.subscribe(w.op, d);

  auto before = w.state();
  auto tx = w.quote(w.op, d);
  CHECK(tx.result.success);
  CHECK(tx.state_writes == 0);
  CHECK(w.state() == before);
  const auto& f = w.uss().fees;
  CHECK(tx.result.payload.at("fee") == std::to_string(f.base_cost + f.rcd));
  CHECK(tx.result.payload.at("activeMissions") == 0);
}

TEST_CASE("quote follows the fee formula with congestion") {
  LedgerConfig c = World::default_config();
  c.uss.fees.base_cost = 10;
  c.uss.fees.rcd = 5;
  c.uss.fees.surcharge_per_mission = 2;
  World w(c);
  w.ready_drone(w.other_op, "SN-X", "0100");
  DroneId d = w.register_drone(w.op, "SN-1").result.payload.at("droneId");
  w.subscribe(w.op, d);
  // k = 1, d = 10, c = 5, a = 2 * 1 active mission
  CHECK(w.quoted_fee(w.op, d) == 17);
}

TEST_CASE("request plan branches") {
  World w;
  DroneId d = w.register_drone(w.op, "SN-1").result.payload.at("droneId");
  CHECK(w.plan(w.op, d, 100'000).result.reason == "Not subscribed to a USS");
  w.subscribe(w.op, d);
  CHECK(w.plan(w.other_op, d, 100'000).result.reason == "Not subscribed to a USS");

  Amount fee = w.quoted_fee(w.op, d);
  auto before = w.state();
  CHECK(w.plan(w.op, d, fee - 1).result.reason == "Please make sure to pay the mission plan fee");
  CHECK(w.plan(w.op, d, fee, "garbage").result.reason == "invalid-dms");
  CHECK(w.plan(w.op, d, fee, testutil::kSource, testutil::kDestination, "32012025").result.reason ==
        "invalid-departure");
  CHECK(w.state() == before);

  Amount treasury = w.balance(w.ledger.uss_treasury());
  auto tx = w.plan(w.op, d, fee);
  REQUIRE(tx.result.success);
  CHECK_FALSE(tx.result.payload.contains("nonce"));
  const auto& plan = w.active_plan(d);
  CHECK_FALSE(plan.rid_vc.is_zero());
  CHECK(tx.result.payload.at("ridVc") == plan.rid_vc.hex());
  CHECK(w.state().registry.find(d)->has_active_plan);
  CHECK(w.balance(w.ledger.uss_contract()) == w.uss().fees.rcd);
  CHECK(w.balance(w.ledger.uss_treasury()) == treasury + fee - w.uss().fees.rcd);
  CHECK(plan.rid_vc.bytes == oracle::sha256_reference(rid::commitment_preimage(plan.commitment())));

  CHECK(w.plan(w.op, d, fee).result.reason == "There is already an active plan for this drone");
}

TEST_CASE("identical plans get distinct verification codes") {
  World w;
  DroneId a = w.ready_drone(w.op, "SN-1", "0100");
  auto first = w.active_plan(a);
  w.complete(w.op, a);
  w.plan(w.op, a);
  auto second = w.active_plan(a);
  CHECK(first.commitment().source == second.commitment().source);
  CHECK(first.departure_time == second.departure_time);
  CHECK(first.nonce != second.nonce);
  CHECK(first.rid_vc != second.rid_vc);
}

TEST_CASE("deconfliction") {
  World w;
  w.ready_drone(w.op, "SN-1", "0100");
  DroneId b = w.register_drone(w.other_op, "SN-2").result.payload.at("droneId");
  w.subscribe(w.other_op, b);
  CHECK(w.plan(w.other_op, b).result.reason == "schedule-conflict");
  // Occupies its route for ~262 s from 01:00; departing 10 minutes later clears
  // the 60 s buffer.
  auto tx = w.plan(w.other_op, b, std::nullopt, testutil::kSource, testutil::kDestination, "01012025",
                   "0110");
  CHECK(tx.result.success);
  CHECK_FALSE(oracle::brute_force_conflict(flight_of(w.active_plan(0)), flight_of(w.active_plan(b)),
                                           w.uss().cell_size_m, 1, 60));
}

TEST_CASE("deconfliction agrees with the per-second oracle") {
  uss::UssConfig cfg;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int32_t> coord(-150, 150);
  std::uniform_int_distribution<Timestamp> dep(0, 600);
  int conflicts = 0;
  for (int i = 0; i < 300; ++i) {
    DmsPoint s1{coord(rng), coord(rng)}, d1{coord(rng), coord(rng)};
    DmsPoint s2{coord(rng), coord(rng)}, d2{coord(rng), coord(rng)};
    Timestamp t1 = dep(rng), t2 = dep(rng);
    Timestamp a1 = t1 + uss::flight_duration_s(s1, d1, cfg.cruise_speed_cms);
    Timestamp a2 = t2 + uss::flight_duration_s(s2, d2, cfg.cruise_speed_cms);
    auto r1 = uss::occupancy(s1, d1, t1, a1, cfg.cell_size_m, 3);
    auto r2 = uss::occupancy(s2, d2, t2, a2, cfg.cell_size_m, 3);
    bool fast = uss::routes_conflict(r1, r2, 1, 60);
    bool slow = oracle::brute_force_conflict({s1.lat_arcsec, s1.lon_arcsec, d1.lat_arcsec, d1.lon_arcsec, t1, a1},
                                             {s2.lat_arcsec, s2.lon_arcsec, d2.lat_arcsec, d2.lon_arcsec, t2, a2},
                                             cfg.cell_size_m, 1, 60);
    CAPTURE(i);
    CHECK(fast == slow);
    conflicts += fast ? 1 : 0;
  }
  CHECK(conflicts > 0);
  CHECK(conflicts < 300);
}

TEST_CASE("shifting a conflicting departure past the buffer") {
  uss::UssConfig cfg;
  DmsPoint s = parse_dms_point(testutil::kSource), d = parse_dms_point(testutil::kDestination);
  Timestamp dur = uss::flight_duration_s(s, d, cfg.cruise_speed_cms);
  auto base = uss::occupancy(s, d, 0, dur, cfg.cell_size_m, 3);
  for (Timestamp shift : {0LL, 30LL, 60LL, 61LL, 120LL, 400LL}) {
    auto moved = uss::occupancy(s, d, shift, shift + dur, cfg.cell_size_m, 3);
    bool slow = oracle::brute_force_conflict({s.lat_arcsec, s.lon_arcsec, d.lat_arcsec, d.lon_arcsec, 0, dur},
                                             {s.lat_arcsec, s.lon_arcsec, d.lat_arcsec, d.lon_arcsec, shift,
                                              shift + dur},
                                             cfg.cell_size_m, 1, 60);
    CAPTURE(shift);
    CHECK(uss::routes_conflict(base, moved, 1, 60) == slow);
  }
  auto far = uss::occupancy(s, d, dur + 61, 2 * dur + 61, cfg.cell_size_m, 3);
  CHECK_FALSE(uss::routes_conflict(base, far, 1, 60));
}

TEST_CASE("different altitude bands never conflict") {
  DmsPoint s{0, 0}, d{100, 100};
  auto a = uss::occupancy(s, d, 0, 500, 100, 3);
  auto b = uss::occupancy(s, d, 0, 500, 100, 4);
  CHECK_FALSE(uss::routes_conflict(a, b, 1, 60));
}

TEST_CASE("report branches") {
  World w;
  DroneId d = w.ready_drone(w.op, "SN-1");
  const auto& plan = w.active_plan(d);
  Timestamp mid = (plan.departure + plan.arrival) / 2;

  CHECK(w.report_on_route(w.op, d, mid).result.reason == "Owner of drone cannot report it!");

  // No active plan for this drone.
  DroneId idle = w.register_drone(w.other_op, "SN-2").result.payload.at("droneId");
  auto m = w.broadcast(d, mid);
  CHECK(w.report(w.reporters[0], idle, m, m.faa.drone_location, mid).result.reason == "Invalid report");

  auto forged = m;
  forged.rid_vc.bytes[0] ^= 1;
  auto before = w.state();
  CHECK(w.report(w.reporters[0], d, forged, m.faa.drone_location, mid).result.reason == "Invalid report");
  CHECK(w.ledger.submit(w.reporters[0], ops::kReportDrone,
                        {{"droneId", d}, {"rid", "abcd"}, {"sightingLocation", testutil::kSource},
                         {"sightingTime", mid}})
            .result.reason == "Invalid report");
  CHECK(w.state() == before);

  Amount reporter_before = w.balance(w.reporters[0]);
  auto ok = w.report_on_route(w.reporters[0], d, mid);
  REQUIRE(ok.result.success);
  CHECK(ok.result.payload.at("verdict") == "reward");
  CHECK(w.balance(w.reporters[0]) == reporter_before + w.uss().reward());
  REQUIRE(ok.events.size() == 1);
  CHECK(ok.events[0].name == "DroneSighted");
  CHECK(ok.events[0].data.at("droneId") == d);
  CHECK(w.state().registry.find(d)->rewards == 1);

  CHECK(w.report_on_route(w.reporters[0], d, mid).result.reason ==
        "not allowed to report same drone more than once");
}

TEST_CASE("a sighting three cells off the route is penalized") {
  World w;
  DroneId d = w.ready_drone(w.op, "SN-1");
  const auto& plan = w.active_plan(d);
  Timestamp t = plan.departure + 100;
  int cell_m = w.uss().cell_size_m;
  GeoCell on = cell_of(plan.position_at(t), cell_m);
  // The route runs north-east; step three cells north-west of it.
  GeoCell off{on.lat_index + 3, on.lon_index - 3};
  DmsPoint where = cell_center(off, cell_m);
  CHECK_FALSE(oracle::brute_force_match(flight_of(plan), {off.lat_index, off.lon_index}, t, cell_m, 120));
  CHECK(oracle::brute_force_match(flight_of(plan), {on.lat_index, on.lon_index}, t, cell_m, 120));

  Amount escrow = w.balance(w.ledger.uss_contract());
  auto tx = w.report(w.reporters[0], d, w.broadcast(d, t), where, t);
  REQUIRE(tx.result.success);
  CHECK(tx.result.payload.at("verdict") == "penalty");
  CHECK(w.state().registry.find(d)->penalties == 1);
  CHECK(w.state().registry.find(d)->rewards == 0);
  CHECK(w.balance(w.ledger.uss_contract()) == escrow - w.uss().fine());
}

TEST_CASE("sighting match agrees with the per-second oracle") {
  uss::UssConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int32_t> coord(-100, 100);
  int matches = 0;
  for (int i = 0; i < 400; ++i) {
    uss::MissionPlan p;
    p.source = {coord(rng), coord(rng)};
    p.destination = {coord(rng), coord(rng)};
    p.departure = 1000;
    p.arrival = p.departure + uss::flight_duration_s(p.source, p.destination, cfg.cruise_speed_cms);
    p.route = uss::occupancy(p.source, p.destination, p.departure, p.arrival, cfg.cell_size_m, 3);
    GeoCell c = cell_of({coord(rng), coord(rng)}, cfg.cell_size_m);
    Timestamp t = std::uniform_int_distribution<Timestamp>(800, 1600)(rng);
    bool fast = uss::sighting_matches(p, c, t, 120, 0);
    bool slow = oracle::brute_force_match(flight_of(p), {c.lat_index, c.lon_index}, t, cfg.cell_size_m, 120);
    CAPTURE(i);
    CHECK(fast == slow);
    matches += fast ? 1 : 0;
  }
  CHECK(matches > 0);
}

TEST_CASE("forged broadcasts never move counters") {
  World w(World::default_config(), 1);
  DroneId d = w.ready_drone(w.op, "SN-1");
  DroneId other = w.ready_drone(w.other_op, "SN-2", "0200");
  const auto& plan = w.active_plan(d);
  Timestamp t = plan.departure + 60;
  auto genuine = w.broadcast(d, t);
  auto before = w.state();
  std::mt19937_64 rng(9);

  for (int i = 0; i < 500; ++i) {
    auto m = genuine;
    switch (i % 4) {
      case 0: m.rid_vc.bytes[rng() % 32] ^= static_cast<std::uint8_t>(1u << (rng() % 8)); break;
      case 1: m.rid_vc = w.active_plan(other).rid_vc; break;
      case 2: {
        auto c = plan.commitment();
        c.departure_time = "0101";
        m.rid_vc = rid::compute_rid_vc(c);
        break;
      }
      default: {
        auto c = plan.commitment();
        c.nonce.bytes[rng() % 16] ^= 0x80;
        m.rid_vc = rid::compute_rid_vc(c);
      }
    }
    auto tx = w.report(w.reporters[0], d, m, genuine.faa.drone_location, t);
    REQUIRE(tx.result.reason == "Invalid report");
  }
  CHECK(w.state() == before);
}

TEST_CASE("completion branches and settlement arithmetic") {
  LedgerConfig c = World::default_config();
  c.uss.fees.rcd = 5;
  c.uss.fees.base_cost = 10;
  c.uss.fine_unit = 1;
  c.uss.bonus_unit = 1;
  c.uss.reporter_reward = 1;
  World w(c);
  DroneId d = w.ready_drone(w.op, "SN-1");
  const auto& plan = w.active_plan(d);
  Timestamp t = plan.departure + 100;
  GeoCell on = cell_of(plan.position_at(t), c.uss.cell_size_m);
  DmsPoint off = cell_center({on.lat_index + 3, on.lon_index - 3}, c.uss.cell_size_m);

  for (int i = 0; i < 3; ++i) REQUIRE(w.report_on_route(w.reporters[i], d, t).result.success);
  REQUIRE(w.report(w.reporters[3], d, w.broadcast(d, t), off, t).result.payload.at("verdict") == "penalty");

  CHECK(w.complete(w.other_op, d).result.reason == "Not owner of drone");
  CHECK(w.complete(w.op, d, std::string(64, '0')).result.reason == "RID-VC does not match the active plan");

  Amount owner_before = w.balance(w.op);
  std::string vc = w.active_plan(d).rid_vc.hex();
  auto tx = w.complete(w.op, d);
  REQUIRE(tx.result.success);
  CHECK(tx.result.payload.at("payout") == "7");  // 5 - 1*1 + 3*1
  CHECK(w.balance(w.op) == owner_before + 7);
  CHECK(tx.result.payload.at("reputation") == "0.333333");
  // k' = (1 - (1/3 + 1)/2) * 0.3 + 1 * 0.7 = 0.8
  auto exact_k = oracle::exact_update_k(oracle::Rational(1, 3), 1, oracle::Rational(3, 10), oracle::Rational(1, 20));
  CHECK(oracle::grid_units_apart(Fixed::parse(tx.result.payload.at("k").get<std::string>()).raw(), exact_k) <= 1);
  REQUIRE(tx.events.size() == 1);
  CHECK(tx.events[0].name == "missionComplete");
  CHECK(tx.events[0].data.at("ridVc") == vc);

  const auto* rec = w.state().registry.find(d);
  CHECK(rec->rewards == 0);
  CHECK(rec->penalties == 0);
  CHECK_FALSE(rec->has_active_plan);
  CHECK_FALSE(w.state().uss.plans.contains(d));
  CHECK(w.balance(w.ledger.uss_contract()) == 0);
  CHECK(w.complete(w.op, d, vc).result.reason == "No active plan");

  // Reputation is per operator and the next quote uses the updated k.
  CHECK(w.state().uss.reputations.at(w.op).missions == 1);
  CHECK(w.quoted_fee(w.op, d) == 13);  // 0.8 * 10 + 5
}

TEST_CASE("neutral mission refunds the deposit exactly") {
  World w;
  DroneId d = w.ready_drone(w.op, "SN-1");
  auto tx = w.complete(w.op, d);
  CHECK(tx.result.payload.at("payout") == std::to_string(w.uss().fees.rcd));
  CHECK(tx.result.payload.at("reputation") == "0.000000");
}

TEST_CASE("fines are capped at the deposit") {
  LedgerConfig c = World::default_config();
  c.uss.fine_unit = 200;  // rcd 500: the third penalty only takes 100
  World w(c, 4);
  DroneId d = w.ready_drone(w.op, "SN-1");
  const auto& plan = w.active_plan(d);
  Timestamp t = plan.departure + 100;
  GeoCell on = cell_of(plan.position_at(t), c.uss.cell_size_m);
  DmsPoint off = cell_center({on.lat_index + 3, on.lon_index - 3}, c.uss.cell_size_m);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(w.report(w.reporters[i], d, w.broadcast(d, t), off, t).result.success);
    CHECK(w.active_plan(d).rcd_remaining >= 0);
  }
  CHECK(w.complete(w.op, d).result.payload.at("payout") == "0");
}

TEST_CASE("escrow, payout bounds and monotonicity over random report sequences") {
  std::mt19937_64 rng(21);
  std::map<std::uint64_t, Amount> payout_by_penalties;  // with rewards fixed at 2
  for (int trial = 0; trial < 40; ++trial) {
    World w(World::default_config(), 8);
    DroneId d = w.ready_drone(w.op, "SN-1");
    DroneId e = w.ready_drone(w.other_op, "SN-2", "0300");
    const auto& plan = w.active_plan(d);
    Timestamp t = plan.departure + 50;
    GeoCell on = cell_of(plan.position_at(t), w.uss().cell_size_m);
    DmsPoint off = cell_center({on.lat_index + 3, on.lon_index - 3}, w.uss().cell_size_m);

    int good = trial < 20 ? 2 : static_cast<int>(rng() % 5);
    int bad = static_cast<int>(rng() % 7);
    std::vector<int> order(8);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::set<AccountId> seen;
    for (int i = 0; i < good + bad && i < 8; ++i) {
      const auto& who = w.reporters[order[i]];
      auto tx = i < good ? w.report_on_route(who, d, t) : w.report(who, d, w.broadcast(d, t), off, t);
      REQUIRE(tx.result.success);
      // A repeat always reverts.
      CHECK(w.report_on_route(who, d, t).result.reason == "not allowed to report same drone more than once");
      CHECK(w.balance(w.ledger.uss_contract()) == escrow_sum(w.state()));
      seen.insert(who);
    }
    CHECK(w.active_plan(d).sightings.size() == seen.size());

    auto rec = *w.state().registry.find(d);
    auto tx = w.complete(w.op, d);
    Amount payout = std::stoll(tx.result.payload.at("payout").get<std::string>());
    CHECK(payout >= 0);
    CHECK(payout <= w.uss().fees.rcd + static_cast<Amount>(rec.rewards) * w.uss().bonus());
    CHECK(payout == std::max<Amount>(0, w.uss().fees.rcd - static_cast<Amount>(rec.penalties) * w.uss().fine()) +
                        static_cast<Amount>(rec.rewards) * w.uss().bonus());
    if (rec.rewards == 2) payout_by_penalties[rec.penalties] = payout;

    w.complete(w.other_op, e);
    CHECK(w.balance(w.ledger.uss_contract()) == 0);
    for (const auto& [id, rec2] : std::map<DroneId, int>{{d, 0}, {e, 0}}) {
      CHECK(w.state().registry.find(id)->has_active_plan == w.state().uss.plans.contains(id));
    }
  }
  Amount last = std::numeric_limits<Amount>::max();
  for (const auto& [p, payout] : payout_by_penalties) {
    CHECK(payout <= last);
    last = payout;
  }
}
