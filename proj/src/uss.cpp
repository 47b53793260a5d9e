#include "utm/uss.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace utm::uss {

using nlohmann::json;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

json cell_json(const GeoCell& c) { return json::array({c.lat_index, c.lon_index}); }

GeoCell cell_from(const json& j) {
  return GeoCell{j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>()};
}

}  // namespace

void UssConfig::validate() const {
  fees.validate();
  require(subscription_fee >= 0, "subscription fee must be non-negative");
  require(fine() >= 0 && bonus() >= 0 && reward() >= 0, "units must be non-negative");
  require(subscription_period_s > 0, "subscription period must be positive");
  require(cell_size_m >= 40, "cell size must be at least 40 m");
  require(altitude_cm >= 0, "altitude must be non-negative");
  require(altitude_band_cm > 0, "altitude band must be positive");
  require(cruise_speed_cms > 0, "cruise speed must be positive");
  require(match_window_s >= 0 && match_radius_cells >= 0, "match tolerance must be non-negative");
  require(deconfliction_cells >= 0 && deconfliction_s >= 0, "deconfliction buffer must be non-negative");
  validate_date(epoch_date);
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Reward: return "reward";
    case Verdict::Penalty: return "penalty";
    case Verdict::Invalid: return "invalid";
  }
  return "invalid";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "reward") return Verdict::Reward;
  if (text == "penalty") return Verdict::Penalty;
  if (text == "invalid") return Verdict::Invalid;
  throw Error(ErrorCode::CorruptPayload, "unknown verdict");
}

rid::PlanCommitment MissionPlan::commitment() const {
  return rid::PlanCommitment{nonce, owner, source, destination, departure_date,
                             departure_time};
}

DmsPoint MissionPlan::position_at(Timestamp t) const {
  return interpolate(source, destination, departure, arrival, t);
}

Timestamp flight_duration_s(const DmsPoint& from, const DmsPoint& to,
                            std::int64_t speed_cms) {
  require(speed_cms > 0, "speed must be positive");
  return static_cast<Timestamp>(std::ceil(distance_m(from, to) * 100.0 / speed_cms));
}

std::vector<RouteCell> occupancy(const DmsPoint& from, const DmsPoint& to,
                                 Timestamp departure, Timestamp arrival,
                                 std::int32_t cell_size_m, std::int64_t altitude_band) {
  std::vector<RouteCell> out;
  for (Timestamp t = departure; t <= arrival; ++t) {
    GeoCell c = cell_of(interpolate(from, to, departure, arrival, t), cell_size_m);
    if (!out.empty() && out.back().cell == c) {
      out.back().exit = t;
    } else {
      out.push_back(RouteCell{c, altitude_band, t, t});
    }
  }
  return out;
}

bool routes_conflict(std::span<const RouteCell> a, std::span<const RouteCell> b,
                     std::int64_t buffer_cells, Timestamp buffer_s) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (x.altitude_band != y.altitude_band) continue;
      if (cell_distance(x.cell, y.cell) > buffer_cells) continue;
      if (x.enter <= y.exit + buffer_s && y.enter <= x.exit + buffer_s) return true;
    }
  }
  return false;
}

bool sighting_matches(const MissionPlan& plan, const GeoCell& cell, Timestamp time,
                      Timestamp window_s, std::int64_t radius_cells) {
  return std::any_of(plan.route.begin(), plan.route.end(), [&](const RouteCell& rc) {
    return cell_distance(rc.cell, cell) <= radius_cells &&
           rc.enter <= time + window_s && rc.exit >= time - window_s;
  });
}

Nonce draw_nonce(std::uint64_t seed, std::uint64_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(counter),
                    static_cast<std::uint32_t>(counter >> 32)};
  std::mt19937_64 engine(seq);
  Nonce n;
  for (int word = 0; word < 2; ++word) {
    std::uint64_t v = engine();
    for (int i = 0; i < 8; ++i) n.bytes[word * 8 + i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
  }
  return n;
}

Quote quote(const UssConfig& config, const authority::Registry& registry,
            const UssBook& book, const AccountId& caller, DroneId drone) {
  const auto* rec = registry.find(drone);
  if (rec == nullptr || rec->owner != caller) throw Revert(std::string(kNotOwnerOfARegistered));
  auto sub = book.subscriptions.find(drone);
  if (sub == book.subscriptions.end() || sub->second.subscriber != caller) {
    throw Revert(std::string(kDroneNotSubscribed));
  }
  Quote q;
  auto rep = book.reputations.find(caller);
  q.k = rep == book.reputations.end() ? config.fees.initial_k : rep->second.k;
  q.active_missions = static_cast<std::int64_t>(book.plans.size());
  q.surcharge = economics::congestion_surcharge(q.active_missions,
                                                config.fees.surcharge_per_mission);
  q.fee = economics::dynamic_fee(q.k, config.fees.base_cost, config.fees.rcd, q.surcharge);
  return q;
}

UssContract::UssContract(const UssConfig& config, Accounts& accounts,
                         authority::Registry& registry, UssBook& book, AccountId self,
                         AccountId treasury)
    : config_(config),
      accounts_(accounts),
      registry_(registry),
      book_(book),
      self_(self),
      treasury_(treasury) {}

void UssContract::emit(const CallContext& ctx, std::string name, json data) const {
  if (ctx.events != nullptr) ctx.events->push_back(Event{std::move(name), std::move(data)});
}

void UssContract::subscribe(const CallContext& ctx, DroneId drone) {
  const auto* rec = registry_.find(drone);
  if (rec == nullptr || rec->owner != ctx.caller) throw Revert(std::string(kNotOwnerOfRegistered));
  if (book_.subscriptions.contains(drone)) throw Revert(std::string(kAlreadySubscribed));
  if (ctx.value != config_.subscription_fee) throw Revert(std::string(kPaySubscriptionFee));

  accounts_.transfer(self_, treasury_, ctx.value);
  book_.subscriptions[drone] =
      Subscription{drone, ctx.caller, ctx.value, ctx.now + config_.subscription_period_s};
}

std::vector<RouteCell> UssContract::schedule_route(const DmsPoint& source,
                                                   const DmsPoint& destination,
                                                   Timestamp departure,
                                                   Timestamp arrival) const {
  auto route = occupancy(source, destination, departure, arrival, config_.cell_size_m,
                         config_.altitude_cm / config_.altitude_band_cm);
  for (const auto& [id, other] : book_.plans) {
    if (routes_conflict(route, other.route, config_.deconfliction_cells,
                        config_.deconfliction_s)) {
      throw Revert(std::string(kScheduleConflict));
    }
  }
  return route;
}

const MissionPlan& UssContract::request_plan(const CallContext& ctx, const PlanRequest& req) {
  auto sub = book_.subscriptions.find(req.drone);
  if (sub == book_.subscriptions.end() || sub->second.subscriber != ctx.caller) {
    throw Revert(std::string(kNotSubscribedToUss));
  }
  auto* rec = registry_.find(req.drone);
  if (rec->has_active_plan) throw Revert(std::string(kActivePlanExists));

  Quote q = quote(config_, registry_, book_, ctx.caller, req.drone);
  if (ctx.value < q.fee) throw Revert(std::string(kPayPlanFee));

  MissionPlan plan;
  plan.drone = req.drone;
  plan.owner = ctx.caller;
  plan.source = req.source;
  plan.destination = req.destination;
  plan.departure_date = req.departure_date;
  plan.departure_time = req.departure_time;
  plan.departure = to_timestamp(req.departure_date, req.departure_time, config_.epoch_date);
  plan.speed_cms = req.speed_cms.value_or(config_.cruise_speed_cms);
  if (plan.speed_cms <= 0) throw Revert("invalid-speed");
  plan.arrival = plan.departure + flight_duration_s(plan.source, plan.destination, plan.speed_cms);
  plan.altitude_cm = config_.altitude_cm;
  plan.route = schedule_route(plan.source, plan.destination, plan.departure, plan.arrival);
  plan.nonce = draw_nonce(config_.nonce_seed, book_.nonce_counter++);
  plan.rid_vc = rid::compute_rid_vc(plan.commitment());
  plan.fee_paid = ctx.value;
  plan.rcd_remaining = config_.fees.rcd;

  accounts_.transfer(self_, treasury_, ctx.value - config_.fees.rcd);
  rec->has_active_plan = true;
  auto [it, inserted] = book_.plans.insert_or_assign(req.drone, std::move(plan));
  return it->second;
}

ReportOutcome UssContract::report_drone(const CallContext& ctx, DroneId drone,
                                        std::span<const std::uint8_t> rid_wire,
                                        const DmsPoint& sighting_location,
                                        Timestamp sighting_time) {
  const auto* rec = registry_.find(drone);
  if (rec != nullptr && rec->owner == ctx.caller) throw Revert(std::string(kOwnerCannotReport));

  auto plan_it = book_.plans.find(drone);
  if (plan_it == book_.plans.end()) throw Revert(std::string(kInvalidReport));
  MissionPlan& plan = plan_it->second;
  for (const auto& s : plan.sightings) {
    if (s.reporter == ctx.caller) throw Revert(std::string(kDuplicateReport));
  }

  rid::RidMessage msg;
  try {
    msg = rid::decode(rid_wire);
  } catch (const Error&) {
    throw Revert(std::string(kInvalidReport));
  }
  if (!rid::verify_rid_vc(msg.rid_vc.span(), plan.commitment())) {
    throw Revert(std::string(kInvalidReport));
  }

  ReportOutcome out;
  out.reporter_reward = config_.reward();
  accounts_.transfer(treasury_, ctx.caller, out.reporter_reward);
  emit(ctx, "DroneSighted",
       json{{"droneId", drone}, {"sightingLocation", format_dms_point(sighting_location)}});

  GeoCell cell = cell_of(sighting_location, config_.cell_size_m);
  auto* drone_rec = registry_.find(drone);
  if (sighting_matches(plan, cell, sighting_time, config_.match_window_s,
                       config_.match_radius_cells)) {
    out.verdict = Verdict::Reward;
    ++drone_rec->rewards;
    accounts_.transfer(treasury_, self_, config_.bonus());
    plan.bonus_accrued += config_.bonus();
  } else {
    out.verdict = Verdict::Penalty;
    ++drone_rec->penalties;
    Amount fine = std::min(config_.fine(), plan.rcd_remaining);
    accounts_.transfer(self_, treasury_, fine);
    plan.rcd_remaining -= fine;
  }
  plan.sightings.push_back(
      Sighting{ctx.caller, msg, sighting_location, cell, sighting_time, out.verdict});
  return out;
}

Settlement UssContract::report_completion(const CallContext& ctx, DroneId drone,
                                          std::span<const std::uint8_t> rid_vc) {
  auto* rec = registry_.find(drone);
  if (rec == nullptr || rec->owner != ctx.caller) throw Revert(std::string(kNotOwnerOfDrone));
  auto plan_it = book_.plans.find(drone);
  if (!rec->has_active_plan || plan_it == book_.plans.end()) {
    throw Revert(std::string(kNoActivePlan));
  }
  const MissionPlan& plan = plan_it->second;
  if (rid_vc.size() != Digest::size() ||
      !std::equal(rid_vc.begin(), rid_vc.end(), plan.rid_vc.bytes.begin())) {
    throw Revert(std::string(kRidVcMismatch));
  }

  Settlement s;
  s.drone = drone;
  s.owner = ctx.caller;
  s.payout = plan.escrow();
  s.rewards = rec->rewards;
  s.penalties = rec->penalties;
  s.rid_vc = plan.rid_vc;
  accounts_.transfer(self_, ctx.caller, s.payout);

  auto [rep_it, fresh] = book_.reputations.try_emplace(ctx.caller);
  auto& rep = rep_it->second;
  if (fresh) rep.k = config_.fees.initial_k;
  s.reputation = economics::reputation(s.rewards, s.penalties);
  s.k = economics::update_k(s.reputation, rep.k, config_.fees.alpha, config_.fees.k_min);
  rep.reputation = s.reputation;
  rep.k = s.k;
  ++rep.missions;

  rec->rewards = 0;
  rec->penalties = 0;
  emit(ctx, "missionComplete", json{{"droneId", drone}, {"ridVc", s.rid_vc.hex()}});
  rec->has_active_plan = false;
  book_.plans.erase(plan_it);
  return s;
}

json to_json(const MissionPlan& plan, bool include_nonce) {
  json route = json::array();
  for (const auto& rc : plan.route) {
    route.push_back({{"cell", cell_json(rc.cell)},
                     {"band", rc.altitude_band},
                     {"enter", rc.enter},
                     {"exit", rc.exit}});
  }
  json sightings = json::array();
  for (const auto& s : plan.sightings) {
    sightings.push_back({{"reporter", s.reporter.hex()},
                         {"rid", rid::encode_hex(s.rid)},
                         {"location", format_dms_point(s.location)},
                         {"cell", cell_json(s.cell)},
                         {"time", s.time},
                         {"verdict", to_string(s.verdict)}});
  }
  json j{{"droneId", plan.drone},
         {"owner", plan.owner.hex()},
         {"source", format_dms_point(plan.source)},
         {"destination", format_dms_point(plan.destination)},
         {"departureDate", plan.departure_date},
         {"departureTime", plan.departure_time},
         {"departure", plan.departure},
         {"arrival", plan.arrival},
         {"altitudeCm", plan.altitude_cm},
         {"speedCms", plan.speed_cms},
         {"route", std::move(route)},
         {"ridVc", plan.rid_vc.hex()},
         {"feePaid", std::to_string(plan.fee_paid)},
         {"rcdRemaining", std::to_string(plan.rcd_remaining)},
         {"bonusAccrued", std::to_string(plan.bonus_accrued)},
         {"sightings", std::move(sightings)}};
  if (include_nonce) j["nonce"] = plan.nonce.hex();
  return j;
}

MissionPlan plan_from_json(const json& j) {
  MissionPlan p;
  p.drone = j.at("droneId").get<DroneId>();
  p.owner = AccountId::from_hex(j.at("owner").get<std::string>());
  p.source = parse_dms_point(j.at("source").get<std::string>());
  p.destination = parse_dms_point(j.at("destination").get<std::string>());
  p.departure_date = j.at("departureDate").get<std::string>();
  p.departure_time = j.at("departureTime").get<std::string>();
  p.departure = j.at("departure").get<Timestamp>();
  p.arrival = j.at("arrival").get<Timestamp>();
  p.altitude_cm = j.at("altitudeCm").get<std::int64_t>();
  p.speed_cms = j.at("speedCms").get<std::int64_t>();
  for (const auto& rc : j.at("route")) {
    p.route.push_back(RouteCell{cell_from(rc.at("cell")), rc.at("band").get<std::int64_t>(),
                                rc.at("enter").get<Timestamp>(), rc.at("exit").get<Timestamp>()});
  }
  p.rid_vc = Digest::from_hex(j.at("ridVc").get<std::string>());
  if (!j.contains("nonce")) {
    throw Error(ErrorCode::SchemaMismatch, "plan has no nonce (redacted export)");
  }
  p.nonce = Nonce::from_hex(j.at("nonce").get<std::string>());
  p.fee_paid = std::stoll(j.at("feePaid").get<std::string>());
  p.rcd_remaining = std::stoll(j.at("rcdRemaining").get<std::string>());
  p.bonus_accrued = std::stoll(j.at("bonusAccrued").get<std::string>());
  for (const auto& s : j.at("sightings")) {
    p.sightings.push_back(Sighting{AccountId::from_hex(s.at("reporter").get<std::string>()),
                                   rid::decode_hex(s.at("rid").get<std::string>()),
                                   parse_dms_point(s.at("location").get<std::string>()),
                                   cell_from(s.at("cell")), s.at("time").get<Timestamp>(),
                                   parse_verdict(s.at("verdict").get<std::string>())});
  }
  return p;
}

json export_active_plans(const UssBook& book) {
  json out = json::array();
  for (const auto& [id, plan] : book.plans) out.push_back(to_json(plan, false));
  return out;
}

}  // namespace utm::uss
