#include "utm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "utm/persistence.hpp"
#include "utm/sha256.hpp"

namespace utm::sim {

namespace {

void invalid(const std::string& what) { throw Error(ErrorCode::ScenarioInvalid, what); }

std::int64_t amount_value(const json& tx_payload, const char* key) {
  return persist::amount_from(tx_payload.at(key));
}

DmsPoint point_from(const json& j) { return parse_dms_point(j.get<std::string>()); }

}  // namespace

std::string_view to_string(DroneBehavior b) {
  switch (b) {
    case DroneBehavior::Compliant: return "compliant";
    case DroneBehavior::Deviating: return "deviating";
    case DroneBehavior::Silent: return "silent";
    case DroneBehavior::Forger: return "forger";
  }
  return "compliant";
}

std::string_view to_string(Movement m) { return m == Movement::Static ? "static" : "randomWalk"; }
std::string_view to_string(Honesty h) { return h == Honesty::Honest ? "honest" : "replayer"; }

Timestamp Scenario::start() const { return to_timestamp(start_date, start_time, ledger.uss.epoch_date); }

void Scenario::validate() const {
  try {
    ledger.uss.validate();
    validate_date(start_date);
    validate_time(start_time);
  } catch (const Error& e) {
    invalid(e.what());
  }
  if (tick_seconds <= 0) invalid("tickSeconds must be positive");
  if (duration_ticks <= 0) invalid("durationTicks must be positive");
  if (grid_extent_cells <= 0) invalid("gridExtent must be positive");
  if (operator_funding < 0 || ledger.treasury_funding < 0) invalid("funding must be non-negative");
  if (!(loss_probability >= 0.0 && loss_probability < 1.0)) invalid("lossProbability must lie in [0, 1)");
  if (plan_lead_s < 0) invalid("planLeadSeconds must be non-negative");
  if (max_plan_attempts <= 0) invalid("maxPlanAttempts must be positive");

  std::int32_t cell = ledger.uss.cell_size_m;
  GeoCell lo = cell_of(grid_origin, cell);
  auto inside = [&](const DmsPoint& p) {
    GeoCell c = cell_of(p, cell);
    return in_range(p) && c.lat_index >= lo.lat_index && c.lon_index >= lo.lon_index &&
           c.lat_index < lo.lat_index + grid_extent_cells && c.lon_index < lo.lon_index + grid_extent_cells;
  };
  std::set<std::string> serials;
  for (std::size_t i = 0; i < drones.size(); ++i) {
    const auto& d = drones[i];
    std::string where = "drone " + std::to_string(i) + ": ";
    if (d.serial.empty() || !serials.insert(d.serial).second) invalid(where + "serial missing or repeated");
    if (!inside(d.source) || !inside(d.destination)) invalid(where + "mission leaves the grid");
    try {
      validate_date(d.departure_date);
      validate_time(d.departure_time);
    } catch (const Error& e) {
      invalid(where + e.what());
    }
    if (d.speed_cms && *d.speed_cms <= 0) invalid(where + "speed must be positive");
    if (d.behavior == DroneBehavior::Deviating && (d.offset_cells <= 0 || d.start_tick < 0)) {
      invalid(where + "deviating drones need offsetCells > 0 and startTick >= 0");
    }
  }
  for (std::size_t i = 0; i < reporters.size(); ++i) {
    const auto& r = reporters[i];
    std::string where = "reporter " + std::to_string(i) + ": ";
    if (!inside(r.position)) invalid(where + "position outside the grid");
    if (!(r.sensing_range_m > 0)) invalid(where + "sensingRange must be positive");
    if (r.replay_delay_ticks < 0) invalid(where + "replayDelayTicks must be non-negative");
  }
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    if (!j.is_object()) invalid("scenario must be a JSON object");
    if (j.contains("schema")) {
      try {
        persist::check_schema(j.at("schema"), persist::kScenarioSchema);
      } catch (const Error& e) {
        invalid(e.what());
      }
    }
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", s.seed);
    s.tick_seconds = j.value("tickSeconds", s.tick_seconds);
    s.duration_ticks = j.value("durationTicks", s.duration_ticks);
    if (j.contains("start")) {
      s.start_date = j.at("start").value("date", s.start_date);
      s.start_time = j.at("start").value("time", s.start_time);
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      if (g.contains("origin")) s.grid_origin = point_from(g.at("origin"));
      s.grid_extent_cells = g.value("extentCells", s.grid_extent_cells);
      if (g.contains("cellSize")) s.ledger.uss.cell_size_m = g.at("cellSize").get<std::int32_t>();
    }
    if (j.contains("ledger")) persist::merge_from_json(s.ledger, j.at("ledger"));
    // Shorthands for the most common economic knobs.
    if (j.contains("feeParams")) persist::merge_from_json(s.ledger.uss.fees, j.at("feeParams"));
    if (j.contains("subscriptionFee")) s.ledger.uss.subscription_fee = persist::amount_from(j.at("subscriptionFee"));
    if (j.contains("reporterReward")) s.ledger.uss.reporter_reward = persist::amount_from(j.at("reporterReward"));
    if (j.contains("fineUnit")) s.ledger.uss.fine_unit = persist::amount_from(j.at("fineUnit"));
    if (j.contains("bonusUnit")) s.ledger.uss.bonus_unit = persist::amount_from(j.at("bonusUnit"));
    if (j.contains("treasuryFunding")) s.ledger.treasury_funding = persist::amount_from(j.at("treasuryFunding"));
    if (j.contains("operatorFunding")) s.operator_funding = persist::amount_from(j.at("operatorFunding"));
    s.loss_probability = j.value("lossProbability", s.loss_probability);
    s.plan_lead_s = j.value("planLeadSeconds", s.plan_lead_s);
    s.max_plan_attempts = j.value("maxPlanAttempts", s.max_plan_attempts);

    for (const auto& d : j.value("drones", json::array())) {
      DroneAgentSpec spec;
      spec.serial = d.at("serial").get<std::string>();
      spec.operator_name = d.value("operator", "operator:" + spec.serial);
      const json& b = d.value("behavior", json{{"type", "compliant"}});
      std::string type = b.is_string() ? b.get<std::string>() : b.at("type").get<std::string>();
      if (type == "compliant") {
        spec.behavior = DroneBehavior::Compliant;
      } else if (type == "deviating") {
        spec.behavior = DroneBehavior::Deviating;
        spec.offset_cells = b.at("offsetCells").get<std::int64_t>();
        spec.start_tick = b.value("startTick", std::int64_t{0});
      } else if (type == "silent") {
        spec.behavior = DroneBehavior::Silent;
      } else if (type == "forger") {
        spec.behavior = DroneBehavior::Forger;
      } else {
        invalid("unknown drone behavior '" + type + "'");
      }
      const json& m = d.at("mission");
      spec.source = point_from(m.at("source"));
      spec.destination = point_from(m.at("destination"));
      spec.departure_date = m.at("departureDate").get<std::string>();
      spec.departure_time = m.at("departureTime").get<std::string>();
      if (d.contains("speed")) {
        spec.speed_cms = static_cast<std::int64_t>(std::llround(d.at("speed").get<double>() * 100.0));
      }
      s.drones.push_back(std::move(spec));
    }
    for (const auto& r : j.value("reporters", json::array())) {
      ReporterAgentSpec spec;
      if (r.contains("cell")) {
        const json& c = r.at("cell");
        GeoCell origin = cell_of(s.grid_origin, s.ledger.uss.cell_size_m);
        spec.position = cell_center({origin.lat_index + c.at(0).get<std::int64_t>(),
                                     origin.lon_index + c.at(1).get<std::int64_t>()},
                                    s.ledger.uss.cell_size_m);
      } else {
        spec.position = point_from(r.at("position"));
      }
      std::string movement = r.value("movement", "static");
      if (movement == "static") {
        spec.movement = Movement::Static;
      } else if (movement == "randomWalk") {
        spec.movement = Movement::RandomWalk;
      } else {
        invalid("unknown reporter movement '" + movement + "'");
      }
      spec.sensing_range_m = r.value("sensingRange", spec.sensing_range_m);
      const json& h = r.value("honesty", json{{"type", "honest"}});
      std::string type = h.is_string() ? h.get<std::string>() : h.at("type").get<std::string>();
      if (type == "honest") {
        spec.honesty = Honesty::Honest;
      } else if (type == "replayer") {
        spec.honesty = Honesty::Replayer;
        spec.replay_delay_ticks = h.value("replayDelayTicks", std::int64_t{0});
      } else {
        invalid("unknown reporter honesty '" + type + "'");
      }
      s.reporters.push_back(spec);
    }
  } catch (const json::exception& e) {
    invalid(std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ScenarioInvalid) throw;
    invalid(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario parse_scenario(std::string_view text) {
  return scenario_from_json(persist::parse_json(text, ErrorCode::ParseError));
}

json to_json(const Scenario& s) {
  json drones = json::array();
  for (const auto& d : s.drones) {
    json b{{"type", to_string(d.behavior)}};
    if (d.behavior == DroneBehavior::Deviating) {
      b["offsetCells"] = d.offset_cells;
      b["startTick"] = d.start_tick;
    }
    json dj{{"serial", d.serial},
            {"operator", d.operator_name},
            {"behavior", std::move(b)},
            {"mission",
             {{"source", format_dms_point(d.source)},
              {"destination", format_dms_point(d.destination)},
              {"departureDate", d.departure_date},
              {"departureTime", d.departure_time}}}};
    if (d.speed_cms) dj["speed"] = static_cast<double>(*d.speed_cms) / 100.0;
    drones.push_back(std::move(dj));
  }
  json reporters = json::array();
  for (const auto& r : s.reporters) {
    json h{{"type", to_string(r.honesty)}};
    if (r.honesty == Honesty::Replayer) h["replayDelayTicks"] = r.replay_delay_ticks;
    reporters.push_back({{"position", format_dms_point(r.position)},
                         {"movement", to_string(r.movement)},
                         {"sensingRange", r.sensing_range_m},
                         {"honesty", std::move(h)}});
  }
  return {{"schema", persist::schema_header(persist::kScenarioSchema)},
          {"name", s.name},
          {"seed", s.seed},
          {"tickSeconds", s.tick_seconds},
          {"durationTicks", s.duration_ticks},
          {"start", {{"date", s.start_date}, {"time", s.start_time}}},
          {"grid", {{"origin", format_dms_point(s.grid_origin)}, {"extentCells", s.grid_extent_cells}}},
          {"ledger", persist::to_json(s.ledger, false)},
          {"operatorFunding", std::to_string(s.operator_funding)},
          {"lossProbability", s.loss_probability},
          {"planLeadSeconds", s.plan_lead_s},
          {"maxPlanAttempts", s.max_plan_attempts},
          {"drones", std::move(drones)},
          {"reporters", std::move(reporters)}};
}

Scenario generate_scenario(std::uint64_t seed, int drones, int reporters) {
  Scenario s;
  s.name = "random-" + std::to_string(drones) + "x" + std::to_string(reporters);
  s.seed = seed;
  s.grid_origin = parse_dms_point("+25°00′00″,+055°00′00″");
  s.grid_extent_cells = 100;
  s.ledger.treasury_funding = 10'000'000;
  s.start_time = "0050";

  std::mt19937_64 rng(seed);
  const std::int32_t cell = s.ledger.uss.cell_size_m;
  const double extent_m = static_cast<double>(s.grid_extent_cells * cell);
  std::uniform_real_distribution<double> coord(200.0, extent_m - 200.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));
  std::uniform_real_distribution<double> length(1500.0, 3500.0);

  Timestamp latest = 0;
  for (int i = 0; i < drones; ++i) {
    DroneAgentSpec d;
    d.serial = "SIM-" + std::to_string(i);
    d.operator_name = "operator:" + d.serial;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    do {
      x0 = coord(rng);
      y0 = coord(rng);
      double a = angle(rng), len = length(rng);
      x1 = x0 + len * std::cos(a);
      y1 = y0 + len * std::sin(a);
    } while (x1 < 200 || y1 < 200 || x1 > extent_m - 200 || y1 > extent_m - 200);
    d.source = offset_m(s.grid_origin, y0, x0);
    d.destination = offset_m(s.grid_origin, y1, x1);
    // Departures staggered over the first 50 minutes.
    Timestamp dep = 3600 + 60 * static_cast<Timestamp>(i * 50 / std::max(drones, 1));
    d.departure_date = s.ledger.uss.epoch_date;
    d.departure_time = format_time(dep);
    latest = std::max(latest, dep);
    s.drones.push_back(std::move(d));
  }
  for (int i = 0; i < reporters; ++i) {
    ReporterAgentSpec r;
    r.position = offset_m(s.grid_origin, coord(rng), coord(rng));
    r.movement = Movement::RandomWalk;
    r.sensing_range_m = 400.0;
    s.reporters.push_back(r);
  }
  // Room for retries plus the longest flight.
  s.duration_ticks = (latest + 3600 - s.start()) / s.tick_seconds;
  return s;
}

std::string trace_csv(std::span<const TraceRow> rows) {
  std::ostringstream out;
  out << "tick,droneId,cell,broadcast\n";
  for (const auto& r : rows) {
    out << r.tick << ',' << r.drone << ',' << format_cell(r.cell) << ',' << r.broadcast_hex << '\n';
  }
  return out.str();
}

Simulation::Simulation(Scenario scenario)
    : scenario_([&] {
        scenario.validate();
        scenario.ledger.uss.nonce_seed = scenario.seed;
        return std::move(scenario);
      }()),
      ledger_(scenario_.ledger),
      rng_(scenario_.seed) {
  ledger_.set_time(scenario_.start());
  for (const auto& d : scenario_.drones) {
    if (!operators_.contains(d.operator_name)) {
      operators_[d.operator_name] = ledger_.create_account(Role::Operator, scenario_.operator_funding);
    }
    DroneState st;
    st.owner = operators_.at(d.operator_name);
    st.departure_date = d.departure_date;
    st.departure_time = d.departure_time;
    drones_.push_back(st);
  }
  for (const auto& r : scenario_.reporters) {
    reporters_.push_back(ReporterState{ledger_.create_account(Role::Reporter), r.position, {}, {}});
  }
  genesis_supply_ = ledger_.state().accounts.total_supply();
}

Simulation::Simulation(Resume, Scenario scenario, Ledger ledger)
    : scenario_(std::move(scenario)), ledger_(std::move(ledger)) {}

DmsPoint Simulation::drone_position(std::size_t index, Timestamp t) const {
  const auto& spec = scenario_.drones[index];
  const auto& st = drones_[index];
  DmsPoint p = interpolate(spec.source, spec.destination, st.departure, st.arrival, t);
  if (spec.behavior == DroneBehavior::Deviating && tick_ >= spec.start_tick) {
    // Sideways, to the left of the direction of travel.
    double north = (spec.destination.lat_arcsec - spec.source.lat_arcsec) * kMetresPerArcsecond;
    double east = (spec.destination.lon_arcsec - spec.source.lon_arcsec) * kMetresPerArcsecond;
    double len = std::hypot(north, east);
    double shift = static_cast<double>(spec.offset_cells * scenario_.ledger.uss.cell_size_m);
    if (len == 0) {
      p = offset_m(p, shift, 0);
    } else {
      p = offset_m(p, shift * east / len, -shift * north / len);
    }
  }
  return p;
}

void Simulation::move_reporters() {
  const std::int32_t cell = scenario_.ledger.uss.cell_size_m;
  GeoCell lo = cell_of(scenario_.grid_origin, cell);
  for (std::size_t i = 0; i < reporters_.size(); ++i) {
    if (scenario_.reporters[i].movement != Movement::RandomWalk) continue;
    auto step = static_cast<int>(rng_() % 9);
    int dn = step / 3 - 1, de = step % 3 - 1;
    GeoCell c = cell_of(reporters_[i].position, cell);
    GeoCell next{std::clamp(c.lat_index + dn, lo.lat_index, lo.lat_index + scenario_.grid_extent_cells - 1),
                 std::clamp(c.lon_index + de, lo.lon_index, lo.lon_index + scenario_.grid_extent_cells - 1)};
    reporters_[i].position = cell_center(next, cell);
  }
}

void Simulation::try_plan(std::size_t i) {
  auto& st = drones_[i];
  const auto& spec = scenario_.drones[i];
  DroneId id = *st.id;
  Transaction q = ledger_.submit(st.owner, ops::kRequestQuote, {{"droneId", id}});
  if (q.reverted()) {
    st.phase = Phase::Failed;
    return;
  }
  json args{{"droneId", id},
            {"sourceLocation", format_dms_point(spec.source)},
            {"destinationLocation", format_dms_point(spec.destination)},
            {"departureDate", st.departure_date},
            {"departureTime", st.departure_time}};
  if (spec.speed_cms) args["speedCms"] = *spec.speed_cms;
  Transaction p = ledger_.submit(st.owner, ops::kRequestPlan, std::move(args), amount_value(q.result.payload, "fee"));
  ++st.attempts;
  if (p.result.success) {
    st.phase = Phase::Planned;
    st.departure = p.result.payload.at("departure").get<Timestamp>();
    st.arrival = p.result.payload.at("arrival").get<Timestamp>();
    st.rid_vc = Digest::from_hex(p.result.payload.at("ridVc").get<std::string>());
  } else if (p.result.reason == uss::kScheduleConflict && st.attempts < scenario_.max_plan_attempts) {
    // Ask again next tick, one minute later.
    Timestamp later = to_timestamp(st.departure_date, st.departure_time, scenario_.ledger.uss.epoch_date) + 60;
    st.departure_date = format_date(later, scenario_.ledger.uss.epoch_date);
    st.departure_time = format_time(later);
  } else {
    st.phase = Phase::Failed;
  }
}

void Simulation::drone_actions(Timestamp now) {
  const auto& epoch = scenario_.ledger.uss.epoch_date;
  for (std::size_t i = 0; i < drones_.size(); ++i) {
    auto& st = drones_[i];
    const auto& spec = scenario_.drones[i];
    switch (st.phase) {
      case Phase::Unregistered: {
        Transaction reg = ledger_.submit(
            st.owner, ops::kRegisterDrone,
            {{"droneSerial", spec.serial}, {"ownerId", "national-id:" + spec.operator_name}, {"signTAC", true}});
        if (reg.reverted()) {
          st.phase = Phase::Failed;
          break;
        }
        st.id = reg.result.payload.at("droneId").get<DroneId>();
        Transaction sub = ledger_.submit(st.owner, ops::kSubscribe, {{"droneId", *st.id}},
                                         scenario_.ledger.uss.subscription_fee);
        st.phase = sub.reverted() ? Phase::Failed : Phase::Subscribed;
        break;
      }
      case Phase::Subscribed:
        if (now >= to_timestamp(st.departure_date, st.departure_time, epoch) - scenario_.plan_lead_s) try_plan(i);
        break;
      case Phase::Planned:
        if (now > st.arrival) {
          Transaction done = ledger_.submit(st.owner, ops::kMissionCompleted,
                                            {{"droneId", *st.id}, {"ridVc", st.rid_vc.hex()}});
          st.phase = done.reverted() ? Phase::Failed : Phase::Done;
        }
        break;
      case Phase::Done:
      case Phase::Failed:
        break;
    }
  }
}

void Simulation::broadcasts(Timestamp now,
                            std::vector<std::tuple<std::size_t, DroneId, rid::RidMessage, DmsPoint>>& out) {
  const std::int32_t cell = scenario_.ledger.uss.cell_size_m;
  for (std::size_t i = 0; i < drones_.size(); ++i) {
    const auto& st = drones_[i];
    const auto& spec = scenario_.drones[i];
    if (st.phase != Phase::Planned || now < st.departure || now > st.arrival) continue;
    DmsPoint pos = drone_position(i, now);
    TraceRow row{tick_, *st.id, cell_of(pos, cell), {}};
    if (spec.behavior == DroneBehavior::Silent) {
      trace_.push_back(std::move(row));
      continue;
    }
    rid::RidMessage m;
    m.faa.timestamp = now;
    m.faa.drone_location = pos;
    m.faa.control_station = spec.source;
    m.faa.altitude_cm = scenario_.ledger.uss.altitude_cm;
    m.faa.velocity_cms = spec.speed_cms.value_or(scenario_.ledger.uss.cruise_speed_cms);
    m.rid_vc = st.rid_vc;
    if (spec.behavior == DroneBehavior::Forger) m.rid_vc = sha256("forged:" + st.rid_vc.hex());
    row.broadcast_hex = rid::encode_hex(m);
    trace_.push_back(std::move(row));

    for (std::size_t r = 0; r < reporters_.size(); ++r) {
      auto& rep = reporters_[r];
      const auto& rspec = scenario_.reporters[r];
      if (distance_m(rep.position, pos) > rspec.sensing_range_m) continue;
      if (scenario_.loss_probability > 0 &&
          std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < scenario_.loss_probability) {
        continue;
      }
      if (!rep.heard.insert({*st.id, st.rid_vc}).second) continue;
      if (rspec.honesty == Honesty::Honest) {
        out.emplace_back(r, *st.id, m, pos);
      } else {
        rep.replays.push_back(PendingReplay{tick_ + rspec.replay_delay_ticks, *st.id, m});
      }
    }
  }
}

void Simulation::step() {
  if (done()) return;
  Timestamp now = scenario_.time_at(tick_);
  ledger_.set_time(now);
  move_reporters();
  drone_actions(now);

  std::vector<std::tuple<std::size_t, DroneId, rid::RidMessage, DmsPoint>> reports;
  broadcasts(now, reports);
  // Replays that fall due, reported at the replayer's own position.
  for (std::size_t r = 0; r < reporters_.size(); ++r) {
    auto& pending = reporters_[r].replays;
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->due_tick <= tick_) {
        reports.emplace_back(r, it->drone, it->rid, reporters_[r].position);
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
  }
  std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  for (const auto& [r, drone, msg, where] : reports) {
    ledger_.submit(reporters_[r].account, ops::kReportDrone,
                   {{"droneId", drone},
                    {"rid", rid::encode_hex(msg)},
                    {"sightingLocation", format_dms_point(where)},
                    {"sightingTime", now}});
  }
  ledger_.seal_block();
  ++tick_;
}

void Simulation::run_to_end() {
  while (!done()) step();
}

namespace {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Unregistered: return "unregistered";
    case Phase::Subscribed: return "subscribed";
    case Phase::Planned: return "planned";
    case Phase::Done: return "done";
    case Phase::Failed: return "failed";
  }
  return "failed";
}

Phase parse_phase(const std::string& s) {
  for (Phase p : {Phase::Unregistered, Phase::Subscribed, Phase::Planned, Phase::Done, Phase::Failed}) {
    if (s == phase_name(p)) return p;
  }
  throw Error(ErrorCode::CorruptPayload, "unknown drone phase '" + s + "'");
}

}  // namespace

json Simulation::checkpoint() const {
  std::ostringstream rng_text;
  rng_text << rng_;
  json drones = json::array();
  for (const auto& d : drones_) {
    drones.push_back({{"owner", d.owner.hex()},
                      {"droneId", d.id ? json(*d.id) : json(nullptr)},
                      {"phase", phase_name(d.phase)},
                      {"attempts", d.attempts},
                      {"departureDate", d.departure_date},
                      {"departureTime", d.departure_time},
                      {"departure", d.departure},
                      {"arrival", d.arrival},
                      {"ridVc", d.rid_vc.hex()}});
  }
  json reporters = json::array();
  for (const auto& r : reporters_) {
    json heard = json::array();
    for (const auto& [id, vc] : r.heard) heard.push_back({id, vc.hex()});
    json replays = json::array();
    for (const auto& p : r.replays) {
      replays.push_back({{"dueTick", p.due_tick}, {"droneId", p.drone}, {"rid", rid::encode_hex(p.rid)}});
    }
    reporters.push_back({{"account", r.account.hex()},
                         {"position", format_dms_point(r.position)},
                         {"heard", std::move(heard)},
                         {"replays", std::move(replays)}});
  }
  json trace = json::array();
  for (const auto& t : trace_) {
    trace.push_back({t.tick, t.drone, t.cell.lat_index, t.cell.lon_index, t.broadcast_hex});
  }
  json operators = json::object();
  for (const auto& [name, id] : operators_) operators[name] = id.hex();
  json scenario = to_json(scenario_);
  return {{"schema", persist::schema_header("utm.checkpoint")},
          {"scenario", std::move(scenario)},
          {"tick", tick_},
          {"rng", rng_text.str()},
          {"genesisSupply", std::to_string(genesis_supply_)},
          {"operators", std::move(operators)},
          {"drones", std::move(drones)},
          {"reporters", std::move(reporters)},
          {"trace", std::move(trace)},
          {"state", persist::snapshot_json(ledger_, persist::Visibility::Private)}};
}

Simulation Simulation::resume(const json& j) {
  try {
    persist::check_schema(j.at("schema"), "utm.checkpoint");
    Scenario scenario = scenario_from_json(j.at("scenario"));
    scenario.ledger.uss.nonce_seed = scenario.seed;
    Simulation s(Resume{}, std::move(scenario), persist::restore_json(j.at("state")));
    std::istringstream rng_text(j.at("rng").get<std::string>());
    rng_text >> s.rng_;
    if (!rng_text) throw Error(ErrorCode::CorruptPayload, "bad RNG state");
    s.tick_ = j.at("tick").get<std::int64_t>();
    s.genesis_supply_ = persist::amount_from(j.at("genesisSupply"));
    for (const auto& [name, id] : j.at("operators").items()) {
      s.operators_[name] = AccountId::from_hex(id.get<std::string>());
    }
    for (const auto& d : j.at("drones")) {
      DroneState st;
      st.owner = AccountId::from_hex(d.at("owner").get<std::string>());
      if (!d.at("droneId").is_null()) st.id = d.at("droneId").get<DroneId>();
      st.phase = parse_phase(d.at("phase").get<std::string>());
      st.attempts = d.at("attempts").get<std::int64_t>();
      st.departure_date = d.at("departureDate").get<std::string>();
      st.departure_time = d.at("departureTime").get<std::string>();
      st.departure = d.at("departure").get<Timestamp>();
      st.arrival = d.at("arrival").get<Timestamp>();
      st.rid_vc = Digest::from_hex(d.at("ridVc").get<std::string>());
      s.drones_.push_back(std::move(st));
    }
    for (const auto& r : j.at("reporters")) {
      ReporterState st;
      st.account = AccountId::from_hex(r.at("account").get<std::string>());
      st.position = parse_dms_point(r.at("position").get<std::string>());
      for (const auto& h : r.at("heard")) {
        st.heard.insert({h.at(0).get<DroneId>(), Digest::from_hex(h.at(1).get<std::string>())});
      }
      for (const auto& p : r.at("replays")) {
        st.replays.push_back(PendingReplay{p.at("dueTick").get<std::int64_t>(), p.at("droneId").get<DroneId>(),
                                           rid::decode_hex(p.at("rid").get<std::string>())});
      }
      s.reporters_.push_back(std::move(st));
    }
    for (const auto& t : j.at("trace")) {
      s.trace_.push_back(TraceRow{t.at(0).get<std::int64_t>(), t.at(1).get<DroneId>(),
                                  {t.at(2).get<std::int64_t>(), t.at(3).get<std::int64_t>()},
                                  t.at(4).get<std::string>()});
    }
    if (s.drones_.size() != s.scenario_.drones.size() || s.reporters_.size() != s.scenario_.reporters.size()) {
      throw Error(ErrorCode::CorruptPayload, "checkpoint agents do not match the scenario");
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptPayload, std::string("corrupt checkpoint: ") + e.what());
  }
}

json emit_metrics(std::span<const Block> blocks) {
  struct OpCount {
    std::uint64_t invocations = 0, successes = 0, reverts = 0, writes = 0;
  };
  std::map<std::string, OpCount> ops;
  std::map<std::string, std::uint64_t> reverts;
  std::map<std::string, json> operators;
  std::map<std::string, std::pair<std::uint64_t, Amount>> reporters;
  std::map<std::string, std::uint64_t> verdicts{{"reward", 0}, {"penalty", 0}};
  json missions = json::array();
  json quotes = json::array();
  Amount genesis = 0;
  std::uint64_t tx_count = 0;

  for (const auto& b : blocks) {
    for (const auto& tx : b.transactions) {
      ++tx_count;
      auto& oc = ops[tx.op];
      ++oc.invocations;
      oc.writes += tx.state_writes;
      if (tx.reverted()) {
        ++oc.reverts;
        ++reverts[tx.result.reason];
        continue;
      }
      ++oc.successes;
      const json& out = tx.result.payload;
      if (tx.op == ops::kCreateAccount) {
        genesis += tx.value;
      } else if (tx.op == ops::kRequestQuote) {
        quotes.push_back({{"txId", tx.tx_id},
                          {"block", b.index},
                          {"droneId", tx.args.at("droneId")},
                          {"fee", out.at("fee")},
                          {"k", out.at("k")},
                          {"activeMissions", out.at("activeMissions")}});
      } else if (tx.op == ops::kReportDrone) {
        auto& r = reporters[tx.caller.hex()];
        ++r.first;
        r.second += persist::amount_from(out.at("reporterReward"));
        ++verdicts[out.at("verdict").get<std::string>()];
      } else if (tx.op == ops::kMissionCompleted) {
        missions.push_back({{"txId", tx.tx_id},
                            {"block", b.index},
                            {"droneId", out.at("droneId")},
                            {"owner", out.at("owner")},
                            {"payout", out.at("payout")},
                            {"rewards", out.at("rewards")},
                            {"penalties", out.at("penalties")},
                            {"reputation", out.at("reputation")},
                            {"k", out.at("k")}});
        auto& op = operators[out.at("owner").get<std::string>()];
        Amount total = op.is_null() ? 0 : persist::amount_from(op.at("totalPayout"));
        std::uint64_t n = op.is_null() ? 0 : op.at("missions").get<std::uint64_t>();
        op = {{"missions", n + 1},
              {"totalPayout", std::to_string(total + persist::amount_from(out.at("payout")))},
              {"reputation", out.at("reputation")},
              {"k", out.at("k")}};
      }
    }
  }

  json op_json = json::object();
  for (const auto& [name, c] : ops) {
    op_json[name] = {{"invocations", c.invocations},
                     {"successes", c.successes},
                     {"reverts", c.reverts},
                     {"stateWrites", c.writes}};
  }
  json rep_json = json::object();
  Amount earnings = 0;
  std::uint64_t valid_reports = 0;
  for (const auto& [id, r] : reporters) {
    rep_json[id] = {{"validReports", r.first}, {"earnings", std::to_string(r.second)}};
    earnings += r.second;
    valid_reports += r.first;
  }
  return {{"schema", persist::schema_header(persist::kMetricsSchema)},
          {"blocks", blocks.size()},
          {"transactions", tx_count},
          {"headHash", blocks.empty() ? Digest{}.hex() : blocks.back().hash.hex()},
          {"genesisSupply", std::to_string(genesis)},
          {"operations", std::move(op_json)},
          {"revertReasons", reverts},
          {"missions", std::move(missions)},
          {"operators", operators},
          {"reporters", std::move(rep_json)},
          {"reports", {{"valid", valid_reports}, {"reward", verdicts["reward"]}, {"penalty", verdicts["penalty"]}}},
          {"reporterEarnings", std::to_string(earnings)},
          {"quotes", std::move(quotes)}};
}

RunResult run(const Scenario& scenario) {
  Simulation s(scenario);
  s.run_to_end();
  json metrics = emit_metrics(s.ledger().blocks());
  return RunResult{std::move(metrics), s.ledger(), s.trace(), s.genesis_supply()};
}

}  // namespace utm::sim
