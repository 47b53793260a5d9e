#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "utm/ledger.hpp"

namespace utm::sim {

using nlohmann::json;

enum class DroneBehavior { Compliant, Deviating, Silent, Forger };
enum class Movement { Static, RandomWalk };
enum class Honesty { Honest, Replayer };

std::string_view to_string(DroneBehavior b);
std::string_view to_string(Movement m);
std::string_view to_string(Honesty h);

struct DroneAgentSpec {
  std::string serial;
  std::string operator_name;  // drones sharing a name share an account
  DroneBehavior behavior = DroneBehavior::Compliant;
  std::int64_t offset_cells = 0;  // deviating only
  std::int64_t start_tick = 0;    // deviating only
  DmsPoint source;
  DmsPoint destination;
  std::string departure_date;
  std::string departure_time;
  std::optional<std::int64_t> speed_cms;
};

struct ReporterAgentSpec {
  DmsPoint position;
  Movement movement = Movement::Static;
  double sensing_range_m = 300.0;
  Honesty honesty = Honesty::Honest;
  std::int64_t replay_delay_ticks = 0;  // replayer only
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  std::int64_t tick_seconds = 10;
  std::int64_t duration_ticks = 360;
  std::string start_date = "01012025";
  std::string start_time = "0000";
  DmsPoint grid_origin;  // south-west corner
  std::int64_t grid_extent_cells = 100;
  LedgerConfig ledger;
  Amount operator_funding = 1'000'000;
  double loss_probability = 0.0;
  Timestamp plan_lead_s = 120;
  std::int64_t max_plan_attempts = 30;
  std::vector<DroneAgentSpec> drones;
  std::vector<ReporterAgentSpec> reporters;

  /// Throws Error(ScenarioInvalid).
  void validate() const;
  Timestamp start() const;
  Timestamp time_at(std::int64_t tick) const { return start() + tick * tick_seconds; }
};

/// Syntax errors throw Error(ParseError) with line/column; content errors
/// throw Error(ScenarioInvalid).
Scenario parse_scenario(std::string_view text);
Scenario scenario_from_json(const json& j);
json to_json(const Scenario& s);

/// Random airspace: `drones` one-mission operators with staggered
/// departures and `reporters` randomly walking honest reporters.
Scenario generate_scenario(std::uint64_t seed, int drones, int reporters);

struct TraceRow {
  std::int64_t tick = 0;
  DroneId drone = 0;
  GeoCell cell;
  std::string broadcast_hex;  // empty for silent drones
  bool operator==(const TraceRow&) const = default;
};

std::string trace_csv(std::span<const TraceRow> rows);

enum class Phase { Unregistered, Subscribed, Planned, Done, Failed };

struct DroneState {
  AccountId owner;
  std::optional<DroneId> id;
  Phase phase = Phase::Unregistered;
  std::int64_t attempts = 0;
  std::string departure_date;
  std::string departure_time;
  Timestamp departure = 0;
  Timestamp arrival = 0;
  Digest rid_vc;
  bool operator==(const DroneState&) const = default;
};

struct PendingReplay {
  std::int64_t due_tick = 0;
  DroneId drone = 0;
  rid::RidMessage rid;
  bool operator==(const PendingReplay&) const = default;
};

struct ReporterState {
  AccountId account;
  DmsPoint position;
  std::set<std::pair<DroneId, Digest>> heard;  // one report per drone per mission
  std::vector<PendingReplay> replays;
  bool operator==(const ReporterState&) const = default;
};

/// Deterministic discrete-time driver. Each tick: reporters move, drones
/// act (register/subscribe, quote+plan, complete), airborne drones
/// broadcast, reporters submit in id order, and one block is sealed.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  bool done() const { return tick_ >= scenario_.duration_ticks; }
  std::int64_t tick() const { return tick_; }
  void step();
  void run_to_end();

  const Scenario& scenario() const { return scenario_; }
  const Ledger& ledger() const { return ledger_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  const std::vector<DroneState>& drones() const { return drones_; }
  const std::vector<ReporterState>& reporters() const { return reporters_; }
  const std::map<std::string, AccountId>& operators() const { return operators_; }
  Amount genesis_supply() const { return genesis_supply_; }

  /// Private checkpoint (includes nonces and the RNG state).
  json checkpoint() const;
  static Simulation resume(const json& checkpoint);

  /// Where drone `index` actually is at `t` (deviation applied).
  DmsPoint drone_position(std::size_t index, Timestamp t) const;

 private:
  struct Resume {};
  Simulation(Resume, Scenario scenario, Ledger ledger);

  void drone_actions(Timestamp now);
  void try_plan(std::size_t i);
  void broadcasts(Timestamp now, std::vector<std::tuple<std::size_t, DroneId, rid::RidMessage, DmsPoint>>& out);
  void move_reporters();

  Scenario scenario_;
  Ledger ledger_;
  std::mt19937_64 rng_;
  std::int64_t tick_ = 0;
  Amount genesis_supply_ = 0;
  std::map<std::string, AccountId> operators_;
  std::vector<DroneState> drones_;
  std::vector<ReporterState> reporters_;
  std::vector<TraceRow> trace_;
};

/// Everything here is read back from the block log alone.
json emit_metrics(std::span<const Block> blocks);

struct RunResult {
  json metrics;
  Ledger ledger;
  std::vector<TraceRow> trace;
  Amount genesis_supply = 0;
};

RunResult run(const Scenario& scenario);

}  // namespace utm::sim
