#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "utm/accounts.hpp"
#include "utm/authority.hpp"
#include "utm/chain.hpp"
#include "utm/economics.hpp"
#include "utm/geo.hpp"
#include "utm/rid.hpp"

namespace utm::uss {

inline constexpr std::string_view kNotOwnerOfRegistered = "Not the owner of the registered drone";
inline constexpr std::string_view kAlreadySubscribed = "Drone is already subscribed";
inline constexpr std::string_view kPaySubscriptionFee = "Please make sure to pay the subscription fee";
inline constexpr std::string_view kNotOwnerOfARegistered = "Not the owner of a registered drone";
inline constexpr std::string_view kDroneNotSubscribed = "Drone is not subscribed";
inline constexpr std::string_view kNotSubscribedToUss = "Not subscribed to a USS";
inline constexpr std::string_view kActivePlanExists = "There is already an active plan for this drone";
inline constexpr std::string_view kPayPlanFee = "Please make sure to pay the mission plan fee";
inline constexpr std::string_view kScheduleConflict = "schedule-conflict";
inline constexpr std::string_view kOwnerCannotReport = "Owner of drone cannot report it!";
inline constexpr std::string_view kDuplicateReport = "not allowed to report same drone more than once";
inline constexpr std::string_view kInvalidReport = "Invalid report";
inline constexpr std::string_view kNotOwnerOfDrone = "Not owner of drone";
inline constexpr std::string_view kNoActivePlan = "No active plan";
inline constexpr std::string_view kRidVcMismatch = "RID-VC does not match the active plan";

struct UssConfig {
  economics::FeeParams fees;
  Amount subscription_fee = 1000;
  // Unset units derive from the deposit: fine = bonus = rcd/10,
  // reporter reward = rcd/50.
  std::optional<Amount> fine_unit;
  std::optional<Amount> bonus_unit;
  std::optional<Amount> reporter_reward;
  Timestamp subscription_period_s = 365LL * 86400;
  std::int32_t cell_size_m = 100;
  std::int64_t altitude_cm = 10'000;
  std::int64_t altitude_band_cm = 3'000;
  std::int64_t cruise_speed_cms = 1'000;
  Timestamp match_window_s = 120;
  std::int64_t match_radius_cells = 0;
  std::int64_t deconfliction_cells = 1;
  Timestamp deconfliction_s = 60;
  std::string epoch_date = "01012025";
  std::uint64_t nonce_seed = 0;

  Amount fine() const { return fine_unit.value_or(fees.rcd / 10); }
  Amount bonus() const { return bonus_unit.value_or(fees.rcd / 10); }
  Amount reward() const { return reporter_reward.value_or(fees.rcd / 50); }

  void validate() const;
  bool operator==(const UssConfig&) const = default;
};

/// A contiguous stay of the planned flight in one grid cell, in whole
/// seconds, both ends inclusive.
struct RouteCell {
  GeoCell cell;
  std::int64_t altitude_band = 0;
  Timestamp enter = 0;
  Timestamp exit = 0;

  bool operator==(const RouteCell&) const = default;
};

enum class Verdict { Reward, Penalty, Invalid };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view text);

struct Sighting {
  AccountId reporter;
  rid::RidMessage rid;
  DmsPoint location;
  GeoCell cell;
  Timestamp time = 0;
  Verdict verdict = Verdict::Invalid;

  bool operator==(const Sighting&) const = default;
};

struct MissionPlan {
  DroneId drone = 0;
  AccountId owner;
  DmsPoint source;
  DmsPoint destination;
  std::string departure_date;
  std::string departure_time;
  Timestamp departure = 0;
  Timestamp arrival = 0;
  std::int64_t altitude_cm = 0;
  std::int64_t speed_cms = 0;
  std::vector<RouteCell> route;
  Digest rid_vc;
  Nonce nonce;  // never leaves the USS
  Amount fee_paid = 0;
  // Escrow attributable to this plan is rcd_remaining + bonus_accrued.
  Amount rcd_remaining = 0;
  Amount bonus_accrued = 0;
  std::vector<Sighting> sightings;

  rid::PlanCommitment commitment() const;
  DmsPoint position_at(Timestamp t) const;
  Amount escrow() const { return rcd_remaining + bonus_accrued; }

  bool operator==(const MissionPlan&) const = default;
};

struct Subscription {
  DroneId drone = 0;
  AccountId subscriber;
  Amount paid_fee = 0;
  Timestamp expiry = 0;

  bool operator==(const Subscription&) const = default;
};

/// Mutable USS contract storage.
struct UssBook {
  std::map<DroneId, Subscription> subscriptions;
  std::map<DroneId, MissionPlan> plans;  // active plans only
  std::map<AccountId, economics::ReputationState> reputations;
  std::uint64_t nonce_counter = 0;

  bool operator==(const UssBook&) const = default;
};

struct Quote {
  Amount fee = 0;
  Fixed k;
  std::int64_t active_missions = 0;
  Amount surcharge = 0;
};

struct PlanRequest {
  DroneId drone = 0;
  DmsPoint source;
  DmsPoint destination;
  std::string departure_date;
  std::string departure_time;
  std::optional<std::int64_t> speed_cms;
};

struct ReportOutcome {
  Verdict verdict = Verdict::Invalid;
  Amount reporter_reward = 0;
};

struct Settlement {
  DroneId drone = 0;
  AccountId owner;
  Amount payout = 0;
  std::uint64_t rewards = 0;
  std::uint64_t penalties = 0;
  Fixed reputation;
  Fixed k;
  Digest rid_vc;
};

struct CallContext {
  AccountId caller;
  Amount value = 0;
  Timestamp now = 0;
  std::vector<Event>* events = nullptr;
};

// Pure planning helpers.

Timestamp flight_duration_s(const DmsPoint& from, const DmsPoint& to,
                            std::int64_t speed_cms);

/// Per-second sampling of the straight-line flight, merged into runs.
std::vector<RouteCell> occupancy(const DmsPoint& from, const DmsPoint& to,
                                 Timestamp departure, Timestamp arrival,
                                 std::int32_t cell_size_m, std::int64_t altitude_band);

bool routes_conflict(std::span<const RouteCell> a, std::span<const RouteCell> b,
                     std::int64_t buffer_cells, Timestamp buffer_s);

/// True when the plan puts the drone in `cell` (within `radius_cells`) at
/// some second within `window_s` of `time`.
bool sighting_matches(const MissionPlan& plan, const GeoCell& cell, Timestamp time,
                      Timestamp window_s, std::int64_t radius_cells);

Nonce draw_nonce(std::uint64_t seed, std::uint64_t counter);

/// View: prices the next mission for `caller`'s drone.
Quote quote(const UssConfig& config, const authority::Registry& registry,
            const UssBook& book, const AccountId& caller, DroneId drone);

/// The USS smart contract bound to one world state. `self` holds escrow;
/// `treasury` collects fees and forfeited fines and pays rewards.
class UssContract {
 public:
  UssContract(const UssConfig& config, Accounts& accounts,
              authority::Registry& registry, UssBook& book, AccountId self,
              AccountId treasury);

  void subscribe(const CallContext& ctx, DroneId drone);

  const MissionPlan& request_plan(const CallContext& ctx, const PlanRequest& req);

  /// Throws Revert(schedule-conflict) when the route overlaps an active plan.
  std::vector<RouteCell> schedule_route(const DmsPoint& source,
                                        const DmsPoint& destination,
                                        Timestamp departure, Timestamp arrival) const;

  ReportOutcome report_drone(const CallContext& ctx, DroneId drone,
                             std::span<const std::uint8_t> rid_wire,
                             const DmsPoint& sighting_location,
                             Timestamp sighting_time);

  Settlement report_completion(const CallContext& ctx, DroneId drone,
                               std::span<const std::uint8_t> rid_vc);

 private:
  void emit(const CallContext& ctx, std::string name, nlohmann::json data) const;

  const UssConfig& config_;
  Accounts& accounts_;
  authority::Registry& registry_;
  UssBook& book_;
  AccountId self_;
  AccountId treasury_;
};

/// Plan as returned to the operator; `include_nonce` is for private
/// snapshots only.
nlohmann::json to_json(const MissionPlan& plan, bool include_nonce);
MissionPlan plan_from_json(const nlohmann::json& j);

/// Active-plan table without nonces.
nlohmann::json export_active_plans(const UssBook& book);

}  // namespace utm::uss
