#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "utm/accounts.hpp"
#include "utm/common.hpp"

namespace utm::authority {

inline constexpr std::string_view kDroneAlreadyRegistered = "Drone already registered";
inline constexpr std::string_view kAcceptTerms = "Please accept terms and conditions";

struct DroneRecord {
  DroneId id = 0;
  std::string serial;
  Digest owner_national_id_hash;  // the national id itself is never stored
  AccountId owner;
  std::uint64_t rewards = 0;
  std::uint64_t penalties = 0;
  bool has_active_plan = false;
  bool sign_tac = false;

  bool operator==(const DroneRecord&) const = default;
};

/// Drone registry kept by the aviation authority. Ids are array indices
/// and are never reused.
class Registry {
 public:
  /// Reverts with the authority's messages on duplicate serial or
  /// unsigned terms.
  DroneId register_drone(const AccountId& caller, std::string serial,
                         std::string_view owner_national_id, bool sign_tac);

  /// Read access for USSs and the authority only.
  DroneRecord get_drone(const Accounts& accounts, const AccountId& requester,
                        DroneId id) const;

  const DroneRecord* find(DroneId id) const;
  DroneRecord* find(DroneId id);

  std::size_t size() const { return drones_.size(); }
  const std::vector<DroneRecord>& records() const { return drones_; }

  /// Restores a record verbatim (snapshot loading only).
  void insert_raw(DroneRecord record);

  bool operator==(const Registry&) const = default;

 private:
  std::vector<DroneRecord> drones_;
  std::set<std::string> serials_;
};

/// Registry export: serials replaced by their SHA-256.
nlohmann::json export_registry(const Registry& registry);

}  // namespace utm::authority
