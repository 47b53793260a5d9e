#include "utm/authority.hpp"

#include "utm/sha256.hpp"

namespace utm::authority {

DroneId Registry::register_drone(const AccountId& caller, std::string serial,
                                 std::string_view owner_national_id, bool sign_tac) {
  if (serials_.contains(serial)) throw Revert(std::string(kDroneAlreadyRegistered));
  if (!sign_tac) throw Revert(std::string(kAcceptTerms));

  DroneRecord record;
  record.id = drones_.size();
  record.serial = serial;
  record.owner_national_id_hash = sha256(owner_national_id);
  record.owner = caller;
  record.sign_tac = true;
  serials_.insert(std::move(serial));
  drones_.push_back(std::move(record));
  return drones_.back().id;
}

DroneRecord Registry::get_drone(const Accounts& accounts, const AccountId& requester,
                                DroneId id) const {
  if (!accounts.contains(requester)) {
    throw Error(ErrorCode::AccessDenied, "access-denied: unknown requester");
  }
  Role role = accounts.get(requester).role;
  if (role != Role::Uss && role != Role::Authority) {
    throw Error(ErrorCode::AccessDenied,
                "access-denied: registry is shared with USSs only");
  }
  const DroneRecord* rec = find(id);
  if (rec == nullptr) {
    throw Error(ErrorCode::UnknownDrone, "unknown-drone: " + std::to_string(id));
  }
  return *rec;
}

const DroneRecord* Registry::find(DroneId id) const {
  return id < drones_.size() ? &drones_[id] : nullptr;
}

DroneRecord* Registry::find(DroneId id) {
  return id < drones_.size() ? &drones_[id] : nullptr;
}

void Registry::insert_raw(DroneRecord record) {
  if (record.id != drones_.size() || serials_.contains(record.serial)) {
    throw Error(ErrorCode::CorruptPayload, "registry records out of order or duplicated");
  }
  serials_.insert(record.serial);
  drones_.push_back(std::move(record));
}

nlohmann::json export_registry(const Registry& registry) {
  auto out = nlohmann::json::array();
  for (const auto& d : registry.records()) {
    out.push_back({{"droneId", d.id},
                   {"serialHash", sha256(d.serial).hex()},
                   {"ownerNationalIdHash", d.owner_national_id_hash.hex()},
                   {"owner", d.owner.hex()},
                   {"rewards", d.rewards},
                   {"penalties", d.penalties},
                   {"hasActivePlan", d.has_active_plan},
                   {"signTAC", d.sign_tac}});
  }
  return out;
}

}  // namespace utm::authority
