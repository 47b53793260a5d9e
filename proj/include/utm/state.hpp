#pragma once

#include <cstdint>

#include "utm/accounts.hpp"
#include "utm/authority.hpp"
#include "utm/uss.hpp"

namespace utm {

/// Everything a transaction can mutate.
struct WorldState {
  Accounts accounts;
  authority::Registry registry;
  uss::UssBook uss;

  bool operator==(const WorldState&) const = default;
};

/// Storage slots that differ between two states: one per account balance,
/// drone record, subscription, plan, reputation entry or counter touched.
std::uint64_t count_state_writes(const WorldState& before, const WorldState& after);

}  // namespace utm
