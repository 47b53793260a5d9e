#pragma once

#include <cstdint>

#include "utm/common.hpp"
#include "utm/fixed.hpp"

// Mission pricing and operator reputation.
//
//   fee  = k*d + c + a                       (dynamic mission fee)
//   a    = a0 * active_missions              (congestion surcharge)
//   R    = (r - p) / (r + p + 2)             (Beta reputation)
//   k'   = max(k_min, (1 - (R+1)/2)*alpha + k*(1 - alpha))
//
// The congestion term `a` and the smoothing weight `alpha` are distinct
// parameters: one is currency, the other dimensionless.

namespace utm::economics {

struct FeeParams {
  Amount base_cost = 1000;              // d
  Amount rcd = 500;                     // c, refundable compliance deposit
  Amount surcharge_per_mission = 50;    // a0
  Fixed alpha = Fixed::from_raw(300'000);
  Fixed k_min = Fixed::from_raw(50'000);
  Fixed initial_k = Fixed::from_int(1);

  /// Throws Error(InvalidArgument) unless d, c, a0 >= 0, 0 < alpha < 1,
  /// 0 < k_min <= 1 and initial_k >= k_min.
  void validate() const;

  bool operator==(const FeeParams&) const = default;
};

struct ReputationState {
  Fixed reputation;                       // R, in (-1, 1)
  Fixed k = Fixed::from_int(1);           // cost scaling factor
  std::uint64_t missions = 0;

  bool operator==(const ReputationState&) const = default;
};

/// k*d + c + a rounded half-up to whole currency units.
Amount dynamic_fee(Fixed k, Amount base_cost, Amount rcd, Amount surcharge);

Amount congestion_surcharge(std::int64_t active_missions, Amount per_mission);

Fixed reputation(std::uint64_t rewards, std::uint64_t penalties);

/// Accepts the closed boundary alpha = 1 and R = +-1 so the limits of the
/// update can be evaluated; configured alphas stay inside (0, 1).
Fixed update_k(Fixed reputation, Fixed k_prev, Fixed alpha, Fixed k_min);

}  // namespace utm::economics
