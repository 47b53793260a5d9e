#include "utm/economics.hpp"

#include <algorithm>

namespace utm::economics {

namespace {

constexpr std::int64_t kOne = Fixed::kScale;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

void FeeParams::validate() const {
  require(base_cost >= 0, "base cost must be non-negative");
  require(rcd >= 0, "rcd must be non-negative");
  require(surcharge_per_mission >= 0, "surcharge must be non-negative");
  require(alpha.raw() > 0 && alpha.raw() < kOne, "alpha must lie in (0, 1)");
  require(k_min.raw() > 0 && k_min.raw() <= kOne, "k_min must lie in (0, 1]");
  require(initial_k >= k_min, "initial k must be at least k_min");
}

Amount dynamic_fee(Fixed k, Amount base_cost, Amount rcd, Amount surcharge) {
  require(k.raw() >= 0, "k must be non-negative");
  require(base_cost >= 0 && rcd >= 0 && surcharge >= 0,
          "fee components must be non-negative");
  __int128 scaled = static_cast<__int128>(k.raw()) * base_cost +
                    static_cast<__int128>(rcd + surcharge) * kOne;
  return div_round_half_up(scaled, kOne);
}

Amount congestion_surcharge(std::int64_t active_missions, Amount per_mission) {
  require(active_missions >= 0, "mission count must be non-negative");
  require(per_mission >= 0, "surcharge must be non-negative");
  return active_missions * per_mission;
}

Fixed reputation(std::uint64_t rewards, std::uint64_t penalties) {
  __int128 r = rewards;
  __int128 p = penalties;
  return Fixed::from_ratio(r - p, r + p + 2);
}

Fixed update_k(Fixed reputation, Fixed k_prev, Fixed alpha, Fixed k_min) {
  require(reputation.raw() >= -kOne && reputation.raw() <= kOne,
          "reputation must lie in [-1, 1]");
  require(alpha.raw() > 0 && alpha.raw() <= kOne, "alpha must lie in (0, 1]");
  require(k_min.raw() > 0, "k_min must be positive");
  require(k_prev >= k_min, "k_prev must be at least k_min");

  // (1 - (R+1)/2) = (1 - R)/2, so with everything on the 10^-6 grid:
  //   k' = [(S - R)*alpha + 2*k_prev*(S - alpha)] / (2*S)
  __int128 num = static_cast<__int128>(kOne - reputation.raw()) * alpha.raw() +
                 2 * static_cast<__int128>(k_prev.raw()) * (kOne - alpha.raw());
  Fixed blended = Fixed::from_raw(div_round_half_up(num, 2 * kOne));
  return std::max(blended, k_min);
}

}  // namespace utm::economics
