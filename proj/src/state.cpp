#include "utm/state.hpp"

#include <algorithm>
#include <map>

namespace utm {

namespace {

template <typename K, typename V, typename Same>
std::uint64_t map_diff(const std::map<K, V>& a, const std::map<K, V>& b, Same same) {
  std::uint64_t n = 0;
  for (const auto& [key, value] : b) {
    auto it = a.find(key);
    if (it == a.end() || !same(it->second, value)) ++n;
  }
  for (const auto& [key, value] : a) {
    if (!b.contains(key)) ++n;
  }
  return n;
}

}  // namespace

std::uint64_t count_state_writes(const WorldState& before, const WorldState& after) {
  std::uint64_t n = map_diff(before.accounts.all(), after.accounts.all(),
                             [](const Account& x, const Account& y) { return x == y; });

  const auto& ra = before.registry.records();
  const auto& rb = after.registry.records();
  for (std::size_t i = 0; i < std::max(ra.size(), rb.size()); ++i) {
    if (i >= ra.size() || i >= rb.size() || !(ra[i] == rb[i])) ++n;
  }

  auto eq = [](const auto& x, const auto& y) { return x == y; };
  n += map_diff(before.uss.subscriptions, after.uss.subscriptions, eq);
  n += map_diff(before.uss.plans, after.uss.plans, eq);
  n += map_diff(before.uss.reputations, after.uss.reputations, eq);
  if (before.uss.nonce_counter != after.uss.nonce_counter) ++n;
  return n;
}

}  // namespace utm
