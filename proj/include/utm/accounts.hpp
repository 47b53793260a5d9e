#pragma once

#include <map>
#include <string_view>

#include "utm/common.hpp"

namespace utm {

enum class Role { Operator, Reporter, Uss, Authority };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct Account {
  AccountId id;
  Amount balance = 0;
  Role role = Role::Operator;

  bool operator==(const Account&) const = default;
};

/// Balance book. Balances never go negative; transfers conserve supply.
class Accounts {
 public:
  /// Ids are derived from the creation index, so a replay from genesis
  /// reproduces them exactly.
  AccountId create(Role role, Amount initial_balance = 0);

  /// Throws Revert("insufficient-balance") or Revert("unknown-account").
  void transfer(const AccountId& from, const AccountId& to, Amount amount);

  bool contains(const AccountId& id) const { return accounts_.contains(id); }
  const Account& get(const AccountId& id) const;
  Amount balance(const AccountId& id) const { return get(id).balance; }
  Amount total_supply() const;
  std::size_t size() const { return accounts_.size(); }

  const std::map<AccountId, Account>& all() const { return accounts_; }

  /// Restores an account verbatim (snapshot loading only).
  void insert_raw(const Account& account);
  void set_next_index(std::uint64_t n) { next_index_ = n; }
  std::uint64_t next_index() const { return next_index_; }

  bool operator==(const Accounts&) const = default;

 private:
  std::map<AccountId, Account> accounts_;
  std::uint64_t next_index_ = 0;
};

AccountId derive_account_id(std::uint64_t index);

}  // namespace utm
