#include "utm/accounts.hpp"

#include "utm/sha256.hpp"

namespace utm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Operator: return "operator";
    case Role::Reporter: return "reporter";
    case Role::Uss: return "uss";
    case Role::Authority: return "authority";
  }
  return "operator";
}

Role parse_role(std::string_view text) {
  if (text == "operator") return Role::Operator;
  if (text == "reporter") return Role::Reporter;
  if (text == "uss") return Role::Uss;
  if (text == "authority") return Role::Authority;
  throw Error(ErrorCode::InvalidArgument, "unknown role '" + std::string(text) + "'");
}

AccountId derive_account_id(std::uint64_t index) {
  Digest d = sha256("utm-account:" + std::to_string(index));
  AccountId id;
  std::copy_n(d.bytes.begin(), id.bytes.size(), id.bytes.begin());
  return id;
}

AccountId Accounts::create(Role role, Amount initial_balance) {
  if (initial_balance < 0) {
    throw Error(ErrorCode::InvalidArgument, "initial balance must be non-negative");
  }
  AccountId id = derive_account_id(next_index_++);
  accounts_.emplace(id, Account{id, initial_balance, role});
  return id;
}

void Accounts::transfer(const AccountId& from, const AccountId& to, Amount amount) {
  if (amount < 0) throw Revert("negative-amount");
  auto src = accounts_.find(from);
  auto dst = accounts_.find(to);
  if (src == accounts_.end() || dst == accounts_.end()) throw Revert("unknown-account");
  if (amount == 0) return;
  if (src->second.balance < amount) throw Revert("insufficient-balance");
  src->second.balance -= amount;
  dst->second.balance += amount;
}

const Account& Accounts::get(const AccountId& id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown account " + id.hex());
  }
  return it->second;
}

Amount Accounts::total_supply() const {
  Amount total = 0;
  for (const auto& [id, acct] : accounts_) total += acct.balance;
  return total;
}

void Accounts::insert_raw(const Account& account) {
  accounts_[account.id] = account;
}

}  // namespace utm
