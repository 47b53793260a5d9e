#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "utm/chain.hpp"
#include "utm/state.hpp"
#include "utm/uss.hpp"

namespace utm {

// Contract operation names as they appear in transaction records.
namespace ops {
inline constexpr std::string_view kCreateAccount = "createAccount";
inline constexpr std::string_view kRegisterDrone = "registerDrone";
inline constexpr std::string_view kSubscribe = "subscribeToUSS";
inline constexpr std::string_view kRequestQuote = "requestMissionQuote";
inline constexpr std::string_view kRequestPlan = "requestMissionPlan";
inline constexpr std::string_view kReportDrone = "reportDrone";
inline constexpr std::string_view kMissionCompleted = "missionCompleted";
}  // namespace ops

inline constexpr std::string_view kInsufficientBalance = "insufficient-balance";
inline constexpr std::string_view kUnknownOperation = "unknown-operation";
inline constexpr std::string_view kUnknownAccount = "unknown-account";
inline constexpr std::string_view kNonPayable = "non-payable";
inline constexpr std::string_view kBadArguments = "bad-arguments";

struct LedgerConfig {
  uss::UssConfig uss;
  Amount treasury_funding = 0;
  bool allow_empty_blocks = false;

  bool operator==(const LedgerConfig&) const = default;
};

/// Single-writer permissioned ledger: applies caller-attributed calls to
/// the authority and USS contracts one at a time, rolls back reverts, and
/// batches every transaction into a SHA-256 hash chain.
///
/// Not internally synchronized. Hand it between threads freely but keep a
/// single writer.
class Ledger {
 public:
  explicit Ledger(LedgerConfig config);

  /// Logged as a system transaction from the zero address.
  AccountId create_account(Role role, Amount initial_balance = 0);

  /// The simulation clock. Time never moves backwards.
  void set_time(Timestamp now);
  Timestamp now() const { return now_; }

  /// Applies one call. Reverts leave state untouched; the transaction is
  /// logged either way and returned.
  Transaction submit(const AccountId& caller, std::string_view op,
                    json args = json::object(), Amount value = 0);

  /// Batches pending transactions. Returns nullopt when nothing is pending
  /// and empty blocks are not allowed.
  std::optional<Block> seal_block();

  bool verify_chain() const { return utm::verify_chain(blocks_); }
  ChainCheck check_chain() const { return utm::check_chain(blocks_); }
  /// Hash of the last sealed block, zero before genesis.
  Digest head_hash() const;

  const LedgerConfig& config() const { return config_; }
  const WorldState& state() const { return state_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Transaction>& pending() const { return pending_; }
  std::uint64_t next_tx_id() const { return next_tx_id_; }

  const AccountId& authority_contract() const { return authority_contract_; }
  const AccountId& uss_contract() const { return uss_contract_; }
  const AccountId& uss_treasury() const { return uss_treasury_; }

  /// Rebuilds a ledger from a snapshot's parts (persistence only).
  static Ledger from_parts(LedgerConfig config, WorldState state, std::vector<Block> blocks,
                           std::vector<Transaction> pending, std::uint64_t next_tx_id,
                           Timestamp now);

  /// Test hook: direct mutable access to sealed blocks.
  std::vector<Block>& mutable_blocks_for_testing() { return blocks_; }

 private:
  struct Restore {};
  Ledger(Restore, LedgerConfig config);

  json execute(WorldState& state, const uss::CallContext& ctx, std::string_view op,
               const json& args) const;
  json execute_view(const WorldState& state, const uss::CallContext& ctx,
                    std::string_view op, const json& args) const;
  void log(Transaction tx);

  LedgerConfig config_;
  WorldState state_;
  std::vector<Block> blocks_;
  std::vector<Transaction> pending_;
  std::uint64_t next_tx_id_ = 0;
  Timestamp now_ = 0;
  AccountId authority_contract_;
  AccountId uss_contract_;
  AccountId uss_treasury_;
};

/// Re-executes every logged transaction from genesis with the same block
/// boundaries. Throws Error(CorruptPayload) if a system transaction does
/// not reproduce.
Ledger replay(const LedgerConfig& config, std::span<const Block> blocks);

}  // namespace utm
