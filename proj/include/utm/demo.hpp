#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "utm/ledger.hpp"

namespace utm::demo {

/// register, subscribe, quote, plan, report, complete, full
const std::vector<std::string>& names();

/// Runs one canned walkthrough on a fresh ledger and prints the record of
/// each featured call. Throws Error(UnknownDemo).
std::vector<Transaction> run(std::string_view name, std::ostream& out);

/// Transaction record as a block explorer would show it.
std::string format_record(const Transaction& tx, const Ledger& ledger);

}  // namespace utm::demo
