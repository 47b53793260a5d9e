#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "utm/demo.hpp"
#include "utm/economics.hpp"
#include "utm/persistence.hpp"
#include "utm/sim.hpp"

namespace fs = std::filesystem;
using namespace utm;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitBrokenChain = 4;

struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitParse, "cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{kExitRuntime, "cannot write " + path.string()};
}

std::string short_id(const std::string& hex) { return hex.substr(0, 10); }

void print_summary(const json& metrics, std::ostream& out) {
  out << "missions settled: " << metrics.at("missions").size() << "\n\n";
  out << std::left << std::setw(8) << "drone" << std::setw(14) << "owner" << std::setw(9) << "payout"
      << std::setw(4) << "r" << std::setw(4) << "p" << std::setw(12) << "R" << "k\n";
  for (const auto& m : metrics.at("missions")) {
    out << std::setw(8) << m.at("droneId").dump() << std::setw(14) << short_id(m.at("owner").get<std::string>())
        << std::setw(9) << m.at("payout").get<std::string>() << std::setw(4) << m.at("rewards").dump()
        << std::setw(4) << m.at("penalties").dump() << std::setw(12) << m.at("reputation").get<std::string>()
        << m.at("k").get<std::string>() << '\n';
  }
  out << "\noperator      missions  total payout  R          k\n";
  for (const auto& [id, o] : metrics.at("operators").items()) {
    out << std::setw(14) << short_id(id) << std::setw(10) << o.at("missions").dump() << std::setw(14)
        << o.at("totalPayout").get<std::string>() << std::setw(11) << o.at("reputation").get<std::string>()
        << o.at("k").get<std::string>() << '\n';
  }
  if (!metrics.at("revertReasons").empty()) {
    out << "\nreverts\n";
    for (const auto& [reason, n] : metrics.at("revertReasons").items()) out << "  " << n << "  " << reason << '\n';
  }
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            bool quiet) {
  sim::Scenario scenario;
  try {
    scenario = sim::parse_scenario(read_file(scenario_path));
  } catch (const Error& e) {
    throw Failure{kExitParse, std::string(to_string(e.code())) + ": " + e.what()};
  }
  if (seed) scenario.seed = *seed;

  try {
    sim::RunResult r = sim::run(scenario);
    if (!r.ledger.verify_chain()) throw Failure{kExitRuntime, "sealed chain does not verify"};
    fs::create_directories(out_dir);
    fs::path base = fs::path(out_dir) / scenario.name;
    write_file(base.string() + ".metrics.json", r.metrics.dump(2) + "\n");
    write_file(base.string() + ".chain.jsonl", persist::write_chain_log(r.ledger.blocks()));
    write_file(base.string() + ".trace.csv", sim::trace_csv(r.trace));
    write_file(base.string() + ".events.jsonl", persist::write_event_log(r.ledger.blocks()));
    write_file(base.string() + ".state.json", persist::snapshot(r.ledger, persist::Visibility::Shareable));
    if (!quiet) {
      print_summary(r.metrics, std::cout);
      std::cout << "\nhead " << r.ledger.head_hash().hex() << "\nwrote " << base.string() << ".*\n";
    }
    return 0;
  } catch (const Failure&) {
    throw;
  } catch (const std::exception& e) {
    throw Failure{kExitRuntime, std::string("scenario failed: ") + e.what()};
  }
}

int cmd_verify(const std::string& chain_path, bool quiet) {
  auto check = persist::verify_chain_log(read_file(chain_path));
  if (check.parse_error) throw Failure{kExitParse, "parse error: " + check.reason};
  if (!check.ok) {
    throw Failure{kExitBrokenChain,
                  "broken chain at block " + std::to_string(*check.first_bad_block) + ": " + check.reason};
  }
  if (!quiet) std::cout << "ok: " << check.block_count << " blocks verified\n";
  return 0;
}

int cmd_inspect(const std::string& state_path, const std::string& query) {
  json state;
  try {
    state = persist::parse_json(read_file(state_path), ErrorCode::ParseError);
    persist::check_schema(state.at("schema"), persist::kStateSchema);
  } catch (const std::exception& e) {
    throw Failure{kExitParse, e.what()};
  }
  if (query == "summary") {
    Amount supply = 0;
    for (const auto& a : state.at("accounts")) supply += persist::amount_from(a.at("balance"));
    std::cout << "visibility      " << state.at("visibility").get<std::string>() << '\n'
              << "accounts        " << state.at("accounts").size() << '\n'
              << "total supply    " << supply << '\n'
              << "drones          " << state.at("registry").size() << '\n'
              << "subscriptions   " << state.at("uss").at("subscriptions").size() << '\n'
              << "active plans    " << state.at("uss").at("plans").size() << '\n'
              << "blocks          " << state.at("ledger").at("chain").at("height") << '\n'
              << "head            " << state.at("ledger").at("chain").at("headHash").get<std::string>() << '\n';
    return 0;
  }
  static const std::map<std::string, std::vector<std::string>> paths{
      {"accounts", {"accounts"}},       {"drones", {"registry"}},
      {"plans", {"uss", "plans"}},      {"reputations", {"uss", "reputations"}},
      {"subscriptions", {"uss", "subscriptions"}}, {"config", {"config"}}};
  auto it = paths.find(query);
  if (it == paths.end()) {
    throw Failure{kExitParse,
                  "unknown query '" + query + "' (summary, accounts, drones, plans, reputations, subscriptions, config)"};
  }
  const json* node = &state;
  for (const auto& key : it->second) node = &node->at(key);
  std::cout << node->dump(2) << '\n';
  return 0;
}

int cmd_plot_data(const std::string& out_dir, bool quiet) {
  fs::create_directories(out_dir);
  std::ostringstream surface;
  surface << "r,p,R\n";
  for (std::uint64_t r = 0; r <= 50; ++r) {
    for (std::uint64_t p = 0; p <= 50; ++p) {
      surface << r << ',' << p << ',' << economics::reputation(r, p).to_string() << '\n';
    }
  }
  write_file(fs::path(out_dir) / "reputation_surface.csv", surface.str());

  economics::FeeParams fp;
  std::ostringstream fees;
  fees << "activeMissions,k,surcharge,fee\n";
  for (const char* k : {"1", "0.75", "0.5", "0.05"}) {
    for (std::int64_t n = 0; n <= 50; ++n) {
      Amount a = economics::congestion_surcharge(n, fp.surcharge_per_mission);
      fees << n << ',' << Fixed::parse(k).to_string() << ',' << a << ','
           << economics::dynamic_fee(Fixed::parse(k), fp.base_cost, fp.rcd, a) << '\n';
    }
  }
  write_file(fs::path(out_dir) / "fee_congestion.csv", fees.str());
  if (!quiet) std::cout << "wrote " << out_dir << "/reputation_surface.csv and fee_congestion.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV traffic management ledger: run scenarios, verify chains, inspect state"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress normal output");

  std::string scenario_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario and write metrics, chain log, trace and events");
  run->add_option("--scenario,scenario", scenario_path, "Scenario file (.scenario.json)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_flag("-q,--quiet", quiet, "Suppress the summary table");

  std::string chain_path;
  auto* verify = app.add_subcommand("verify", "Verify a chain log (.chain.jsonl)");
  verify->add_option("--chain,chain", chain_path, "Chain log")->required();
  verify->add_flag("-q,--quiet", quiet);

  std::string state_path, query = "summary";
  auto* inspect = app.add_subcommand("inspect", "Query a state snapshot (.state.json)");
  inspect->add_option("--state,state", state_path, "State snapshot")->required();
  inspect->add_option("query", query, "summary, accounts, drones, plans, reputations, subscriptions, config");

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "Print a canned protocol walkthrough");
  demo->add_option("name", demo_name, "register, subscribe, quote, plan, report, complete, full")->required();

  std::string plot_dir = "plot-data";
  auto* plot = app.add_subcommand("plot-data", "Write CSVs for the reputation surface and fee curves");
  plot->add_option("--out", plot_dir, "Output directory");
  plot->add_flag("-q,--quiet", quiet);

  int drones = 100, reporters = 200;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a random airspace scenario");
  gen->add_option("--drones", drones)->check(CLI::PositiveNumber);
  gen->add_option("--reporters", reporters)->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out, "Scenario file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*run) return cmd_run(scenario_path, out_dir, seed, quiet);
    if (*verify) return cmd_verify(chain_path, quiet);
    if (*inspect) return cmd_inspect(state_path, query);
    if (*plot) return cmd_plot_data(plot_dir, quiet);
    if (*gen) {
      write_file(gen_out, sim::to_json(sim::generate_scenario(gen_seed, drones, reporters)).dump(2) + "\n");
      return 0;
    }
    if (*demo) {
      try {
        utm::demo::run(demo_name, std::cout);
      } catch (const Error& e) {
        throw Failure{kExitParse, std::string(to_string(e.code())) + ": " + e.what()};
      }
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
