#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "utm/demo.hpp"
#include "utm/economics.hpp"
#include "utm/persistence.hpp"
#include "utm/rid.hpp"
#include "utm/sim.hpp"

namespace py = pybind11;
using namespace utm;

namespace {

LedgerConfig config_from(const std::string& text) {
  LedgerConfig c;
  persist::merge_from_json(c, persist::parse_json(text.empty() ? "{}" : text, ErrorCode::ParseError));
  return c;
}

std::string chain_log(const Ledger& l) { return persist::write_chain_log(l.blocks()); }

py::tuple run_scenario(const std::string& text, std::optional<std::uint64_t> seed) {
  sim::Scenario s = sim::parse_scenario(text);
  if (seed) s.seed = *seed;
  sim::RunResult r = sim::run(s);
  return py::make_tuple(r.metrics.dump(2) + "\n", persist::write_chain_log(r.ledger.blocks()),
                        sim::trace_csv(r.trace));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "UAV traffic management ledger core";

  static py::exception<Error> utm_error(m, "UtmError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(utm_error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Ledger>(m, "Ledger")
      .def(py::init([](const std::string& config) { return Ledger(config_from(config)); }),
           py::arg("config_json") = "{}")
      .def("create_account",
           [](Ledger& l, const std::string& role, Amount balance) {
             return l.create_account(parse_role(role), balance).hex();
           },
           py::arg("role"), py::arg("balance") = 0)
      .def("submit",
           [](Ledger& l, const std::string& caller, const std::string& op, const std::string& args, Amount value) {
             auto tx = l.submit(AccountId::from_hex(caller), op, persist::parse_json(args, ErrorCode::ParseError),
                                value);
             return to_json(tx).dump();
           },
           py::arg("caller"), py::arg("op"), py::arg("args_json") = "{}", py::arg("value") = 0)
      .def("set_time", &Ledger::set_time)
      .def_property_readonly("now", &Ledger::now)
      .def("seal_block",
           [](Ledger& l) -> std::optional<std::string> {
             auto b = l.seal_block();
             if (!b) return std::nullopt;
             return to_json(*b).dump();
           })
      .def("verify_chain", &Ledger::verify_chain)
      .def("head_hash", [](const Ledger& l) { return l.head_hash().hex(); })
      .def("balance", [](const Ledger& l, const std::string& id) {
        return l.state().accounts.balance(AccountId::from_hex(id));
      })
      .def("total_supply", [](const Ledger& l) { return l.state().accounts.total_supply(); })
      .def_property_readonly("authority_contract", [](const Ledger& l) { return l.authority_contract().hex(); })
      .def_property_readonly("uss_contract", [](const Ledger& l) { return l.uss_contract().hex(); })
      .def_property_readonly("uss_treasury", [](const Ledger& l) { return l.uss_treasury().hex(); })
      .def("snapshot",
           [](const Ledger& l, bool shareable) {
             return persist::snapshot(l, shareable ? persist::Visibility::Shareable : persist::Visibility::Private);
           },
           py::arg("shareable") = false)
      .def_static("restore", [](const std::string& text) { return persist::restore(text); })
      .def("chain_log", &chain_log)
      .def("event_log", [](const Ledger& l) { return persist::write_event_log(l.blocks()); })
      .def("active_plans", [](const Ledger& l) { return uss::export_active_plans(l.state().uss).dump(); });

  m.def("verify_chain_log", [](const std::string& text) {
    auto c = persist::verify_chain_log(text);
    py::dict d;
    d["ok"] = c.ok;
    d["parse_error"] = c.parse_error;
    d["first_bad_block"] = c.first_bad_block ? py::cast(*c.first_bad_block) : py::none();
    d["blocks"] = c.block_count;
    d["reason"] = c.reason;
    return d;
  });
  m.def("run_scenario", &run_scenario, py::arg("scenario_json"), py::arg("seed") = py::none(),
        "Returns (metrics JSON, chain log, trace CSV).");
  m.def("metrics_from_chain_log", [](const std::string& text) {
    return sim::emit_metrics(persist::read_chain_log(text)).dump(2) + "\n";
  });

  m.def("dynamic_fee", [](const std::string& k, Amount d, Amount c, Amount a) {
    return economics::dynamic_fee(Fixed::parse(k), d, c, a);
  });
  m.def("congestion_surcharge", &economics::congestion_surcharge);
  m.def("reputation", [](std::uint64_t r, std::uint64_t p) { return economics::reputation(r, p).to_string(); });
  m.def("update_k", [](const std::string& R, const std::string& k_prev, const std::string& alpha,
                       const std::string& k_min) {
    return economics::update_k(Fixed::parse(R), Fixed::parse(k_prev), Fixed::parse(alpha), Fixed::parse(k_min))
        .to_string();
  });

  m.def("compute_rid_vc", [](const std::string& nonce, const std::string& owner, const std::string& source,
                             const std::string& destination, const std::string& date, const std::string& time) {
    return rid::compute_rid_vc(Nonce::from_hex(nonce), AccountId::from_hex(owner), parse_dms_point(source),
                               parse_dms_point(destination), date, time)
        .hex();
  });
  m.def("decode_rid", [](const std::string& hex) {
    auto msg = rid::decode_hex(hex);
    py::dict d;
    d["timestamp"] = msg.faa.timestamp;
    d["drone_location"] = format_dms_point(msg.faa.drone_location);
    d["control_station"] = format_dms_point(msg.faa.control_station);
    d["altitude_cm"] = msg.faa.altitude_cm;
    d["velocity_cms"] = msg.faa.velocity_cms;
    d["rid_vc"] = msg.rid_vc.hex();
    return d;
  });
  m.def("encode_rid", [](Timestamp ts, const std::string& drone, const std::string& station, std::int64_t alt,
                         std::int64_t vel, const std::string& vc) {
    rid::RidMessage msg{{ts, parse_dms_point(drone), parse_dms_point(station), alt, vel}, Digest::from_hex(vc)};
    return rid::encode_hex(msg);
  });

  m.def("demo", [](const std::string& name) {
    std::ostringstream out;
    demo::run(name, out);
    return out.str();
  });
}
