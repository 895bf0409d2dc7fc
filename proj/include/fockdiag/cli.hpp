// Copyright 2026 The fockdiag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fockdiag/aspp_table.hpp"
#include "fockdiag/decoherence.hpp"
#include "fockdiag/diagnosis.hpp"
#include "fockdiag/error.hpp"
#include "fockdiag/experiment.hpp"
#include "fockdiag/io.hpp"
#include "fockdiag/oracle.hpp"
#include "fockdiag/probability.hpp"

namespace fockdiag::cli {

/// I/O failure (unreadable input, unwritable output).
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

/// Parsed command line.
struct RunConfig {
  std::string subcommand;
  std::string state = "2:1";
  double gamma_dist = 1.0;
  double gamma_phase = 1.0;
  double gamma_mix = 1.0;
  std::vector<std::string> aspp_entries;
  std::string eta = "0";
  int phases = 12;
  std::int64_t shots = 100000;
  std::uint64_t seed = 1;
  std::string format;
  std::string out;
  // diagnose
  std::optional<double> v21, v30, p_sum, p13, p22;
  std::string counts_path;
  double tolerance = 1e-9;
  double region_tolerance = 3.0;
  int bootstrap = 0;
  double resolution_sigma = 5.0;
  // oracle-check
  int max_total = 8;
  int oracle_phases = 8;
  // infer-aspp
  std::string curve_path;
  // region
  int grid = 11;
};

namespace detail {

using io::json;

/// Radians only: a trailing unit such as "deg" or a degree sign is rejected.
inline double parse_angle(const std::string& text) {
  if (text.find("deg") != std::string::npos || text.find("\xC2\xB0") != std::string::npos) {
    throw DomainError("angles are given in radians; degrees are not accepted ('" + text + "')");
  }
  return io::parse_double(text, "angle");
}

/// "m,k=value"
inline AsppKey parse_aspp(const std::string& text, double& value) {
  const auto eq = text.find('=');
  const auto comma = text.find(',');
  if (eq == std::string::npos || comma == std::string::npos || comma > eq) {
    throw DomainError("ASPP must be written m,k=value, got '" + text + "'");
  }
  const auto m = io::parse_int(std::string_view(text).substr(0, comma), "ASPP index m");
  const auto k = io::parse_int(std::string_view(text).substr(comma + 1, eq - comma - 1), "ASPP index k");
  value = io::parse_double(std::string_view(text).substr(eq + 1), "ASPP value");
  return {static_cast<int>(m), static_cast<int>(k)};
}

inline DecoherenceParams params_of(const RunConfig& cfg) {
  DecoherenceParams p{cfg.gamma_dist, cfg.gamma_phase, cfg.gamma_mix};
  p.validate();
  return p;
}

/// Table from explicit --aspp entries, or from the model parameters.
inline AsppTable table_of(const RunConfig& cfg, const InputState& state) {
  if (cfg.aspp_entries.empty()) return aspp_table_from_params(params_of(cfg), state);
  AsppTable table;
  for (const auto& entry : cfg.aspp_entries) {
    double value = 0.0;
    const auto key = parse_aspp(entry, value);
    table.set(key.m, key.k, value);
  }
  return table;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void emit(const RunConfig& cfg, const std::string& payload, std::ostream& out) {
  if (cfg.out.empty()) {
    out << payload;
    return;
  }
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) throw IoError("cannot write '" + cfg.out + "'");
  file << payload;
  if (!file) throw IoError("write to '" + cfg.out + "' failed");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string format_or(const RunConfig& cfg, const std::string& fallback) {
  const std::string f = cfg.format.empty() ? fallback : cfg.format;
  if (f != "json" && f != "csv") throw DomainError("format must be json or csv, got '" + f + "'");
  return f;
}

inline std::string cmd_prob(const RunConfig& cfg) {
  const auto state = InputState::parse(cfg.state);
  const auto dist = outcome_distribution(state, parse_angle(cfg.eta), table_of(cfg, state));
  if (format_or(cfg, "json") == "csv") {
    std::ostringstream os;
    io::write_curve_csv(os, SignalCurve{state, {dist}});
    return os.str();
  }
  auto j = io::envelope("prob");
  j["state"] = state.label();
  j["eta"] = dist.eta;
  j["probs"] = dist.probs;
  return dump(j);
}

inline SignalCurve curve_of(const RunConfig& cfg, const InputState& state) {
  if (cfg.phases < 1) throw DomainError("--phases must be >= 1");
  const auto etas = phase_grid(cfg.phases);
  return signal_curve(state, etas, table_of(cfg, state));
}

inline std::string cmd_curve(const RunConfig& cfg) {
  const auto state = InputState::parse(cfg.state);
  const auto curve = curve_of(cfg, state);
  if (format_or(cfg, "csv") == "csv") {
    std::ostringstream os;
    io::write_curve_csv(os, curve);
    return os.str();
  }
  auto j = io::envelope("curve");
  j["state"] = state.label();
  json rows = json::array();
  for (const auto& row : curve.rows) rows.push_back({{"eta", row.eta}, {"probs", row.probs}});
  j["rows"] = rows;
  return dump(j);
}

inline std::string cmd_observables(const RunConfig& cfg) {
  const auto state = InputState::parse(cfg.state);
  const auto table = table_of(cfg, state);
  auto j = io::envelope("observables");
  j["state"] = state.label();
  if (state == InputState::double_fock(2, 1)) {
    j["observables"] = io::to_json(observables_21(table));
  } else if (state == InputState::twin_fock(2)) {
    j["observables"] = io::to_json(observables_22(table));
  } else {
    throw DomainError("closed-form observables exist for |2:1> and |2,2>, got |" + state.label() + ">");
  }
  j["aspps"] = io::to_json(table);
  return dump(j);
}

inline std::string cmd_diagnose(const RunConfig& cfg) {
  auto j = io::envelope("diagnose");
  if (!cfg.counts_path.empty()) {
    const auto state = InputState::parse(cfg.state);
    const std::string text = read_file(cfg.counts_path);
    std::vector<CountRecord> records;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
      records = io::counts_from_json(json::parse(text), state);
    } else {
      std::istringstream is(text);
      records = io::read_counts_csv(is, state);
    }
    RunOptions options;
    options.resolution_sigma = cfg.resolution_sigma;
    if (cfg.bootstrap > 0) {
      options.errors = ErrorMethod::Bootstrap;
      options.bootstrap_resamples = cfg.bootstrap;
      options.bootstrap_seed = cfg.seed;
    }
    const auto run = diagnose_run(records, state, cfg.region_tolerance, options);
    j["state"] = state.label();
    j["diagnosis"] = io::to_json(run.diagnosis);
    j["std_errors"] = {{"gamma_dist", io::optional_number(run.sigma_dist)},
                       {"gamma_phase", io::optional_number(run.sigma_phase)},
                       {"gamma_mix", io::optional_number(run.sigma_mix)}};
    j["estimate"] = io::to_json(run.estimate);
    return dump(j);
  }
  if (cfg.v21 && cfg.v30 && cfg.p_sum) {
    const Observables21 obs{*cfg.v21, *cfg.v30, *cfg.p_sum};
    j["state"] = "2:1";
    j["observables"] = io::to_json(obs);
    j["diagnosis"] = io::to_json(invert_21(obs, cfg.tolerance));
    return dump(j);
  }
  if (cfg.p13 && cfg.p22) {
    const Observables22 obs{*cfg.p13, *cfg.p22};
    j["state"] = "2,2";
    j["observables"] = io::to_json(obs);
    j["diagnosis"] = io::to_json(invert_22(obs, cfg.tolerance));
    return dump(j);
  }
  throw DomainError("diagnose needs --counts FILE, all of --v21/--v30/--p-sum, or --p13/--p22");
}

inline std::string cmd_simulate(const RunConfig& cfg) {
  const auto state = InputState::parse(cfg.state);
  const auto records = sample_counts(curve_of(cfg, state), cfg.shots, cfg.seed);
  if (format_or(cfg, "csv") == "csv") {
    std::ostringstream os;
    io::write_counts_csv(os, records, state.total());
    return os.str();
  }
  auto j = io::envelope("simulate");
  j["state"] = state.label();
  j["seed"] = cfg.seed;
  j["records"] = io::to_json(records);
  return dump(j);
}

/// Every state with N+M <= max_total, twin-Fock included.
inline std::vector<InputState> states_up_to(int max_total) {
  std::vector<InputState> states;
  for (int total = 1; total <= max_total; ++total) {
    for (int m = 0; 2 * m < total; ++m) states.push_back(InputState::double_fock(total - m, m));
    if (total % 2 == 0) states.push_back(InputState::twin_fock(total / 2));
  }
  return states;
}

/// Max |closed form - brute force| over states, a gamma grid and a phase grid.
struct OracleReport {
  double max_deviation = 0.0;
  int states = 0;
  int comparisons = 0;
};

inline OracleReport oracle_check(int max_total, const std::vector<double>& gammas, int phase_count) {
  if (max_total < 1 || max_total > kOracleMaxTotal) {
    throw DomainError("--max-total must lie in 1.." + std::to_string(kOracleMaxTotal));
  }
  OracleReport report;
  const auto etas = phase_grid(phase_count);
  for (const auto& state : states_up_to(max_total)) {
    ++report.states;
    for (double gd : gammas) {
      for (double gp : gammas) {
        for (double gm : gammas) {
          const DecoherenceParams params{gd, gp, gm};
          const OracleEvaluator oracle(state, decohered_system(state, gd, params));
          const auto table = aspp_table_from_params(params, state);
          for (double eta : etas) {
            const auto brute = oracle.distribution(eta);
            const auto closed = outcome_distribution(state, eta, table);
            for (std::size_t s = 0; s < brute.probs.size(); ++s) {
              report.max_deviation =
                  std::max(report.max_deviation, std::abs(brute.probs[s] - closed.probs[s]));
              ++report.comparisons;
            }
          }
        }
      }
    }
  }
  return report;
}

inline std::string cmd_oracle_check(const RunConfig& cfg) {
  const std::vector<double> gammas{0.0, 0.3, 0.7, 1.0};
  const auto report = oracle_check(cfg.max_total, gammas, cfg.oracle_phases);
  auto j = io::envelope("oracle-check");
  j["max_total"] = cfg.max_total;
  j["gamma_grid"] = gammas;
  j["phases"] = cfg.oracle_phases;
  j["states"] = report.states;
  j["comparisons"] = report.comparisons;
  j["max_deviation"] = report.max_deviation;
  j["pass"] = report.max_deviation < 1e-10;
  return dump(j);
}

inline std::string cmd_infer_aspp(const RunConfig& cfg) {
  const auto state = InputState::parse(cfg.state);
  SignalCurve curve{state, {}};
  if (!cfg.curve_path.empty()) {
    std::istringstream is(read_file(cfg.curve_path));
    curve = io::read_curve_csv(is, state);
  } else {
    curve = curve_of(cfg, state);
  }
  const auto inferred = infer_aspps(curve);
  auto j = io::envelope("infer-aspp");
  j["state"] = state.label();
  json arr = json::array();
  for (std::size_t i = 0; i < inferred.unknowns.size(); ++i) {
    arr.push_back({{"m", inferred.unknowns[i].m},
                   {"k", inferred.unknowns[i].k},
                   {"value", inferred.raw_values[i]}});
  }
  j["aspps"] = arr;
  j["condition_number"] = inferred.condition_number;
  j["rank"] = inferred.rank;
  return dump(j);
}

inline std::string cmd_region(const RunConfig& cfg) {
  const auto state = InputState::parse(cfg.state);
  if (cfg.grid < 2) throw DomainError("--grid must be >= 2");
  std::vector<double> g;
  for (int i = 0; i < cfg.grid; ++i) g.push_back(static_cast<double>(i) / (cfg.grid - 1));
  const bool csv = format_or(cfg, "csv") == "csv";
  std::ostringstream os;
  json rows = json::array();
  if (state == InputState::twin_fock(2)) {
    if (csv) os << "gamma_dist,gamma_mix,p13,p22\n";
    for (double gd : g) {
      for (double gm : g) {
        const auto o = observables_22(DecoherenceParams{gd, 1.0, gm});
        if (csv) {
          os << io::format_double(gd) << ',' << io::format_double(gm) << ','
             << io::format_double(o.p13) << ',' << io::format_double(o.p22) << '\n';
        } else {
          rows.push_back({{"gamma_dist", gd}, {"gamma_mix", gm}, {"p13", o.p13}, {"p22", o.p22}});
        }
      }
    }
  } else if (state == InputState::double_fock(2, 1)) {
    if (csv) os << "gamma_dist,gamma_phase,gamma_mix,v21,v30,p_sum\n";
    for (double gd : g) {
      for (double gp : g) {
        for (double gm : g) {
          const auto o = observables_21(DecoherenceParams{gd, gp, gm});
          if (csv) {
            os << io::format_double(gd) << ',' << io::format_double(gp) << ','
               << io::format_double(gm) << ',' << io::format_double(o.v21) << ','
               << io::format_double(o.v30) << ',' << io::format_double(o.p_sum) << '\n';
          } else {
            rows.push_back({{"gamma_dist", gd}, {"gamma_phase", gp}, {"gamma_mix", gm},
                            {"v21", o.v21}, {"v30", o.v30}, {"p_sum", o.p_sum}});
          }
        }
      }
    }
  } else {
    throw DomainError("region meshes exist for |2:1> and |2,2>, got |" + state.label() + ">");
  }
  if (csv) return os.str();
  auto j = io::envelope("region");
  j["state"] = state.label();
  j["rows"] = rows;
  return dump(j);
}

inline void error_json(std::ostream& err, const std::string& code, const std::string& message) {
  json j;
  j["schema"] = io::kSchema;
  j["error"] = {{"code", code}, {"message", message}};
  err << j.dump() << '\n';
}

}  // namespace detail

inline constexpr int kExitUsage = 2;
inline constexpr int kExitContract = 3;
inline constexpr int kExitIo = 4;

/// Runs one command line (without the program name). Results go to `out` or
/// the --out file; failures print one JSON object on `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Double-Fock interferometry: outcome statistics and decoherence diagnosis", "fockdiag"};
  app.require_subcommand(1);

  auto add_state = [&](CLI::App* sub) {
    sub->add_option("--state", cfg.state, "Input state: N:M (double-Fock) or N,N (twin-Fock)")
        ->capture_default_str();
  };
  auto add_model = [&](CLI::App* sub) {
    auto* gd = sub->add_option("--gamma-dist", cfg.gamma_dist, "Distinguishability survival");
    auto* gp = sub->add_option("--gamma-phase", cfg.gamma_phase, "Dephasing survival");
    auto* gm = sub->add_option("--gamma-mix", cfg.gamma_mix, "Mixing survival");
    auto* as = sub->add_option("--aspp", cfg.aspp_entries, "Explicit ASPP m,k=value (repeatable)")
                   ->allow_extra_args(false);
    as->excludes(gd)->excludes(gp)->excludes(gm);
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Output format: json or csv");
    sub->add_option("--out", cfg.out, "Write output to this file instead of stdout");
  };
  auto add_phases = [&](CLI::App* sub) {
    sub->add_option("--phases", cfg.phases, "Number of equally spaced phases in [0, 2pi)")
        ->capture_default_str();
  };

  auto* prob = app.add_subcommand("prob", "Outcome distribution at one phase");
  add_state(prob);
  add_model(prob);
  add_output(prob);
  prob->add_option("--eta", cfg.eta, "Phase in radians")->capture_default_str();

  auto* curve = app.add_subcommand("curve", "Outcome distributions over a phase grid");
  add_state(curve);
  add_model(curve);
  add_output(curve);
  add_phases(curve);

  auto* observables = app.add_subcommand("observables", "Closed-form |2:1> or |2,2> observables");
  add_state(observables);
  add_model(observables);
  add_output(observables);

  auto* diagnose = app.add_subcommand("diagnose", "Recover decoherence parameters");
  add_state(diagnose);
  add_output(diagnose);
  diagnose->add_option("--v21", cfg.v21, "Signed (2,1) visibility");
  diagnose->add_option("--v30", cfg.v30, "(3,0) visibility");
  diagnose->add_option("--p-sum", cfg.p_sum, "P(3,0) + P(0,3)");
  diagnose->add_option("--p13", cfg.p13, "|2,2> probability of (1,3)");
  diagnose->add_option("--p22", cfg.p22, "|2,2> probability of (2,2)");
  diagnose->add_option("--counts", cfg.counts_path, "Counts file (CSV or JSON) from simulate");
  diagnose->add_option("--tolerance", cfg.tolerance, "Physical-region tolerance for exact inputs")
      ->capture_default_str();
  diagnose->add_option("--region-tolerance", cfg.region_tolerance,
                       "Physical-region tolerance for counts, in standard errors")
      ->capture_default_str();
  diagnose->add_option("--resolution-sigma", cfg.resolution_sigma,
                       "Significance at which ASPPs must exclude zero for counts")
      ->capture_default_str();
  diagnose->add_option("--bootstrap", cfg.bootstrap, "Bootstrap resamples (0: Jacobian errors)");
  diagnose->add_option("--seed", cfg.seed, "Bootstrap seed");

  auto* simulate = app.add_subcommand("simulate", "Seeded finite-shot counts");
  add_state(simulate);
  add_model(simulate);
  add_output(simulate);
  add_phases(simulate);
  simulate->add_option("--shots", cfg.shots, "Shots per phase")->capture_default_str();
  simulate->add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle-check", "Compare closed form against brute force");
  add_output(oracle);
  oracle->add_option("--max-total", cfg.max_total, "Largest N+M checked")->capture_default_str();
  oracle->add_option("--phases", cfg.oracle_phases, "Phases per configuration")->capture_default_str();

  auto* infer = app.add_subcommand("infer-aspp", "Infer all ASPPs from signal curves");
  add_state(infer);
  add_model(infer);
  add_output(infer);
  add_phases(infer);
  infer->add_option("--curve", cfg.curve_path, "Curve CSV (eta,p_0,...); default: simulate exactly");

  auto* region = app.add_subcommand("region", "Physical-region mesh of the |2,2> plane or |2:1> wedge");
  add_state(region);
  add_output(region);
  region->add_option("--grid", cfg.grid, "Points per parameter axis")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    detail::error_json(err, "usage_error", e.what());
    return kExitUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    std::string payload;
    if (cfg.subcommand == "prob") payload = detail::cmd_prob(cfg);
    else if (cfg.subcommand == "curve") payload = detail::cmd_curve(cfg);
    else if (cfg.subcommand == "observables") payload = detail::cmd_observables(cfg);
    else if (cfg.subcommand == "diagnose") payload = detail::cmd_diagnose(cfg);
    else if (cfg.subcommand == "simulate") payload = detail::cmd_simulate(cfg);
    else if (cfg.subcommand == "oracle-check") payload = detail::cmd_oracle_check(cfg);
    else if (cfg.subcommand == "infer-aspp") payload = detail::cmd_infer_aspp(cfg);
    else payload = detail::cmd_region(cfg);
    detail::emit(cfg, payload, out);
  } catch (const IoError& e) {
    detail::error_json(err, e.code(), e.what());
    return kExitIo;
  } catch (const Error& e) {
    detail::error_json(err, e.code(), e.what());
    return kExitContract;
  } catch (const nlohmann::json::exception& e) {
    detail::error_json(err, "parse_error", e.what());
    return kExitContract;
  }
  return 0;
}

}  // namespace fockdiag::cli
