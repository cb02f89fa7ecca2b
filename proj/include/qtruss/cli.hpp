#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qtruss/benchmark_models.hpp"
#include "qtruss/model_io.hpp"
#include "qtruss/optimizer.hpp"
#include "qtruss/remote_sampler.hpp"

namespace qtruss {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;      ///< file/parse/config errors
inline constexpr int kExitNumerical = 3;  ///< solver failures
inline constexpr int kExitRemote = 4;     ///< remote sampler failures

namespace cli_detail {

struct CommonOptions {
  std::string model_path;
  std::string config_path;
  std::string sampler;
  std::string endpoint;
  std::string out_dir = ".";
  std::string case_id;
  std::int64_t seed = -1;
};

inline void add_common(CLI::App* cmd, CommonOptions& opts, bool with_model) {
  if (with_model) cmd->add_option("--model", opts.model_path, "Model JSON file");
  cmd->add_option("--config", opts.config_path, "Run configuration JSON file");
  cmd->add_option("--sampler", opts.sampler, "Sampler backend: exhaustive, sa or remote");
  cmd->add_option("--endpoint", opts.endpoint, "Remote sampler endpoint URL");
  cmd->add_option("--seed", opts.seed, "Master random seed");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--case", opts.case_id, "Bundled benchmark id: case1, case2, case3, case3d");
}

/// Flags win over the config file, the config file wins over the environment.
inline RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
  if (cfg.endpoint.empty()) {
    if (const char* env = std::getenv("QTRUSS_ENDPOINT")) cfg.endpoint = env;
  }
  if (!opts.sampler.empty()) cfg.sampler = opts.sampler;
  if (!opts.endpoint.empty()) cfg.endpoint = opts.endpoint;
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  return cfg;
}

struct ResolvedModel {
  TrussModel model;
  double default_alpha = 0.35;
  std::string case_id;
};

inline ResolvedModel resolve_model(const CommonOptions& opts) {
  if (!opts.model_path.empty()) {
    ResolvedModel rm{load_model(opts.model_path), 0.35, opts.case_id};
    if (!opts.case_id.empty()) rm.default_alpha = make_benchmark(opts.case_id).initial_alpha;
    return rm;
  }
  if (!opts.case_id.empty()) {
    BenchmarkCase bench = make_benchmark(opts.case_id);
    return {std::move(bench.model), bench.initial_alpha, opts.case_id};
  }
  throw ConfigError("no model given: pass --model FILE or --case ID");
}

inline Eigen::VectorXd resolve_initial_alpha(const RunConfig& cfg, const ResolvedModel& rm) {
  const Eigen::Index n = rm.model.num_bars();
  if (cfg.initial_alpha.empty()) return Eigen::VectorXd::Constant(n, rm.default_alpha);
  if (cfg.initial_alpha.size() == 1) return Eigen::VectorXd::Constant(n, cfg.initial_alpha[0]);
  if (static_cast<Eigen::Index>(cfg.initial_alpha.size()) != n) {
    throw ConfigError("initial_alpha has " + std::to_string(cfg.initial_alpha.size()) +
                      " entries, model has " + std::to_string(n) + " bars");
  }
  return Eigen::Map<const Eigen::VectorXd>(cfg.initial_alpha.data(), n);
}

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ConfigError("cannot write " + (dir / name).string());
  return out;
}

inline void write_json(const std::filesystem::path& dir, const std::string& name,
                       const nlohmann::json& doc) {
  auto out = open_output(dir, name);
  out << doc.dump(2) << "\n";
}

inline nlohmann::json seeds_json(const RunConfig& cfg, const std::vector<std::uint64_t>& derived) {
  return nlohmann::json{{"master", cfg.seed}, {"derived", derived}};
}

inline int run_equilibrium(const CommonOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  const ResolvedModel rm = resolve_model(opts);
  const Eigen::VectorXd alpha = resolve_initial_alpha(cfg, rm);
  const Sampler sampler = make_sampler(cfg.sampler, cfg.endpoint);
  const SamplerConfig sampler_cfg = to_sampler_config(cfg);

  const DofMap dofs(rm.model);
  const UnitStiffnessSet units = assemble_unit_stiffness(rm.model, dofs);
  const Eigen::VectorXd f = dofs.reduce(rm.model.loads());

  const SpConfig sp = detail::to_sp_config(cfg.equilibrium);
  EquilibriumSolution solution =
      solve_equilibrium(units, alpha, f, sp, sampler, sampler_cfg,
                        Eigen::VectorXd::Zero(dofs.n_free()), cfg.equilibrium_residual_tol, 4);

  const Eigen::VectorXd u_direct = direct_solve(units, alpha, f);
  const double psi_exact = potential_energy(units, alpha, u_direct, f);
  const double psi_final = potential_energy(units, alpha, solution.u, f);
  const double denom = psi_exact != 0.0 ? std::abs(psi_exact) : 1.0;

  auto csv = open_output(opts.out_dir, "equilibrium_trace.csv");
  csv << "iter,psi,rel_error_vs_direct,epsilon,accepted\n";
  for (const SpIteration& it : solution.iterations) {
    csv << it.index << ',' << detail::format_double(it.f) << ','
        << detail::format_double(std::abs(it.f - psi_exact) / denom) << ','
        << detail::format_double(it.epsilon_inf) << ',' << (it.accepted ? 1 : 0) << '\n';
  }

  const Eigen::VectorXd u_full = dofs.expand(solution.u);
  nlohmann::json displacements{
      {"psi", psi_final},
      {"psi_direct", psi_exact},
      {"relative_error", std::abs(psi_final - psi_exact) / denom},
      {"residual", solution.residual},
      {"stop_reason", to_string(solution.stop_reason)},
      {"u", std::vector<double>(u_full.data(), u_full.data() + u_full.size())},
      {"seeds", seeds_json(cfg, {sampler_cfg.seed})}};
  write_json(opts.out_dir, "displacements.json", displacements);
  return kExitOk;
}

inline nlohmann::json design_json(const TrussModel& model, const OptimizeResult& result) {
  nlohmann::json bars = nlohmann::json::array();
  for (int k = 0; k < model.num_bars(); ++k) {
    const Bar& bar = model.bars()[static_cast<std::size_t>(k)];
    nlohmann::json from = nlohmann::json::array();
    nlohmann::json to = nlohmann::json::array();
    for (int a = 0; a < model.dimension(); ++a) {
      from.push_back(model.nodes()(bar.node_i, a));
      to.push_back(model.nodes()(bar.node_j, a));
    }
    bars.push_back({{"index", k + 1},
                    {"from", std::move(from)},
                    {"to", std::move(to)},
                    {"area_ratio", result.design.alpha[k]}});
  }
  const auto& a = result.design.alpha;
  nlohmann::json doc{{"alpha", std::vector<double>(a.data(), a.data() + a.size())},
                     {"bars", std::move(bars)},
                     {"volume_ratio", result.volume_ratio}};
  if (std::isnan(result.compliance)) {
    doc["compliance"] = nullptr;
  } else {
    doc["compliance"] = result.compliance;
  }
  return doc;
}

inline OptimizeResult run_optimize_common(const RunConfig& cfg, const ResolvedModel& rm,
                                          const CommonOptions& opts) {
  const Eigen::VectorXd alpha0 = resolve_initial_alpha(cfg, rm);
  const Sampler sampler = make_sampler(cfg.sampler, cfg.endpoint);
  const SamplerConfig sampler_cfg = to_sampler_config(cfg);
  OptimizeResult result = optimize(rm.model, alpha0, to_opt_config(cfg), sampler, sampler_cfg);

  auto csv = open_output(opts.out_dir, "optimize_trace.csv");
  csv << "iter,compliance,volume_ratio,accepted\n";
  for (const OuterIteration& it : result.trace) {
    csv << it.index << ',' << detail::format_double(it.compliance) << ','
        << detail::format_double(it.volume_ratio) << ',' << (it.accepted ? 1 : 0) << '\n';
  }
  write_json(opts.out_dir, "design_final.json", design_json(rm.model, result));

  nlohmann::json summary{{"stop_reason", result.stop_reason},
                         {"outer_iterations", result.trace.size()},
                         {"volume_ratio", result.volume_ratio},
                         {"sampler", cfg.sampler},
                         {"seeds", seeds_json(cfg, result.seeds_used)}};
  if (!rm.case_id.empty()) summary["case"] = rm.case_id;
  if (std::isnan(result.compliance)) {
    summary["compliance"] = nullptr;
  } else {
    summary["compliance"] = result.compliance;
  }
  write_json(opts.out_dir, "summary.json", summary);
  return result;
}

inline int run_optimize(const CommonOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  const ResolvedModel rm = resolve_model(opts);
  run_optimize_common(cfg, rm, opts);
  return kExitOk;
}

inline int run_bench(const CommonOptions& opts, std::ostream& out) {
  if (opts.case_id.empty()) throw ConfigError("bench requires --case ID");
  const RunConfig cfg = resolve_config(opts);
  const ResolvedModel rm = resolve_model(opts);
  write_json(opts.out_dir, "model.json", model_to_json(rm.model));
  const OptimizeResult result = run_optimize_common(cfg, rm, opts);

  out << "case        bars  compliance    V/V_target  outer  stop\n";
  out << std::left << std::setw(12) << rm.case_id << std::setw(6) << rm.model.num_bars();
  out << std::setw(14) << std::setprecision(6) << result.compliance;
  out << std::setw(12) << std::setprecision(6) << result.volume_ratio;
  out << std::setw(7) << result.trace.size() << result.stop_reason << "\n";
  return kExitOk;
}

}  // namespace cli_detail

/// Entry point shared by the binary and the tests; returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truss compliance optimisation through QUBO sampling"};
  app.require_subcommand(1);

  cli_detail::CommonOptions eq_opts, opt_opts, bench_opts;
  CLI::App* eq = app.add_subcommand("equilibrium", "Solve the equilibrium problem iteratively and trace the energy error");
  cli_detail::add_common(eq, eq_opts, true);
  CLI::App* opt = app.add_subcommand("optimize", "Run the full design optimisation loop");
  cli_detail::add_common(opt, opt_opts, true);
  CLI::App* bench = app.add_subcommand("bench", "Run a bundled benchmark case");
  cli_detail::add_common(bench, bench_opts, false);

  std::vector<const char*> argv;
  argv.push_back("qtruss");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (eq->parsed()) return cli_detail::run_equilibrium(eq_opts);
    if (opt->parsed()) return cli_detail::run_optimize(opt_opts);
    if (bench->parsed()) return cli_detail::run_bench(bench_opts, out);
    err << "error: no subcommand given\n";
    return kExitInput;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SamplerError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRemote;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace qtruss
