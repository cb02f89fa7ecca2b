#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtruss/errors.hpp"
#include "qtruss/optimizer.hpp"
#include "qtruss/truss.hpp"

namespace qtruss {

namespace detail {

inline void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline nlohmann::json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ModelError(std::string(what) + " file not found: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string(what) + " file " + path + ": " + e.what());
  }
}

}  // namespace detail

inline TrussModel model_from_json(const nlohmann::json& doc) {
  try {
    detail::check_keys(doc, {"dimension", "nodes", "bars", "supports", "loads", "comment"}, "model");
    const int dimension = doc.at("dimension").get<int>();

    const auto& nodes_json = doc.at("nodes");
    Eigen::MatrixXd nodes(nodes_json.size(), dimension);
    for (std::size_t i = 0; i < nodes_json.size(); ++i) {
      const auto& coords = nodes_json[i];
      if (static_cast<int>(coords.size()) != dimension) {
        throw ModelError("nodes[" + std::to_string(i) + "]: expected " + std::to_string(dimension) +
                         " coordinates");
      }
      for (int a = 0; a < dimension; ++a) nodes(static_cast<Eigen::Index>(i), a) = coords[static_cast<std::size_t>(a)].get<double>();
    }

    std::vector<Bar> bars;
    for (std::size_t k = 0; k < doc.at("bars").size(); ++k) {
      const auto& entry = doc.at("bars")[k];
      detail::check_keys(entry, {"i", "j", "area0", "E"}, "bars[" + std::to_string(k) + "]");
      bars.push_back(Bar{entry.at("i").get<int>(), entry.at("j").get<int>(),
                         entry.at("area0").get<double>(), entry.at("E").get<double>()});
    }

    std::vector<Support> supports;
    for (const auto& entry : doc.at("supports")) {
      if (entry.size() != 2) throw ModelError("supports entries must be [node, axis]");
      supports.emplace_back(entry[0].get<int>(), entry[1].get<int>());
    }

    Eigen::VectorXd loads = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes_json.size()) * dimension);
    for (const auto& entry : doc.at("loads")) {
      if (entry.size() != 3) throw ModelError("loads entries must be [node, axis, value]");
      const int node = entry[0].get<int>();
      const int axis = entry[1].get<int>();
      if (node < 0 || node >= static_cast<int>(nodes_json.size()) || axis < 0 || axis >= dimension) {
        throw ModelError("loads entry addresses a dof out of range");
      }
      loads[node * dimension + axis] += entry[2].get<double>();
    }

    return TrussModel(dimension, std::move(nodes), std::move(bars), std::move(supports),
                      std::move(loads));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model: ") + e.what());
  }
}

inline TrussModel load_model(const std::string& path) {
  return model_from_json(detail::read_json_file(path, "model"));
}

inline nlohmann::json model_to_json(const TrussModel& model) {
  nlohmann::json nodes = nlohmann::json::array();
  for (int i = 0; i < model.num_nodes(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int a = 0; a < model.dimension(); ++a) row.push_back(model.nodes()(i, a));
    nodes.push_back(std::move(row));
  }
  nlohmann::json bars = nlohmann::json::array();
  for (const Bar& bar : model.bars()) {
    bars.push_back({{"i", bar.node_i}, {"j", bar.node_j}, {"area0", bar.area0}, {"E", bar.youngs_modulus}});
  }
  nlohmann::json supports = nlohmann::json::array();
  for (const auto& [node, axis] : model.supports()) supports.push_back({node, axis});
  nlohmann::json loads = nlohmann::json::array();
  for (int dof = 0; dof < model.num_dofs(); ++dof) {
    if (model.loads()[dof] != 0.0) {
      loads.push_back({dof / model.dimension(), dof % model.dimension(), model.loads()[dof]});
    }
  }
  return nlohmann::json{{"dimension", model.dimension()},
                        {"nodes", std::move(nodes)},
                        {"bars", std::move(bars)},
                        {"supports", std::move(supports)},
                        {"loads", std::move(loads)}};
}

/// Driver settings as they appear in the config file; epsilon0 <= 0 selects
/// the built-in default for the loop in question.
struct SpSettings {
  int bits_per_var = 2;
  double epsilon0 = 0.0;
  double xi = 0.5;
  int n_steps = 200;
  int n_failed = 10;
  double epsilon_min = 1e-14;
};

struct RunConfig {
  std::string sampler = "exhaustive";
  std::string endpoint;
  std::uint64_t seed = 1;
  int num_reads = 200;
  int sa_sweeps = 1000;
  int timeout_ms = 10000;
  double v_target = 0.0;
  double volume_penalty = 100.0;
  double design_box = 0.05;
  double alpha_min = 0.02;
  double alpha_max = 1.1;
  std::vector<double> initial_alpha;  ///< empty: case default; one entry: broadcast
  int max_outer = 500;
  double equilibrium_residual_tol = 1e-4;
  SpSettings equilibrium;
  SpSettings design;
};

namespace detail {

inline SpSettings parse_sp_settings(const nlohmann::json& obj, const std::string& where,
                                    SpSettings base) {
  check_keys(obj, {"bits_per_var", "epsilon0", "xi", "n_steps", "n_failed", "epsilon_min"}, where);
  base.bits_per_var = obj.value("bits_per_var", base.bits_per_var);
  base.epsilon0 = obj.value("epsilon0", base.epsilon0);
  base.xi = obj.value("xi", base.xi);
  base.n_steps = obj.value("n_steps", base.n_steps);
  base.n_failed = obj.value("n_failed", base.n_failed);
  base.epsilon_min = obj.value("epsilon_min", base.epsilon_min);
  return base;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& doc) {
  try {
    detail::check_keys(doc,
                       {"sampler", "endpoint", "seed", "num_reads", "sa_sweeps", "timeout_ms",
                        "v_target", "volume_penalty", "design_box", "alpha_min", "alpha_max",
                        "initial_alpha", "max_outer", "equilibrium_residual_tol", "equilibrium",
                        "design", "comment"},
                       "config");
    RunConfig cfg;
    cfg.sampler = doc.value("sampler", cfg.sampler);
    cfg.endpoint = doc.value("endpoint", cfg.endpoint);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.num_reads = doc.value("num_reads", cfg.num_reads);
    cfg.sa_sweeps = doc.value("sa_sweeps", cfg.sa_sweeps);
    cfg.timeout_ms = doc.value("timeout_ms", cfg.timeout_ms);
    cfg.v_target = doc.value("v_target", cfg.v_target);
    cfg.volume_penalty = doc.value("volume_penalty", cfg.volume_penalty);
    cfg.design_box = doc.value("design_box", cfg.design_box);
    cfg.alpha_min = doc.value("alpha_min", cfg.alpha_min);
    cfg.alpha_max = doc.value("alpha_max", cfg.alpha_max);
    if (doc.contains("initial_alpha")) {
      const auto& ia = doc.at("initial_alpha");
      if (ia.is_number()) {
        cfg.initial_alpha = {ia.get<double>()};
      } else {
        cfg.initial_alpha = ia.get<std::vector<double>>();
      }
    }
    cfg.max_outer = doc.value("max_outer", cfg.max_outer);
    cfg.equilibrium_residual_tol = doc.value("equilibrium_residual_tol", cfg.equilibrium_residual_tol);
    if (doc.contains("equilibrium")) {
      cfg.equilibrium = detail::parse_sp_settings(doc.at("equilibrium"), "config.equilibrium", cfg.equilibrium);
    }
    if (doc.contains("design")) {
      cfg.design = detail::parse_sp_settings(doc.at("design"), "config.design", cfg.design);
    }
    if (cfg.num_reads < 1) throw ConfigError("config: num_reads must be >= 1");
    if (cfg.sampler != "exhaustive" && cfg.sampler != "sa" && cfg.sampler != "remote") {
      throw ConfigError("config: sampler must be exhaustive, sa or remote");
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  try {
    return parse_run_config(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

namespace detail {

inline SpConfig to_sp_config(const SpSettings& s) {
  SpConfig sp;
  sp.bits_per_var = s.bits_per_var;
  if (s.epsilon0 > 0.0) sp.epsilon0 = Eigen::VectorXd::Constant(1, s.epsilon0);
  sp.xi = s.xi;
  sp.n_steps = s.n_steps;
  sp.n_failed = s.n_failed;
  sp.epsilon_min = s.epsilon_min;
  return sp;
}

}  // namespace detail

inline OptConfig to_opt_config(const RunConfig& cfg) {
  OptConfig opt;
  opt.v_target = cfg.v_target;
  opt.volume_penalty = cfg.volume_penalty;
  opt.alpha_min = cfg.alpha_min;
  opt.alpha_max = cfg.alpha_max;
  opt.equilibrium_sp = detail::to_sp_config(cfg.equilibrium);
  opt.design_sp = detail::to_sp_config(cfg.design);
  opt.design_box_min = Eigen::VectorXd::Constant(1, -cfg.design_box);
  opt.design_box_max = Eigen::VectorXd::Constant(1, cfg.design_box);
  opt.max_outer = cfg.max_outer;
  opt.equilibrium_residual_tol = cfg.equilibrium_residual_tol;
  return opt;
}

inline SamplerConfig to_sampler_config(const RunConfig& cfg) {
  SamplerConfig sc;
  sc.num_reads = cfg.num_reads;
  sc.seed = cfg.seed;
  sc.sa_sweeps = cfg.sa_sweeps;
  sc.timeout = std::chrono::milliseconds(cfg.timeout_ms);
  return sc;
}

}  // namespace qtruss
