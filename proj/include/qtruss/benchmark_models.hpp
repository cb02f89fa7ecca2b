#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "qtruss/errors.hpp"
#include "qtruss/truss.hpp"

namespace qtruss {

/// Bundled benchmark structures: square-cell cantilevers on unit grids (2D)
/// and a two-storey braced tower (3D). All bars use E = 200 GPa and an initial
/// cross-section of 0.5 m^2.
///
/// The literature these geometries come from leaves loads and supports
/// unspecified, so the boundary conditions here are a documented
/// reconstruction: the edge closest to x = 0 (2D) or the base plane (3D) is
/// fully fixed and a single 100 kN load pulls the far tip downwards. Both are
/// plain model-file inputs and can be edited freely.
struct BenchmarkCase {
  std::string id;
  TrussModel model;
  double initial_alpha = 0.0;  ///< customary starting area ratio for this case
};

inline const std::vector<std::string>& benchmark_ids() {
  static const std::vector<std::string> ids = {"case1", "case2", "case3", "case3d"};
  return ids;
}

namespace detail {

inline constexpr double kBenchYoungs = 200e9;   // Pa
inline constexpr double kBenchArea0 = 0.5;      // m^2
inline constexpr double kBenchLoad = 1e5;       // N

/// Rectangular grid of unit cells, each braced with both diagonals.
struct GridBuilder {
  std::vector<std::array<double, 2>> nodes;
  std::vector<Bar> bars;

  int node_at(double x, double y) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i][0] == x && nodes[i][1] == y) return static_cast<int>(i);
    }
    nodes.push_back({x, y});
    return static_cast<int>(nodes.size()) - 1;
  }

  void bar(double xi, double yi, double xj, double yj) {
    bars.push_back(Bar{node_at(xi, yi), node_at(xj, yj), kBenchArea0, kBenchYoungs});
  }
};

inline TrussModel grid_model(const std::vector<std::array<double, 4>>& segments,
                             const std::vector<std::array<double, 2>>& fixed_nodes,
                             std::array<double, 2> load_node) {
  GridBuilder builder;
  for (const auto& s : segments) builder.bar(s[0], s[1], s[2], s[3]);
  Eigen::MatrixXd nodes(builder.nodes.size(), 2);
  for (std::size_t i = 0; i < builder.nodes.size(); ++i) {
    nodes(static_cast<Eigen::Index>(i), 0) = builder.nodes[i][0];
    nodes(static_cast<Eigen::Index>(i), 1) = builder.nodes[i][1];
  }
  std::vector<Support> supports;
  for (const auto& fn : fixed_nodes) {
    const int node = builder.node_at(fn[0], fn[1]);
    supports.emplace_back(node, 0);
    supports.emplace_back(node, 1);
  }
  Eigen::VectorXd loads = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(builder.nodes.size()) * 2);
  loads[builder.node_at(load_node[0], load_node[1]) * 2 + 1] = -kBenchLoad;
  return TrussModel(2, std::move(nodes), std::move(builder.bars), std::move(supports), std::move(loads));
}

/// Bar list of one braced cell with lower-left corner (x, y), omitting edges
/// already contributed by the cell below/left.
inline void push_cell(std::vector<std::array<double, 4>>& segs, double x, double y, bool with_bottom,
                      bool with_left) {
  if (with_bottom) segs.push_back({x, y, x + 1, y});          // bottom chord
  segs.push_back({x + 1, y, x + 1, y + 1});                   // right vertical
  segs.push_back({x + 1, y + 1, x, y + 1});                   // top chord
  segs.push_back({x, y, x + 1, y + 1});                       // rising diagonal
  segs.push_back({x + 1, y, x, y + 1});                       // falling diagonal
  if (with_left) segs.push_back({x, y, x, y + 1});            // left vertical
}

inline TrussModel make_case1() {
  std::vector<std::array<double, 4>> segs;
  push_cell(segs, 0, 0, true, true);
  return grid_model(segs, {{0, 0}, {0, 1}}, {1, 0});
}

inline TrussModel make_case2() {
  std::vector<std::array<double, 4>> segs;
  for (int x = 0; x < 4; ++x) push_cell(segs, x, 0, true, x == 0);
  return grid_model(segs, {{0, 0}, {0, 1}}, {4, 0});
}

inline TrussModel make_case3() {
  std::vector<std::array<double, 4>> segs;
  for (int x = 0; x < 3; ++x) push_cell(segs, x, 0, true, x == 0);
  for (int x = 0; x < 3; ++x) push_cell(segs, x, 1, false, x == 0);
  return grid_model(segs, {{0, 0}, {0, 1}, {0, 2}}, {3, 1});
}

inline TrussModel make_case3d() {
  std::vector<std::array<double, 3>> coords;
  auto node_at = [&coords](double x, double y, double z) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i][0] == x && coords[i][1] == y && coords[i][2] == z) return static_cast<int>(i);
    }
    coords.push_back({x, y, z});
    return static_cast<int>(coords.size()) - 1;
  };
  std::vector<Bar> bars;
  auto bar = [&](std::array<double, 3> a, std::array<double, 3> b) {
    bars.push_back(Bar{node_at(a[0], a[1], a[2]), node_at(b[0], b[1], b[2]), kBenchArea0, kBenchYoungs});
  };

  const std::array<std::array<double, 2>, 4> columns = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  for (int storey = 0; storey < 2; ++storey) {
    const double z0 = storey;
    const double z1 = storey + 1;
    // each base corner connects to its own top corner and to the other three
    for (const auto& from : columns) {
      for (const auto& to : columns) {
        bar({from[0], from[1], z0}, {to[0], to[1], z1});
      }
    }
    // braced square in the upper plane
    for (std::size_t c = 0; c < 4; ++c) {
      bar({columns[c][0], columns[c][1], z1}, {columns[(c + 1) % 4][0], columns[(c + 1) % 4][1], z1});
    }
    bar({0, 0, z1}, {1, 1, z1});
    bar({1, 0, z1}, {0, 1, z1});
  }

  Eigen::MatrixXd nodes(coords.size(), 3);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (int a = 0; a < 3; ++a) nodes(static_cast<Eigen::Index>(i), a) = coords[i][static_cast<std::size_t>(a)];
  }
  std::vector<Support> supports;
  for (const auto& c : columns) {
    const int node = node_at(c[0], c[1], 0);
    for (int a = 0; a < 3; ++a) supports.emplace_back(node, a);
  }
  Eigen::VectorXd loads = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(coords.size()) * 3);
  loads[node_at(0, 0, 2) * 3 + 2] = -kBenchLoad;
  return TrussModel(3, std::move(nodes), std::move(bars), std::move(supports), std::move(loads));
}

}  // namespace detail

inline BenchmarkCase make_benchmark(const std::string& id) {
  if (id == "case1") return {id, detail::make_case1(), 0.35};
  if (id == "case2") return {id, detail::make_case2(), 0.5};
  if (id == "case3") return {id, detail::make_case3(), 0.4};
  if (id == "case3d") return {id, detail::make_case3d(), 0.1};
  throw ConfigError("unknown benchmark case '" + id + "' (expected case1, case2, case3 or case3d)");
}

}  // namespace qtruss
