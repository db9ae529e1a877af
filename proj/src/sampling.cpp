#include "varan/sampling.hpp"

#include "varan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Norm cloud_norm(const Mesh& mesh) {
  if (mesh.norm().is_blocked()) throw std::invalid_argument("sampling: mesh norm must be unblocked");
  return Norm::box(mesh.norm().kind(), mesh.dim());
}

void check_step(double cap, double alpha_step) {
  if (!std::isfinite(cap)) throw std::invalid_argument("sampling: cap must be finite");
  if (!(alpha_step > 0.0) || !std::isfinite(alpha_step))
    throw std::invalid_argument("sampling: alpha_step must be positive");
}

struct CloudBuilder {
  Eigen::Index dim;
  std::vector<double> coords;

  void add(const Eigen::Ref<const Eigen::VectorXd>& x, double a) {
    coords.insert(coords.end(), x.data(), x.data() + x.size());
    coords.push_back(a);
  }

  PointSet<double> finish(Norm norm) {
    const auto cols = static_cast<Eigen::Index>(coords.size()) / (dim + 1);
    Eigen::MatrixXd m = Eigen::Map<Eigen::MatrixXd>(coords.data(), dim + 1, cols);
    if (cols == 0) return PointSet<double>(dim + 1, std::move(norm));
    return PointSet<double>(std::move(m), std::move(norm));
  }
};

PointSet<double> epigraph_cloud(const Eigen::VectorXd& values, const Mesh& mesh, double cap, double alpha_step,
                                const std::vector<double>& extra) {
  CloudBuilder b{mesh.dim(), {}};
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) {
    const double fx = values(i);
    if (fx == kInf || fx > cap) continue;
    for (long k = 0;; ++k) {
      const double a = fx + static_cast<double>(k) * alpha_step;
      if (a > cap) break;
      b.add(mesh.node(i), a);
    }
    for (double a : extra)
      if (a >= fx && a <= cap) b.add(mesh.node(i), a);
  }
  return b.finish(cloud_norm(mesh));
}

PointSet<double> hypograph_cloud(const Eigen::VectorXd& values, const Mesh& mesh, double cap, double floor,
                                 double alpha_step, const std::vector<double>& extra) {
  CloudBuilder b{mesh.dim(), {}};
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) {
    if (values(i) == kInf) continue;
    const double top = std::min(values(i), cap);
    if (top < floor) continue;
    for (long k = 0;; ++k) {
      const double a = floor + static_cast<double>(k) * alpha_step;
      if (a > top) break;
      b.add(mesh.node(i), a);
    }
    b.add(mesh.node(i), top);
    for (double a : extra)
      if (a >= floor && a <= top) b.add(mesh.node(i), a);
  }
  return b.finish(cloud_norm(mesh));
}

std::vector<double> finite_values(const Eigen::VectorXd& v) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) != kInf) out.push_back(v(i));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

EpigraphSample sample_epigraph(const FunctionModel& f, const Mesh& mesh, double cap, double alpha_step,
                               const std::vector<double>& extra_levels) {
  check_step(cap, alpha_step);
  PointSet<double> cloud = epigraph_cloud(tabulate(f, mesh), mesh, cap, alpha_step, extra_levels);
  if (cloud.empty()) throw EmptyCloud("sample_epigraph: '" + f.name() + "' has no node value below the cap");
  return EpigraphSample{f, cap, mesh, std::move(cloud)};
}

PointSet<double> sample_graph(const FunctionModel& f, const Mesh& mesh, double cap) {
  if (!std::isfinite(cap)) throw std::invalid_argument("sample_graph: cap must be finite");
  const Eigen::VectorXd values = tabulate(f, mesh);
  CloudBuilder b{mesh.dim(), {}};
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i)
    if (values(i) <= cap) b.add(mesh.node(i), values(i));
  PointSet<double> cloud = b.finish(cloud_norm(mesh));
  if (cloud.empty()) throw EmptyCloud("sample_graph: '" + f.name() + "' has no node value below the cap");
  return cloud;
}

PointSet<double> sample_hypograph(const FunctionModel& f, const Mesh& mesh, double cap, double floor,
                                  double alpha_step, const std::vector<double>& extra_levels) {
  check_step(cap, alpha_step);
  if (!std::isfinite(floor) || floor > cap) throw std::invalid_argument("sample_hypograph: need finite floor <= cap");
  PointSet<double> cloud = hypograph_cloud(tabulate(f, mesh), mesh, cap, floor, alpha_step, extra_levels);
  if (cloud.empty()) throw EmptyCloud("sample_hypograph: '" + f.name() + "' lies below the floor everywhere");
  return cloud;
}

double default_value_cap(const FunctionModel& f, const Mesh& mesh) {
  const Eigen::VectorXd values = tabulate(f, mesh);
  double top = -kInf;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) != kInf) top = std::max(top, values(i));
  if (top == -kInf) throw EmptyCloud("default_value_cap: '" + f.name() + "' is +inf on every node");
  return top + 2.0 * mesh.box().diameter(mesh.norm());
}

GapTriple epi_hypo_gap_triple(const FunctionModel& f, const Mesh& mesh_f, const FunctionModel& g, const Mesh& mesh_g,
                              double cap, double floor, double alpha_step, bool cross_levels) {
  check_step(cap, alpha_step);
  if (mesh_f.dim() != mesh_g.dim() || !(mesh_f.norm() == mesh_g.norm()))
    throw std::invalid_argument("epi_hypo_gap_triple: meshes disagree on dimension or norm");
  const Eigen::VectorXd fv = tabulate(f, mesh_f);
  const Eigen::VectorXd gv = tabulate(g, mesh_g);
  const std::vector<double> f_levels = cross_levels ? finite_values(fv) : std::vector<double>{};
  const std::vector<double> g_levels = cross_levels ? finite_values(gv) : std::vector<double>{};

  const PointSet<double> epi_f = epigraph_cloud(fv, mesh_f, cap, alpha_step, g_levels);
  const PointSet<double> hypo_g = hypograph_cloud(gv, mesh_g, cap, floor, alpha_step, f_levels);
  const PointSet<double> graph_f = sample_graph(f, mesh_f, cap);
  const PointSet<double> graph_g = sample_graph(g, mesh_g, cap);
  if (epi_f.empty()) throw EmptyCloud("epi_hypo_gap_triple: empty epigraph cloud for '" + f.name() + "'");
  if (hypo_g.empty()) throw EmptyCloud("epi_hypo_gap_triple: empty hypograph cloud for '" + g.name() + "'");
  return GapTriple{gap_distance(hypo_g, epi_f), gap_distance(hypo_g, graph_f), gap_distance(graph_g, epi_f)};
}

}  // namespace varan
