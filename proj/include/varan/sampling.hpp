#pragma once

#include "varan/function_model.hpp"
#include "varan/point_set.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace varan {

class EmptyCloud : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated epigraph {(x, a) : f(x) <= a <= cap} sampled at mesh nodes.
struct EpigraphSample {
  FunctionModel base;
  double value_cap;
  Mesh mesh;
  PointSet<double> cloud;  ///< points in R^{d+1} with the box norm
};

/// Vertical levels a = f(x) + k * alpha_step <= cap at every node with f(x)
/// finite. Values in `extra_levels` that lie in [f(x), cap] are added too.
/// Throws EmptyCloud when no node contributes.
EpigraphSample sample_epigraph(const FunctionModel& f, const Mesh& mesh, double cap, double alpha_step,
                               const std::vector<double>& extra_levels = {});

/// Graph points (x, f(x)) with f(x) <= cap.
PointSet<double> sample_graph(const FunctionModel& f, const Mesh& mesh, double cap);

/// Hypograph points (x, a) over dom f with floor <= a <= min(f(x), cap), on
/// the ladder floor + k * alpha_step plus the top point and `extra_levels`.
/// Nodes where f = +inf carry no hypograph (otherwise an indicator would
/// fill whole vertical lines).
PointSet<double> sample_hypograph(const FunctionModel& f, const Mesh& mesh, double cap, double floor,
                                  double alpha_step, const std::vector<double>& extra_levels = {});

/// Default cap: max finite node value + 2 diam(box).
double default_value_cap(const FunctionModel& f, const Mesh& mesh);

struct GapTriple {
  ExtReal hypo_epi;    ///< D(hypo g, epi f)
  ExtReal hypo_graph;  ///< D(hypo g, graph f)
  ExtReal graph_epi;   ///< D(graph g, epi f)
};

/// The three gap distances between hypo/graph of g and graph/epi of f, under
/// the box norm. With `cross_levels` every cloud also carries the other
/// function's node values as vertical levels; the clouds then contain the
/// minimizing pairs and the three numbers coincide exactly. Without it the
/// ladder quantization bounds the disagreement by alpha_step.
GapTriple epi_hypo_gap_triple(const FunctionModel& f, const Mesh& mesh_f, const FunctionModel& g, const Mesh& mesh_g,
                              double cap, double floor, double alpha_step, bool cross_levels = true);

inline GapTriple epi_hypo_gap_triple(const FunctionModel& f, const FunctionModel& g, const Mesh& mesh, double cap,
                                     double floor, double alpha_step, bool cross_levels = true) {
  return epi_hypo_gap_triple(f, mesh, g, mesh, cap, floor, alpha_step, cross_levels);
}

}  // namespace varan
