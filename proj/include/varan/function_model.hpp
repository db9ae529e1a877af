#pragma once

#include "varan/ext_real.hpp"
#include "varan/mesh.hpp"
#include "varan/norm.hpp"
#include "varan/region.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace varan {

enum class ModelKind { Analytic, Tabulated, FiniteException, Composite };

std::string to_string(ModelKind k);

/// Raised when a Tabulated model is queried away from its nodes.
class OffMeshQuery : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Extended-real function on R^d.
///
/// Four variants share one interface:
///  - Analytic: a closure, evaluated on demand (tabulated before any
///    mesh check).
///  - Tabulated: exact values at the nodes of a mesh; the node set is the
///    whole space and off-node queries throw OffMeshQuery.
///  - FiniteException: a default value everywhere except on a finite list
///    of points, each with its own value.
///  - Composite: built by restrict / tilt / sums from other models.
///
/// Models are immutable and cheap to copy (shared state).
class FunctionModel {
 public:
  using Evaluator = std::function<ExtReal(const Eigen::Ref<const Eigen::VectorXd>&)>;

  struct Exception {
    Eigen::VectorXd point;
    ExtReal value;
  };

  static FunctionModel analytic(std::string name, Box box, Evaluator eval, Norm norm = Norm::euclidean(),
                                std::optional<double> lipschitz = std::nullopt);
  /// `values` are node values in mesh order; +inf entries are allowed, NaN is not.
  static FunctionModel tabulated(std::string name, Mesh mesh, Eigen::VectorXd values,
                                 std::optional<double> lipschitz = std::nullopt);
  static FunctionModel finite_exception(std::string name, Box box, ExtReal default_value,
                                        std::vector<Exception> exceptions, Norm norm = Norm::euclidean());
  static FunctionModel composite(std::string name, Box box, Evaluator eval, Norm norm,
                                 std::optional<double> lipschitz = std::nullopt);

  ExtReal operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  ModelKind kind() const { return d_->kind; }
  const std::string& name() const { return d_->name; }
  const Box& box() const { return d_->box; }
  Eigen::Index dim() const { return d_->box.dim(); }
  const Norm& norm() const { return d_->norm; }
  std::optional<double> lipschitz_hint() const { return d_->lipschitz; }

  /// Mesh and node values of a Tabulated model, nullptr otherwise.
  const Mesh* mesh() const { return d_->mesh ? &*d_->mesh : nullptr; }
  const Eigen::VectorXd* table() const { return d_->kind == ModelKind::Tabulated ? &d_->values : nullptr; }

  /// FiniteException data (empty for other variants).
  ExtReal default_value() const { return d_->default_value; }
  const std::vector<Exception>& exceptions() const { return d_->exceptions; }

  FunctionModel renamed(std::string name) const;

 private:
  struct Data {
    ModelKind kind = ModelKind::Analytic;
    std::string name;
    Box box;
    Norm norm;
    std::optional<double> lipschitz;
    Evaluator eval;
    std::optional<Mesh> mesh;
    Eigen::VectorXd values;
    ExtReal default_value;
    std::vector<Exception> exceptions;  // sorted lexicographically
  };
  explicit FunctionModel(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  std::shared_ptr<const Data> d_;
};

/// Node values of f on the mesh (+inf encoded as IEEE infinity).
Eigen::VectorXd tabulate(const FunctionModel& f, const Mesh& mesh);

/// Tabulated copy of f on the mesh.
FunctionModel tabulated_on(const FunctionModel& f, const Mesh& mesh);

/// Indicator delta_S: 0 on S, +inf elsewhere.
FunctionModel indicator(const Region& s, Box box, Norm norm = Norm::euclidean());

/// f_S = f + delta_S.
FunctionModel restrict(const FunctionModel& f, const Region& s);

/// x -> f(x) + <xstar, x>.
FunctionModel tilt(const FunctionModel& f, const Eigen::VectorXd& xstar);

/// x -> f(x) + g(x).
FunctionModel sum(const FunctionModel& f, const FunctionModel& g);

/// x -> f(x) + c * g(x) with c >= 0 and g real-valued.
FunctionModel add_scaled(const FunctionModel& f, double c, const FunctionModel& g);

/// x -> f(x) + c.
FunctionModel shifted(const FunctionModel& f, double c);

/// inf_S f over the mesh nodes lying in S; +inf when no node qualifies.
ExtReal inf_over_region(const FunctionModel& f, const Region& s, const Mesh& mesh);

/// Tabulated inf-convolution (f inf-conv g)(x) = min_z f(z) + g(x - z) over nodes z.
/// The node set plays the role of the whole space.
FunctionModel inf_convolution(const FunctionModel& f, const FunctionModel& g, const Mesh& mesh);

/// Lipschitz (Pasch-Hausdorff) envelope f_n(x) = min_y f(y) + n |y - x| over nodes.
/// Requires f finite at some node. The result carries lipschitz_hint = n.
FunctionModel pasch_hausdorff(const FunctionModel& f, double n, const Mesh& mesh);

/// Same envelope computed from raw node values.
Eigen::VectorXd pasch_hausdorff_values(const Eigen::VectorXd& values, double n, const Mesh& mesh);

}  // namespace varan
