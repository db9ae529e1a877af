#include "varan/function_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace varan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Analytic: return "analytic";
    case ModelKind::Tabulated: return "tabulated";
    case ModelKind::FiniteException: return "finite_exception";
    case ModelKind::Composite: return "composite";
  }
  return "?";
}

FunctionModel FunctionModel::analytic(std::string name, Box box, Evaluator eval, Norm norm,
                                      std::optional<double> lipschitz) {
  if (!eval) throw std::invalid_argument("FunctionModel::analytic: empty evaluator");
  auto d = std::make_shared<Data>();
  d->kind = ModelKind::Analytic;
  d->name = std::move(name);
  d->box = std::move(box);
  d->norm = std::move(norm);
  d->lipschitz = lipschitz;
  d->eval = std::move(eval);
  return FunctionModel(std::move(d));
}

FunctionModel FunctionModel::composite(std::string name, Box box, Evaluator eval, Norm norm,
                                       std::optional<double> lipschitz) {
  FunctionModel f = analytic(std::move(name), std::move(box), std::move(eval), std::move(norm), lipschitz);
  auto d = std::make_shared<Data>(*f.d_);
  d->kind = ModelKind::Composite;
  return FunctionModel(std::move(d));
}

FunctionModel FunctionModel::tabulated(std::string name, Mesh mesh, Eigen::VectorXd values,
                                       std::optional<double> lipschitz) {
  if (values.size() != mesh.node_count()) throw std::invalid_argument("FunctionModel::tabulated: value count mismatch");
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::isnan(values(i)) || values(i) == -kInf)
      throw ExtRealError("FunctionModel::tabulated: NaN or -inf node value");
  auto d = std::make_shared<Data>();
  d->kind = ModelKind::Tabulated;
  d->name = std::move(name);
  d->box = mesh.box();
  d->norm = mesh.norm();
  d->values = std::move(values);
  d->lipschitz = lipschitz;
  d->mesh = std::move(mesh);
  return FunctionModel(std::move(d));
}

FunctionModel FunctionModel::finite_exception(std::string name, Box box, ExtReal default_value,
                                              std::vector<Exception> exceptions, Norm norm) {
  for (const auto& e : exceptions)
    if (e.point.size() != box.dim()) throw DimensionMismatch("FunctionModel::finite_exception: exception dimension");
  std::sort(exceptions.begin(), exceptions.end(),
            [](const Exception& a, const Exception& b) { return lex_less(a.point, b.point); });
  for (std::size_t i = 1; i < exceptions.size(); ++i)
    if (exceptions[i].point == exceptions[i - 1].point)
      throw std::invalid_argument("FunctionModel::finite_exception: duplicate exception point");
  auto d = std::make_shared<Data>();
  d->kind = ModelKind::FiniteException;
  d->name = std::move(name);
  d->box = std::move(box);
  d->norm = std::move(norm);
  d->default_value = default_value;
  d->exceptions = std::move(exceptions);
  return FunctionModel(std::move(d));
}

ExtReal FunctionModel::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) throw DimensionMismatch("FunctionModel '" + d_->name + "': dimension mismatch");
  switch (d_->kind) {
    case ModelKind::Analytic:
    case ModelKind::Composite: return d_->eval(x);
    case ModelKind::Tabulated: {
      auto idx = d_->mesh->find_node(x);
      if (!idx) throw OffMeshQuery("FunctionModel '" + d_->name + "': query off the mesh");
      return ExtReal(d_->values(*idx));
    }
    case ModelKind::FiniteException: {
      const Eigen::VectorXd xv = x;
      auto it = std::lower_bound(d_->exceptions.begin(), d_->exceptions.end(), xv,
                                 [](const Exception& e, const Eigen::VectorXd& p) { return lex_less(e.point, p); });
      if (it != d_->exceptions.end() && it->point == xv) return it->value;
      return d_->default_value;
    }
  }
  return ExtReal::infinity();
}

FunctionModel FunctionModel::renamed(std::string name) const {
  auto d = std::make_shared<Data>(*d_);
  d->name = std::move(name);
  return FunctionModel(std::move(d));
}

Eigen::VectorXd tabulate(const FunctionModel& f, const Mesh& mesh) {
  if (f.dim() != mesh.dim()) throw DimensionMismatch("tabulate: dimension mismatch");
  if (f.kind() == ModelKind::Tabulated && *f.mesh() == mesh) return *f.table();
  Eigen::VectorXd out(mesh.node_count());
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) out(i) = f(mesh.node(i)).raw();
  return out;
}

FunctionModel tabulated_on(const FunctionModel& f, const Mesh& mesh) {
  return FunctionModel::tabulated(f.name(), mesh, tabulate(f, mesh));
}

FunctionModel indicator(const Region& s, Box box, Norm norm) {
  if (s.dim() != box.dim()) throw DimensionMismatch("indicator: dimension mismatch");
  return FunctionModel::analytic(
      "indicator[" + s.label() + "]", std::move(box),
      [s](const Eigen::Ref<const Eigen::VectorXd>& x) { return s.contains(x) ? ExtReal(0.0) : ExtReal::infinity(); },
      std::move(norm));
}

FunctionModel restrict(const FunctionModel& f, const Region& s) {
  if (s.dim() != f.dim()) throw DimensionMismatch("restrict: dimension mismatch");
  return FunctionModel::composite(
      f.name() + "|" + s.label(), f.box(),
      [f, s](const Eigen::Ref<const Eigen::VectorXd>& x) { return s.contains(x) ? f(x) : ExtReal::infinity(); },
      f.norm());
}

FunctionModel tilt(const FunctionModel& f, const Eigen::VectorXd& xstar) {
  if (xstar.size() != f.dim()) throw DimensionMismatch("tilt: dimension mismatch");
  if (!xstar.allFinite()) throw std::invalid_argument("tilt: non-finite functional");
  if (xstar.isZero(0.0)) return f;
  std::optional<double> lip;
  if (f.lipschitz_hint()) lip = *f.lipschitz_hint() + f.norm().dual(xstar);
  return FunctionModel::composite(
      f.name() + "+<x*,.>", f.box(),
      [f, xstar](const Eigen::Ref<const Eigen::VectorXd>& x) { return f(x) + ExtReal(xstar.dot(x)); }, f.norm(), lip);
}

FunctionModel sum(const FunctionModel& f, const FunctionModel& g) {
  if (f.dim() != g.dim()) throw DimensionMismatch("sum: dimension mismatch");
  std::optional<double> lip;
  if (f.lipschitz_hint() && g.lipschitz_hint()) lip = *f.lipschitz_hint() + *g.lipschitz_hint();
  return FunctionModel::composite(
      f.name() + "+" + g.name(), f.box(),
      [f, g](const Eigen::Ref<const Eigen::VectorXd>& x) { return f(x) + g(x); }, f.norm(), lip);
}

FunctionModel add_scaled(const FunctionModel& f, double c, const FunctionModel& g) {
  if (f.dim() != g.dim()) throw DimensionMismatch("add_scaled: dimension mismatch");
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("add_scaled: factor must be finite and >= 0");
  return FunctionModel::composite(
      f.name() + "+" + std::to_string(c) + "*" + g.name(), f.box(),
      [f, c, g](const Eigen::Ref<const Eigen::VectorXd>& x) {
        const ExtReal fx = f(x);
        if (fx.is_infinite()) return fx;
        const ExtReal gx = g(x);
        if (c == 0.0) return fx;
        return fx + c * gx;
      },
      f.norm());
}

FunctionModel shifted(const FunctionModel& f, double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("shifted: non-finite constant");
  return FunctionModel::composite(
      f.name() + "+const", f.box(), [f, c](const Eigen::Ref<const Eigen::VectorXd>& x) { return f(x) + ExtReal(c); },
      f.norm(), f.lipschitz_hint());
}

ExtReal inf_over_region(const FunctionModel& f, const Region& s, const Mesh& mesh) {
  if (s.dim() != mesh.dim() || f.dim() != mesh.dim()) throw DimensionMismatch("inf_over_region: dimension mismatch");
  ExtReal best = ExtReal::infinity();
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) {
    if (!s.contains(mesh.node(i))) continue;
    best = min(best, f(mesh.node(i)));
  }
  return best;
}

FunctionModel inf_convolution(const FunctionModel& f, const FunctionModel& g, const Mesh& mesh) {
  if (f.dim() != mesh.dim() || g.dim() != mesh.dim()) throw DimensionMismatch("inf_convolution: dimension mismatch");
  const Eigen::VectorXd fv = tabulate(f, mesh);
  const Eigen::Index n = mesh.node_count();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kInf);
  for (Eigen::Index z = 0; z < n; ++z) {
    if (fv(z) == kInf) continue;
    for (Eigen::Index x = 0; x < n; ++x) {
      const double gv = g(mesh.node(x) - mesh.node(z)).raw();
      out(x) = std::min(out(x), fv(z) + gv);
    }
  }
  return FunctionModel::tabulated(f.name() + " infconv " + g.name(), mesh, std::move(out));
}

Eigen::VectorXd pasch_hausdorff_values(const Eigen::VectorXd& values, double n, const Mesh& mesh) {
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("pasch_hausdorff: n must be positive and finite");
  if (values.size() != mesh.node_count()) throw std::invalid_argument("pasch_hausdorff: value count mismatch");
  std::vector<Eigen::Index> finite;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) != kInf) finite.push_back(i);
  if (finite.empty()) throw std::invalid_argument("pasch_hausdorff: f is +inf on every node");
  const Eigen::Index count = mesh.node_count();
  Eigen::VectorXd out(count);
  const Norm& norm = mesh.norm();
  if (mesh.dim() == 1 && !norm.is_blocked()) {
    const auto row = mesh.nodes().row(0);
    for (Eigen::Index x = 0; x < count; ++x) {
      double best = kInf;
      const double px = row(x);
      for (auto y : finite) best = std::min(best, values(y) + n * std::abs(row(y) - px));
      out(x) = best;
    }
    return out;
  }
  for (Eigen::Index x = 0; x < count; ++x) {
    double best = kInf;
    for (auto y : finite) best = std::min(best, values(y) + n * norm(mesh.node(y) - mesh.node(x)));
    out(x) = best;
  }
  return out;
}

FunctionModel pasch_hausdorff(const FunctionModel& f, double n, const Mesh& mesh) {
  Eigen::VectorXd env = pasch_hausdorff_values(tabulate(f, mesh), n, mesh);
  return FunctionModel::tabulated(f.name() + " infconv " + std::to_string(n) + "|.|", mesh, std::move(env), n);
}

}  // namespace varan
