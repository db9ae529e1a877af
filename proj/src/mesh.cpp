#include "varan/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace varan {

NormKind norm_kind_from_string(const std::string& s) {
  if (s == "euclidean") return NormKind::Euclidean;
  if (s == "max") return NormKind::Max;
  if (s == "taxicab") return NormKind::Taxicab;
  throw std::invalid_argument("unknown norm kind '" + s + "'");
}

std::string Norm::describe() const {
  std::string out = to_string(kind_);
  if (!blocks_.empty()) {
    out += "[blocks:";
    for (std::size_t i = 0; i < blocks_.size(); ++i) out += (i ? "," : "") + std::to_string(blocks_[i]);
    out += "]";
  }
  return out;
}

Mesh::Mesh(Box box, const Eigen::VectorXd& resolution, Norm norm) : box_(std::move(box)), norm_(std::move(norm)) {
  const Eigen::Index d = box_.dim();
  if (d <= 0 || box_.upper.size() != d) throw std::invalid_argument("Mesh: malformed box");
  if (resolution.size() != 1 && resolution.size() != d)
    throw std::invalid_argument("Mesh: resolution needs one entry or one per axis");
  spacing_.resize(d);
  counts_.resize(d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const double h = resolution.size() == 1 ? resolution(0) : resolution(a);
    const double len = box_.upper(a) - box_.lower(a);
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("Mesh: resolution must be positive");
    if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument("Mesh: box must have positive finite extent");
    const double cells = std::max(1.0, std::round(len / h));
    if (cells > 5e7) throw std::invalid_argument("Mesh: too many cells on one axis");
    counts_(a) = static_cast<int>(cells) + 1;
    spacing_(a) = len / cells;
  }
  build_nodes();
}

Mesh Mesh::interval(double lo, double hi, double h, Norm norm) {
  Box b{Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
  return Mesh(std::move(b), Eigen::VectorXd::Constant(1, h), std::move(norm));
}

Mesh Mesh::power(const Mesh& base, Eigen::Index k) {
  if (k < 1) throw std::invalid_argument("Mesh::power: k must be >= 1");
  const Eigen::Index d = base.dim();
  Mesh m;
  m.box_.lower.resize(d * k);
  m.box_.upper.resize(d * k);
  m.spacing_.resize(d * k);
  m.counts_.resize(d * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    m.box_.lower.segment(i * d, d) = base.box_.lower;
    m.box_.upper.segment(i * d, d) = base.box_.upper;
    m.spacing_.segment(i * d, d) = base.spacing_;
    m.counts_.segment(i * d, d) = base.counts_;
  }
  if (base.norm_.is_blocked()) throw std::invalid_argument("Mesh::power: base norm must be unblocked");
  m.norm_ = Norm::product(base.norm_.kind(), d, k);
  m.build_nodes();
  return m;
}

void Mesh::build_nodes() {
  const Eigen::Index d = box_.dim();
  double total = 1.0;
  for (Eigen::Index a = 0; a < d; ++a) total *= counts_(a);
  if (total > 2e7) throw std::invalid_argument("Mesh: node budget exceeded (" + std::to_string(total) + " nodes)");
  const auto n = static_cast<Eigen::Index>(total);
  nodes_.resize(d, n);
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(d);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index a = 0; a < d; ++a) {
      const double len = box_.upper(a) - box_.lower(a);
      nodes_(a, j) = box_.lower(a) + len * static_cast<double>(idx(a)) / static_cast<double>(counts_(a) - 1);
    }
    // first axis varies fastest
    for (Eigen::Index a = 0; a < d; ++a) {
      if (++idx(a) < counts_(a)) break;
      idx(a) = 0;
    }
  }
}

std::optional<Eigen::Index> Mesh::find_node(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) throw DimensionMismatch("Mesh::find_node: dimension mismatch");
  Eigen::Index flat = 0;
  Eigen::Index stride = 1;
  for (Eigen::Index a = 0; a < dim(); ++a) {
    const double t = (x(a) - box_.lower(a)) / spacing_(a);
    const double k = std::round(t);
    if (std::abs(t - k) > 1e-9 || k < 0 || k > counts_(a) - 1) return std::nullopt;
    flat += static_cast<Eigen::Index>(k) * stride;
    stride *= counts_(a);
  }
  return flat;
}

Eigen::Index Mesh::nearest_node(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) throw DimensionMismatch("Mesh::nearest_node: dimension mismatch");
  Eigen::Index flat = 0;
  Eigen::Index stride = 1;
  for (Eigen::Index a = 0; a < dim(); ++a) {
    double k = std::round((x(a) - box_.lower(a)) / spacing_(a));
    k = std::clamp(k, 0.0, static_cast<double>(counts_(a) - 1));
    flat += static_cast<Eigen::Index>(k) * stride;
    stride *= counts_(a);
  }
  return flat;
}

std::vector<Eigen::Index> Mesh::ball(const Eigen::Ref<const Eigen::VectorXd>& center, double r) const {
  if (center.size() != dim()) throw DimensionMismatch("Mesh::ball: dimension mismatch");
  std::vector<Eigen::Index> out;
  if (!(r >= 0.0)) return out;
  const Eigen::Index d = dim();
  // every norm kind dominates the max norm, so the ball sits inside the cube
  Eigen::VectorXi lo(d), hi(d), strides(d);
  Eigen::Index stride = 1;
  for (Eigen::Index a = 0; a < d; ++a) {
    const double tl = std::ceil((center(a) - r - box_.lower(a)) / spacing_(a) - 1e-9);
    const double th = std::floor((center(a) + r - box_.lower(a)) / spacing_(a) + 1e-9);
    lo(a) = static_cast<int>(std::max(0.0, tl));
    hi(a) = static_cast<int>(std::min(static_cast<double>(counts_(a) - 1), th));
    if (lo(a) > hi(a)) return out;
    strides(a) = static_cast<int>(stride);
    stride *= counts_(a);
  }
  Eigen::VectorXi idx = lo;
  while (true) {
    Eigen::Index flat = 0;
    for (Eigen::Index a = 0; a < d; ++a) flat += static_cast<Eigen::Index>(idx(a)) * strides(a);
    if (norm_(nodes_.col(flat) - center) <= r) out.push_back(flat);
    Eigen::Index a = 0;
    for (; a < d; ++a) {
      if (++idx(a) <= hi(a)) break;
      idx(a) = lo(a);
    }
    if (a == d) break;
  }
  return out;
}

double Mesh::snap_radius(double r) const {
  if (r <= 0.0) return 0.0;
  const double h = resolution();
  return (std::floor(r / h) + 0.5) * h;
}

}  // namespace varan
