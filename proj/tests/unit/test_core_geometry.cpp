#include "doctest.h"
#include "support/gen.hpp"

#include "varan/ext_real.hpp"
#include "varan/geometry.hpp"
#include "varan/mesh.hpp"
#include "varan/norm.hpp"
#include "varan/point_set.hpp"

#include <limits>

using namespace varan;

namespace {

PointSet<double> line(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index j = 0;
  for (double x : xs) m(0, j++) = x;
  return PointSet<double>(m, Norm::euclidean());
}

PointSet<double> plane(std::initializer_list<std::pair<double, double>> ps, Norm n = Norm::euclidean()) {
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(ps.size()));
  Eigen::Index j = 0;
  for (auto [a, b] : ps) {
    m(0, j) = a;
    m(1, j++) = b;
  }
  return PointSet<double>(m, n);
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("ExtReal arithmetic and ordering") {
  const ExtReal inf = ExtReal::infinity();
  CHECK((ExtReal(3.0) + inf).is_infinite());
  CHECK(ExtReal(1e300) < inf);
  CHECK(min(inf, inf).is_infinite());
  CHECK(max(ExtReal(-2.0), ExtReal(1.0)) == ExtReal(1.0));
  CHECK_THROWS_AS(ExtReal(std::nan("")), ExtRealError);
  CHECK_THROWS_AS(ExtReal(-std::numeric_limits<double>::infinity()), ExtRealError);
  CHECK_THROWS_AS(ExtReal(1.0) - inf, ExtRealError);
  CHECK_THROWS_AS(0.0 * inf, ExtRealError);
  CHECK((2.0 * inf).is_infinite());
  CHECK(excess(inf, inf) == 0.0);
  CHECK(excess(ExtReal(1.0), ExtReal(3.0)) == -2.0);
  CHECK(to_string(inf) == "+inf");
}

TEST_CASE("norm kinds and duals") {
  const Eigen::VectorXd v = vec({3.0, -4.0});
  CHECK(Norm::euclidean()(v) == 5.0);
  CHECK(Norm::max()(v) == 4.0);
  CHECK(Norm::taxicab()(v) == 7.0);
  CHECK(Norm::max().dual(v) == 7.0);
  CHECK(Norm::taxicab().dual(v) == 4.0);
  // box norm on R^2 x R: max(|(3,-4)|, |t|)
  CHECK(Norm::box(NormKind::Euclidean, 2)(vec({3.0, -4.0, 6.0})) == 6.0);
  CHECK(Norm::box(NormKind::Euclidean, 2)(vec({3.0, -4.0, 1.0})) == 5.0);
  CHECK(Norm::product(NormKind::Euclidean, 1, 3)(vec({1.0, -2.0, 0.5})) == 2.0);
  CHECK(Norm::product(NormKind::Euclidean, 1, 3).dual(vec({1.0, -2.0, 0.5})) == 3.5);
  CHECK_THROWS(Norm::box(NormKind::Max, 2)(vec({1.0, 2.0})));
}

TEST_CASE("point_set_distance examples") {
  CHECK(point_set_distance(vec({0.0}), line({0.0})) == ExtReal(0.0));
  CHECK(point_set_distance(vec({0.0, 0.0}), plane({{3.0, 4.0}})) == ExtReal(5.0));
  // oracle: min(|1.5-0|, |1.5-1|, |1.5-2|) = 0.5
  CHECK(point_set_distance(vec({1.5}), line({0.0, 1.0, 2.0})) == ExtReal(0.5));
  CHECK(point_set_distance(vec({1.0}), PointSet<double>(1, Norm::euclidean())).is_infinite());
  CHECK_THROWS_AS(point_set_distance(vec({1.0, 2.0}), line({0.0})), DimensionMismatch);
}

TEST_CASE("gap_distance examples") {
  const auto a = plane({{0.0, 0.0}, {1.0, 1.0}});
  CHECK(gap_distance(a, a) == ExtReal(0.0));
  CHECK(gap_distance(plane({{0.0, 0.0}}), plane({{3.0, 4.0}})) == ExtReal(5.0));
  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(2, 101);
  for (int j = 0; j <= 100; ++j) samples(0, j) = j / 100.0;
  const PointSet<double> seg(samples, Norm::euclidean());
  // oracle: brute force over the 101 pairs
  double best = 1e300;
  for (int j = 0; j <= 100; ++j) best = std::min(best, std::abs(2.0 - j / 100.0));
  CHECK(best == 1.0);
  CHECK(gap_distance(seg, plane({{2.0, 0.0}})) == ExtReal(1.0));
  CHECK(gap_distance(seg, PointSet<double>(2, Norm::euclidean())).is_infinite());
  CHECK_THROWS(gap_distance(seg, plane({{2.0, 0.0}}, Norm::max())));
  CHECK_THROWS_AS(gap_distance(seg, line({0.0})), DimensionMismatch);
}

TEST_CASE("uniform neighborhood and diameter examples") {
  CHECK(uniform_neighborhood_contains(line({0.0}), 1.0, vec({1.0})));
  CHECK_FALSE(uniform_neighborhood_contains(line({0.0}), 1.0, vec({1.0001})));
  CHECK_FALSE(uniform_neighborhood_contains(line({0.0, 2.0}), 0.5, vec({1.4})));
  CHECK_THROWS(uniform_neighborhood_contains(line({0.0}), -0.1, vec({0.0})));
  CHECK(diameter(line({7.0})) == 0.0);
  CHECK(diameter(PointSet<double>(1, Norm::euclidean())) == 0.0);
  CHECK(diameter(plane({{0.0, 0.0}, {3.0, 4.0}})) == 5.0);
  CHECK(diameter(line({0.0, 1.0, 5.0})) == 5.0);
}

TEST_CASE("point sets deduplicate and reject non-finite input") {
  CHECK(line({1.0, 0.0, 1.0, 0.0, 2.0}).size() == 3);
  const auto s = line({1.0, 0.0, 1.0});
  CHECK(s.point(0)(0) == 1.0);
  CHECK(s.point(1)(0) == 0.0);
  CHECK_THROWS(line({std::numeric_limits<double>::infinity()}));
}

TEST_CASE("mesh layout, lookups and balls") {
  const Mesh m = Mesh::interval(-1.0, 1.0, 0.25);
  CHECK(m.node_count() == 9);
  CHECK(m.node(0)(0) == -1.0);
  CHECK(m.node(8)(0) == 1.0);
  CHECK(*m.find_node(vec({0.5})) == 6);
  CHECK_FALSE(m.find_node(vec({0.3})).has_value());
  CHECK(m.nearest_node(vec({0.3})) == 5);
  CHECK(m.ball(vec({0.0}), 0.5).size() == 5);
  CHECK(m.snap_radius(0.5) == doctest::Approx(0.625));
  CHECK(m.snap_radius(0.0) == 0.0);

  const Mesh sq(Box{vec({0.0, 0.0}), vec({1.0, 1.0})}, vec({0.5}), Norm::taxicab());
  CHECK(sq.node_count() == 9);
  CHECK(sq.node(1)(0) == 0.5);
  CHECK(sq.node(1)(1) == 0.0);
  CHECK(sq.ball(vec({0.5, 0.5}), 0.5).size() == 5);

  const Mesh p = Mesh::power(m, 2);
  CHECK(p.node_count() == 81);
  CHECK(p.norm() == Norm::product(NormKind::Euclidean, 1, 2));
}

TEST_CASE("property: distance functions are nonexpansive") {
  testgen::Rng rng(0xD15u);
  for (int trial = 0; trial < 200; ++trial) {
    const int kind = rng.integer(0, 2);
    const Norm norm(static_cast<NormKind>(kind));
    const int d = rng.integer(1, 3);
    const int count = rng.integer(1, 12);
    Eigen::MatrixXd m(d, count);
    for (int j = 0; j < count; ++j)
      for (int r = 0; r < d; ++r) m(r, j) = rng.uniform(-2, 2);
    const PointSet<double> s(m, norm);
    Eigen::VectorXd x(d), y(d);
    for (int r = 0; r < d; ++r) {
      x(r) = rng.uniform(-3, 3);
      y(r) = rng.uniform(-3, 3);
    }
    const double dx = point_set_distance(x, s).value();
    const double dy = point_set_distance(y, s).value();
    CHECK(std::abs(dx - dy) <= norm(x - y) + 1e-12);
    // triangle inequality on a sampled triple
    CHECK(norm(x - y) <= norm(x - s.point(0)) + norm(s.point(0) - y) + 1e-12);
    CHECK(norm(x - y) == doctest::Approx(norm(y - x)));
  }
}

TEST_CASE("property: gap distance symmetry, bounds and diameter monotonicity") {
  testgen::Rng rng(0x6A9u);
  for (int trial = 0; trial < 150; ++trial) {
    const Norm norm(static_cast<NormKind>(rng.integer(0, 2)));
    const int d = rng.integer(1, 3);
    auto random_set = [&](int count) {
      Eigen::MatrixXd m(d, count);
      for (int j = 0; j < count; ++j)
        for (int r = 0; r < d; ++r) m(r, j) = rng.uniform(-2, 2);
      return m;
    };
    const Eigen::MatrixXd ma = random_set(rng.integer(1, 10));
    const PointSet<double> a(ma, norm);
    const PointSet<double> b(random_set(rng.integer(1, 10)), norm);
    const ExtReal ab = gap_distance(a, b);
    CHECK(ab == gap_distance(b, a));
    for (Eigen::Index j = 0; j < a.size(); ++j) CHECK(ab <= point_set_distance(a.point(j), b));

    // oracle: plain double loop on std::vector copies
    double oracle = 1e300;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      for (Eigen::Index j = 0; j < b.size(); ++j) {
        std::vector<double> p(a.point(i).data(), a.point(i).data() + d);
        std::vector<double> q(b.point(j).data(), b.point(j).data() + d);
        oracle = std::min(oracle, testgen::dist(p, q, static_cast<int>(norm.kind())));
      }
    CHECK(ab.value() == doctest::Approx(oracle).epsilon(1e-14));

    // nested prefix sets
    double prev = 0.0;
    for (Eigen::Index k = 1; k <= ma.cols(); ++k) {
      const double dk = diameter(PointSet<double>(ma.leftCols(k), norm));
      CHECK(dk >= prev);
      prev = dk;
    }
  }
}
