#include "doctest.h"
#include "support/gen.hpp"
#include "support/models.hpp"

#include "varan/uniform_infimum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace varan;
using namespace testmodels;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent oracle: double loop over rungs and nodes.
double brute_uniform_inf(const Eigen::VectorXd& vals, const Region& s, const Mesh& mesh, const std::vector<double>& rungs) {
  double best = -kInf;
  for (double d : rungs) {
    double low = kInf;
    for (Eigen::Index j = 0; j < mesh.node_count(); ++j)
      if (s.distance(mesh.node(j)) <= d) low = std::min(low, vals(j));
    best = std::max(best, low);
  }
  return best;
}

LimitConfig nogood_config(int k_max, double tol) {
  LimitConfig c = config(16, tol);
  c.delta_ladder = geometric_ladder(0.5, 0.5, k_max);
  return c;
}

Point origin(int dim) { return Eigen::VectorXd::Zero(dim); }

}  // namespace

TEST_CASE("uniform infimum examples") {
  const Mesh mesh = Mesh::interval(-1, 1, 1e-3);
  const auto cfg = config(16, 1e-6);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const auto trace = uniform_infimum_trace(sq, Region::singleton(vec({0})), mesh, cfg);
  CHECK(trace.value == ExtReal(0.0));
  CHECK(trace.rungs.size() == 8);  // 2^-9 < 2 * 1e-3
  CHECK(trace.rungs.back() == 0x1.0p-8);

  const FunctionModel f = nogoodlsc(5, 64, 3);
  CHECK(uniform_infimum(f, Region::ball(origin(64), 0.5), nogood_config(3, 1e-6)) == ExtReal(-0.5));
}

TEST_CASE("uniform infimum rejects meshes too coarse for the ladder") {
  const Mesh coarse = Mesh::interval(-1, 1, 0.5);
  const auto cfg = config(4, 1e-6);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  CHECK_THROWS_AS(uniform_infimum(sq, Region::singleton(vec({0})), coarse, cfg), std::invalid_argument);
  const Mesh fine = Mesh::interval(-1, 1, 0.01);
  CHECK_THROWS_AS(uniform_infimum(sq, Region::singleton(vec({5})), fine, cfg), std::invalid_argument);
}

TEST_CASE("property: uniform infimum matches the double-loop oracle") {
  testgen::Rng rng(4101);
  const auto cfg = config(8, 1e-6);
  for (int trial = 0; trial < 30; ++trial) {
    CAPTURE(trial);
    const double h = 1.0 / rng.integer(40, 200);
    const Mesh mesh = Mesh::interval(-1, 1, h);
    // jumps to -1 on a sequence accumulating at a random shell around the origin
    const double shell = rng.uniform(0.05, 0.6);
    Eigen::VectorXd vals(mesh.node_count());
    for (Eigen::Index j = 0; j < mesh.node_count(); ++j) {
      const double x = mesh.node(j)(0);
      vals(j) = x <= 0 ? 0.0 : x;
      for (int k = 1; k < 12; ++k)
        if (std::abs(std::abs(x) - shell - std::ldexp(1.0, -k)) < h / 2) vals(j) = -1.0 + rng.uniform(0, 0.01);
      if (std::abs(x - 1.0) < h / 2) vals(j) = kInf;
    }
    const auto f = FunctionModel::tabulated("f", mesh, vals);
    const auto s = rng.coin() ? Region::singleton(vec({0})) : Region::ball(vec({0}), shell);
    const auto rungs = effective_ladder(cfg, mesh);
    const auto trace = uniform_infimum_trace(f, s, mesh, cfg);
    CHECK(trace.value.raw() == brute_uniform_inf(vals, s, mesh, rungs));
    for (std::size_t k = 1; k < trace.per_rung.size(); ++k) CHECK(trace.per_rung[k - 1] <= trace.per_rung[k]);
    CHECK(trace.value <= inf_over_region(f, s, mesh));
  }
}

TEST_CASE("penalty values") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const Region origin1 = Region::singleton(vec({0}));
  PenaltySpec spec;
  const auto id = analytic1("id", -1, 1, [](double x) { return x; });
  CHECK(penalty_value(id, origin1, 2.0, spec, mesh) == ExtReal(0.0));
  CHECK(penalty_value(id, origin1, 0.5, spec, mesh) == ExtReal(-0.5));

  const auto ind = indicator(origin1, interval_box(-1, 1));
  const auto c = analytic1("c", -1, 1, [](double) { return 0.75; });
  for (double n : {1.0, 3.5, 100.0}) {
    CHECK(penalty_value(ind, origin1, n, spec, mesh) == ExtReal(0.0));
    CHECK(penalty_value(c, Region::ball(vec({0.5}), 0.1), n, spec, mesh) == ExtReal(0.75));
  }
  CHECK_THROWS_AS(penalty_value(id, origin1, 0.0, spec, mesh), std::invalid_argument);
}

TEST_CASE("penalty limit examples") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 256);
  const auto cfg = config(16, 1e-3);
  const Region origin1 = Region::singleton(vec({0}));
  PenaltySpec spec;
  spec.n_schedule = {1, 2, 4, 8, 16, 32, 64, 128};

  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const auto lim = penalty_limit(sq, origin1, spec, mesh, cfg);
  CHECK(lim.limit == ExtReal(0.0));
  CHECK(lim.uniform_inf == ExtReal(0.0));
  CHECK(lim.verdict.holds());

  const auto absf = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  for (double p : {1.0, 2.0}) {
    spec.exponent = p;
    const auto r = penalty_limit(absf, origin1, spec, mesh, cfg);
    CHECK(r.verdict.holds());
    CHECK(r.limit == ExtReal(0.0));
  }

  PenaltySpec nog;
  for (int n = 1; n <= 16; ++n) nog.n_schedule.push_back(n);
  const auto ex = penalty_limit(nogoodlsc(5, 64, 3), Region::ball(origin(64), 0.5), nog, nogood_config(3, 1e-3));
  CHECK(ex.verdict.holds());
  CHECK(ex.uniform_inf == ExtReal(-0.5));
  CHECK(ex.limit.value() == doctest::Approx(-0.5).epsilon(2e-3));

  PenaltySpec bad;
  bad.n_schedule = {2, 1};
  CHECK_THROWS_AS(penalty_limit(sq, origin1, bad, mesh, cfg), std::invalid_argument);
  bad.n_schedule = {1, 2};
  bad.exponent = 0.0;
  CHECK_THROWS_AS(penalty_limit(sq, origin1, bad, mesh, cfg), std::invalid_argument);
  spec.exponent = 1.0;
  const auto off = indicator(Region::singleton(vec({0.5})), interval_box(-1, 1));
  CHECK_THROWS_AS(penalty_limit(off, origin1, spec, mesh, cfg), std::invalid_argument);
}

TEST_CASE("property: penalty values are monotone and below the plain infimum") {
  testgen::Rng rng(4302);
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    Eigen::VectorXd vals(mesh.node_count());
    for (Eigen::Index j = 0; j < mesh.node_count(); ++j) vals(j) = rng.uniform(-1, 1);
    const auto f = FunctionModel::tabulated("f", mesh, vals);
    const auto s = Region::ball(vec({rng.uniform(-0.5, 0.5)}), rng.uniform(0, 0.3));
    PenaltySpec spec;
    spec.exponent = rng.coin() ? 1.0 : rng.uniform(0.5, 3.0);
    const ExtReal plain = inf_over_region(f, s, mesh);
    double prev = -kInf;
    for (double n = 0.5; n < 5000; n *= 2.5) {
      const ExtReal v = penalty_value(f, s, n, spec, mesh);
      CHECK(prev <= v.raw());
      CHECK(v <= plain);
      prev = v.raw();
    }
  }
}

TEST_CASE("penalty sweeps do not depend on evaluation order") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 128);
  const auto f = analytic1("wave", -1, 1, [](double x) { return std::sin(7 * x) + (x > 0.3 ? -1.0 : 0.0); });
  const Region s = Region::ball(vec({0.0}), 0.25);
  PenaltySpec spec;
  std::vector<double> ns;
  for (int k = 0; k < 24; ++k) ns.push_back(std::pow(1.6, k));
  std::vector<ExtReal> ordered;
  for (double n : ns) ordered.push_back(penalty_value(f, s, n, spec, mesh));
  std::vector<std::size_t> idx(ns.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), std::mt19937_64(17));
  for (std::size_t i : idx) CHECK(penalty_value(f, s, ns[i], spec, mesh) == ordered[i]);
}

TEST_CASE("robustness reports") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(8, 1e-6);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const auto cont = robustness(sq, Region::ball(vec({0}), 0.25), mesh, cfg);
  CHECK(cont.robust);
  CHECK(cont.r_value == cont.plain_inf);
  // off-center minimum: the gap is the Lipschitz constant times the smallest usable rung
  const auto shifted_sq = analytic1("sq", -1, 1, [](double x) { return (x - 0.5) * (x - 0.5); });
  const auto near = robustness(shifted_sq, Region::ball(vec({0}), 0.25), mesh, config(8, 0.05));
  CHECK(near.robust);
  CHECK(near.gap == doctest::Approx(0.0625 - 0.21875 * 0.21875));
  CHECK_FALSE(robustness(shifted_sq, Region::ball(vec({0}), 0.25), mesh, cfg).robust);

  const auto nog = robustness(nogoodlsc(5, 64, 3), Region::ball(origin(64), 0.5), nogood_config(3, 1e-6));
  CHECK(nog.r_value == ExtReal(-0.5));
  CHECK(nog.plain_inf.value() == doctest::Approx(-1.0 / 3.0));
  CHECK_FALSE(nog.robust);
  CHECK(nog.gap == doctest::Approx(1.0 / 6.0));

  const Mesh unit = Mesh::interval(0, 1, 1.0 / 64);
  const auto spike = indicator(Region::singleton(vec({0})), interval_box(0, 1));
  const auto empty = robustness(spike, Region::singleton(vec({1})), unit, cfg);
  CHECK(empty.r_value.is_infinite());
  CHECK(empty.plain_inf.is_infinite());
  CHECK(empty.robust);
  CHECK(empty.gap == 0.0);
  CHECK(to_json(empty)["r_value"] == "+inf");
}

TEST_CASE("sparse counterexample model") {
  const FunctionModel f = nogoodlsc(5, 64, 3);
  CHECK(f.kind() == ModelKind::FiniteException);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(64);
  p(1) = 1.0;
  p(0) = 0.5;
  CHECK(f(p) == ExtReal(-1.0));
  CHECK(f(origin(64)) == ExtReal(0.0));
  CHECK_THROWS_AS(nogoodlsc(5, 64, 4), TruncationTooSmall);

  const auto ex = nogood_exact(5, 64);
  CHECK(ex.table.size() == 5u * 63u);
  for (std::size_t j = 0; j < ex.table.size(); ++j) {
    const auto [m, i] = ex.labels[j];
    CHECK(ex.table.sq_dist[j] > Rational(1, std::int64_t{m} * m));
    CHECK(ex.table.sq_dist[j] == Rational(1, std::int64_t{m} * m) * (Rational(1) + Rational(1, std::int64_t{i} * i)));
    CHECK(ex.table.values[j] == Rational(-1, m));
  }
}

TEST_CASE("sparse counterexample table is exact") {
  CHECK(nogood_default_k_max(1) == 1);
  CHECK(nogood_default_k_max(2) == 2);
  CHECK(nogood_default_k_max(5) == 5);

  const auto small = nogood_table(2, 64);
  REQUIRE(small.size() == 2);
  CHECK(small[0].r == Rational(-1));
  CHECK(small[0].inf == Rational(-1, 2));
  CHECK(small[1].r == Rational(-1, 2));
  CHECK(small[1].inf == Rational(-1, 3));

  const auto rows = nogood_table(5, 256);
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    CHECK(row.r == Rational(-1, row.n));
    CHECK(row.inf == Rational(-1, row.n + 1));
  }

  try {
    nogood_table(1, 4, 3);
    FAIL("expected refusal");
  } catch (const TruncationTooSmall& e) {
    CHECK(e.required() == 16);
  }
}

TEST_CASE("bridge between the ball inequality and penalty convergence") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 128);
  const auto cfg = config(64, 0.05);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const auto inner = carac_W_bridge(sq, Region::ball(vec({0}), 0.25), vec({0}), 1.0, 0.6, mesh, cfg);
  CHECK(inner.inequality.holds());
  CHECK(inner.wijsman.holds());

  const auto whole = carac_W_bridge(sq, Region::box(interval_box(-1, 1)), vec({0.25}), 2.0, 0.6, mesh, cfg);
  CHECK(whole.inequality.holds());
  CHECK(whole.wijsman.holds());

  const FunctionModel f = nogoodlsc(5, 64, 3);
  LimitConfig ncfg = nogood_config(3, 1e-3);
  ncfg.radius_ladder = {1.0, 0.75};
  const auto broken = carac_W_bridge(f, Region::ball(origin(64), 0.5), origin(64), 1.0, 1.01, ncfg);
  CHECK(broken.inequality.fails());
  CHECK(broken.wijsman.fails());

  LimitConfig small = nogood_config(3, 1e-3);
  const auto fine = carac_W_bridge(f, Region::ball(origin(64), 0.5), origin(64), 1.0, 0.3, small);
  CHECK(fine.inequality.holds());
  CHECK(fine.wijsman.holds());
}
