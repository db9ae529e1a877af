#include "doctest.h"
#include "support/gen.hpp"
#include "support/models.hpp"

#include "varan/region.hpp"
#include "varan/slopes.hpp"

#include <cmath>

using namespace varan;
using namespace testmodels;

namespace {

Point pt(double x) { return vec({x}); }

FunctionModel lipschitz1(std::string name, std::function<double(double)> fn, double lip) {
  return FunctionModel::analytic(
      std::move(name), interval_box(-1, 1),
      [fn](const Eigen::Ref<const Eigen::VectorXd>& x) { return ExtReal(fn(x(0))); }, Norm::euclidean(), lip);
}

// 0 on x <= 0, 1 on x > 0 (lower semicontinuous)
FunctionModel jump() {
  return analytic1("jump", -1, 1, [](double x) { return x > 0 ? 1.0 : 0.0; });
}

double brute_slope(const Mesh& mesh, const FunctionModel& f, const Point& x, double r) {
  double best = 0.0;
  const double fx = f(x).raw();
  for (Eigen::Index j = 0; j < mesh.node_count(); ++j) {
    const double d = std::abs(mesh.node(j)(0) - x(0));
    if (d == 0.0 || d > r + 1e-12) continue;
    const ExtReal fy = f(mesh.node(j));
    if (fy.is_finite()) best = std::max(best, (fx - fy.raw()) / d);
  }
  return best;
}

}  // namespace

TEST_CASE("strong slope examples") {
  const Mesh fine = Mesh::interval(-1, 1, 1e-3);
  const auto cfg = config(16, 1e-6);
  const auto id = analytic1("id", -1, 1, [](double x) { return x; });
  CHECK(strong_slope(id, pt(0), fine, cfg).value.raw() == doctest::Approx(1.0).epsilon(1e-3));
  const auto absf = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  CHECK(strong_slope(absf, pt(0), fine, cfg).value.raw() == 0.0);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const SlopeEstimate s = strong_slope(sq, pt(1), fine, cfg);
  CHECK(std::abs(s.value.raw() - 2.0) <= 2e-3);
  CHECK(s.radius_used == cfg.radius_ladder[8]);
  CHECK(s.ratio_trace.size() == 9);

  const auto spike = indicator(Region::singleton(pt(0)), interval_box(-1, 1));
  CHECK(strong_slope(spike, pt(0), fine, cfg).value.raw() == 0.0);
  CHECK_THROWS_AS(strong_slope(spike, pt(0.5), fine, cfg), std::invalid_argument);
  CHECK_THROWS_AS(strong_slope(id, pt(0.0005), fine, cfg), std::invalid_argument);

  LimitConfig coarse = cfg;
  coarse.radius_ladder = {1e-4};
  CHECK_THROWS_AS(strong_slope(id, pt(0), fine, coarse), std::invalid_argument);
}

TEST_CASE("strong slope trace matches brute force and is monotone") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(16, 1e-6);
  testgen::Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), c = rng.uniform(0, 1);
    const auto f = analytic1("poly", -1, 1, [=](double x) { return a * x + b * x * x + c * std::abs(x - 0.2); });
    const Point x = mesh.node(rng.integer(0, static_cast<int>(mesh.node_count()) - 1));
    const SlopeEstimate s = strong_slope(f, x, mesh, cfg);
    for (std::size_t i = 0; i < s.ratio_trace.size(); ++i) {
      const auto [r, v] = s.ratio_trace[i];
      CHECK(v == doctest::Approx(brute_slope(mesh, f, x, r)).epsilon(1e-12));
      if (i > 0) CHECK(v <= s.ratio_trace[i - 1].second);
    }
  }
}

TEST_CASE("slope agrees with the gradient on smooth functions") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 256);
  const auto cfg = config(16, 1e-6);
  testgen::Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-1, 1);
    // |f''| <= 2|b| + 1
    const auto f = analytic1("smooth", -1, 1, [=](double x) { return a * x + b * x * x + std::sin(x); });
    const Eigen::Index j = rng.integer(20, static_cast<int>(mesh.node_count()) - 21);
    const double x = mesh.node(j)(0);
    const double grad = std::abs(a + 2 * b * x + std::cos(x));
    if (grad < 0.05) continue;
    const double slope = strong_slope(f, pt(x), mesh, cfg).value.raw();
    CHECK(std::abs(slope - grad) <= (2 * std::abs(b) + 1) * mesh.resolution());
  }
}

TEST_CASE("ekeland points") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 256);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const EkelandPoint e = ekeland_point(sq, pt(0.5), 0.1, 1.0, mesh);
  CHECK(std::abs(2 * e.point(0)) <= 0.1 + 2 * mesh.resolution());
  CHECK(e.value <= 0.25);
  CHECK(e.moves >= 1);

  const EkelandPoint still = ekeland_point(sq, pt(0), 0.1, 1.0, mesh);
  CHECK(still.point(0) == 0.0);
  CHECK(still.moves == 0);

  const auto id = analytic1("id", -1, 1, [](double x) { return x; });
  CHECK(ekeland_point(id, pt(0), 2.0, 2.0, mesh).point(0) == 0.0);
  CHECK(ekeland_point(id, pt(0), 0.5, 0.25, mesh).point(0) == doctest::Approx(-0.25));

  CHECK_THROWS_AS(ekeland_point(sq, pt(0), 0.0, 1.0, mesh), std::invalid_argument);
  const auto spike = indicator(Region::singleton(pt(0)), interval_box(-1, 1));
  CHECK_THROWS_AS(ekeland_point(spike, pt(0.5), 0.1, 1.0, mesh), std::invalid_argument);
}

TEST_CASE("ekeland postcondition on random tables") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  testgen::Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v(mesh.node_count());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.coin() && rng.coin() ? HUGE_VAL : rng.uniform(-1, 1);
    Eigen::Index start = rng.integer(0, static_cast<int>(v.size()) - 1);
    v(start) = rng.uniform(-1, 1);
    const double sigma = rng.uniform(0.05, 3), radius = rng.uniform(0.05, 2);
    const EkelandPoint e = ekeland_point(v, mesh, start, sigma, radius);
    CHECK(e.value <= v(start));
    CHECK(std::abs(e.point(0) - mesh.node(start)(0)) <= radius + 1e-12);
    for (Eigen::Index y : mesh.ball(mesh.node(start), radius))
      CHECK(e.value <= v(y) + sigma * std::abs(mesh.node(y)(0) - e.point(0)));
  }
}

TEST_CASE("slope stability witnesses") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(32, 0.05);

  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const StabilityWitness same = slope_stability_witness(constant_sequence(sq), sq, pt(0.5), mesh, cfg);
  CHECK(same.verdict.holds());
  for (std::size_t i = 0; i < same.n.size(); ++i) {
    CHECK(same.points[i](0) == 0.5);
    CHECK(same.slopes[i].raw() == same.slope_at_limit);
  }
  CHECK(same.limsup_bound == doctest::Approx(same.slope_at_limit + 0.05));

  const auto absf = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  const StabilityWitness env = slope_stability_witness(envelope_sequence(absf, mesh), absf, pt(0.3125), mesh, cfg);
  CHECK(env.verdict.holds());
  CHECK(env.suffix_max_slope(cfg) <= 1.0 + cfg.tol);
  CHECK(env.level.back() > env.level.front());

  const auto j = jump();
  const StabilityWitness jw = slope_stability_witness(envelope_sequence(j, mesh), j, pt(0), mesh, cfg);
  CHECK(jw.slope_at_limit == 0.0);
  CHECK(jw.verdict.holds());
  CHECK(jw.suffix_max_slope(cfg) <= cfg.tol);
  CHECK(jw.level.back() > 0);

  const auto spike = indicator(Region::singleton(pt(0)), interval_box(-1, 1));
  const StabilityWitness sw = slope_stability_witness(envelope_sequence(spike, mesh), spike, pt(0), mesh, cfg);
  CHECK(sw.verdict.holds());
  CHECK(sw.suffix_max_slope(cfg) <= cfg.tol);

  const auto raised = analytic1("abs+1", -1, 1, [](double x) { return std::abs(x) + 1; });
  CHECK_THROWS_AS(slope_stability_witness(constant_sequence(raised), absf, pt(0), mesh, cfg), PreconditionFailed);
}

TEST_CASE("slope stability under uniform perturbation") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(64, 0.05);
  testgen::Rng rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    const double a = rng.uniform(-1, 1), w = rng.uniform(2, 8);
    const auto f = analytic1("f", -1, 1, [=](double x) { return a * x + std::abs(x - 0.25); });
    const auto g = analytic1("g", -1, 1, [=](double x) { return std::sin(w * x); });
    const Point x = mesh.node(rng.integer(16, 112));
    const StabilityWitness s = slope_stability_witness(perturbed_sequence(f, g), f, x, mesh, cfg);
    CHECK(s.suffix_max_slope(cfg) <= s.slope_at_limit + cfg.tol);
    CHECK_FALSE(s.verdict.fails());
  }
}

TEST_CASE("stationary sequences") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(32, 0.05);

  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const StabilityWitness a = stationary_sequence(constant_sequence(sq), sq, mesh, cfg);
  CHECK(a.verdict.holds());
  CHECK(std::abs(a.points.back()(0)) <= 0.05);

  const auto wells = analytic1("wells", -1, 1, [](double x) { return (x * x - 0.25) * (x * x - 0.25) + 0.1 * x; });
  const double node_min = tabulate(wells, mesh).minCoeff();
  const StabilityWitness b = stationary_sequence(envelope_sequence(wells, mesh), wells, mesh, cfg);
  CHECK(b.verdict.holds());
  CHECK(b.target_value == node_min);
  CHECK(std::abs(b.values.back() - node_min) <= cfg.tol);
  CHECK(b.points.back()(0) < 0);

  const auto ramp = restrict(analytic1("id", -1, 1, [](double x) { return x; }), Region::box(interval_box(0, 1)));
  const auto wiggle = analytic1("sin", -1, 1, [](double x) { return std::sin(10 * x); });
  const StabilityWitness c = stationary_sequence(perturbed_sequence(ramp, wiggle), ramp, mesh, config(64, 0.05));
  CHECK(c.verdict.holds());
  CHECK(std::abs(c.values.back()) <= 0.05);
  CHECK(c.suffix_max_slope(config(64, 0.05)) <= 0.05);
}

TEST_CASE("witness serialization") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 16);
  const auto cfg = config(4, 0.05);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const StabilityWitness w = slope_stability_witness(constant_sequence(sq), sq, pt(0.5), mesh, cfg);
  const Json j = to_json(w);
  CHECK(j["witness"].size() == 4);
  CHECK(j["witness"][0]["n"] == 1);
  const std::string csv = to_csv(w);
  CHECK(csv.rfind("n,x0,value,slope\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(to_csv(strong_slope(sq, pt(0.5), mesh, cfg)).rfind("radius,sup_ratio\n", 0) == 0);
}

TEST_CASE("frechet membership") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 256);
  const auto cfg = config(16, 0.05);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  CHECK(frechet_membership(sq, pt(0), vec({0}), mesh, cfg).holds());
  CHECK(frechet_membership(sq, pt(0), vec({0.5}), mesh, cfg).fails());

  const auto absf = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) CHECK(frechet_membership(absf, pt(0), vec({s}), mesh, cfg).holds());
  for (double s : {-1.5, 1.5}) {
    const Verdict v = frechet_membership(absf, pt(0), vec({s}), mesh, cfg);
    CHECK(v.fails());
    CHECK(v.margin == doctest::Approx(0.5));
  }

  const auto box = indicator(Region::box(interval_box(0, 1)), interval_box(-1, 1));
  CHECK(frechet_membership(box, pt(0), vec({-3}), mesh, cfg).holds());
  CHECK(frechet_membership(box, pt(0), vec({0.5}), mesh, cfg).fails());

  CHECK_THROWS_AS(frechet_membership(absf, pt(0), vec({0, 0}), mesh, cfg), DimensionMismatch);
}

TEST_CASE("frechet forms agree on random instances") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 128);
  const auto cfg = config(16, 0.02);
  testgen::Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const double a = rng.uniform(-1, 1), c = rng.uniform(0, 2), k = rng.uniform(-0.5, 0.5);
    const auto f = analytic1("pl", -1, 1, [=](double x) { return a * x + c * std::abs(x - k); });
    const Point x = mesh.node(rng.integer(0, static_cast<int>(mesh.node_count()) - 1));
    const Eigen::VectorXd xs = vec({rng.uniform(-3, 3)});
    CHECK(frechet_membership(f, x, xs, mesh, cfg).status == frechet_quotient_form(f, x, xs, mesh, cfg).status);
  }
}

TEST_CASE("subdifferential oracles and closest sums") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 4);
  const auto d = distance_oracle(2.0, pt(0));
  CHECK(d(pt(0.5))[0](0) == 2.0);
  CHECK(d(pt(0)).size() == 2);
  CHECK(distance_oracle(1.0, vec({0, 0}))(vec({0, 0})).size() == 4);
  CHECK(zero_oracle(2)(vec({1, 1}))[0].norm() == 0.0);

  const auto absf = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  const auto fo = frechet_oracle(absf, mesh);
  CHECK(fo.provenance == "frechet-sampled");
  const auto at0 = fo(pt(0));
  REQUIRE(at0.size() == 2);
  CHECK(at0[0](0) == -1.0);
  CHECK(at0[1](0) == 1.0);
  CHECK(fo(pt(0.5)).size() == 1);
  CHECK(fo(pt(1)).size() == 1);
  const auto neg = analytic1("-abs", -1, 1, [](double x) { return -std::abs(x); });
  CHECK(frechet_oracle(neg, mesh)(pt(0)).empty());

  const Norm e = Norm::euclidean();
  const SumChoice s1 = closest_sum({vec({-1}), vec({1})}, {vec({0.3})}, e);
  CHECK(s1.norm == 0.0);
  CHECK(s1.xstar(0) == doctest::Approx(-0.3));
  CHECK(closest_sum({vec({2})}, {vec({0.5}), vec({1})}, e).norm == 2.5);
  CHECK(closest_sum({}, {vec({1})}, e).norm == HUGE_VAL);

  // segment [(1,-1),(1,1)] plus segment [(-1,0.5),(-2,0.5)] reaches (0, 0)
  const SumChoice s2 = closest_sum({vec({1, -1}), vec({1, 1})}, {vec({-1, 0.5}), vec({-2, 0.5})}, e);
  CHECK(s2.norm <= 1e-3);
  CHECK(closest_sum({vec({1, 1})}, {vec({1, 1})}, Norm::max()).norm == doctest::Approx(4.0));
}

TEST_CASE("slope control witnesses") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(32, 0.05);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const auto absl = lipschitz1("abs", [](double x) { return std::abs(x); }, 1.0);
  const auto dsq = gradient_oracle([](const Point& x) { return Eigen::VectorXd(2 * x); });
  CHECK(p2_witness(sq, dsq, absl, distance_oracle(1.0, pt(0)), pt(0), mesh, cfg).holds());

  const auto absf = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  const auto idl = lipschitz1("id", [](double x) { return x; }, 1.0);
  CHECK(p2_witness(absf, distance_oracle(1.0, pt(0)), idl, linear_oracle(vec({1})), pt(0), mesh, cfg).holds());

  const auto sinf = analytic1("sin", -1, 1, [](double x) { return std::sin(x); });
  const auto zero = lipschitz1("zero", [](double) { return 0.0; }, 0.0);
  const auto dsin = gradient_oracle([](const Point& x) { return vec({std::cos(x(0))}); });
  const Verdict smooth = p2_witness(sinf, dsin, zero, zero_oracle(1), pt(0.3125), mesh, cfg);
  CHECK(smooth.holds());
  CHECK(smooth.witness["slope_sum"].get<double>() == doctest::Approx(std::cos(0.3125)).epsilon(2 * mesh.resolution()));

  const auto wrong = gradient_oracle([](const Point&) { return vec({3}); });
  CHECK(p2_witness(sinf, wrong, zero, zero_oracle(1), pt(0.3125), mesh, cfg).fails());

  CHECK_THROWS_AS(p2_witness(sinf, dsin, sinf, dsin, pt(0.3125), mesh, cfg), std::invalid_argument);
  CHECK_THROWS_AS(p2_witness(sinf, SubdifferentialOracle{}, zero, zero_oracle(1), pt(0.3125), mesh, cfg),
                  std::invalid_argument);
}

TEST_CASE("stability of slope control along sequences") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(32, 0.05);
  const auto sinf = analytic1("sin", -1, 1, [](double x) { return std::sin(x); });
  const auto zero = lipschitz1("zero", [](double) { return 0.0; }, 0.0);
  const auto dsin = gradient_oracle([](const Point& x) { return vec({std::cos(x(0))}); });
  const OracleSequence dsin_n = [dsin](long) { return dsin; };
  const OracleSequence zero_n = [](long) { return zero_oracle(1); };
  CHECK(sequence_p2_stability(constant_sequence(sinf), dsin_n, constant_sequence(zero), zero_n, sinf, pt(0.3125), mesh, cfg)
            .holds());

  // envelope of the jump: min(1, n x^+)
  const auto j = jump();
  const OracleSequence denv = [](long n) {
    const double slope = static_cast<double>(n);
    return convex_oracle([slope](const Point& x) {
      const double t = x(0);
      if (t < 0 || t > 1 / slope) return std::vector<Eigen::VectorXd>{vec({0})};
      if (t == 0) return std::vector<Eigen::VectorXd>{vec({0}), vec({slope})};
      if (t == 1 / slope) return std::vector<Eigen::VectorXd>{};
      return std::vector<Eigen::VectorXd>{vec({slope})};
    });
  };
  CHECK(sequence_p2_stability(envelope_sequence(j, mesh), denv, constant_sequence(zero), zero_n, j, pt(0), mesh, cfg)
            .holds());

  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const auto dsq = gradient_oracle([](const Point& x) { return Eigen::VectorXd(2 * x); });
  const auto shrinking = FunctionSequence("dist/n", [](long n) {
    const double c = 1.0 / static_cast<double>(n);
    return lipschitz1("dist/n", [c](double x) { return c * std::abs(x - 0.25); }, c);
  });
  const OracleSequence ddist = [](long n) { return distance_oracle(1.0 / static_cast<double>(n), pt(0.25)); };
  const Verdict v = sequence_p2_stability(constant_sequence(sq), [dsq](long) { return dsq; }, shrinking, ddist, sq,
                                          pt(0.25), mesh, cfg);
  CHECK(v.holds());

  const auto raised = analytic1("sin+1", -1, 1, [](double x) { return std::sin(x) + 1; });
  CHECK_THROWS_AS(sequence_p2_stability(constant_sequence(raised), dsin_n, constant_sequence(zero), zero_n, sinf,
                                        pt(0.3125), mesh, cfg),
                  PreconditionFailed);
}
