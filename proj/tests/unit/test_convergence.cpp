#include "doctest.h"
#include "support/gen.hpp"
#include "support/models.hpp"

#include "varan/convergence.hpp"
#include "varan/exception_table.hpp"
#include "varan/geometry.hpp"
#include "varan/uniform_infimum.hpp"

#include <cmath>
#include <limits>

using namespace varan;
using namespace testmodels;

namespace {

SetSequence real_sequence(std::function<std::vector<double>(long)> gen) {
  return SetSequence(
      [gen](long n) {
        const auto xs = gen(n);
        Eigen::MatrixXd m(1, static_cast<Eigen::Index>(xs.size()));
        for (std::size_t j = 0; j < xs.size(); ++j) m(0, static_cast<Eigen::Index>(j)) = xs[j];
        return PointSet<double>(std::move(m), Norm::euclidean());
      },
      1, Norm::euclidean());
}

Point pt(double x) { return vec({x}); }

}  // namespace

TEST_CASE("lower and upper limits of set sequences") {
  const auto cfg = config(64, 0.05);
  const auto shrinking = real_sequence([](long n) { return std::vector<double>{1.0 / static_cast<double>(n)}; });
  const auto fixed = real_sequence([](long) { return std::vector<double>{1.0}; });
  const auto alternating = real_sequence([](long n) { return std::vector<double>{n % 2 == 0 ? 1.0 : -1.0}; });

  CHECK(in_lower_limit(pt(0), shrinking, cfg).holds());
  CHECK(in_upper_limit(pt(0), shrinking, cfg).holds());

  const Verdict far = in_lower_limit(pt(0), fixed, cfg);
  CHECK(far.fails());
  CHECK(far.margin == doctest::Approx(1.0));
  CHECK(in_upper_limit(pt(0), fixed, cfg).fails());

  CHECK(in_lower_limit(pt(1), alternating, cfg).fails());
  CHECK(in_upper_limit(pt(1), alternating, cfg).holds());

  CHECK_THROWS_AS(in_lower_limit(vec({0, 0}), shrinking, cfg), DimensionMismatch);
  LimitConfig empty = cfg;
  empty.n_schedule.clear();
  CHECK_THROWS_AS(in_lower_limit(pt(0), shrinking, empty), std::invalid_argument);
}

TEST_CASE("wijsman convergence of sets") {
  const auto cfg = config(64, 0.05);
  const auto s = reals({0.0});
  const auto shrinking = real_sequence([](long n) { return std::vector<double>{1.0 / static_cast<double>(n)}; });
  const auto constant = real_sequence([](long) { return std::vector<double>{0.0}; });
  const auto escaping = real_sequence([](long n) { return std::vector<double>{static_cast<double>(n)}; });

  CHECK(wijsman_sets(constant, s, {pt(-1), pt(0), pt(2)}, cfg).holds());
  CHECK(wijsman_sets(shrinking, s, {pt(-1), pt(0), pt(2)}, cfg).holds());
  CHECK(wijsman_sets(escaping, s, {pt(0)}, cfg).fails());
  CHECK_THROWS_AS(wijsman_sets(constant, s, {}, cfg), std::invalid_argument);
}

TEST_CASE("hit and miss branches") {
  const auto cfg = config(64, 0.05);
  const auto s = reals({0.0});
  const auto constant = real_sequence([](long) { return std::vector<double>{0.0}; });
  const auto shrinking = real_sequence([](long n) { return std::vector<double>{1.0 / static_cast<double>(n)}; });
  const auto intruding = real_sequence([](long n) { return std::vector<double>{0.0, 3.0 - 1.0 / static_cast<double>(n)}; });

  const Verdict hit = hit_and_miss(constant, s, pt(0), 0.0, cfg);
  CHECK(hit.holds());
  CHECK(hit.witness["branch"] == "hit");

  const Verdict miss = hit_and_miss(shrinking, s, pt(3), 1.0, cfg);
  CHECK(miss.holds());
  CHECK(miss.witness["branch"] == "miss");
  CHECK(miss.margin == doctest::Approx(2.0 - 1.0 / 33.0 - 1.0 / 4096.0));

  CHECK(hit_and_miss(intruding, s, pt(3), 1.0, cfg).fails());
  CHECK(hit_and_miss(constant, s, pt(1), 1.0, cfg).witness["branch"] == "vacuous");
  CHECK_THROWS_AS(hit_and_miss(constant, s, pt(1), -1.0, cfg), std::invalid_argument);
}

TEST_CASE("kuratowski convergence of sets") {
  const auto cfg = config(64, 0.05);
  const auto constant = real_sequence([](long) { return std::vector<double>{0.0}; });
  const auto shrinking = real_sequence([](long n) { return std::vector<double>{1.0 / static_cast<double>(n)}; });
  const auto flipping = real_sequence([](long n) { return std::vector<double>{n % 2 == 0 ? 0.0 : 1.0}; });

  CHECK(kuratowski_sets(constant, reals({0.0}), {pt(0), pt(0.5)}, cfg).holds());
  CHECK(kuratowski_sets(shrinking, reals({0.0}), {pt(0), pt(-2)}, cfg).holds());
  CHECK(kuratowski_sets(flipping, reals({0.0, 1.0}), {pt(0)}, cfg).fails());
  CHECK(in_lower_limit(pt(0), flipping, cfg).fails());
  CHECK(in_upper_limit(pt(0), flipping, cfg).holds());
}

TEST_CASE("recovery sequences") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 64);
  const auto cfg = config(32, 0.05);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });

  const auto same = recovery_sequence(constant_sequence(sq), sq, pt(0.25), mesh, cfg);
  CHECK(same.verdict.holds());
  for (const auto& p : same.points) CHECK(p(0) == 0.25);
  CHECK(same.n.front() == 17);
  CHECK(same.radii.back() == cfg.radius_ladder.back());

  const auto spike = indicator(Region::singleton(pt(0)), interval_box(-1, 1));
  const auto env = recovery_sequence(envelope_sequence(spike, mesh), spike, pt(0), mesh, cfg);
  CHECK(env.verdict.holds());
  for (const auto& p : env.points) CHECK(p(0) == 0.0);

  const auto id = analytic1("id", -1, 1, [](double x) { return x; });
  const auto up = analytic1("id+1", -1, 1, [](double x) { return x + 1; });
  CHECK(recovery_sequence(constant_sequence(up), id, pt(0), mesh, cfg).verdict.fails());

  CHECK_THROWS_AS(recovery_sequence(constant_sequence(spike), spike, pt(0.5), mesh, cfg), std::invalid_argument);
  CHECK_THROWS_AS(recovery_sequence(constant_sequence(sq), sq, pt(0.001), mesh, cfg), std::invalid_argument);
}

TEST_CASE("radius ladder is stretched over the schedule") {
  LimitConfig cfg = config(20, 0.05);
  cfg.radius_ladder = {0.5, 0.25, 0.125, 0.0625};
  CHECK(recovery_radius(cfg, 0, 20) == 0.5);
  CHECK(recovery_radius(cfg, 4, 20) == 0.5);
  CHECK(recovery_radius(cfg, 5, 20) == 0.25);
  CHECK(recovery_radius(cfg, 19, 20) == 0.0625);
}

TEST_CASE("lambda ladder snapping") {
  const Mesh mesh = Mesh::interval(-1, 1, 0.1);
  LimitConfig cfg = config(8, 0.05);
  cfg.radius_ladder = {0.5, 0.25, 0.05};
  const auto free = lambda_ladder(cfg, 0.4, nullptr);
  CHECK(free == std::vector<double>{0.0, 0.05, 0.25});
  const auto snapped = lambda_ladder(cfg, 0.4, &mesh);
  REQUIRE(snapped.size() == 3);
  CHECK(snapped[1] == doctest::Approx(0.05));
  CHECK(snapped[2] == doctest::Approx(0.25));
}

TEST_CASE("wijsman convergence of functions at a point") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 32);
  const auto cfg = config(32, 0.05);
  const auto absf = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });

  CHECK(wijsman_at_point(constant_sequence(absf), absf, pt(0.5), 0.6, mesh, cfg).holds());

  const auto env = envelope_sequence(absf, mesh);
  for (Eigen::Index j = 0; j < mesh.node_count(); j += 8) {
    const Verdict v = wijsman_at_point(env, absf, mesh.node(j), 0.6, mesh, cfg);
    CHECK(v.holds());
    CHECK(v.witness["max_verified_radius"].get<double>() < 0.6);
  }

  const auto raised = analytic1("abs+1", -1, 1, [](double x) { return std::abs(x) + 1; });
  CHECK(wijsman_at_point(constant_sequence(raised), absf, pt(0), 0.6, mesh, cfg).fails());
  // values below the limit violate the ball inequality even without recovery
  const auto spike = indicator(Region::singleton(pt(0)), interval_box(-1, 1));
  const auto lowered = analytic1("abs-1", -1, 1, [](double x) { return std::abs(x) - 1; });
  const Verdict low = wijsman_at_point(constant_sequence(lowered), spike, pt(0.5), 0.3, mesh, cfg);
  CHECK(low.fails());
  CHECK(low.witness["recovery"] == "vacuous");
}

TEST_CASE("epi-convergence is the zero-radius test") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 32);
  const auto cfg = config(32, 0.05);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const Verdict v = epi_at_point(constant_sequence(sq), sq, pt(0.25), mesh, cfg);
  CHECK(v.holds());
  CHECK(v.witness["lambdas"].size() == 1);
  const auto g = analytic1("g", -1, 1, [](double x) { return std::abs(x); });
  CHECK(epi_at_point(perturbed_sequence(sq, g), sq, pt(0.25), mesh, cfg).holds());
}

TEST_CASE("envelope of the sparse counterexample keeps ball infima below the limit") {
  const FunctionModel f = nogoodlsc(5, 64, 3);
  LimitConfig cfg = config(64, 1e-3);
  cfg.delta_ladder = geometric_ladder(0.5, 0.5, 3);
  const Point origin = Eigen::VectorXd::Zero(64);
  const Verdict v = envelope_wijsman_at_point(f, origin, 0.6, cfg);
  CHECK(v.holds());

  const auto t = exception_table(f, origin);
  for (int k = 2; k <= 4; ++k) {
    const double lambda = 1.0 / k;
    const double plain = inf_over_ball(t, lambda);
    CHECK(plain == doctest::Approx(-1.0 / (k + 1)));
    for (long n : cfg.window()) CHECK(envelope_inf(t, static_cast<double>(n), lambda) < plain - 0.5 / (k * (k + 1)));
  }
}

TEST_CASE("slice convergence over sampled directions") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 32);
  const auto cfg = config(64, 0.05);
  const auto sq = analytic1("sq", -1, 1, [](double x) { return x * x; });
  const auto g = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  const auto dirs = default_directions(1, 7);
  CHECK(dirs.front().isZero());
  CHECK(dirs[1](0) == 1.0);
  CHECK(dirs[2](0) == -1.0);
  for (const auto& d : dirs) CHECK((d.norm() == 0.0 || d.norm() == 1.0 || d.norm() == 4.0));

  const Verdict same = slice_at_point(constant_sequence(sq), sq, pt(0.25), 0.6, dirs, mesh, cfg);
  CHECK(same.holds());
  CHECK(same.witness["directions"].size() == dirs.size());

  CHECK(slice_at_point(perturbed_sequence(sq, g), sq, pt(0.25), 0.6, dirs, mesh, cfg).holds());

  const auto zero_only = std::vector<Eigen::VectorXd>{Eigen::VectorXd::Zero(1)};
  const auto seq = perturbed_sequence(sq, g);
  CHECK(slice_at_point(seq, sq, pt(0.5), 0.6, zero_only, mesh, cfg).status ==
        wijsman_at_point(seq, sq, pt(0.5), 0.6, mesh, cfg).status);

  CHECK_THROWS_AS(slice_at_point(seq, sq, pt(0.5), 0.6, {vec({1.0})}, mesh, cfg), std::invalid_argument);
}

TEST_CASE("slice verdicts are tilt equivariant") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 32);
  const auto cfg = config(32, 0.05);
  testgen::Rng rng(91);
  for (int trial = 0; trial < 6; ++trial) {
    const double a = rng.uniform(-1, 1), c = rng.uniform(-0.3, 0.3);
    const auto f = analytic1("f", -1, 1, [a](double x) { return a * x * x + std::abs(x - 0.2); });
    const auto off = analytic1("c", -1, 1, [c](double) { return c; });
    const auto seq = rng.coin() ? perturbed_sequence(f, off) : constant_sequence(sum(f, off));
    const Eigen::VectorXd xs = vec({rng.uniform(-3, 3)});
    const Point x = mesh.node(rng.integer(0, static_cast<int>(mesh.node_count()) - 1));
    const Verdict sliced = slice_at_point(seq, f, x, 0.6, {Eigen::VectorXd::Zero(1), xs}, mesh, cfg);
    const Verdict plain = wijsman_at_point(seq, f, x, 0.6, mesh, cfg);
    const Verdict tilted = wijsman_at_point(tilted_sequence(seq, xs), tilt(f, xs), x, 0.6, mesh, cfg);
    CHECK(sliced.status == conjunction({plain, tilted}).status);
  }
}

TEST_CASE("graph to epigraph gap") {
  const Mesh mesh = Mesh::interval(-1, 1, 0.25);
  const auto lowc = analytic1("-1", -1, 1, [](double) { return -1.0; });
  const auto zero = analytic1("0", -1, 1, [](double) { return 0.0; });
  CHECK(graph_epi_gap(lowc, zero, mesh) == ExtReal(1.0));
  CHECK(graph_epi_gap(zero, lowc, mesh) == ExtReal(0.0));
  const auto far = indicator(Region::singleton(pt(1)), interval_box(-1, 1));
  const auto near = indicator(Region::singleton(pt(-1)), interval_box(-1, 1));
  CHECK(graph_epi_gap(far, near, mesh) == ExtReal(2.0));
}

TEST_CASE("tilt gap pair") {
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 16);
  const auto f = analytic1("abs", -1, 1, [](double x) { return std::abs(x); });
  const auto g = analytic1("abs-1/2", -1, 1, [](double x) { return std::abs(x) - 0.5; });
  const auto pair = tilt_gap_pair(f, g, vec({0.2}), mesh, 0.01);
  CHECK(pair.tol_tilted == doctest::Approx(0.01 / 1.2));
  CHECK(pair.plain.value() > pair.tol_plain);
  CHECK(pair.tilted.value() > pair.tol_tilted);
  CHECK(tilt_gap_invariance(pair, 0.2).holds());
  CHECK(tilt_gap_pair(f, g, vec({2.0}), mesh, 0.01).plain == ExtReal(0.0));

  const auto same = tilt_gap_pair(f, tilt(f, vec({-0.5})), vec({0.5}), mesh, 0.01);
  CHECK(same.tilted == ExtReal(0.0));
  CHECK(tilt_gap_invariance(same, 0.5).holds());

  TiltGapPair broken{ExtReal(1.0), ExtReal(0.0), 0.01, 0.005};
  CHECK(tilt_gap_invariance(broken, 1.0).fails());
  TiltGapPair band{ExtReal(0.0105), ExtReal(0.0099), 0.01, 0.01};
  CHECK(tilt_gap_invariance(band, 0.1).status == Status::Inconclusive);
}

TEST_CASE("property: tilt gap positivity is invariant") {
  testgen::Rng rng(3501);
  const Mesh mesh = Mesh::interval(-1, 1, 1.0 / 16);
  int decisive = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Eigen::VectorXd fv(mesh.node_count()), gv(mesh.node_count());
    const double shift = rng.uniform(-1.5, 0.5);
    for (Eigen::Index j = 0; j < mesh.node_count(); ++j) {
      fv(j) = rng.uniform(-0.5, 0.5) + std::abs(mesh.node(j)(0));
      gv(j) = rng.uniform(-0.5, 0.5) + shift;
      if (rng.uniform() < 0.1) gv(j) = std::numeric_limits<double>::infinity();
    }
    if (gv.minCoeff() == std::numeric_limits<double>::infinity()) gv(0) = 0.0;
    const auto f = FunctionModel::tabulated("f", mesh, fv);
    const auto g = FunctionModel::tabulated("g", mesh, gv);
    const Eigen::VectorXd xs = vec({rng.uniform(-4, 4)});
    const auto pair = tilt_gap_pair(f, g, xs, mesh, 0.02);
    const Verdict v = tilt_gap_invariance(pair, std::abs(xs(0)));
    CAPTURE(trial);
    CHECK_FALSE(v.fails());
    if (v.holds()) ++decisive;
    const double c = 1.0 + std::abs(xs(0));
    if (pair.plain.is_finite() && pair.tilted.is_finite()) {
      CHECK(pair.tilted.value() >= pair.plain.value() / c - 1e-12);
      CHECK(pair.plain.value() >= pair.tilted.value() / c - 1e-12);
    }
  }
  CHECK(decisive > 30);
}

TEST_CASE("property: set convergence notions are consistent") {
  testgen::Rng rng(2101);
  const double tol = 0.01;
  LimitConfig cfg = config(64, tol);
  for (int trial = 0; trial < 40; ++trial) {
    CAPTURE(trial);
    const int k = rng.integer(1, 4);
    std::vector<Eigen::VectorXd> base;
    for (int j = 0; j < k; ++j) base.push_back(vec({rng.uniform(-2, 2), rng.uniform(-2, 2)}));
    const double speed = rng.uniform(0.0, 0.5);
    const bool wandering = rng.uniform() < 0.3;
    const Eigen::VectorXd drift = vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const Eigen::VectorXd stray = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    SetSequence seq(
        [=](long n) {
          std::vector<Eigen::VectorXd> pts;
          for (const auto& b : base) pts.push_back(b + drift * (speed / static_cast<double>(n)));
          if (wandering && n % 2 == 1) pts.push_back(stray);
          return PointSet<double>::from_points(pts, 2, Norm::euclidean());
        },
        2, Norm::euclidean());
    const auto s = PointSet<double>::from_points(base, 2, Norm::euclidean());
    std::vector<Point> probes(base.begin(), base.end());
    for (int j = 0; j < 4; ++j) probes.push_back(vec({rng.uniform(-3, 3), rng.uniform(-3, 3)}));

    const Verdict w = wijsman_sets(seq, s, probes, cfg);
    if (!w.holds()) continue;
    for (const auto& b : base) CHECK(in_lower_limit(b, seq, cfg).holds());
    CHECK_FALSE(kuratowski_sets(seq, s, probes, cfg).fails());
    for (const auto& y : probes) {
      const double lambda = rng.uniform(0.0, 1.0);
      const double gap = std::max(0.0, point_set_distance(y, s).raw() - lambda);
      if (gap > 4 * tol) CHECK(hit_and_miss(seq, s, y, lambda, cfg).holds());
    }
  }
}
