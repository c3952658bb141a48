#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fks/errors.hpp"
#include "fks/sde.hpp"
#include "fks/stats.hpp"
#include "test_util.hpp"

using namespace fks;

namespace {

AdditiveNoiseSde raw_sde(std::function<double(double, double)> a, std::function<double(double)> s,
                         double x0 = 0.0) {
  return AdditiveNoiseSde{"raw", std::move(a), std::move(s), [x0](SeedSpec) { return x0; }, ""};
}

double sup_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Half-open cell maxima of |xbar - spline|, the left-hand side of the decomposition.
double decomposition_gap(const CompositeApprox& c, const SamplePath& xbar) {
  double lhs = 0.0;
  for (std::size_t l = 0; l < c.cell_errors.size(); ++l) {
    lhs = std::max(lhs, std::abs(c.coarse.sigma_values[static_cast<Index>(l)]) * c.cell_errors[l]);
  }
  const double rhs = grid_sup_distance(c.spline, xbar);
  return std::abs(lhs - rhs);
}

}  // namespace

TEST_CASE("presets and validation") {
  for (const auto& name : preset_names()) CHECK(sde_preset(name).name == name);
  CHECK_THROWS_AS(sde_preset("gbm"), ConfigError);
  CHECK_THROWS_AS(make_sde("zero", [](double, double) { return 0.0; }, [](double) { return 0.0; },
                           [](SeedSpec) { return 0.0; }),
                  ConfigError);
  CHECK_THROWS_AS(make_sde("sign-change", [](double, double) { return 0.0; },
                           [](double t) { return t - 0.5; }, [](SeedSpec) { return 0.0; }),
                  ConfigError);
  const AdditiveNoiseSde td = sde_preset("time-drift");
  CHECK(td.initial_value({1, 2}) == td.initial_value({1, 2}));
  CHECK(td.initial_value({1, 2}) != td.initial_value({1, 3}));
  CHECK(sde_preset("ou").initial_value({1, 2}) == 0.0);
}

TEST_CASE("time-drift initial values are standard normal") {
  const AdditiveNoiseSde td = sde_preset("time-drift");
  std::vector<double> x0;
  for (std::uint64_t i = 0; i < 5000; ++i) x0.push_back(td.initial_value({8, i}));
  CHECK(ks_standard_normal(x0).p_value > 0.01);
}

TEST_CASE("sigma norms") {
  CHECK(sigma_l2_norm(sde_preset("ou")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigma_sup_norm(sde_preset("ou")) == 1.0);
  CHECK(sigma_l2_norm(sde_preset("ramp-sigma")) == doctest::Approx(std::sqrt(13.0 / 3.0)).epsilon(1e-10));
  CHECK(sigma_sup_norm(sde_preset("ramp-sigma")) == 3.0);
}

TEST_CASE("reference solution examples") {
  const SamplePath w = testing::brownian(1024, 1);
  const SamplePath x = reference_solution(sde_preset("bm"), w, 0.0);
  CHECK((x.values().array() == w.values().array()).all());

  const SamplePath zero(FineGrid(1024), Eigen::VectorXd::Zero(1025));
  const SamplePath ramp = reference_solution(raw_sde([](double, double) { return 1.0; }, [](double) { return 1.0; }), zero, 0.0);
  for (Index i = 0; i <= 1024; ++i) REQUIRE(ramp[i] == zero.time(i));
}

TEST_CASE("reference solutions at M and M/4 agree") {
  const AdditiveNoiseSde ou = sde_preset("ou");
  const Index m = Index{1} << 16;
  const double bound = 4.0 * std::sqrt(std::log(static_cast<double>(m)) / static_cast<double>(m));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const SamplePath w = testing::brownian(m, 500 + s);
    Eigen::VectorXd coarse_w(m / 4 + 1);
    for (Index i = 0; i <= m / 4; ++i) coarse_w[i] = w[4 * i];
    const SamplePath wc(FineGrid(m / 4), coarse_w);
    const SamplePath fine = reference_solution(ou, w, 0.0);
    const SamplePath coarse = reference_solution(ou, wc, 0.0);
    double d = 0.0;
    for (Index i = 0; i <= m / 4; ++i) d = std::max(d, std::abs(fine[4 * i] - coarse[i]));
    CHECK(d <= bound);
  }
}

TEST_CASE("coarse steps and snapping") {
  CHECK(coarse_steps(16, 0.75) == 8);
  CHECK(coarse_steps(512, 0.75) == 107);
  CHECK(coarse_steps(81, 0.75) == 27);
  CHECK_THROWS_AS(coarse_steps(64, 0.5), ConfigError);
  CHECK_THROWS_AS(coarse_steps(64, 1.0), ConfigError);
  CHECK(snap_coarse_index(0, 3, 100) == 0);
  CHECK(snap_coarse_index(1, 3, 100) == 33);
  CHECK(snap_coarse_index(2, 3, 100) == 67);
  CHECK(snap_coarse_index(3, 3, 100) == 100);
}

TEST_CASE("euler_coarse examples") {
  const SamplePath w = testing::brownian(1024, 2);
  const CoarseScheme bm = euler_coarse(sde_preset("bm"), w, 0.0, 16);
  for (Index l = 0; l <= 16; ++l) CHECK(bm.euler_values[l] == doctest::Approx(w[bm.indices[static_cast<std::size_t>(l)]]).epsilon(1e-14));

  const SamplePath zero(FineGrid(1024), Eigen::VectorXd::Zero(1025));
  const CoarseScheme decay = euler_coarse(raw_sde([](double, double x) { return -x; }, [](double) { return 0.0; }), zero, 1.0, 2);
  CHECK(decay.euler_values[0] == 1.0);
  CHECK(decay.euler_values[1] == 0.5);
  CHECK(decay.euler_values[2] == 0.25);

  const CoarseScheme ramp = euler_coarse(sde_preset("ramp-sigma"), w, 0.0, 4);
  REQUIRE(ramp.sigma_values.size() == 4);
  CHECK(ramp.sigma_values[0] == 1.0);
  CHECK(ramp.sigma_values[1] == 1.5);
  CHECK(ramp.sigma_values[2] == 2.0);
  CHECK(ramp.sigma_values[3] == 2.5);

  CHECK_THROWS_AS(euler_coarse(sde_preset("ou"), testing::brownian(8, 3), 0.0, 9), ConfigError);
}

TEST_CASE("euler recursion holds exactly") {
  const AdditiveNoiseSde sde = sde_preset("time-drift");
  const SamplePath w = testing::brownian(3000, 4);
  const CoarseScheme c = euler_coarse(sde, w, 0.7, 37);
  for (Index l = 0; l < 37; ++l) {
    const Index i0 = c.indices[static_cast<std::size_t>(l)];
    const Index i1 = c.indices[static_cast<std::size_t>(l) + 1];
    const double expected = c.euler_values[l] +
                            sde.drift(c.times[l], c.euler_values[l]) * (static_cast<double>(i1 - i0) * w.grid().step()) +
                            sde.diffusion(c.times[l]) * (w[i1] - w[i0]);
    REQUIRE(c.euler_values[l + 1] == expected);
  }
}

TEST_CASE("knot budget examples and sandwich") {
  const KnotBudget flat = knot_budget(Eigen::VectorXd::Constant(10, 2.0), 100, 10);
  for (Index m : flat.m) CHECK(m == 10);
  Eigen::VectorXd sq(2);
  sq << 1.0, 3.0;
  CHECK(knot_budget_from_squares(sq, 10, 2).m == std::vector<Index>{3, 7});
  CHECK_THROWS_AS(knot_budget(Eigen::VectorXd::Ones(5), 5, 5), ConfigError);
  CHECK_THROWS_AS(uniform_budget(3, 4), ConfigError);

  testing::Gen gen(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const Index n = gen.integer(1, 60);
    const Index k = gen.integer(n + 1, 4000);
    Eigen::VectorXd sig(n);
    for (Index l = 0; l < n; ++l) sig[l] = gen.uniform(0.05, 5.0) * (gen.uniform() < 0.5 ? -1.0 : 1.0);
    for (const KnotBudget& b : {knot_budget(sig, k, n), uniform_budget(k, n)}) {
      const Index total = b.total_knots();
      REQUIRE(k - n <= total);
      REQUIRE(total <= k + 1);
    }
  }
}

TEST_CASE("star and dagger budgets coincide for constant sigma") {
  for (Index k : {20, 64, 100, 512, 999}) {
    const Index n = coarse_steps(k, 0.75);
    CHECK(knot_budget(Eigen::VectorXd::Constant(n, 1.7), k, n).m == uniform_budget(k, n).m);
  }
}

TEST_CASE("dagger with one cell is the optimal spline of W") {
  const AdditiveNoiseSde bm = sde_preset("bm");
  const SamplePath w = testing::brownian(4096, 6);
  for (int r = 0; r <= 1; ++r) {
    const CoarseScheme c = euler_coarse(bm, w, 0.0, 1);
    const KnotBudget b = knot_budget(c.sigma_values, 25, 1);
    REQUIRE(b.m[0] == 25);
    const CompositeApprox d = build_composite(bm, w, 0.0, c, b, r);
    const OptimalSpline o = optimal_spline(w, 25, r);
    CHECK(d.spline.breakpoints == o.spline.breakpoints);
    const Eigen::VectorXd a = sample_spline(d.spline, w.grid());
    const Eigen::VectorXd e = sample_spline(o.spline, w.grid());
    CHECK((a.tail(4096).array() == e.tail(4096).array()).all());
    CHECK(grid_sup_distance(d.spline, w) == d.cell_errors[0]);

    const CompositeApprox star = build_composite(bm, w, 0.0, c, uniform_budget(25, 1), r);
    CHECK(star.spline.breakpoints == d.spline.breakpoints);
  }
}

TEST_CASE("composite structure") {
  for (const char* name : {"ou", "ramp-sigma", "time-drift"}) {
    const AdditiveNoiseSde sde = sde_preset(name);
    const SamplePath w = testing::brownian(1 << 14, 7);
    const double x0 = sde.initial_value({7, 0});
    for (Index k : {16, 64, 200}) {
      for (int r = 0; r <= 1; ++r) {
        const CompositeApprox d = build_dagger(sde, w, x0, k, 0.75, r);
        CHECK(d.spline.degree_bound == 1);
        CHECK(static_cast<Index>(d.spline.breakpoints.size()) <= k + 1);
        CHECK(d.spline.breakpoints.front() == 0.0);
        CHECK(d.spline.breakpoints.back() == 1.0);
        CHECK(eval_spline(d.spline, 0.0) == x0);
        for (std::size_t j = 1; j < d.spline.breakpoints.size(); ++j) {
          CHECK(d.spline.breakpoints[j] > d.spline.breakpoints[j - 1]);
        }
        for (const auto& p : d.spline.pieces) CHECK(p.coefficients.size() == 2);

        const SamplePath xbar = xbar_process(sde, w, x0, d.coarse.n);
        CHECK(decomposition_gap(d, xbar) <= 1e-12);

        const SamplePath ref = reference_solution(sde, w, x0);
        const double total = grid_sup_distance(d.spline, ref);
        CHECK(total <= sup_diff(ref.values(), xbar.values()) + grid_sup_distance(d.spline, xbar));
      }
    }
  }
}

TEST_CASE("drift-free composite error is |c| times the Brownian cell errors") {
  const double c = -2.5;
  const AdditiveNoiseSde sde = raw_sde([](double, double) { return 0.0; }, [c](double) { return c; });
  const SamplePath w = testing::brownian(1 << 13, 8);
  const CompositeApprox d = build_dagger(sde, w, 0.0, 100, 0.75, 0);
  for (Index l = 0; l < d.coarse.n; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const SamplePath cell = shifted_subpath(w, d.coarse.indices[ul], d.coarse.indices[ul + 1]);
    const OptimalSpline o = optimal_spline(cell, d.budget.m[ul], 0);
    const Eigen::VectorXd fitted = sample_spline(o.spline, cell.grid());
    const double err = (cell.values() - fitted).tail(cell.size() - 1).cwiseAbs().maxCoeff();
    CHECK(d.cell_errors[ul] == err);
  }
  const SamplePath x = reference_solution(sde, w, 0.0);
  double expected = 0.0;
  for (double e : d.cell_errors) expected = std::max(expected, std::abs(c) * e);
  CHECK(grid_sup_distance(d.spline, x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("euler interpolation") {
  const AdditiveNoiseSde bm = sde_preset("bm");
  const SamplePath w = testing::brownian(1024, 9);
  const FreeKnotSpline e = build_euler_interp(bm, w, 0.0, 8);
  CHECK(e.piece_count() == 8);
  for (Index l = 0; l <= 8; ++l) {
    CHECK(eval_spline(e, l / 8.0) == doctest::Approx(w[128 * l]).epsilon(1e-13));
  }
  const double mid = eval_spline(e, (128.0 * 3 + 64) / 1024.0);
  CHECK(mid == doctest::Approx(0.5 * (w[384] + w[512])).epsilon(1e-12));

  const AdditiveNoiseSde ou = sde_preset("ou");
  const SamplePath x = reference_solution(ou, w, 0.0);
  CHECK(grid_sup_distance(build_euler_interp(ou, w, 0.0, 1024), x) <= 1e-14);
}

TEST_CASE("xbar coincides with the coarse Euler values") {
  for (const char* name : {"bm", "ou", "ramp-sigma", "time-drift"}) {
    const AdditiveNoiseSde sde = sde_preset(name);
    const SamplePath w = testing::brownian(5000, 10);
    const double x0 = sde.initial_value({3, 3});
    for (Index n : {1, 7, 64, 333}) {
      const SamplePath xbar = xbar_process(sde, w, x0, n);
      const CoarseScheme c = euler_coarse(sde, w, x0, n);
      for (Index l = 0; l <= n; ++l) REQUIRE(xbar[c.indices[static_cast<std::size_t>(l)]] == c.euler_values[l]);
    }
  }
  const SamplePath w = testing::brownian(2048, 11);
  const SamplePath xbar = xbar_process(sde_preset("bm"), w, 0.0, 32);
  CHECK(sup_diff(xbar.values(), w.values()) <= 1e-13);
}

TEST_CASE("xbar error roughly halves when n doubles") {
  const AdditiveNoiseSde ou = sde_preset("ou");
  const Index m = Index{1} << 15;
  std::vector<double> e16;
  std::vector<double> e32;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const SamplePath w = testing::brownian(m, 700 + s);
    const SamplePath x = reference_solution(ou, w, 0.0);
    e16.push_back(sup_diff(x.values(), xbar_process(ou, w, 0.0, 16).values()));
    e32.push_back(sup_diff(x.values(), xbar_process(ou, w, 0.0, 32).values()));
  }
  const double ratio = median(e32) / median(e16);
  CHECK(ratio >= 0.3);
  CHECK(ratio <= 0.8);
}
