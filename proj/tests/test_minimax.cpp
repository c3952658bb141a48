#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fks/errors.hpp"
#include "fks/minimax.hpp"
#include "fks/minimax_lp.hpp"
#include "test_util.hpp"

using namespace fks;
using testing::Gen;

namespace {

Eigen::VectorXd residuals(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& c) {
  Eigen::VectorXd r(x.size());
  for (Index i = 0; i < x.size(); ++i) r[i] = y[i] - horner(c, x[i]);
  return r;
}

// Longest alternating run of extremal residuals.
int alternations(const Eigen::VectorXd& res, double level, double rel_tol) {
  int count = 0;
  int last_sign = 0;
  for (Index i = 0; i < res.size(); ++i) {
    if (std::abs(res[i]) < level * (1.0 - rel_tol)) continue;
    const int s = res[i] > 0 ? 1 : -1;
    if (s != last_sign) {
      ++count;
      last_sign = s;
    }
  }
  return count;
}

Eigen::VectorXd random_values(Gen& gen, Index n, int kind) {
  if (kind == 0) return gen.normals(n);
  Eigen::VectorXd v(n);
  v[0] = 0.0;
  for (Index i = 1; i < n; ++i) v[i] = v[i - 1] + gen.normal() * 0.2;
  return v;
}

}  // namespace

TEST_CASE("best_poly examples") {
  SUBCASE("two points, constant") {
    const PolynomialPiece p = best_poly(testing::path_from({0.0, 1.0}), 0, 1, 0);
    CHECK(p.coefficients.size() == 1);
    CHECK(p.coefficients[0] == 0.5);
    CHECK(p.sup_error == 0.5);
  }
  SUBCASE("three points, line") {
    const PolynomialPiece p = best_poly(testing::path_from({0.0, 1.0, 0.0}), 0, 2, 1);
    CHECK(p.coefficients[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(p.coefficients[1]) <= 1e-15);
    CHECK(p.sup_error == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("single point") {
    for (int r = 0; r <= 4; ++r) {
      const PolynomialPiece p = best_poly(testing::path_from({0.0, 3.25, 1.0}), 1, 1, r);
      CHECK(p.coefficients.size() == r + 1);
      CHECK(p.coefficients[0] == 3.25);
      CHECK(p.sup_error == 0.0);
    }
  }
  SUBCASE("empty interval") {
    const SamplePath s = testing::path_from({0.0, 1.0, 2.0});
    CHECK_THROWS_AS(best_poly(s, 2, 1, 0), ArgumentError);
    CHECK_THROWS_AS(best_poly(s, 0, 3, 0), ArgumentError);
    CHECK_THROWS_AS(best_poly(s, 0, 2, -1), ArgumentError);
  }
}

TEST_CASE("polynomial samples are reproduced") {
  Gen gen(10);
  for (int r = 0; r <= 4; ++r) {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd c = gen.normals(r + 1);
      const SamplePath s = testing::path_of(60, [&](double t) { return horner(c, t - 0.25); });
      const PolynomialPiece p = best_poly(s, 15, 60, r);
      CHECK(p.sup_error <= 1e-12);
      for (Index i = 15; i <= 60; ++i) CHECK(std::abs(eval_piece(p, s.time(i)) - s[i]) <= 1e-12);
    }
  }
}

TEST_CASE("eval_piece") {
  PolynomialPiece p;
  p.t_left = 0.3;
  p.coefficients = Eigen::VectorXd::Constant(1, -2.0);
  CHECK(eval_piece(p, 0.3) == -2.0);
  CHECK(eval_piece(p, 0.9) == -2.0);
  p.coefficients.resize(2);
  p.coefficients << 0.0, 1.0;
  CHECK(eval_piece(p, 0.8) == 0.8 - 0.3);
}

TEST_CASE("lp oracle reproduces the worked examples") {
  const PolynomialPiece a = lp_oracle_best_poly(testing::path_from({0.0, 1.0}), 0, 1, 0);
  CHECK(a.coefficients[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.sup_error == doctest::Approx(0.5).epsilon(1e-12));
  const PolynomialPiece b = lp_oracle_best_poly(testing::path_from({0.0, 1.0, 0.0}), 0, 2, 1);
  CHECK(b.coefficients[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(b.coefficients[1]) <= 1e-12);
  CHECK(b.sup_error == doctest::Approx(0.5).epsilon(1e-12));
  const PolynomialPiece c = lp_oracle_best_poly(testing::path_from({0.0, 3.25, 1.0}), 1, 1, 2);
  CHECK(c.coefficients[0] == 3.25);
  CHECK(c.sup_error == 0.0);
}

TEST_CASE("lp oracle interpolates when r >= points - 1") {
  Gen gen(11);
  for (int r = 1; r <= 5; ++r) {
    const Index n = gen.integer(1, r + 1);
    const Eigen::VectorXd x = gen.offsets(n);
    const Eigen::VectorXd y = gen.normals(n);
    CHECK(lp_oracle_fit(x, y, r).sup_error <= 1e-12);
    CHECK(best_poly_fit(x, y, r).sup_error <= 1e-12);
  }
}

TEST_CASE("fast fits agree with the lp oracle and equioscillate") {
  Gen gen(12);
  for (int r = 0; r <= 3; ++r) {
    for (int trial = 0; trial < 150; ++trial) {
      const Eigen::VectorXd x = gen.offsets(50);
      const Eigen::VectorXd y = random_values(gen, 50, trial % 2);
      const PolyFit fast = best_poly_fit(x, y, r);
      const PolyFit lp = lp_oracle_fit(x, y, r);
      REQUIRE(fast.coefficients.size() == r + 1);
      CHECK(std::abs(fast.sup_error - lp.sup_error) <= 1e-10);
      const Eigen::VectorXd res = residuals(x, y, fast.coefficients);
      CHECK(std::abs(res.cwiseAbs().maxCoeff() - fast.sup_error) <= 1e-12 * (1.0 + fast.sup_error));
      CHECK(alternations(res, fast.sup_error, 1e-9) >= r + 2);
    }
  }
}

TEST_CASE("exchange fit agrees with the r <= 1 fast paths") {
  Gen gen(13);
  for (int r = 0; r <= 1; ++r) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd x = gen.offsets(40);
      const Eigen::VectorXd y = random_values(gen, 40, trial % 2);
      CHECK(std::abs(exchange_fit(x, y, r).sup_error - best_poly_fit(x, y, r).sup_error) <= 1e-10);
    }
  }
}

TEST_CASE("no random candidate beats the minimax polynomial") {
  Gen gen(14);
  for (int r = 0; r <= 3; ++r) {
    const Eigen::VectorXd x = gen.offsets(50);
    const Eigen::VectorXd y = random_values(gen, 50, 1);
    const PolyFit best = best_poly_fit(x, y, r);
    for (int c = 0; c < 1000; ++c) {
      Eigen::VectorXd cand = best.coefficients;
      const double scale = std::pow(10.0, gen.uniform(-8.0, 0.0));
      for (Index j = 0; j <= r; ++j) cand[j] += scale * gen.normal() / std::pow(x[49], static_cast<double>(j));
      CHECK(residuals(x, y, cand).cwiseAbs().maxCoeff() >= best.sup_error - 1e-12);
    }
  }
}

TEST_CASE("translation and scale equivariance") {
  Gen gen(15);
  for (int r = 0; r <= 3; ++r) {
    for (int trial = 0; trial < 30; ++trial) {
      const Eigen::VectorXd x = gen.offsets(30) / 30.0;
      const Eigen::VectorXd y = random_values(gen, 30, 1);
      const double e = best_poly_fit(x, y, r).sup_error;
      const Eigen::VectorXd shift = gen.normals(r + 1);
      Eigen::VectorXd y2 = y;
      for (Index i = 0; i < 30; ++i) y2[i] += horner(shift, x[i]);
      CHECK(best_poly_fit(x, y2, r).sup_error == doctest::Approx(e).epsilon(1e-9));
      const double c = gen.uniform(-3.0, 3.0);
      CHECK(best_poly_fit(x, c * y, r).sup_error == doctest::Approx(std::abs(c) * e).epsilon(1e-9));
    }
  }
}

TEST_CASE("workspace matches from-scratch fits on every prefix") {
  for (int r = 0; r <= 1; ++r) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const SamplePath w = testing::brownian(300, 20 + s);
      ApproxWorkspace ws(r);
      double previous = 0.0;
      for (Index e = 0; e <= 300; ++e) {
        ws.push(w.time(e), w[e]);
        const double inc = ws.error();
        REQUIRE(inc == minimax_error(w, 0, e, r));
        REQUIRE(inc >= previous);
        previous = inc;
      }
    }
  }
}

TEST_CASE("exchange error is nondecreasing along prefixes") {
  for (int r = 2; r <= 3; ++r) {
    const SamplePath w = testing::brownian(200, 30 + static_cast<std::uint64_t>(r));
    double previous = 0.0;
    for (Index e = 0; e <= 200; ++e) {
      const double err = minimax_error(w, 0, e, r);
      CHECK(err >= previous - 1e-12);
      previous = std::max(previous, err);
    }
  }
}

TEST_CASE("witness shortcut never changes the exceeds decision") {
  const SamplePath w = testing::brownian(2000, 40);
  for (double eps : {0.01, 0.05, 0.2}) {
    ApproxWorkspace ws(1);
    ApproxWorkspace plain(1);
    for (Index e = 0; e <= 2000; ++e) {
      ws.push(w.time(e), w[e]);
      plain.push(w.time(e), w[e]);
      const bool fast = ws.exceeds(eps);
      REQUIRE(fast == (plain.error() > eps));
      if (fast) {
        ws.reset();
        plain.reset();
        ws.push(w.time(e), w[e]);
        plain.push(w.time(e), w[e]);
      }
    }
  }
}

TEST_CASE("prefix scan on the linear path") {
  const SamplePath lin = testing::path_of(1000, [](double t) { return t; });
  const auto e = minimax_error_prefix_scan(lin, 0, 0, 0.3);
  REQUIRE(e.has_value());
  CHECK(lin.time(*e) > 0.6);
  CHECK(lin.time(*e - 1) / 2.0 <= 0.3);
  CHECK(minimax_error(lin, 0, *e, 0) > 0.3);
  CHECK(minimax_error(lin, 0, *e - 1, 0) <= 0.3);
  CHECK_FALSE(minimax_error_prefix_scan(lin, 0, 1, 1e-9).has_value());
  CHECK_FALSE(minimax_error_prefix_scan(lin, 0, 0, 0.5).has_value());
}

TEST_CASE("prefix scan equals brute force") {
  Gen gen(16);
  for (int r = 0; r <= 3; ++r) {
    const SamplePath w = testing::brownian(400, 50 + static_cast<std::uint64_t>(r));
    for (int trial = 0; trial < 12; ++trial) {
      const Index start = gen.integer(0, 390);
      const double global = minimax_error(w, start, 400, r);
      const double eps = gen.uniform(0.05, 1.2) * global;
      std::optional<Index> brute;
      for (Index e = start + 1; e <= 400; ++e) {
        if (minimax_error(w, start, e, r) > eps) {
          brute = e;
          break;
        }
      }
      CHECK(minimax_error_prefix_scan(w, start, r, eps) == brute);
      // Past the last index the error plateaus at `global`; allow for rounding on the plateau.
      CHECK_FALSE(minimax_error_prefix_scan(w, start, r, global * (1.0 + 1e-12)).has_value());
    }
  }
}

TEST_CASE("prefix scan argument checks") {
  const SamplePath w = testing::brownian(10, 1);
  CHECK_THROWS_AS(minimax_error_prefix_scan(w, 10, 0, 0.1), ArgumentError);
  CHECK_THROWS_AS(minimax_error_prefix_scan(w, 0, 0, 0.0), ArgumentError);
}
