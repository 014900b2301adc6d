#include <doctest.h>

#include <cmath>
#include <random>

#include "core/errors.hpp"
#include "core/fourier.hpp"
#include "oracles.hpp"

using namespace hamshear;

namespace {

PhasePoint pt(double q, double p) { return PhasePoint{{q}, {p}}; }

}  // namespace

TEST_CASE("evaluate: zero polynomial and cosine at the origin") {
  CHECK(evaluate(TrigPoly(1), pt(0.3, 0.7)) == 0.0);
  CHECK(evaluate(TrigPoly::cos_q(1, 0, 1.0), pt(0.0, 0.3)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("evaluate: sin(2 pi q) cos(2 pi p) from its two modes") {
  // sin a cos b = (sin(a+b) + sin(a-b))/2 and sin x = Re(-i e^{ix})
  const TrigPoly f = TrigPoly::term({1}, {1}, Complex(0.0, -0.5)) + TrigPoly::term({1}, {-1}, Complex(0.0, -0.5));
  for (auto [q, p] : {std::pair{0.25, 0.0}, {0.1, 0.4}, {0.77, 0.05}}) {
    const double closed = std::sin(oracle::kTwoPi * q) * std::cos(oracle::kTwoPi * p);
    CHECK(evaluate(f, pt(q, p)) == doctest::Approx(closed).epsilon(1e-14));
  }
  CHECK(evaluate(f, pt(0.25, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("canonical storage folds (m,k) and (-m,-k) into one class") {
  const TrigPoly a = TrigPoly::term({-1}, {2}, Complex(0.3, 0.4));
  REQUIRE(a.size() == 1);
  const auto& [mode, c] = *a.modes().begin();
  CHECK(mode.is_canonical());
  CHECK(mode.m[0] == 1);
  CHECK(mode.k[0] == -2);
  CHECK(c.real() == doctest::Approx(0.3));
  CHECK(c.imag() == doctest::Approx(-0.4));
  // Same function either way.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const PhasePoint x = oracle::random_point(rng, 1);
    const double th = oracle::kTwoPi * (-x.q[0] + 2 * x.p[0]);
    CHECK(evaluate(a, x) == doctest::Approx(0.3 * std::cos(th) - 0.4 * std::sin(th)).epsilon(1e-13));
  }
  CHECK(TrigPoly::constant(1, 2.5).coefficient(ModeIndex{{0}, {0}}).imag() == 0.0);
}

TEST_CASE("gradients match finite differences") {
  SUBCASE("constant") {
    const auto g = gradient_q(TrigPoly::constant(2, 3.0), PhasePoint{{0.1, 0.2}, {0.3, 0.4}});
    CHECK(g == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("cos(2 pi p) at p = 1/4") {
    const TrigPoly f = TrigPoly::cos_p(1, 0, 1.0);
    const double fd = oracle::fd_partial(oracle::as_fn(f), pt(0.0, 0.25), 1, 1e-5);
    const double g = gradient_p(f, pt(0.0, 0.25))[0];
    CHECK(std::abs(g - fd) < 1e-6);
    CHECK(g == doctest::Approx(-oracle::kTwoPi).epsilon(1e-12));
  }
  SUBCASE("cos(2 pi (q+p)) at the origin") {
    const TrigPoly f = TrigPoly::term({1}, {1}, 1.0);
    const double fd = oracle::fd_partial(oracle::as_fn(f), pt(0.0, 0.0), 0, 1e-5);
    CHECK(std::abs(gradient_q(f, pt(0.0, 0.0))[0] - fd) < 1e-6);
    CHECK(std::abs(gradient_q(f, pt(0.0, 0.0))[0]) < 1e-12);
  }
  SUBCASE("random modes, O(h^2) bound") {
    std::mt19937_64 rng(11);
    const double h = 1e-4;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 1 + trial % 2;
      const int K = 3;
      const TrigPoly f = oracle::random_poly(rng, n, K, 4);
      const double bound = 10.0 * h * h * std::pow(oracle::kTwoPi * K, 3) * f.l1_norm();
      const PhasePoint x = oracle::random_point(rng, n);
      const auto gq = gradient_q(f, x);
      const auto gp = gradient_p(f, x);
      for (std::size_t a = 0; a < n; ++a) {
        CHECK(std::abs(gq[a] - oracle::fd_partial(oracle::as_fn(f), x, a, h)) < bound);
        CHECK(std::abs(gp[a] - oracle::fd_partial(oracle::as_fn(f), x, n + a, h)) < bound);
      }
    }
  }
}

TEST_CASE("hessian matches finite differences of the gradient") {
  std::mt19937_64 rng(5);
  const TrigPoly f = oracle::random_poly(rng, 2, 2, 5);
  const PhasePoint x = oracle::random_point(rng, 2);
  const Eigen::MatrixXd H = hessian(f, x);
  const double h = 1e-5;
  for (std::size_t a = 0; a < 4; ++a) {
    auto partial_a = [&](const PhasePoint& y) {
      return a < 2 ? gradient_q(f, y)[a] : gradient_p(f, y)[a - 2];
    };
    for (std::size_t b = 0; b < 4; ++b) {
      CHECK(std::abs(H(a, b) - oracle::fd_partial(partial_a, x, b, h)) < 1e-4 * (1 + std::abs(H(a, b))));
    }
  }
}

TEST_CASE("poisson bracket") {
  SUBCASE("{f, f} = 0") {
    std::mt19937_64 rng(1);
    const TrigPoly f = oracle::random_poly(rng, 2, 2, 6);
    CHECK(poisson_bracket(f, f).empty());
  }
  SUBCASE("{cos 2pi q, cos 2pi p} against the finite-difference bracket") {
    const TrigPoly v = TrigPoly::cos_q(1, 0, 1.0);
    const TrigPoly tau = TrigPoly::cos_p(1, 0, 1.0);
    const TrigPoly b = poisson_bracket(v, tau);
    CHECK(b.size() == 2);
    const auto grid = oracle::lattice(1, 32);
    const double fd = oracle::sup_diff(
        oracle::as_fn(b),
        [&](const PhasePoint& x) { return oracle::fd_bracket(oracle::as_fn(v), oracle::as_fn(tau), x, 1e-5); },
        grid);
    CHECK(fd < 1e-6);
    // closed form 4 pi^2 sin sin
    const double closed = oracle::sup_diff(
        oracle::as_fn(b),
        [](const PhasePoint& x) {
          return oracle::kTwoPi * oracle::kTwoPi * std::sin(oracle::kTwoPi * x.q[0]) *
                 std::sin(oracle::kTwoPi * x.p[0]);
        },
        grid);
    CHECK(closed < 1e-11);
  }
  SUBCASE("antisymmetry") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = 1 + i % 2;
      const TrigPoly f = oracle::random_poly(rng, n, 2, 4);
      const TrigPoly g = oracle::random_poly(rng, n, 2, 4);
      CHECK(sup_norm(poisson_bracket(f, g) + poisson_bracket(g, f)) < 1e-10);
    }
  }
  SUBCASE("Jacobi identity on 100 random triples") {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = 1 + i % 2;
      const TrigPoly f = oracle::random_poly(rng, n, 2, 3);
      const TrigPoly g = oracle::random_poly(rng, n, 2, 3);
      const TrigPoly h = oracle::random_poly(rng, n, 2, 3);
      const TrigPoly jac = poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f)) +
                           poisson_bracket(h, poisson_bracket(f, g));
      const double scale = f.l1_norm() * g.l1_norm() * h.l1_norm();
      worst = std::max(worst, sup_norm(jac) / std::max(1.0, scale));
    }
    CHECK(worst < 1e-9);
  }
  SUBCASE("degree bound") {
    std::mt19937_64 rng(8);
    const TrigPoly f = oracle::random_poly(rng, 2, 2, 4);
    const TrigPoly g = oracle::random_poly(rng, 2, 3, 4);
    CHECK(poisson_bracket(f, g).degree() <= f.degree() + g.degree());
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(poisson_bracket(TrigPoly(1), TrigPoly(2)), DimensionError);
    CHECK_THROWS_AS(evaluate(TrigPoly(2), pt(0, 0)), DimensionError);
  }
}

TEST_CASE("projection from samples") {
  SUBCASE("identity on degree-2 polynomials") {
    std::mt19937_64 rng(9);
    for (std::size_t n : {1, 2}) {
      const TrigPoly f = oracle::random_poly(rng, n, 2, 6);
      const TrigPoly g = project_from_samples(oracle::as_fn(f), n, 2);
      double worst = 0.0;
      for (const auto& [mode, c] : f.modes()) worst = std::max(worst, std::abs(g.coefficient(mode) - c));
      for (const auto& [mode, c] : g.modes()) worst = std::max(worst, std::abs(f.coefficient(mode) - c));
      CHECK(worst < 1e-12);
    }
  }
  SUBCASE("constant one") {
    const TrigPoly g = project_from_samples([](const PhasePoint&) { return 1.0; }, 1, 3);
    REQUIRE(g.size() == 1);
    CHECK(g.is_constant());
    CHECK(g.coefficient(ModeIndex{{0}, {0}}).real() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("exp(cos 2 pi q) at K = 6") {
    auto f = [](const PhasePoint& x) { return std::exp(std::cos(oracle::kTwoPi * x.q[0])); };
    const TrigPoly g = project_from_samples(f, 1, 6);
    CHECK(oracle::sup_diff(oracle::as_fn(g), f, oracle::lattice(1, 50)) < 1e-4);
  }
  SUBCASE("aliasing guard") {
    auto f = [](const PhasePoint&) { return 0.0; };
    CHECK_THROWS_AS(project_from_samples(f, 1, 4, 9), InvalidArgument);
    CHECK_NOTHROW(project_from_samples(f, 1, 4, 10));
  }
}

TEST_CASE("periodization") {
  SUBCASE("zero") {
    const Periodization r = periodize([](std::span<const double>) { return 0.0; }, 1, 2.0, 4);
    CHECK(r.poly.empty());
    CHECK(r.scale == doctest::Approx(8.0));
    CHECK(!r.window.empty());
  }
  auto inner_box_error = [](const Periodization& r, double h, auto&& f) {
    double worst = 0.0;
    const int G = 41;
    for (int i = 0; i < G; ++i) {
      for (int j = 0; j < G; ++j) {
        const double xq = -0.5 * h + h * i / (G - 1);
        const double xp = -0.5 * h + h * j / (G - 1);
        const double v = evaluate(r.poly, PhasePoint{{xq / r.scale}, {xp / r.scale}});
        worst = std::max(worst, std::abs(v - f(xq, xp)));
      }
    }
    return worst;
  };
  SUBCASE("already periodic cosine") {
    const double h = 1.5;
    auto f = [h](double xq, double) { return std::cos(oracle::kTwoPi * xq / (4 * h)); };
    const Periodization r = periodize([&](std::span<const double> x) { return f(x[0], x[1]); }, 1, h, 128);
    CHECK(inner_box_error(r, h, f) < 1e-10);
  }
  SUBCASE("pendulum on [-pi, pi]^2, K = 16") {
    const double h = oracle::kTwoPi / 2;
    auto f = [](double q, double p) { return 0.5 * p * p + std::cos(q); };
    const Periodization r = periodize([&](std::span<const double> x) { return f(x[0], x[1]); }, 1, h, 16);
    CHECK(inner_box_error(r, h, f) < 1e-3);
  }
}

TEST_CASE("serialization round trip is bit exact and ordered") {
  std::mt19937_64 rng(21);
  const TrigPoly f = oracle::random_poly(rng, 2, 3, 8);
  const Json j = poly_to_json(f);
  const TrigPoly g = poly_from_json(Json::parse(j.dump()));
  CHECK(f == g);
  std::vector<int> prev;
  bool ordered = true;
  for (const auto& e : j.at("modes")) {
    std::vector<int> key = e.at("m").get<std::vector<int>>();
    const auto k = e.at("k").get<std::vector<int>>();
    key.insert(key.end(), k.begin(), k.end());
    if (!prev.empty() && !(prev < key)) ordered = false;
    prev = key;
  }
  CHECK(ordered);
  CHECK_THROWS_AS(poly_from_json(Json::parse(R"({"dim":1,"modes":[{"m":[1,2],"k":[0],"re":1,"im":0}]})")),
                  ParseError);
  CHECK_THROWS_AS(poly_from_json(Json::parse(R"({"modes":[]})")), ParseError);
}
