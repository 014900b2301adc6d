#include <doctest.h>

#include <cmath>
#include <random>

#include "core/errors.hpp"
#include "core/shear.hpp"
#include "oracles.hpp"

using namespace hamshear;

namespace {


PhasePoint pt(double q, double p) { return PhasePoint{{q}, {p}}; }

double signed_gap(double a, double b) {
  double d = a - b;
  return d - std::round(d);
}

// Central-difference Jacobian of x -> apply_word(w, x), columns in (q, p) order.
Eigen::MatrixXd fd_jacobian(const ShearWord& w, const PhasePoint& x, double h) {
  const std::size_t n = x.q.size();
  Eigen::MatrixXd J(2 * n, 2 * n);
  for (std::size_t b = 0; b < 2 * n; ++b) {
    PhasePoint plus = x, minus = x;
    (b < n ? plus.q[b] : plus.p[b - n]) += h;
    (b < n ? minus.q[b] : minus.p[b - n]) -= h;
    const PhasePoint yp = apply_word(w, plus), ym = apply_word(w, minus);
    for (std::size_t a = 0; a < n; ++a) {
      J(a, b) = signed_gap(yp.q[a], ym.q[a]) / (2 * h);
      J(n + a, b) = signed_gap(yp.p[a], ym.p[a]) / (2 * h);
    }
  }
  return J;
}

ShearWord random_word(std::mt19937_64& rng, std::size_t n, int shears, double amp, bool merge = true) {
  ShearWord w(n, merge);
  std::uniform_real_distribution<double> u(-amp, amp);
  for (int i = 0; i < shears; ++i) {
    const bool vertical = i % 2 == 0;
    TrigPoly g = oracle::random_one_sided(rng, n, 2, 2, vertical);
    g = (amp / std::max(1.0, g.l1_norm())) * g;
    w.push_back(vertical ? Shear::vertical(g, u(rng)) : Shear::horizontal(g, u(rng)));
  }
  return w;
}

}  // namespace

TEST_CASE("apply_shear") {
  SUBCASE("zero generator is the identity") {
    const PhasePoint x = pt(0.3, 0.8);
    CHECK(oracle::torus_gap(apply_shear(Shear::vertical(TrigPoly(1)), x), x) == 0.0);
    CHECK(oracle::torus_gap(apply_shear(Shear::horizontal(TrigPoly(1)), x), x) == 0.0);
  }
  SUBCASE("vertical standard-map kick") {
    const TrigPoly v = TrigPoly::cos_q(1, 0, 1.0 / (kTwoPi * kTwoPi));
    const PhasePoint x = pt(0.25, 0.1);
    const double dv = oracle::fd_partial(oracle::as_fn(v), x, 0, 1e-6);
    const PhasePoint y = apply_shear(Shear::vertical(v), x);
    CHECK(y.q[0] == 0.25);
    CHECK(oracle::circ(y.p[0], 0.1 - dv) < 1e-9);
    CHECK(oracle::circ(y.p[0], 0.1 + 1.0 / kTwoPi) < 1e-15);
  }
  SUBCASE("horizontal drift by a full turn") {
    const TrigPoly tau = TrigPoly::cos_p(1, 0, 1.0 / kTwoPi);
    const PhasePoint x = pt(0.4, 0.25);
    const double dt = oracle::fd_partial(oracle::as_fn(tau), x, 1, 1e-6);
    const PhasePoint y = apply_shear(Shear::horizontal(tau), x);
    CHECK(oracle::circ(y.q[0], 0.4 + dt) < 1e-9);
    CHECK(oracle::circ(y.q[0], 0.4) < 1e-14);
    CHECK(y.p[0] == 0.25);
  }
  SUBCASE("generators must match their kind") {
    CHECK_THROWS_AS(Shear::horizontal(TrigPoly::cos_q(1, 0, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(Shear::vertical(TrigPoly::cos_p(1, 0, 1.0)), InvalidArgument);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(apply_shear(Shear::vertical(TrigPoly::cos_q(2, 0, 1.0)), pt(0, 0)), DimensionError);
  }
}

TEST_CASE("apply_word") {
  SUBCASE("empty word") {
    const PhasePoint x = pt(0.2, 0.9);
    CHECK(oracle::torus_gap(apply_word(ShearWord(1), x), x) == 0.0);
  }
  SUBCASE("standard map closed form") {
    const double K = 1.0;
    const TrigPoly v = TrigPoly::cos_q(1, 0, K / (kTwoPi * kTwoPi));
    const TrigPoly tau = TrigPoly::cos_p(1, 0, 1.0 / kTwoPi);
    ShearWord w(1);
    w.push_back(Shear::vertical(v));
    w.push_back(Shear::horizontal(tau));
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
      const PhasePoint x = oracle::random_point(rng, 1);
      const double p1 = x.p[0] + K / kTwoPi * std::sin(kTwoPi * x.q[0]);
      const double q1 = x.q[0] - std::sin(kTwoPi * p1);
      CHECK(oracle::torus_gap(apply_word(w, x), pt(q1, p1)) < 1e-13);
    }
  }
  SUBCASE("inverse pair") {
    const TrigPoly tau = TrigPoly::cos_p(1, 0, 0.3);
    for (bool merge : {true, false}) {
      ShearWord w(1, merge);
      w.push_back(Shear::horizontal(tau));
      w.push_back(Shear::horizontal(-tau));
      CHECK(w.size() == (merge ? 0u : 2u));
      const PhasePoint x = pt(0.123, 0.456);
      CHECK(oracle::torus_gap(apply_word(w, x), x) < 1e-15);
    }
  }
  SUBCASE("batch and single-point application agree") {
    std::mt19937_64 rng(12);
    const ShearWord w = random_word(rng, 2, 8, 0.1);
    PointSet pts(2, 0);
    for (int i = 0; i < 20; ++i) pts.push_back(oracle::random_point(rng, 2));
    PointSet out = pts;
    apply_word(w, out);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(oracle::torus_gap(out.at(i), apply_word(w, pts.at(i))) == 0.0);
  }
}

TEST_CASE("word_jacobian") {
  SUBCASE("empty word") {
    CHECK(word_jacobian(ShearWord(2), PhasePoint{{0.1, 0.2}, {0.3, 0.4}}).isIdentity(0.0));
  }
  SUBCASE("single horizontal shear against finite differences") {
    ShearWord w(1);
    w.push_back(Shear::horizontal(TrigPoly::cos_p(1, 0, 1.0 / kTwoPi)));
    for (double p : {0.0, 0.1, 0.37}) {
      const PhasePoint x = pt(0.3, p);
      const Eigen::MatrixXd J = word_jacobian(w, x);
      CHECK((J - fd_jacobian(w, x, 1e-6)).cwiseAbs().maxCoeff() < 1e-7);
    }
    // At p = 0 the only nonzero block entry is d^2 tau/dp^2 = -2 pi.
    const Eigen::MatrixXd J0 = word_jacobian(w, pt(0.3, 0.0));
    CHECK(J0(0, 1) == doctest::Approx(-kTwoPi).epsilon(1e-14));
  }
  SUBCASE("random words: FD agreement and symplecticity") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 1 + trial % 2;
      const ShearWord w = random_word(rng, n, 6, 0.05);
      const PhasePoint x = oracle::random_point(rng, n);
      const Eigen::MatrixXd J = word_jacobian(w, x);
      CHECK((J - fd_jacobian(w, x, 1e-6)).cwiseAbs().maxCoeff() < 1e-6);
      const Eigen::MatrixXd O = symplectic_form(n);
      CHECK((J.transpose() * O * J - O).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("invert_word") {
  SUBCASE("empty") { CHECK(invert_word(ShearWord(1)).empty()); }
  SUBCASE("single shear negates its generator") {
    ShearWord w(1);
    const TrigPoly tau = TrigPoly::cos_p(1, 0, 0.7);
    w.push_back(Shear::horizontal(tau));
    const ShearWord inv = invert_word(w);
    REQUIRE(inv.size() == 1);
    CHECK(inv.shears()[0].kind == ShearKind::Horizontal);
    CHECK(inv.shears()[0].generator() == -tau);
  }
  SUBCASE("round trip of a 10-shear word on 100 points") {
    std::mt19937_64 rng(14);
    const ShearWord w = random_word(rng, 2, 10, 0.2);
    const ShearWord inv = invert_word(w);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const PhasePoint x = oracle::random_point(rng, 2);
      worst = std::max(worst, oracle::torus_gap(apply_word(inv, apply_word(w, x)), x));
    }
    CHECK(worst < 1e-11);
  }
}

TEST_CASE("structural invariants") {
  std::mt19937_64 rng(15);
  SUBCASE("symplectic and volume preserving for longer words") {
    for (int trial = 0; trial < 10; ++trial) {
      const ShearWord w = random_word(rng, 2, 200, 0.05);
      const PhasePoint x = oracle::random_point(rng, 2);
      const Eigen::MatrixXd J = word_jacobian(w, x);
      const double M = static_cast<double>(w.size());
      CHECK(symplectic_residual(J) < 1e-10 * M);
      CHECK(std::abs(J.determinant() - 1.0) < 1e-10 * M);
    }
  }
  SUBCASE("shears of one kind commute") {
    const TrigPoly t1 = oracle::random_one_sided(rng, 2, 2, 3, false);
    const TrigPoly t2 = oracle::random_one_sided(rng, 2, 2, 3, false);
    ShearWord a(2, false), b(2, false);
    a.push_back(Shear::horizontal(t1, 0.01));
    a.push_back(Shear::horizontal(t2, 0.01));
    b.push_back(Shear::horizontal(t2, 0.01));
    b.push_back(Shear::horizontal(t1, 0.01));
    for (int i = 0; i < 20; ++i) {
      const PhasePoint x = oracle::random_point(rng, 2);
      CHECK(oracle::torus_gap(apply_word(a, x), apply_word(b, x)) < 1e-15);
    }
  }
  SUBCASE("flow property within a kind") {
    const TrigPoly tau = oracle::random_one_sided(rng, 1, 3, 3, false);
    ShearWord split(1, false), whole(1);
    split.push_back(Shear::horizontal(0.3 * tau));
    split.push_back(Shear::horizontal(0.45 * tau));
    whole.push_back(Shear::horizontal(0.75 * tau));
    for (int i = 0; i < 20; ++i) {
      const PhasePoint x = oracle::random_point(rng, 1);
      CHECK(oracle::torus_gap(apply_word(split, x), apply_word(whole, x)) < 1e-14);
    }
  }
}

TEST_CASE("same-kind merging") {
  const TrigPoly v = TrigPoly::cos_q(1, 0, 1.0);
  const TrigPoly v2 = TrigPoly::cos_q(1, 0, 0.5, 2);
  SUBCASE("shared generator adds scales") {
    const Shear s = Shear::vertical(v, 0.25);
    ShearWord w(1);
    w.push_back(s);
    w.push_back(s);
    REQUIRE(w.size() == 1);
    CHECK(w.shears()[0].scale == 0.5);
    CHECK(w.unmerged_length() == 2);
    w.push_back(s.scaled(-2.0));
    CHECK(w.empty());
  }
  SUBCASE("different generators are summed") {
    ShearWord w(1);
    w.push_back(Shear::vertical(v, 0.5));
    w.push_back(Shear::vertical(v2, 2.0));
    REQUIRE(w.size() == 1);
    CHECK(sup_distance(w.shears()[0].generator(), 0.5 * v + 2.0 * v2) < 1e-15);
  }
  SUBCASE("identity shears are dropped") {
    ShearWord w(1);
    w.push_back(Shear::vertical(TrigPoly::constant(1, 3.0)));
    w.push_back(Shear::horizontal(TrigPoly::cos_p(1, 0, 1.0), 0.0));
    CHECK(w.empty());
    CHECK(w.unmerged_length() == 2);
  }
  SUBCASE("repeat equals naive concatenation") {
    std::mt19937_64 rng(16);
    for (int shears : {1, 2, 3, 4, 5}) {
      ShearWord w = random_word(rng, 1, shears, 0.1);
      if (shears == 3) {
        // ends of the same kind that cancel at the junction
        ShearWord c(1);
        const Shear a = Shear::vertical(v, 0.1);
        c.push_back(a);
        c.push_back(Shear::horizontal(TrigPoly::cos_p(1, 0, 1.0), 0.2));
        c.push_back(a.scaled(-1.0));
        w = c;
      }
      for (std::size_t times : {1u, 2u, 5u}) {
        const ShearWord r = ShearWord::repeat(w, times);
        ShearWord naive(1);
        for (std::size_t t = 0; t < times; ++t) naive.append(w);
        CHECK(r.size() == naive.size());
        CHECK(r.unmerged_length() == naive.unmerged_length());
        for (int i = 0; i < 10; ++i) {
          const PhasePoint x = oracle::random_point(rng, 1);
          CHECK(oracle::torus_gap(apply_word(r, x), apply_word(naive, x)) < 1e-13);
        }
      }
    }
  }
}

TEST_CASE("word serialization") {
  std::mt19937_64 rng(17);
  const ShearWord w = random_word(rng, 2, 12, 0.3);
  const Json j = word_to_json(w);
  CHECK(j.at("schema") == "hamshear/word/1");
  CHECK(j.at("shears").size() == w.size());
  const ShearWord back = word_from_json(Json::parse(j.dump()));
  REQUIRE(back.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(back.shears()[i].kind == w.shears()[i].kind);
    CHECK(back.shears()[i].generator() == w.shears()[i].generator());
  }
  // evaluation after a round trip is bit identical
  for (int i = 0; i < 20; ++i) {
    const PhasePoint x = oracle::random_point(rng, 2);
    const PhasePoint a = apply_word(w, x), b = apply_word(back, x);
    CHECK(a.q == b.q);
    CHECK(a.p == b.p);
  }
  const Json metrics = word_metrics_json(w);
  CHECK(metrics.at("length_after_merge") == w.size());
  CHECK(metrics.at("length_before_merge") == w.unmerged_length());

  CHECK_THROWS_AS(word_from_json(Json::parse(R"({"dim":1,"shears":[{"kind":"X","generator":{"dim":1,"modes":[]}}]})")),
                  ParseError);
  CHECK_THROWS_AS(
      word_from_json(Json::parse(
          R"({"dim":1,"shears":[{"kind":"H","generator":{"dim":1,"modes":[{"m":[1],"k":[0],"re":1,"im":0}]}}]})")),
      InvalidArgument);
  CHECK_THROWS_AS(word_from_json(Json::parse(R"({"dim":2,"shears":[{"kind":"H","generator":{"dim":1,"modes":[]}}]})")),
                  DimensionError);
}
