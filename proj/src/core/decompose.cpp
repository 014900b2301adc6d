#include "core/decompose.hpp"

#include <cmath>
#include <cstdlib>

#include "core/errors.hpp"

namespace hamshear {

namespace {

constexpr double kHalfPi = kPi / 2.0;

int dot(const std::vector<int>& a, const std::vector<int>& b) {
  int s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Complex phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

SigmaChoice choose_sigma_j(const std::vector<int>& m, const std::vector<int>& k) {
  if (m.size() != k.size() || m.empty()) {
    throw DimensionError("choose_sigma_j: m and k must have the same nonzero length");
  }
  std::size_t j = k.size();
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] != 0) {
      j = i;
      break;
    }
  }
  if (j == k.size()) throw InvalidArgument("choose_sigma_j: k = 0 belongs to v0");

  const int mk = dot(m, k);
  const int a_plus = mk - k[j];
  const int a_minus = mk + k[j];
  SigmaChoice c;
  c.j = j;
  if (std::abs(a_minus) > std::abs(a_plus)) {
    c.sigma = -1;
    c.A = a_minus;
  } else {
    c.sigma = 1;
    c.A = a_plus;
  }
  c.m_prime = m;
  c.m_prime[j] -= c.sigma;
  return c;
}

BracketTerm sin_triple_term(const std::vector<int>& m_prime, const std::vector<int>& k, std::size_t j,
                            int sigma, int A, double alpha, double beta, double gamma,
                            double weight) {
  const std::size_t n = k.size();
  if (m_prime.size() != n || n == 0) throw DimensionError("sin_triple_term: length mismatch");
  if (j >= n) throw InvalidArgument("sin_triple_term: axis out of range");
  if (sigma != 1 && sigma != -1) throw InvalidArgument("sin_triple_term: sigma must be +-1");
  if (A == 0) throw InvalidArgument("sin_triple_term: A = 0");
  if (k[j] == 0) throw InvalidArgument("sin_triple_term: k_j = 0");
  if (dot(m_prime, k) != A) throw InvalidArgument("sin_triple_term: A != <m', k>");

  const std::vector<int> zero(n, 0);
  std::vector<int> e_j(n, 0);
  e_j[j] = sigma;

  BracketTerm t;
  t.weight = weight;
  t.v = TrigPoly::term(m_prime, zero, phase(alpha) / (kTwoPi * A));
  t.tau = TrigPoly::term(zero, k, phase(beta + kHalfPi) / kTwoPi);
  t.w = TrigPoly::term(e_j, zero, phase(gamma) / (kTwoPi * kTwoPi * k[j] * sigma));

  std::vector<int> m = m_prime;
  m[j] += sigma;
  t.provenance = TermProvenance{ModeIndex{m, k}, m_prime, j, sigma, A, alpha, beta, gamma};
  return t;
}

TrigPoly term_value(const BracketTerm& term) {
  return term.weight * poisson_bracket(term.w, poisson_bracket(term.v, term.tau));
}

Decomposition decompose(const TrigPoly& h) {
  const std::size_t n = h.dim();
  Decomposition d{TrigPoly(n), {}};
  TrigPolyBuilder v0(n);
  for (const auto& [mode, c] : h.modes()) {
    if (mode.has_zero_k()) {
      v0.add(mode, c);
      continue;
    }
    // |c| cos(X + Y + Z + phi), X = 2pi<m',q>, Y = 2pi<k,p>, Z = 2pi sigma q_j
    const SigmaChoice s = choose_sigma_j(mode.m, mode.k);
    const double mag = std::abs(c);
    const double phi = std::arg(c);
    struct Part {
      double sign, alpha, beta, gamma;
    };
    const Part parts[4] = {
        {+1.0, kHalfPi, kHalfPi, phi + kHalfPi},
        {-1.0, kHalfPi, 0.0, phi},
        {-1.0, 0.0, kHalfPi, phi},
        {-1.0, 0.0, 0.0, phi + kHalfPi},
    };
    for (const auto& part : parts) {
      BracketTerm t = sin_triple_term(s.m_prime, mode.k, s.j, s.sigma, s.A, part.alpha, part.beta,
                                      part.gamma, part.sign * mag);
      t.provenance.mode = mode;
      d.terms.push_back(std::move(t));
    }
  }
  d.v0 = v0.finish();
  return d;
}

TrigPoly reconstruct(const Decomposition& d) {
  TrigPolyBuilder sum(d.v0.dim());
  sum.add(d.v0);
  for (const auto& t : d.terms) sum.add(term_value(t));
  return sum.finish();
}

Json decomposition_to_json(const Decomposition& d) {
  Json terms = Json::array();
  for (const auto& t : d.terms) {
    const auto& pv = t.provenance;
    terms.push_back(Json{
        {"weight", t.weight},
        {"w", poly_to_json(t.w)},
        {"v", poly_to_json(t.v)},
        {"tau", poly_to_json(t.tau)},
        {"provenance",
         Json{{"m", pv.mode.m},
              {"k", pv.mode.k},
              {"m_prime", pv.m_prime},
              {"j", pv.j},
              {"sigma", pv.sigma},
              {"A", pv.A},
              {"alpha", pv.alpha},
              {"beta", pv.beta},
              {"gamma", pv.gamma}}},
    });
  }
  return Json{{"schema", "hamshear/decomposition/1"},
              {"dim", d.v0.dim()},
              {"v0", poly_to_json(d.v0)},
              {"terms", std::move(terms)}};
}

}  // namespace hamshear
