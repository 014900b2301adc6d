#pragma once

// Rewrites a trigonometric polynomial as
//     H = v0(q) + sum_r weight_r * {w_r(q), {v_r(q), tau_r(p)}}
// with every mode that depends on p expanded into four sine triples.

#include <cstddef>
#include <vector>

#include "core/fourier.hpp"

namespace hamshear {

struct SigmaChoice {
  std::size_t j = 0;  // 0-based axis: smallest index with k_j != 0
  int sigma = 1;
  int A = 0;  // <m', k>
  std::vector<int> m_prime;
};

// Throws InvalidArgument when k = 0 or the vectors disagree in length.
SigmaChoice choose_sigma_j(const std::vector<int>& m, const std::vector<int>& k);

struct TermProvenance {
  ModeIndex mode;  // source mode of H
  std::vector<int> m_prime;
  std::size_t j = 0;
  int sigma = 1;
  int A = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct BracketTerm {
  double weight = 0.0;
  TrigPoly w;    // q only
  TrigPoly v;    // q only
  TrigPoly tau;  // p only
  TermProvenance provenance;
};

// weight * {w,{v,tau}} = weight * sin(2pi<m',q>+alpha) sin(2pi<k,p>+beta) sin(2pi sigma q_j+gamma)
// with v = cos(2pi<m',q>+alpha)/(2pi A), tau = -sin(2pi<k,p>+beta)/(2pi),
// w = cos(2pi sigma q_j+gamma)/(4pi^2 k_j sigma).
BracketTerm sin_triple_term(const std::vector<int>& m_prime, const std::vector<int>& k, std::size_t j,
                            int sigma, int A, double alpha, double beta, double gamma,
                            double weight);

// weight * {w, {v, tau}} computed exactly.
TrigPoly term_value(const BracketTerm& term);

struct Decomposition {
  TrigPoly v0;
  std::vector<BracketTerm> terms;
};

Decomposition decompose(const TrigPoly& h);
TrigPoly reconstruct(const Decomposition& d);

Json decomposition_to_json(const Decomposition& d);

}  // namespace hamshear
