// SPDX-License-Identifier: Apache-2.0
//
// fadecap - constrained capacity of MIMO fading channels
// Copyright (C) 2026 The fadecap authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fadecap/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "fadecap/error.hpp"

namespace fadecap {

namespace {

constexpr double kZeroEig = 1e-10;

// 4^n Gamma(n + a) / (sqrt(pi) Gamma(n + b)), in logs for large n
double gamma_ratio(int n, double a, double b) {
  return std::exp(n * std::log(4.0) + std::lgamma(n + a) - std::lgamma(n + b) - 0.5 * std::log(std::numbers::pi));
}

void check_nm(int n, int M) {
  if (n < 1) throw InvalidInput("expansion constant: n must be >= 1");
  if (M < 2) throw InvalidInput("expansion constant: M must be >= 2");
}

}  // namespace

double expansion_constant(ConstantKind kind, int n, int M) {
  check_nm(n, M);
  const double m = M;
  const double g = n * gamma_ratio(n, 1.5, 2.0);
  const double k_lb = g / (2.0 * m * (m - 1.0));
  const double k_ub = 2.0 * g / m;
  const double h = gamma_ratio(n, 0.5, 1.0);
  switch (kind) {
    case ConstantKind::mmse_lb: return k_lb;
    case ConstantKind::mmse_ub: return k_ub;
    case ConstantKind::mi_lb: return k_ub / n;
    case ConstantKind::mi_ub: return k_lb / n;
    case ConstantKind::pe_lb: return h / (2.0 * m * (m - 1.0));
    case ConstantKind::pe_ub: return h / (2.0 * m);
  }
  return 0.0;
}

double alternative_constant(ConstantKind kind, int n, int M) {
  check_nm(n, M);
  const double m = M;
  const double g = n * 4.0 * gamma_ratio(n, 1.5, 0.5);
  const double k_lb = g / (8.0 * m * (m - 1.0));
  const double k_ub = g / (2.0 * m);
  switch (kind) {
    case ConstantKind::mmse_lb: return k_lb;
    case ConstantKind::mmse_ub: return k_ub;
    case ConstantKind::mi_lb: return k_ub / n;
    case ConstantKind::mi_ub: return k_lb / n;
    default: throw InvalidInput("alternative_constant: only mmse and mi kinds");
  }
}

ZeroBehaviour pdf_zero_derivative_weighted(const std::vector<Eigenweight>& eig) {
  if (eig.empty()) throw InvalidInput("pdf_zero_derivative_weighted: empty eigenvalue list");
  int total = 0;
  double log_value = 0.0;
  for (const auto& e : eig) {
    if (!(e.lambda > 0.0) || !std::isfinite(e.lambda)) throw InvalidInput("pdf_zero_derivative_weighted: eigenvalues must be positive");
    if (e.multiplicity < 1) throw InvalidInput("pdf_zero_derivative_weighted: multiplicities must be >= 1");
    total += e.multiplicity;
    log_value -= e.multiplicity * std::log(e.lambda);
  }
  return {total - 1, std::exp(log_value)};
}

std::vector<double> pdf_zero_taylor(const std::vector<Eigenweight>& eig, int terms) {
  ZeroBehaviour lead = pdf_zero_derivative_weighted(eig);
  // Laplace transform = lead.value * s^-N * prod (1 + u/lambda)^-mu with u = 1/s;
  // the coefficient of u^k maps to p^{(N-1+k)}(0).
  std::vector<double> c(std::max(terms, 0), 0.0);
  if (terms <= 0) return c;
  c[0] = 1.0;
  for (const auto& e : eig) {
    std::vector<double> f(terms);
    double binom = 1.0;
    for (int k = 0; k < terms; ++k) {
      if (k > 0) binom *= static_cast<double>(e.multiplicity + k - 1) / k;
      f[k] = binom * std::pow(-1.0 / e.lambda, k);
    }
    std::vector<double> next(terms, 0.0);
    for (int a = 0; a < terms; ++a)
      for (int b = 0; a + b < terms; ++b) next[a + b] += c[a] * f[b];
    c = std::move(next);
  }
  for (double& v : c) v *= lead.value;
  return c;
}

namespace {

PairEntry make_entry(int i, int j, const std::vector<Eigenweight>& eig) {
  ZeroBehaviour z = pdf_zero_derivative_weighted(eig);
  return {i, j, z.order, z.value};
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

DistanceDistribution distance_dist_rayleigh(const Constellation& c, int n_r) {
  if (n_r < 1) throw InvalidInput("distance distribution: n_r must be >= 1");
  RMatrix d = pairwise_sq_distances(c);
  DistanceDistribution dd;
  dd.M = c.size();
  dd.effective_logM = std::log(static_cast<double>(dd.M));
  for (int i = 0; i < dd.M; ++i)
    for (int j = 0; j < dd.M; ++j)
      if (i != j) dd.pairs.push_back(make_entry(i, j, {{d(i, j), n_r}}));
  return dd;
}

DistanceDistribution distance_dist_correlated(const Constellation& c, const CMatrix& theta_t,
                                              const CMatrix& theta_r) {
  // Validates both matrices.
  ChannelModel::correlated(theta_t, theta_r);
  if (theta_t.rows() != c.n_t()) throw InvalidInput("theta_t size does not match constellation n_t");

  Eigen::VectorXd lr = hermitian_eigenvalues(theta_r);
  const double lr_max = lr.maxCoeff();
  std::vector<double> receive;
  for (Eigen::Index k = 0; k < lr.size(); ++k)
    if (lr(k) > kZeroEig * lr_max) receive.push_back(lr(k));

  const double lt_max = hermitian_eigenvalues(theta_t).maxCoeff();
  const int M = c.size();
  RMatrix dbar = pairwise_sq_distances(c);

  DistanceDistribution dd;
  dd.M = M;
  std::vector<int> cls(M);
  std::iota(cls.begin(), cls.end(), 0);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      CVector e = c.point(i) - c.point(j);
      double lt = (e.adjoint() * theta_t * e)(0, 0).real();
      if (lt <= kZeroEig * lt_max * dbar(i, j)) {
        dd.excluded.emplace_back(i, j);
        int a = cls[i], b = cls[j];
        for (int& k : cls)
          if (k == b) k = a;
        continue;
      }
      std::vector<Eigenweight> eig;
      for (double r : receive) eig.push_back({lt * r, 1});
      dd.pairs.push_back(make_entry(i, j, eig));
    }
  }
  std::vector<int> counts(M, 0);
  for (int k : cls) ++counts[k];
  double h = 0.0;
  for (int n : counts)
    if (n > 0) {
      double p = static_cast<double>(n) / M;
      h -= p * std::log(p);
    }
  dd.effective_logM = h;
  if (dd.pairs.empty()) throw InvalidInput("distance distribution: no distinguishable pairs under theta_t");
  return dd;
}

DistanceDistribution distance_dist_ricean(const Constellation& c, double K, const CVector& a_t, const CVector& a_r,
                                          int n_r) {
  ChannelModel::ricean(K, a_t, a_r);
  if (a_r.size() != n_r) throw InvalidInput("a_r length does not match n_r");
  if (a_t.size() != c.n_t()) throw InvalidInput("a_t length does not match constellation n_t");
  CMatrix h0 = a_r * a_t.adjoint();
  RMatrix d = pairwise_sq_distances(c);
  DistanceDistribution dd;
  dd.M = c.size();
  dd.effective_logM = std::log(static_cast<double>(dd.M));
  for (int i = 0; i < dd.M; ++i) {
    for (int j = 0; j < dd.M; ++j) {
      if (i == j) continue;
      CVector u = (c.point(i) - c.point(j)) / std::sqrt(d(i, j));
      double los = (h0 * u).squaredNorm();
      double value = std::pow((K + 1.0) / d(i, j), n_r) * std::exp(-K * los);
      dd.pairs.push_back({i, j, n_r - 1, value});
    }
  }
  return dd;
}

DistanceDistribution distance_dist_spacetime(const SpaceTimeCode& code, int n_r) {
  if (n_r < 1) throw InvalidInput("distance distribution: n_r must be >= 1");
  DistanceDistribution dd;
  dd.M = code.size();
  dd.effective_logM = std::log(static_cast<double>(dd.M));
  for (int i = 0; i < dd.M; ++i) {
    for (int j = 0; j < dd.M; ++j) {
      if (i == j) continue;
      Eigen::VectorXd ev = hermitian_eigenvalues(code.difference_gram(i, j));
      const double top = ev.maxCoeff();
      std::vector<Eigenweight> eig;
      for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (ev(k) > kZeroEig * top) eig.push_back({ev(k), n_r});
      dd.pairs.push_back(make_entry(i, j, eig));
    }
  }
  return dd;
}

DistanceDistribution distance_dist(const ChannelModel& m, const Constellation& c) {
  if (m.n_t() != c.n_t()) throw InvalidInput("channel n_t does not match constellation n_t");
  return std::visit(
      [&](const auto& s) -> DistanceDistribution {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CanonicalRayleigh>) {
          return distance_dist_rayleigh(c, s.n_r);
        } else if constexpr (std::is_same_v<T, CorrelatedRayleigh>) {
          return distance_dist_correlated(c, s.theta_t, s.theta_r);
        } else {
          return distance_dist_ricean(c, s.K, s.a_t, s.a_r, static_cast<int>(s.a_r.size()));
        }
      },
      m.spec());
}

int diversity_order(const DistanceDistribution& dd) {
  if (dd.pairs.empty()) throw InvalidInput("diversity_order: empty distance distribution");
  int lo = dd.pairs.front().order;
  for (const auto& p : dd.pairs) lo = std::min(lo, p.order);
  return lo + 1;
}

ExpansionBounds epsilon_bounds(const DistanceDistribution& dd, int M) {
  if (M != dd.M) throw InvalidInput("epsilon_bounds: M does not match the distance distribution");
  ExpansionBounds eb;
  eb.d = diversity_order(dd);
  eb.M = M;
  for (const auto& p : dd.pairs)
    if (p.order == eb.d - 1) eb.sumS += p.value;
  eb.logM_limit = dd.effective_logM;
  const int n = eb.d;
  eb.mmse = {expansion_constant(ConstantKind::mmse_lb, n, M) * eb.sumS,
             expansion_constant(ConstantKind::mmse_ub, n, M) * eb.sumS};
  eb.mi = {expansion_constant(ConstantKind::mi_ub, n, M) * eb.sumS,
           expansion_constant(ConstantKind::mi_lb, n, M) * eb.sumS};
  eb.pe = {expansion_constant(ConstantKind::pe_lb, n, M) * eb.sumS,
           expansion_constant(ConstantKind::pe_ub, n, M) * eb.sumS};
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
  if (!close(eb.mi.lower * n, eb.mmse.lower) || !close(eb.mi.upper * n, eb.mmse.upper))
    throw NumericError("epsilon_bounds: mi and mmse coefficients are inconsistent");
  return eb;
}

ExpansionCurves evaluate_expansion(const ExpansionBounds& eb, const SnrGrid& grid) {
  ExpansionCurves out;
  for (double s : grid.points()) {
    const double sd = std::pow(s, eb.d);
    out.snr.push_back(s);
    out.mi_lb.push_back(eb.logM_limit - eb.mi.upper / sd);
    out.mi_ub.push_back(eb.logM_limit - eb.mi.lower / sd);
    out.mmse_lb.push_back(eb.mmse.lower / (sd * s));
    out.mmse_ub.push_back(eb.mmse.upper / (sd * s));
    out.pe_lb.push_back(eb.pe.lower / sd);
    out.pe_ub.push_back(eb.pe.upper / sd);
  }
  return out;
}

SnrOffsets snr_offsets(const ExpansionBounds& eb, double eps, double eps_prime) {
  if (!(eps > 0.0) || !(eps_prime > 0.0)) throw InvalidInput("snr_offsets: empirical coefficients must be positive");
  const double a = 10.0 / (eb.d + 1), b = 10.0 / eb.d;
  return {a * std::log10(eb.mmse.lower / eps), a * std::log10(eb.mmse.upper / eps),
          b * std::log10(eb.mi.upper / eps_prime), b * std::log10(eb.mi.lower / eps_prime)};
}

double mmse_offset_spread_db(int M, int d) { return 10.0 / (d + 1) * std::log10(4.0 * (M - 1)); }
double mi_offset_spread_db(int M, int d) { return 10.0 / d * std::log10(4.0 * (M - 1)); }

}  // namespace fadecap
