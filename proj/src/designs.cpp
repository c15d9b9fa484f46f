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

#include "fadecap/designs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fadecap/asymptotics.hpp"
#include "fadecap/error.hpp"
#include "parallel.hpp"

namespace fadecap {

namespace {

double mean_pair_distance(const Constellation& c) {
  return pairwise_sq_distances(c).sum() / c.size();
}

void check_subchannels(const std::vector<SubchannelSpec>& subs, double budget) {
  if (subs.empty()) throw InvalidInput("power allocation: no subchannels");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw InvalidInput("power allocation: budget must be positive");
  for (const auto& s : subs) {
    if (s.constellation.n_t() != 1) throw InvalidInput("power allocation: subchannel constellations must be scalar");
    double var = std::visit([](const auto& f) { return f.variance; }, s.fading);
    if (!(var > 0.0) || !std::isfinite(var)) throw InvalidInput("power allocation: fading variance must be positive");
  }
}

PowerAllocation proportional(const std::vector<double>& w, double budget) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  PowerAllocation a;
  a.budget = budget;
  for (double v : w) a.p.push_back(budget * v / total);
  return a;
}

}  // namespace

std::vector<double> palloc_coefficients(const std::vector<SubchannelSpec>& subs) {
  std::vector<double> c;
  for (const auto& s : subs) {
    double var = std::visit([](const auto& f) { return f.variance; }, s.fading);
    double los = 0.0;
    if (const auto* r = std::get_if<RiceanFading>(&s.fading)) los = std::norm(r->mean) / var;
    c.push_back(std::exp(-los) / (mean_pair_distance(s.constellation) * var));
  }
  return c;
}

PowerAllocation palloc_rayleigh_highsnr(const std::vector<SubchannelSpec>& subs, double budget) {
  check_subchannels(subs, budget);
  for (const auto& s : subs)
    if (!std::holds_alternative<RayleighFading>(s.fading))
      throw InvalidInput("palloc_rayleigh_highsnr: mixed fading variants");
  std::vector<double> w;
  for (double c : palloc_coefficients(subs)) w.push_back(std::sqrt(c));
  return proportional(w, budget);
}

PowerAllocation palloc_ricean_highsnr(const std::vector<SubchannelSpec>& subs, double budget) {
  check_subchannels(subs, budget);
  for (const auto& s : subs)
    if (!std::holds_alternative<RiceanFading>(s.fading))
      throw InvalidInput("palloc_ricean_highsnr: mixed fading variants");
  std::vector<double> w;
  for (double c : palloc_coefficients(subs)) w.push_back(std::sqrt(c));
  return proportional(w, budget);
}

namespace {

class CrnObjective {
 public:
  CrnObjective(const std::vector<SubchannelSpec>& subs, double snr, const McConfig& cfg)
      : subs_(subs), snr_(snr), cfg_(cfg) {}

  // Per-channel-draw samples of sum_k I_k(snr p_k).
  std::vector<double> samples(const std::vector<double>& p) {
    ++evaluations;
    std::vector<double> total(cfg_.channel_draws, 0.0);
    for (std::size_t k = 0; k < subs_.size(); ++k) {
      const double logm = std::log(static_cast<double>(subs_[k].constellation.size()));
      if (p[k] <= 0.0) continue;
      McConfig ck = cfg_;
      ck.seed = splitmix64(cfg_.seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
      cd mean = 0.0;
      double var = 0.0;
      if (const auto* r = std::get_if<RiceanFading>(&subs_[k].fading)) {
        mean = r->mean;
        var = r->variance;
      } else {
        var = std::get<RayleighFading>(subs_[k].fading).variance;
      }
      const double sd = std::sqrt(var);
      auto sampler = [mean, sd](Stream& s) {
        CMatrix h(1, 1);
        h(0, 0) = mean + sd * s.cn();
        return h;
      };
      auto gap = per_channel_gap(snr_ * p[k], sampler, subs_[k].constellation.points(), ck);
      for (std::size_t j = 0; j < gap.size(); ++j) total[j] += logm - gap[j];
    }
    return total;
  }

  double mean(const std::vector<double>& p) {
    auto s = samples(p);
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  }

  int evaluations = 0;

 private:
  const std::vector<SubchannelSpec>& subs_;
  double snr_;
  McConfig cfg_;
};

Estimate summarize(const std::vector<double>& s) {
  detail::Accumulator a;
  for (double v : s) a.add(v);
  return a.estimate();
}

}  // namespace

Estimate parallel_capacity(const std::vector<SubchannelSpec>& subs, const std::vector<double>& p, double snr,
                           const McConfig& cfg) {
  if (p.size() != subs.size()) throw InvalidInput("parallel_capacity: power vector size mismatch");
  cfg.validate();
  CrnObjective obj(subs, snr, cfg);
  return summarize(obj.samples(p));
}

NumericAllocation palloc_numeric(const std::vector<SubchannelSpec>& subs, double budget, double snr,
                                 const McConfig& cfg) {
  check_subchannels(subs, budget);
  if (subs.size() > 4) throw InvalidInput("palloc_numeric: at most 4 subchannels");
  if (!(snr > 0.0)) throw InvalidInput("palloc_numeric: snr must be positive");
  cfg.validate();
  const std::size_t K = subs.size();
  CrnObjective obj(subs, snr, cfg);
  NumericAllocation out;
  out.allocation.budget = budget;

  std::vector<double> p(K, budget / K);
  if (K == 1) {
    p[0] = budget;
  } else {
    std::vector<double> c = palloc_coefficients(subs);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += std::sqrt(c[k]);
    for (std::size_t k = 0; k < K; ++k) p[k] = budget * std::sqrt(c[k]) / total;

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int sweep = 0; sweep < 10; ++sweep) {
      double moved = 0.0;
      for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = a + 1; b < K; ++b) {
          const double pair = p[a] + p[b];
          auto f = [&](double t) {
            std::vector<double> q = p;
            q[a] = t;
            q[b] = pair - t;
            return obj.mean(q);
          };
          double lo = 0.0, hi = pair;
          double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
          double f1 = f(x1), f2 = f(x2);
          while (hi - lo > 1e-4 * budget) {
            if (f1 < f2) {
              lo = x1;
              x1 = x2;
              f1 = f2;
              x2 = lo + invphi * (hi - lo);
              f2 = f(x2);
            } else {
              hi = x2;
              x2 = x1;
              f2 = f1;
              x1 = hi - invphi * (hi - lo);
              f1 = f(x1);
            }
          }
          const double t = 0.5 * (lo + hi);
          moved = std::max(moved, std::abs(t - p[a]));
          p[a] = t;
          p[b] = pair - t;
        }
      }
      if (moved < 1e-3 * budget) break;
    }
  }

  auto base = obj.samples(p);
  Estimate e = summarize(base);
  out.objective = e.mean;
  out.objective_se = e.std_error;

  // The optimum is resolved if moving 5% of the budget along any pair
  // direction is measurably worse.
  const double delta = 0.05 * budget;
  for (std::size_t a = 0; a < K && K > 1; ++a) {
    for (std::size_t b = 0; b < K; ++b) {
      if (a == b || p[b] < delta) continue;
      std::vector<double> q = p;
      q[a] += delta;
      q[b] -= delta;
      auto other = obj.samples(q);
      std::vector<double> diff(base.size());
      for (std::size_t j = 0; j < base.size(); ++j) diff[j] = base[j] - other[j];
      Estimate d = summarize(diff);
      if (d.mean < 2.0 * d.std_error) out.low_confidence = true;
    }
  }
  out.allocation.p = p;
  out.evaluations = obj.evaluations;
  return out;
}

namespace {

struct Receive {
  int modes;
  double log_det;
};

Receive receive_factor(const CMatrix& theta_r) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(theta_r, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  Receive r{0, 0.0};
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > 1e-10 * ev.maxCoeff()) {
      ++r.modes;
      r.log_det += std::log(ev(k));
    }
  }
  return r;
}

std::vector<CVector> differences(const Constellation& c) {
  std::vector<CVector> e;
  for (int i = 0; i < c.size(); ++i)
    for (int j = 0; j < c.size(); ++j)
      if (i != j) e.push_back(c.point(i) - c.point(j));
  return e;
}

double objective_from(const std::vector<CVector>& diffs, const CMatrix& theta_t, const CMatrix& P, int n,
                      double scale) {
  CMatrix a = P.adjoint() * theta_t * P;
  double f = 0.0;
  for (const auto& e : diffs) {
    double v = (e.adjoint() * a * e)(0, 0).real();
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    f += std::pow(v, -n);
  }
  return f * scale;
}

// d f / d conj(P)
CMatrix gradient(const std::vector<CVector>& diffs, const CMatrix& theta_t, const CMatrix& P, int n, double scale) {
  CMatrix tp = theta_t * P;
  CMatrix acc = CMatrix::Zero(P.cols(), P.cols());
  CMatrix a = P.adjoint() * tp;
  for (const auto& e : diffs) {
    double v = (e.adjoint() * a * e)(0, 0).real();
    acc += (-n * std::pow(v, -n - 1)) * (e * e.adjoint());
  }
  return scale * tp * acc;
}

CMatrix project(const CMatrix& P, double budget) {
  double nrm = P.squaredNorm();
  return nrm > budget ? CMatrix(P * std::sqrt(budget / nrm)) : P;
}

// Gradient component tangent to the sphere tr(P P^H) = budget, relative to
// the objective scale.
double sphere_residual(const CMatrix& g, const CMatrix& P, double f, int n) {
  double radial = (P.adjoint() * g).trace().real() / P.squaredNorm();
  CMatrix t = g - radial * P;
  return t.norm() * P.norm() / (n * f);
}

}  // namespace

double precoder_objective(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r, const CMatrix& P) {
  Receive r = receive_factor(theta_r);
  return objective_from(differences(c), theta_t, P, r.modes, std::exp(-r.log_det));
}

double precoder_objective(const Constellation& c, int n_r, const CMatrix& P) {
  const int nt = c.n_t();
  return objective_from(differences(c), CMatrix::Identity(nt, nt), P, n_r, 1.0);
}

double alignment_angle(const CMatrix& P, const CMatrix& theta_t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(theta_t);
  const auto& ev = es.eigenvalues();
  Eigen::JacobiSVD<CMatrix> svd(P, Eigen::ComputeFullU);
  const CMatrix& U = svd.matrixU();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    double best = 0.0;
    Eigen::Index g = 0;
    while (g < ev.size()) {
      Eigen::Index h = g;
      while (h + 1 < ev.size() && ev(h + 1) - ev(g) <= 1e-9 * std::max(1.0, std::abs(ev(g)))) ++h;
      CMatrix basis = es.eigenvectors().middleCols(g, h - g + 1);
      best = std::max(best, (basis.adjoint() * U.col(k)).norm());
      g = h + 1;
    }
    worst = std::max(worst, std::acos(std::min(1.0, best)));
  }
  return worst;
}

namespace {

struct Problem {
  std::vector<CVector> diffs;
  CMatrix theta_t;
  int modes;
  double scale;
  double budget;
};

Problem make_problem(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r, int n_r, double budget) {
  ChannelModel::correlated(theta_t, theta_r);
  if (theta_t.rows() != c.n_t()) throw InvalidInput("precoder: theta_t size does not match constellation n_t");
  if (theta_r.rows() != n_r) throw InvalidInput("precoder: theta_r size does not match n_r");
  if (!(budget > 0.0)) throw InvalidInput("precoder: budget must be positive");
  Eigen::SelfAdjointEigenSolver<CMatrix> est(theta_t);
  if (est.eigenvalues().minCoeff() <= 1e-10 * est.eigenvalues().maxCoeff())
    throw InvalidInput("precoder: degenerate theta_t is not supported");
  const Receive rf = receive_factor(theta_r);
  return {differences(c), theta_t, rf.modes, std::exp(-rf.log_det), budget};
}

struct Descent {
  PrecoderReport report;
  bool converged = false;
};

Descent descend(const Problem& pb, const CMatrix& start) {
  CMatrix P = project(start, pb.budget);
  double f = objective_from(pb.diffs, pb.theta_t, P, pb.modes, pb.scale);
  double step = 1.0 / std::max(f, 1.0);
  int it = 0;
  bool converged = false;
  for (; it < 100000; ++it) {
    CMatrix g = gradient(pb.diffs, pb.theta_t, P, pb.modes, pb.scale);
    if (sphere_residual(g, P, f, pb.modes) < 1e-11) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      CMatrix cand = project(P - step * g, pb.budget);
      double fc = objective_from(pb.diffs, pb.theta_t, cand, pb.modes, pb.scale);
      // Armijo on the projected step
      if (fc <= f - 1e-4 / step * (cand - P).squaredNorm()) {
        double rel = (f - fc) / f;
        P = cand;
        f = fc;
        accepted = true;
        step *= 2.0;
        if (rel < 1e-16) converged = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || converged) {
      converged = true;
      break;
    }
  }
  Descent d;
  d.converged = converged;
  d.report.objective = f;
  d.report.precoder = {P, pb.budget};
  d.report.iterations = it;
  d.report.stationarity_residual =
      sphere_residual(gradient(pb.diffs, pb.theta_t, P, pb.modes, pb.scale), P, f, pb.modes);
  d.report.numeric_path = true;
  d.report.alignment_angle = alignment_angle(P, pb.theta_t);
  return d;
}

}  // namespace

PrecoderReport precoder_correlated(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r, int n_r,
                                   double budget, int restarts, std::uint64_t seed) {
  const Problem pb = make_problem(c, theta_t, theta_r, n_r, budget);
  const int nt = c.n_t();
  Eigen::SelfAdjointEigenSolver<CMatrix> est(theta_t);

  std::vector<CMatrix> starts;
  starts.push_back(CMatrix::Identity(nt, nt) * std::sqrt(budget / nt));
  starts.push_back(est.eigenvectors() * std::sqrt(budget / nt));
  Stream rs(seed, 0);
  for (int k = 2; k < std::max(restarts, 2); ++k) {
    CMatrix P(nt, nt);
    for (Eigen::Index a = 0; a < P.size(); ++a) P(a) = rs.cn();
    starts.push_back(P * std::sqrt(budget / P.squaredNorm()));
  }

  Descent best;
  best.report.objective = std::numeric_limits<double>::infinity();
  bool converged_any = false;
  for (const CMatrix& start : starts) {
    Descent d = descend(pb, start);
    if (d.report.objective < best.report.objective) best = d;
    converged_any = converged_any || d.converged;
  }
  if (!converged_any || best.report.stationarity_residual > 1e-6)
    throw PrecoderNotConverged("precoder: projected gradient did not converge", best.report);
  return best.report;
}

PrecoderReport precoder_correlated_from(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r,
                                        int n_r, double budget, const CMatrix& start) {
  const Problem pb = make_problem(c, theta_t, theta_r, n_r, budget);
  if (start.rows() != c.n_t() || start.cols() != c.n_t() || !is_finite(start) || start.norm() == 0.0)
    throw InvalidInput("precoder: start must be a finite nonzero n_t x n_t matrix");
  Descent d = descend(pb, start * std::sqrt(budget / start.squaredNorm()));
  if (!d.converged || d.report.stationarity_residual > 1e-6)
    throw PrecoderNotConverged("precoder: projected gradient did not converge", d.report);
  return d.report;
}

PrecoderReport precoder_canonical(const Constellation& c, int n_r, double budget) {
  if (n_r < 1) throw InvalidInput("precoder: n_r must be >= 1");
  if (!(budget > 0.0)) throw InvalidInput("precoder: budget must be positive");
  const int nt = c.n_t();
  if (!coordinate_negation_symmetric(c)) {
    CMatrix eye = CMatrix::Identity(nt, nt);
    CMatrix theta_r = CMatrix::Identity(n_r, n_r);
    return precoder_correlated(c, eye, theta_r, n_r, budget);
  }
  PrecoderReport r;
  r.precoder = {CMatrix::Identity(nt, nt) * std::sqrt(budget / nt), budget};
  r.objective = precoder_objective(c, n_r, r.precoder.P);
  // Gradient in Z = P^H P at Z* = (budget/n_t) I; stationarity needs it to be
  // a multiple of the identity.
  const double zs = budget / nt;
  CMatrix gz = CMatrix::Zero(nt, nt);
  for (const auto& e : differences(c)) {
    double v = zs * e.squaredNorm();
    gz += (-n_r * std::pow(v, -n_r - 1)) * (e * e.adjoint());
  }
  CMatrix dev = gz - (gz.trace() / static_cast<double>(nt)) * CMatrix::Identity(nt, nt);
  r.stationarity_residual = dev.norm() / gz.norm();
  if (r.stationarity_residual > 1e-8) throw NumericError("precoder: canonical solution is not stationary");
  r.alignment_angle = 0.0;
  return r;
}

StCriteria st_criteria(const SpaceTimeCode& code, int n_r) {
  if (n_r < 1) throw InvalidInput("st_criteria: n_r must be >= 1");
  StCriteria out;
  out.r_min = std::numeric_limits<int>::max();
  struct PairData {
    int rank;
    double value;
  };
  std::vector<PairData> pairs;
  for (int i = 0; i < code.size(); ++i) {
    for (int j = 0; j < code.size(); ++j) {
      if (i == j) continue;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(code.difference_gram(i, j), Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      const double top = ev.maxCoeff();
      int rank = 0;
      double logv = 0.0;
      for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) > 1e-10 * top) {
          ++rank;
          logv -= n_r * std::log(ev(k));
        }
      }
      pairs.push_back({rank, std::exp(logv)});
      out.r_min = std::min(out.r_min, rank);
    }
  }
  for (const auto& p : pairs)
    if (p.rank == out.r_min) out.criterion += p.value;
  out.d = n_r * out.r_min;
  out.extrapolated = code.n_t() != 2 || n_r > 2;
  return out;
}

Ordering compare_criteria(const StCriteria& a, const StCriteria& b) {
  if (a.r_min != b.r_min) return a.r_min > b.r_min ? Ordering::first_better : Ordering::second_better;
  if (std::abs(a.criterion - b.criterion) <= 1e-12 * std::max(std::abs(a.criterion), std::abs(b.criterion)))
    return Ordering::equal;
  return a.criterion < b.criterion ? Ordering::first_better : Ordering::second_better;
}

Ordering st_compare(const SpaceTimeCode& a, const SpaceTimeCode& b, int n_r) {
  if (a.n_t() != b.n_t() || a.t() != b.t() || a.size() != b.size())
    throw InvalidInput("st_compare: codes must share n_t, t and cardinality");
  return compare_criteria(st_criteria(a, n_r), st_criteria(b, n_r));
}

}  // namespace fadecap
