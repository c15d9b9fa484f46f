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

#include "fadecap/model.hpp"

#include <cctype>

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "fadecap/error.hpp"

namespace fadecap {

bool is_finite(const CMatrix& a) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (!std::isfinite(a(k).real()) || !std::isfinite(a(k).imag())) return false;
  }
  return true;
}

bool is_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const CMatrix& a, double tol) {
  if (!is_hermitian(a)) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

CMatrix hermitian_sqrt(const CMatrix& a) {
  if (!is_finite(a) || !is_hermitian(a)) throw InvalidInput("matrix square root: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10) throw InvalidInput("matrix square root: matrix is not positive semi-definite");
  for (Eigen::Index k = 0; k < ev.size(); ++k) ev(k) = ev(k) < 1e-12 ? 0.0 : std::sqrt(ev(k));
  return es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

Family parse_family(std::string_view raw) {
  std::string name(raw);
  for (char& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (name == "BPSK") return Family::BPSK;
  if (name == "QPSK") return Family::QPSK;
  if (name == "QAM16" || name == "16QAM") return Family::QAM16;
  if (name == "QAM64" || name == "64QAM") return Family::QAM64;
  if (name == "QAM256" || name == "256QAM") return Family::QAM256;
  throw InvalidInput("unknown constellation family '" + std::string(raw) + "'");
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::BPSK: return "BPSK";
    case Family::QPSK: return "QPSK";
    case Family::QAM16: return "QAM16";
    case Family::QAM64: return "QAM64";
    case Family::QAM256: return "QAM256";
  }
  return "?";
}

std::vector<cd> scalar_constellation(Family f) {
  if (f == Family::BPSK) return {cd(1, 0), cd(-1, 0)};
  int side = 0;
  switch (f) {
    case Family::QPSK: side = 2; break;
    case Family::QAM16: side = 4; break;
    case Family::QAM64: side = 8; break;
    case Family::QAM256: side = 16; break;
    default: break;
  }
  const int m = side * side;
  const double scale = 1.0 / std::sqrt(2.0 * (m - 1) / 3.0);
  std::vector<cd> pts;
  pts.reserve(m);
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      pts.emplace_back((2 * a - side + 1) * scale, (2 * b - side + 1) * scale);
    }
  }
  return pts;
}

Constellation::Constellation(CMatrix points) : points_(std::move(points)) {
  if (points_.rows() < 1) throw InvalidInput("constellation: points must have at least one dimension");
  if (points_.cols() < 2) throw InvalidInput("constellation: at least two points are required");
  if (!is_finite(points_)) throw InvalidInput("constellation: non-finite point");
  double energy = points_.squaredNorm();
  if (!(energy > 0.0)) throw InvalidInput("constellation: zero average energy");
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if ((points_.col(i) - points_.col(j)).squaredNorm() <= 1e-12) {
        throw InvalidInput("constellation: duplicate points " + std::to_string(i) + " and " +
                           std::to_string(j));
      }
    }
  }
}

Constellation make_constellation(Family f, int n_t) {
  if (n_t < 1) throw InvalidInput("constellation: n_t must be >= 1");
  const auto s = scalar_constellation(f);
  const int q = static_cast<int>(s.size());
  long long m = 1;
  for (int k = 0; k < n_t; ++k) {
    m *= q;
    if (m > (1 << 16)) throw InvalidInput("constellation: joint cardinality too large");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_t));
  CMatrix pts(n_t, m);
  for (long long idx = 0; idx < m; ++idx) {
    long long rest = idx;
    for (int a = n_t - 1; a >= 0; --a) {
      pts(a, idx) = s[rest % q] * scale;
      rest /= q;
    }
  }
  return Constellation(std::move(pts));
}

Constellation make_constellation(const CMatrix& points) { return Constellation(points); }

RMatrix pairwise_sq_distances(const Constellation& c) {
  const int m = c.size();
  RMatrix d = RMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      d(i, j) = d(j, i) = (c.points().col(i) - c.points().col(j)).squaredNorm();
    }
  }
  return d;
}

CMatrix input_covariance(const Constellation& c) {
  return c.points() * c.points().adjoint() / static_cast<double>(c.size());
}

namespace {

bool contains(const Constellation& c, const CVector& x, double tol) {
  for (int k = 0; k < c.size(); ++k) {
    if ((c.points().col(k) - x).squaredNorm() <= tol) return true;
  }
  return false;
}

}  // namespace

bool negation_symmetric(const Constellation& c, double tol) {
  for (int i = 0; i < c.size(); ++i) {
    if (!contains(c, -c.point(i), tol)) return false;
  }
  return true;
}

bool coordinate_negation_symmetric(const Constellation& c, double tol) {
  for (int i = 0; i < c.size(); ++i) {
    for (int a = 0; a < c.n_t(); ++a) {
      CVector x = c.point(i);
      x(a) = -x(a);
      if (!contains(c, x, tol)) return false;
    }
  }
  return true;
}

KissingInfo kissing_diagnostic(const Constellation& c, double rel_tol) {
  RMatrix d = pairwise_sq_distances(c);
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.size(); ++i)
    for (int j = 0; j < c.size(); ++j)
      if (i != j) dmin = std::min(dmin, d(i, j));
  int count = 0;
  for (int i = 0; i < c.size(); ++i)
    for (int j = 0; j < c.size(); ++j)
      if (i != j && d(i, j) <= dmin * (1 + rel_tol)) ++count;
  return {dmin, count};
}

namespace {

void check_correlation(const CMatrix& theta, const char* name) {
  if (theta.rows() < 1 || theta.rows() != theta.cols())
    throw InvalidInput(std::string(name) + " must be square and non-empty");
  if (!is_finite(theta)) throw InvalidInput(std::string(name) + " has non-finite entries");
  if (!is_hermitian(theta)) throw InvalidInput(std::string(name) + " is not Hermitian");
  for (Eigen::Index k = 0; k < theta.rows(); ++k) {
    if (std::abs(theta(k, k) - cd(1, 0)) > 1e-12)
      throw InvalidInput(std::string(name) + " must have unit diagonal");
  }
  if (!is_psd(theta)) throw InvalidInput(std::string(name) + " is not positive semi-definite");
}

}  // namespace

ChannelModel::ChannelModel(Spec spec) : spec_(std::move(spec)) {}

ChannelModel ChannelModel::canonical(int n_t, int n_r) {
  if (n_t < 1 || n_r < 1) throw InvalidInput("channel: antenna counts must be >= 1");
  ChannelModel m(CanonicalRayleigh{n_t, n_r});
  m.n_t_ = n_t;
  m.n_r_ = n_r;
  return m;
}

ChannelModel ChannelModel::correlated(const CMatrix& theta_t, const CMatrix& theta_r) {
  check_correlation(theta_t, "theta_t");
  check_correlation(theta_r, "theta_r");
  ChannelModel m(CorrelatedRayleigh{theta_t, theta_r});
  m.n_t_ = static_cast<int>(theta_t.rows());
  m.n_r_ = static_cast<int>(theta_r.rows());
  m.sqrt_t_ = hermitian_sqrt(theta_t);
  m.sqrt_r_ = hermitian_sqrt(theta_r);
  return m;
}

ChannelModel ChannelModel::ricean(double K, const CVector& a_t, const CVector& a_r) {
  if (!(K >= 0.0) || !std::isfinite(K)) throw InvalidInput("channel: K-factor must be finite and >= 0");
  if (a_t.size() < 1 || a_r.size() < 1) throw InvalidInput("channel: empty array response");
  if (!is_finite(a_t) || !is_finite(a_r)) throw InvalidInput("channel: non-finite array response");
  if (std::abs(a_t.squaredNorm() - static_cast<double>(a_t.size())) > 1e-9)
    throw InvalidInput("channel: ||a_t||^2 must equal n_t");
  if (std::abs(a_r.squaredNorm() - static_cast<double>(a_r.size())) > 1e-9)
    throw InvalidInput("channel: ||a_r||^2 must equal n_r");
  ChannelModel m(Ricean{K, a_t, a_r});
  m.n_t_ = static_cast<int>(a_t.size());
  m.n_r_ = static_cast<int>(a_r.size());
  m.h0_ = a_r * a_t.adjoint();
  return m;
}

CMatrix ChannelModel::sample(Stream& s) const {
  CMatrix hw(n_r_, n_t_);
  for (int c = 0; c < n_t_; ++c)
    for (int r = 0; r < n_r_; ++r) hw(r, c) = s.cn();
  if (std::holds_alternative<CanonicalRayleigh>(spec_)) return hw;
  if (std::holds_alternative<CorrelatedRayleigh>(spec_)) return sqrt_r_ * hw * sqrt_t_;
  const double K = std::get<Ricean>(spec_).K;
  return std::sqrt(K / (K + 1.0)) * h0_ + std::sqrt(1.0 / (K + 1.0)) * hw;
}

double received_sq_distance(const CMatrix& h, const CVector& xi, const CVector& xj) {
  return (h * (xi - xj)).squaredNorm();
}

SpaceTimeCode::SpaceTimeCode(int n_t, int t, std::vector<CMatrix> codewords)
    : n_t_(n_t), t_(t), codewords_(std::move(codewords)) {
  if (n_t < 1 || t < 1) throw InvalidInput("space-time code: n_t and t must be >= 1");
  if (codewords_.size() < 2) throw InvalidInput("space-time code: at least two codewords are required");
  for (const auto& x : codewords_) {
    if (x.rows() != n_t || x.cols() != t) throw InvalidInput("space-time code: codeword shape mismatch");
    if (!is_finite(x)) throw InvalidInput("space-time code: non-finite codeword");
  }
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j)
      if ((codewords_[i] - codewords_[j]).squaredNorm() <= 1e-12)
        throw InvalidInput("space-time code: duplicate codewords " + std::to_string(i) + " and " +
                           std::to_string(j));
}

CMatrix SpaceTimeCode::difference_gram(int i, int j) const {
  CMatrix e = codewords_[i] - codewords_[j];
  return e * e.adjoint();
}

Constellation SpaceTimeCode::as_constellation() const {
  CMatrix pts(n_t_ * t_, size());
  for (int k = 0; k < size(); ++k) pts.col(k) = codewords_[k].reshaped();
  return Constellation(std::move(pts));
}

CMatrix expand_channel(const CMatrix& h, int t) {
  CMatrix out = CMatrix::Zero(h.rows() * t, h.cols() * t);
  for (int k = 0; k < t; ++k) out.block(k * h.rows(), k * h.cols(), h.rows(), h.cols()) = h;
  return out;
}

SnrGrid::SnrGrid(std::vector<double> linear) : points_(std::move(linear)) {
  if (points_.empty()) throw InvalidInput("snr grid: empty");
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!(points_[k] > 0.0) || !std::isfinite(points_[k])) throw InvalidInput("snr grid: values must be positive");
    if (k > 0 && !(points_[k] > points_[k - 1])) throw InvalidInput("snr grid: values must be strictly increasing");
  }
}

SnrGrid SnrGrid::from_db(double start_db, double stop_db, double step_db) {
  if (!(step_db > 0.0)) throw InvalidInput("snr grid: step must be positive");
  if (stop_db < start_db) throw InvalidInput("snr grid: stop below start");
  std::vector<double> db;
  const auto n = static_cast<long>(std::floor((stop_db - start_db) / step_db + 1e-9));
  for (long k = 0; k <= n; ++k) db.push_back(start_db + step_db * k);
  return from_db_list(db);
}

SnrGrid SnrGrid::from_db_list(const std::vector<double>& db) {
  std::vector<double> lin;
  lin.reserve(db.size());
  for (double v : db) lin.push_back(db_to_linear(v));
  return SnrGrid(std::move(lin));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace fadecap
