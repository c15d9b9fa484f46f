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

#pragma once

#include <complex>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fadecap/rng.hpp"

namespace fadecap {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

bool is_finite(const CMatrix& a);
bool is_hermitian(const CMatrix& a, double tol = 1e-12);
bool is_psd(const CMatrix& a, double tol = 1e-10);

// Hermitian PSD square root; eigenvalues below 1e-12 are clamped to zero.
// Throws InvalidInput if a is not Hermitian PSD.
CMatrix hermitian_sqrt(const CMatrix& a);

enum class Family { BPSK, QPSK, QAM16, QAM64, QAM256 };

Family parse_family(std::string_view name);
std::string_view family_name(Family f);

// Equiprobable point set. Columns of points() are the n_t-dimensional points.
class Constellation {
 public:
  explicit Constellation(CMatrix points);

  int n_t() const { return static_cast<int>(points_.rows()); }
  int size() const { return static_cast<int>(points_.cols()); }
  const CMatrix& points() const { return points_; }
  CVector point(int i) const { return points_.col(i); }

 private:
  CMatrix points_;
};

// Per-antenna product of a unit-energy scalar constellation, scaled so that
// the joint covariance is I/n_t. Points are ordered with antenna 0 as the
// most significant digit.
Constellation make_constellation(Family f, int n_t = 1);
Constellation make_constellation(const CMatrix& points);

std::vector<cd> scalar_constellation(Family f);

// Transmit-space squared distances, M x M.
RMatrix pairwise_sq_distances(const Constellation& c);
CMatrix input_covariance(const Constellation& c);
// For every x, -x is also in the set.
bool negation_symmetric(const Constellation& c, double tol = 1e-9);
// For every x and antenna m, flipping the sign of x(m) alone stays in the set.
bool coordinate_negation_symmetric(const Constellation& c, double tol = 1e-9);

struct KissingInfo {
  double min_sq_distance;
  int ordered_pairs_at_min;
};
KissingInfo kissing_diagnostic(const Constellation& c, double rel_tol = 1e-9);

struct CanonicalRayleigh {
  int n_t;
  int n_r;
};

struct CorrelatedRayleigh {
  CMatrix theta_t;
  CMatrix theta_r;
};

// H = sqrt(K/(K+1)) a_r a_t^H + sqrt(1/(K+1)) H_w
struct Ricean {
  double K;
  CVector a_t;
  CVector a_r;
};

class ChannelModel {
 public:
  using Spec = std::variant<CanonicalRayleigh, CorrelatedRayleigh, Ricean>;

  static ChannelModel canonical(int n_t, int n_r);
  static ChannelModel correlated(const CMatrix& theta_t, const CMatrix& theta_r);
  static ChannelModel ricean(double K, const CVector& a_t, const CVector& a_r);

  int n_t() const { return n_t_; }
  int n_r() const { return n_r_; }
  const Spec& spec() const { return spec_; }

  CMatrix sample(Stream& s) const;

 private:
  explicit ChannelModel(Spec spec);

  Spec spec_;
  int n_t_ = 0;
  int n_r_ = 0;
  CMatrix sqrt_t_;
  CMatrix sqrt_r_;
  CMatrix h0_;
};

inline CMatrix sample_channel(const ChannelModel& m, Stream& s) { return m.sample(s); }

double received_sq_distance(const CMatrix& h, const CVector& xi, const CVector& xj);

class SpaceTimeCode {
 public:
  SpaceTimeCode(int n_t, int t, std::vector<CMatrix> codewords);

  int n_t() const { return n_t_; }
  int t() const { return t_; }
  int size() const { return static_cast<int>(codewords_.size()); }
  const CMatrix& codeword(int i) const { return codewords_[i]; }

  // (X_i - X_j)(X_i - X_j)^H
  CMatrix difference_gram(int i, int j) const;
  // Codewords stacked column-major as (n_t t)-vectors. With
  // expand_channel(H, t) this maps H X onto the constellation machinery.
  Constellation as_constellation() const;

 private:
  int n_t_;
  int t_;
  std::vector<CMatrix> codewords_;
};

// I_t (x) H, so that vec(H X) = expand_channel(H, t) vec(X).
CMatrix expand_channel(const CMatrix& h, int t);

class SnrGrid {
 public:
  explicit SnrGrid(std::vector<double> linear);
  static SnrGrid from_db(double start_db, double stop_db, double step_db);
  static SnrGrid from_db_list(const std::vector<double>& db);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<double> points_;
};

double db_to_linear(double db);
double linear_to_db(double x);

}  // namespace fadecap
