/* Copyright 2026 The DDSMC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <Eigen/Core>

#include "ddsmc/gaussian.hpp"

namespace ddsmc {

// y = A x + sigma_y * eps, eps ~ N(0, I).
struct MeasurementModel {
  Eigen::MatrixXd a;  // d_y x d_x, d_y <= d_x
  double sigma_y = 1.0;

  Eigen::Index dim_x() const { return a.cols(); }
  Eigen::Index dim_y() const { return a.rows(); }
  // True when A has nonzeros only on its main diagonal.
  bool IsDiagonal() const;
  void Validate() const;
};

// The measurement after rotating by the SVD A = U S V^T:
//   y' = U^T y = S x' + sigma_y eps',   x' = V^T x.
// Coordinates i < d_y of x' are observed with gain s_i; the rest are free.
struct WhitenedMeasurement {
  Eigen::VectorXd s;        // d_y singular values
  Eigen::MatrixXd u;        // d_y x d_y
  Eigen::MatrixXd v;        // d_x x d_x
  Eigen::VectorXd y_prime;  // U^T y
  double sigma_y = 1.0;

  Eigen::Index dim_x() const { return v.rows(); }
  Eigen::Index dim_y() const { return s.size(); }

  Eigen::VectorXd ToWhitened(const Eigen::VectorXd& x) const { return v.transpose() * x; }
};

// log N(y | A x0, sigma_y^2 I). Throws DegenerateError when sigma_y = 0.
double ExactLogLik(const Eigen::VectorXd& y, const Eigen::VectorXd& x0,
                   const MeasurementModel& model);

// log N(y' | S x0', sigma_y^2 I + rho^2 S S^T) with x0' in the whitened basis.
// rho = 0 gives the exact likelihood in the whitened basis; this is the
// Gaussian approximation of p(y | x_t) around the reconstruction x0hat.
double ApproxLogLik(const Eigen::VectorXd& x0hat_w, double rho, const WhitenedMeasurement& w);

// Closed-form Gaussian posterior over x0' given prior N(x0hat', rho^2 I) and
// the whitened measurement. For i < d_y:
//   var_i  = rho^2 sigma^2 / (s_i^2 rho^2 + sigma^2)
//   mean_i = (s_i rho^2 y'_i + sigma^2 x0hat_i) / (s_i^2 rho^2 + sigma^2)
// and (x0hat_i, rho^2) otherwise. sigma_y = 0 pins observed coordinates to
// y'_i / s_i with zero variance.
DiagGaussian PosteriorX0(const Eigen::VectorXd& y_prime, const Eigen::VectorXd& x0hat_w,
                         double rho, const Eigen::VectorXd& s, double sigma_y);

inline DiagGaussian PosteriorX0(const Eigen::VectorXd& x0hat_w, double rho,
                                const WhitenedMeasurement& w) {
  return PosteriorX0(w.y_prime, x0hat_w, rho, w.s, w.sigma_y);
}

// Thin SVD via the eigendecomposition of the d_y x d_y matrix A A^T, with
// singular values in descending order and each left singular vector signed so
// its first nonzero entry is positive. Diagonal A short-circuits to U = I,
// s_i = |a_ii| and V = diag(sign(a_ii)) completed by the identity.
WhitenedMeasurement Whiten(const MeasurementModel& model, const Eigen::VectorXd& y);

// V x' (back to the original basis).
Eigen::VectorXd Unwhiten(const Eigen::VectorXd& x_prime, const WhitenedMeasurement& w);

}  // namespace ddsmc
