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

#include "ddsmc/measurement.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "ddsmc/error.hpp"

namespace ddsmc {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

bool MeasurementModel::IsDiagonal() const {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

void MeasurementModel::Validate() const {
  if (a.rows() < 1 || a.cols() < 1) throw ParameterError("empty measurement matrix");
  if (a.rows() > a.cols()) throw ParameterError("measurement needs d_y <= d_x");
  if (!(sigma_y >= 0.0)) throw ParameterError("sigma_y must be nonnegative");
  if (!a.allFinite()) throw ParameterError("measurement matrix has non-finite entries");
}

double ExactLogLik(const Eigen::VectorXd& y, const Eigen::VectorXd& x0,
                   const MeasurementModel& model) {
  if (model.sigma_y <= 0.0) {
    throw DegenerateError("degenerate likelihood: sigma_y = 0 has no density");
  }
  if (y.size() != model.dim_y() || x0.size() != model.dim_x()) {
    throw ParameterError("dimension mismatch in ExactLogLik");
  }
  const double var = model.sigma_y * model.sigma_y;
  const Eigen::VectorXd residual = y - model.a * x0;
  return -0.5 * static_cast<double>(y.size()) * (kLog2Pi + std::log(var)) -
         0.5 * residual.squaredNorm() / var;
}

double ApproxLogLik(const Eigen::VectorXd& x0hat_w, double rho, const WhitenedMeasurement& w) {
  const double sig_sq = w.sigma_y * w.sigma_y;
  const double rho_sq = rho * rho;
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.dim_y(); ++i) {
    const double var = sig_sq + rho_sq * w.s[i] * w.s[i];
    if (!(var > 0.0)) {
      throw DegenerateError("approximate likelihood has a zero covariance entry");
    }
    const double r = w.y_prime[i] - w.s[i] * x0hat_w[i];
    total += -0.5 * (kLog2Pi + std::log(var) + r * r / var);
  }
  return total;
}

DiagGaussian PosteriorX0(const Eigen::VectorXd& y_prime, const Eigen::VectorXd& x0hat_w,
                         double rho, const Eigen::VectorXd& s, double sigma_y) {
  if (s.size() != y_prime.size() || s.size() > x0hat_w.size()) {
    throw ParameterError("dimension mismatch in PosteriorX0");
  }
  const double rho_sq = rho * rho;
  const double sig_sq = sigma_y * sigma_y;
  if (rho_sq == 0.0 && sig_sq == 0.0) {
    throw DegenerateError("x0 posterior undefined for rho = 0 and sigma_y = 0");
  }
  DiagGaussian post;
  post.mean = x0hat_w;
  post.var = Eigen::VectorXd::Constant(x0hat_w.size(), rho_sq);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (sig_sq == 0.0) {
      if (s[i] == 0.0) {
        throw DegenerateError("noiseless measurement with a zero singular value");
      }
      post.mean[i] = y_prime[i] / s[i];
      post.var[i] = 0.0;
      continue;
    }
    const double denom = s[i] * s[i] * rho_sq + sig_sq;
    post.mean[i] = (s[i] * rho_sq * y_prime[i] + sig_sq * x0hat_w[i]) / denom;
    post.var[i] = rho_sq * sig_sq / denom;
  }
  return post;
}

WhitenedMeasurement Whiten(const MeasurementModel& model, const Eigen::VectorXd& y) {
  model.Validate();
  if (y.size() != model.dim_y()) throw ParameterError("measurement vector has wrong size");
  const Eigen::Index dy = model.dim_y();
  const Eigen::Index dx = model.dim_x();

  WhitenedMeasurement w;
  w.sigma_y = model.sigma_y;

  if (model.IsDiagonal()) {
    w.s.resize(dy);
    w.u = Eigen::MatrixXd::Identity(dy, dy);
    w.v = Eigen::MatrixXd::Identity(dx, dx);
    for (Eigen::Index i = 0; i < dy; ++i) {
      const double a = model.a(i, i);
      w.s[i] = std::abs(a);
      if (a < 0.0) w.v(i, i) = -1.0;
      if (a == 0.0 && model.sigma_y == 0.0) {
        throw DegenerateError("rank-deficient A with sigma_y = 0");
      }
    }
    w.y_prime = y;
    return w;
  }

  const Eigen::MatrixXd gram = model.a * model.a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw DegenerateError("eigendecomposition failed");

  // Eigen returns ascending eigenvalues; reverse to descending.
  w.s.resize(dy);
  w.u.resize(dy, dy);
  for (Eigen::Index i = 0; i < dy; ++i) {
    const Eigen::Index src = dy - 1 - i;
    w.s[i] = std::sqrt(std::max(eig.eigenvalues()[src], 0.0));
    Eigen::VectorXd col = eig.eigenvectors().col(src);
    for (Eigen::Index k = 0; k < dy; ++k) {
      if (col[k] != 0.0) {
        if (col[k] < 0.0) col = -col;
        break;
      }
    }
    w.u.col(i) = col;
  }

  const double tol = 1e-12 * std::max(1.0, w.s[0]) * static_cast<double>(std::max(dx, dy));
  Eigen::Index rank = 0;
  while (rank < dy && w.s[rank] > tol) ++rank;
  if (rank < dy) {
    if (model.sigma_y == 0.0) throw DegenerateError("rank-deficient A with sigma_y = 0");
    w.s.tail(dy - rank).setZero();
  }

  // Right singular vectors for the nonzero singular values, then an
  // orthonormal completion from a full Householder QR.
  Eigen::MatrixXd vr(dx, rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    vr.col(i) = model.a.transpose() * w.u.col(i) / w.s[i];
  }
  w.v.resize(dx, dx);
  if (rank > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(vr);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dx, dx);
    w.v.leftCols(rank) = vr;
    w.v.rightCols(dx - rank) = q.rightCols(dx - rank);
  } else {
    w.v.setIdentity();
  }

  w.y_prime = w.u.transpose() * y;
  return w;
}

Eigen::VectorXd Unwhiten(const Eigen::VectorXd& x_prime, const WhitenedMeasurement& w) {
  if (x_prime.size() != w.dim_x()) throw ParameterError("dimension mismatch in Unwhiten");
  return w.v * x_prime;
}

}  // namespace ddsmc
