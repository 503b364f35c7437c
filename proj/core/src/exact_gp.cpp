/*
 * Copyright 2026 The gpmotion Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gpmotion/exact_gp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gpmotion/errors.hpp"

namespace gpmotion {

ExactGP::ExactGP(const CompositeKernelParams& kernel,
                 const MeanFunctionParams& mean, double noise_variance)
    : kernel_(kernel), mean_(mean), noise_raw_(inv_softplus(noise_variance)) {}

double ExactGP::noise_variance() const { return softplus(noise_raw_); }

void ExactGP::condition(std::vector<Vec4> X, VecX y) {
  if (static_cast<Eigen::Index>(X.size()) != y.size())
    throw std::invalid_argument("condition: input/target size mismatch");
  if (!y.allFinite()) throw std::invalid_argument("invalid input");
  X_ = std::move(X);
  y_ = std::move(y);
  refactorize();
}

void ExactGP::refactorize() {
  conditioned_ = false;
  if (X_.empty()) return;
  const CompositeKernel k(kernel_);
  const auto n = static_cast<Eigen::Index>(X_.size());
  MatX Ky = gram_matrix(k, X_, 0.0);
  Ky.diagonal().array() += noise_variance();
  // Escalating jitter; the noise term usually regularizes well enough on its
  // own, the ladder covers near-zero noise with duplicated inputs.
  for (const double jitter : {0.0, 1e-6, 1e-4, 1e-3}) {
    MatX attempt = Ky;
    attempt.diagonal().array() += jitter;
    llt_.compute(attempt);
    if (llt_.info() == Eigen::Success) {
      VecX r(n);
      for (Eigen::Index i = 0; i < n; ++i)
        r[i] = y_[i] - mean_eval(mean_, X_[i][3]);
      alpha_ = llt_.solve(r);
      conditioned_ = true;
      return;
    }
  }
  throw NumericalError("ill-conditioned");
}

double ExactGP::posterior_mean(const Vec4& x) const {
  const CompositeKernel k(kernel_);
  if (X_.empty()) return mean_eval(mean_, x[3]);
  const auto n = static_cast<Eigen::Index>(X_.size());
  VecX kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) kstar[i] = k(x, X_[i]);
  return mean_eval(mean_, x[3]) + kstar.dot(alpha_);
}

double ExactGP::posterior_variance(const Vec4& x) const {
  const CompositeKernel k(kernel_);
  if (X_.empty()) return k.variance_at_identical();
  const auto n = static_cast<Eigen::Index>(X_.size());
  VecX kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) kstar[i] = k(x, X_[i]);
  const double v = k.variance_at_identical() - kstar.dot(llt_.solve(kstar));
  return std::max(v, 0.0);
}

double ExactGP::log_marginal_likelihood() const {
  if (!conditioned_)
    throw std::invalid_argument("log marginal requires conditioning data");
  const auto n = static_cast<Eigen::Index>(X_.size());
  VecX r(n);
  for (Eigen::Index i = 0; i < n; ++i)
    r[i] = y_[i] - mean_eval(mean_, X_[i][3]);
  const double logdet =
      2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * r.dot(alpha_) - 0.5 * logdet -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

VecX ExactGP::log_marginal_gradient_raw() const {
  if (!conditioned_)
    throw std::invalid_argument("log marginal requires conditioning data");
  const CompositeKernel k(kernel_);
  const auto n = static_cast<Eigen::Index>(X_.size());

  // d lml / d K = (alpha alpha^T - Ky^{-1}) / 2.
  MatX Kinv = llt_.solve(MatX::Identity(n, n));
  MatX adj = 0.5 * (alpha_ * alpha_.transpose() - Kinv);

  std::array<double, kKernelParamCount> theta_grad{};
  accumulate_symmetric_gram_grad(k, X_, adj, theta_grad, nullptr);

  VecX grad = VecX::Zero(kExactGpParamCount);
  const auto kchain = kernel_raw_chain(kernel_);
  for (int i = 0; i < kKernelParamCount; ++i)
    grad[i] = theta_grad[i] * kchain[i];

  const auto mchain = mean_raw_chain(mean_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const MeanValueGrad mg = mean_eval_grad(mean_, X_[i][3]);
    for (int p = 0; p < kMeanParamCount; ++p)
      grad[kKernelParamCount + p] += alpha_[i] * mg.d_theta[p] * mchain[p];
  }

  // Noise enters through the diagonal: d lml / d sigma_n^2
  //   = (alpha^T alpha - tr(Ky^{-1})) / 2.
  grad[kNoiseSlot] =
      0.5 * (alpha_.squaredNorm() - Kinv.trace()) * sigmoid(noise_raw_);
  return grad;
}

VecX ExactGP::raw_parameters() const {
  VecX raw(kExactGpParamCount);
  raw.head(kKernelParamCount) = kernel_raw_params(kernel_);
  raw.segment(kKernelParamCount, kMeanParamCount) = mean_raw_params(mean_);
  raw[kNoiseSlot] = noise_raw_;
  return raw;
}

void ExactGP::set_raw_parameters(const VecX& raw) {
  if (raw.size() != kExactGpParamCount)
    throw std::invalid_argument("exact gp raw parameter vector has wrong size");
  set_kernel_raw_params(kernel_, raw.head(kKernelParamCount));
  VecX mraw = raw.segment(kKernelParamCount, kMeanParamCount);
  set_mean_raw_params(mean_, mraw);
  noise_raw_ = raw[kNoiseSlot];
  if (!X_.empty()) refactorize();
}

}  // namespace gpmotion
