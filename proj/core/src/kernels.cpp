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

#include "gpmotion/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpmotion {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/* Matern radial profiles in the scaled distance r = sqrt(2 nu) d / l:
 *   nu = 1/2:  exp(-r)
 *   nu = 3/2:  (1 + r) exp(-r)
 *   nu = 5/2:  (1 + r + r^2/3) exp(-r)
 * g(r) = f'(r) / r is what the chain rule needs; for nu >= 3/2 the ratio is
 * finite at r = 0, for nu = 1/2 the kernel has a gradient cusp there and the
 * gradient is defined as zero. */
double matern_f(MaternNu nu, double r) {
  const double e = std::exp(-r);
  switch (nu) {
    case MaternNu::Half:
      return e;
    case MaternNu::ThreeHalves:
      return (1.0 + r) * e;
    case MaternNu::FiveHalves:
      return (1.0 + r + r * r / 3.0) * e;
  }
  return 0.0;
}

double matern_g(MaternNu nu, double r) {
  const double e = std::exp(-r);
  switch (nu) {
    case MaternNu::Half:
      return r > 1e-14 ? -e / r : 0.0;
    case MaternNu::ThreeHalves:
      return -e;
    case MaternNu::FiveHalves:
      return -(1.0 + r) * e / 3.0;
  }
  return 0.0;
}

bool finite4(const Vec4& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]) &&
         std::isfinite(v[3]);
}

}  // namespace

double matern_nu_value(MaternNu nu) {
  switch (nu) {
    case MaternNu::Half:
      return 0.5;
    case MaternNu::ThreeHalves:
      return 1.5;
    case MaternNu::FiveHalves:
      return 2.5;
  }
  return 1.5;
}

MaternNu matern_nu_from_value(double nu) {
  if (nu == 0.5) return MaternNu::Half;
  if (nu == 1.5) return MaternNu::ThreeHalves;
  if (nu == 2.5) return MaternNu::FiveHalves;
  throw std::invalid_argument("nu must be one of 0.5, 1.5, 2.5");
}

double matern1d(MaternNu nu, double variance, double lengthscale, double dx) {
  const double r =
      std::sqrt(2.0 * matern_nu_value(nu)) * std::abs(dx) / lengthscale;
  return variance * matern_f(nu, r);
}

double rbf1d(double variance, double lengthscale, double dx) {
  const double q = dx / lengthscale;
  return variance * std::exp(-0.5 * q * q);
}

double periodic1d(double variance, double lengthscale, double period,
                  double dt) {
  const double s = std::sin(std::numbers::pi * dt / period);
  return variance * std::exp(-2.0 * s * s / (lengthscale * lengthscale));
}

CompositeKernelParams CompositeKernelParams::defaults() {
  CompositeKernelParams p;
  p.spatial.variance_raw = inv_softplus(0.5);
  for (auto& l : p.spatial.lengthscale_raw) l = inv_softplus(0.3);
  for (auto& ax : p.axis) {
    ax.matern.variance_raw = inv_softplus(1.0 / 3.0);
    ax.matern.lengthscale_raw = inv_softplus(0.5);
    ax.periodic.variance_raw = inv_softplus(1.0);
    ax.periodic.lengthscale_raw = inv_softplus(1.0);
    ax.periodic.period_raw = inv_softplus(0.5);
  }
  return p;
}

VecX kernel_raw_params(const CompositeKernelParams& p) {
  VecX raw(kKernelParamCount);
  raw[0] = p.spatial.variance_raw;
  for (int j = 0; j < 3; ++j) raw[1 + j] = p.spatial.lengthscale_raw[j];
  for (int j = 0; j < 3; ++j) {
    const int base = 4 + 5 * j;
    raw[base + 0] = p.axis[j].matern.variance_raw;
    raw[base + 1] = p.axis[j].matern.lengthscale_raw;
    raw[base + 2] = p.axis[j].periodic.variance_raw;
    raw[base + 3] = p.axis[j].periodic.lengthscale_raw;
    raw[base + 4] = p.axis[j].periodic.period_raw;
  }
  return raw;
}

void set_kernel_raw_params(CompositeKernelParams& p, const VecX& raw) {
  if (raw.size() != kKernelParamCount)
    throw std::invalid_argument("kernel raw parameter vector has wrong size");
  p.spatial.variance_raw = raw[0];
  for (int j = 0; j < 3; ++j) p.spatial.lengthscale_raw[j] = raw[1 + j];
  for (int j = 0; j < 3; ++j) {
    const int base = 4 + 5 * j;
    p.axis[j].matern.variance_raw = raw[base + 0];
    p.axis[j].matern.lengthscale_raw = raw[base + 1];
    p.axis[j].periodic.variance_raw = raw[base + 2];
    p.axis[j].periodic.lengthscale_raw = raw[base + 3];
    p.axis[j].periodic.period_raw = raw[base + 4];
  }
}

std::array<double, kKernelParamCount> kernel_raw_chain(
    const CompositeKernelParams& p) {
  const VecX raw = kernel_raw_params(p);
  std::array<double, kKernelParamCount> chain;
  for (int i = 0; i < kKernelParamCount; ++i) chain[i] = sigmoid(raw[i]);
  return chain;
}

CompositeKernel::CompositeKernel(const CompositeKernelParams& params)
    : params_(params) {
  s_var_ = softplus(params.spatial.variance_raw);
  for (int j = 0; j < 3; ++j)
    s_ell_[j] = softplus(params.spatial.lengthscale_raw[j]);
  for (int j = 0; j < 3; ++j) {
    ax_[j].m_var = softplus(params.axis[j].matern.variance_raw);
    ax_[j].m_ell = softplus(params.axis[j].matern.lengthscale_raw);
    ax_[j].p_var = softplus(params.axis[j].periodic.variance_raw);
    ax_[j].p_ell = softplus(params.axis[j].periodic.lengthscale_raw);
    ax_[j].p_tau = softplus(params.axis[j].periodic.period_raw);
  }
  sqrt2nu_s_ = std::sqrt(2.0 * matern_nu_value(params.spatial_nu));
  sqrt2nu_t_ = std::sqrt(2.0 * matern_nu_value(params.temporal_nu));
}

double CompositeKernel::operator()(const Vec4& a, const Vec4& b) const {
  if (!finite4(a) || !finite4(b)) throw std::invalid_argument("invalid input");
  return eval_unchecked(a, b);
}

double CompositeKernel::eval_unchecked(const Vec4& a, const Vec4& b) const {
  if (params_.variant == KernelVariant::JointMatern) {
    // Anisotropic Matern over (px, py, pz, t); time lengthscale borrowed from
    // the axis-x temporal Matern slot.
    double q = 0.0;
    for (int j = 0; j < 3; ++j) q += square((a[j] - b[j]) / s_ell_[j]);
    q += square((a[3] - b[3]) / ax_[0].m_ell);
    const double r = sqrt2nu_s_ * std::sqrt(q);
    return s_var_ * matern_f(params_.spatial_nu, r);
  }

  double value;
  if (params_.variant == KernelVariant::RbfSpatial) {
    double q = 0.0;
    for (int j = 0; j < 3; ++j) q += square((a[j] - b[j]) / s_ell_[j]);
    value = s_var_ * std::exp(-0.5 * q);
  } else {
    double q = 0.0;
    for (int j = 0; j < 3; ++j) q += square((a[j] - b[j]) / s_ell_[j]);
    const double r = sqrt2nu_s_ * std::sqrt(q);
    value = s_var_ * matern_f(params_.spatial_nu, r);
  }

  const double dt = a[3] - b[3];
  for (int j = 0; j < 3; ++j) {
    const AxisConstrained& ax = ax_[j];
    const double rm = sqrt2nu_t_ * std::abs(a[j] - b[j]) / ax.m_ell;
    const double m = ax.m_var * matern_f(params_.temporal_nu, rm);
    const double s = std::sin(std::numbers::pi * dt / ax.p_tau);
    const double per = ax.p_var * std::exp(-2.0 * s * s / (ax.p_ell * ax.p_ell));
    value += m * per;
  }
  return value;
}

KernelValueGrad CompositeKernel::eval_grad(const Vec4& a, const Vec4& b) const {
  if (!finite4(a) || !finite4(b)) throw std::invalid_argument("invalid input");
  KernelValueGrad out;

  if (params_.variant == KernelVariant::JointMatern) {
    double d[4], ell[4], q = 0.0;
    for (int j = 0; j < 3; ++j) {
      d[j] = a[j] - b[j];
      ell[j] = s_ell_[j];
    }
    d[3] = a[3] - b[3];
    ell[3] = ax_[0].m_ell;
    for (int j = 0; j < 4; ++j) q += square(d[j] / ell[j]);
    const double two_nu = sqrt2nu_s_ * sqrt2nu_s_;
    const double r = sqrt2nu_s_ * std::sqrt(q);
    const double f = matern_f(params_.spatial_nu, r);
    const double g = matern_g(params_.spatial_nu, r);
    out.value = s_var_ * f;
    out.d_theta[0] = f;
    const int ell_slot[4] = {1, 2, 3, 5};  // spatial x,y,z then axis-x matern l
    for (int j = 0; j < 4; ++j) {
      out.d_theta[ell_slot[j]] =
          s_var_ * g * (-two_nu * d[j] * d[j] / (ell[j] * ell[j] * ell[j]));
      out.d_x1[j] = s_var_ * g * (two_nu * d[j] / (ell[j] * ell[j]));
    }
    return out;
  }

  // Spatial term.
  double d[3];
  double q = 0.0;
  for (int j = 0; j < 3; ++j) {
    d[j] = a[j] - b[j];
    q += square(d[j] / s_ell_[j]);
  }
  if (params_.variant == KernelVariant::RbfSpatial) {
    const double e = std::exp(-0.5 * q);
    out.value = s_var_ * e;
    out.d_theta[0] = e;
    for (int j = 0; j < 3; ++j) {
      const double l = s_ell_[j];
      out.d_theta[1 + j] = s_var_ * e * d[j] * d[j] / (l * l * l);
      out.d_x1[j] = -s_var_ * e * d[j] / (l * l);
    }
  } else {
    const double two_nu = sqrt2nu_s_ * sqrt2nu_s_;
    const double r = sqrt2nu_s_ * std::sqrt(q);
    const double f = matern_f(params_.spatial_nu, r);
    const double g = matern_g(params_.spatial_nu, r);
    out.value = s_var_ * f;
    out.d_theta[0] = f;
    for (int j = 0; j < 3; ++j) {
      const double l = s_ell_[j];
      out.d_theta[1 + j] = s_var_ * g * (-two_nu * d[j] * d[j] / (l * l * l));
      out.d_x1[j] = s_var_ * g * (two_nu * d[j] / (l * l));
    }
  }

  // Per-axis Matern x periodic products.
  const double dt = a[3] - b[3];
  const double two_nu_t = sqrt2nu_t_ * sqrt2nu_t_;
  for (int j = 0; j < 3; ++j) {
    const AxisConstrained& ax = ax_[j];
    const int base = 4 + 5 * j;

    const double rm = sqrt2nu_t_ * std::abs(d[j]) / ax.m_ell;
    const double fm = matern_f(params_.temporal_nu, rm);
    const double gm = matern_g(params_.temporal_nu, rm);
    const double m = ax.m_var * fm;
    const double dm_dvar = fm;
    const double dm_dell =
        ax.m_var * gm *
        (-two_nu_t * d[j] * d[j] / (ax.m_ell * ax.m_ell * ax.m_ell));
    const double dm_dx = ax.m_var * gm * (two_nu_t * d[j] / (ax.m_ell * ax.m_ell));

    const double u = std::numbers::pi * dt / ax.p_tau;
    const double s = std::sin(u);
    const double cs = std::cos(u);
    const double l2 = ax.p_ell * ax.p_ell;
    const double e = std::exp(-2.0 * s * s / l2);
    const double per = ax.p_var * e;
    const double dp_dvar = e;
    const double dp_dell = per * 4.0 * s * s / (l2 * ax.p_ell);
    const double dp_dtau = per * 4.0 * s * cs * u / (l2 * ax.p_tau);
    const double dp_dt = per * (-4.0 * s * cs / l2) * (std::numbers::pi / ax.p_tau);

    out.value += m * per;
    out.d_theta[base + 0] = dm_dvar * per;
    out.d_theta[base + 1] = dm_dell * per;
    out.d_theta[base + 2] = m * dp_dvar;
    out.d_theta[base + 3] = m * dp_dell;
    out.d_theta[base + 4] = m * dp_dtau;
    out.d_x1[j] += dm_dx * per;
    out.d_x1[3] += m * dp_dt;
  }
  return out;
}

double CompositeKernel::variance_at_identical() const {
  if (params_.variant == KernelVariant::JointMatern) return s_var_;
  double v = s_var_;
  for (int j = 0; j < 3; ++j) v += ax_[j].m_var * ax_[j].p_var;
  return v;
}

std::array<double, kKernelParamCount>
CompositeKernel::variance_at_identical_grad() const {
  std::array<double, kKernelParamCount> g{};
  g[0] = 1.0;
  if (params_.variant == KernelVariant::JointMatern) return g;
  for (int j = 0; j < 3; ++j) {
    const int base = 4 + 5 * j;
    g[base + 0] = ax_[j].p_var;
    g[base + 2] = ax_[j].m_var;
  }
  return g;
}

MatX gram_matrix(const CompositeKernel& k, const std::vector<Vec4>& X,
                 double jitter) {
  if (X.empty()) throw std::invalid_argument("empty gram");
  for (const Vec4& x : X)
    if (!finite4(x)) throw std::invalid_argument("invalid input");
  const auto n = static_cast<Eigen::Index>(X.size());
  MatX K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = k.variance_at_identical() + jitter;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = k.eval_unchecked(X[i], X[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

MatX cross_gram(const CompositeKernel& k, const std::vector<Vec4>& A,
                const std::vector<Vec4>& B) {
  if (A.empty() || B.empty()) throw std::invalid_argument("empty gram");
  for (const Vec4& x : A)
    if (!finite4(x)) throw std::invalid_argument("invalid input");
  for (const Vec4& x : B)
    if (!finite4(x)) throw std::invalid_argument("invalid input");
  const auto n = static_cast<Eigen::Index>(A.size());
  const auto m = static_cast<Eigen::Index>(B.size());
  MatX K(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      K(i, j) = k.eval_unchecked(A[i], B[j]);
  return K;
}

void accumulate_symmetric_gram_grad(
    const CompositeKernel& k, const std::vector<Vec4>& Z, const MatX& adjoint,
    std::array<double, kKernelParamCount>& theta_grad,
    std::vector<Vec4>* z_grad) {
  const auto m = static_cast<Eigen::Index>(Z.size());
  const auto diag_grad = k.variance_at_identical_grad();
  double diag_weight = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) diag_weight += adjoint(i, i);
  for (int p = 0; p < kKernelParamCount; ++p)
    theta_grad[p] += diag_weight * diag_grad[p];

  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double w = adjoint(i, j) + adjoint(j, i);
      if (w == 0.0) continue;
      const KernelValueGrad g = k.eval_grad(Z[i], Z[j]);
      for (int p = 0; p < kKernelParamCount; ++p)
        theta_grad[p] += w * g.d_theta[p];
      if (z_grad != nullptr) {
        // Stationarity: the gradient w.r.t. the second argument is the
        // negative of the first-argument gradient.
        (*z_grad)[i] += w * g.d_x1;
        (*z_grad)[j] -= w * g.d_x1;
      }
    }
  }
}

void accumulate_cross_gram_grad(
    const CompositeKernel& k, const std::vector<Vec4>& Z,
    const std::vector<Vec4>& X, const MatX& adjoint,
    std::array<double, kKernelParamCount>& theta_grad,
    std::vector<Vec4>* z_grad) {
  const auto m = static_cast<Eigen::Index>(Z.size());
  const auto n = static_cast<Eigen::Index>(X.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = adjoint(i, j);
      if (w == 0.0) continue;
      const KernelValueGrad g = k.eval_grad(Z[i], X[j]);
      for (int p = 0; p < kKernelParamCount; ++p)
        theta_grad[p] += w * g.d_theta[p];
      if (z_grad != nullptr) (*z_grad)[i] += w * g.d_x1;
    }
  }
}

void accumulate_diag_grad(const CompositeKernel& k, double total_weight,
                          std::array<double, kKernelParamCount>& theta_grad) {
  const auto g = k.variance_at_identical_grad();
  for (int p = 0; p < kKernelParamCount; ++p)
    theta_grad[p] += total_weight * g[p];
}

MeanFunctionParams MeanFunctionParams::constant(double c) {
  MeanFunctionParams p;
  p.variant = MeanVariant::Constant;
  p.c = c;
  p.period_raw = inv_softplus(1.0);
  return p;
}

MeanFunctionParams MeanFunctionParams::periodic(double c, double amplitude,
                                                double period, double phase) {
  if (!(period > 0.0)) throw std::invalid_argument("invalid period");
  MeanFunctionParams p;
  p.variant = MeanVariant::Periodic;
  p.c = c;
  p.amplitude = amplitude;
  p.period_raw = inv_softplus(period);
  p.phase = phase;
  return p;
}

VecX mean_raw_params(const MeanFunctionParams& p) {
  VecX raw(kMeanParamCount);
  raw[0] = p.c;
  raw[1] = p.amplitude;
  raw[2] = p.period_raw;
  raw[3] = p.phase;
  return raw;
}

void set_mean_raw_params(MeanFunctionParams& p, const VecX& raw) {
  if (raw.size() != kMeanParamCount)
    throw std::invalid_argument("mean raw parameter vector has wrong size");
  p.c = raw[0];
  p.amplitude = raw[1];
  p.period_raw = raw[2];
  p.phase = raw[3];
}

std::array<double, kMeanParamCount> mean_raw_chain(
    const MeanFunctionParams& p) {
  // c, amplitude and phase are unconstrained; only the period passes through
  // softplus.
  return {1.0, 1.0, sigmoid(p.period_raw), 1.0};
}

double mean_eval(const MeanFunctionParams& p, double t) {
  if (p.variant == MeanVariant::Constant) return p.c;
  const double T = softplus(p.period_raw);
  return p.c + p.amplitude * std::sin(kTwoPi * t / T + p.phase);
}

MeanValueGrad mean_eval_grad(const MeanFunctionParams& p, double t) {
  MeanValueGrad out;
  if (p.variant == MeanVariant::Constant) {
    out.value = p.c;
    out.d_theta = {1.0, 0.0, 0.0, 0.0};
    return out;
  }
  const double T = softplus(p.period_raw);
  const double u = kTwoPi * t / T + p.phase;
  const double s = std::sin(u);
  const double cs = std::cos(u);
  out.value = p.c + p.amplitude * s;
  out.d_theta[0] = 1.0;
  out.d_theta[1] = s;
  out.d_theta[2] = p.amplitude * cs * (-kTwoPi * t / (T * T));
  out.d_theta[3] = p.amplitude * cs;
  return out;
}

}  // namespace gpmotion
