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

#pragma once

#include <array>
#include <vector>

#include "gpmotion/math_util.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

// Half-integer Matern smoothness; fixed per model, never optimized.
enum class MaternNu { Half, ThreeHalves, FiveHalves };

double matern_nu_value(MaternNu nu);
MaternNu matern_nu_from_value(double nu);

enum class KernelVariant {
  // Spatial Matern over p plus, per spatial axis, a 1D Matern over that axis
  // times a periodic kernel over t.
  Composite,
  // Single anisotropic Matern over the joint (px, py, pz, t) input. Its time
  // length scale lives in the axis-x temporal Matern lengthscale slot; the
  // remaining temporal parameters are inert.
  JointMatern,
  // Composite with the spatial Matern replaced by an anisotropic RBF.
  RbfSpatial,
};

// All positive hyperparameters are stored unconstrained ("raw") and pass
// through softplus when evaluated.
struct SpatialKernelParams {
  double variance_raw = 0.0;
  std::array<double, 3> lengthscale_raw = {0.0, 0.0, 0.0};
};

struct AxisMaternParams {
  double variance_raw = 0.0;
  double lengthscale_raw = 0.0;
};

struct PeriodicKernelParams {
  double variance_raw = 0.0;
  double lengthscale_raw = 0.0;
  double period_raw = 0.0;
};

struct AxisTemporalParams {
  AxisMaternParams matern;
  PeriodicKernelParams periodic;
};

struct CompositeKernelParams {
  KernelVariant variant = KernelVariant::Composite;
  MaternNu spatial_nu = MaternNu::ThreeHalves;
  MaternNu temporal_nu = MaternNu::ThreeHalves;
  SpatialKernelParams spatial;
  std::array<AxisTemporalParams, 3> axis;

  // Training defaults, sized for inputs normalized to [0, 1].
  static CompositeKernelParams defaults();
};

// Flat raw-parameter layout, used by the optimizer and checkpoints:
//   [0]    spatial variance
//   [1..3] spatial lengthscales (x, y, z)
//   then per axis j in {x, y, z}, block 4 + 5j:
//   [+0] matern variance  [+1] matern lengthscale
//   [+2] periodic variance  [+3] periodic lengthscale  [+4] periodic period
inline constexpr int kKernelParamCount = 19;

VecX kernel_raw_params(const CompositeKernelParams& p);
void set_kernel_raw_params(CompositeKernelParams& p, const VecX& raw);
// d(constrained)/d(raw) per slot, for chaining gradients to raw space.
std::array<double, kKernelParamCount> kernel_raw_chain(
    const CompositeKernelParams& p);

// Scalar kernel primitives (constrained parameters).
double matern1d(MaternNu nu, double variance, double lengthscale, double dx);
double rbf1d(double variance, double lengthscale, double dx);
double periodic1d(double variance, double lengthscale, double period,
                  double dt);

struct KernelValueGrad {
  double value = 0.0;
  // Partials w.r.t. the constrained parameters, kernel_raw_params layout.
  std::array<double, kKernelParamCount> d_theta{};
  // Partials w.r.t. the first input (px, py, pz, t).
  Vec4 d_x1 = Vec4::Zero();
};

// Evaluation object with constrained values precomputed; cheap to build,
// immutable, safe to share between threads.
class CompositeKernel {
 public:
  explicit CompositeKernel(const CompositeKernelParams& params);

  // Validates inputs (finite) and evaluates. Throws std::invalid_argument
  // "invalid input" on non-finite coordinates.
  double operator()(const Vec4& a, const Vec4& b) const;

  // Evaluation without the finite check, for inner loops over pre-validated
  // point lists.
  double eval_unchecked(const Vec4& a, const Vec4& b) const;

  KernelValueGrad eval_grad(const Vec4& a, const Vec4& b) const;

  // k(x, x); independent of x for every variant.
  double variance_at_identical() const;
  // d k(x,x) / d theta.
  std::array<double, kKernelParamCount> variance_at_identical_grad() const;

  const CompositeKernelParams& params() const { return params_; }

 private:
  CompositeKernelParams params_;
  // Constrained values.
  double s_var_;
  std::array<double, 3> s_ell_;
  struct AxisConstrained {
    double m_var, m_ell, p_var, p_ell, p_tau;
  };
  std::array<AxisConstrained, 3> ax_;
  double sqrt2nu_s_;  // sqrt(2 nu) for the spatial / joint Matern
  double sqrt2nu_t_;  // sqrt(2 nu) for the per-axis Materns
};

// Symmetric Gram with `jitter` added on the diagonal. Jitter belongs only to
// the square same-list case; cross covariances never get it.
MatX gram_matrix(const CompositeKernel& k, const std::vector<Vec4>& X,
                 double jitter);
MatX cross_gram(const CompositeKernel& k, const std::vector<Vec4>& A,
                const std::vector<Vec4>& B);

// Adjoint-weighted gradient accumulation for a symmetric Gram over Z:
// theta_grad[p] += sum_{i,j} adjoint(i,j) * d k(z_i, z_j) / d theta[p], and,
// when z_grad is non-null, the matching location gradients. The kernel is
// stationary, so diagonal terms contribute only variance partials.
void accumulate_symmetric_gram_grad(const CompositeKernel& k,
                                    const std::vector<Vec4>& Z,
                                    const MatX& adjoint,
                                    std::array<double, kKernelParamCount>& theta_grad,
                                    std::vector<Vec4>* z_grad);

// Same for a rectangular Gram, rows indexed by Z, columns by X. Only Z rows
// receive location gradients.
void accumulate_cross_gram_grad(const CompositeKernel& k,
                                const std::vector<Vec4>& Z,
                                const std::vector<Vec4>& X,
                                const MatX& adjoint,
                                std::array<double, kKernelParamCount>& theta_grad,
                                std::vector<Vec4>* z_grad);

// theta_grad[p] += total_weight * d k(x, x) / d theta[p].
void accumulate_diag_grad(const CompositeKernel& k, double total_weight,
                          std::array<double, kKernelParamCount>& theta_grad);

// Mean functions m(x): constant c, or c + A sin(2 pi t / T + phi).
enum class MeanVariant { Constant, Periodic };

struct MeanFunctionParams {
  MeanVariant variant = MeanVariant::Constant;
  double c = 0.0;
  double amplitude = 0.0;
  double period_raw = 0.0;  // softplus -> T
  double phase = 0.0;

  static MeanFunctionParams constant(double c);
  static MeanFunctionParams periodic(double c, double amplitude, double period,
                                     double phase);
};

// Flat mean-parameter layout: [c, amplitude, period(raw slot), phase].
// Constant means keep the trailing three slots inert.
inline constexpr int kMeanParamCount = 4;

VecX mean_raw_params(const MeanFunctionParams& p);
void set_mean_raw_params(MeanFunctionParams& p, const VecX& raw);
std::array<double, kMeanParamCount> mean_raw_chain(const MeanFunctionParams& p);

double mean_eval(const MeanFunctionParams& p, double t);

struct MeanValueGrad {
  double value = 0.0;
  std::array<double, kMeanParamCount> d_theta{};  // wrt (c, A, T, phi)
};
MeanValueGrad mean_eval_grad(const MeanFunctionParams& p, double t);

}  // namespace gpmotion
