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

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "gpmotion/dataset.hpp"
#include "gpmotion/kernels.hpp"
#include "gpmotion/rng.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

// One independent output head: kernel and mean hyperparameters, observation
// noise, and a Gaussian variational posterior q(u) = N(m, L L^T) over the
// inducing values. The head models the residual after its mean function, so
// q is regularized towards the zero-mean prior N(0, K_ZZ).
struct SvgpHead {
  CompositeKernelParams kernel;
  MeanFunctionParams mean;
  double noise_raw = 0.0;  // softplus gives the noise variance
  VecX m;                  // M
  VecX L_raw;              // M(M+1)/2 packed row-major lower triangle,
                           // diagonal entries softplus-mapped
};

// Flat parameter vector layout. Inducing inputs come first and are shared by
// all heads; with a shared kernel a single 19-entry block follows, otherwise
// each head carries its own. Per-head tails hold mean, noise and variational
// parameters.
struct ParamLayout {
  int num_inducing = 0;
  bool share_kernel = false;

  int chol_size() const { return num_inducing * (num_inducing + 1) / 2; }
  int head_tail_size() const {
    return kMeanParamCount + 1 + num_inducing + chol_size();
  }
  int z_offset() const { return 0; }
  int z_size() const { return 4 * num_inducing; }
  int kernel_offset(int head) const;
  int mean_offset(int head) const;
  int noise_offset(int head) const { return mean_offset(head) + kMeanParamCount; }
  int m_offset(int head) const { return noise_offset(head) + 1; }
  int chol_offset(int head) const { return m_offset(head) + num_inducing; }
  int total_size() const;
};

struct ElboTerms {
  double elbo = 0.0;
  double expected_loglik = 0.0;
  double kl = 0.0;
};

// Selects which parameter groups receive gradients; the rest stay zero.
// Disabling kernel and inducing together skips the kernel-derivative pass,
// the dominant cost when only the variational posterior is trained.
struct GradientGroups {
  bool kernel = true;
  bool mean = true;
  bool noise = true;
  bool inducing = true;
  bool variational = true;
};

struct Prediction {
  Vec9 mean = Vec9::Zero();
  Vec9 variance = Vec9::Zero();
};

enum class OptimizerKind { Adam, Sgd };

struct FitConfig {
  int iterations = 1000;
  double learning_rate = 1e-2;
  double lr_decay_per_epoch = 0.95;
  int batch_size = 5000;
  double input_noise_variance = 0.02;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool train_kernel = true;
  bool train_mean = true;
  bool train_noise = true;
  bool train_inducing = true;
  bool train_variational = true;
};

struct FitReport {
  std::vector<double> elbo_trace;      // minibatch estimates, one per iteration
  std::vector<double> epoch_mean_elbo;
  double initial_elbo = 0.0;  // full-data bound before the first step
  double final_elbo = 0.0;    // full-data bound after the last step
  int iterations = 0;
  int epochs = 0;
};

struct SvgpOptions {
  CompositeKernelParams kernel = CompositeKernelParams::defaults();
  MeanFunctionParams mean = MeanFunctionParams::constant(0.0);
  double noise_variance = 1e-2;
  bool share_kernel = false;
  double jitter = 1e-6;
};

// Sparse variational GP with kOutputDims independent heads over shared
// inducing inputs. All internal state lives in normalized coordinates; the
// stored Normalization translates at the public prediction boundary.
class SparseGP {
 public:
  // Z is given in normalized coordinates. The variational posterior starts
  // at the prior: m = 0, L = chol(K_ZZ).
  SparseGP(const SvgpOptions& options, const Normalization& normalization,
           std::vector<Vec4> inducing);

  // Copies drop the cached prediction factorizations; they are rebuilt on
  // first use.
  SparseGP(const SparseGP& other);
  SparseGP& operator=(const SparseGP& other);
  SparseGP(SparseGP&&) noexcept;
  SparseGP& operator=(SparseGP&&) noexcept;
  ~SparseGP();

  int num_inducing() const { return static_cast<int>(Z_.size()); }
  const ParamLayout& layout() const { return layout_; }
  const Normalization& normalization() const { return normalization_; }
  const SvgpOptions& options() const { return options_; }
  const std::vector<Vec4>& inducing_inputs() const { return Z_; }
  const SvgpHead& head(int i) const { return heads_[i]; }
  SvgpHead& mutable_head(int i);

  VecX raw_parameters() const;
  void set_raw_parameters(const VecX& raw);

  // Evidence lower bound on a normalized minibatch. scale multiplies the
  // likelihood term (N over batch size); the KL penalty is never scaled.
  ElboTerms elbo_terms(const std::vector<Vec4>& Xn, const MatX& Yn,
                       double scale) const;
  // Gradient with respect to the flat raw parameter vector.
  VecX elbo_gradient(const std::vector<Vec4>& Xn, const MatX& Yn, double scale,
                     ElboTerms* terms = nullptr,
                     const GradientGroups& groups = GradientGroups{}) const;
  // Full-data bound in world coordinates (normalizes internally, scale 1).
  ElboTerms full_elbo(const TrainingData& data) const;

  FitReport fit(const TrainingData& data, const FitConfig& config, Rng& rng);

  Prediction predict(const Vec4& x_world) const;
  Vec9 predict_mean(const Vec4& x_world) const;

 private:
  struct HeadWorkspace;
  struct PredictCache;

  ElboTerms elbo_core(const std::vector<Vec4>& Xn, const MatX& Yn, double scale,
                      VecX* grad, const GradientGroups& groups) const;
  MatX unpack_chol(const SvgpHead& head) const;
  Eigen::LLT<MatX> factorize_inducing(const CompositeKernel& kernel) const;
  void ensure_predict_cache() const;

  SvgpOptions options_;
  Normalization normalization_;
  ParamLayout layout_;
  std::vector<Vec4> Z_;
  std::vector<SvgpHead> heads_;
  mutable std::unique_ptr<PredictCache> predict_cache_;
};

// Serializes the full model state (options, normalization, inducing inputs,
// per-head parameters) so that a reloaded model reproduces predictions and
// bounds bit for bit.
void save_checkpoint(const SparseGP& gp, const std::string& path);
SparseGP load_checkpoint(const std::string& path);

}  // namespace gpmotion
