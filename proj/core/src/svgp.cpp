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

#include "gpmotion/svgp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gpmotion/errors.hpp"

namespace gpmotion {

int ParamLayout::kernel_offset(int head) const {
  if (share_kernel) return z_size();
  return z_size() + head * (kKernelParamCount + head_tail_size());
}

int ParamLayout::mean_offset(int head) const {
  if (share_kernel)
    return z_size() + kKernelParamCount + head * head_tail_size();
  return kernel_offset(head) + kKernelParamCount;
}

int ParamLayout::total_size() const {
  if (share_kernel)
    return z_size() + kKernelParamCount + kOutputDims * head_tail_size();
  return z_size() + kOutputDims * (kKernelParamCount + head_tail_size());
}

struct SparseGP::PredictCache {
  struct HeadCache {
    CompositeKernel kernel;
    MeanFunctionParams mean;
    VecX alpha;  // K_ZZ^-1 m
    MatX W;      // K_ZZ^-1 - K_ZZ^-1 S K_ZZ^-1
  };
  std::vector<HeadCache> heads;
};

SparseGP::SparseGP(const SvgpOptions& options,
                   const Normalization& normalization,
                   std::vector<Vec4> inducing)
    : options_(options),
      normalization_(normalization),
      Z_(std::move(inducing)) {
  if (Z_.empty()) throw ConfigError("at least one inducing point required");
  for (const Vec4& z : Z_) {
    if (!z.allFinite()) throw ConfigError("non-finite inducing input");
  }
  if (!(options_.jitter >= 0.0)) {
    throw ConfigError("jitter must be non-negative");
  }
  if (!(options_.noise_variance > 0.0)) {
    throw ConfigError("noise variance must be positive");
  }
  layout_.num_inducing = num_inducing();
  layout_.share_kernel = options_.share_kernel;

  const int M = num_inducing();
  const CompositeKernel k(options_.kernel);
  const Eigen::LLT<MatX> llt = factorize_inducing(k);
  const MatX L0 = llt.matrixL();
  const double noise_raw = inv_softplus(options_.noise_variance);

  heads_.resize(kOutputDims);
  for (SvgpHead& head : heads_) {
    head.kernel = options_.kernel;
    head.mean = options_.mean;
    head.noise_raw = noise_raw;
    head.m = VecX::Zero(M);
    head.L_raw.resize(layout_.chol_size());
    int idx = 0;
    for (int r = 0; r < M; ++r) {
      for (int c = 0; c <= r; ++c, ++idx) {
        head.L_raw[idx] = (r == c) ? inv_softplus(L0(r, r)) : L0(r, c);
      }
    }
  }
}

SparseGP::SparseGP(const SparseGP& other)
    : options_(other.options_),
      normalization_(other.normalization_),
      layout_(other.layout_),
      Z_(other.Z_),
      heads_(other.heads_) {}

SparseGP& SparseGP::operator=(const SparseGP& other) {
  if (this != &other) {
    options_ = other.options_;
    normalization_ = other.normalization_;
    layout_ = other.layout_;
    Z_ = other.Z_;
    heads_ = other.heads_;
    predict_cache_.reset();
  }
  return *this;
}

SparseGP::SparseGP(SparseGP&&) noexcept = default;
SparseGP& SparseGP::operator=(SparseGP&&) noexcept = default;
SparseGP::~SparseGP() = default;

SvgpHead& SparseGP::mutable_head(int i) {
  predict_cache_.reset();
  return heads_[static_cast<std::size_t>(i)];
}

VecX SparseGP::raw_parameters() const {
  VecX raw(layout_.total_size());
  const int M = num_inducing();
  for (int m = 0; m < M; ++m) raw.segment<4>(4 * m) = Z_[m];
  for (int i = 0; i < kOutputDims; ++i) {
    const SvgpHead& head = heads_[i];
    raw.segment(layout_.kernel_offset(i), kKernelParamCount) =
        kernel_raw_params(head.kernel);
    raw.segment(layout_.mean_offset(i), kMeanParamCount) =
        mean_raw_params(head.mean);
    raw[layout_.noise_offset(i)] = head.noise_raw;
    raw.segment(layout_.m_offset(i), M) = head.m;
    raw.segment(layout_.chol_offset(i), layout_.chol_size()) = head.L_raw;
  }
  return raw;
}

void SparseGP::set_raw_parameters(const VecX& raw) {
  if (raw.size() != layout_.total_size()) {
    throw ConfigError("parameter vector size mismatch");
  }
  predict_cache_.reset();
  const int M = num_inducing();
  for (int m = 0; m < M; ++m) Z_[m] = raw.segment<4>(4 * m);
  for (int i = 0; i < kOutputDims; ++i) {
    SvgpHead& head = heads_[i];
    set_kernel_raw_params(head.kernel,
                          raw.segment(layout_.kernel_offset(i),
                                      kKernelParamCount));
    set_mean_raw_params(head.mean,
                        raw.segment(layout_.mean_offset(i), kMeanParamCount));
    head.noise_raw = raw[layout_.noise_offset(i)];
    head.m = raw.segment(layout_.m_offset(i), M);
    head.L_raw = raw.segment(layout_.chol_offset(i), layout_.chol_size());
  }
}

MatX SparseGP::unpack_chol(const SvgpHead& head) const {
  const int M = num_inducing();
  MatX L = MatX::Zero(M, M);
  int idx = 0;
  for (int r = 0; r < M; ++r) {
    for (int c = 0; c <= r; ++c, ++idx) {
      L(r, c) = (r == c) ? softplus(head.L_raw[idx]) : head.L_raw[idx];
    }
  }
  return L;
}

Eigen::LLT<MatX> SparseGP::factorize_inducing(
    const CompositeKernel& kernel) const {
  const MatX K = gram_matrix(kernel, Z_, 0.0);
  for (const double jitter : {options_.jitter, 1e-4, 1e-3}) {
    MatX attempt = K;
    attempt.diagonal().array() += jitter;
    Eigen::LLT<MatX> llt(attempt);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericalError("ill-conditioned inducing set");
}

ElboTerms SparseGP::elbo_terms(const std::vector<Vec4>& Xn, const MatX& Yn,
                               double scale) const {
  return elbo_core(Xn, Yn, scale, nullptr, GradientGroups{});
}

VecX SparseGP::elbo_gradient(const std::vector<Vec4>& Xn, const MatX& Yn,
                             double scale, ElboTerms* terms,
                             const GradientGroups& groups) const {
  VecX grad;
  const ElboTerms t = elbo_core(Xn, Yn, scale, &grad, groups);
  if (terms) *terms = t;
  return grad;
}

ElboTerms SparseGP::full_elbo(const TrainingData& data) const {
  data.validate();
  const Eigen::Index N = data.size();
  std::vector<Vec4> Xn;
  Xn.reserve(N);
  for (const Vec4& x : data.X) Xn.push_back(normalization_.normalize_input(x));
  MatX Yn(N, kOutputDims);
  for (Eigen::Index r = 0; r < N; ++r) {
    const Vec9 y = data.Y.row(r).transpose();
    Yn.row(r) = normalization_.normalize_output(y).transpose();
  }
  return elbo_core(Xn, Yn, 1.0, nullptr, GradientGroups{});
}

ElboTerms SparseGP::elbo_core(const std::vector<Vec4>& Xn, const MatX& Yn,
                              double scale, VecX* grad,
                              const GradientGroups& groups) const {
  const int M = num_inducing();
  const auto B = static_cast<Eigen::Index>(Xn.size());
  if (Yn.rows() != B || Yn.cols() != kOutputDims) {
    throw ConfigError("batch size mismatch");
  }
  if (!(scale >= 0.0)) throw ConfigError("invalid likelihood scale");

  ElboTerms total;
  std::vector<Vec4> z_grad;
  if (grad) {
    grad->setZero(layout_.total_size());
    z_grad.assign(Z_.size(), Vec4::Zero());
  }
  const bool kernel_pass = grad && (groups.kernel || groups.inducing);

  for (int i = 0; i < kOutputDims; ++i) {
    const SvgpHead& head = heads_[i];
    const CompositeKernel k(head.kernel);
    const Eigen::LLT<MatX> llt = factorize_inducing(k);
    const MatX Kzx = (B == 0) ? MatX(M, 0) : cross_gram(k, Z_, Xn);  // M x B
    const MatX A = llt.solve(Kzx);
    const VecX alpha = llt.solve(head.m);
    const MatX L = unpack_chol(head);
    const MatX LtA = L.transpose() * A;
    const double kss = k.variance_at_identical();

    VecX mean_vals(B);
    std::vector<MeanValueGrad> mean_grads;
    const bool want_mean_grads = grad && groups.mean;
    if (want_mean_grads) mean_grads.reserve(B);
    for (Eigen::Index n = 0; n < B; ++n) {
      if (want_mean_grads) {
        mean_grads.push_back(mean_eval_grad(head.mean, Xn[n][3]));
        mean_vals[n] = mean_grads.back().value;
      } else {
        mean_vals[n] = mean_eval(head.mean, Xn[n][3]);
      }
    }

    const VecX mu = mean_vals + Kzx.transpose() * alpha;
    const VecX r = Yn.col(i) - mu;
    VecX v(B);
    for (Eigen::Index n = 0; n < B; ++n) {
      v[n] = kss - Kzx.col(n).dot(A.col(n)) + LtA.col(n).squaredNorm();
    }

    const double sigma2 = softplus(head.noise_raw);
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * sigma2);
    double ell = 0.0;
    for (Eigen::Index n = 0; n < B; ++n) {
      ell += log_norm - (r[n] * r[n] + v[n]) / (2.0 * sigma2);
    }
    ell *= scale;

    const MatX Lk = llt.matrixL();
    const MatX ratio = Lk.triangularView<Eigen::Lower>().solve(L);
    double logdet_k = 0.0, logdet_s = 0.0;
    for (int d = 0; d < M; ++d) {
      logdet_k += std::log(Lk(d, d));
      logdet_s += std::log(L(d, d));
    }
    const double kl = 0.5 * (ratio.squaredNorm() + head.m.dot(alpha) - M +
                             2.0 * logdet_k - 2.0 * logdet_s);

    total.expected_loglik += ell;
    total.kl += kl;
    total.elbo += ell - kl;

    if (!grad) continue;

    const VecX beta = (scale / sigma2) * r;
    const double cv = -scale / (2.0 * sigma2);
    const VecX a_beta = A * beta;
    const MatX Kinv = llt.solve(MatX::Identity(M, M));

    if (groups.variational) {
      grad->segment(layout_.m_offset(i), M) = a_beta - alpha;
      MatX GL = 2.0 * cv * (A * (A.transpose() * L));
      GL.noalias() -= Kinv * L;
      // The log-determinant contributes the inverse transpose of L, whose
      // lower triangle is the reciprocal diagonal.
      for (int d = 0; d < M; ++d) GL(d, d) += 1.0 / L(d, d);
      int idx = 0;
      for (int rr = 0; rr < M; ++rr) {
        for (int cc = 0; cc <= rr; ++cc, ++idx) {
          double gv = GL(rr, cc);
          if (rr == cc) gv *= sigmoid(head.L_raw[idx]);
          (*grad)[layout_.chol_offset(i) + idx] = gv;
        }
      }
    }
    if (groups.noise) {
      double dsig = 0.0;
      for (Eigen::Index n = 0; n < B; ++n) {
        dsig += -1.0 / (2.0 * sigma2) +
                (r[n] * r[n] + v[n]) / (2.0 * sigma2 * sigma2);
      }
      (*grad)[layout_.noise_offset(i)] =
          scale * dsig * sigmoid(head.noise_raw);
    }
    if (groups.mean) {
      std::array<double, kMeanParamCount> macc{};
      for (Eigen::Index n = 0; n < B; ++n) {
        for (int p = 0; p < kMeanParamCount; ++p) {
          macc[p] += beta[n] * mean_grads[n].d_theta[p];
        }
      }
      const auto chain = mean_raw_chain(head.mean);
      for (int p = 0; p < kMeanParamCount; ++p) {
        (*grad)[layout_.mean_offset(i) + p] = macc[p] * chain[p];
      }
    }
    if (kernel_pass) {
      const MatX SA = L * LtA;
      const MatX H = llt.solve(SA);
      const MatX KinvL = llt.solve(L);
      MatX Gzz = -a_beta * alpha.transpose();
      Gzz.noalias() += cv * (A * A.transpose() - A * H.transpose() -
                             H * A.transpose());
      Gzz.noalias() += 0.5 * (KinvL * KinvL.transpose() +
                              alpha * alpha.transpose() - Kinv);
      MatX Gzx = alpha * beta.transpose();
      Gzx.noalias() += 2.0 * cv * (H - A);

      std::array<double, kKernelParamCount> tacc{};
      std::vector<Vec4>* zg = groups.inducing ? &z_grad : nullptr;
      accumulate_symmetric_gram_grad(k, Z_, Gzz, tacc, zg);
      if (B > 0) accumulate_cross_gram_grad(k, Z_, Xn, Gzx, tacc, zg);
      accumulate_diag_grad(k, cv * static_cast<double>(B), tacc);
      if (groups.kernel) {
        const auto chain = kernel_raw_chain(head.kernel);
        for (int p = 0; p < kKernelParamCount; ++p) {
          (*grad)[layout_.kernel_offset(i) + p] += tacc[p] * chain[p];
        }
      }
    }
  }

  if (grad && groups.inducing) {
    for (int m = 0; m < M; ++m) {
      grad->segment<4>(layout_.z_offset() + 4 * m) = z_grad[m];
    }
  }
  return total;
}

FitReport SparseGP::fit(const TrainingData& data, const FitConfig& config,
                        Rng& rng) {
  data.validate();
  const Eigen::Index N = data.size();
  if (N == 0) throw ConfigError("empty training data");
  if (config.iterations < 0) throw ConfigError("negative iteration count");
  if (config.batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(config.lr_decay_per_epoch > 0.0) || config.lr_decay_per_epoch > 1.0) {
    throw ConfigError("learning-rate decay must be in (0, 1]");
  }

  std::vector<Vec4> Xn;
  Xn.reserve(N);
  for (const Vec4& x : data.X) Xn.push_back(normalization_.normalize_input(x));
  MatX Yn(N, kOutputDims);
  for (Eigen::Index rr = 0; rr < N; ++rr) {
    const Vec9 y = data.Y.row(rr).transpose();
    Yn.row(rr) = normalization_.normalize_output(y).transpose();
  }

  const int B = static_cast<int>(std::min<Eigen::Index>(config.batch_size, N));
  const int iters_per_epoch = static_cast<int>((N + B - 1) / B);
  const GradientGroups groups{config.train_kernel, config.train_mean,
                              config.train_noise, config.train_inducing,
                              config.train_variational};

  VecX flat = raw_parameters();
  VecX m1 = VecX::Zero(flat.size());
  VecX m2 = VecX::Zero(flat.size());
  // Normalized inputs occupy the unit interval in time; periods beyond four
  // spans are unidentifiable and destabilize the period gradient.
  const double period_raw_max = inv_softplus(4.0);

  FitReport report;
  report.initial_elbo = elbo_core(Xn, Yn, 1.0, nullptr, GradientGroups{}).elbo;

  std::vector<Eigen::Index> perm(N);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::vector<Vec4> Xp = Xn;

  for (int iter = 0; iter < config.iterations; ++iter) {
    const int epoch = iter / iters_per_epoch;
    const int pos = iter % iters_per_epoch;
    if (pos == 0) {
      Xp = perturb_spatial(Xn, config.input_noise_variance, rng);
      for (Eigen::Index j = N - 1; j > 0; --j) {
        const auto pick =
            static_cast<Eigen::Index>(rng.uniform_int(
                static_cast<std::uint64_t>(j + 1)));
        std::swap(perm[j], perm[pick]);
      }
    }
    const Eigen::Index b0 = static_cast<Eigen::Index>(pos) * B;
    const auto bn = static_cast<int>(std::min<Eigen::Index>(B, N - b0));
    std::vector<Vec4> Xb(bn);
    MatX Yb(bn, kOutputDims);
    for (int b = 0; b < bn; ++b) {
      Xb[b] = Xp[perm[b0 + b]];
      Yb.row(b) = Yn.row(perm[b0 + b]);
    }

    VecX g;
    const ElboTerms terms =
        elbo_core(Xb, Yb, static_cast<double>(N) / bn, &g, groups);
    if (!std::isfinite(terms.elbo) || !g.allFinite()) {
      throw NumericalError("diverged at iteration " + std::to_string(iter));
    }
    report.elbo_trace.push_back(terms.elbo);

    const double lr = config.learning_rate *
                      std::pow(config.lr_decay_per_epoch, epoch);
    if (config.optimizer == OptimizerKind::Adam) {
      const double t = iter + 1;
      m1 = config.adam_beta1 * m1 + (1.0 - config.adam_beta1) * g;
      m2 = (config.adam_beta2 * m2.array() +
            (1.0 - config.adam_beta2) * g.array().square())
               .matrix();
      const double c1 = 1.0 - std::pow(config.adam_beta1, t);
      const double c2 = 1.0 - std::pow(config.adam_beta2, t);
      flat.array() += lr * (m1.array() / c1) /
                      ((m2.array() / c2).sqrt() + config.adam_epsilon);
    } else {
      flat += lr * g;
    }
    if (groups.kernel) {
      const int blocks = layout_.share_kernel ? 1 : kOutputDims;
      for (int bidx = 0; bidx < blocks; ++bidx) {
        for (int axis = 0; axis < 3; ++axis) {
          const int slot = layout_.kernel_offset(bidx) + 4 + 5 * axis + 4;
          flat[slot] = std::min(flat[slot], period_raw_max);
        }
      }
    }
    set_raw_parameters(flat);
  }

  report.iterations = config.iterations;
  report.epochs =
      (config.iterations + iters_per_epoch - 1) / iters_per_epoch;
  for (int e = 0; e < report.epochs; ++e) {
    const int s = e * iters_per_epoch;
    const int len = std::min(iters_per_epoch, config.iterations - s);
    double acc = 0.0;
    for (int t = 0; t < len; ++t) acc += report.elbo_trace[s + t];
    report.epoch_mean_elbo.push_back(acc / len);
  }
  report.final_elbo = elbo_core(Xn, Yn, 1.0, nullptr, GradientGroups{}).elbo;
  return report;
}

void SparseGP::ensure_predict_cache() const {
  if (predict_cache_) return;
  auto cache = std::make_unique<PredictCache>();
  cache->heads.reserve(kOutputDims);
  const int M = num_inducing();
  for (const SvgpHead& head : heads_) {
    CompositeKernel k(head.kernel);
    const Eigen::LLT<MatX> llt = factorize_inducing(k);
    VecX alpha = llt.solve(head.m);
    const MatX L = unpack_chol(head);
    const MatX Kinv = llt.solve(MatX::Identity(M, M));
    const MatX KinvL = llt.solve(L);
    MatX W = Kinv - KinvL * KinvL.transpose();
    cache->heads.push_back({std::move(k), head.mean, std::move(alpha),
                            std::move(W)});
  }
  predict_cache_ = std::move(cache);
}

Prediction SparseGP::predict(const Vec4& x_world) const {
  if (!x_world.allFinite()) throw std::invalid_argument("invalid input");
  ensure_predict_cache();
  const Vec4 xn = normalization_.normalize_input(x_world);
  const int M = num_inducing();
  Prediction out;
  VecX kstar(M);
  for (int i = 0; i < kOutputDims; ++i) {
    const auto& hc = predict_cache_->heads[i];
    for (int m = 0; m < M; ++m) {
      kstar[m] = hc.kernel.eval_unchecked(xn, Z_[m]);
    }
    const double mean_n = mean_eval(hc.mean, xn[3]) + kstar.dot(hc.alpha);
    double var_n = hc.kernel.variance_at_identical() - kstar.dot(hc.W * kstar);
    if (var_n < 0.0) var_n = 0.0;
    out.mean[i] = normalization_.denormalize_mean(mean_n, i);
    out.variance[i] = normalization_.denormalize_variance(var_n, i);
  }
  return out;
}

Vec9 SparseGP::predict_mean(const Vec4& x_world) const {
  if (!x_world.allFinite()) throw std::invalid_argument("invalid input");
  ensure_predict_cache();
  const Vec4 xn = normalization_.normalize_input(x_world);
  const int M = num_inducing();
  Vec9 out;
  VecX kstar(M);
  for (int i = 0; i < kOutputDims; ++i) {
    const auto& hc = predict_cache_->heads[i];
    for (int m = 0; m < M; ++m) {
      kstar[m] = hc.kernel.eval_unchecked(xn, Z_[m]);
    }
    out[i] = normalization_.denormalize_mean(
        mean_eval(hc.mean, xn[3]) + kstar.dot(hc.alpha), i);
  }
  return out;
}

}  // namespace gpmotion
