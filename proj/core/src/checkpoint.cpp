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

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmotion/errors.hpp"
#include "gpmotion/svgp.hpp"

namespace gpmotion {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

json to_json(const VecX& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

VecX vecx_from(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string("invalid checkpoint: ") + what);
  VecX out(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const json& e = j[static_cast<std::size_t>(i)];
    if (!e.is_number()) {
      throw ConfigError(std::string("invalid checkpoint: ") + what);
    }
    out[i] = e.get<double>();
  }
  return out;
}

const char* variant_name(KernelVariant v) {
  switch (v) {
    case KernelVariant::Composite: return "composite";
    case KernelVariant::JointMatern: return "joint_matern";
    case KernelVariant::RbfSpatial: return "rbf_spatial";
  }
  throw ConfigError("unknown kernel variant");
}

KernelVariant variant_from_name(const std::string& s) {
  if (s == "composite") return KernelVariant::Composite;
  if (s == "joint_matern") return KernelVariant::JointMatern;
  if (s == "rbf_spatial") return KernelVariant::RbfSpatial;
  throw ConfigError("invalid checkpoint: unknown kernel variant '" + s + "'");
}

const char* mean_name(MeanVariant v) {
  return v == MeanVariant::Constant ? "constant" : "periodic";
}

MeanVariant mean_from_name(const std::string& s) {
  if (s == "constant") return MeanVariant::Constant;
  if (s == "periodic") return MeanVariant::Periodic;
  throw ConfigError("invalid checkpoint: unknown mean variant '" + s + "'");
}

json head_to_json(const SvgpHead& head) {
  json h;
  h["kernel_variant"] = variant_name(head.kernel.variant);
  h["spatial_nu"] = matern_nu_value(head.kernel.spatial_nu);
  h["temporal_nu"] = matern_nu_value(head.kernel.temporal_nu);
  h["kernel_raw"] = to_json(kernel_raw_params(head.kernel));
  h["mean_variant"] = mean_name(head.mean.variant);
  h["mean_raw"] = to_json(mean_raw_params(head.mean));
  h["noise_raw"] = head.noise_raw;
  h["variational_mean"] = to_json(head.m);
  h["variational_chol_raw"] = to_json(head.L_raw);
  return h;
}

CompositeKernelParams kernel_from_json(const json& h) {
  CompositeKernelParams p;
  p.variant = variant_from_name(h.at("kernel_variant").get<std::string>());
  p.spatial_nu = matern_nu_from_value(h.at("spatial_nu").get<double>());
  p.temporal_nu = matern_nu_from_value(h.at("temporal_nu").get<double>());
  const VecX raw = vecx_from(h.at("kernel_raw"), "kernel parameters");
  if (raw.size() != kKernelParamCount) {
    throw ConfigError("invalid checkpoint: kernel parameter count");
  }
  set_kernel_raw_params(p, raw);
  return p;
}

MeanFunctionParams mean_from_json(const json& h) {
  MeanFunctionParams p;
  p.variant = mean_from_name(h.at("mean_variant").get<std::string>());
  const VecX raw = vecx_from(h.at("mean_raw"), "mean parameters");
  if (raw.size() != kMeanParamCount) {
    throw ConfigError("invalid checkpoint: mean parameter count");
  }
  set_mean_raw_params(p, raw);
  return p;
}

}  // namespace

void save_checkpoint(const SparseGP& gp, const std::string& path) {
  const VecX raw = gp.raw_parameters();
  if (!raw.allFinite()) {
    throw NumericalError("checkpoint rejected: non-finite parameters");
  }

  json doc;
  doc["schema_version"] = kCheckpointVersion;
  doc["share_kernel"] = gp.options().share_kernel;
  doc["jitter"] = gp.options().jitter;
  doc["noise_variance_init"] = gp.options().noise_variance;

  const Normalization& norm = gp.normalization();
  json jn;
  jn["input_offset"] = to_json(norm.input_offset);
  jn["input_scale"] = to_json(norm.input_scale);
  jn["output_mean"] = to_json(norm.output_mean);
  jn["output_std"] = to_json(norm.output_std);
  doc["normalization"] = jn;

  json jz = json::array();
  for (const Vec4& z : gp.inducing_inputs()) jz.push_back(to_json(z));
  doc["inducing_inputs"] = jz;

  json jh = json::array();
  for (int i = 0; i < kOutputDims; ++i) jh.push_back(head_to_json(gp.head(i)));
  doc["heads"] = jh;

  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) throw ConfigError("cannot write checkpoint: " + path);
  ofs << doc.dump(2) << '\n';
  if (!ofs) throw ConfigError("cannot write checkpoint: " + path);
}

SparseGP load_checkpoint(const std::string& path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs) throw ConfigError("cannot open checkpoint: " + path);
  const json doc = json::parse(ifs, nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("invalid checkpoint: parse error in " + path);
  }

  try {
    if (doc.at("schema_version").get<int>() != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint version");
    }
    const json& jh = doc.at("heads");
    if (!jh.is_array() || jh.size() != kOutputDims) {
      throw ConfigError("invalid checkpoint: head count");
    }

    Normalization norm;
    const json& jn = doc.at("normalization");
    const VecX in_off = vecx_from(jn.at("input_offset"), "input offset");
    const VecX in_scale = vecx_from(jn.at("input_scale"), "input scale");
    const VecX out_mean = vecx_from(jn.at("output_mean"), "output mean");
    const VecX out_std = vecx_from(jn.at("output_std"), "output std");
    if (in_off.size() != 4 || in_scale.size() != 4 ||
        out_mean.size() != kOutputDims || out_std.size() != kOutputDims) {
      throw ConfigError("invalid checkpoint: normalization shape");
    }
    norm.input_offset = in_off;
    norm.input_scale = in_scale;
    norm.output_mean = out_mean;
    norm.output_std = out_std;

    std::vector<Vec4> Z;
    for (const json& jz : doc.at("inducing_inputs")) {
      const VecX z = vecx_from(jz, "inducing input");
      if (z.size() != 4) throw ConfigError("invalid checkpoint: inducing shape");
      Z.push_back(Vec4(z[0], z[1], z[2], z[3]));
    }
    if (Z.empty()) throw ConfigError("invalid checkpoint: no inducing inputs");

    SvgpOptions opt;
    opt.share_kernel = doc.at("share_kernel").get<bool>();
    opt.jitter = doc.at("jitter").get<double>();
    opt.noise_variance = doc.at("noise_variance_init").get<double>();
    opt.kernel = kernel_from_json(jh[0]);
    opt.mean = mean_from_json(jh[0]);

    SparseGP gp(opt, norm, std::move(Z));
    const int M = gp.num_inducing();
    const int chol_size = M * (M + 1) / 2;
    for (int i = 0; i < kOutputDims; ++i) {
      const json& h = jh[static_cast<std::size_t>(i)];
      SvgpHead& head = gp.mutable_head(i);
      head.kernel = kernel_from_json(h);
      head.mean = mean_from_json(h);
      head.noise_raw = h.at("noise_raw").get<double>();
      head.m = vecx_from(h.at("variational_mean"), "variational mean");
      head.L_raw =
          vecx_from(h.at("variational_chol_raw"), "variational factor");
      if (head.m.size() != M || head.L_raw.size() != chol_size) {
        throw ConfigError("invalid checkpoint: variational shape");
      }
    }
    return gp;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid checkpoint: ") + e.what());
  }
}

}  // namespace gpmotion
