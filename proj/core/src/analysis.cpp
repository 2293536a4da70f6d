// Copyright 2026 sxl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sxl/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace sxl {

namespace {

using Json = nlohmann::ordered_json;

/// Loss of one parameter assignment over the whole dataset, per-frame /
/// per-element mean, dropout off.
template <typename T>
double dataset_loss(const ParamSet<T>& params, const LandscapeDataset& data) {
  double loss_sum = 0.0;
  std::int64_t denom = 0;
  const bool use_ce =
      data.labels.has_value() && params.config.num_classes > 0;
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    const auto& seq = data.sequences[i];
    auto x = frames_to_tensor<T>(seq.frames, seq.num_frames, seq.feat_dim);
    if (use_ce) {
      auto fwd = finetune_forward(params, x, /*train=*/false);
      auto loss = cross_entropy(fwd.output, (*data.labels)[i]);
      loss_sum += static_cast<double>(loss->value()) * seq.num_frames;
      denom += seq.num_frames;
    } else {
      Rng unused(0);
      const auto perm =
          sample_permutation(seq.num_frames, PermMode::identity, unused);
      const auto masks = build_masks(perm, 1.0);
      auto fwd = pretrain_forward(params, x, masks, /*train=*/false);
      std::vector<T> tgt(seq.frames.size());
      for (std::size_t j = 0; j < seq.frames.size(); ++j) {
        tgt[j] = static_cast<T>(seq.frames[j]);
      }
      auto target = Tensor<T>::from_data({seq.num_frames, seq.feat_dim},
                                         std::move(tgt));
      auto loss = huber_loss(fwd.output, target, data.huber_delta);
      const std::int64_t elems =
          static_cast<std::int64_t>(seq.num_frames) * seq.feat_dim;
      loss_sum += static_cast<double>(loss->value()) * elems;
      denom += elems;
    }
  }
  return denom > 0 ? loss_sum / static_cast<double>(denom) : 0.0;
}

template <typename T>
LandscapeCurve landscape_impl(const Checkpoint& ckpt0, const Checkpoint& ckpt1,
                              const LandscapeDataset& dataset,
                              double alpha_min, double alpha_max, int n_points,
                              const std::vector<std::string>& frozen_patterns,
                              int threads) {
  // theta1 defines the model; theta0 supplies the interpolation start for
  // every non-frozen tensor it shares with theta1.
  std::unordered_map<std::string, const TensorBlob*> t0_by_name;
  for (const auto& blob : ckpt0.params) t0_by_name.emplace(blob.name, &blob);

  LandscapeCurve curve;
  struct Direction {
    std::string name;
    std::vector<T> base;  // theta0
    std::vector<T> delta;  // theta1 - theta0
  };
  std::vector<Direction> directions;
  std::vector<const TensorBlob*> frozen_blobs;
  for (const auto& blob : ckpt1.params) {
    bool frozen = false;
    for (const auto& pat : frozen_patterns) {
      if (name_matches(pat, blob.name)) {
        frozen = true;
        break;
      }
    }
    const auto it = t0_by_name.find(blob.name);
    if (it == t0_by_name.end()) {
      frozen = true;  // absent from theta0: held at its theta1 value
    } else if (!frozen && it->second->shape != blob.shape) {
      throw LoadError("loss_landscape: tensor \"" + blob.name +
                      "\" has shape " + shape_str(it->second->shape) +
                      " in ckpt0 but " + shape_str(blob.shape) + " in ckpt1");
    }
    if (frozen) {
      frozen_blobs.push_back(&blob);
      curve.frozen_names.push_back(blob.name);
      continue;
    }
    Direction d;
    d.name = blob.name;
    d.base = blob_values<T>(*it->second);
    const auto v1 = blob_values<T>(blob);
    d.delta.resize(v1.size());
    for (std::size_t i = 0; i < v1.size(); ++i) d.delta[i] = v1[i] - d.base[i];
    directions.push_back(std::move(d));
  }

  curve.alphas.resize(static_cast<std::size_t>(n_points));
  curve.losses.resize(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    curve.alphas[static_cast<std::size_t>(i)] =
        n_points == 1
            ? alpha_min
            : alpha_min + (alpha_max - alpha_min) * i / (n_points - 1);
  }

  const auto eval_point = [&](int i) {
    ParamSet<T> params = params_from_checkpoint<T>(ckpt1);
    const double alpha = curve.alphas[static_cast<std::size_t>(i)];
    for (const auto& d : directions) {
      auto& w = params.at(d.name)->data();
      for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = static_cast<T>(static_cast<double>(d.base[j]) +
                              alpha * static_cast<double>(d.delta[j]));
      }
    }
    curve.losses[static_cast<std::size_t>(i)] = dataset_loss(params, dataset);
  };

  if (threads <= 1 || n_points <= 1) {
    for (int i = 0; i < n_points; ++i) eval_point(i);
  } else {
    const int workers = std::min(threads, n_points);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int i = w; i < n_points; i += workers) eval_point(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return curve;
}

double entropy_of_row(const double* row, int t) {
  double h = 0.0;
  for (int j = 0; j < t; ++j) {
    if (row[j] > 0.0) h -= row[j] * std::log(row[j]);
  }
  return h;
}

Json head_stats(const std::vector<double>& mat, int t) {
  double entropy = 0.0, diag_offset = 0.0;
  int live_rows = 0;
  for (int i = 0; i < t; ++i) {
    const double* row = &mat[static_cast<std::size_t>(i) * t];
    double total = 0.0;
    for (int j = 0; j < t; ++j) total += row[j];
    if (total <= 0.0) continue;  // fully-masked row carries no distribution
    ++live_rows;
    entropy += entropy_of_row(row, t);
    int arg = 0;
    for (int j = 1; j < t; ++j) {
      if (row[j] > row[arg]) arg = j;
    }
    diag_offset += std::abs(arg - i);
  }
  Json j;
  j["mean_row_entropy"] = live_rows ? entropy / live_rows : 0.0;
  j["mean_diag_offset"] = live_rows ? diag_offset / live_rows : 0.0;
  return j;
}

void write_score_file(const std::string& path, const std::vector<double>& mat,
                      int t) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << t << '\n';
  char buf[64];
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g",
                    mat[static_cast<std::size_t>(i) * t + j]);
      os << buf << (j + 1 < t ? ' ' : '\n');
    }
  }
  if (!os) throw InputError("write failed: " + path);
}

}  // namespace

LandscapeCurve loss_landscape(const Checkpoint& ckpt0, const Checkpoint& ckpt1,
                              const LandscapeDataset& dataset,
                              double alpha_min, double alpha_max, int n_points,
                              const std::vector<std::string>& frozen_patterns,
                              int threads) {
  if (n_points < 2) throw InputError("loss_landscape: n_points must be >= 2");
  if (!(alpha_max > alpha_min)) {
    throw InputError("loss_landscape: alpha range is empty");
  }
  LandscapeCurve curve;
  const auto run = [&](auto tag) {
    using T = decltype(tag);
    curve = landscape_impl<T>(ckpt0, ckpt1, dataset, alpha_min, alpha_max,
                              n_points, frozen_patterns, threads);
  };
  // Evaluate in the precision the final checkpoint was trained in.
  const bool f64 = !ckpt1.params.empty() && ckpt1.params[0].dtype == "f64";
  if (f64) {
    run(double{});
  } else {
    run(float{});
  }
  curve.dataset_id = dataset.id;
  return curve;
}

void write_landscape_csv(const LandscapeCurve& curve, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << "alpha,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", curve.alphas[i],
                  curve.losses[i]);
    os << buf << '\n';
  }
  if (!os) throw InputError("write failed: " + path);
}

void write_landscape_metadata(const LandscapeCurve& curve,
                              const std::string& path) {
  Json j;
  j["ckpt0"] = curve.ckpt0_id;
  j["ckpt1"] = curve.ckpt1_id;
  j["dataset"] = curve.dataset_id;
  j["frozen_parameters"] = curve.frozen_names;
  j["num_points"] = curve.alphas.size();
  j["alpha_min"] = curve.alphas.empty() ? 0.0 : curve.alphas.front();
  j["alpha_max"] = curve.alphas.empty() ? 0.0 : curve.alphas.back();
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << j.dump(2) << '\n';
}

AttentionDump dump_attention(const Checkpoint& ckpt,
                             const FeatureSequence& seq,
                             AttentionDumpMode mode, PermMode perm_mode,
                             std::uint64_t perm_seed, double fraction) {
  AttentionDump dump;
  dump.mode = mode;
  dump.seq_length = seq.num_frames;
  dump.utterance_id = seq.utterance_id;

  const bool f64 = !ckpt.params.empty() && ckpt.params[0].dtype == "f64";
  const auto run = [&](auto tag) {
    using T = decltype(tag);
    ParamSet<T> params = params_from_checkpoint<T>(ckpt);
    auto x = frames_to_tensor<T>(seq.frames, seq.num_frames, seq.feat_dim);
    ForwardResult<T> fwd;
    if (mode == AttentionDumpMode::finetune) {
      // The classifier head is irrelevant to attention scores; models
      // without one are dumped through the two-stream path under a
      // fully-visible mask instead.
      if (params.config.num_classes > 0) {
        fwd = finetune_forward(params, x, /*train=*/false);
      } else {
        AttentionMasks full;
        full.content = BoolMatrix(seq.num_frames, seq.num_frames, true);
        full.query = BoolMatrix(seq.num_frames, seq.num_frames, true);
        for (int i = 0; i < seq.num_frames; ++i) full.query.set(i, i, false);
        full.targets.resize(static_cast<std::size_t>(seq.num_frames));
        for (int i = 0; i < seq.num_frames; ++i) full.targets[i] = i;
        fwd = pretrain_forward(params, x, full, /*train=*/false);
        for (auto& layer : fwd.attention) layer.query_heads.clear();
      }
    } else {
      Rng rng(Rng::derive(perm_seed, {0xA77u}));
      const auto perm = sample_permutation(seq.num_frames, perm_mode, rng);
      const auto masks = build_masks(perm, fraction);
      fwd = pretrain_forward(params, x, masks, /*train=*/false);
    }
    for (const auto& layer : fwd.attention) {
      std::vector<std::vector<double>> content_heads, query_heads;
      for (const auto& head : layer.content_heads) {
        content_heads.emplace_back(head.begin(), head.end());
      }
      for (const auto& head : layer.query_heads) {
        query_heads.emplace_back(head.begin(), head.end());
      }
      dump.content.push_back(std::move(content_heads));
      if (!layer.query_heads.empty()) {
        dump.query.push_back(std::move(query_heads));
      }
    }
  };
  if (f64) {
    run(double{});
  } else {
    run(float{});
  }
  return dump;
}

void write_attention_dump(const AttentionDump& dump,
                          const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  Json meta;
  meta["utterance_id"] = dump.utterance_id;
  meta["seq_length"] = dump.seq_length;
  meta["mode"] =
      dump.mode == AttentionDumpMode::finetune ? "finetune" : "pretrain";
  Json files = Json::array();
  const int t = dump.seq_length;
  const auto emit = [&](const std::vector<std::vector<std::vector<double>>>&
                            streams,
                        const std::string& stream_name) {
    for (std::size_t l = 0; l < streams.size(); ++l) {
      for (std::size_t h = 0; h < streams[l].size(); ++h) {
        std::string name = "layer" + std::to_string(l) + "_head" +
                           std::to_string(h);
        if (!stream_name.empty()) name += "_" + stream_name;
        name += ".txt";
        write_score_file(out_dir + "/" + name, streams[l][h], t);
        Json row;
        row["file"] = name;
        row["layer"] = l;
        row["head"] = h;
        if (!stream_name.empty()) row["stream"] = stream_name;
        row["stats"] = head_stats(streams[l][h], t);
        files.push_back(row);
      }
    }
  };
  if (dump.mode == AttentionDumpMode::finetune) {
    emit(dump.content, "");
  } else {
    emit(dump.content, "content");
    emit(dump.query, "query");
  }
  meta["files"] = files;
  std::ofstream os(out_dir + "/attention.json");
  if (!os) throw InputError("cannot open for writing: " + out_dir);
  os << meta.dump(2) << '\n';
}

}  // namespace sxl
