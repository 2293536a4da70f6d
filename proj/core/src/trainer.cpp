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

#include "sxl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sxl {

void TrainConfig::validate() const {
  if (total_steps < 1) throw ConfigError("train config: total_steps must be >= 1");
  if (accum_steps < 1) throw ConfigError("train config: accum_steps must be >= 1");
  if (batch_frames < 1) throw ConfigError("train config: batch_frames must be >= 1");
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw ConfigError("train config: tail_fraction must be in (0, 1]");
  }
  if (precision != "f32" && precision != "f64") {
    throw ConfigError("train config: precision must be f32 or f64");
  }
  if (eval_interval < 1) throw ConfigError("train config: eval_interval must be >= 1");
  if (log_interval < 1) throw ConfigError("train config: log_interval must be >= 1");
  if (eval_fraction < 0.0 || eval_fraction >= 1.0) {
    throw ConfigError("train config: eval_fraction must be in [0, 1)");
  }
}

std::vector<std::vector<int>> batch_by_frames(
    const std::vector<FeatureSequence>& corpus, std::int64_t budget,
    std::uint64_t seed, std::int64_t epoch) {
  std::vector<int> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(seed, {0xBA7C4u, static_cast<std::uint64_t>(epoch)}));
  rng.shuffle(order);

  std::vector<std::vector<int>> batches;
  std::vector<int> current;
  std::int64_t used = 0;
  for (const int idx : order) {
    const auto& seq = corpus[static_cast<std::size_t>(idx)];
    if (seq.num_frames > budget) {
      throw InputError("utterance \"" + seq.utterance_id + "\" has " +
                       std::to_string(seq.num_frames) +
                       " frames, more than the batch budget of " +
                       std::to_string(budget));
    }
    if (used + seq.num_frames > budget && !current.empty()) {
      batches.push_back(std::move(current));
      current.clear();
      used = 0;
    }
    current.push_back(idx);
    used += seq.num_frames;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

bool name_matches(const std::string& pattern, const std::string& name) {
  std::size_t p = 0, n = 0;
  std::size_t star = std::string::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

namespace {

template <typename T>
std::vector<std::string> trainable_names(const ParamSet<T>& params,
                                         const TrainConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& name : params.names) {
    // The classifier head is trained in finetune mode no matter what; it is
    // freshly initialized and freezing it would leave nothing to learn. The
    // pretraining-only tensors are never updated during finetune.
    const bool is_cls = name.rfind("cls_head.", 0) == 0;
    const bool pretrain_only = name.rfind("query_seed.", 0) == 0 ||
                               name.rfind("regress_head.", 0) == 0;
    if (cfg.mode == TrainMode::finetune) {
      if (is_cls) {
        names.push_back(name);
        continue;
      }
      if (pretrain_only) continue;
    }
    bool frozen = false;
    for (const auto& pat : cfg.freeze) {
      if (name_matches(pat, name)) {
        frozen = true;
        break;
      }
    }
    if (!frozen) names.push_back(name);
  }
  return names;
}

template <typename T>
TensorPtr<T> target_rows(const FeatureSequence& seq,
                         const std::vector<int>& targets) {
  std::vector<T> data;
  data.reserve(targets.size() * static_cast<std::size_t>(seq.feat_dim));
  for (const int t : targets) {
    for (int f = 0; f < seq.feat_dim; ++f) {
      data.push_back(static_cast<T>(seq.at(t, f)));
    }
  }
  return Tensor<T>::from_data({static_cast<int>(targets.size()), seq.feat_dim},
                              std::move(data));
}

struct EvalResult {
  double ce = 0.0;
  double frame_accuracy = 0.0;
};

template <typename T>
EvalResult evaluate_dev(const ParamSet<T>& params, const LabeledCorpus& corpus,
                        const std::vector<int>& dev_indices) {
  double loss_sum = 0.0;
  std::int64_t frames = 0, correct = 0;
  for (const int idx : dev_indices) {
    const auto& seq = corpus.sequences[static_cast<std::size_t>(idx)];
    const auto& labels = corpus.labels[static_cast<std::size_t>(idx)];
    auto x = frames_to_tensor<T>(seq.frames, seq.num_frames, seq.feat_dim);
    auto fwd = finetune_forward(params, x, /*train=*/false);
    auto loss = cross_entropy(fwd.output, labels);
    loss_sum += static_cast<double>(loss->value()) * seq.num_frames;
    frames += seq.num_frames;
    const int c = fwd.output->cols();
    for (int t = 0; t < seq.num_frames; ++t) {
      int best = 0;
      for (int j = 1; j < c; ++j) {
        if (fwd.output->at(t, j) > fwd.output->at(t, best)) best = j;
      }
      if (best == labels[static_cast<std::size_t>(t)]) ++correct;
    }
  }
  EvalResult r;
  if (frames > 0) {
    r.ce = loss_sum / static_cast<double>(frames);
    r.frame_accuracy =
        static_cast<double>(correct) / static_cast<double>(frames);
  }
  return r;
}

template <typename T>
TrainOutput pretrain_impl(const std::vector<FeatureSequence>& corpus,
                          const ModelConfig& model_cfg,
                          const TrainConfig& cfg) {
  ParamSet<T> params = init_params<T>(model_cfg, cfg.seed);
  if (!cfg.init_from.empty()) {
    load_encoder_weights(params, load_checkpoint(cfg.init_from));
  }
  const auto trainable = trainable_names(params, cfg);
  auto adam = make_adam_state(params, trainable);
  GradAccumulator<T> accum(params, trainable, cfg.accum_steps);
  Rng dropout_rng(Rng::derive(cfg.seed, {0xD209u}));

  TrainOutput out;
  out.init = make_checkpoint(params);
  out.init.rng_state = dropout_rng.state();

  const double delta = model_cfg.huber_delta;
  std::int64_t step = 0;
  double step_loss_sum = 0.0;
  double ema = 0.0;
  bool ema_started = false;

  for (std::int64_t epoch = 0; step < cfg.total_steps; ++epoch) {
    const auto batches =
        batch_by_frames(corpus, cfg.batch_frames, cfg.seed, epoch);
    for (const auto& batch : batches) {
      // Sample this micro-batch's permutations first so the total element
      // count (the mean-loss denominator) is known before any forward runs.
      std::vector<AttentionMasks> masks(batch.size());
      std::int64_t total_elems = 0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& seq = corpus[static_cast<std::size_t>(batch[i])];
        Rng perm_rng(Rng::derive(
            cfg.seed, {static_cast<std::uint64_t>(epoch),
                       static_cast<std::uint64_t>(batch[i])}));
        const auto perm =
            sample_permutation(seq.num_frames, cfg.perm_mode, perm_rng);
        masks[i] = build_masks(perm, cfg.tail_fraction);
        total_elems += static_cast<std::int64_t>(masks[i].targets.size()) *
                       seq.feat_dim;
      }

      double batch_loss = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& seq = corpus[static_cast<std::size_t>(batch[i])];
        auto x = frames_to_tensor<T>(seq.frames, seq.num_frames, seq.feat_dim);
        auto fwd =
            pretrain_forward(params, x, masks[i], /*train=*/true, &dropout_rng);
        auto target = target_rows<T>(seq, masks[i].targets);
        auto loss = huber_loss(fwd.output, target, delta);
        const double value = static_cast<double>(loss->value());
        if (!std::isfinite(value)) {
          throw NumericError("non-finite loss at step " +
                             std::to_string(step + 1) + ", utterance \"" +
                             seq.utterance_id + "\"");
        }
        const double weight =
            static_cast<double>(masks[i].targets.size() * seq.feat_dim) /
            static_cast<double>(total_elems);
        batch_loss += value * weight;
        backward(loss, static_cast<T>(weight));
      }

      accum.add(params);
      params.zero_grads();
      step_loss_sum += batch_loss;

      if (accum.ready()) {
        accum.write_mean(params);
        ++step;
        const double lr = lr_at(step, cfg.schedule);
        adam_step(params, adam, lr, cfg.adam);
        params.zero_grads();

        const double step_loss = step_loss_sum / cfg.accum_steps;
        step_loss_sum = 0.0;
        ema = ema_started ? 0.9 * ema + 0.1 * step_loss : step_loss;
        ema_started = true;
        if (step % cfg.log_interval == 0 || step == 1 ||
            step == cfg.total_steps) {
          out.metrics.push_back({step, "train", "huber", step_loss});
          out.metrics.push_back({step, "train", "huber_ema", ema});
        }
        if (step >= cfg.total_steps) break;
      }
    }
  }

  out.final = make_checkpoint(params, &adam);
  out.final.step = step;
  out.final.rng_state = dropout_rng.state();
  out.final.metrics = out.metrics;
  return out;
}

template <typename T>
TrainOutput finetune_impl(const LabeledCorpus& corpus,
                          const ModelConfig& model_cfg,
                          const TrainConfig& cfg) {
  if (model_cfg.num_classes < 1) {
    throw ConfigError("finetune requires a model config with num_classes >= 1");
  }
  ParamSet<T> params = init_params<T>(model_cfg, cfg.seed);
  if (!cfg.init_from.empty()) {
    load_encoder_weights(params, load_checkpoint(cfg.init_from));
  }
  const auto trainable = trainable_names(params, cfg);
  auto adam = make_adam_state(params, trainable);
  GradAccumulator<T> accum(params, trainable, cfg.accum_steps);
  Rng dropout_rng(Rng::derive(cfg.seed, {0xD209u}));

  // Seeded held-out split for dev metrics.
  std::vector<int> order(corpus.sequences.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(Rng::derive(cfg.seed, {0xDE7u}));
  split_rng.shuffle(order);
  int dev_count = static_cast<int>(
      std::floor(cfg.eval_fraction * static_cast<double>(order.size())));
  if (cfg.eval_fraction > 0.0 && order.size() > 1 && dev_count < 1) {
    dev_count = 1;
  }
  dev_count = std::min<int>(dev_count, static_cast<int>(order.size()) - 1);
  dev_count = std::max(dev_count, 0);
  const std::vector<int> dev_indices(order.begin(), order.begin() + dev_count);
  std::vector<FeatureSequence> train_seqs;
  std::vector<const std::vector<int>*> train_labels;
  for (std::size_t i = static_cast<std::size_t>(dev_count); i < order.size();
       ++i) {
    const int idx = order[i];
    train_seqs.push_back(corpus.sequences[static_cast<std::size_t>(idx)]);
    train_labels.push_back(&corpus.labels[static_cast<std::size_t>(idx)]);
  }

  TrainOutput out;
  out.init = make_checkpoint(params);
  out.init.rng_state = dropout_rng.state();

  const auto log_dev = [&](std::int64_t at_step) {
    if (dev_indices.empty()) return;
    const auto r = evaluate_dev(params, corpus, dev_indices);
    out.metrics.push_back({at_step, "dev", "ce", r.ce});
    out.metrics.push_back({at_step, "dev", "frame_acc", r.frame_accuracy});
  };
  log_dev(0);

  std::int64_t step = 0;
  double step_loss_sum = 0.0;
  for (std::int64_t epoch = 0; step < cfg.total_steps; ++epoch) {
    const auto batches =
        batch_by_frames(train_seqs, cfg.batch_frames, cfg.seed, epoch);
    for (const auto& batch : batches) {
      std::int64_t total_frames = 0;
      for (const int idx : batch) {
        total_frames += train_seqs[static_cast<std::size_t>(idx)].num_frames;
      }
      double batch_loss = 0.0;
      for (const int idx : batch) {
        const auto& seq = train_seqs[static_cast<std::size_t>(idx)];
        const auto& labels = *train_labels[static_cast<std::size_t>(idx)];
        auto x = frames_to_tensor<T>(seq.frames, seq.num_frames, seq.feat_dim);
        auto fwd = finetune_forward(params, x, /*train=*/true, &dropout_rng);
        auto loss = cross_entropy(fwd.output, labels);
        const double value = static_cast<double>(loss->value());
        if (!std::isfinite(value)) {
          throw NumericError("non-finite loss at step " +
                             std::to_string(step + 1) + ", utterance \"" +
                             seq.utterance_id + "\"");
        }
        const double weight = static_cast<double>(seq.num_frames) /
                              static_cast<double>(total_frames);
        batch_loss += value * weight;
        backward(loss, static_cast<T>(weight));
      }

      accum.add(params);
      params.zero_grads();
      step_loss_sum += batch_loss;

      if (accum.ready()) {
        accum.write_mean(params);
        ++step;
        const double lr = lr_at(step, cfg.schedule);
        adam_step(params, adam, lr, cfg.adam);
        params.zero_grads();

        const double step_loss = step_loss_sum / cfg.accum_steps;
        step_loss_sum = 0.0;
        if (step % cfg.log_interval == 0 || step == 1 ||
            step == cfg.total_steps) {
          out.metrics.push_back({step, "train", "ce", step_loss});
        }
        if (step % cfg.eval_interval == 0 && step < cfg.total_steps) {
          log_dev(step);
        }
        if (step >= cfg.total_steps) break;
      }
    }
  }
  log_dev(step);

  out.final = make_checkpoint(params, &adam);
  out.final.step = step;
  out.final.rng_state = dropout_rng.state();
  out.final.metrics = out.metrics;
  return out;
}

}  // namespace

TrainOutput pretrain(const std::vector<FeatureSequence>& corpus,
                     const ModelConfig& model_cfg, const TrainConfig& cfg) {
  model_cfg.validate();
  cfg.validate();
  if (corpus.empty()) throw InputError("pretrain: empty corpus");
  if (cfg.mode != TrainMode::pretrain) {
    throw ConfigError("pretrain called with a finetune config");
  }
  if (cfg.precision == "f64") {
    return pretrain_impl<double>(corpus, model_cfg, cfg);
  }
  return pretrain_impl<float>(corpus, model_cfg, cfg);
}

TrainOutput finetune(const LabeledCorpus& corpus, const ModelConfig& model_cfg,
                     const TrainConfig& cfg) {
  model_cfg.validate();
  cfg.validate();
  if (corpus.sequences.empty()) throw InputError("finetune: empty corpus");
  if (corpus.sequences.size() != corpus.labels.size()) {
    throw InputError("finetune: features and labels are misaligned");
  }
  if (cfg.mode != TrainMode::finetune) {
    throw ConfigError("finetune called with a pretrain config");
  }
  if (cfg.precision == "f64") {
    return finetune_impl<double>(corpus, model_cfg, cfg);
  }
  return finetune_impl<float>(corpus, model_cfg, cfg);
}

}  // namespace sxl
