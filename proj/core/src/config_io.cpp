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

#include "sxl/config_io.hpp"

#include <json.hpp>

namespace sxl {

namespace {

using Json = nlohmann::ordered_json;

void reject_unknown(const Json& j, const std::string& section,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown config key: " + section + "." + key);
    }
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string mode_name(TrainMode m) {
  return m == TrainMode::pretrain ? "pretrain" : "finetune";
}

TrainMode mode_from(const std::string& s) {
  if (s == "pretrain") return TrainMode::pretrain;
  if (s == "finetune") return TrainMode::finetune;
  throw ConfigError("unknown train mode \"" + s + "\"");
}

std::string perm_name(PermMode m) {
  return m == PermMode::random ? "random" : "identity";
}

PermMode perm_from(const std::string& s) {
  if (s == "random") return PermMode::random;
  if (s == "identity") return PermMode::identity;
  throw ConfigError("unknown perm mode \"" + s + "\" (random, identity)");
}

std::string schedule_name(ScheduleKind k) {
  return k == ScheduleKind::linear_warmup_decay ? "linear_warmup_decay"
                                                : "noam";
}

ScheduleKind schedule_from(const std::string& s) {
  if (s == "linear_warmup_decay" || s == "linear") {
    return ScheduleKind::linear_warmup_decay;
  }
  if (s == "noam") return ScheduleKind::noam;
  throw ConfigError("unknown schedule kind \"" + s + "\"");
}

void parse_model(const Json& j, ModelConfig& m) {
  reject_unknown(j, "model",
                 {"num_layers", "num_heads", "d_model", "d_inner", "dropout_p",
                  "huber_delta", "feat_dim", "num_classes", "pos_encoding"});
  read(j, "num_layers", m.num_layers);
  read(j, "num_heads", m.num_heads);
  read(j, "d_model", m.d_model);
  read(j, "d_inner", m.d_inner);
  read(j, "dropout_p", m.dropout_p);
  read(j, "huber_delta", m.huber_delta);
  read(j, "feat_dim", m.feat_dim);
  read(j, "num_classes", m.num_classes);
  read(j, "pos_encoding", m.pos_encoding);
}

void parse_schedule(const Json& j, Schedule& s) {
  reject_unknown(j, "train.schedule",
                 {"kind", "warmup_steps", "total_steps", "peak_lr", "k",
                  "d_model", "exponent"});
  if (j.contains("kind")) s.kind = schedule_from(j.at("kind").get<std::string>());
  read(j, "warmup_steps", s.warmup_steps);
  read(j, "total_steps", s.total_steps);
  read(j, "peak_lr", s.peak_lr);
  read(j, "k", s.k);
  read(j, "d_model", s.d_model);
  read(j, "exponent", s.exponent);
}

void parse_adam(const Json& j, AdamConfig& a) {
  reject_unknown(j, "train.adam", {"beta1", "beta2", "eps", "weight_decay"});
  read(j, "beta1", a.beta1);
  read(j, "beta2", a.beta2);
  read(j, "eps", a.eps);
  read(j, "weight_decay", a.weight_decay);
}

void parse_train(const Json& j, TrainConfig& t) {
  reject_unknown(j, "train",
                 {"mode", "perm_mode", "tail_fraction", "batch_frames",
                  "accum_steps", "total_steps", "schedule", "adam", "seed",
                  "init_from", "freeze", "precision", "eval_interval",
                  "eval_fraction", "log_interval"});
  if (j.contains("mode")) t.mode = mode_from(j.at("mode").get<std::string>());
  if (j.contains("perm_mode")) {
    t.perm_mode = perm_from(j.at("perm_mode").get<std::string>());
  }
  read(j, "tail_fraction", t.tail_fraction);
  read(j, "batch_frames", t.batch_frames);
  read(j, "accum_steps", t.accum_steps);
  read(j, "total_steps", t.total_steps);
  if (j.contains("schedule")) parse_schedule(j.at("schedule"), t.schedule);
  if (j.contains("adam")) parse_adam(j.at("adam"), t.adam);
  read(j, "seed", t.seed);
  read(j, "init_from", t.init_from);
  read(j, "freeze", t.freeze);
  read(j, "precision", t.precision);
  read(j, "eval_interval", t.eval_interval);
  read(j, "eval_fraction", t.eval_fraction);
  read(j, "log_interval", t.log_interval);
}

void parse_features(const Json& j, PipelineConfig& f) {
  reject_unknown(j, "features", {"stack", "skip", "cmvn", "variance_floor"});
  read(j, "stack", f.stack);
  read(j, "skip", f.skip);
  read(j, "cmvn", f.cmvn);
  read(j, "variance_floor", f.variance_floor);
}

}  // namespace

RunConfig preset_config(const std::string& name, TrainMode mode) {
  RunConfig cfg;
  cfg.train.mode = mode;
  if (name == "toy") {
    cfg.model = toy_model_config();
    cfg.train.batch_frames = 1500;
    cfg.train.accum_steps = 1;
    cfg.train.schedule.kind = ScheduleKind::linear_warmup_decay;
    if (mode == TrainMode::pretrain) {
      cfg.train.total_steps = 200;
      cfg.train.schedule.warmup_steps = 20;
      cfg.train.schedule.total_steps = 200;
      cfg.train.schedule.peak_lr = 3e-3;
    } else {
      cfg.train.total_steps = 300;
      cfg.train.schedule.warmup_steps = 30;
      cfg.train.schedule.total_steps = 300;
      cfg.train.schedule.peak_lr = 1e-3;
      cfg.model.num_classes = 6;
    }
  } else if (name == "hybrid") {
    cfg.model = hybrid_model_config();
    cfg.train.schedule.kind = ScheduleKind::linear_warmup_decay;
    cfg.train.adam = AdamConfig{0.9, 0.999, 1e-6, 0.01};
    if (mode == TrainMode::pretrain) {
      cfg.train.batch_frames = 6000;
      cfg.train.accum_steps = 10;
      cfg.train.total_steps = 1000000;
      cfg.train.schedule.warmup_steps = 115000;
      cfg.train.schedule.total_steps = 1000000;
      cfg.train.schedule.peak_lr = 6e-4;
    } else {
      cfg.train.batch_frames = 4000;
      cfg.train.accum_steps = 1;
      cfg.train.total_steps = 10000;
      cfg.train.schedule.warmup_steps = 1000;
      cfg.train.schedule.total_steps = 10000;
      cfg.train.schedule.peak_lr = 1e-4;
    }
  } else if (name == "e2e") {
    cfg.model = e2e_model_config();
    cfg.features.stack = 3;
    cfg.features.skip = 3;
    cfg.train.batch_frames = 10000;
    cfg.train.accum_steps = 1;
    cfg.train.total_steps = 420000;
    cfg.train.adam = AdamConfig{0.9, 0.98, 1e-9, 0.0};
    cfg.train.schedule.kind = ScheduleKind::noam;
    cfg.train.schedule.warmup_steps = 140000;
    cfg.train.schedule.d_model = cfg.model.d_model;
    if (mode == TrainMode::pretrain) {
      cfg.train.schedule.k = 2.0;
      cfg.model.dropout_p = 0.1;
    } else {
      cfg.train.schedule.k = 11.0;
      cfg.model.dropout_p = 0.2;
    }
  } else {
    throw ConfigError("unknown preset \"" + name + "\" (toy, hybrid, e2e)");
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text,
                           const RunConfig& base) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "(top level)", {"model", "train", "features"});
  RunConfig cfg = base;
  if (j.contains("model")) parse_model(j.at("model"), cfg.model);
  if (j.contains("train")) parse_train(j.at("train"), cfg.train);
  if (j.contains("features")) parse_features(j.at("features"), cfg.features);
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  Json j;
  Json& m = j["model"];
  m["num_layers"] = cfg.model.num_layers;
  m["num_heads"] = cfg.model.num_heads;
  m["d_model"] = cfg.model.d_model;
  m["d_inner"] = cfg.model.d_inner;
  m["dropout_p"] = cfg.model.dropout_p;
  m["huber_delta"] = cfg.model.huber_delta;
  m["feat_dim"] = cfg.model.feat_dim;
  m["num_classes"] = cfg.model.num_classes;
  m["pos_encoding"] = cfg.model.pos_encoding;

  Json& t = j["train"];
  t["mode"] = mode_name(cfg.train.mode);
  t["perm_mode"] = perm_name(cfg.train.perm_mode);
  t["tail_fraction"] = cfg.train.tail_fraction;
  t["batch_frames"] = cfg.train.batch_frames;
  t["accum_steps"] = cfg.train.accum_steps;
  t["total_steps"] = cfg.train.total_steps;
  Json& s = t["schedule"];
  s["kind"] = schedule_name(cfg.train.schedule.kind);
  s["warmup_steps"] = cfg.train.schedule.warmup_steps;
  s["total_steps"] = cfg.train.schedule.total_steps;
  s["peak_lr"] = cfg.train.schedule.peak_lr;
  s["k"] = cfg.train.schedule.k;
  s["d_model"] = cfg.train.schedule.d_model;
  s["exponent"] = cfg.train.schedule.exponent;
  Json& a = t["adam"];
  a["beta1"] = cfg.train.adam.beta1;
  a["beta2"] = cfg.train.adam.beta2;
  a["eps"] = cfg.train.adam.eps;
  a["weight_decay"] = cfg.train.adam.weight_decay;
  t["seed"] = cfg.train.seed;
  t["init_from"] = cfg.train.init_from;
  t["freeze"] = cfg.train.freeze;
  t["precision"] = cfg.train.precision;
  t["eval_interval"] = cfg.train.eval_interval;
  t["eval_fraction"] = cfg.train.eval_fraction;
  t["log_interval"] = cfg.train.log_interval;

  Json& f = j["features"];
  f["stack"] = cfg.features.stack;
  f["skip"] = cfg.features.skip;
  f["cmvn"] = cfg.features.cmvn;
  f["variance_floor"] = cfg.features.variance_floor;
  return j.dump(2) + "\n";
}

}  // namespace sxl
