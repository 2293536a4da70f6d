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

#pragma once

#include <string>

#include "sxl/features.hpp"
#include "sxl/trainer.hpp"

namespace sxl {

/// Everything a training run needs: model geometry, loop settings, feature
/// preprocessing.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  PipelineConfig features;
};

/// Named starting points. "toy" is the small default geometry; "hybrid" is
/// the 6x8x512/2048 recipe with the linear warmup/decay schedule; "e2e" is
/// the 12x4x256/2048 stacked-frame recipe with the noam schedule.
RunConfig preset_config(const std::string& name, TrainMode mode);

/// Strict JSON parse: sections "model", "train", "features" (each optional,
/// applied over `base`); unknown keys anywhere are rejected.
RunConfig parse_run_config(const std::string& json_text,
                           const RunConfig& base);

/// Canonical JSON serialization used for the effective-config echo.
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace sxl
