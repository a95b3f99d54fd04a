// Copyright 2026 The asvvote Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration files.
//
// A config file is a YAML mapping; every key is optional and overrides the
// built-in default.  Unknown keys are errors.  The grammar is documented in
// docs/config.md.

#ifndef ASVVOTE_CONFIG_HPP_
#define ASVVOTE_CONFIG_HPP_

#include <string>
#include <string_view>

#include "asvvote/experiment.hpp"

namespace asvvote {

// Applies the settings in `text` on top of `base`.  `origin` names the
// source in error messages.
ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base = {},
                              const std::string& origin = "<config>");

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = {});

// Renders every setting in the grammar parse_config reads.
std::string format_config(const ExperimentConfig& config);

}  // namespace asvvote

#endif  // ASVVOTE_CONFIG_HPP_
