// Copyright 2026 The pdalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PDALAB_AUTODIFF_CHECKPOINT_HPP_
#define PDALAB_AUTODIFF_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pdalab/autodiff/tensor.hpp"

namespace pdalab::ad {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// {"name": {"shape": [...], "values": [...]}, ...}
nlohmann::json parameters_to_json(const NamedTensors& params);

// Copies values into the given tensors. Every name must be present with the
// exact shape; extra entries in the document are rejected too.
void parameters_from_json(const nlohmann::json& doc, NamedTensors& params);

void save_checkpoint(const std::filesystem::path& path, const NamedTensors& params);
void load_checkpoint(const std::filesystem::path& path, NamedTensors& params);

}  // namespace pdalab::ad

#endif  // PDALAB_AUTODIFF_CHECKPOINT_HPP_
