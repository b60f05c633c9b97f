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

#include "pdalab/autodiff/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace pdalab::ad {

nlohmann::json parameters_to_json(const NamedTensors& params) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, t] : params) {
    auto values = t.data();
    doc[name] = {{"shape", t.shape()},
                 {"values", std::vector<double>(values.begin(), values.end())}};
  }
  return doc;
}

void parameters_from_json(const nlohmann::json& doc, NamedTensors& params) {
  if (!doc.is_object()) throw std::runtime_error("checkpoint: expected a JSON object");
  if (doc.size() != params.size()) {
    throw std::runtime_error("checkpoint: expected " + std::to_string(params.size()) +
                             " parameters, found " + std::to_string(doc.size()));
  }
  for (auto& [name, t] : params) {
    auto it = doc.find(name);
    if (it == doc.end()) throw std::runtime_error("checkpoint: missing parameter " + name);
    auto shape = it->at("shape").get<Shape>();
    if (shape != t.shape()) {
      throw ShapeError("checkpoint: parameter " + name + " has shape " +
                       shape_string(shape) + ", expected " + shape_string(t.shape()));
    }
    auto values = it->at("values").get<std::vector<double>>();
    if (values.size() != t.size()) {
      throw ShapeError("checkpoint: parameter " + name + " has wrong value count");
    }
    std::copy(values.begin(), values.end(), t.mutable_data().begin());
  }
}

void save_checkpoint(const std::filesystem::path& path, const NamedTensors& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out << parameters_to_json(params).dump() << '\n';
}

void load_checkpoint(const std::filesystem::path& path, NamedTensors& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path.string());
  parameters_from_json(nlohmann::json::parse(in), params);
}

}  // namespace pdalab::ad
