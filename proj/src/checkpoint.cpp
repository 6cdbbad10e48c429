// Copyright 2026 The skelproto Authors
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


#include "skelproto/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "skelproto/skeleton_io.hpp"

namespace skelproto {
namespace {

using Json = nlohmann::ordered_json;

Json tensor_to_json(const num::Tensor2& t) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) data.push_back(t(i, j));
  }
  return Json{{"shape", {t.rows(), t.cols()}}, {"data", std::move(data)}};
}

num::Tensor2 tensor_from_json(const Json& j, const std::string& where) {
  const auto& shape = j.at("shape");
  if (!shape.is_array() || shape.size() != 2) throw std::runtime_error(where + ": shape must be [rows, cols]");
  const auto rows = shape[0].get<Eigen::Index>();
  const auto cols = shape[1].get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error(where + ": data length does not match shape");
  }
  num::Tensor2 t(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) t(i, c) = data[k++].get<double>();
  }
  return t;
}

}  // namespace

std::string checkpoint_to_text(const Checkpoint& checkpoint) {
  const auto& cfg = checkpoint.model.config();
  Json params = Json::object();
  for (const auto& p : checkpoint.model.tensors()) params[p.name] = tensor_to_json(p.value);

  Json moments = Json::object();
  for (const auto& [name, m] : checkpoint.adam.moments()) {
    moments[name] = {{"first", tensor_to_json(m.first)}, {"second", tensor_to_json(m.second)}};
  }
  const auto& ac = checkpoint.adam.config();

  Json doc;
  doc["format"] = kCheckpointFormat;
  doc["epoch"] = checkpoint.epoch;
  doc["model"] = {{"hidden_dim", cfg.hidden_dim},
                  {"heads", cfg.heads},
                  {"fusion_weight", cfg.fusion_weight},
                  {"activation", rel::to_string(cfg.activation)},
                  {"leaky_slope", cfg.leaky_slope}};
  doc["scheme"] = Json::parse(skel::scheme_to_text(checkpoint.scheme));
  doc["params"] = std::move(params);
  doc["adam"] = {{"learning_rate", ac.learning_rate},
                 {"beta1", ac.beta1},
                 {"beta2", ac.beta2},
                 {"epsilon", ac.epsilon},
                 {"step", checkpoint.adam.step()},
                 {"moments", std::move(moments)}};
  doc["metadata"] = checkpoint.metadata;
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_text(const std::string& text, const std::string& source) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(source + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("format", std::string()) != kCheckpointFormat) {
    throw std::runtime_error(source + ": missing or unsupported format tag (expected " +
                             std::string(kCheckpointFormat) + ")");
  }
  try {
    const auto& m = doc.at("model");
    rel::ModelConfig cfg;
    cfg.hidden_dim = m.at("hidden_dim").get<int>();
    cfg.heads = m.at("heads").get<int>();
    cfg.fusion_weight = m.at("fusion_weight").get<double>();
    cfg.activation = rel::parse_activation(m.at("activation").get<std::string>());
    cfg.leaky_slope = m.at("leaky_slope").get<double>();

    Checkpoint out{rel::ModelParams(cfg), skel::parse_scheme(doc.at("scheme").dump(), source + ": scheme"),
                   num::AdamState(), doc.value("epoch", 0), doc.value("metadata", Json::object())};

    const auto& params = doc.at("params");
    for (const auto& [name, unused] : params.items()) {
      if (!out.model.tensors().find(name)) throw std::runtime_error("unexpected parameter '" + name + "'");
    }
    for (auto& p : out.model.tensors()) {
      if (!params.contains(p.name)) throw std::runtime_error("missing parameter '" + p.name + "'");
      num::Tensor2 value = tensor_from_json(params.at(p.name), "parameter '" + p.name + "'");
      if (value.rows() != p.value.rows() || value.cols() != p.value.cols()) {
        throw std::runtime_error("parameter '" + p.name + "' has shape " + std::to_string(value.rows()) + "x" +
                                 std::to_string(value.cols()) + ", model expects " + std::to_string(p.value.rows()) +
                                 "x" + std::to_string(p.value.cols()));
      }
      p.value = std::move(value);
    }

    const auto& a = doc.at("adam");
    num::AdamConfig ac;
    ac.learning_rate = a.at("learning_rate").get<double>();
    ac.beta1 = a.at("beta1").get<double>();
    ac.beta2 = a.at("beta2").get<double>();
    ac.epsilon = a.at("epsilon").get<double>();
    out.adam = num::AdamState(ac);
    std::map<std::string, num::AdamMoments> moments;
    for (const auto& [name, mj] : a.at("moments").items()) {
      moments[name] = {tensor_from_json(mj.at("first"), "moment '" + name + "'"),
                       tensor_from_json(mj.at("second"), "moment '" + name + "'")};
    }
    out.adam.restore(a.at("step").get<std::int64_t>(), std::move(moments));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(source + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(source + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw std::runtime_error(source + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(source + ": " + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_text(checkpoint);
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_text(buf.str(), path);
}

}  // namespace skelproto
