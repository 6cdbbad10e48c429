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


#ifndef SKELPROTO_CHECKPOINT_HPP
#define SKELPROTO_CHECKPOINT_HPP

#include <string>

#include "json.hpp"
#include "skelproto/model.hpp"
#include "skelproto/optim.hpp"
#include "skelproto/skeleton.hpp"

namespace skelproto {

inline constexpr const char* kCheckpointFormat = "skelproto-checkpoint/1";

/// Everything needed to resume training or to embed new data: parameters,
/// model hyperparameters, the partition scheme, optimiser state and free-form
/// run metadata. Serialised as JSON with a fixed key order, so equal states
/// produce identical bytes.
struct Checkpoint {
  rel::ModelParams model;
  skel::PartitionScheme scheme;
  num::AdamState adam;
  int epoch = 0;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

std::string checkpoint_to_text(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_text(const std::string& text, const std::string& source = "<checkpoint>");

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace skelproto

#endif  // SKELPROTO_CHECKPOINT_HPP
