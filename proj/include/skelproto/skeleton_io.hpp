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

#ifndef SKELPROTO_SKELETON_IO_HPP
#define SKELPROTO_SKELETON_IO_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "skelproto/skeleton.hpp"

namespace skelproto::skel {

/// Raised for malformed skeleton or scheme files; the message carries file,
/// line and field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetLayout {
  std::string name = "builtin20";
  int joint_count = joint20::kCount;
};

/// Reads one file or every *.jsonl / *.json / *.csv file of a directory
/// (lexicographic order). JSON-lines records look like
///   {"id": "p01", "view": "front", "frames": [[[x, y, z], ...], ...]}
/// and CSV rows like `seq_id,frame_idx,x0,y0,z0,...`; a CSV header naming
/// `id` / `view` columns after `frame_idx` attaches labels.
std::vector<SkeletonSequence> load_dataset(const std::filesystem::path& path, const DatasetLayout& layout);

std::vector<SkeletonSequence> parse_jsonl(const std::string& text, const std::string& source,
                                          const DatasetLayout& layout);
std::vector<SkeletonSequence> parse_csv(const std::string& text, const std::string& source,
                                        const DatasetLayout& layout);

void write_jsonl(const std::filesystem::path& path, const std::vector<SkeletonSequence>& sequences);
void write_csv(const std::filesystem::path& path, const std::vector<SkeletonSequence>& sequences);

PartitionScheme load_scheme(const std::filesystem::path& path);
PartitionScheme parse_scheme(const std::string& text, const std::string& source = "<scheme>");
std::string scheme_to_text(const PartitionScheme& scheme);

/// "builtin20" or a path to a scheme file.
PartitionScheme resolve_scheme(const std::string& spec);

}  // namespace skelproto::skel

#endif  // SKELPROTO_SKELETON_IO_HPP
