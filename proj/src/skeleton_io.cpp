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

#include "skelproto/skeleton_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace skelproto::skel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& field,
                       const std::string& what) {
  throw FormatError(source + ":" + std::to_string(line) + ": field '" + field + "': " + what);
}

std::optional<std::string> optional_string(const json& record, const char* key, const std::string& source,
                                           std::size_t line) {
  if (!record.contains(key) || record.at(key).is_null()) return std::nullopt;
  const json& v = record.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  fail(source, line, key, "expected a string or null");
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

void check_joint_count(int found, const DatasetLayout& layout, const std::string& source, std::size_t line,
                       const std::string& field) {
  if (found != layout.joint_count) {
    fail(source, line, field,
         "joint count mismatch: expected " + std::to_string(layout.joint_count) + ", found " +
             std::to_string(found));
  }
}

}  // namespace

std::vector<SkeletonSequence> parse_jsonl(const std::string& text, const std::string& source,
                                          const DatasetLayout& layout) {
  std::vector<SkeletonSequence> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(source, lineno, "<record>", std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) fail(source, lineno, "<record>", "expected an object");
    SkeletonSequence seq;
    seq.identity = optional_string(record, "id", source, lineno);
    seq.view = optional_string(record, "view", source, lineno);
    if (!record.contains("frames") || !record.at("frames").is_array()) {
      fail(source, lineno, "frames", "missing or not an array");
    }
    const json& frames = record.at("frames");
    if (frames.empty()) fail(source, lineno, "frames", "sequence has no frames");
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const std::string ft = "frames[" + std::to_string(t) + "]";
      const json& fr = frames[t];
      if (!fr.is_array()) fail(source, lineno, ft, "expected an array of joints");
      check_joint_count(static_cast<int>(fr.size()), layout, source, lineno, ft);
      SkeletonFrame frame(static_cast<Eigen::Index>(fr.size()), 3);
      for (std::size_t j = 0; j < fr.size(); ++j) {
        const json& joint = fr[j];
        const std::string fj = ft + "[" + std::to_string(j) + "]";
        if (!joint.is_array() || joint.size() != 3) fail(source, lineno, fj, "expected [x, y, z]");
        for (std::size_t k = 0; k < 3; ++k) {
          const json& c = joint[k];
          if (c.is_null()) fail(source, lineno, fj, "non-finite coordinate in frame " + std::to_string(t));
          if (!c.is_number()) fail(source, lineno, fj, "coordinate is not a number");
          const double v = c.get<double>();
          if (!std::isfinite(v)) fail(source, lineno, fj, "non-finite coordinate in frame " + std::to_string(t));
          frame(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
        }
      }
      seq.frames.push_back(std::move(frame));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<SkeletonSequence> parse_csv(const std::string& text, const std::string& source,
                                        const DatasetLayout& layout) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  int id_col = -1;
  int view_col = -1;
  std::size_t coord_start = 2;

  struct Pending {
    SkeletonSequence seq;
    std::map<long long, SkeletonFrame> frames;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> pending;

  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    auto fields = split_commas(line);
    if (first) {
      first = false;
      double probe = 0.0;
      if (!fields.empty() && fields[0] == "seq_id") {
        for (std::size_t c = 2; c < fields.size(); ++c) {
          if (fields[c] == "id") id_col = static_cast<int>(c);
          else if (fields[c] == "view") view_col = static_cast<int>(c);
        }
        coord_start = 2 + static_cast<std::size_t>(id_col >= 0) + static_cast<std::size_t>(view_col >= 0);
        continue;
      }
      if (fields.size() > 1 && !parse_double(fields[1], probe)) {
        fail(source, lineno, "frame_idx", "unrecognised header");
      }
    }
    if (fields.size() < coord_start) fail(source, lineno, "<row>", "too few columns");
    const std::string& seq_id = fields[0];
    double idx_value = 0.0;
    if (!parse_double(fields[1], idx_value) || idx_value != std::floor(idx_value)) {
      fail(source, lineno, "frame_idx", "expected an integer");
    }
    const std::size_t ncoords = fields.size() - coord_start;
    if (ncoords % 3 != 0) fail(source, lineno, "<coordinates>", "coordinate count is not a multiple of 3");
    check_joint_count(static_cast<int>(ncoords / 3), layout, source, lineno, "<coordinates>");
    const auto frame_idx = static_cast<long long>(idx_value);
    SkeletonFrame frame(static_cast<Eigen::Index>(ncoords / 3), 3);
    for (std::size_t c = 0; c < ncoords; ++c) {
      double v = 0.0;
      const std::string field = "c" + std::to_string(c);
      if (!parse_double(fields[coord_start + c], v)) fail(source, lineno, field, "not a number");
      if (!std::isfinite(v)) {
        fail(source, lineno, field, "non-finite coordinate in frame " + std::to_string(frame_idx));
      }
      frame(static_cast<Eigen::Index>(c / 3), static_cast<Eigen::Index>(c % 3)) = v;
    }
    auto [it, fresh] = pending.try_emplace(seq_id);
    if (fresh) order.push_back(seq_id);
    Pending& p = it->second;
    if (id_col >= 0 && !fields[static_cast<std::size_t>(id_col)].empty()) {
      p.seq.identity = fields[static_cast<std::size_t>(id_col)];
    }
    if (view_col >= 0 && !fields[static_cast<std::size_t>(view_col)].empty()) {
      p.seq.view = fields[static_cast<std::size_t>(view_col)];
    }
    if (!p.frames.emplace(frame_idx, std::move(frame)).second) {
      fail(source, lineno, "frame_idx", "duplicate frame " + std::to_string(frame_idx) + " for " + seq_id);
    }
  }

  std::vector<SkeletonSequence> out;
  for (const auto& key : order) {
    Pending& p = pending.at(key);
    for (auto& [idx, frame] : p.frames) p.seq.frames.push_back(std::move(frame));
    out.push_back(std::move(p.seq));
  }
  return out;
}

std::vector<SkeletonSequence> load_dataset(const fs::path& path, const DatasetLayout& layout) {
  if (!fs::exists(path)) throw std::runtime_error("dataset path does not exist: " + path.string());
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".jsonl" || ext == ".json" || ext == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<SkeletonSequence> out;
  for (const auto& f : files) {
    const std::string text = read_file(f);
    auto part = f.extension() == ".csv" ? parse_csv(text, f.string(), layout) : parse_jsonl(text, f.string(), layout);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<SkeletonSequence>& sequences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& seq : sequences) {
    json record;
    record["id"] = seq.identity ? json(*seq.identity) : json(nullptr);
    record["view"] = seq.view ? json(*seq.view) : json(nullptr);
    json frames = json::array();
    for (const auto& fr : seq.frames) {
      json joints = json::array();
      for (Eigen::Index j = 0; j < fr.rows(); ++j) joints.push_back({fr(j, 0), fr(j, 1), fr(j, 2)});
      frames.push_back(std::move(joints));
    }
    record["frames"] = std::move(frames);
    out << record.dump() << '\n';
  }
}

void write_csv(const fs::path& path, const std::vector<SkeletonSequence>& sequences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  const int joints = sequences.empty() ? 0 : sequences.front().joint_count();
  out << "seq_id,frame_idx,id,view";
  for (int j = 0; j < joints; ++j) out << ",x" << j << ",y" << j << ",z" << j;
  out << '\n';
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
      out << "s" << s << ',' << t << ',' << seq.identity.value_or("") << ',' << seq.view.value_or("");
      const auto& fr = seq.frames[t];
      for (Eigen::Index j = 0; j < fr.rows(); ++j) out << ',' << fr(j, 0) << ',' << fr(j, 1) << ',' << fr(j, 2);
      out << '\n';
    }
  }
}

PartitionScheme parse_scheme(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ": invalid JSON: " + e.what());
  }
  auto need = [&](const json& obj, const char* key) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) throw FormatError(source + ": missing field '" + key + "'");
    return obj.at(key);
  };
  PartitionScheme s;
  try {
    s.name = doc.value("name", std::string("custom"));
    s.joint_count = need(doc, "joints").get<int>();
    const json& levels = need(doc, "levels");
    if (!levels.is_array() || levels.size() != kLevels) {
      throw FormatError(source + ": field 'levels' must list exactly 3 graph levels");
    }
    for (std::size_t l = 0; l < kLevels; ++l) {
      GraphLevel& level = s.levels[l];
      for (const json& part : need(levels[l], "partitions")) {
        const auto joints = need(part, "joints").get<std::vector<int>>();
        std::vector<double> weights;
        if (part.contains("weights")) {
          weights = part.at("weights").get<std::vector<double>>();
        } else {
          weights.assign(joints.size(), joints.empty() ? 0.0 : 1.0 / static_cast<double>(joints.size()));
        }
        if (weights.size() != joints.size()) {
          throw FormatError(source + ": level " + std::to_string(l + 1) + ": joints/weights length mismatch");
        }
        Partition p;
        for (std::size_t i = 0; i < joints.size(); ++i) p.push_back({joints[i], weights[i]});
        level.partitions.push_back(std::move(p));
      }
      for (const json& e : need(levels[l], "edges")) {
        const auto pair = e.get<std::vector<int>>();
        if (pair.size() != 2) throw FormatError(source + ": edges must be [a, b] pairs");
        level.edges.emplace_back(pair[0], pair[1]);
      }
    }
    if (doc.contains("center")) {
      s.center_level = need(doc.at("center"), "level").get<int>();
      s.center_node = need(doc.at("center"), "node").get<int>();
    }
  } catch (const json::exception& e) {
    throw FormatError(source + ": " + e.what());
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(source + ": " + e.what());
  }
  return s;
}

std::string scheme_to_text(const PartitionScheme& scheme) {
  json doc;
  doc["format"] = "skelproto-scheme/1";
  doc["name"] = scheme.name;
  doc["joints"] = scheme.joint_count;
  doc["center"] = {{"level", scheme.center_level}, {"node", scheme.center_node}};
  json levels = json::array();
  for (const auto& level : scheme.levels) {
    json parts = json::array();
    for (const auto& p : level.partitions) {
      json joints = json::array();
      json weights = json::array();
      for (const auto& m : p) {
        joints.push_back(m.joint);
        weights.push_back(m.weight);
      }
      parts.push_back({{"joints", joints}, {"weights", weights}});
    }
    json edges = json::array();
    for (const auto& [a, b] : level.edges) edges.push_back({a, b});
    levels.push_back({{"partitions", parts}, {"edges", edges}});
  }
  doc["levels"] = std::move(levels);
  return doc.dump(2);
}

PartitionScheme load_scheme(const fs::path& path) { return parse_scheme(read_file(path), path.string()); }

PartitionScheme resolve_scheme(const std::string& spec) {
  if (spec.empty() || spec == "builtin20") return builtin20();
  return load_scheme(spec);
}

}  // namespace skelproto::skel
