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

#ifndef SKELPROTO_METRICS_HPP
#define SKELPROTO_METRICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skelproto/tensor.hpp"

namespace skelproto::eval {

using Labels = std::vector<std::string>;

/// Per probe, gallery indices by ascending Euclidean distance (ties by index).
struct RankedGallery {
  std::vector<std::vector<int>> order;
  std::vector<std::vector<double>> distances;
};

struct RankOptions {
  // When set, gallery entries whose view equals the probe's view are dropped.
  const Labels* probe_views = nullptr;
  const Labels* gallery_views = nullptr;
  bool exclude_same_view = false;
};

RankedGallery rank(const num::Tensor2& probe, const num::Tensor2& gallery, const RankOptions& options = {});

struct CmcResult {
  std::vector<int> ks;
  std::vector<double> rates;
  int evaluated = 0;
  int excluded = 0;  // probes whose identity is absent from their ranking
};

/// Fraction of probes with a same-identity entry among the first k.
CmcResult cmc(const RankedGallery& ranked, const Labels& probe_labels, const Labels& gallery_labels,
              const std::vector<int>& ks);

/// Mean over probes of average precision over the ranks of their matches.
double mean_ap(const RankedGallery& ranked, const Labels& probe_labels, const Labels& gallery_labels,
               int* excluded = nullptr);

/// Cosine distance 1 - <v, c> / (|v| |c|); throws std::domain_error on a zero vector.
// Cosine distances at or below this value are treated as exactly zero.
inline constexpr double kCollinearTolerance = 1e-12;

double cosine_distance(const Eigen::Ref<const Eigen::RowVectorXd>& v, const Eigen::Ref<const Eigen::RowVectorXd>& c);

/// Class statistics shared by the tightness and looseness measures.
struct ClassGeometry {
  std::vector<std::string> classes;  // sorted
  num::Tensor2 centroids;            // C x d
  std::vector<double> intra;         // mean distance of class k samples to c_k
  double global_average = 0.0;       // mean over classes of mean sample-to-all-centroid distance
  double centroid_average = 0.0;     // mean over all ordered centroid pairs, diagonal included
};

ClassGeometry class_geometry(const num::Tensor2& reps, const Labels& labels);

/// ACT(k) = global average distance / class-k intra-class distance. +inf when
/// the intra-class distance is zero.
double act(const num::Tensor2& reps, const Labels& labels, const std::string& cls);
std::vector<std::pair<std::string, double>> act_per_class(const num::Tensor2& reps, const Labels& labels);

/// Mean of the finite ACT values; infinite ones are skipped with a warning.
double mact(const num::Tensor2& reps, const Labels& labels);

/// Average centroid distance over the global average distance.
double mrcl(const num::Tensor2& reps, const Labels& labels);

struct MetricReport {
  double top1 = 0.0;
  double top5 = 0.0;
  double top10 = 0.0;
  double map = 0.0;
  double mact = 0.0;
  double mrcl = 0.0;
  std::vector<std::pair<std::string, double>> per_class_act;
  int probes = 0;
  int excluded_probes = 0;
  int repetitions = 1;
};

struct EvalInputs {
  num::Tensor2 probe;
  Labels probe_labels;
  Labels probe_views;
  num::Tensor2 gallery;
  Labels gallery_labels;
  Labels gallery_views;
};

struct EvalOptions {
  bool normalize = false;  // match unit-normalised embeddings
  bool exclude_same_view = false;
};

/// CMC top-1/5/10 and mAP on the probe/gallery split; mACT, mRCL and per-class
/// ACT on probe and gallery embeddings together.
MetricReport evaluate(const EvalInputs& inputs, const EvalOptions& options = {});

/// Mean report over `repetitions` probe/gallery splits. The first split is the
/// one given; every further split pools each identity's probe and gallery
/// samples, shuffles them with a generator seeded from `seed`, and deals them
/// back in the original per-identity probe/gallery counts.
MetricReport evaluate_repeated(const EvalInputs& inputs, const EvalOptions& options, int repetitions,
                               std::uint64_t seed);

std::string format_report(const MetricReport& report);
std::string report_to_csv(const MetricReport& report);
std::string report_to_json(const MetricReport& report);

}  // namespace skelproto::eval

#endif  // SKELPROTO_METRICS_HPP
