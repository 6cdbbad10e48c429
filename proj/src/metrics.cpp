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

#include "skelproto/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace skelproto::eval {

RankedGallery rank(const num::Tensor2& probe, const num::Tensor2& gallery, const RankOptions& options) {
  if (gallery.rows() == 0) throw std::invalid_argument("rank: empty gallery");
  if (probe.cols() != gallery.cols()) {
    throw std::invalid_argument("rank: embedding dimension mismatch (probe " + std::to_string(probe.cols()) +
                                ", gallery " + std::to_string(gallery.cols()) + ")");
  }
  const bool filter = options.exclude_same_view;
  if (filter && (options.probe_views == nullptr || options.gallery_views == nullptr ||
                 options.probe_views->size() != static_cast<std::size_t>(probe.rows()) ||
                 options.gallery_views->size() != static_cast<std::size_t>(gallery.rows()))) {
    throw std::invalid_argument("rank: view exclusion needs one view tag per embedding");
  }

  RankedGallery out;
  out.order.resize(static_cast<std::size_t>(probe.rows()));
  out.distances.resize(static_cast<std::size_t>(probe.rows()));
  for (Eigen::Index p = 0; p < probe.rows(); ++p) {
    std::vector<int> idx;
    std::vector<double> dist(static_cast<std::size_t>(gallery.rows()));
    for (Eigen::Index g = 0; g < gallery.rows(); ++g) {
      dist[static_cast<std::size_t>(g)] = (probe.row(p) - gallery.row(g)).norm();
      if (filter && (*options.gallery_views)[static_cast<std::size_t>(g)] ==
                        (*options.probe_views)[static_cast<std::size_t>(p)]) {
        continue;
      }
      idx.push_back(static_cast<int>(g));
    }
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
    });
    std::vector<double> sorted;
    sorted.reserve(idx.size());
    for (int g : idx) sorted.push_back(dist[static_cast<std::size_t>(g)]);
    out.order[static_cast<std::size_t>(p)] = std::move(idx);
    out.distances[static_cast<std::size_t>(p)] = std::move(sorted);
  }
  return out;
}

namespace {

bool has_match(const std::vector<int>& order, const std::string& label, const Labels& gallery_labels) {
  return std::any_of(order.begin(), order.end(),
                     [&](int g) { return gallery_labels[static_cast<std::size_t>(g)] == label; });
}

void check_labels(const RankedGallery& ranked, const Labels& probe_labels) {
  if (ranked.order.size() != probe_labels.size()) throw std::invalid_argument("one label per probe required");
}

}  // namespace

CmcResult cmc(const RankedGallery& ranked, const Labels& probe_labels, const Labels& gallery_labels,
              const std::vector<int>& ks) {
  check_labels(ranked, probe_labels);
  CmcResult out;
  out.ks = ks;
  std::vector<int> hits(ks.size(), 0);
  for (std::size_t p = 0; p < ranked.order.size(); ++p) {
    const auto& order = ranked.order[p];
    if (!has_match(order, probe_labels[p], gallery_labels)) {
      ++out.excluded;
      std::clog << "warning: probe " << p << " (identity " << probe_labels[p]
                << ") has no match in the gallery; excluded\n";
      continue;
    }
    ++out.evaluated;
    std::size_t first = 0;
    while (gallery_labels[static_cast<std::size_t>(order[first])] != probe_labels[p]) ++first;
    for (std::size_t k = 0; k < ks.size(); ++k) {
      if (static_cast<int>(first) < ks[k]) ++hits[k];
    }
  }
  for (int h : hits) out.rates.push_back(out.evaluated == 0 ? 0.0 : static_cast<double>(h) / out.evaluated);
  return out;
}

double mean_ap(const RankedGallery& ranked, const Labels& probe_labels, const Labels& gallery_labels, int* excluded) {
  check_labels(ranked, probe_labels);
  double total = 0.0;
  int evaluated = 0;
  int skipped = 0;
  for (std::size_t p = 0; p < ranked.order.size(); ++p) {
    const auto& order = ranked.order[p];
    int matches = 0;
    double precision_sum = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (gallery_labels[static_cast<std::size_t>(order[r])] == probe_labels[p]) {
        ++matches;
        precision_sum += static_cast<double>(matches) / static_cast<double>(r + 1);
      }
    }
    if (matches == 0) {
      ++skipped;
      continue;
    }
    total += precision_sum / matches;
    ++evaluated;
  }
  if (excluded != nullptr) *excluded = skipped;
  return evaluated == 0 ? 0.0 : total / evaluated;
}

double cosine_distance(const Eigen::Ref<const Eigen::RowVectorXd>& v, const Eigen::Ref<const Eigen::RowVectorXd>& c) {
  const double nv = v.norm();
  const double nc = c.norm();
  if (!(nv > 0.0) || !(nc > 0.0)) throw std::domain_error("cosine distance of a zero-norm vector");
  const double d = 1.0 - v.dot(c) / (nv * nc);
  // Collinear vectors land a few ulps away from zero; report them as exactly
  // collinear so infinite ACT and zero mRCL are detected reliably.
  return d <= kCollinearTolerance ? 0.0 : d;
}

ClassGeometry class_geometry(const num::Tensor2& reps, const Labels& labels) {
  if (static_cast<std::size_t>(reps.rows()) != labels.size()) {
    throw std::invalid_argument("class_geometry: one label per representation required");
  }
  std::map<std::string, std::vector<Eigen::Index>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(static_cast<Eigen::Index>(i));
  if (members.size() < 2) throw std::invalid_argument("class_geometry: at least two classes required");

  ClassGeometry g;
  const auto C = static_cast<Eigen::Index>(members.size());
  g.centroids = num::Tensor2::Zero(C, reps.cols());
  Eigen::Index k = 0;
  for (const auto& [cls, idx] : members) {
    g.classes.push_back(cls);
    for (auto i : idx) g.centroids.row(k) += reps.row(i);
    g.centroids.row(k) /= static_cast<double>(idx.size());
    ++k;
  }

  double global = 0.0;
  k = 0;
  for (const auto& [cls, idx] : members) {
    double intra = 0.0;
    double to_all = 0.0;
    for (auto i : idx) {
      intra += cosine_distance(reps.row(i), g.centroids.row(k));
      double row = 0.0;
      for (Eigen::Index z = 0; z < C; ++z) row += cosine_distance(reps.row(i), g.centroids.row(z));
      to_all += row / static_cast<double>(C);
    }
    g.intra.push_back(intra / static_cast<double>(idx.size()));
    global += to_all / static_cast<double>(idx.size());
    ++k;
  }
  g.global_average = global / static_cast<double>(C);

  double pairs = 0.0;
  for (Eigen::Index i = 0; i < C; ++i) {
    for (Eigen::Index j = 0; j < C; ++j) pairs += cosine_distance(g.centroids.row(i), g.centroids.row(j));
  }
  g.centroid_average = pairs / static_cast<double>(C * C);
  return g;
}

namespace {

double act_from(const ClassGeometry& g, std::size_t k) {
  if (g.intra[k] == 0.0) {
    std::clog << "warning: class " << g.classes[k] << " has zero intra-class distance; ACT is infinite\n";
    return std::numeric_limits<double>::infinity();
  }
  return g.global_average / g.intra[k];
}

}  // namespace

double act(const num::Tensor2& reps, const Labels& labels, const std::string& cls) {
  const ClassGeometry g = class_geometry(reps, labels);
  const auto it = std::find(g.classes.begin(), g.classes.end(), cls);
  if (it == g.classes.end()) throw std::invalid_argument("act: unknown class " + cls);
  return act_from(g, static_cast<std::size_t>(it - g.classes.begin()));
}

std::vector<std::pair<std::string, double>> act_per_class(const num::Tensor2& reps, const Labels& labels) {
  const ClassGeometry g = class_geometry(reps, labels);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t k = 0; k < g.classes.size(); ++k) out.emplace_back(g.classes[k], act_from(g, k));
  return out;
}

double mact(const num::Tensor2& reps, const Labels& labels) {
  double total = 0.0;
  int finite = 0;
  for (const auto& [cls, value] : act_per_class(reps, labels)) {
    if (std::isinf(value)) {
      std::clog << "warning: mACT excludes class " << cls << " (infinite ACT)\n";
      continue;
    }
    total += value;
    ++finite;
  }
  if (finite == 0) return std::numeric_limits<double>::infinity();
  return total / finite;
}

double mrcl(const num::Tensor2& reps, const Labels& labels) {
  const ClassGeometry g = class_geometry(reps, labels);
  if (g.global_average == 0.0) throw std::domain_error("mrcl: global average distance is zero");
  return g.centroid_average / g.global_average;
}

MetricReport evaluate(const EvalInputs& in, const EvalOptions& options) {
  const num::Tensor2 probe = options.normalize ? num::normalize_rows(in.probe) : in.probe;
  const num::Tensor2 gallery = options.normalize ? num::normalize_rows(in.gallery) : in.gallery;
  RankOptions ro;
  ro.exclude_same_view = options.exclude_same_view;
  ro.probe_views = &in.probe_views;
  ro.gallery_views = &in.gallery_views;
  const RankedGallery ranked = rank(probe, gallery, ro);

  MetricReport r;
  const CmcResult c = cmc(ranked, in.probe_labels, in.gallery_labels, {1, 5, 10});
  r.top1 = c.rates[0];
  r.top5 = c.rates[1];
  r.top10 = c.rates[2];
  r.map = mean_ap(ranked, in.probe_labels, in.gallery_labels);
  r.probes = c.evaluated;
  r.excluded_probes = c.excluded;

  num::Tensor2 all(in.probe.rows() + in.gallery.rows(), in.probe.cols());
  all << in.probe, in.gallery;
  Labels labels = in.probe_labels;
  labels.insert(labels.end(), in.gallery_labels.begin(), in.gallery_labels.end());
  r.per_class_act = act_per_class(all, labels);
  r.mact = mact(all, labels);
  r.mrcl = mrcl(all, labels);
  return r;
}

MetricReport evaluate_repeated(const EvalInputs& in, const EvalOptions& options, int repetitions,
                               std::uint64_t seed) {
  if (repetitions < 1) throw std::invalid_argument("evaluate_repeated: repetitions must be >= 1");
  const Eigen::Index np = in.probe.rows();
  const Eigen::Index total = np + in.gallery.rows();
  num::Tensor2 pool(total, in.probe.cols());
  pool << in.probe, in.gallery;
  Labels labels = in.probe_labels;
  labels.insert(labels.end(), in.gallery_labels.begin(), in.gallery_labels.end());
  const bool has_views = !in.probe_views.empty() || !in.gallery_views.empty();
  Labels views;
  if (has_views) {
    if (static_cast<Eigen::Index>(in.probe_views.size()) != np ||
        static_cast<Eigen::Index>(in.gallery_views.size()) != in.gallery.rows()) {
      throw std::invalid_argument("evaluate_repeated: view tags must cover every probe and gallery row");
    }
    views = in.probe_views;
    views.insert(views.end(), in.gallery_views.begin(), in.gallery_views.end());
  }

  // Per identity: pooled indices and how many of them were probes.
  std::map<std::string, std::vector<int>> members;
  std::map<std::string, int> probe_count;
  for (Eigen::Index i = 0; i < total; ++i) {
    members[labels[static_cast<std::size_t>(i)]].push_back(static_cast<int>(i));
    if (i < np) ++probe_count[labels[static_cast<std::size_t>(i)]];
  }

  std::mt19937_64 rng(seed);
  MetricReport mean;
  std::map<std::string, double> act_sum;
  for (int rep = 0; rep < repetitions; ++rep) {
    EvalInputs split;
    if (rep == 0) {
      split = in;
    } else {
      std::vector<int> probes, gallery;
      for (auto& [id, idx] : members) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const int k = probe_count[id];
        probes.insert(probes.end(), idx.begin(), idx.begin() + k);
        gallery.insert(gallery.end(), idx.begin() + k, idx.end());
      }
      std::sort(probes.begin(), probes.end());
      std::sort(gallery.begin(), gallery.end());
      auto take = [&](const std::vector<int>& rows, num::Tensor2& x, Labels& y, Labels& v) {
        x.resize(static_cast<Eigen::Index>(rows.size()), pool.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          x.row(static_cast<Eigen::Index>(r)) = pool.row(rows[r]);
          y.push_back(labels[static_cast<std::size_t>(rows[r])]);
          if (has_views) v.push_back(views[static_cast<std::size_t>(rows[r])]);
        }
      };
      take(probes, split.probe, split.probe_labels, split.probe_views);
      take(gallery, split.gallery, split.gallery_labels, split.gallery_views);
    }
    const MetricReport r = evaluate(split, options);
    mean.top1 += r.top1;
    mean.top5 += r.top5;
    mean.top10 += r.top10;
    mean.map += r.map;
    mean.mact += r.mact;
    mean.mrcl += r.mrcl;
    mean.probes = r.probes;
    mean.excluded_probes += r.excluded_probes;
    for (const auto& [cls, v] : r.per_class_act) act_sum[cls] += v;
  }
  const double n = repetitions;
  mean.top1 /= n;
  mean.top5 /= n;
  mean.top10 /= n;
  mean.map /= n;
  mean.mact /= n;
  mean.mrcl /= n;
  for (const auto& [cls, v] : act_sum) mean.per_class_act.emplace_back(cls, v / n);
  mean.repetitions = repetitions;
  return mean;
}

namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string format_report(const MetricReport& r) {
  std::ostringstream os;
  char line[128];
  os << "metric    value\n";
  std::snprintf(line, sizeof(line), "top-1     %.4f\ntop-5     %.4f\ntop-10    %.4f\nmAP       %.4f\n", r.top1, r.top5,
                r.top10, r.map);
  os << line;
  std::snprintf(line, sizeof(line), "mACT      %.4f\nmRCL      %.4f\n", r.mact, r.mrcl);
  os << line;
  os << "probes    " << r.probes << " (excluded " << r.excluded_probes << "), repetitions " << r.repetitions << '\n';
  return os.str();
}

std::string report_to_csv(const MetricReport& r) {
  std::ostringstream os;
  os << "metric,value\n";
  os << "top1," << exact(r.top1) << '\n';
  os << "top5," << exact(r.top5) << '\n';
  os << "top10," << exact(r.top10) << '\n';
  os << "mAP," << exact(r.map) << '\n';
  os << "mACT," << exact(r.mact) << '\n';
  os << "mRCL," << exact(r.mrcl) << '\n';
  for (const auto& [cls, v] : r.per_class_act) os << "ACT[" << cls << "]," << exact(v) << '\n';
  return os.str();
}

std::string report_to_json(const MetricReport& r) {
  nlohmann::ordered_json doc;
  doc["top1"] = r.top1;
  doc["top5"] = r.top5;
  doc["top10"] = r.top10;
  doc["mAP"] = r.map;
  doc["mACT"] = std::isfinite(r.mact) ? nlohmann::ordered_json(r.mact) : nlohmann::ordered_json("inf");
  doc["mRCL"] = r.mrcl;
  doc["probes"] = r.probes;
  doc["excluded_probes"] = r.excluded_probes;
  doc["repetitions"] = r.repetitions;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [cls, v] : r.per_class_act) {
    per[cls] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json("inf");
  }
  doc["act"] = std::move(per);
  return doc.dump(2) + "\n";
}

}  // namespace skelproto::eval
