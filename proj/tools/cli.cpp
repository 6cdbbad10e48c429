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


#include "skelproto/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skelproto/checkpoint.hpp"
#include "skelproto/exports.hpp"
#include "skelproto/gradcheck.hpp"
#include "skelproto/metrics.hpp"
#include "skelproto/skeleton_io.hpp"
#include "skelproto/spc.hpp"
#include "skelproto/synthgait.hpp"

namespace skelproto::cli {
namespace {

namespace fs = std::filesystem;

// Invalid option values detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Fn>
void check_usage(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_resolved_config(const CLI::App& sub, const fs::path& out_dir) {
  write_text(out_dir / "config.ini", "[" + sub.get_name() + "]\n" + sub.config_to_str(true, false));
}

// Windowing and preprocessing shared by every command that reads skeletons.
struct DataOptions {
  int window = 6;
  int stride = 0;  // 0: same as window
  bool no_center = false;

  void add_to(CLI::App& app) {
    app.add_option("--window", window, "Frames per sequence (f)")->capture_default_str();
    app.add_option("--stride", stride, "Window stride; 0 means non-overlapping")->capture_default_str();
    app.add_flag("--no-center", no_center, "Keep raw coordinates instead of centring on the torso node");
  }
};

std::vector<skel::SkeletonSequence> load_sequences(const std::string& path, const DataOptions& data,
                                                   const skel::PartitionScheme& scheme) {
  skel::DatasetLayout layout;
  layout.joint_count = scheme.joint_count;
  const auto recordings = skel::load_dataset(path, layout);
  std::vector<skel::SkeletonSequence> seqs;
  check_usage([&] { seqs = skel::split_sequences(recordings, data.window, data.stride > 0 ? data.stride : data.window); });
  if (!data.no_center) seqs = skel::center_sequences(seqs, scheme);
  return seqs;
}

struct ModelOptions {
  int dh = 8;
  int heads = 8;
  double fusion = 1.0;
  std::string activation = "tanh";

  void add_to(CLI::App& app, CLI::Option** dh_opt = nullptr) {
    auto* o = app.add_option("--dh", dh, "Hidden feature dimension D_h")->capture_default_str();
    if (dh_opt != nullptr) *dh_opt = o;
    app.add_option("--heads", heads, "Attention heads per level")->capture_default_str();
    app.add_option("--lambda", fusion, "Fusion weight for collaborative relations")->capture_default_str();
    app.add_option("--activation", activation, "Structural-layer activation: tanh or sigmoid")
        ->capture_default_str();
  }

  rel::ModelConfig config() const {
    rel::ModelConfig c;
    check_usage([&] {
      c.hidden_dim = dh;
      c.heads = heads;
      c.fusion_weight = fusion;
      c.activation = rel::parse_activation(activation);
      c.validate();
    });
    return c;
  }
};

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  int identities = 10;
  int per_identity = 20;
  int train_count = 10;
  int gallery_count = 5;
  int frames = 6;
  double frame_rate = 4.0;
  int views = 1;
  double length_spread = 0.2;
  double frequency_spread = 0.3;
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::string walkers;
  std::string format = "jsonl";
  std::string out = "out";
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  app.add_option("--identities", a.identities)->capture_default_str();
  app.add_option("--sequences-per-identity", a.per_identity)->capture_default_str();
  app.add_option("--train-per-identity", a.train_count)->capture_default_str();
  app.add_option("--gallery-per-identity", a.gallery_count, "Remaining sequences go to the probe set")
      ->capture_default_str();
  app.add_option("--frames", a.frames)->capture_default_str();
  app.add_option("--frame-rate", a.frame_rate, "Samples per second")->capture_default_str();
  app.add_option("--views", a.views, "Distinct camera yaw angles (30 degree steps)")->capture_default_str();
  app.add_option("--length-spread", a.length_spread)->capture_default_str();
  app.add_option("--frequency-spread", a.frequency_spread)->capture_default_str();
  app.add_option("--noise", a.noise, "Gaussian sigma per coordinate (metres)")->capture_default_str();
  app.add_option("--seed", a.seed)->capture_default_str();
  app.add_option("--walkers", a.walkers, "Walker file to use instead of a generated population");
  app.add_option("--format", a.format, "jsonl or csv")->capture_default_str();
  app.add_option("--out", a.out)->capture_default_str();
}

void cmd_generate(const CLI::App& sub, const GenerateArgs& a, std::ostream& out) {
  if (a.format != "jsonl" && a.format != "csv") throw UsageError("--format must be jsonl or csv");
  if (a.train_count < 0 || a.gallery_count < 0 || a.train_count + a.gallery_count > a.per_identity) {
    throw UsageError("train + gallery sequences per identity exceed --sequences-per-identity");
  }
  std::vector<synth::WalkerSpec> walkers;
  if (!a.walkers.empty()) {
    std::ifstream in(a.walkers);
    if (!in) throw std::runtime_error("cannot open walker file " + a.walkers);
    std::ostringstream buf;
    buf << in.rdbuf();
    walkers = synth::walkers_from_text(buf.str());
  } else {
    synth::PopulationOptions po;
    po.identities = a.identities;
    po.length_spread = a.length_spread;
    po.frequency_spread = a.frequency_spread;
    po.noise = a.noise;
    po.seed = a.seed;
    check_usage([&] { walkers = synth::make_population(po); });
  }
  synth::GenerateOptions go;
  go.sequences_per_identity = a.per_identity;
  go.frames = a.frames;
  go.frame_rate = a.frame_rate;
  go.views = a.views;
  go.seed = a.seed;
  std::vector<skel::SkeletonSequence> all;
  check_usage([&] { all = synth::generate(walkers, go); });

  std::vector<skel::SkeletonSequence> train, gallery, probe;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int s = static_cast<int>(i % static_cast<std::size_t>(a.per_identity));
    auto& dst = s < a.train_count ? train : (s < a.train_count + a.gallery_count ? gallery : probe);
    dst.push_back(all[i]);
  }
  const fs::path dir = prepare_out(a.out);
  const std::string ext = "." + a.format;
  auto write = [&](const std::string& name, const std::vector<skel::SkeletonSequence>& seqs) {
    if (a.format == "csv") {
      skel::write_csv(dir / (name + ext), seqs);
    } else {
      skel::write_jsonl(dir / (name + ext), seqs);
    }
  };
  write("train", train);
  write("gallery", gallery);
  write("probe", probe);
  write_text(dir / "walkers.json", synth::walkers_to_text(walkers) + "\n");
  write_resolved_config(sub, dir);
  out << "wrote " << train.size() << " train, " << gallery.size() << " gallery, " << probe.size()
      << " probe sequences to " << dir.string() << "\n";
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string train;
  std::string scheme = "builtin20";
  DataOptions data;
  ModelOptions model;
  double eps = 0.8;
  int min_samples = 2;
  double tau = 0.08;
  double lr = 0.00035;
  int batch_size = 128;
  int epochs = 30;
  std::uint64_t seed = 0;
  std::string whitening = "standardize";
  std::string init;
  int checkpoint_every = 0;
  int threads = 1;
  std::string out = "out";
  CLI::Option* dh_opt = nullptr;
};

void add_train(CLI::App& app, TrainArgs& a) {
  app.add_option("--train", a.train, "Training skeleton file or directory")->required()->check(CLI::ExistingPath);
  app.add_option("--scheme", a.scheme, "builtin20 or a partition-scheme file")->capture_default_str();
  a.data.add_to(app);
  a.model.add_to(app, &a.dh_opt);
  app.add_option("--eps", a.eps, "DBSCAN radius")->capture_default_str();
  app.add_option("--min-samples", a.min_samples, "DBSCAN core size, self included")->capture_default_str();
  app.add_option("--tau", a.tau, "Contrastive temperature")->capture_default_str();
  app.add_option("--lr", a.lr)->capture_default_str();
  app.add_option("--batch-size", a.batch_size)->capture_default_str();
  app.add_option("--epochs", a.epochs)->capture_default_str();
  app.add_option("--seed", a.seed)->capture_default_str();
  app.add_option("--whitening", a.whitening, "none, center or standardize")->capture_default_str();
  // Empty means unset; resolved configs always list the key.
  app.add_option("--init", a.init, "Start from this checkpoint's parameters")
      ->check(CLI::Validator(
          [](std::string& v) { return v.empty() ? std::string() : CLI::ExistingFile(v); }, "FILE", "ExistingFile"));
  app.add_option("--checkpoint-every", a.checkpoint_every, "Extra checkpoint every k epochs (0: final only)")
      ->capture_default_str();
  app.add_option("--threads", a.threads, "Worker threads for embedding passes")->capture_default_str();
  app.add_option("--out", a.out)->capture_default_str();
}

std::string epoch_file(int epoch) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "checkpoint_e%04d.json", epoch);
  return buf;
}

void cmd_train(const CLI::App& sub, const TrainArgs& a, std::ostream& out) {
  spc::SpcConfig cfg;
  cfg.eps = a.eps;
  cfg.min_samples = a.min_samples;
  cfg.temperature = a.tau;
  cfg.batch_size = a.batch_size;
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  check_usage([&] {
    cfg.whitening = spc::parse_whitening(a.whitening);
    cfg.validate();
  });
  if (!(a.lr > 0.0)) throw UsageError("--lr must be > 0");
  if (a.checkpoint_every < 0) throw UsageError("--checkpoint-every must be >= 0");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");

  skel::PartitionScheme scheme;
  std::optional<rel::ModelParams> model;
  if (!a.init.empty()) {
    Checkpoint init = load_checkpoint(a.init);
    if (a.dh_opt != nullptr && a.dh_opt->count() > 0 && a.model.dh != init.model.config().hidden_dim) {
      throw UsageError("--dh " + std::to_string(a.model.dh) + " does not match the initial checkpoint (D_h=" +
                       std::to_string(init.model.config().hidden_dim) + ")");
    }
    scheme = init.scheme;
    model.emplace(std::move(init.model));
  } else {
    scheme = skel::resolve_scheme(a.scheme);
    model.emplace(rel::ModelParams::initialize(a.model.config(), a.seed));
  }
  const auto train_set = load_sequences(a.train, a.data, scheme);
  if (train_set.empty()) throw std::runtime_error("no training sequences in " + a.train);

  num::AdamConfig ac;
  ac.learning_rate = a.lr;
  num::AdamState adam(ac);

  const fs::path dir = prepare_out(a.out);
  write_resolved_config(sub, dir);

  nlohmann::ordered_json meta = {{"window", a.data.window},
                                 {"stride", a.data.stride > 0 ? a.data.stride : a.data.window},
                                 {"center", !a.data.no_center},
                                 {"eps", cfg.eps},
                                 {"min_samples", cfg.min_samples},
                                 {"temperature", cfg.temperature},
                                 {"batch_size", cfg.batch_size},
                                 {"epochs", cfg.epochs},
                                 {"seed", cfg.seed},
                                 {"whitening", spc::to_string(cfg.whitening)},
                                 {"init", a.init}};
  auto snapshot = [&](int epoch) {
    return Checkpoint{*model, scheme, adam, epoch, meta};
  };

  std::string log = "epoch,z,n_outliers,mean_loss,wall_time_ms\n";
  spc::TrainHooks hooks;
  hooks.threads = a.threads;
  hooks.on_epoch = [&](const spc::EpochLog& e) {
    log += std::to_string(e.epoch) + "," + std::to_string(e.clusters) + "," + std::to_string(e.outliers) + "," +
           (e.skipped ? std::string("nan") : number(e.mean_loss)) + "," + number(e.wall_time_ms) + "\n";
    out << "epoch " << e.epoch << "  z=" << e.clusters << "  outliers=" << e.outliers << "  loss="
        << (e.skipped ? std::string("skipped") : number(e.mean_loss)) << "\n";
    if (a.checkpoint_every > 0 && e.epoch % a.checkpoint_every == 0) {
      save_checkpoint(snapshot(e.epoch), (dir / epoch_file(e.epoch)).string());
    }
  };
  try {
    spc::train(train_set, *model, scheme, cfg, adam, hooks);
  } catch (const spc::TrainingAborted&) {
    write_text(dir / "train_log.csv", log);
    throw;
  }
  write_text(dir / "train_log.csv", log);
  save_checkpoint(snapshot(cfg.epochs), (dir / "checkpoint.json").string());
  out << "wrote " << (dir / "checkpoint.json").string() << "\n";
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string probe;
  std::string gallery;
  DataOptions data;
  int dh = 0;
  bool normalize = false;
  bool exclude_same_view = false;
  int repetitions = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "out";
};

void add_eval(CLI::App& app, EvalArgs& a) {
  app.add_option("--checkpoint", a.checkpoint)->required()->check(CLI::ExistingFile);
  app.add_option("--probe", a.probe)->required()->check(CLI::ExistingPath);
  app.add_option("--gallery", a.gallery)->required()->check(CLI::ExistingPath);
  a.data.add_to(app);
  app.add_option("--dh", a.dh, "Expected D_h, checked against the checkpoint; 0 skips the check")
      ->capture_default_str();
  app.add_flag("--normalize", a.normalize, "Match unit-normalised embeddings");
  app.add_flag("--exclude-same-view", a.exclude_same_view, "Ignore gallery entries sharing the probe's view");
  app.add_option("--repetitions", a.repetitions, "Resampled probe/gallery splits")->capture_default_str();
  app.add_option("--seed", a.seed, "Seed for resampled splits")->capture_default_str();
  app.add_option("--threads", a.threads)->capture_default_str();
  app.add_option("--out", a.out)->capture_default_str();
}

eval::Labels identities(const std::vector<skel::SkeletonSequence>& seqs, const std::string& what) {
  eval::Labels out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (!seqs[i].identity) throw std::runtime_error(what + " sequence " + std::to_string(i) + " has no identity label");
    out.push_back(*seqs[i].identity);
  }
  return out;
}

eval::Labels views(const std::vector<skel::SkeletonSequence>& seqs) {
  eval::Labels out;
  for (const auto& s : seqs) out.push_back(s.view.value_or(""));
  return out;
}

void cmd_eval(const CLI::App& sub, const EvalArgs& a, std::ostream& out) {
  if (a.repetitions < 1) throw UsageError("--repetitions must be >= 1");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  if (a.dh != 0 && a.dh != ck.model.config().hidden_dim) {
    throw std::runtime_error("embedding dimension mismatch: --dh " + std::to_string(a.dh) + " gives " +
                             std::to_string(ck.scheme.total_nodes() * a.dh) + ", checkpoint " + a.checkpoint +
                             " has D_h=" + std::to_string(ck.model.config().hidden_dim) + " (" +
                             std::to_string(ck.model.embedding_dim(ck.scheme)) + ")");
  }
  const auto probe = load_sequences(a.probe, a.data, ck.scheme);
  const auto gallery = load_sequences(a.gallery, a.data, ck.scheme);
  if (probe.empty() || gallery.empty()) throw std::runtime_error("probe and gallery sets must not be empty");

  eval::EvalInputs in;
  in.probe = rel::embed_all(probe, ck.model, ck.scheme, a.threads);
  in.gallery = rel::embed_all(gallery, ck.model, ck.scheme, a.threads);
  in.probe_labels = identities(probe, "probe");
  in.gallery_labels = identities(gallery, "gallery");
  in.probe_views = views(probe);
  in.gallery_views = views(gallery);
  eval::EvalOptions opts;
  opts.normalize = a.normalize;
  opts.exclude_same_view = a.exclude_same_view;
  const auto report = eval::evaluate_repeated(in, opts, a.repetitions, a.seed);

  const fs::path dir = prepare_out(a.out);
  write_text(dir / "report.csv", eval::report_to_csv(report));
  write_text(dir / "report.json", eval::report_to_json(report) + "\n");
  write_resolved_config(sub, dir);
  out << eval::format_report(report);
}

// --------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::string scheme = "builtin20";
  ModelOptions model;
  double tau = 0.08;
  std::string whitening = "standardize";
  int batch = 4;
  int clusters = 2;
  int frames = 6;
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
  double step = 1e-5;
  int samples = 32;
  std::string inject_bug;
  std::string out;
};

void add_gradcheck(CLI::App& app, GradcheckArgs& a) {
  app.add_option("--scheme", a.scheme)->capture_default_str();
  a.model.add_to(app);
  app.add_option("--tau", a.tau)->capture_default_str();
  app.add_option("--whitening", a.whitening)->capture_default_str();
  app.add_option("--batch", a.batch, "Random sequences in the batch")->capture_default_str();
  app.add_option("--clusters", a.clusters, "Random prototypes")->capture_default_str();
  app.add_option("--frames", a.frames)->capture_default_str();
  app.add_option("--seed", a.seed)->capture_default_str();
  app.add_option("--tolerance", a.tolerance)->capture_default_str();
  app.add_option("--step", a.step, "Central-difference step")->capture_default_str();
  app.add_option("--samples", a.samples, "Coordinates sampled per parameter")->capture_default_str();
  app.add_option("--inject-bug", a.inject_bug, "Corrupt the analytic gradient of this parameter (test fixture)");
  app.add_option("--out", a.out, "Optional directory for gradcheck.json");
}

// Uniformly random joint positions; no two frames coincide.
std::vector<skel::SkeletonSequence> random_batch(const skel::PartitionScheme& scheme, int n, int frames,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<skel::SkeletonSequence> out;
  for (int i = 0; i < n; ++i) {
    skel::SkeletonSequence s;
    for (int t = 0; t < frames; ++t) s.frames.push_back(num::Tensor2::NullaryExpr(scheme.joint_count, 3, [&] {
      return unit(rng);
    }));
    out.push_back(std::move(s));
  }
  return skel::center_sequences(out, scheme);
}

int cmd_gradcheck(const CLI::App& sub, const GradcheckArgs& a, std::ostream& out) {
  if (a.batch < 1 || a.clusters < 1 || a.frames < 1 || a.samples < 1) {
    throw UsageError("--batch, --clusters, --frames and --samples must be >= 1");
  }
  if (!(a.tau > 0.0)) throw UsageError("--tau must be > 0");
  spc::Whitening whitening{};
  check_usage([&] { whitening = spc::parse_whitening(a.whitening); });
  if (whitening != spc::Whitening::kNone && a.batch < 2) throw UsageError("--batch must be >= 2 with whitening");
  const auto scheme = skel::resolve_scheme(a.scheme);
  auto model = rel::ModelParams::initialize(a.model.config(), a.seed);
  if (!a.inject_bug.empty() && !model.tensors().find(a.inject_bug)) {
    throw UsageError("--inject-bug: unknown parameter '" + a.inject_bug + "'");
  }

  const auto seqs = random_batch(scheme, a.batch, a.frames, a.seed + 1);
  std::vector<const skel::SkeletonSequence*> batch;
  std::vector<int> targets;
  for (int i = 0; i < a.batch; ++i) {
    batch.push_back(&seqs[static_cast<std::size_t>(i)]);
    targets.push_back(i % a.clusters);
  }
  std::mt19937_64 rng(a.seed + 2);
  std::normal_distribution<double> gauss;
  num::Tensor2 prototypes = num::Tensor2::NullaryExpr(a.clusters, static_cast<Eigen::Index>(model.embedding_dim(scheme)),
                                                      [&] { return gauss(rng); });
  prototypes = num::normalize_rows(prototypes);
  const auto transform = spc::InstanceTransform::fit(rel::embed_all(seqs, model, scheme), whitening);

  num::Objective objective = spc::loss_objective(batch, targets, prototypes, a.tau, model, scheme, &transform);
  if (!a.inject_bug.empty()) {
    auto inner = objective.gradient;
    const std::string name = a.inject_bug;
    objective.gradient = [inner, name](num::ParamTape& tape) {
      inner(tape);
      auto& g = tape.at(name).grad;
      g = g * 1.5 + num::Tensor2::Constant(g.rows(), g.cols(), 1e-3);
    };
  }
  num::GradCheckOptions opts;
  opts.tolerance = a.tolerance;
  opts.step = a.step;
  opts.samples_per_param = static_cast<std::size_t>(a.samples);
  opts.seed = a.seed;
  const auto report = num::grad_check(objective, model.tensors(), opts);

  nlohmann::ordered_json doc = {{"pass", report.pass},
                                {"max_rel_error", report.max_rel_error},
                                {"worst_parameter", report.worst_parameter},
                                {"tolerance", a.tolerance},
                                {"parameters", nlohmann::ordered_json::array()}};
  for (const auto& e : report.entries) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s coords=%3zu  max_rel=%.3e  %s\n", e.name.c_str(), e.coordinates,
                  e.max_rel_error, e.pass ? "ok" : "FAIL");
    out << line;
    doc["parameters"].push_back({{"name", e.name},
                                 {"coordinates", e.coordinates},
                                 {"max_rel_error", e.max_rel_error},
                                 {"max_abs_error", e.max_abs_error},
                                 {"pass", e.pass}});
  }
  if (!a.out.empty()) {
    const fs::path dir = prepare_out(a.out);
    write_text(dir / "gradcheck.json", doc.dump(2) + "\n");
    write_resolved_config(sub, dir);
  }
  char summary[160];
  std::snprintf(summary, sizeof(summary), "max rel. error %.3e (%s)\n", report.max_rel_error,
                report.worst_parameter.c_str());
  if (report.pass) {
    out << "PASS " << summary;
    return kExitOk;
  }
  out << "FAIL " << summary << "failing parameters:";
  for (const auto& name : report.failing()) out << " " << name;
  out << "\n";
  return kExitRuntime;
}

// ----------------------------------------------------------------- exports

struct ExportArgs {
  std::string checkpoint;
  std::string input;
  DataOptions data;
  int threads = 1;
  std::string out = "out";
};

void add_export(CLI::App& app, ExportArgs& a) {
  app.add_option("--checkpoint", a.checkpoint)->required()->check(CLI::ExistingFile);
  app.add_option("--input", a.input, "Skeleton file or directory")->required()->check(CLI::ExistingPath);
  a.data.add_to(app);
  app.add_option("--threads", a.threads)->capture_default_str();
  app.add_option("--out", a.out)->capture_default_str();
}

void cmd_export_embeddings(const CLI::App& sub, const ExportArgs& a, std::ostream& out) {
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto seqs = load_sequences(a.input, a.data, ck.scheme);
  const fs::path dir = prepare_out(a.out);
  write_text(dir / "embeddings.csv", eval::embeddings_to_csv(seqs, rel::embed_all(seqs, ck.model, ck.scheme, a.threads)));
  write_resolved_config(sub, dir);
  out << "wrote " << seqs.size() << " embeddings to " << (dir / "embeddings.csv").string() << "\n";
}

void cmd_export_relations(const CLI::App& sub, const ExportArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto seqs = load_sequences(a.input, a.data, ck.scheme);
  const auto mats = eval::mean_relations(seqs, ck.model, ck.scheme);
  const fs::path dir = prepare_out(a.out);
  for (int k = 0; k < rel::kLevelPairs; ++k) {
    const auto [la, lb] = rel::level_pairs()[static_cast<std::size_t>(k)];
    write_text(dir / eval::relation_file_name(la, lb), eval::matrix_to_csv(mats[static_cast<std::size_t>(k)]));
  }
  write_resolved_config(sub, dir);
  out << "wrote " << rel::kLevelPairs << " relation matrices to " << dir.string() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised skeleton re-identification with multi-level graph relations and prototype contrast"};
  app.name("skelproto");
  app.set_config("--config", "", "Key-value config file; sections are named after subcommands");
  app.require_subcommand(1);
  app.fallthrough();

  GenerateArgs gen;
  TrainArgs tr;
  EvalArgs ev;
  GradcheckArgs gc;
  ExportArgs ee, er;
  auto* s_gen = app.add_subcommand("generate", "Write a synthetic gait dataset split into train/gallery/probe");
  auto* s_train = app.add_subcommand("train", "Alternate clustering and prototype-contrastive updates");
  auto* s_eval = app.add_subcommand("eval", "CMC, mAP, mACT and mRCL of a checkpoint on probe/gallery data");
  auto* s_gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients of the loss");
  auto* s_ee = app.add_subcommand("export-embeddings", "Write sequence embeddings as CSV");
  auto* s_er = app.add_subcommand("export-relations", "Write frame-averaged collaborative relation matrices");
  add_generate(*s_gen, gen);
  add_train(*s_train, tr);
  add_eval(*s_eval, ev);
  add_gradcheck(*s_gc, gc);
  add_export(*s_ee, ee);
  add_export(*s_er, er);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s_gen->parsed()) cmd_generate(*s_gen, gen, out);
    if (s_train->parsed()) cmd_train(*s_train, tr, out);
    if (s_eval->parsed()) cmd_eval(*s_eval, ev, out);
    if (s_gc->parsed()) return cmd_gradcheck(*s_gc, gc, out);
    if (s_ee->parsed()) cmd_export_embeddings(*s_ee, ee, out);
    if (s_er->parsed()) cmd_export_relations(*s_er, er, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace skelproto::cli
