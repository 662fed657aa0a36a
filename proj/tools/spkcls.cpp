/* Copyright 2026 The spkcls Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// spkcls: corpus building, training, evaluation and gate sweeps.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spkcls/corpus.hpp"
#include "spkcls/errors.hpp"
#include "spkcls/hybrid.hpp"
#include "spkcls/kernels.hpp"
#include "spkcls/metrics.hpp"
#include "spkcls/model.hpp"
#include "spkcls/params.hpp"
#include "spkcls/speaker_models.hpp"
#include "spkcls/synth.hpp"
#include "spkcls/trainer.hpp"
#include "spkcls/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace spkcls {
namespace {

constexpr int kPredictionsFormatVersion = 1;
constexpr int kManifestFormatVersion = 1;

// Bad flag values; reported like CLI11 parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv)
      : command_(std::move(command)), argv_(std::move(argv)), started_(utc_now()) {}

  json& config() { return config_; }
  void seed(std::uint64_t s) { seed_ = s; }
  void input(const fs::path& p) { inputs_.push_back(p.string()); }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }

  void write(const fs::path& path) const {
    json j;
    j["format"] = "spkcls-manifest";
    j["format_version"] = kManifestFormatVersion;
    j["command"] = command_;
    j["argv"] = argv_;
    j["config"] = config_;
    if (seed_) j["seed"] = *seed_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["format_versions"] = {{"samples", kSamplesFormatVersion},
                            {"vocab", kVocabFormatVersion},
                            {"stats", kStatsFormatVersion},
                            {"checkpoint", kCheckpointVersion},
                            {"predictions", kPredictionsFormatVersion}};
    j["isa"] = std::string(kernels::isa_name(kernels::active_isa()));
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string started_;
  json config_ = json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(std::string("bad ") + what + " value: " + item);
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

SplitRatios parse_ratios(const std::string& text) {
  auto v = parse_list(text, "--ratios");
  if (v.size() != 3) throw UsageError("--ratios needs three values");
  for (double x : v) {
    if (!(x > 0 && x < 1)) throw UsageError("--ratios values must be in (0, 1)");
  }
  if (std::abs(v[0] + v[1] + v[2] - 1.0) > 1e-9) throw UsageError("--ratios must sum to 1");
  return {v[0], v[1], v[2]};
}

std::vector<double> parse_grid_flag(const std::string& text) {
  try {
    return parse_g_grid(text);
  } catch (const ContractError& e) {
    throw UsageError(std::string("--g-grid: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Processed corpus directory.

struct CorpusDir {
  fs::path dir;
  Vocabulary vocab;

  static CorpusDir open(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
      throw std::runtime_error("corpus directory not found: " + dir.string());
    }
    auto in = open_in(dir / "vocab.json");
    return {dir, Vocabulary::read(in)};
  }

  std::vector<Sample> samples(const std::string& split) const {
    if (split != "train" && split != "validation" && split != "test") {
      throw UsageError("unknown split: " + split);
    }
    auto in = open_in(dir / (split + ".jsonl"));
    return read_samples(in);
  }

  std::vector<EncodedSample> encoded(const std::string& split) const {
    auto s = samples(split);
    return encode_all(s, vocab);
  }
};

// ---------------------------------------------------------------------------
// Prediction files: JSONL, header then one record per sample.

struct PredictionFile {
  std::vector<std::string> episode_ids;
  std::vector<PredictionRecord> records;
};

void write_predictions(std::ostream& out, std::span<const EncodedSample> samples,
                       std::span<const PredictionRecord> records) {
  const json header{{"format", "spkcls-predictions"},
                    {"format_version", kPredictionsFormatVersion}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    json j;
    j["episode_id"] = samples[i].episode_id;
    j["gold"] = records[i].gold;
    j["predicted"] = records[i].predicted;
    j["probs"] = records[i].probs;
    out << j.dump() << '\n';
  }
}

PredictionFile read_predictions(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty predictions file");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "spkcls-predictions" ||
      header.value("format_version", 0) != kPredictionsFormatVersion) {
    throw FormatError(path.string() + ": not a spkcls predictions file");
  }
  PredictionFile f;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw FormatError("invalid JSON");
      PredictionRecord r;
      r.gold = j.at("gold").get<std::size_t>();
      r.predicted = j.at("predicted").get<std::size_t>();
      r.probs = j.at("probs").get<std::vector<double>>();
      f.episode_ids.push_back(j.value("episode_id", ""));
      f.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string kind = "temporal";
  int episodes = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> p_repeat;
  std::optional<double> keyword_rate;
};

int cmd_synth(const SynthOptions& o, Manifest& m) {
  SynthConfig cfg = default_synth_config(parse_synth_kind(o.kind), o.episodes, o.seed);
  if (o.p_repeat) cfg.p_repeat = *o.p_repeat;
  if (o.keyword_rate) cfg.keyword_rate = *o.keyword_rate;
  SynthCorpus corpus = gen_synthetic(cfg);

  fs::path out_dir(o.out);
  ensure_dir(out_dir);
  std::map<std::string, std::vector<Utterance>> episodes;
  for (const auto& u : corpus.utterances) episodes[u.episode_id].push_back(u);
  for (const auto& [id, utts] : episodes) {
    fs::path p = out_dir / (id + ".txt");
    auto out = open_out(p);
    out << to_transcript(utts);
    m.output(p);
  }
  json kw = json::object();
  for (const auto& [persona, words] : corpus.keywords) kw[persona] = words;
  {
    auto out = open_out(out_dir / "keywords.json");
    out << kw.dump(2) << '\n';
  }
  m.output(out_dir / "keywords.json");
  m.config() = {{"kind", o.kind},
                {"episodes", cfg.episodes},
                {"speakers_per_episode", cfg.speakers_per_episode},
                {"persona_pool", cfg.persona_pool},
                {"keywords_per_persona", cfg.keywords_per_persona},
                {"shared_vocab", cfg.shared_vocab},
                {"turns_per_episode", cfg.turns_per_episode},
                {"p_repeat", cfg.p_repeat},
                {"keyword_rate", cfg.keyword_rate},
                {"min_tokens", cfg.min_tokens},
                {"max_tokens", cfg.max_tokens}};
  m.seed(o.seed);
  m.write(out_dir / "manifest.json");
  std::cerr << "wrote " << episodes.size() << " episodes to " << out_dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// build-corpus

struct BuildOptions {
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  std::string ratios = "0.8,0.1,0.1";
  std::size_t min_count = 1;
};

int cmd_build_corpus(const BuildOptions& o, Manifest& m) {
  const SplitRatios ratios = parse_ratios(o.ratios);
  fs::path in_dir(o.data);
  if (!fs::is_directory(in_dir)) throw std::runtime_error("input directory not found: " + o.data);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no transcript (*.txt) files in " + o.data);

  CorpusStats stats;
  std::vector<Sample> samples;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read transcript " + f.string());
    std::stringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw std::runtime_error("cannot read transcript " + f.string());
    ParseResult parsed = parse_transcript(ss.str(), f.stem().string());
    stats.skipped_lines += parsed.skipped_lines;
    ++stats.episodes;
    auto emitted = build_samples(parsed.utterances, SampleRules{}, &stats.build);
    for (auto& s : emitted) samples.push_back(std::move(s));
    m.input(f);
  }
  if (samples.empty()) {
    throw std::runtime_error(
        "no samples emitted: blocks=" + std::to_string(stats.build.blocks) +
        " gold_not_candidate=" + std::to_string(stats.build.gold_not_candidate) +
        " short_history=" + std::to_string(stats.build.short_history));
  }

  CorpusSplit split = split_by_episode(std::move(samples), ratios, o.seed);
  stats.train = split.train.size();
  stats.validation = split.validation.size();
  stats.test = split.test.size();
  if (split.train.empty()) throw std::runtime_error("training partition is empty");

  fs::path out_dir(o.out);
  ensure_dir(out_dir);
  auto write_part = [&](const std::string& name, const std::vector<Sample>& part) {
    auto out = open_out(out_dir / (name + ".jsonl"));
    write_samples(out, part);
    m.output(out_dir / (name + ".jsonl"));
  };
  write_part("train", split.train);
  write_part("validation", split.validation);
  write_part("test", split.test);

  Vocabulary vocab = Vocabulary::build(split.train, o.min_count);
  {
    auto out = open_out(out_dir / "vocab.json");
    vocab.write(out);
  }
  {
    auto out = open_out(out_dir / "stats.json");
    write_stats_json(out, stats);
  }
  {
    auto out = open_out(out_dir / "stats.txt");
    write_stats_table(out, stats);
  }
  for (const char* f : {"vocab.json", "stats.json", "stats.txt"}) m.output(out_dir / f);
  write_stats_table(std::cout, stats);

  const SampleRules rules;
  m.config() = {{"ratios", {ratios.train, ratios.validation, ratios.test}},
                {"min_count", o.min_count},
                {"k_max", rules.k_max},
                {"min_hist", rules.min_hist},
                {"max_hist", rules.max_hist},
                {"n_max", rules.n_max},
                {"max_tokens", rules.max_tokens},
                {"vocab_size", vocab.size()}};
  m.seed(o.seed);
  m.write(out_dir / "manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  std::string out;
  std::string model = "content";
  std::size_t dim = 100;
  std::size_t batch = 10;
  std::string dropout = "0,0.2,0.5";
  std::size_t patience = 3;
  std::size_t max_epochs = 30;
  std::uint64_t seed = 0;
  std::string metric = "macro-f1";
  std::string g_grid = "0:0.05:1";
  std::string attention = "off";
  std::string precision = "f64";
  double lr = 1e-3;
  bool tie_encoders = false;
  bool temporal_bias_only = false;
  bool check_finite = false;
  std::vector<std::string> warm_start;
};

void save(const fs::path& path, const Checkpoint& ckpt, Manifest& m) {
  save_checkpoint(path, ckpt);
  m.output(path);
}

template <typename Real>
int train_impl(const TrainOptions& o, Manifest& m) {
  const CorpusDir corpus = CorpusDir::open(o.data);
  m.input(corpus.dir / "train.jsonl");
  m.input(corpus.dir / "validation.jsonl");
  m.input(corpus.dir / "vocab.json");
  const auto train_set = corpus.encoded("train");
  const auto validation = corpus.encoded("validation");
  if (train_set.empty() || validation.empty()) {
    throw std::runtime_error("training and validation partitions must be non-empty");
  }

  ModelConfig mc;
  mc.kind = parse_model_kind(o.model);
  mc.dim = o.dim;
  mc.vocab_size = corpus.vocab.size();
  mc.tie_encoders = o.tie_encoders;
  mc.temporal_bias_only = o.temporal_bias_only;
  mc.static_attention = o.attention == "static";

  TrainConfig tc;
  tc.batch_size = o.batch;
  tc.patience = o.patience;
  tc.max_epochs = o.max_epochs;
  tc.seed = o.seed;
  tc.selection = parse_metric(o.metric);
  tc.adam.alpha = o.lr;
  tc.check_finite = o.check_finite;
  tc.g_grid = parse_grid_flag(o.g_grid);
  const std::vector<double> rates = parse_list(o.dropout, "--dropout");
  for (double r : rates) {
    if (!(r >= 0 && r < 1)) throw UsageError("--dropout values must be in [0, 1)");
  }

  std::vector<SpeakerModel<Real>> warm_models;
  for (const auto& p : o.warm_start) {
    Checkpoint ck = load_checkpoint(p);
    if ((ck.precision == "f64") != (sizeof(Real) == 8)) {
      throw std::runtime_error("warm-start checkpoint precision differs: " + p);
    }
    warm_models.push_back(SpeakerModel<Real>::from_checkpoint(ck));
    m.input(p);
  }
  WarmStart<Real> warm;
  for (const auto& w : warm_models) warm.push_back(&w.params());

  fs::path out_dir(o.out);
  ensure_dir(out_dir);
  std::ostringstream log;
  write_training_log_header(log);
  tc.on_epoch = [&](const std::string& run, const EpochLog& row) {
    write_training_log_row(log, run, row);
    std::fprintf(stderr, "[%s] epoch %zu loss %.6f val %s %.4f\n", run.c_str(), row.epoch,
                 row.train_loss, o.metric.c_str(), row.validation.get(tc.selection));
  };

  std::vector<double> tried;
  std::optional<FitResult<Real>> best;
  std::optional<double> best_rate;
  for (double rate : rates) {
    mc.dropout = rate;
    std::fprintf(stderr, "training %s, dropout %g\n", o.model.c_str(), rate);
    FitResult<Real> r = fit<Real>(mc, train_set, validation, tc, warm);
    if (!best || r.validation_score > best->validation_score) {
      best = std::move(r);
      best_rate = rate;
    }
  }
  FitResult<Real>& fit_result = *best;

  std::map<std::string, std::string> meta{{"seed", std::to_string(o.seed)},
                                          {"selection", o.metric}};
  save(out_dir / "model.ckpt", fit_result.model.to_checkpoint(meta), m);

  if (mc.kind == ModelKind::kHybridAfter) {
    // Sub-models, for later sweeps.
    ModelConfig sub = fit_result.model.config();
    for (ModelKind k : {ModelKind::kTemporal, ModelKind::kContent}) {
      sub.kind = k;
      SpeakerModel<Real> part(sub, 0);
      part.load_matching(fit_result.model.params());
      save(out_dir / (std::string(model_kind_name(k)) + ".ckpt"), part.to_checkpoint(meta), m);
    }
    auto out = open_out(out_dir / "sweep.tsv");
    write_sweep_table(out, *fit_result.sweep);
    m.output(out_dir / "sweep.tsv");
  } else {
    // Best snapshot per validation metric.
    const auto& tr = fit_result.runs.front().second;
    for (Metric metric : kAllMetrics) {
      SpeakerModel<Real> snap = fit_result.model;
      snap.params().copy_values_from(tr.best_params.at(metric));
      auto mm = meta;
      mm["selection"] = std::string(metric_name(metric));
      mm["best_epoch"] = std::to_string(tr.best_epoch.at(metric));
      save(out_dir / ("best-" + std::string(metric_name(metric)) + ".ckpt"),
           snap.to_checkpoint(mm), m);
    }
  }
  {
    auto out = open_out(out_dir / "training_log.tsv");
    out << log.str();
    m.output(out_dir / "training_log.tsv");
  }

  const MetricsReport report = evaluate(predict_all(fit_result.model, validation));
  std::vector<NamedReport> rows{{o.model + " (validation)", report}};
  {
    auto out = open_out(out_dir / "metrics.txt");
    write_report_records(out, rows);
    m.output(out_dir / "metrics.txt");
  }
  write_report_table(std::cout, rows);

  m.config() = {{"model", o.model},
                {"dim", o.dim},
                {"batch", o.batch},
                {"dropout_grid", rates},
                {"dropout", *best_rate},
                {"patience", o.patience},
                {"max_epochs", o.max_epochs},
                {"metric", o.metric},
                {"g_grid", tc.g_grid},
                {"attention", o.attention},
                {"precision", o.precision},
                {"lr", o.lr},
                {"tie_encoders", o.tie_encoders},
                {"temporal_bias_only", o.temporal_bias_only},
                {"check_finite", o.check_finite},
                {"gate_g", fit_result.model.config().gate_g},
                {"warm_start", o.warm_start}};
  m.seed(o.seed);
  m.write(out_dir / "manifest.json");
  return 0;
}

int cmd_train(const TrainOptions& o, Manifest& m) {
  return o.precision == "f32" ? train_impl<float>(o, m) : train_impl<double>(o, m);
}

// ---------------------------------------------------------------------------
// Checkpoint-driven commands share this loader.

template <typename Real>
std::vector<PredictionRecord> predict_with(const Checkpoint& ck,
                                           std::span<const EncodedSample> samples,
                                           std::size_t vocab_size) {
  auto model = SpeakerModel<Real>::from_checkpoint(ck);
  if (model.config().vocab_size != vocab_size) {
    throw std::runtime_error("checkpoint vocabulary size " +
                             std::to_string(model.config().vocab_size) +
                             " does not match the corpus vocabulary " + std::to_string(vocab_size));
  }
  return predict_all(model, samples);
}

std::vector<PredictionRecord> predict_checkpoint(const fs::path& path,
                                                 std::span<const EncodedSample> samples,
                                                 std::size_t vocab_size) {
  if (!fs::exists(path)) throw std::runtime_error("checkpoint not found: " + path.string());
  Checkpoint ck = load_checkpoint(path);
  return ck.precision == "f32" ? predict_with<float>(ck, samples, vocab_size)
                               : predict_with<double>(ck, samples, vocab_size);
}

std::vector<SlotLabel> slot_labels(std::span<const Sample> samples) {
  std::vector<SlotLabel> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.k(), s.gold});
  return out;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string data;
  std::string split = "test";
  std::vector<std::string> checkpoints;
  std::vector<std::string> predictions;
  std::uint64_t seed = 0;
  std::string out;
  bool baselines = true;
};

int cmd_eval(const EvalOptions& o, Manifest& m) {
  if (o.checkpoints.empty() && o.predictions.empty() && o.data.empty()) {
    throw UsageError("eval needs --data, --checkpoint or --predictions");
  }
  if (!o.checkpoints.empty() && o.data.empty()) throw UsageError("--checkpoint needs --data");

  std::vector<NamedReport> rows;
  if (!o.data.empty()) {
    const CorpusDir corpus = CorpusDir::open(o.data);
    const auto eval_samples = corpus.samples(o.split);
    if (eval_samples.empty()) throw std::runtime_error("evaluation partition is empty");
    m.input(corpus.dir / (o.split + ".jsonl"));
    if (o.baselines) {
      const auto train_samples = corpus.samples("train");
      const auto train_labels = slot_labels(train_samples);
      const auto eval_labels = slot_labels(eval_samples);
      auto add = [&](const char* name, BaselineKind kind) {
        rows.push_back({name, baseline(kind, train_labels, eval_labels, o.seed)});
      };
      add("Random guess", BaselineKind::kRandom);
      add("Majority guess", BaselineKind::kMajority);
      add("Hybrid guess", BaselineKind::kHybridGuess);
    }
    const auto encoded = encode_all(eval_samples, corpus.vocab);
    for (const auto& c : o.checkpoints) {
      rows.push_back({fs::path(c).stem().string(),
                      evaluate(predict_checkpoint(c, encoded, corpus.vocab.size()))});
      m.input(c);
    }
  }
  for (const auto& p : o.predictions) {
    PredictionFile f = read_predictions(p);
    if (f.records.empty()) throw std::runtime_error("no records in " + p);
    rows.push_back({fs::path(p).stem().string(), evaluate(f.records)});
    m.input(p);
  }

  write_report_table(std::cout, rows);
  if (!o.out.empty()) {
    fs::path out_dir(o.out);
    ensure_dir(out_dir);
    {
      auto out = open_out(out_dir / "report.txt");
      write_report_table(out, rows);
    }
    {
      auto out = open_out(out_dir / "report.records");
      write_report_records(out, rows);
    }
    m.output(out_dir / "report.txt");
    m.output(out_dir / "report.records");
    m.config() = {{"split", o.split}, {"baselines", o.baselines}};
    m.seed(o.seed);
    m.write(out_dir / "manifest.json");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep-gate

struct SweepOptions {
  std::string data;
  std::string split = "validation";
  std::string temporal;
  std::string content;
  std::string g_grid = "0:0.05:1";
  std::string out;
};

bool is_prediction_file(const std::string& path) {
  return fs::path(path).extension() == ".jsonl";
}

int cmd_sweep_gate(const SweepOptions& o, Manifest& m) {
  const std::vector<double> grid = parse_grid_flag(o.g_grid);
  auto load = [&](const std::string& path) -> std::vector<PredictionRecord> {
    m.input(path);
    if (is_prediction_file(path)) return read_predictions(path).records;
    if (o.data.empty()) throw UsageError("checkpoint inputs need --data");
    const CorpusDir corpus = CorpusDir::open(o.data);
    return predict_checkpoint(path, corpus.encoded(o.split), corpus.vocab.size());
  };
  const auto pt = load(o.temporal);
  const auto pc = load(o.content);
  if (pt.size() != pc.size() || pt.empty()) {
    throw std::runtime_error("temporal and content predictions must be non-empty and aligned");
  }
  std::vector<SweepInput> inputs;
  inputs.reserve(pt.size());
  for (std::size_t i = 0; i < pt.size(); ++i) {
    if (pt[i].gold != pc[i].gold || pt[i].probs.size() != pc[i].probs.size()) {
      throw std::runtime_error("prediction record " + std::to_string(i) + " does not align");
    }
    inputs.push_back({pt[i].gold, pt[i].probs, pc[i].probs});
  }
  GateSweep sweep = sweep_gate(inputs, grid);
  write_sweep_table(std::cout, sweep);
  if (!o.out.empty()) {
    fs::path out_dir(o.out);
    ensure_dir(out_dir);
    auto out = open_out(out_dir / "sweep.tsv");
    write_sweep_table(out, sweep);
    m.output(out_dir / "sweep.tsv");
    m.config() = {{"split", o.split}, {"g_grid", grid}};
    m.write(out_dir / "manifest.json");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
  std::string data;
  std::string split = "test";
  std::string checkpoint;
  std::string out;
};

int cmd_predict(const PredictOptions& o, Manifest& m) {
  const CorpusDir corpus = CorpusDir::open(o.data);
  const auto samples = corpus.encoded(o.split);
  const auto records = predict_checkpoint(o.checkpoint, samples, corpus.vocab.size());
  m.input(corpus.dir / (o.split + ".jsonl"));
  m.input(o.checkpoint);
  fs::path out_path(o.out);
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  {
    auto out = open_out(out_path);
    write_predictions(out, samples, records);
  }
  m.output(out_path);
  m.config() = {{"split", o.split}};
  m.write(fs::path(out_path.string() + ".manifest.json"));
  return 0;
}

}  // namespace
}  // namespace spkcls

int main(int argc, char** argv) {
  using namespace spkcls;
  CLI::App app{"Speaker classification from recency and content"};
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "Kernel set: scalar or avx2 (default: best available)")
      ->check(CLI::IsMember({"scalar", "avx2"}));

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic transcript corpus");
  synth->add_option("--kind", so.kind)->check(CLI::IsMember({"temporal", "content", "mixed"}));
  synth->add_option("--episodes", so.episodes)->check(CLI::PositiveNumber);
  synth->add_option("--seed", so.seed);
  synth->add_option("--out", so.out)->required();
  synth->add_option("--p-repeat", so.p_repeat)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--keyword-rate", so.keyword_rate)->check(CLI::Range(0.0, 1.0));

  BuildOptions bo;
  auto* build = app.add_subcommand("build-corpus", "Parse transcripts into sample partitions");
  build->add_option("--data", bo.data, "Directory of per-episode *.txt transcripts")->required();
  build->add_option("--out", bo.out)->required();
  build->add_option("--seed", bo.seed);
  build->add_option("--ratios", bo.ratios, "train,validation,test");
  build->add_option("--min-count", bo.min_count)->check(CLI::PositiveNumber);

  TrainOptions to;
  auto* train_cmd = app.add_subcommand("train", "Train a speaker model");
  train_cmd->add_option("--data", to.data)->required();
  train_cmd->add_option("--out", to.out)->required();
  train_cmd->add_option("--model", to.model)
      ->check(CLI::IsMember({"temporal", "content", "hybrid-after", "hybrid-while",
                             "hybrid-adaptive"}));
  train_cmd->add_option("--dim", to.dim)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", to.batch)->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", to.dropout, "One rate or a comma-separated grid");
  train_cmd->add_option("--patience", to.patience)->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-epochs", to.max_epochs);
  train_cmd->add_option("--seed", to.seed);
  train_cmd->add_option("--metric", to.metric)
      ->check(CLI::IsMember({"macro-f1", "weighted-f1", "micro-f1", "acc", "mrr"}));
  train_cmd->add_option("--g-grid", to.g_grid, "lo:step:hi or a comma list");
  train_cmd->add_option("--attention", to.attention)->check(CLI::IsMember({"off", "static"}));
  train_cmd->add_option("--precision", to.precision)->check(CLI::IsMember({"f32", "f64"}));
  train_cmd->add_option("--lr", to.lr)->check(CLI::PositiveNumber);
  train_cmd->add_flag("--tie-encoders", to.tie_encoders);
  train_cmd->add_flag("--temporal-bias-only", to.temporal_bias_only);
  train_cmd->add_flag("--check-finite", to.check_finite);
  train_cmd->add_option("--warm-start", to.warm_start,
                        "Checkpoint(s) to copy matching parameters from");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Report metrics and baselines");
  eval->add_option("--data", eo.data);
  eval->add_option("--split", eo.split)->check(CLI::IsMember({"train", "validation", "test"}));
  eval->add_option("--checkpoint", eo.checkpoints);
  eval->add_option("--predictions", eo.predictions);
  eval->add_option("--seed", eo.seed);
  eval->add_option("--out", eo.out);
  eval->add_flag("!--no-baselines", eo.baselines);

  SweepOptions wo;
  auto* sweep = app.add_subcommand("sweep-gate", "Validate the interpolation weight g");
  sweep->add_option("--data", wo.data);
  sweep->add_option("--split", wo.split)->check(CLI::IsMember({"train", "validation", "test"}));
  sweep->add_option("--temporal", wo.temporal, "Checkpoint or predictions (.jsonl)")->required();
  sweep->add_option("--content", wo.content, "Checkpoint or predictions (.jsonl)")->required();
  sweep->add_option("--g-grid", wo.g_grid);
  sweep->add_option("--out", wo.out);

  PredictOptions po;
  auto* pred = app.add_subcommand("predict", "Write per-sample prediction records");
  pred->add_option("--data", po.data)->required();
  pred->add_option("--split", po.split)->check(CLI::IsMember({"train", "validation", "test"}));
  pred->add_option("--checkpoint", po.checkpoint)->required();
  pred->add_option("--out", po.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::vector<std::string> args(argv, argv + argc);
  try {
    if (!isa.empty()) {
      kernels::set_active_isa(isa == "avx2" ? kernels::Isa::kAvx2 : kernels::Isa::kScalar);
    }
    if (synth->parsed()) {
      Manifest m("synth", args);
      return cmd_synth(so, m);
    }
    if (build->parsed()) {
      Manifest m("build-corpus", args);
      return cmd_build_corpus(bo, m);
    }
    if (train_cmd->parsed()) {
      Manifest m("train", args);
      return cmd_train(to, m);
    }
    if (eval->parsed()) {
      Manifest m("eval", args);
      return cmd_eval(eo, m);
    }
    if (sweep->parsed()) {
      Manifest m("sweep-gate", args);
      return cmd_sweep_gate(wo, m);
    }
    if (pred->parsed()) {
      Manifest m("predict", args);
      return cmd_predict(po, m);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
