// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "tcts/error.hpp"
#include "tcts/losses.hpp"
#include "tcts/random.hpp"
#include "tcts/rl.hpp"

namespace tcts::harness {

using data::Split;
using model::ModelParams;

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;
constexpr std::uint64_t kTrainStream = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kRefStream = 0xbf58476d1ce4e5b9ull;
constexpr double kMeanPreservationTolerance = 1e-9;

struct Fnv {
  std::uint64_t h = kFnvOffset;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= kFnvPrime;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    bytes(s.data(), s.size());
    u64(s.size());
  }
  void metrics(const metrics::MetricReport& m) {
    for (double b : m.bleu) f64(b);
    f64(m.rouge_l);
    f64(m.cider);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double learning_rate_at(const ExperimentConfig& config, std::size_t epoch_index) {
  const auto steps = epoch_index / config.effective_decay_every();
  return config.effective_learning_rate() * std::pow(config.lr_decay, static_cast<double>(steps));
}

void apply_update(ModelParams& params, ad::Gradients& grads, double lr, double clip) {
  const double norm = grads.global_norm();
  if (!std::isfinite(norm)) fail(ErrorCode::kNonFinite, "gradient norm is not finite");
  if (clip > 0.0 && norm > clip) grads.scale(clip / norm);
  auto& tensors = params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto dst = tensors[i].data();
    auto g = grads.per_param[i].data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= lr * g[k];
  }
}

std::vector<std::size_t> shuffled(std::span<const std::size_t> items, Rng& rng) {
  std::vector<std::size_t> order(items.begin(), items.end());
  rng.shuffle(order);
  return order;
}

bool is_rl(Mode m) { return m == Mode::kScst || m == Mode::kTctsRl; }

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kTeacher: return "teacher";
    case Mode::kXe: return "xe";
    case Mode::kTctsXe: return "tcts-xe";
    case Mode::kScst: return "scst";
    case Mode::kTctsRl: return "tcts-rl";
  }
  return "xe";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kTeacher, Mode::kXe, Mode::kTctsXe, Mode::kScst, Mode::kTctsRl})
    if (to_string(m) == name) return m;
  fail(ErrorCode::kConfig, "unknown mode '" + std::string(name) + "'");
}

double ExperimentConfig::effective_learning_rate() const {
  if (learning_rate) return *learning_rate;
  return is_rl(mode) ? kDefaultRlLearningRate : kDefaultXeLearningRate;
}

std::size_t ExperimentConfig::effective_decay_every() const {
  if (lr_decay_every > 0) return lr_decay_every;
  return std::max<std::size_t>(1, epochs / 3);
}

void ExperimentConfig::validate(bool require_paths) const {
  if (lambda1 < 0.0 || lambda2 < 0.0) fail(ErrorCode::kConfig, "lambda1 and lambda2 must be >= 0");
  if (batch_size == 0) fail(ErrorCode::kConfig, "batch_size must be >= 1");
  if (hidden_size == 0) fail(ErrorCode::kConfig, "hidden_size must be >= 1");
  if (max_len == 0) fail(ErrorCode::kConfig, "max_len must be >= 1");
  if (effective_learning_rate() <= 0.0) fail(ErrorCode::kConfig, "learning_rate must be > 0");
  if (lr_decay <= 0.0 || lr_decay > 1.0) fail(ErrorCode::kConfig, "lr_decay must be in (0, 1]");
  if (temperature <= 0.0) fail(ErrorCode::kConfig, "temperature must be > 0");
  if (min_count < 1) fail(ErrorCode::kConfig, "min_count must be >= 1");
  if (num_records == 0) fail(ErrorCode::kConfig, "num_records must be >= 1");
  if (!require_paths) return;
  const bool needs_teacher = mode == Mode::kTctsXe || mode == Mode::kTctsRl;
  if (needs_teacher && teacher_ckpt.empty())
    fail(ErrorCode::kConfig, std::string(to_string(mode)) + " requires teacher_ckpt");
  if (is_rl(mode) && init_ckpt.empty())
    fail(ErrorCode::kConfig, std::string(to_string(mode)) + " requires an XE-stage init_ckpt");
}

ExperimentConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kConfig, "config must be a JSON object");

  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "mode") c.mode = parse_mode(v.get<std::string>());
      else if (key == "lambda1") c.lambda1 = v.get<double>();
      else if (key == "lambda2") c.lambda2 = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "lr_decay") c.lr_decay = v.get<double>();
      else if (key == "lr_decay_every") c.lr_decay_every = v.get<std::size_t>();
      else if (key == "grad_clip") c.grad_clip = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "hidden_size") c.hidden_size = v.get<std::size_t>();
      else if (key == "max_len") c.max_len = v.get<std::size_t>();
      else if (key == "temperature") c.temperature = v.get<double>();
      else if (key == "teacher_rl_epochs") c.teacher_rl_epochs = v.get<std::size_t>();
      else if (key == "cache_teacher_captions") c.cache_teacher_captions = v.get<bool>();
      else if (key == "num_records") c.num_records = v.get<std::size_t>();
      else if (key == "min_count") c.min_count = v.get<int>();
      else if (key == "attr_vocab_size") c.attr_vocab_size = v.get<std::size_t>();
      else if (key == "data") c.data = v.get<std::string>();
      else if (key == "teacher_ckpt") c.teacher_ckpt = v.get<std::string>();
      else if (key == "init_ckpt") c.init_ckpt = v.get<std::string>();
      else if (key == "out_ckpt") c.out_ckpt = v.get<std::string>();
      else if (key == "report") c.report = v.get<std::string>();
      else fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, std::string("bad config value: ") + e.what());
  }
  c.validate(false);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(c.mode));
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.effective_learning_rate();
  j["lr_decay"] = c.lr_decay;
  j["lr_decay_every"] = c.effective_decay_every();
  j["grad_clip"] = c.grad_clip;
  j["seed"] = c.seed;
  j["hidden_size"] = c.hidden_size;
  j["max_len"] = c.max_len;
  j["temperature"] = c.temperature;
  j["teacher_rl_epochs"] = c.teacher_rl_epochs;
  j["cache_teacher_captions"] = c.cache_teacher_captions;
  j["num_records"] = c.num_records;
  j["min_count"] = c.min_count;
  j["attr_vocab_size"] = c.attr_vocab_size;
  j["data"] = c.data;
  j["teacher_ckpt"] = c.teacher_ckpt;
  j["init_ckpt"] = c.init_ckpt;
  j["out_ckpt"] = c.out_ckpt;
  j["report"] = c.report;
  return j.dump(2);
}

std::uint64_t ExperimentConfig::hash() const {
  Fnv f;
  f.str(dump_config(*this));
  return f.h;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<data::DatasetRecord> records, int min_count,
               std::size_t attr_vocab_size, std::size_t max_len)
    : records_(std::move(records)),
      max_len_(max_len),
      min_count_(min_count),
      attr_vocab_size_(attr_vocab_size) {
  lexicon_ = data::build_lexicon(records_, min_count, attr_vocab_size);
  std::vector<metrics::RefSet> per_split[3];
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.refs.empty())
      fail(ErrorCode::kDataContract, "record " + std::to_string(r.id) + " has no references");
    inputs_.push_back(model::make_input(r, lexicon_));
    refs_.push_back(data::encode_refs(r, lexicon_.words, max_len));
    const auto s = static_cast<std::size_t>(r.split);
    splits_[s].push_back(i);
    per_split[s].push_back(refs_.back());
  }
  for (std::size_t s = 0; s < 3; ++s)
    if (!per_split[s].empty()) idf_[s] = metrics::IdfTable::build(per_split[s]);
}

std::span<const std::size_t> Corpus::split(Split s) const {
  return splits_[static_cast<std::size_t>(s)];
}

const metrics::IdfTable& Corpus::idf(Split s) const {
  const auto& t = idf_[static_cast<std::size_t>(s)];
  if (!t) fail(ErrorCode::kDataContract, "split '" + std::string(data::to_string(s)) + "' is empty");
  return *t;
}

model::ModelConfig Corpus::model_config(std::size_t hidden, bool uses_attributes) const {
  return {.hidden = hidden,
          .vocab_size = lexicon_.words.size(),
          .num_objects = lexicon_.objects.size(),
          .num_attributes = lexicon_.attributes.size(),
          .max_len = max_len_,
          .uses_attributes = uses_attributes};
}

// ---------------------------------------------------------------------------
// Reports

std::uint64_t TrainReport::hash() const {
  Fnv f;
  f.str(mode);
  for (const auto& row : rows) {
    f.u64(row.epoch);
    f.f64(row.learning_rate);
    f.f64(row.train_loss);
    f.f64(row.mean_reward);
    f.metrics(row.val);
  }
  f.metrics(test);
  for (double l : step_losses) f.f64(l);
  f.u64(batch_size);
  f.u64(config_hash);
  f.u64(reward_checks);
  f.f64(max_mean_deviation);
  return f.h;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalResult evaluate(const ModelParams& params, const Corpus& corpus, Split split) {
  EvalResult out;
  const auto& idf = corpus.idf(split);
  std::vector<metrics::MetricReport> scores;
  for (std::size_t i : corpus.split(split)) {
    const auto caption = model::greedy_decode(params, corpus.input(i), corpus.max_len());
    EvalRecord rec;
    rec.id = corpus.records()[i].id;
    rec.caption = text::join(text::decode(caption, corpus.lexicon().words));
    rec.scores = metrics::score(caption, corpus.refs(i), idf);
    scores.push_back(rec.scores);
    out.records.push_back(std::move(rec));
  }
  out.aggregate = metrics::mean(scores);
  return out;
}

EvalResult evaluate(const ckpt::Checkpoint& checkpoint, const Corpus& corpus, Split split) {
  if (checkpoint.lexicon_hash != corpus.lexicon().hash())
    fail(ErrorCode::kIncompatibleCheckpoint, "checkpoint vocabulary does not match the data");
  if (checkpoint.params.config().vocab_size != corpus.lexicon().words.size())
    fail(ErrorCode::kIncompatibleCheckpoint, "checkpoint vocabulary size differs");
  return evaluate(checkpoint.params, corpus, split);
}

// ---------------------------------------------------------------------------
// Cross-entropy stages

namespace {

metrics::MetricReport val_scores(const ModelParams& params, const Corpus& corpus) {
  if (corpus.split(Split::kVal).empty()) return {};
  return evaluate(params, corpus, Split::kVal).aggregate;
}

metrics::MetricReport test_scores(const ModelParams& params, const Corpus& corpus) {
  if (corpus.split(Split::kTest).empty()) return {};
  return evaluate(params, corpus, Split::kTest).aggregate;
}

void xe_loop(const ExperimentConfig& config, const Corpus& corpus, ModelParams& params,
             const ModelParams* teacher, bool use_kl, TrainReport& report) {
  Rng rng(config.seed ^ kTrainStream);
  const auto train = corpus.split(Split::kTrain);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate_at(config, epoch);
    const auto order = shuffled(train, rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      ad::Tape tape;
      std::optional<ad::NodeId> total;
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto& refs = corpus.refs(i);
        const auto& gt = refs[rng.index(refs.size())];
        const auto ctx = model::build_context(tape, params, corpus.input(i));
        const auto dists = model::teacher_forced(tape, params, ctx, gt);
        ad::NodeId item = loss::xe_loss(tape, dists, gt);
        if (use_kl) {
          const auto soft =
              loss::soft_targets_from_teacher(*teacher, corpus.input(i), gt, config.temperature);
          item = loss::combined_xe_tcts(tape, item, loss::kl_loss(tape, dists, soft),
                                        config.lambda1);
        }
        total = total ? tape.add(*total, item) : item;
      }
      const ad::NodeId batch_loss = tape.scale(*total, 1.0 / static_cast<double>(stop - start));
      auto grads = ad::backward(tape, batch_loss, params.tensors());
      const double value = tape.value(batch_loss)[0];
      apply_update(params, grads, lr, config.grad_clip);
      report.step_losses.push_back(value);
      loss_sum += value;
      ++batches;
    }
    EpochRow row;
    row.epoch = epoch + 1;
    row.learning_rate = lr;
    row.train_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    row.val = val_scores(params, corpus);
    report.rows.push_back(row);
  }
}

void rl_loop(const ExperimentConfig& config, std::size_t epochs, const Corpus& corpus,
             ModelParams& params, const ModelParams* critic, RewardTarget target,
             std::size_t epoch_offset, TrainReport& report) {
  Rng rng(config.seed ^ kTrainStream);
  Rng ref_rng(config.seed ^ kRefStream);
  const auto train = corpus.split(Split::kTrain);
  const auto& idf = corpus.idf(Split::kTrain);
  const bool needs_teacher_caption = critic != nullptr || target == RewardTarget::kTeacherCaption;
  if (needs_teacher_caption && critic == nullptr)
    fail(ErrorCode::kConfig, "teacher-caption rewards need a teacher");

  std::vector<std::optional<metrics::CiderScorer>> scorers(corpus.records().size());
  std::vector<std::optional<text::Caption>> teacher_cache(corpus.records().size());

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const double lr = learning_rate_at(config, epoch);
    const auto order = shuffled(train, rng);
    double loss_sum = 0.0, reward_sum = 0.0;
    std::size_t batches = 0, items = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      ad::Tape tape;
      std::optional<ad::NodeId> total;
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto& input = corpus.input(i);
        auto sample = model::sample_decode(tape, params, input, corpus.max_len(), rng);
        const auto greedy = model::greedy_decode(params, input, corpus.max_len());

        std::optional<text::Caption> teacher_caption;
        if (needs_teacher_caption) {
          if (config.cache_teacher_captions && teacher_cache[i]) {
            teacher_caption = teacher_cache[i];
          } else {
            teacher_caption = model::greedy_decode(*critic, input, corpus.max_len());
            if (config.cache_teacher_captions) teacher_cache[i] = teacher_caption;
          }
        }

        double c_sample = 0.0, c_greedy = 0.0;
        switch (target) {
          case RewardTarget::kReferences: {
            if (!scorers[i]) scorers[i].emplace(corpus.refs(i), idf);
            c_sample = scorers[i]->score(sample.caption);
            c_greedy = scorers[i]->score(greedy);
            break;
          }
          case RewardTarget::kTeacherCaption: {
            const metrics::CiderScorer scorer(std::span(&*teacher_caption, 1), idf);
            c_sample = scorer.score(sample.caption);
            c_greedy = scorer.score(greedy);
            break;
          }
          case RewardTarget::kRandomReference: {
            const auto& refs = corpus.refs(i);
            const metrics::CiderScorer scorer(std::span(&refs[ref_rng.index(refs.size())], 1), idf);
            c_sample = scorer.score(sample.caption);
            c_greedy = scorer.score(greedy);
            break;
          }
        }
        const double scst = rl::scst_reward(c_sample, c_greedy);

        rl::RewardVector rewards;
        if (critic != nullptr && target == RewardTarget::kReferences) {
          if (!scorers[i]) scorers[i].emplace(corpus.refs(i), idf);
          const double c_teacher = scorers[i]->score(*teacher_caption);
          const auto part = text::lcs_partition(sample.caption, *teacher_caption);
          const auto adj = rl::tcts_adjustment(part.n, part.m, c_teacher);
          rewards = rl::tcts_reward_vector(part, scst, adj, config.lambda2);
        } else {
          rewards = rl::scst_reward_vector(sample.log_prob_nodes.size(), scst);
        }
        const double deviation = std::abs(rewards.mean() - scst);
        report.max_mean_deviation = std::max(report.max_mean_deviation, deviation);
        ++report.reward_checks;
        if (!(deviation <= kMeanPreservationTolerance))
          fail(ErrorCode::kNonFinite, "reward vector mean drifted from the self-critical reward");

        const ad::NodeId item = rl::pg_loss(tape, sample.log_prob_nodes, rewards);
        total = total ? tape.add(*total, item) : item;
        reward_sum += scst;
        ++items;
      }
      const ad::NodeId batch_loss = tape.scale(*total, 1.0 / static_cast<double>(stop - start));
      auto grads = ad::backward(tape, batch_loss, params.tensors());
      const double value = tape.value(batch_loss)[0];
      apply_update(params, grads, lr, config.grad_clip);
      report.step_losses.push_back(value);
      loss_sum += value;
      ++batches;
    }
    EpochRow row;
    row.epoch = epoch_offset + epoch + 1;
    row.learning_rate = lr;
    row.train_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    row.mean_reward = items > 0 ? reward_sum / static_cast<double>(items) : 0.0;
    row.val = val_scores(params, corpus);
    report.rows.push_back(row);
  }
}

TrainReport new_report(const ExperimentConfig& config) {
  TrainReport r;
  r.mode = std::string(to_string(config.mode));
  r.batch_size = config.batch_size;
  r.config_hash = config.hash();
  return r;
}

}  // namespace

TrainResult train_teacher(const ExperimentConfig& config, const Corpus& corpus) {
  if (config.mode != Mode::kTeacher) fail(ErrorCode::kConfig, "train_teacher needs mode=teacher");
  for (const auto& r : corpus.records())
    if (r.attributes.empty())
      fail(ErrorCode::kDataContract, "record " + std::to_string(r.id) + " has no attributes");
  for (std::size_t i = 0; i < corpus.records().size(); ++i)
    if (corpus.input(i).attributes.empty())
      fail(ErrorCode::kDataContract, "record " + std::to_string(corpus.records()[i].id) +
                                         " has no attribute inside the attribute vocabulary");

  const auto start = std::chrono::steady_clock::now();
  Rng init_rng(config.seed);
  TrainResult result{ModelParams::init(corpus.model_config(config.hidden_size, true), init_rng),
                     new_report(config)};
  xe_loop(config, corpus, result.params, nullptr, false, result.report);
  if (config.teacher_rl_epochs > 0) {
    ExperimentConfig rl_cfg = config;
    rl_cfg.epochs = config.teacher_rl_epochs;
    rl_cfg.mode = Mode::kScst;  // picks the RL learning-rate default
    if (!config.learning_rate) rl_cfg.learning_rate.reset();
    rl_loop(rl_cfg, rl_cfg.epochs, corpus, result.params, nullptr, RewardTarget::kReferences,
            config.epochs, result.report);
  }
  result.report.test = test_scores(result.params, corpus);
  result.report.wall_seconds = seconds_since(start);
  return result;
}

TrainResult train_student_xe(const ExperimentConfig& config, const Corpus& corpus,
                             const ModelParams* teacher) {
  if (config.mode != Mode::kXe && config.mode != Mode::kTctsXe)
    fail(ErrorCode::kConfig, "train_student_xe needs mode xe or tcts-xe");
  const bool use_kl = config.mode == Mode::kTctsXe;
  if (use_kl && (teacher == nullptr || !teacher->uses_attributes()))
    fail(ErrorCode::kConfig, "tcts-xe requires an attribute-mode teacher");

  const auto start = std::chrono::steady_clock::now();
  Rng init_rng(config.seed);
  TrainResult result{ModelParams::init(corpus.model_config(config.hidden_size, false), init_rng),
                     new_report(config)};
  xe_loop(config, corpus, result.params, teacher, use_kl, result.report);
  result.report.test = test_scores(result.params, corpus);
  result.report.wall_seconds = seconds_since(start);
  return result;
}

TrainResult train_student_rl(const ExperimentConfig& config, const Corpus& corpus,
                             const ModelParams& init, const ModelParams* teacher,
                             RewardTarget target) {
  if (!is_rl(config.mode)) fail(ErrorCode::kConfig, "train_student_rl needs mode scst or tcts-rl");
  const bool tcts = config.mode == Mode::kTctsRl;
  if ((tcts || target == RewardTarget::kTeacherCaption) &&
      (teacher == nullptr || !teacher->uses_attributes()))
    fail(ErrorCode::kConfig, "this RL mode requires an attribute-mode teacher");
  if (init.config() != corpus.model_config(init.hidden(), init.uses_attributes()))
    fail(ErrorCode::kIncompatibleCheckpoint, "initial parameters do not match the corpus");

  const auto start = std::chrono::steady_clock::now();
  TrainResult result{init, new_report(config)};
  if (tcts && target != RewardTarget::kReferences)
    fail(ErrorCode::kConfig, "tcts-rl only rewards against the references");
  // With reference targets the teacher acts as per-word critic; with
  // teacher-caption targets it only supplies the caption.
  const bool wants_teacher = tcts || target == RewardTarget::kTeacherCaption;
  rl_loop(config, config.epochs, corpus, result.params, wants_teacher ? teacher : nullptr, target,
          0, result.report);
  result.report.test = test_scores(result.params, corpus);
  result.report.wall_seconds = seconds_since(start);
  return result;
}

AblationReport run_teacher_as_gt_ablation(const ExperimentConfig& config, const Corpus& corpus,
                                          const ModelParams& init, const ModelParams& teacher) {
  ExperimentConfig cfg = config;
  cfg.mode = Mode::kScst;
  AblationReport out;
  out.teacher_caption =
      train_student_rl(cfg, corpus, init, &teacher, RewardTarget::kTeacherCaption).report;
  out.random_reference =
      train_student_rl(cfg, corpus, init, nullptr, RewardTarget::kRandomReference).report;
  return out;
}

ckpt::Checkpoint make_checkpoint(const TrainResult& result, const ExperimentConfig& config,
                                 const Corpus& corpus) {
  ckpt::Checkpoint c;
  c.mode = std::string(to_string(config.mode));
  c.config_hash = config.hash();
  c.lexicon_hash = corpus.lexicon().hash();
  c.min_count = corpus.min_count();
  c.attr_vocab_size = corpus.attr_vocab_size();
  c.params = result.params;
  return c;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

void write_metrics(std::ostream& out, const metrics::MetricReport& m) {
  for (double b : m.bleu) out << ',' << b;
  out << ',' << m.rouge_l << ',' << m.cider;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << std::setprecision(17);
  out << "epoch,learning_rate,train_loss,mean_reward,bleu1,bleu2,bleu3,bleu4,rougeL,cider\n";
  for (const auto& row : report.rows) {
    out << row.epoch << ',' << row.learning_rate << ',' << row.train_loss << ','
        << row.mean_reward;
    write_metrics(out, row.val);
    out << '\n';
  }
  out << "test,,,";
  write_metrics(out, report.test);
  out << '\n';
}

void write_ablation_csv(std::ostream& out, const AblationReport& report) {
  out << std::setprecision(17);
  out << "epoch,target,train_loss,mean_reward,bleu1,bleu2,bleu3,bleu4,rougeL,cider\n";
  const std::size_t rows = std::max(report.teacher_caption.rows.size(),
                                    report.random_reference.rows.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (const auto* r : {&report.teacher_caption, &report.random_reference}) {
      if (i >= r->rows.size()) continue;
      const auto& row = r->rows[i];
      out << row.epoch << ',' << (r == &report.teacher_caption ? "teacher-caption" : "random-reference")
          << ',' << row.train_loss << ',' << row.mean_reward;
      write_metrics(out, row.val);
      out << '\n';
    }
  }
  out << "test,teacher-caption,,";
  write_metrics(out, report.teacher_caption.test);
  out << "\ntest,random-reference,,";
  write_metrics(out, report.random_reference.test);
  out << '\n';
}

void write_eval_csv(std::ostream& out, const EvalResult& result) {
  out << std::setprecision(17);
  out << "id,bleu1,bleu2,bleu3,bleu4,rougeL,cider\n";
  for (const auto& r : result.records) {
    out << r.id;
    write_metrics(out, r.scores);
    out << '\n';
  }
  out << "mean";
  write_metrics(out, result.aggregate);
  out << '\n';
}

std::string report_sidecar_json(const TrainReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = report.mode;
  j["config_hash"] = hex(report.config_hash);
  j["report_hash"] = hex(report.hash());
  j["batch_size"] = report.batch_size;
  j["epochs"] = report.rows.size();
  j["wall_seconds"] = report.wall_seconds;
  j["reward_checks"] = report.reward_checks;
  j["max_mean_deviation"] = report.max_mean_deviation;
  j["versions"] = {{"tcts", version()}, {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  return j.dump(2);
}

std::string version() { return "0.3.0"; }

}  // namespace tcts::harness
