// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: teacher pre-training, the four student regimes
// (xe, tcts-xe, scst, tcts-rl), evaluation and report emission.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcts/checkpoint.hpp"
#include "tcts/dataset.hpp"
#include "tcts/metrics.hpp"
#include "tcts/model.hpp"

namespace tcts::harness {

enum class Mode { kTeacher, kXe, kTctsXe, kScst, kTctsRl };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

struct ExperimentConfig {
  Mode mode = Mode::kXe;
  double lambda1 = 0.2;
  double lambda2 = 0.02;
  std::size_t epochs = 15;
  std::size_t batch_size = 32;
  std::optional<double> learning_rate;  // per-stage default when unset
  double lr_decay = 0.5;
  std::size_t lr_decay_every = 0;  // 0: every max(1, epochs / 3) epochs
  double grad_clip = 5.0;
  std::uint64_t seed = 1;
  std::size_t hidden_size = 64;
  std::size_t max_len = 16;
  double temperature = 1.0;
  std::size_t teacher_rl_epochs = 0;
  bool cache_teacher_captions = false;
  // synthetic data
  std::size_t num_records = 2000;
  int min_count = 5;
  std::size_t attr_vocab_size = 50;
  // paths
  std::string data;
  std::string teacher_ckpt;
  std::string init_ckpt;
  std::string out_ckpt;
  std::string report;

  double effective_learning_rate() const;
  std::size_t effective_decay_every() const;
  /// Throws kConfig on violated invariants (negative weights, missing
  /// prerequisite checkpoint paths when `require_paths`).
  void validate(bool require_paths) const;
  std::uint64_t hash() const;
};

/// Parses a JSON config; unknown keys and wrong types are kConfig errors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& config);

inline constexpr double kDefaultXeLearningRate = 3.0;
inline constexpr double kDefaultRlLearningRate = 0.05;

/// Records plus everything derived from them once: lexicon, model inputs,
/// encoded references and per-split IDF tables.
class Corpus {
 public:
  Corpus(std::vector<data::DatasetRecord> records, int min_count, std::size_t attr_vocab_size,
         std::size_t max_len);

  const std::vector<data::DatasetRecord>& records() const { return records_; }
  const data::Lexicon& lexicon() const { return lexicon_; }
  const model::SceneInput& input(std::size_t i) const { return inputs_[i]; }
  const std::vector<text::Caption>& refs(std::size_t i) const { return refs_[i]; }
  std::span<const std::size_t> split(data::Split s) const;
  const metrics::IdfTable& idf(data::Split s) const;
  std::size_t max_len() const { return max_len_; }
  int min_count() const { return min_count_; }
  std::size_t attr_vocab_size() const { return attr_vocab_size_; }

  model::ModelConfig model_config(std::size_t hidden, bool uses_attributes) const;

 private:
  std::vector<data::DatasetRecord> records_;
  data::Lexicon lexicon_;
  std::vector<model::SceneInput> inputs_;
  std::vector<std::vector<text::Caption>> refs_;
  std::vector<std::size_t> splits_[3];
  std::optional<metrics::IdfTable> idf_[3];
  std::size_t max_len_;
  int min_count_;
  std::size_t attr_vocab_size_;
};

struct EpochRow {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double mean_reward = 0.0;  // RL stages: mean self-critical reward
  metrics::MetricReport val;
};

struct TrainReport {
  std::string mode;
  std::vector<EpochRow> rows;
  metrics::MetricReport test;
  std::vector<double> step_losses;
  std::size_t batch_size = 0;
  std::uint64_t config_hash = 0;
  double wall_seconds = 0.0;
  // RL stages: reward-vector mean vs self-critical scalar, over every item
  std::size_t reward_checks = 0;
  double max_mean_deviation = 0.0;

  /// Hash of everything except wall time.
  std::uint64_t hash() const;
};

struct TrainResult {
  model::ModelParams params;
  TrainReport report;
};

struct EvalRecord {
  std::int64_t id = 0;
  std::string caption;
  metrics::MetricReport scores;
};

struct EvalResult {
  std::vector<EvalRecord> records;
  metrics::MetricReport aggregate;
};

/// Greedy-decodes every record of the split and scores it against its
/// references, CIDEr using the split's own IDF table.
EvalResult evaluate(const model::ModelParams& params, const Corpus& corpus, data::Split split);

/// Throws kIncompatibleCheckpoint when the checkpoint's lexicon differs
/// from the corpus lexicon.
EvalResult evaluate(const ckpt::Checkpoint& checkpoint, const Corpus& corpus, data::Split split);

TrainResult train_teacher(const ExperimentConfig& config, const Corpus& corpus);

TrainResult train_student_xe(const ExperimentConfig& config, const Corpus& corpus,
                             const model::ModelParams* teacher);

enum class RewardTarget {
  kReferences,       // CIDEr against the record's references
  kTeacherCaption,   // CIDEr against the teacher's greedy caption only
  kRandomReference,  // CIDEr against one reference drawn per item
};

TrainResult train_student_rl(const ExperimentConfig& config, const Corpus& corpus,
                             const model::ModelParams& init, const model::ModelParams* teacher,
                             RewardTarget target = RewardTarget::kReferences);

struct AblationReport {
  TrainReport teacher_caption;
  TrainReport random_reference;
};

/// Two self-critical runs from the same initialization and seed, one
/// rewarding against the teacher caption, one against a random reference.
AblationReport run_teacher_as_gt_ablation(const ExperimentConfig& config, const Corpus& corpus,
                                          const model::ModelParams& init,
                                          const model::ModelParams& teacher);

ckpt::Checkpoint make_checkpoint(const TrainResult& result, const ExperimentConfig& config,
                                 const Corpus& corpus);

// Report emission. CSV files carry a header row.
void write_report_csv(std::ostream& out, const TrainReport& report);
void write_ablation_csv(std::ostream& out, const AblationReport& report);
void write_eval_csv(std::ostream& out, const EvalResult& result);
std::string report_sidecar_json(const TrainReport& report);

std::string version();

}  // namespace tcts::harness
