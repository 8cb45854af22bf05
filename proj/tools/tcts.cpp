// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// tcts: dataset generation, training, evaluation and scoring.
//
// Exit codes: 0 success, 2 config error, 3 data contract error,
// 4 numeric failure, 1 anything else.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "tcts/checkpoint.hpp"
#include "tcts/error.hpp"
#include "tcts/harness.hpp"
#include "tcts/metrics.hpp"
#include "tcts/synthgen.hpp"

namespace {

using namespace tcts;
using harness::Corpus;
using harness::ExperimentConfig;
using harness::Mode;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return 2;
    case ErrorCode::kDataContract:
    case ErrorCode::kMissingReferences:
    case ErrorCode::kEmptyText:
    case ErrorCode::kIncompatibleCheckpoint:
    case ErrorCode::kIo: return 3;
    case ErrorCode::kNonFinite: return 4;
    default: return 1;
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  return out;
}

std::vector<data::DatasetRecord> records_for(const ExperimentConfig& cfg) {
  if (!cfg.data.empty()) return synth::load_dataset(cfg.data);
  synth::GenConfig gen;
  gen.num_records = cfg.num_records;
  gen.seed = cfg.seed;
  gen.min_count = cfg.min_count;
  gen.attr_vocab_size = cfg.attr_vocab_size;
  return synth::gen_dataset(gen);
}

ckpt::Checkpoint load_compatible(const std::string& path, const Corpus& corpus) {
  auto c = ckpt::load(path);
  if (c.lexicon_hash != corpus.lexicon().hash())
    fail(ErrorCode::kIncompatibleCheckpoint, path + " was trained on a different vocabulary");
  return c;
}

void write_report(const std::string& path, const harness::TrainReport& report) {
  if (path.empty()) {
    harness::write_report_csv(std::cout, report);
    return;
  }
  auto csv = open_out(path);
  harness::write_report_csv(csv, report);
  open_out(path + ".json") << harness::report_sidecar_json(report) << '\n';
}

int cmd_gen(const std::string& config_path, const std::string& out_path) {
  const auto cfg = harness::load_config(config_path);
  synth::GenConfig gen;
  gen.num_records = cfg.num_records;
  gen.seed = cfg.seed;
  gen.min_count = cfg.min_count;
  gen.attr_vocab_size = cfg.attr_vocab_size;
  const auto records = synth::gen_dataset(gen);
  synth::save_dataset(out_path, records);
  std::cerr << "wrote " << records.size() << " records, misaligned fraction "
            << synth::measure_misalignment(records) << '\n';
  return 0;
}

int cmd_train(const std::string& config_path) {
  const auto cfg = harness::load_config(config_path);
  cfg.validate(true);
  const Corpus corpus(records_for(cfg), cfg.min_count, cfg.attr_vocab_size, cfg.max_len);

  std::optional<ckpt::Checkpoint> teacher;
  if (!cfg.teacher_ckpt.empty() && cfg.mode != Mode::kTeacher)
    teacher = load_compatible(cfg.teacher_ckpt, corpus);
  const model::ModelParams* teacher_params = teacher ? &teacher->params : nullptr;

  harness::TrainResult result = [&] {
    switch (cfg.mode) {
      case Mode::kTeacher: return harness::train_teacher(cfg, corpus);
      case Mode::kXe:
      case Mode::kTctsXe: return harness::train_student_xe(cfg, corpus, teacher_params);
      case Mode::kScst:
      case Mode::kTctsRl: {
        const auto init = load_compatible(cfg.init_ckpt, corpus);
        return harness::train_student_rl(cfg, corpus, init.params,
                                         cfg.mode == Mode::kTctsRl ? teacher_params : nullptr);
      }
    }
    fail(ErrorCode::kConfig, "unknown mode");
  }();

  if (!cfg.out_ckpt.empty()) ckpt::save(cfg.out_ckpt, harness::make_checkpoint(result, cfg, corpus));
  write_report(cfg.report, result.report);
  const auto& t = result.report.test;
  std::cerr << harness::to_string(cfg.mode) << ": test CIDEr " << t.cider << " BLEU-4 "
            << t.bleu[3] << " ROUGE-L " << t.rouge_l << " (" << result.report.wall_seconds
            << " s)\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& split_name, const std::string& report_path,
             const std::string& captions_path) {
  const auto checkpoint = ckpt::load(ckpt_path);
  const Corpus corpus(synth::load_dataset(data_path), checkpoint.min_count,
                      checkpoint.attr_vocab_size, checkpoint.params.config().max_len);
  const auto result = harness::evaluate(checkpoint, corpus, data::parse_split(split_name));
  if (report_path.empty()) {
    harness::write_eval_csv(std::cout, result);
  } else {
    auto out = open_out(report_path);
    harness::write_eval_csv(out, result);
  }
  if (!captions_path.empty()) {
    auto out = open_out(captions_path);
    for (const auto& r : result.records) out << r.caption << '\n';
  }
  std::cerr << "mean CIDEr " << result.aggregate.cider << " over " << result.records.size()
            << " records\n";
  return 0;
}

// Candidates are one sentence per line, aligned with the records of the
// reference file. CIDEr uses an IDF table built from all references given.
int cmd_score(const std::string& cand_path, const std::string& refs_path,
              const std::string& report_path) {
  const auto records = synth::load_dataset(refs_path);
  std::ifstream in(cand_path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + cand_path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (lines.size() != records.size())
    fail(ErrorCode::kDataContract, "candidate file has " + std::to_string(lines.size()) +
                                       " lines for " + std::to_string(records.size()) +
                                       " records");

  std::vector<text::Tokens> all;
  for (const auto& r : records)
    for (const auto& ref : r.refs) all.push_back(text::tokenize(ref));
  for (const auto& line : lines) all.push_back(text::tokenize(line));
  const auto vocab = text::Vocab::build(all, 1);
  const std::size_t max_len = std::numeric_limits<std::uint16_t>::max();

  std::vector<metrics::RefSet> refs;
  for (const auto& r : records) {
    if (r.refs.empty())
      fail(ErrorCode::kMissingReferences, "record " + std::to_string(r.id) + " has no references");
    metrics::RefSet set;
    for (const auto& ref : r.refs) set.push_back(text::encode(text::tokenize(ref), vocab, max_len));
    refs.push_back(std::move(set));
  }
  const auto idf = metrics::IdfTable::build(refs);

  harness::EvalResult result;
  std::vector<metrics::MetricReport> scores;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto cand = text::encode(text::tokenize(lines[i]), vocab, max_len);
    harness::EvalRecord rec{records[i].id, lines[i], metrics::score(cand, refs[i], idf)};
    scores.push_back(rec.scores);
    result.records.push_back(std::move(rec));
  }
  result.aggregate = metrics::mean(scores);
  if (report_path.empty()) {
    harness::write_eval_csv(std::cout, result);
  } else {
    auto out = open_out(report_path);
    harness::write_eval_csv(out, result);
  }
  return 0;
}

int cmd_ablate(const std::string& config_path) {
  auto cfg = harness::load_config(config_path);
  if (cfg.teacher_ckpt.empty() || cfg.init_ckpt.empty())
    fail(ErrorCode::kConfig, "ablate-teacher-gt requires teacher_ckpt and init_ckpt");
  cfg.mode = Mode::kScst;
  const Corpus corpus(records_for(cfg), cfg.min_count, cfg.attr_vocab_size, cfg.max_len);
  const auto teacher = load_compatible(cfg.teacher_ckpt, corpus);
  const auto init = load_compatible(cfg.init_ckpt, corpus);
  const auto report = harness::run_teacher_as_gt_ablation(cfg, corpus, init.params, teacher.params);
  if (cfg.report.empty()) {
    harness::write_ablation_csv(std::cout, report);
  } else {
    auto out = open_out(cfg.report);
    harness::write_ablation_csv(out, report);
    open_out(cfg.report + ".json") << harness::report_sidecar_json(report.teacher_caption) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-critical captioning lab"};
  app.set_version_flag("--version", harness::version());
  app.require_subcommand(1);

  std::string config, out, ckpt_path, data_path, split = "test", report, cand, refs, captions;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", config, "experiment config JSON")->required();
  gen->add_option("--out", out, "output JSONL")->required();

  auto* train = app.add_subcommand("train", "train the model named by the config mode");
  train->add_option("--config", config, "experiment config JSON")->required();

  auto* eval = app.add_subcommand("eval", "greedy-decode and score a split");
  eval->add_option("--ckpt", ckpt_path)->required();
  eval->add_option("--data", data_path)->required();
  eval->add_option("--split", split)->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--report", report);
  eval->add_option("--captions", captions, "write decoded captions, one per line");

  auto* score = app.add_subcommand("score", "score candidate sentences against references");
  score->add_option("--cand", cand)->required();
  score->add_option("--refs", refs)->required();
  score->add_option("--report", report);

  auto* ablate = app.add_subcommand("ablate-teacher-gt",
                                    "SCST against the teacher caption vs a random reference");
  ablate->add_option("--config", config, "experiment config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(config, out);
    if (*train) return cmd_train(config);
    if (*eval) return cmd_eval(ckpt_path, data_path, split, report, captions);
    if (*score) return cmd_score(cand, refs, report);
    if (*ablate) return cmd_ablate(config);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
