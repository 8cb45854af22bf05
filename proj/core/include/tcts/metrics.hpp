// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference-based caption metrics: CIDEr-D, single-sentence BLEU-1..4 and
// ROUGE-L. All functions operate on caption interiors and are pure.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tcts/textcore.hpp"

namespace tcts::metrics {

using RefSet = std::vector<text::Caption>;

inline constexpr double kCiderSigma = 6.0;
inline constexpr double kCiderScale = 10.0;
inline constexpr double kRougeBeta = 1.2;

/// Document frequencies of reference n-grams, n = 1..4, counted once per
/// image. Built from references only.
class IdfTable {
 public:
  static IdfTable build(std::span<const RefSet> refs);

  std::size_t num_images() const { return num_images_; }
  /// 0 for n-grams never seen in the references.
  int document_frequency(const text::NGram& gram) const;
  /// log(N / max(1, df)).
  double idf(const text::NGram& gram) const;

 private:
  std::size_t num_images_ = 0;
  double log_num_images_ = 0.0;
  std::array<text::NGramCounts, 4> df_;
};

/// CIDEr-D: clipped tf-idf similarity per order, Gaussian length penalty,
/// averaged over references and orders, scaled by 10.
double cider(const text::Caption& candidate, std::span<const text::Caption> refs,
             const IdfTable& idf);

/// Precomputed tf-idf vectors of one reference set, for scoring many
/// candidates against the same references.
class CiderScorer {
 public:
  CiderScorer(std::span<const text::Caption> refs, const IdfTable& idf);

  double score(const text::Caption& candidate) const;

 private:
  struct Vec {
    std::array<std::vector<std::pair<text::NGram, double>>, 4> weights;
    std::array<double, 4> norm{};
    std::size_t length = 0;
  };
  static Vec vectorize(std::span<const text::TokenId> ids, const IdfTable& idf);

  const IdfTable* idf_;
  std::vector<Vec> refs_;
};

/// Single-sentence BLEU-1..4. Brevity penalty uses the closest reference
/// length (shorter wins ties). For n >= 2 a zero clipped count is smoothed
/// to (0 + 1) / (total + 1).
std::array<double, 4> bleu(const text::Caption& candidate, std::span<const text::Caption> refs);

/// LCS F-measure with beta = 1.2, maximum over references.
double rouge_l(const text::Caption& candidate, std::span<const text::Caption> refs);

struct MetricReport {
  std::array<double, 4> bleu{};
  double rouge_l = 0.0;
  double cider = 0.0;
};

MetricReport score(const text::Caption& candidate, std::span<const text::Caption> refs,
                   const IdfTable& idf);

/// Arithmetic mean of every field.
MetricReport mean(std::span<const MetricReport> reports);

}  // namespace tcts::metrics
