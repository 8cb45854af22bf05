// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "tcts/error.hpp"

namespace tcts::metrics {

using text::Caption;
using text::NGram;
using text::NGramCounts;

namespace {

void require_refs(std::span<const Caption> refs) {
  if (refs.empty()) fail(ErrorCode::kMissingReferences, "empty reference set");
}

}  // namespace

// ---------------------------------------------------------------------------
// IdfTable

IdfTable IdfTable::build(std::span<const RefSet> refs) {
  if (refs.empty()) fail(ErrorCode::kMissingReferences, "no reference sets");
  std::array<std::map<NGram, int>, 4> df;
  for (const auto& set : refs) {
    if (set.empty()) fail(ErrorCode::kMissingReferences, "image without reference captions");
    for (int n = 1; n <= 4; ++n) {
      std::set<NGram> seen;
      for (const auto& ref : set) {
        const auto grams = text::ngrams(ref.interior(), n);
        for (const auto& [gram, count] : grams.entries()) seen.insert(gram);
      }
      for (const auto& gram : seen) ++df[static_cast<std::size_t>(n - 1)][gram];
    }
  }
  IdfTable table;
  table.num_images_ = refs.size();
  table.log_num_images_ = std::log(static_cast<double>(refs.size()));
  for (std::size_t k = 0; k < 4; ++k)
    table.df_[k] = NGramCounts({df[k].begin(), df[k].end()});
  return table;
}

int IdfTable::document_frequency(const NGram& gram) const {
  return df_[static_cast<std::size_t>(gram.order() - 1)].count(gram);
}

double IdfTable::idf(const NGram& gram) const {
  const int df = document_frequency(gram);
  return log_num_images_ - std::log(static_cast<double>(std::max(1, df)));
}

// ---------------------------------------------------------------------------
// CIDEr-D

CiderScorer::Vec CiderScorer::vectorize(std::span<const text::TokenId> ids, const IdfTable& idf) {
  Vec v;
  v.length = ids.size();
  for (int n = 1; n <= 4; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    double sq = 0.0;
    const auto grams = text::ngrams(ids, n);
    for (const auto& [gram, count] : grams.entries()) {
      const double w = static_cast<double>(count) * idf.idf(gram);
      v.weights[k].emplace_back(gram, w);
      sq += w * w;
    }
    v.norm[k] = std::sqrt(sq);
  }
  return v;
}

CiderScorer::CiderScorer(std::span<const Caption> refs, const IdfTable& idf) : idf_(&idf) {
  require_refs(refs);
  refs_.reserve(refs.size());
  for (const auto& r : refs) refs_.push_back(vectorize(r.interior(), idf));
}

double CiderScorer::score(const Caption& candidate) const {
  const Vec hyp = vectorize(candidate.interior(), *idf_);
  double total = 0.0;
  for (const auto& ref : refs_) {
    const double delta = static_cast<double>(hyp.length) - static_cast<double>(ref.length);
    const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    double per_ref = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      // Both weight lists are sorted by n-gram; merge-join on the shared keys.
      double dot = 0.0;
      const auto& h = hyp.weights[k];
      const auto& r = ref.weights[k];
      std::size_t i = 0, j = 0;
      while (i < h.size() && j < r.size()) {
        if (h[i].first < r[j].first) {
          ++i;
        } else if (r[j].first < h[i].first) {
          ++j;
        } else {
          dot += std::min(h[i].second, r[j].second) * r[j].second;
          ++i;
          ++j;
        }
      }
      const double denom = hyp.norm[k] * ref.norm[k];
      const double sim = denom != 0.0 ? dot / denom : 0.0;
      per_ref += sim * penalty;
    }
    total += per_ref / 4.0;
  }
  return kCiderScale * total / static_cast<double>(refs_.size());
}

double cider(const Caption& candidate, std::span<const Caption> refs, const IdfTable& idf) {
  return CiderScorer(refs, idf).score(candidate);
}

// ---------------------------------------------------------------------------
// BLEU

std::array<double, 4> bleu(const Caption& candidate, std::span<const Caption> refs) {
  require_refs(refs);
  const auto cand = candidate.interior();
  const double c = static_cast<double>(cand.size());

  std::size_t closest = refs.front().length();
  for (const auto& r : refs) {
    const auto len = r.length();
    const auto d_new = std::abs(static_cast<long>(len) - static_cast<long>(cand.size()));
    const auto d_old = std::abs(static_cast<long>(closest) - static_cast<long>(cand.size()));
    if (d_new < d_old || (d_new == d_old && len < closest)) closest = len;
  }
  const double r_len = static_cast<double>(closest);
  const double bp = c == 0.0 ? 0.0 : (c > r_len ? 1.0 : std::exp(1.0 - r_len / c));

  std::array<double, 4> out{};
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= 4; ++n) {
    const auto hyp = text::ngrams(cand, n);
    std::vector<NGramCounts> ref_counts;
    ref_counts.reserve(refs.size());
    for (const auto& r : refs) ref_counts.push_back(text::ngrams(r.interior(), n));

    double matched = 0.0;
    for (const auto& [gram, count] : hyp.entries()) {
      int max_ref = 0;
      for (const auto& rc : ref_counts) max_ref = std::max(max_ref, rc.count(gram));
      matched += std::min(count, max_ref);
    }
    double total = static_cast<double>(hyp.total());
    double precision;
    if (n >= 2 && matched == 0.0) {
      precision = 1.0 / (total + 1.0);
    } else {
      precision = total > 0.0 ? matched / total : 0.0;
    }
    if (precision == 0.0) zero = true;
    if (!zero) log_sum += std::log(precision);
    out[static_cast<std::size_t>(n - 1)] = zero ? 0.0 : bp * std::exp(log_sum / n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ROUGE-L

double rouge_l(const Caption& candidate, std::span<const Caption> refs) {
  require_refs(refs);
  const auto cand = candidate.interior();
  double best = 0.0;
  for (const auto& r : refs) {
    const auto lcs = static_cast<double>(text::lcs_partition(cand, r.interior()).n);
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(cand.size());
    const double rec = lcs / static_cast<double>(r.length());
    const double b2 = kRougeBeta * kRougeBeta;
    best = std::max(best, (1.0 + b2) * p * rec / (rec + b2 * p));
  }
  return best;
}

MetricReport score(const Caption& candidate, std::span<const Caption> refs, const IdfTable& idf) {
  MetricReport r;
  r.bleu = bleu(candidate, refs);
  r.rouge_l = rouge_l(candidate, refs);
  r.cider = cider(candidate, refs, idf);
  return r;
}

MetricReport mean(std::span<const MetricReport> reports) {
  MetricReport out;
  if (reports.empty()) return out;
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < 4; ++k) out.bleu[k] += r.bleu[k];
    out.rouge_l += r.rouge_l;
    out.cider += r.cider;
  }
  const auto n = static_cast<double>(reports.size());
  for (auto& b : out.bleu) b /= n;
  out.rouge_l /= n;
  out.cider /= n;
  return out;
}

}  // namespace tcts::metrics
