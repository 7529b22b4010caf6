#include "irmkit/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "irmkit/error.hpp"

namespace irmkit {

std::vector<std::string> RankedFeatureList::ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.gene_id);
  return out;
}

void validate(const RankedFeatureList& list) {
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    const auto& e = list.entries[i];
    if (!seen.insert(e.gene_id).second) throw ValidationError("ranking repeats gene id '" + e.gene_id + "'");
    if (!(e.score >= 0.0) || !std::isfinite(e.score)) {
      throw ValidationError("ranking score for '" + e.gene_id + "' is not a finite non-negative number");
    }
    if (i > 0 && e.score > list.entries[i - 1].score) {
      throw ValidationError("ranking scores increase at position " + std::to_string(i));
    }
  }
}

RankedFeatureList rank_features(const LinearModel& model, std::span<const std::string> gene_ids,
                                std::string source) {
  if (static_cast<Eigen::Index>(gene_ids.size()) != model.theta.size()) {
    throw ValidationError("model has " + std::to_string(model.theta.size()) + " weights but " +
                          std::to_string(gene_ids.size()) + " gene ids were given");
  }
  RankedFeatureList out;
  out.source = std::move(source);
  out.entries.reserve(gene_ids.size());
  for (std::size_t j = 0; j < gene_ids.size(); ++j) {
    out.entries.push_back({gene_ids[j], std::abs(model.theta[static_cast<Eigen::Index>(j)])});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& l, const RankedEntry& r) {
    if (l.score != r.score) return l.score > r.score;
    return l.gene_id < r.gene_id;
  });
  validate(out);
  return out;
}

double top_k_overlap(std::span<const std::string> a, std::span<const std::string> b, std::size_t k) {
  if (k == 0) throw ValidationError("k must be positive");
  if (k > a.size() || k > b.size()) {
    throw ValidationError("top-" + std::to_string(k) + " overlap needs lists of at least " + std::to_string(k) +
                          " entries (got " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
  std::unordered_set<std::string_view> head(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t shared = 0;
  for (std::size_t i = 0; i < k; ++i) shared += head.count(b[i]);
  return static_cast<double>(shared) / static_cast<double>(k);
}

double rbo_ext(std::span<const std::string> a, std::span<const std::string> b, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("RBO persistence p must lie in (0, 1)");
  if (a.empty() || b.empty()) throw ValidationError("RBO needs non-empty rankings");
  const std::size_t depth = std::min(a.size(), b.size());
  std::vector<double> agreement(depth);
  std::unordered_set<std::string_view> seen_a;
  std::unordered_set<std::string_view> seen_b;
  std::size_t overlap = 0;
  for (std::size_t d = 1; d <= depth; ++d) {
    const std::string_view x = a[d - 1];
    const std::string_view y = b[d - 1];
    if (x == y) {
      ++overlap;
    } else {
      overlap += seen_b.count(x) + seen_a.count(y);
    }
    seen_a.insert(x);
    seen_b.insert(y);
    agreement[d - 1] = static_cast<double>(overlap) / static_cast<double>(d);
  }
  // Same value as (1 - p) sum p^(d-1) A_d + p^k A_k, since (1 - p) sum p^(d-1) = 1 - p^k,
  // but exact for identical rankings.
  const double tail = agreement.back();
  double correction = 0.0;
  double weight = 1.0;
  for (double ad : agreement) {
    correction += weight * (ad - tail);
    weight *= p;
  }
  return std::clamp(tail + (1.0 - p) * correction, 0.0, 1.0);
}

namespace {

// Inversions of `seq` by merge sort.
std::uint64_t count_inversions(std::vector<std::size_t>& seq, std::vector<std::size_t>& scratch,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(seq, scratch, lo, mid) + count_inversions(seq, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (seq[j] < seq[i]) {
      inv += mid - i;
      scratch[k++] = seq[j++];
    } else {
      scratch[k++] = seq[i++];
    }
  }
  while (i < mid) scratch[k++] = seq[i++];
  while (j < hi) scratch[k++] = seq[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            seq.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

double kendall_tau(std::span<const std::string> a, std::span<const std::string> b) {
  std::unordered_map<std::string_view, std::size_t> pos_in_b;
  for (std::size_t i = 0; i < b.size(); ++i) pos_in_b.emplace(b[i], i);
  // b-positions of the shared items, in a's order; b's restriction keeps relative order.
  std::vector<std::size_t> seq;
  for (const auto& item : a) {
    if (auto it = pos_in_b.find(item); it != pos_in_b.end()) seq.push_back(it->second);
  }
  const std::size_t n = seq.size();
  if (n < 2) throw ValidationError("Kendall tau needs at least two shared items (got " + std::to_string(n) + ")");
  std::vector<std::size_t> scratch(n);
  const std::uint64_t discordant = count_inversions(seq, scratch, 0, n);
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - 2.0 * static_cast<double>(discordant) / pairs;
}

double top_k_overlap(const RankedFeatureList& a, const RankedFeatureList& b, std::size_t k) {
  return top_k_overlap(a.ids(), b.ids(), k);
}

double rbo_ext(const RankedFeatureList& a, const RankedFeatureList& b, double p) {
  return rbo_ext(a.ids(), b.ids(), p);
}

double kendall_tau(const RankedFeatureList& a, const RankedFeatureList& b) {
  return kendall_tau(a.ids(), b.ids());
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Top10: return "top10";
    case Metric::Top50: return "top50";
    case Metric::RboExt: return "rbo";
    case Metric::KendallTau: return "tau";
  }
  return "tau";
}

Metric parse_metric(std::string_view text) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == text) return m;
  }
  throw ValidationError("unknown metric '" + std::string(text) + "' (expected top10, top50, rbo or tau)");
}

double metric_floor(Metric metric) { return metric == Metric::KendallTau ? -1.0 : 0.0; }

double similarity(Metric metric, std::span<const std::string> a, std::span<const std::string> b, double rbo_p) {
  switch (metric) {
    case Metric::Top10: return top_k_overlap(a, b, 10);
    case Metric::Top50: return top_k_overlap(a, b, 50);
    case Metric::RboExt: return rbo_ext(a, b, rbo_p);
    case Metric::KendallTau: return kendall_tau(a, b);
  }
  throw ValidationError("unknown metric");
}

}  // namespace irmkit
