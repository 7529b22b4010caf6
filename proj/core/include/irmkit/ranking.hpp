#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irmkit/model.hpp"

namespace irmkit {

struct RankedEntry {
  std::string gene_id;
  double score = 0.0;  // |theta_j|
};

/// Genes ordered by |theta| descending, ties by ascending gene id.
struct RankedFeatureList {
  std::string source;
  std::vector<RankedEntry> entries;

  [[nodiscard]] std::vector<std::string> ids() const;
  [[nodiscard]] std::size_t size() const { return entries.size(); }
};

/// Throws ValidationError on duplicate ids, negative/non-finite scores or
/// scores that increase down the list.
void validate(const RankedFeatureList& list);

RankedFeatureList rank_features(const LinearModel& model, std::span<const std::string> gene_ids,
                                std::string source = {});

/// |top_k(a) & top_k(b)| / k. Both lists need at least k entries.
double top_k_overlap(std::span<const std::string> a, std::span<const std::string> b, std::size_t k);

/// Extrapolated rank-biased overlap truncated at the shorter list (depth k):
///   (1 - p) * sum_{d=1..k} p^(d-1) A_d + p^k A_k,  A_d = |a[:d] & b[:d]| / d
double rbo_ext(std::span<const std::string> a, std::span<const std::string> b, double p = 0.9);

/// Kendall tau-a on the items both lists share, in each list's own order.
/// Needs at least two shared items.
double kendall_tau(std::span<const std::string> a, std::span<const std::string> b);

double top_k_overlap(const RankedFeatureList& a, const RankedFeatureList& b, std::size_t k);
double rbo_ext(const RankedFeatureList& a, const RankedFeatureList& b, double p = 0.9);
double kendall_tau(const RankedFeatureList& a, const RankedFeatureList& b);

enum class Metric { Top10, Top50, RboExt, KendallTau };

inline constexpr Metric kAllMetrics[] = {Metric::Top10, Metric::Top50, Metric::RboExt, Metric::KendallTau};

/// "top10", "top50", "rbo", "tau".
std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

/// Lower end of the metric's range: -1 for Kendall tau, 0 otherwise.
double metric_floor(Metric metric);

double similarity(Metric metric, std::span<const std::string> a, std::span<const std::string> b,
                  double rbo_p = 0.9);

}  // namespace irmkit
