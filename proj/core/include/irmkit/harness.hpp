#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "irmkit/dataset.hpp"
#include "irmkit/model.hpp"
#include "irmkit/ranking.hpp"

namespace irmkit {

enum class SweepMode { Augmentation, Substitution, FixedTotal };

/// "augment", "substitute", "fixed".
std::string_view to_string(SweepMode mode);
SweepMode parse_sweep_mode(std::string_view text);

/// One mixture of the dataset: how many samples to draw from each environment
/// (aligned with MultiEnvDataset::environments). A count of 0 leaves the
/// environment out of the cell.
struct Cell {
  std::string label;
  std::vector<std::size_t> counts;
};

struct SweepPlan {
  SweepMode mode = SweepMode::Augmentation;
  std::vector<Cell> cells;
  std::vector<std::uint64_t> seeds;
  TrainConfig train_config;
  std::vector<Metric> metrics{std::begin(kAllMetrics), std::end(kAllMetrics)};
  double rbo_p = 0.9;
  std::optional<std::size_t> total_budget;
  /// Concurrent (cell, seed) trainings. Output does not depend on it.
  std::size_t workers = 1;
};

/// Structural checks against `data`: counts within availability, no
/// environment with exactly one sample, the two-human floor for substitution
/// cells, the budget for fixed-total cells, metric k within the gene count.
void validate(const SweepPlan& plan, const MultiEnvDataset& data);

/// Cell 0 holds every human sample and no mouse samples; each later cell adds
/// `step` samples per mouse environment until all are included.
SweepPlan build_augmentation_plan(const MultiEnvDataset& data, std::size_t step, std::vector<std::uint64_t> seeds,
                                  const TrainConfig& config);

/// Starts from all human samples plus two per mouse environment; each cell
/// removes `step` samples per human environment (floor 2) and adds `step` per
/// mouse environment (capped) until two human samples per environment remain.
SweepPlan build_substitution_plan(const MultiEnvDataset& data, std::size_t step,
                                  std::vector<std::uint64_t> seeds, const TrainConfig& config);

/// Every cell holds exactly `budget` samples; the mouse share grows by `step`
/// per cell from the smallest feasible value to the largest feasible value.
SweepPlan build_fixed_total_plan(const MultiEnvDataset& data, std::size_t budget, std::size_t step,
                                 std::vector<std::uint64_t> seeds, const TrainConfig& config);

struct SimilarityMatrix {
  Metric metric = Metric::RboExt;
  std::vector<std::string> labels;
  /// Mean over seeds; NaN where no seed produced a value (failed cells).
  Matrix mean;
  Matrix ci_low;
  Matrix ci_high;
};

struct CellRun {
  std::size_t cell = 0;
  std::size_t seed_index = 0;
  bool failed = false;
  std::string error;
  RankedFeatureList ranking;
};

struct SweepReport {
  SweepPlan plan;
  /// Ordered by (cell, seed index).
  std::vector<CellRun> runs;
  std::vector<SimilarityMatrix> matrices;
  std::string dataset_hash;
  std::string toolkit_version;

  [[nodiscard]] const CellRun& run(std::size_t cell, std::size_t seed_index) const;
};

/// Rows drawn for environment `env_index` under `seed`: the first `count`
/// entries of a fixed shuffled order, returned in ascending index order.
/// Cells that ask for more samples of an environment therefore contain the
/// rows of cells that ask for fewer.
std::vector<std::size_t> subsample_rows(std::size_t n_rows, std::size_t count, std::uint64_t seed,
                                        std::size_t env_index);

/// Training data of one (cell, seed) task.
MultiEnvDataset cell_dataset(const MultiEnvDataset& data, const Cell& cell, std::uint64_t seed);

/// Trains and ranks every (cell, seed), then builds one similarity matrix per
/// requested metric, averaged over seeds with a 95% confidence interval.
/// Training divergence marks the run failed and the sweep continues.
SweepReport run_sweep(const MultiEnvDataset& data, const SweepPlan& plan);

/// mean +/- z * sd / sqrt(n) with z the two-sided normal quantile for `level`.
/// A single sample gives (x, x).
std::pair<double, double> confidence_interval(std::span<const double> samples, double level = 0.95);

std::string toolkit_version();

}  // namespace irmkit
