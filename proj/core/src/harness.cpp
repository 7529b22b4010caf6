#include "irmkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "irmkit/error.hpp"
#include "irmkit/rng.hpp"

#ifndef IRMKIT_VERSION
#define IRMKIT_VERSION "0.0.0"
#endif

namespace irmkit {

namespace {

constexpr std::uint64_t kSubsampleStream = 0x73756273;  // "subs"
constexpr std::uint64_t kTrainStream = 0x7472616e;      // "tran"

struct OrganismTotals {
  std::vector<std::size_t> human;  // environment indices
  std::vector<std::size_t> mouse;
};

OrganismTotals split_by_organism(const MultiEnvDataset& data) {
  OrganismTotals out;
  for (std::size_t e = 0; e < data.environments.size(); ++e) {
    switch (data.environments[e].organism) {
      case Organism::Human: out.human.push_back(e); break;
      case Organism::Mouse: out.mouse.push_back(e); break;
      case Organism::Synthetic:
        throw ValidationError("environment '" + data.environments[e].id +
                              "' is synthetic; sweeps mix human and mouse environments");
    }
  }
  return out;
}

std::string cell_label(const MultiEnvDataset& data, const std::vector<std::size_t>& counts) {
  std::size_t human = 0;
  std::size_t mouse = 0;
  for (std::size_t e = 0; e < counts.size(); ++e) {
    (data.environments[e].organism == Organism::Human ? human : mouse) += counts[e];
  }
  return "h" + std::to_string(human) + "_m" + std::to_string(mouse);
}

SweepPlan base_plan(SweepMode mode, std::vector<std::uint64_t> seeds, const TrainConfig& config) {
  if (seeds.empty()) throw ValidationError("a sweep needs at least one seed");
  SweepPlan plan;
  plan.mode = mode;
  plan.seeds = std::move(seeds);
  plan.train_config = config;
  return plan;
}

void push_cell(SweepPlan& plan, const MultiEnvDataset& data, std::vector<std::size_t> counts) {
  plan.cells.push_back({cell_label(data, counts), std::move(counts)});
}

// Spreads `total` samples over `envs` without leaving any environment at one
// sample: an untouched environment receives two at once.
void allocate(const MultiEnvDataset& data, const std::vector<std::size_t>& envs, std::size_t total,
              std::vector<std::size_t>& counts) {
  std::size_t remaining = total;
  while (remaining > 0) {
    bool progressed = false;
    for (auto e : envs) {
      if (remaining == 0) break;
      const auto cap = data.environments[e].n_samples();
      if (counts[e] == 0) {
        if (remaining >= 2 && cap >= 2) {
          counts[e] = 2;
          remaining -= 2;
          progressed = true;
        }
      } else if (counts[e] < cap) {
        ++counts[e];
        --remaining;
        progressed = true;
      }
    }
    if (!progressed) {
      throw ValidationError("cannot place " + std::to_string(total) + " samples without an environment of size one");
    }
  }
}

}  // namespace

std::string_view to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::Augmentation: return "augment";
    case SweepMode::Substitution: return "substitute";
    case SweepMode::FixedTotal: return "fixed";
  }
  return "augment";
}

SweepMode parse_sweep_mode(std::string_view text) {
  if (text == "augment") return SweepMode::Augmentation;
  if (text == "substitute") return SweepMode::Substitution;
  if (text == "fixed") return SweepMode::FixedTotal;
  throw ValidationError("unknown sweep mode '" + std::string(text) + "' (expected augment, substitute or fixed)");
}

SweepPlan build_augmentation_plan(const MultiEnvDataset& data, std::size_t step, std::vector<std::uint64_t> seeds,
                                  const TrainConfig& config) {
  if (step == 0) throw ValidationError("step must be positive");
  const auto groups = split_by_organism(data);
  if (groups.human.empty()) throw ValidationError("augmentation needs at least one human environment");
  if (groups.mouse.empty()) throw ValidationError("augmentation needs at least one mouse environment");
  SweepPlan plan = base_plan(SweepMode::Augmentation, std::move(seeds), config);

  std::vector<std::size_t> counts(data.environments.size(), 0);
  for (auto e : groups.human) counts[e] = data.environments[e].n_samples();
  std::size_t largest = 0;
  for (auto e : groups.mouse) largest = std::max(largest, data.environments[e].n_samples());
  for (std::size_t added = 0;; added += step) {
    const std::size_t level = std::min(added, largest);
    for (auto e : groups.mouse) counts[e] = std::min(level, data.environments[e].n_samples());
    push_cell(plan, data, counts);
    if (level == largest) break;
  }
  return plan;
}

SweepPlan build_substitution_plan(const MultiEnvDataset& data, std::size_t step, std::vector<std::uint64_t> seeds,
                                  const TrainConfig& config) {
  if (step == 0) throw ValidationError("step must be positive");
  const auto groups = split_by_organism(data);
  if (groups.human.empty()) throw ValidationError("substitution needs at least one human environment");
  if (groups.mouse.empty()) throw ValidationError("substitution needs at least one mouse environment");
  for (auto e : groups.human) {
    if (data.environments[e].n_samples() <= 2) {
      throw ValidationError("substitution needs more than 2 samples in every human environment; '" +
                            data.environments[e].id + "' has " + std::to_string(data.environments[e].n_samples()));
    }
  }
  for (auto e : groups.mouse) {
    if (data.environments[e].n_samples() < 2) {
      throw ValidationError("substitution needs at least 2 samples in every mouse environment; '" +
                            data.environments[e].id + "' has " + std::to_string(data.environments[e].n_samples()));
    }
  }
  SweepPlan plan = base_plan(SweepMode::Substitution, std::move(seeds), config);

  std::vector<std::size_t> counts(data.environments.size(), 0);
  for (auto e : groups.human) counts[e] = data.environments[e].n_samples();
  for (auto e : groups.mouse) counts[e] = 2;
  push_cell(plan, data, counts);
  auto at_floor = [&] {
    return std::all_of(groups.human.begin(), groups.human.end(), [&](std::size_t e) { return counts[e] == 2; });
  };
  while (!at_floor()) {
    for (auto e : groups.human) counts[e] = counts[e] > step + 2 ? counts[e] - step : 2;
    for (auto e : groups.mouse) counts[e] = std::min(counts[e] + step, data.environments[e].n_samples());
    push_cell(plan, data, counts);
  }
  return plan;
}

SweepPlan build_fixed_total_plan(const MultiEnvDataset& data, std::size_t budget, std::size_t step,
                                 std::vector<std::uint64_t> seeds, const TrainConfig& config) {
  if (step == 0) throw ValidationError("step must be positive");
  const auto groups = split_by_organism(data);
  if (groups.human.empty() || groups.mouse.empty()) {
    throw ValidationError("fixed-total sweeps need human and mouse environments");
  }
  std::size_t human_avail = 0;
  std::size_t mouse_avail = 0;
  for (auto e : groups.human) human_avail += data.environments[e].n_samples();
  for (auto e : groups.mouse) mouse_avail += data.environments[e].n_samples();
  const std::size_t human_floor = 2 * groups.human.size();
  if (budget < human_floor || budget > human_avail + mouse_avail) {
    throw ValidationError("budget " + std::to_string(budget) + " must lie in [" + std::to_string(human_floor) + ", " +
                          std::to_string(human_avail + mouse_avail) + "]");
  }
  const std::size_t mouse_min = budget > human_avail ? budget - human_avail : 0;
  const std::size_t mouse_max = std::min(mouse_avail, budget - human_floor);
  if (mouse_min > mouse_max) throw ValidationError("no feasible human/mouse split for budget " + std::to_string(budget));

  SweepPlan plan = base_plan(SweepMode::FixedTotal, std::move(seeds), config);
  plan.total_budget = budget;
  for (std::size_t mouse = mouse_min;; mouse = std::min(mouse + step, mouse_max)) {
    // A lone mouse sample cannot form an environment.
    const std::size_t m = (mouse == 1 && mouse_max >= 2) ? 2 : mouse;
    std::vector<std::size_t> counts(data.environments.size(), 0);
    allocate(data, groups.human, budget - m, counts);
    allocate(data, groups.mouse, m, counts);
    if (plan.cells.empty() || plan.cells.back().counts != counts) push_cell(plan, data, counts);
    if (mouse == mouse_max) break;
  }
  return plan;
}

void validate(const SweepPlan& plan, const MultiEnvDataset& data) {
  if (plan.cells.empty()) throw ValidationError("sweep plan has no cells");
  if (plan.seeds.empty()) throw ValidationError("sweep plan has no seeds");
  if (plan.workers == 0) throw ValidationError("worker count must be positive");
  if (!(plan.rbo_p > 0.0 && plan.rbo_p < 1.0)) throw ValidationError("RBO persistence p must lie in (0, 1)");
  validate(plan.train_config);
  for (Metric m : plan.metrics) {
    const std::size_t k = m == Metric::Top10 ? 10 : m == Metric::Top50 ? 50 : 2;
    if (data.n_features() < k) {
      throw ValidationError("metric " + std::string(to_string(m)) + " needs at least " + std::to_string(k) +
                            " genes; dataset has " + std::to_string(data.n_features()));
    }
  }
  if (plan.mode == SweepMode::FixedTotal && !plan.total_budget) {
    throw ValidationError("fixed-total plan needs a total budget");
  }
  const std::size_t min_envs = plan.train_config.lambda_final > 0.0 ? 2 : 1;
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    const auto& cell = plan.cells[c];
    const std::string where = "cell " + std::to_string(c) + " (" + cell.label + ")";
    if (cell.counts.size() != data.environments.size()) {
      throw ValidationError(where + " does not list one count per environment");
    }
    std::size_t active = 0;
    std::size_t total = 0;
    for (std::size_t e = 0; e < cell.counts.size(); ++e) {
      const auto& env = data.environments[e];
      const auto n = cell.counts[e];
      if (n > env.n_samples()) {
        throw ValidationError(where + " asks for " + std::to_string(n) + " samples of '" + env.id + "' which has " +
                              std::to_string(env.n_samples()));
      }
      if (n == 1) throw ValidationError(where + " leaves environment '" + env.id + "' with fewer than 2 samples");
      if (plan.mode == SweepMode::Substitution && env.organism == Organism::Human && n < 2) {
        throw ValidationError(where + " drops human environment '" + env.id + "' below 2 samples");
      }
      active += n > 0 ? 1 : 0;
      total += n;
    }
    if (active < min_envs) {
      throw ValidationError(where + " has " + std::to_string(active) + " non-empty environments, training needs " +
                            std::to_string(min_envs));
    }
    if (plan.mode == SweepMode::FixedTotal && total != *plan.total_budget) {
      throw ValidationError(where + " holds " + std::to_string(total) + " samples, budget is " +
                            std::to_string(*plan.total_budget));
    }
  }
}

std::vector<std::size_t> subsample_rows(std::size_t n_rows, std::size_t count, std::uint64_t seed,
                                        std::size_t env_index) {
  if (count > n_rows) throw ValidationError("cannot draw more rows than available");
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, kSubsampleStream), env_index);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

MultiEnvDataset cell_dataset(const MultiEnvDataset& data, const Cell& cell, std::uint64_t seed) {
  MultiEnvDataset out;
  out.gene_ids = data.gene_ids;
  out.provenance = data.provenance;
  for (std::size_t e = 0; e < data.environments.size(); ++e) {
    const auto count = cell.counts.at(e);
    if (count == 0) continue;
    const auto& env = data.environments[e];
    out.environments.push_back(select_rows(env, subsample_rows(env.n_samples(), count, seed, e)));
  }
  return out;
}

const CellRun& SweepReport::run(std::size_t cell, std::size_t seed_index) const {
  return runs.at(cell * plan.seeds.size() + seed_index);
}

namespace {

struct Estimate {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

Estimate estimate(std::span<const double> samples, double level) {
  if (samples.empty()) throw ValidationError("confidence interval of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  const auto n = static_cast<double>(samples.size());
  // Offsetting by the first sample keeps constant inputs exact.
  const double anchor = samples.front();
  double shift = 0.0;
  for (double x : samples) shift += x - anchor;
  const double mean = anchor + shift / n;
  if (samples.size() == 1) return {mean, mean, mean};
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
  const double half = z * sd / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

}  // namespace

std::pair<double, double> confidence_interval(std::span<const double> samples, double level) {
  const auto e = estimate(samples, level);
  return {e.low, e.high};
}

std::string toolkit_version() { return IRMKIT_VERSION; }

SweepReport run_sweep(const MultiEnvDataset& data, const SweepPlan& plan) {
  validate(data, 1, plan.train_config.loss_kind == LossKind::Logistic);
  validate(plan, data);

  SweepReport report;
  report.plan = plan;
  report.dataset_hash = content_hash(data);
  report.toolkit_version = toolkit_version();

  const std::size_t n_cells = plan.cells.size();
  const std::size_t n_seeds = plan.seeds.size();
  report.runs.resize(n_cells * n_seeds);

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < report.runs.size(); task = next++) {
      CellRun& run = report.runs[task];
      run.cell = task / n_seeds;
      run.seed_index = task % n_seeds;
      const auto seed = plan.seeds[run.seed_index];
      const auto& cell = plan.cells[run.cell];
      try {
        TrainConfig config = plan.train_config;
        config.seed = derive_seed(seed, kTrainStream);
        const auto trained = train(cell_dataset(data, cell, seed), config);
        run.ranking = rank_features(trained.model, data.gene_ids,
                                    cell.label + "/seed=" + std::to_string(seed));
      } catch (const NumericError& e) {
        run.failed = true;
        run.error = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(plan.workers, report.runs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  std::vector<std::vector<std::string>> ids(report.runs.size());
  for (std::size_t r = 0; r < report.runs.size(); ++r) {
    if (!report.runs[r].failed) ids[r] = report.runs[r].ranking.ids();
  }
  std::vector<std::string> labels;
  for (const auto& cell : plan.cells) labels.push_back(cell.label);

  const auto side = static_cast<Eigen::Index>(n_cells);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (Metric metric : plan.metrics) {
    SimilarityMatrix m;
    m.metric = metric;
    m.labels = labels;
    m.mean = Matrix::Constant(side, side, nan);
    m.ci_low = Matrix::Constant(side, side, nan);
    m.ci_high = Matrix::Constant(side, side, nan);
    for (std::size_t i = 0; i < n_cells; ++i) {
      for (std::size_t j = i; j < n_cells; ++j) {
        std::vector<double> values;
        for (std::size_t s = 0; s < n_seeds; ++s) {
          const auto a = i * n_seeds + s;
          const auto b = j * n_seeds + s;
          if (report.runs[a].failed || report.runs[b].failed) continue;
          values.push_back(similarity(metric, ids[a], ids[b], plan.rbo_p));
        }
        if (values.empty()) continue;
        const auto est = estimate(values, 0.95);
        const auto r = static_cast<Eigen::Index>(i);
        const auto c = static_cast<Eigen::Index>(j);
        m.mean(r, c) = m.mean(c, r) = est.mean;
        m.ci_low(r, c) = m.ci_low(c, r) = est.low;
        m.ci_high(r, c) = m.ci_high(c, r) = est.high;
      }
    }
    report.matrices.push_back(std::move(m));
  }
  return report;
}

}  // namespace irmkit
