#include <cmath>
#include <string>

#include "irmkit/error.hpp"
#include "irmkit/model.hpp"
#include "irmkit/rng.hpp"

namespace irmkit {

namespace {
// Substream of TrainConfig::seed that draws the initial theta.
constexpr std::uint64_t kInitStream = 0x696e6974;  // "init"
}  // namespace

double TrainConfig::lambda_at(std::int64_t iteration) const {
  if (lambda_final == 0.0) return 0.0;
  return iteration < anneal_iters ? 1.0 : lambda_final;
}

void validate(const TrainConfig& c) {
  if (!(c.lambda_final >= 0.0) || !std::isfinite(c.lambda_final)) {
    throw ValidationError("lambda must be a finite non-negative number");
  }
  if (c.total_iters <= 0) throw ValidationError("iteration count must be positive");
  if (c.anneal_iters < 0 || c.anneal_iters > c.total_iters) {
    throw ValidationError("anneal iterations must lie in [0, total iterations]");
  }
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw ValidationError("learning rate must be positive");
  }
  if (!(c.l2_weight >= 0.0) || !std::isfinite(c.l2_weight)) throw ValidationError("l2 weight must be non-negative");
  if (!(c.init_scale >= 0.0) || !std::isfinite(c.init_scale)) {
    throw ValidationError("init scale must be non-negative");
  }
  if (c.w0 == 0.0 || !std::isfinite(c.w0)) throw ValidationError("w0 must be finite and non-zero");
}

TrainedModel train(const MultiEnvDataset& data, const TrainConfig& config) {
  validate(config);
  Rng rng(config.seed, kInitStream);
  LinearModel init = LinearModel::zeros(data.n_features(), config.w0);
  for (Eigen::Index j = 0; j < init.theta.size(); ++j) init.theta[j] = config.init_scale * rng.normal();
  return train(data, config, std::move(init));
}

TrainedModel train(const MultiEnvDataset& data, const TrainConfig& config, LinearModel initial) {
  validate(config);
  validate(data, config.lambda_final > 0.0 ? 2 : 1, config.loss_kind == LossKind::Logistic);
  if (initial.theta.size() != static_cast<Eigen::Index>(data.n_features())) {
    throw ValidationError("initial model does not match the dataset's feature count");
  }
  initial.w0 = config.w0;
  validate(initial);

  TrainedModel out;
  out.config = config;
  out.model = std::move(initial);
  out.trace.reserve(static_cast<std::size_t>(config.total_iters));
  auto& m = out.model;
  for (std::int64_t it = 0; it < config.total_iters; ++it) {
    const double lambda = config.lambda_at(it);
    const Evaluation ev = evaluate(m, data, lambda, config.loss_kind, config.l2_weight, true);
    if (!std::isfinite(ev.objective) || !ev.gradient.theta.allFinite() || !std::isfinite(ev.gradient.bias)) {
      throw NumericError("training diverged at iteration " + std::to_string(it) +
                         " (non-finite objective); reduce the learning rate");
    }
    out.trace.push_back({it, ev.objective, ev.penalty});
    m.theta -= config.learning_rate * ev.gradient.theta;
    m.bias -= config.learning_rate * ev.gradient.bias;
  }
  if (!m.theta.allFinite() || !std::isfinite(m.bias)) {
    throw NumericError("training diverged on the final update; reduce the learning rate");
  }
  return out;
}

TrainedModel train_erm(const MultiEnvDataset& data, TrainConfig config) {
  config.lambda_final = 0.0;
  return train(data, config);
}

}  // namespace irmkit
