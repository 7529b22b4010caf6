#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "irmkit/dataset.hpp"

namespace irmkit {

enum class LossKind { Logistic, Squared };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

/// Linear representation theta^T x + bias followed by a fixed scalar classifier w0:
///   logit(x) = w0 * (theta^T x + bias)
struct LinearModel {
  Vector theta;
  double bias = 0.0;
  double w0 = 1.0;

  static LinearModel zeros(std::size_t n_features, double w0 = 1.0);
};

/// Throws ValidationError when an entry is non-finite or w0 == 0.
void validate(const LinearModel& model);

struct TrainConfig {
  LossKind loss_kind = LossKind::Logistic;
  /// Penalty weight after the warm-up phase. 0 gives plain ERM for the whole run.
  double lambda_final = 1e4;
  /// Leading iterations that use a penalty weight of 1.
  std::int64_t anneal_iters = 500;
  std::int64_t total_iters = 5000;
  double learning_rate = 1e-3;
  /// Weight of ||theta||^2; the bias is not regularized.
  double l2_weight = 0.0;
  std::uint64_t seed = 0;
  /// Standard deviation of the Gaussian theta initialization.
  double init_scale = 0.01;
  double w0 = 1.0;

  /// Penalty weight used at iteration `iteration`.
  [[nodiscard]] double lambda_at(std::int64_t iteration) const;
};

void validate(const TrainConfig& config);

struct TracePoint {
  std::int64_t iteration = 0;
  double objective = 0.0;
  /// Unweighted sum of per-environment penalties.
  double penalty = 0.0;
};

struct TrainedModel {
  LinearModel model;
  std::vector<TracePoint> trace;
  TrainConfig config;
};

struct Gradient {
  Vector theta;
  double bias = 0.0;
};

/// z_i = w0 * (theta^T x_i + bias) for every row.
Vector predict_logits(const LinearModel& model, const Matrix& features);

/// Mean loss of the environment when the classifier scalar is `w` instead of model.w0.
double environment_risk(const LinearModel& model, const Environment& env, double w, LossKind loss);

/// Squared derivative of the environment risk with respect to the classifier
/// scalar, evaluated at w = model.w0.
double irm_penalty(const LinearModel& model, const Environment& env, LossKind loss);

/// sum_e [R_e + lambda * penalty_e] + l2_weight * ||theta||^2, divided by lambda
/// when lambda > 1.
double total_objective(const LinearModel& model, const MultiEnvDataset& data, double lambda,
                       LossKind loss, double l2_weight = 0.0);

Gradient objective_gradient(const LinearModel& model, const MultiEnvDataset& data, double lambda,
                            LossKind loss, double l2_weight = 0.0);

/// Objective, summed penalty and gradient from a single pass over the data.
struct Evaluation {
  double objective = 0.0;
  double penalty = 0.0;
  Gradient gradient;
};

Evaluation evaluate(const LinearModel& model, const MultiEnvDataset& data, double lambda, LossKind loss,
                    double l2_weight = 0.0, bool with_gradient = true);

/// Full-batch gradient descent from a seeded Gaussian initialization.
/// Deterministic in (data, config). Throws NumericError when the objective
/// or gradient stops being finite.
TrainedModel train(const MultiEnvDataset& data, const TrainConfig& config);

/// Same schedule, starting from an explicit model instead of the seeded draw.
TrainedModel train(const MultiEnvDataset& data, const TrainConfig& config, LinearModel initial);

/// ERM baseline: `train` with lambda_final forced to 0.
TrainedModel train_erm(const MultiEnvDataset& data, TrainConfig config);

/// Fraction of rows whose logit sign agrees with the binary label (logit > 0 predicts 1).
double accuracy(const LinearModel& model, const Environment& env);

}  // namespace irmkit
