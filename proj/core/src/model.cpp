#include "irmkit/model.hpp"

#include <algorithm>
#include <cmath>

#include "irmkit/error.hpp"

namespace irmkit {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::Logistic ? "logistic" : "squared";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "logistic") return LossKind::Logistic;
  if (text == "squared") return LossKind::Squared;
  throw ValidationError("unknown loss kind '" + std::string(text) + "' (expected logistic or squared)");
}

LinearModel LinearModel::zeros(std::size_t n_features, double w0) {
  return LinearModel{Vector::Zero(static_cast<Eigen::Index>(n_features)), 0.0, w0};
}

void validate(const LinearModel& model) {
  if (!model.theta.allFinite() || !std::isfinite(model.bias) || !std::isfinite(model.w0)) {
    throw ValidationError("model has non-finite parameters");
  }
  if (model.w0 == 0.0) throw ValidationError("classifier scalar w0 must be non-zero");
}

namespace {

void check_dims(const LinearModel& model, const Matrix& features) {
  if (features.cols() != model.theta.size()) {
    throw ValidationError("feature matrix has " + std::to_string(features.cols()) + " columns, model has " +
                          std::to_string(model.theta.size()) + " weights");
  }
}

void check_env(const LinearModel& model, const Environment& env) {
  if (env.features.rows() == 0) throw ValidationError("environment '" + env.id + "' is empty");
  check_dims(model, env.features);
}

// log(1 + exp(s)) without overflow.
double softplus(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

// theta^T x + bias, accumulated left to right.
double raw_score(const LinearModel& model, const double* x) {
  double z = model.bias;
  for (Eigen::Index j = 0; j < model.theta.size(); ++j) z += model.theta[j] * x[j];
  return z;
}

const double* row_ptr(const Matrix& features, Eigen::Index row) {
  return features.data() + row * features.cols();
}

// Per-environment means, summed in ascending sample order:
//   risk      R(w0)
//   slope     dR/dw at w0
//   grad_*    gradients of R and of the slope with respect to (theta, bias)
struct EnvTerms {
  double risk = 0.0;
  double slope = 0.0;
  Vector grad_risk;
  double grad_risk_bias = 0.0;
  Vector grad_slope;
  double grad_slope_bias = 0.0;
};

EnvTerms env_terms(const LinearModel& model, const Environment& env, LossKind loss, bool with_gradient) {
  check_env(model, env);
  const auto n = env.features.rows();
  const auto p = env.features.cols();
  const double w0 = model.w0;
    EnvTerms t;
  if (with_gradient) {
    t.grad_risk = Vector::Zero(p);
    t.grad_slope = Vector::Zero(p);
  }
  double* grad_risk = t.grad_risk.data();
  double* grad_slope = t.grad_slope.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* x = row_ptr(env.features, i);
    const double z = raw_score(model, x);
    const double s = w0 * z;
    const double y = env.labels[i];
    double risk_coef = 0.0;
    double slope_coef = 0.0;
    if (loss == LossKind::Logistic) {
      // One exponential serves both the loss and the sigmoid.
      const double e = std::exp(-std::abs(s));
      const double prob = s >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      t.risk += std::max(s, 0.0) + std::log1p(e) - y * s;
      t.slope += (prob - y) * z;
      risk_coef = (prob - y) * w0;
      slope_coef = prob * (1.0 - prob) * w0 * z + (prob - y);
    } else {
      const double r = s - y;
      t.risk += r * r;
      t.slope += 2.0 * r * z;
      risk_coef = 2.0 * r * w0;
      slope_coef = 2.0 * (w0 * z + r);
    }
    if (with_gradient) {
      for (Eigen::Index j = 0; j < p; ++j) {
        grad_risk[j] += risk_coef * x[j];
        grad_slope[j] += slope_coef * x[j];
      }
      t.grad_risk_bias += risk_coef;
      t.grad_slope_bias += slope_coef;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  t.risk *= inv_n;
  t.slope *= inv_n;
  if (with_gradient) {
    t.grad_risk *= inv_n;
    t.grad_risk_bias *= inv_n;
    t.grad_slope *= inv_n;
    t.grad_slope_bias *= inv_n;
  }
  return t;
}

}  // namespace

Vector predict_logits(const LinearModel& model, const Matrix& features) {
  check_dims(model, features);
  Vector z(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) z[i] = model.w0 * raw_score(model, row_ptr(features, i));
  return z;
}

double environment_risk(const LinearModel& model, const Environment& env, double w, LossKind loss) {
  check_env(model, env);
  if (!std::isfinite(w)) throw ValidationError("classifier scalar must be finite");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < env.features.rows(); ++i) {
    const double s = w * raw_score(model, row_ptr(env.features, i));
    const double y = env.labels[i];
    if (loss == LossKind::Logistic) {
      sum += softplus(s) - y * s;
    } else {
      sum += (s - y) * (s - y);
    }
  }
  return sum / static_cast<double>(env.features.rows());
}

double irm_penalty(const LinearModel& model, const Environment& env, LossKind loss) {
  const double slope = env_terms(model, env, loss, false).slope;
  return slope * slope;
}

Evaluation evaluate(const LinearModel& model, const MultiEnvDataset& data, double lambda, LossKind loss,
                    double l2_weight, bool with_gradient) {
  if (!(lambda >= 0.0)) throw ValidationError("penalty weight must be non-negative");
  if (!(l2_weight >= 0.0)) throw ValidationError("l2 weight must be non-negative");
  Evaluation ev;
  if (with_gradient) ev.gradient.theta = Vector::Zero(model.theta.size());
  for (const auto& env : data.environments) {
    const EnvTerms t = env_terms(model, env, loss, with_gradient);
    const double penalty = t.slope * t.slope;
    ev.objective += t.risk + lambda * penalty;
    ev.penalty += penalty;
    if (with_gradient) {
      ev.gradient.theta += t.grad_risk + (lambda * 2.0 * t.slope) * t.grad_slope;
      ev.gradient.bias += t.grad_risk_bias + lambda * 2.0 * t.slope * t.grad_slope_bias;
    }
  }
  if (l2_weight > 0.0) {
    ev.objective += l2_weight * model.theta.squaredNorm();
    if (with_gradient) ev.gradient.theta += (2.0 * l2_weight) * model.theta;
  }
  if (lambda > 1.0) {
    ev.objective /= lambda;
    if (with_gradient) {
      ev.gradient.theta /= lambda;
      ev.gradient.bias /= lambda;
    }
  }
  return ev;
}

double total_objective(const LinearModel& model, const MultiEnvDataset& data, double lambda, LossKind loss,
                       double l2_weight) {
  return evaluate(model, data, lambda, loss, l2_weight, false).objective;
}

Gradient objective_gradient(const LinearModel& model, const MultiEnvDataset& data, double lambda,
                            LossKind loss, double l2_weight) {
  return evaluate(model, data, lambda, loss, l2_weight, true).gradient;
}

double accuracy(const LinearModel& model, const Environment& env) {
  const Vector z = predict_logits(model, env.features);
  if (z.size() == 0) throw ValidationError("environment '" + env.id + "' is empty");
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const bool predicted = z[i] > 0.0;
    if (predicted == (env.labels[i] > 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(z.size());
}

}  // namespace irmkit
