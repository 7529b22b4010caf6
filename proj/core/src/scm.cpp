#include "irmkit/scm.hpp"

#include <charconv>
#include <cmath>

#include <Eigen/Cholesky>

#include "irmkit/error.hpp"
#include "irmkit/rng.hpp"

namespace irmkit {

namespace {
// Test environments draw from a stream far above any environment index.
constexpr std::uint64_t kTestStream = 0x7465737400000000ULL;  // "test"

std::string format_scale(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}
}  // namespace

std::string_view to_string(ScmTask task) {
  return task == ScmTask::Regression ? "regression" : "classification";
}

ScmTask parse_scm_task(std::string_view text) {
  if (text == "regression") return ScmTask::Regression;
  if (text == "classification") return ScmTask::Classification;
  throw ValidationError("unknown SCM task '" + std::string(text) + "'");
}

std::vector<double> ScmSpec::resolved_causal_weights() const {
  return causal_weights.empty() ? std::vector<double>(n_causal, 1.0) : causal_weights;
}

std::vector<double> ScmSpec::resolved_spurious_weights() const {
  return spurious_weights.empty() ? std::vector<double>(n_spurious, 1.0) : spurious_weights;
}

void validate(const ScmSpec& spec, std::size_t min_environments) {
  if (spec.n_causal == 0) throw ValidationError("n_causal must be positive");
  if (spec.n_spurious == 0) throw ValidationError("n_spurious must be positive");
  if (spec.n_samples_per_env == 0) throw ValidationError("n_samples_per_env must be positive");
  if (spec.env_scales.size() < min_environments) {
    throw ValidationError("env_scales needs at least " + std::to_string(min_environments) + " entries");
  }
  for (double s : spec.env_scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("environment scales must be positive");
  }
  if (!(spec.test_scale > 0.0) || !std::isfinite(spec.test_scale)) {
    throw ValidationError("test_scale must be positive");
  }
  if (!spec.causal_weights.empty() && spec.causal_weights.size() != spec.n_causal) {
    throw ValidationError("causal_weights length must equal n_causal");
  }
  if (!spec.spurious_weights.empty() && spec.spurious_weights.size() != spec.n_spurious) {
    throw ValidationError("spurious_weights length must equal n_spurious");
  }
  for (double w : spec.causal_weights) {
    if (!std::isfinite(w)) throw ValidationError("causal_weights must be finite");
  }
  for (double w : spec.spurious_weights) {
    if (!std::isfinite(w)) throw ValidationError("spurious_weights must be finite");
  }
}

std::vector<std::string> scm_feature_names(const ScmSpec& spec) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < spec.n_causal; ++j) names.push_back("c" + std::to_string(j));
  for (std::size_t j = 0; j < spec.n_spurious; ++j) names.push_back("s" + std::to_string(j));
  return names;
}

Environment generate_scm_environment(const ScmSpec& spec, double scale, std::uint64_t seed,
                                     std::uint64_t stream) {
  validate(spec, 0);
  const auto wc = spec.resolved_causal_weights();
  const auto ws = spec.resolved_spurious_weights();
  const auto n = static_cast<Eigen::Index>(spec.n_samples_per_env);
  const auto nc = static_cast<Eigen::Index>(spec.n_causal);
  const auto ns = static_cast<Eigen::Index>(spec.n_spurious);

  Rng rng(seed, stream);
  Environment env;
  env.id = "sigma=" + format_scale(scale);
  env.organism = Organism::Synthetic;
  env.features.resize(n, nc + ns);
  env.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = 0.0;
    for (Eigen::Index j = 0; j < nc; ++j) {
      const double x = scale * rng.normal();
      env.features(i, j) = x;
      t += wc[static_cast<std::size_t>(j)] * x;
    }
    t += scale * rng.normal();
    double anchor = t;
    if (spec.task == ScmTask::Regression) {
      env.labels[i] = t;
    } else {
      env.labels[i] = t > 0.0 ? 1.0 : 0.0;
      anchor = 2.0 * env.labels[i] - 1.0;
    }
    for (Eigen::Index j = 0; j < ns; ++j) {
      env.features(i, nc + j) = ws[static_cast<std::size_t>(j)] * anchor + rng.normal();
    }
  }
  return env;
}

MultiEnvDataset generate_scm_dataset(const ScmSpec& spec, std::uint64_t seed) {
  validate(spec, 1);
  MultiEnvDataset data;
  data.gene_ids = scm_feature_names(spec);
  data.provenance.steps.push_back("scm");
  for (std::size_t e = 0; e < spec.env_scales.size(); ++e) {
    data.environments.push_back(generate_scm_environment(spec, spec.env_scales[e], seed, e));
  }
  return data;
}

Environment generate_scm_test_environment(const ScmSpec& spec, std::uint64_t seed) {
  return generate_scm_environment(spec, spec.test_scale, seed, kTestStream);
}

OracleSolution pooled_least_squares_oracle(const MultiEnvDataset& data) {
  validate(data, 1);
  const auto p = static_cast<Eigen::Index>(data.n_features());
  // Normal equations on [x, 1].
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd row(p + 1);
  for (const auto& env : data.environments) {
    for (Eigen::Index i = 0; i < env.features.rows(); ++i) {
      row.head(p) = env.features.row(i).transpose();
      row[p] = 1.0;
      gram.selfadjointView<Eigen::Lower>().rankUpdate(row);
      rhs += env.labels[i] * row;
    }
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double scale = gram.diagonal().cwiseAbs().maxCoeff();
  const auto& d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.cwiseAbs().minCoeff() <= 1e-12 * std::max(scale, 1.0)) {
    throw NumericError("pooled Gram matrix is singular");
  }
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  OracleSolution out;
  out.kind = OracleKind::PooledLeastSquares;
  out.weights = beta.head(p);
  out.bias = beta[p];
  return out;
}

OracleSolution invariant_ideal(const ScmSpec& spec) {
  validate(spec, 0);
  OracleSolution out;
  out.kind = OracleKind::InvariantIdeal;
  out.weights = Vector::Zero(static_cast<Eigen::Index>(spec.n_causal + spec.n_spurious));
  const auto wc = spec.resolved_causal_weights();
  for (std::size_t j = 0; j < wc.size(); ++j) out.weights[static_cast<Eigen::Index>(j)] = wc[j];
  return out;
}

}  // namespace irmkit
