#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "irmkit/dataset.hpp"

namespace irmkit {

enum class ScmTask { Regression, Classification };

std::string_view to_string(ScmTask task);
ScmTask parse_scm_task(std::string_view text);

/// Linear structural causal model with causal features upstream of the target
/// and spurious features downstream of it. Per environment with scale s:
///
///   x_c ~ N(0, s^2 I)
///   t   = w_c^T x_c + N(0, s^2)
///   y   = t                      (regression)
///   y   = 1[t > 0]               (classification)
///   x_s = w_s * y~ + N(0, I)     y~ = t (regression) or 2y - 1 (classification)
///
/// Features are [x_c, x_s].
struct ScmSpec {
  std::size_t n_causal = 1;
  std::size_t n_spurious = 1;
  std::vector<double> env_scales{0.1, 1.0};
  std::size_t n_samples_per_env = 1000;
  ScmTask task = ScmTask::Regression;
  /// Empty means all ones.
  std::vector<double> causal_weights;
  std::vector<double> spurious_weights;
  /// Scale of the held-out test environment.
  double test_scale = 2.0;

  [[nodiscard]] std::vector<double> resolved_causal_weights() const;
  [[nodiscard]] std::vector<double> resolved_spurious_weights() const;
};

/// `min_environments` is 2 for training specs.
void validate(const ScmSpec& spec, std::size_t min_environments = 2);

/// Environment index e draws from substream e of `seed`, so appending scales
/// leaves earlier environments bit-identical.
MultiEnvDataset generate_scm_dataset(const ScmSpec& spec, std::uint64_t seed);

/// One environment at an arbitrary scale, drawn from substream `stream` of `seed`.
Environment generate_scm_environment(const ScmSpec& spec, double scale, std::uint64_t seed,
                                     std::uint64_t stream);

/// Held-out environment at spec.test_scale on a substream disjoint from the training ones.
Environment generate_scm_test_environment(const ScmSpec& spec, std::uint64_t seed);

/// Feature names: c0, c1, ..., s0, s1, ...
std::vector<std::string> scm_feature_names(const ScmSpec& spec);

enum class OracleKind { PooledLeastSquares, InvariantIdeal };

struct OracleSolution {
  Vector weights;
  double bias = 0.0;
  OracleKind kind = OracleKind::PooledLeastSquares;
};

/// Ordinary least squares with intercept on all environments stacked.
/// Throws NumericError when the Gram matrix is singular.
OracleSolution pooled_least_squares_oracle(const MultiEnvDataset& data);

/// causal weights on the causal coordinates, zero elsewhere, zero bias.
OracleSolution invariant_ideal(const ScmSpec& spec);

}  // namespace irmkit
