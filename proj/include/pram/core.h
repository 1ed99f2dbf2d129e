//
// Copyright 2026 The PRAM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Domain types shared by the whole toolkit.
//
// Orientation convention: every K x K matrix in this library is indexed
// (perturbed level, true level). Entry (i, j) of a TransitionMatrix is
// Pr(S* = i | S = j), so each column is the perturbation law of one true
// level and sums to one.

#ifndef PRAM_CORE_H_
#define PRAM_CORE_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pram/error.h"

namespace pram {

inline constexpr double kStochasticTolerance = 1e-12;
inline constexpr double kSingularDeterminant = 1e-12;
inline constexpr double kInversionResidual = 1e-9;
inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kMaxConditionNumber = 1e8;
inline constexpr double kConditionWarning = 20.0;

class TransitionMatrix {
 public:
  int k() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  // Pr(S* = perturbed | S = original).
  double operator()(int perturbed, int original) const {
    return entries_(perturbed, original);
  }
  double condition_number() const { return condition_number_; }
  // Non-fatal findings, e.g. diagonal entries below one half.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend TransitionMatrix ValidateTransition(const Eigen::MatrixXd& raw);
  TransitionMatrix() = default;

  Eigen::MatrixXd entries_;
  double condition_number_ = 1.0;
  std::vector<std::string> warnings_;
};

// Q2 = P^-1. Entry (k, i) is the weight a record observed at perturbed level
// i contributes to true level k.
class ReversionMatrix {
 public:
  int k() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(int original, int perturbed) const {
    return entries_(original, perturbed);
  }
  double condition_number() const { return condition_number_; }
  // max-norm of Q2 * P - I.
  double residual() const { return residual_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend ReversionMatrix InvertTransition(const TransitionMatrix& p);
  ReversionMatrix() = default;

  Eigen::MatrixXd entries_;
  double condition_number_ = 1.0;
  double residual_ = 0.0;
  std::vector<std::string> warnings_;
};

// Checks that `raw` is square, column-stochastic and nonsingular.
// Throws kNonStochastic or kSingular; diagonal entries below 0.5 only warn.
TransitionMatrix ValidateTransition(const Eigen::MatrixXd& raw);

// Throws kIllConditioned when the 2-norm condition number exceeds 1e8.
ReversionMatrix InvertTransition(const TransitionMatrix& p);

// P with p00 on (0,0) and p11 on (1,1).
TransitionMatrix BinaryTransition(double p00, double p11);

enum class FrequencyTag { kProper, kRawRecovered };

// A distribution over K levels. Proper vectors live on the simplex; raw
// recovered vectors sum to one but may have entries outside [0, 1].
class FrequencyVector {
 public:
  FrequencyVector(Eigen::VectorXd probs, FrequencyTag tag);

  int k() const { return static_cast<int>(probs_.size()); }
  const Eigen::VectorXd& probs() const { return probs_; }
  double operator[](int i) const { return probs_(i); }
  FrequencyTag tag() const { return tag_; }
  bool outside_simplex() const;

 private:
  Eigen::VectorXd probs_;
  FrequencyTag tag_;
};

enum class SensitiveTag { kOriginal, kPerturbed };

// Column-oriented table with numeric columns plus one categorical sensitive
// variable coded 0..K-1. The sensitive variable may carry its original
// values, its perturbed values, or both (simulation only).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string sensitive_name, int levels);

  std::size_t n() const { return n_; }
  int levels() const { return levels_; }
  const std::string& sensitive_name() const { return sensitive_name_; }

  // Throws kDimensionMismatch on a length mismatch and kInvalidArgument on
  // non-finite values or a duplicate name.
  void AddColumn(std::string name, std::vector<double> values);
  std::size_t num_columns() const { return columns_.size(); }
  const std::vector<std::string>& column_names() const { return names_; }
  std::optional<std::size_t> FindColumn(std::string_view name) const;
  // Throws kMissingColumn.
  std::size_t ColumnIndex(std::string_view name) const;
  std::span<const double> column(std::size_t index) const {
    return columns_[index];
  }
  double value(std::size_t column, std::size_t row) const {
    return columns_[column][row];
  }

  // Throw kLevelOutOfRange for values outside 0..K-1.
  void SetSensitive(SensitiveTag tag, std::vector<int> values);
  bool has(SensitiveTag tag) const;
  // Throws kInvalidArgument when the requested column is absent.
  std::span<const int> sensitive(SensitiveTag tag) const;

 private:
  void CheckLength(std::size_t length);

  std::size_t n_ = 0;
  bool sized_ = false;
  std::string sensitive_name_;
  int levels_ = 2;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::optional<std::vector<int>> original_;
  std::optional<std::vector<int>> perturbed_;
};

// One row of a Dataset.
struct Record {
  const Dataset* data;
  std::size_t row;

  double operator[](std::size_t column) const {
    return data->value(column, row);
  }
};

// U(level, record; beta) in R^d, evaluable at every hypothetical level of the
// sensitive variable regardless of what was observed for the record.
class EstimatingFunction {
 public:
  using ValueFn = std::function<void(const Record&, int level,
                                     std::span<const double> beta,
                                     std::span<double> out)>;
  // Writes dU/dbeta^T row-major: out[a * d + b] = dU_a / dbeta_b.
  using JacobianFn = std::function<void(const Record&, int level,
                                        std::span<const double> beta,
                                        std::span<double> out)>;

  EstimatingFunction(int dim, int levels, ValueFn value,
                     JacobianFn jacobian = {});

  int dim() const { return dim_; }
  int levels() const { return levels_; }
  bool has_jacobian() const { return static_cast<bool>(jacobian_); }

  void Value(const Record& record, int level, std::span<const double> beta,
             std::span<double> out) const {
    value_(record, level, beta, out);
  }
  void Jacobian(const Record& record, int level, std::span<const double> beta,
                std::span<double> out) const {
    jacobian_(record, level, beta, out);
  }

  Eigen::VectorXd Value(const Record& record, int level,
                        const Eigen::VectorXd& beta) const;

 private:
  int dim_;
  int levels_;
  ValueFn value_;
  JacobianFn jacobian_;
};

enum class Method { kProposed, kOracle, kNaive, kModel1, kModel2 };

std::string_view MethodName(Method method);
// Accepts "proposed", "oracle", "naive", "model1", "model2".
std::optional<Method> ParseMethod(std::string_view name);

struct SolverDiagnostics {
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  double jacobian_condition = 0.0;
};

struct EstimateResult {
  Method method = Method::kProposed;
  Eigen::VectorXd beta_hat;
  SolverDiagnostics diagnostics;
  // Per-record contributions phi_i at beta_hat (n x d); their average is the
  // estimating equation the estimator solved.
  Eigen::MatrixXd influence;

  // Filled in by inference::AttachCovariance. Covariance of beta_hat itself,
  // already divided by n.
  std::optional<Eigen::MatrixXd> covariance;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd ci_lower;
  Eigen::VectorXd ci_upper;
  double ci_level = 0.0;
};

}  // namespace pram

#endif  // PRAM_CORE_H_
