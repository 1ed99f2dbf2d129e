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

#include "pram/core.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace pram {
namespace {

double ConditionNumber(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonStochastic: return "NonStochastic";
    case ErrorCode::kSingular: return "Singular";
    case ErrorCode::kIllConditioned: return "IllConditioned";
    case ErrorCode::kLevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroMarginal: return "ZeroMarginal";
    case ErrorCode::kNonBinaryResponse: return "NonBinaryResponse";
    case ErrorCode::kMissingLevel: return "MissingLevel";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kSingularJacobian: return "SingularJacobian";
    case ErrorCode::kSingularOmega: return "SingularOmega";
    case ErrorCode::kDegenerateModel: return "DegenerateModel";
    case ErrorCode::kTooManyFailures: return "TooManyFailures";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kZeroDenominator: return "ZeroDenominator";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

TransitionMatrix ValidateTransition(const Eigen::MatrixXd& raw) {
  if (raw.rows() != raw.cols() || raw.rows() < 2) {
    std::ostringstream msg;
    msg << "transition matrix must be square with K >= 2, got " << raw.rows()
        << "x" << raw.cols();
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const int k = static_cast<int>(raw.rows());
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      const double v = raw(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream msg;
        msg << "entry (" << i << "," << j << ") = " << v
            << " is outside [0,1]";
        throw Error(ErrorCode::kNonStochastic, msg.str());
      }
    }
    const double sum = raw.col(j).sum();
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "column " << j << " sums to " << sum << ", expected 1";
      throw Error(ErrorCode::kNonStochastic, msg.str());
    }
  }
  const double det = raw.fullPivLu().determinant();
  if (std::abs(det) <= kSingularDeterminant) {
    std::ostringstream msg;
    msg << "transition matrix is singular (|det| = " << std::abs(det) << ")";
    throw Error(ErrorCode::kSingular, msg.str());
  }

  TransitionMatrix p;
  p.entries_ = raw;
  p.condition_number_ = ConditionNumber(raw);
  for (int j = 0; j < k; ++j) {
    if (raw(j, j) < 0.5) {
      std::ostringstream msg;
      msg << "diagonal entry " << j << " = " << raw(j, j)
          << " is below 0.5; most records may change level";
      p.warnings_.push_back(msg.str());
    }
  }
  return p;
}

ReversionMatrix InvertTransition(const TransitionMatrix& p) {
  const double cond = p.condition_number();
  if (!(cond <= kMaxConditionNumber)) {
    std::ostringstream msg;
    msg << "transition matrix condition number " << cond << " exceeds "
        << kMaxConditionNumber;
    throw Error(ErrorCode::kIllConditioned, msg.str());
  }
  ReversionMatrix q;
  q.entries_ = p.entries().fullPivLu().inverse();
  const int k = p.k();
  q.residual_ = (q.entries_ * p.entries() - Eigen::MatrixXd::Identity(k, k))
                    .cwiseAbs()
                    .maxCoeff();
  q.condition_number_ = cond;
  if (q.residual_ >= kInversionResidual) {
    std::ostringstream msg;
    msg << "inversion residual " << q.residual_ << " exceeds "
        << kInversionResidual;
    throw Error(ErrorCode::kIllConditioned, msg.str());
  }
  if (cond > kConditionWarning) {
    std::ostringstream msg;
    msg << "condition number " << cond
        << " is large; inverse weights amplify noise";
    q.warnings_.push_back(msg.str());
  }
  return q;
}

TransitionMatrix BinaryTransition(double p00, double p11) {
  Eigen::MatrixXd raw(2, 2);
  raw << p00, 1.0 - p11, 1.0 - p00, p11;
  return ValidateTransition(raw);
}

FrequencyVector::FrequencyVector(Eigen::VectorXd probs, FrequencyTag tag)
    : probs_(std::move(probs)), tag_(tag) {
  if (probs_.size() < 1 || !probs_.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                "frequency vector must be non-empty and finite");
  }
  if (std::abs(probs_.sum() - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "frequencies sum to " << probs_.sum() << ", expected 1";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  if (tag_ == FrequencyTag::kProper && outside_simplex()) {
    throw Error(ErrorCode::kInvalidArgument,
                "proper frequency vector has entries outside [0,1]");
  }
}

bool FrequencyVector::outside_simplex() const {
  return probs_.minCoeff() < 0.0 || probs_.maxCoeff() > 1.0;
}

Dataset::Dataset(std::string sensitive_name, int levels)
    : sensitive_name_(std::move(sensitive_name)), levels_(levels) {
  if (levels < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "sensitive variable needs at least 2 levels");
  }
}

void Dataset::CheckLength(std::size_t length) {
  if (!sized_) {
    n_ = length;
    sized_ = true;
  } else if (length != n_) {
    std::ostringstream msg;
    msg << "column length " << length << " does not match n = " << n_;
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
}

void Dataset::AddColumn(std::string name, std::vector<double> values) {
  if (FindColumn(name)) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate column '" + name + "'");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column '" + name + "' has non-finite values");
    }
  }
  CheckLength(values.size());
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

std::optional<std::size_t> Dataset::FindColumn(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Dataset::ColumnIndex(std::string_view name) const {
  if (auto idx = FindColumn(name)) return *idx;
  throw Error(ErrorCode::kMissingColumn,
              "column '" + std::string(name) + "' not found");
}

void Dataset::SetSensitive(SensitiveTag tag, std::vector<int> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0 || values[i] >= levels_) {
      std::ostringstream msg;
      msg << "sensitive value " << values[i] << " at row " << i
          << " is outside 0.." << levels_ - 1;
      throw Error(ErrorCode::kLevelOutOfRange, msg.str());
    }
  }
  CheckLength(values.size());
  if (tag == SensitiveTag::kOriginal) {
    original_ = std::move(values);
  } else {
    perturbed_ = std::move(values);
  }
}

bool Dataset::has(SensitiveTag tag) const {
  return tag == SensitiveTag::kOriginal ? original_.has_value()
                                        : perturbed_.has_value();
}

std::span<const int> Dataset::sensitive(SensitiveTag tag) const {
  const auto& column = tag == SensitiveTag::kOriginal ? original_ : perturbed_;
  if (!column) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("dataset has no ") +
                    (tag == SensitiveTag::kOriginal ? "original" : "perturbed") +
                    " values for sensitive variable '" + sensitive_name_ +
                    "'");
  }
  return *column;
}

EstimatingFunction::EstimatingFunction(int dim, int levels, ValueFn value,
                                       JacobianFn jacobian)
    : dim_(dim),
      levels_(levels),
      value_(std::move(value)),
      jacobian_(std::move(jacobian)) {
  if (dim < 1 || levels < 2 || !value_) {
    throw Error(ErrorCode::kInvalidArgument,
                "estimating function needs d >= 1, K >= 2 and an evaluator");
  }
}

Eigen::VectorXd EstimatingFunction::Value(const Record& record, int level,
                                          const Eigen::VectorXd& beta) const {
  Eigen::VectorXd out(dim_);
  value_(record, level, std::span<const double>(beta.data(), beta.size()),
         std::span<double>(out.data(), out.size()));
  return out;
}

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kProposed: return "proposed";
    case Method::kOracle: return "oracle";
    case Method::kNaive: return "naive";
    case Method::kModel1: return "model1";
    case Method::kModel2: return "model2";
  }
  return "unknown";
}

std::optional<Method> ParseMethod(std::string_view name) {
  for (Method m : {Method::kProposed, Method::kOracle, Method::kNaive,
                   Method::kModel1, Method::kModel2}) {
    if (MethodName(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace pram
