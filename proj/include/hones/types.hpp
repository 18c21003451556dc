#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hones {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidProblem : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A_SS could not be factorized or its condition estimate exceeds the cap.
class SingularSubmatrix : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// D - alpha * D_g^2 collapsed during a matrix-leg step.
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

/// Schur pivot (expand) or M_jj (shrink) is not safely positive.
class DegeneratePivot : public Error {
 public:
  using Error::Error;
};

class EmptySupport : public Error {
 public:
  using Error::Error;
};

class CycleLimit : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what + " (row " + std::to_string(row) + ", column " +
              std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class EmptySeries : public Error {
 public:
  using Error::Error;
};

class NonPositivePrice : public Error {
 public:
  using Error::Error;
};

/// Ordered index set S over {0, ..., n-1} with O(1) membership.
class Support {
 public:
  Support() = default;
  explicit Support(Index n) : member_(static_cast<std::size_t>(n), 0) {}
  Support(Index n, std::vector<Index> indices);

  static Support full(Index n);
  /// Indices i with values[i] > threshold.
  static Support positive_part(const Vec& values, double threshold);

  Index dim() const { return static_cast<Index>(member_.size()); }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool contains(Index j) const { return member_[static_cast<std::size_t>(j)] != 0; }

  void insert(Index j);
  void erase(Index j);

  std::span<const Index> indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  Index operator[](std::size_t k) const { return indices_[k]; }

  /// Indices of the complement, increasing.
  std::vector<Index> complement() const;

  bool operator==(const Support& other) const { return indices_ == other.indices_; }

 private:
  std::vector<Index> indices_;
  std::vector<char> member_;
};

/// |a \ b| + |b \ a|.
Index symmetric_difference_size(const Support& a, const Support& b);

}  // namespace hones
