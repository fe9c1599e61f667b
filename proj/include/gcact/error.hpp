#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gcact {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value is outside its documented domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Design matrix has fewer independent columns than it declares.
class RankDeficient : public Error {
 public:
  RankDeficient(std::size_t rank, std::size_t cols)
      : Error("rank-deficient design matrix: numerical rank " + std::to_string(rank) + " of " +
              std::to_string(cols) + " columns"),
        rank_(rank),
        cols_(cols) {}

  std::size_t rank() const noexcept { return rank_; }
  std::size_t cols() const noexcept { return cols_; }

 private:
  std::size_t rank_;
  std::size_t cols_;
};

/// Gini index requested for a vector with zero l1 norm.
class UndefinedSparsity : public Error {
 public:
  using Error::Error;
};

}  // namespace gcact
