/* Copyright 2026 The MTGRU Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Dense row-major matrices, the elementwise kernels used by the recurrent
// cells, and a reproducible random number generator.
//
// Vectors are represented as single-column matrices; a batch of vectors is a
// matrix whose columns are the batch members. All kernels are double
// precision and single-threaded, with a fixed summation order so that results
// are bit-stable across runs.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mtgru {

/// Thrown when operand shapes are incompatible.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a scalar argument lies outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> values);
  static Matrix zeros_like(const Matrix& m) { return Matrix(m.rows(), m.cols()); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  /// Copies column `c` out as a plain vector.
  std::vector<double> column_values(std::size_t c) const;

  void fill(double v);
  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& other) const = default;

  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

/// a·b. Throws ShapeError naming both shapes when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// acc += a·bᵀ. Used for weight-gradient accumulation.
void add_matmul_nt(Matrix& acc, const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix sigmoid(const Matrix& x);
Matrix tanh(const Matrix& x);
double sigmoid(double v);

double frobenius_norm_squared(const Matrix& m);
double max_abs(const Matrix& m);
bool all_finite(const Matrix& m);

/// Numerically stable softmax (max subtraction). Throws std::invalid_argument on empty input.
std::vector<double> softmax(std::span<const double> logits);

inline constexpr double kProbabilityFloor = 1e-12;

/// -ln(max(probs[target], 1e-12)).
double cross_entropy(std::span<const double> probs, std::size_t target_index);

/// SplitMix64: state advances by the golden-ratio increment and each output is
/// a fixed bijective mix of the new state, so a seed fully determines the
/// stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

/// Uniform samples in ±sqrt(6/(rows+cols)).
Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);
double parse_double(std::string_view text);

/// "rows cols" line followed by one line of space-separated values per row.
void write_matrix(std::ostream& out, const Matrix& m);
/// Reads the format produced by write_matrix. Throws std::runtime_error on malformed input.
Matrix read_matrix(std::istream& in);

}  // namespace mtgru
