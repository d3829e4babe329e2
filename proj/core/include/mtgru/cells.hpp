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

// GRU and multiple-timescale GRU (MTGRU) single-step dynamics with
// hand-derived gradients.
//
// Forward, per step:
//   r = σ(W_xr x + W_hr h_prev)
//   z = σ(W_xz x + W_hz h_prev)
//   u = tanh(W_xu x + W_hu (r ⊙ h_prev))
//   h = ((1 − z) ⊙ h_prev + z ⊙ u) / τ + (1 − 1/τ) h_prev
//
// τ = 1 is the plain GRU. The cell has no bias vectors.
//
// All vectors are column matrices; several columns form a batch and every
// column is processed independently.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mtgru/numkit.hpp"

namespace mtgru {

struct CellWeights {
  Matrix W_xr, W_xz, W_xu;  // hidden × input
  Matrix W_hr, W_hz, W_hu;  // hidden × hidden

  static CellWeights random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
  static CellWeights zeros(std::size_t input_dim, std::size_t hidden_dim);

  std::size_t input_dim() const { return W_xr.cols(); }
  std::size_t hidden_dim() const { return W_hr.rows(); }

  /// Throws ShapeError unless the six matrices agree on (input, hidden).
  void validate() const;

  static constexpr std::array<std::string_view, 6> kNames = {"W_xr", "W_xz", "W_xu",
                                                             "W_hr", "W_hz", "W_hu"};
  std::array<Matrix*, 6> matrices() { return {&W_xr, &W_xz, &W_xu, &W_hr, &W_hz, &W_hu}; }
  std::array<const Matrix*, 6> matrices() const {
    return {&W_xr, &W_xz, &W_xu, &W_hr, &W_hz, &W_hu};
  }

  CellWeights& operator+=(const CellWeights& other);
  CellWeights& operator*=(double s);
  bool operator==(const CellWeights&) const = default;
};

/// Everything the backward pass needs from one forward step.
struct StepCache {
  Matrix x;
  Matrix h_prev;
  Matrix r, z, u;
  Matrix pre_r, pre_z, pre_u;
  double tau = 1.0;
  /// Per-column activity flags; empty means every column is active. Inactive
  /// columns pass h_prev through unchanged (used for padded batches).
  std::vector<unsigned char> active;

  bool column_active(std::size_t c) const { return active.empty() || active[c] != 0; }
};

struct StepResult {
  Matrix h;
  StepCache cache;
};

struct StepGrads {
  Matrix d_h_prev;
  Matrix d_x;
  CellWeights d_w;
};

/// The five summands of ∂E/∂h_{t-1}. Used to switch individual terms off when
/// checking that the gradient checker actually detects a broken derivation.
enum class HiddenGradTerm : unsigned {
  UpdateGate = 1u << 0,  // through W_hz
  Candidate = 1u << 1,   // through W_hu, gated by r
  ResetGate = 1u << 2,   // through W_hr
  Carry = 1u << 3,       // (1/τ)(1 − z) ⊙ δh
  Leak = 1u << 4,        // (1 − 1/τ) δh
};

struct BackwardTerms {
  unsigned enabled = 0x1f;
  bool negate_leak = false;

  bool has(HiddenGradTerm t) const { return (enabled & static_cast<unsigned>(t)) != 0; }
  static BackwardTerms all() { return {}; }
  static BackwardTerms without(HiddenGradTerm t) {
    BackwardTerms b;
    b.enabled &= ~static_cast<unsigned>(t);
    return b;
  }
};

inline constexpr std::array<HiddenGradTerm, 5> kHiddenGradTerms = {
    HiddenGradTerm::UpdateGate, HiddenGradTerm::Candidate, HiddenGradTerm::ResetGate,
    HiddenGradTerm::Carry, HiddenGradTerm::Leak};

std::string_view term_name(HiddenGradTerm t);

/// Throws DomainError for τ < 1 (or non-finite) and ShapeError for inconsistent dimensions.
StepResult mtgru_forward(const Matrix& x, const Matrix& h_prev, const CellWeights& w, double tau);

/// The plain GRU step, written independently of mtgru_forward.
StepResult gru_forward(const Matrix& x, const Matrix& h_prev, const CellWeights& w);

/// Gradients of one step given δE/δh_t. d_h_prev carries the five summands of
/// the derived MTGRU recurrence; d_x and the weight gradients follow from the
/// same chain rule.
StepGrads mtgru_backward(const Matrix& d_h, const StepCache& cache, const CellWeights& w,
                         const BackwardTerms& terms = BackwardTerms::all());

/// Backward of the plain GRU, derived separately (no τ anywhere).
StepGrads gru_backward(const Matrix& d_h, const StepCache& cache, const CellWeights& w);

/// Overwrites inactive columns of `h` with the matching columns of
/// cache.h_prev and records the mask in the cache.
void freeze_inactive_columns(Matrix& h, StepCache& cache, std::vector<unsigned char> active);

/// Relative error |a − b| / max(|a|, |b|, 1e-8).
double relative_error(double a, double b);

/// Central finite differences of L = Σ h against mtgru_backward, over every
/// weight, input, and h_prev coordinate. Returns the maximum relative error.
/// The reference loss is an independent long double forward pass, so the
/// differences stay well above double roundoff for small gradients.
/// `epsilon` must lie in [1e-7, 1e-3].
double finite_diff_check(const CellWeights& w, const Matrix& x, const Matrix& h_prev, double tau,
                         double epsilon = 1e-5,
                         const BackwardTerms& terms = BackwardTerms::all());

struct UnrollGrads {
  Matrix d_h0;               // gradient with respect to the initial state
  std::vector<Matrix> d_x;   // one per step, same order as the caches
  CellWeights d_w;           // summed over steps
};

/// Backpropagation through time over caches ordered t = 1..T. `d_h_final` is
/// δE/δh_T; `step_d_h`, when non-empty, adds an external gradient to every
/// h_t (for example from an output projection or a layer above).
UnrollGrads unroll_backward(const Matrix& d_h_final, std::span<const StepCache> caches,
                            const CellWeights& w, std::span<const Matrix> step_d_h = {},
                            const BackwardTerms& terms = BackwardTerms::all());

}  // namespace mtgru
