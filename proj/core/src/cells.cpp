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

#include "mtgru/cells.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace mtgru {

namespace {

void check_step_shapes(const Matrix& x, const Matrix& h_prev, const CellWeights& w) {
  w.validate();
  if (x.rows() != w.input_dim() || h_prev.rows() != w.hidden_dim() || x.cols() != h_prev.cols()) {
    throw ShapeError("cell step: x " + x.shape_string() + " and h_prev " + h_prev.shape_string() +
                     " do not fit weights with input " + std::to_string(w.input_dim()) +
                     ", hidden " + std::to_string(w.hidden_dim()));
  }
}

void check_tau(double tau) {
  if (!(tau >= 1.0) || !std::isfinite(tau)) {
    throw DomainError("timescale constant must be finite and >= 1, got " + format_double(tau));
  }
}

void check_backward_shapes(const Matrix& d_h, const StepCache& cache, const CellWeights& w) {
  check_step_shapes(cache.x, cache.h_prev, w);
  if (!d_h.same_shape(cache.h_prev) || !cache.r.same_shape(d_h) || !cache.z.same_shape(d_h) ||
      !cache.u.same_shape(d_h)) {
    throw ShapeError("cell backward: gradient " + d_h.shape_string() +
                     " does not match cached state " + cache.h_prev.shape_string());
  }
}

// Gate pre-activations and activations shared by both forward variants.
StepCache gates(const Matrix& x, const Matrix& h_prev, const CellWeights& w) {
  StepCache c;
  c.x = x;
  c.h_prev = h_prev;
  c.pre_r = matmul(w.W_xr, x) + matmul(w.W_hr, h_prev);
  c.pre_z = matmul(w.W_xz, x) + matmul(w.W_hz, h_prev);
  c.r = sigmoid(c.pre_r);
  c.z = sigmoid(c.pre_z);
  c.pre_u = matmul(w.W_xu, x) + matmul(w.W_hu, hadamard(c.r, h_prev));
  c.u = tanh(c.pre_u);
  return c;
}

}  // namespace

CellWeights CellWeights::random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  CellWeights w;
  w.W_xr = xavier_init(hidden_dim, input_dim, rng);
  w.W_xz = xavier_init(hidden_dim, input_dim, rng);
  w.W_xu = xavier_init(hidden_dim, input_dim, rng);
  w.W_hr = xavier_init(hidden_dim, hidden_dim, rng);
  w.W_hz = xavier_init(hidden_dim, hidden_dim, rng);
  w.W_hu = xavier_init(hidden_dim, hidden_dim, rng);
  return w;
}

CellWeights CellWeights::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  CellWeights w;
  for (std::size_t i = 0; i < 3; ++i) *w.matrices()[i] = Matrix(hidden_dim, input_dim);
  for (std::size_t i = 3; i < 6; ++i) *w.matrices()[i] = Matrix(hidden_dim, hidden_dim);
  return w;
}

void CellWeights::validate() const {
  const std::size_t in = W_xr.cols(), hid = W_xr.rows();
  for (const Matrix* m : {&W_xr, &W_xz, &W_xu}) {
    if (m->rows() != hid || m->cols() != in) {
      throw ShapeError("CellWeights: input-side matrix " + m->shape_string() + " expected (" +
                       std::to_string(hid) + "x" + std::to_string(in) + ")");
    }
  }
  for (const Matrix* m : {&W_hr, &W_hz, &W_hu}) {
    if (m->rows() != hid || m->cols() != hid) {
      throw ShapeError("CellWeights: recurrent matrix " + m->shape_string() + " expected (" +
                       std::to_string(hid) + "x" + std::to_string(hid) + ")");
    }
  }
}

CellWeights& CellWeights::operator+=(const CellWeights& other) {
  auto mine = matrices();
  auto theirs = other.matrices();
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i] += *theirs[i];
  return *this;
}

CellWeights& CellWeights::operator*=(double s) {
  for (Matrix* m : matrices()) *m *= s;
  return *this;
}

std::string_view term_name(HiddenGradTerm t) {
  switch (t) {
    case HiddenGradTerm::UpdateGate: return "update-gate";
    case HiddenGradTerm::Candidate: return "candidate";
    case HiddenGradTerm::ResetGate: return "reset-gate";
    case HiddenGradTerm::Carry: return "carry";
    case HiddenGradTerm::Leak: return "leak";
  }
  return "unknown";
}

StepResult mtgru_forward(const Matrix& x, const Matrix& h_prev, const CellWeights& w, double tau) {
  check_tau(tau);
  check_step_shapes(x, h_prev, w);
  StepResult out{Matrix(h_prev.rows(), h_prev.cols()), gates(x, h_prev, w)};
  out.cache.tau = tau;
  const double inv_tau = 1.0 / tau;
  const double leak = 1.0 - inv_tau;
  const StepCache& c = out.cache;
  for (std::size_t i = 0; i < out.h.size(); ++i) {
    const double gru = (1.0 - c.z[i]) * h_prev[i] + c.z[i] * c.u[i];
    out.h[i] = gru * inv_tau + leak * h_prev[i];
  }
  return out;
}

StepResult gru_forward(const Matrix& x, const Matrix& h_prev, const CellWeights& w) {
  check_step_shapes(x, h_prev, w);
  Matrix pre_r = matmul(w.W_xr, x) + matmul(w.W_hr, h_prev);
  Matrix pre_z = matmul(w.W_xz, x) + matmul(w.W_hz, h_prev);
  Matrix r = sigmoid(pre_r);
  Matrix z = sigmoid(pre_z);
  Matrix pre_u = matmul(w.W_xu, x) + matmul(w.W_hu, hadamard(r, h_prev));
  Matrix u = tanh(pre_u);
  Matrix h(h_prev.rows(), h_prev.cols());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * u[i];

  StepResult out;
  out.h = std::move(h);
  out.cache.x = x;
  out.cache.h_prev = h_prev;
  out.cache.pre_r = std::move(pre_r);
  out.cache.pre_z = std::move(pre_z);
  out.cache.pre_u = std::move(pre_u);
  out.cache.r = std::move(r);
  out.cache.z = std::move(z);
  out.cache.u = std::move(u);
  out.cache.tau = 1.0;
  return out;
}

StepGrads mtgru_backward(const Matrix& d_h_in, const StepCache& cache, const CellWeights& w,
                         const BackwardTerms& terms) {
  check_backward_shapes(d_h_in, cache, w);
  const double inv_tau = 1.0 / cache.tau;
  const std::size_t hidden = d_h_in.rows(), batch = d_h_in.cols();

  // Inactive columns are identity steps: their gradient bypasses the cell.
  Matrix d_h = d_h_in;
  if (!cache.active.empty()) {
    for (std::size_t c = 0; c < batch; ++c)
      if (!cache.column_active(c))
        for (std::size_t i = 0; i < hidden; ++i) d_h(i, c) = 0.0;
  }

  Matrix d_pre_z(hidden, batch), d_pre_u(hidden, batch);
  for (std::size_t i = 0; i < d_h.size(); ++i) {
    const double g = d_h[i] * inv_tau;
    const double z = cache.z[i], u = cache.u[i];
    d_pre_z[i] = g * (u - cache.h_prev[i]) * z * (1.0 - z);
    d_pre_u[i] = g * z * (1.0 - u * u);
  }
  // Gradient arriving at (r ⊙ h_prev) through W_hu.
  const Matrix d_rh = matmul_tn(w.W_hu, d_pre_u);
  Matrix d_pre_r(hidden, batch);
  for (std::size_t i = 0; i < d_h.size(); ++i) {
    const double r = cache.r[i];
    d_pre_r[i] = d_rh[i] * cache.h_prev[i] * r * (1.0 - r);
  }

  StepGrads g;
  g.d_h_prev = Matrix(hidden, batch);
  if (terms.has(HiddenGradTerm::UpdateGate)) g.d_h_prev += matmul_tn(w.W_hz, d_pre_z);
  if (terms.has(HiddenGradTerm::Candidate)) g.d_h_prev += hadamard(d_rh, cache.r);
  if (terms.has(HiddenGradTerm::ResetGate)) g.d_h_prev += matmul_tn(w.W_hr, d_pre_r);
  const double leak = (1.0 - inv_tau) * (terms.negate_leak ? -1.0 : 1.0);
  const bool carry = terms.has(HiddenGradTerm::Carry);
  const bool leaky = terms.has(HiddenGradTerm::Leak);
  for (std::size_t i = 0; i < d_h.size(); ++i) {
    if (carry) g.d_h_prev[i] += inv_tau * d_h[i] * (1.0 - cache.z[i]);
    if (leaky) g.d_h_prev[i] += leak * d_h[i];
  }

  g.d_x = matmul_tn(w.W_xr, d_pre_r);
  g.d_x += matmul_tn(w.W_xz, d_pre_z);
  g.d_x += matmul_tn(w.W_xu, d_pre_u);

  g.d_w = CellWeights::zeros(w.input_dim(), hidden);
  add_matmul_nt(g.d_w.W_xr, d_pre_r, cache.x);
  add_matmul_nt(g.d_w.W_xz, d_pre_z, cache.x);
  add_matmul_nt(g.d_w.W_xu, d_pre_u, cache.x);
  add_matmul_nt(g.d_w.W_hr, d_pre_r, cache.h_prev);
  add_matmul_nt(g.d_w.W_hz, d_pre_z, cache.h_prev);
  add_matmul_nt(g.d_w.W_hu, d_pre_u, hadamard(cache.r, cache.h_prev));

  if (!cache.active.empty()) {
    for (std::size_t c = 0; c < batch; ++c)
      if (!cache.column_active(c))
        for (std::size_t i = 0; i < hidden; ++i) g.d_h_prev(i, c) = d_h_in(i, c);
  }
  return g;
}

StepGrads gru_backward(const Matrix& d_h, const StepCache& cache, const CellWeights& w) {
  check_backward_shapes(d_h, cache, w);
  const Matrix& r = cache.r;
  const Matrix& z = cache.z;
  const Matrix& u = cache.u;
  const Matrix& hp = cache.h_prev;

  // h = hp - z⊙hp + z⊙u
  Matrix dz(d_h.rows(), d_h.cols()), du(d_h.rows(), d_h.cols());
  Matrix direct(d_h.rows(), d_h.cols());
  for (std::size_t i = 0; i < d_h.size(); ++i) {
    dz[i] = d_h[i] * (u[i] - hp[i]);
    du[i] = d_h[i] * z[i];
    direct[i] = d_h[i] * (1.0 - z[i]);
  }
  Matrix da_z(d_h.rows(), d_h.cols()), da_u(d_h.rows(), d_h.cols());
  for (std::size_t i = 0; i < d_h.size(); ++i) {
    da_z[i] = dz[i] * z[i] * (1.0 - z[i]);
    da_u[i] = du[i] * (1.0 - u[i] * u[i]);
  }
  const Matrix rh = hadamard(r, hp);
  const Matrix d_rh = matmul(transpose(w.W_hu), da_u);
  Matrix da_r(d_h.rows(), d_h.cols());
  for (std::size_t i = 0; i < d_h.size(); ++i) da_r[i] = d_rh[i] * hp[i] * r[i] * (1.0 - r[i]);

  StepGrads g;
  g.d_h_prev = direct;
  g.d_h_prev += hadamard(d_rh, r);
  g.d_h_prev += matmul(transpose(w.W_hz), da_z);
  g.d_h_prev += matmul(transpose(w.W_hr), da_r);
  g.d_x = matmul(transpose(w.W_xz), da_z) + matmul(transpose(w.W_xu), da_u) +
          matmul(transpose(w.W_xr), da_r);
  g.d_w.W_xr = matmul(da_r, transpose(cache.x));
  g.d_w.W_xz = matmul(da_z, transpose(cache.x));
  g.d_w.W_xu = matmul(da_u, transpose(cache.x));
  g.d_w.W_hr = matmul(da_r, transpose(hp));
  g.d_w.W_hz = matmul(da_z, transpose(hp));
  g.d_w.W_hu = matmul(da_u, transpose(rh));
  return g;
}

void freeze_inactive_columns(Matrix& h, StepCache& cache, std::vector<unsigned char> active) {
  if (active.size() != h.cols()) {
    throw ShapeError("freeze_inactive_columns: mask of length " + std::to_string(active.size()) +
                     " for " + std::to_string(h.cols()) + " columns");
  }
  for (std::size_t c = 0; c < h.cols(); ++c)
    if (!active[c])
      for (std::size_t i = 0; i < h.rows(); ++i) h(i, c) = cache.h_prev(i, c);
  cache.active = std::move(active);
}

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

namespace {

// Independent extended-precision forward used as the finite-difference
// reference. Matrices are row-major copies of the CellWeights in kNames order.
struct WideCell {
  std::array<std::vector<long double>, 6> w;
  std::vector<long double> x, h_prev;
  std::size_t in = 0, hid = 0, cols = 0;
};

long double wide_sigmoid(long double v) { return 1.0L / (1.0L + std::exp(-v)); }

// L = Σ h over every coordinate of the batch.
long double wide_loss(const WideCell& c, long double tau) {
  const auto& [wxr, wxz, wxu, whr, whz, whu] = c.w;
  long double total = 0.0L;
  std::vector<long double> r(c.hid), z(c.hid), rh(c.hid);
  for (std::size_t b = 0; b < c.cols; ++b) {
    for (std::size_t i = 0; i < c.hid; ++i) {
      long double pr = 0.0L, pz = 0.0L;
      for (std::size_t k = 0; k < c.in; ++k) {
        pr += wxr[i * c.in + k] * c.x[k * c.cols + b];
        pz += wxz[i * c.in + k] * c.x[k * c.cols + b];
      }
      for (std::size_t k = 0; k < c.hid; ++k) {
        pr += whr[i * c.hid + k] * c.h_prev[k * c.cols + b];
        pz += whz[i * c.hid + k] * c.h_prev[k * c.cols + b];
      }
      r[i] = wide_sigmoid(pr);
      z[i] = wide_sigmoid(pz);
    }
    for (std::size_t k = 0; k < c.hid; ++k) rh[k] = r[k] * c.h_prev[k * c.cols + b];
    for (std::size_t i = 0; i < c.hid; ++i) {
      long double pu = 0.0L;
      for (std::size_t k = 0; k < c.in; ++k) pu += wxu[i * c.in + k] * c.x[k * c.cols + b];
      for (std::size_t k = 0; k < c.hid; ++k) pu += whu[i * c.hid + k] * rh[k];
      const long double u = std::tanh(pu);
      const long double hp = c.h_prev[i * c.cols + b];
      total += ((1.0L - z[i]) * hp + z[i] * u) / tau + (1.0L - 1.0L / tau) * hp;
    }
  }
  return total;
}

std::vector<long double> widen(const Matrix& m) {
  return std::vector<long double>(m.values().begin(), m.values().end());
}

}  // namespace

double finite_diff_check(const CellWeights& w, const Matrix& x, const Matrix& h_prev, double tau,
                         double epsilon, const BackwardTerms& terms) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw DomainError("finite_diff_check: epsilon must lie in [1e-7, 1e-3]");
  }
  const StepResult base = mtgru_forward(x, h_prev, w, tau);
  const Matrix ones(base.h.rows(), base.h.cols(), 1.0);
  const StepGrads analytic = mtgru_backward(ones, base.cache, w, terms);

  WideCell cell;
  const auto mats = w.matrices();
  for (std::size_t m = 0; m < mats.size(); ++m) cell.w[m] = widen(*mats[m]);
  cell.x = widen(x);
  cell.h_prev = widen(h_prev);
  cell.in = x.rows();
  cell.hid = h_prev.rows();
  cell.cols = x.cols();

  const long double step = epsilon;
  auto central = [&](long double& slot) {
    const long double saved = slot;
    slot = saved + step;
    const long double plus = wide_loss(cell, tau);
    slot = saved - step;
    const long double minus = wide_loss(cell, tau);
    slot = saved;
    return static_cast<double>((plus - minus) / (2.0L * step));
  };

  double worst = 0.0;
  const auto grads = analytic.d_w.matrices();
  for (std::size_t m = 0; m < cell.w.size(); ++m)
    for (std::size_t i = 0; i < cell.w[m].size(); ++i)
      worst = std::max(worst, relative_error(central(cell.w[m][i]), (*grads[m])[i]));
  for (std::size_t i = 0; i < cell.x.size(); ++i)
    worst = std::max(worst, relative_error(central(cell.x[i]), analytic.d_x[i]));
  for (std::size_t i = 0; i < cell.h_prev.size(); ++i)
    worst = std::max(worst, relative_error(central(cell.h_prev[i]), analytic.d_h_prev[i]));
  return worst;
}

UnrollGrads unroll_backward(const Matrix& d_h_final, std::span<const StepCache> caches,
                            const CellWeights& w, std::span<const Matrix> step_d_h,
                            const BackwardTerms& terms) {
  if (caches.empty()) throw std::invalid_argument("unroll_backward: empty cache sequence");
  if (!step_d_h.empty() && step_d_h.size() != caches.size()) {
    throw std::invalid_argument("unroll_backward: " + std::to_string(step_d_h.size()) +
                                " step gradients for " + std::to_string(caches.size()) +
                                " steps");
  }
  UnrollGrads out;
  out.d_w = CellWeights::zeros(w.input_dim(), w.hidden_dim());
  out.d_x.resize(caches.size());
  Matrix carry = d_h_final;
  for (std::size_t t = caches.size(); t-- > 0;) {
    if (!step_d_h.empty()) carry += step_d_h[t];
    StepGrads g = mtgru_backward(carry, caches[t], w, terms);
    out.d_w += g.d_w;
    out.d_x[t] = std::move(g.d_x);
    carry = std::move(g.d_h_prev);
  }
  out.d_h0 = std::move(carry);
  return out;
}

}  // namespace mtgru
