#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/types.hpp"

namespace topoalign {

inline constexpr double kDefaultLayerNormEps = 1e-5;
inline constexpr double kDefaultCosineEps = 1e-12;

// Token hidden states of one sequence plus its attention mask.
class TokenMatrix {
 public:
  TokenMatrix(Matrix values, std::vector<std::uint8_t> mask)
      : values_(std::move(values)), mask_(std::move(mask)) {
    if (mask_.size() != values_.rows())
      throw Error(ErrorKind::DimMismatch, "mask length must equal token count");
    for (auto m : mask_)
      if (m > 1) throw Error(ErrorKind::InvalidArgument, "mask entries must be 0 or 1");
    for (double v : values_.data())
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite hidden state");
  }

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }

 private:
  Matrix values_;
  std::vector<std::uint8_t> mask_;
};

// Symmetric Euclidean distance matrix with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : values_(n, n) {}

  std::size_t size() const noexcept { return values_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }
  double& at(std::size_t i, std::size_t j) noexcept { return values_(i, j); }
  const Matrix& matrix() const noexcept { return values_; }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  Matrix values_;
};

inline void check_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimMismatch, "vector dimensions differ");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec subtract(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// (sum_i m_i H_i) / (sum_i m_i)
inline Vec masked_mean_pool(const TokenMatrix& tokens) {
  const Matrix& h = tokens.values();
  Vec out(h.cols(), 0.0);
  std::size_t count = 0;
  for (std::size_t r = 0; r < h.rows(); ++r) {
    if (!tokens.mask()[r]) continue;
    ++count;
    const auto row = h.row(r);
    for (std::size_t c = 0; c < h.cols(); ++c) out[c] += row[c];
  }
  if (count == 0) throw Error(ErrorKind::AllMasked, "every mask entry is zero");
  for (double& v : out) v /= static_cast<double>(count);
  return out;
}

// Affine-free layer normalization with population variance.
inline Vec layer_norm(std::span<const double> v, double eps = kDefaultLayerNormEps) {
  if (v.size() < 2) throw Error(ErrorKind::DimMismatch, "layer_norm needs dim >= 2");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + eps);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) * inv;
  return out;
}

// Vector-Jacobian product of layer_norm at `v` with upstream gradient `grad_out`.
inline Vec layer_norm_backward(std::span<const double> v, std::span<const double> grad_out,
                               double eps = kDefaultLayerNormEps) {
  check_same_dim(v, grad_out);
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  const double s2 = var + eps;
  const double s = std::sqrt(s2);
  double g_mean = 0.0;
  double gx_mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    g_mean += grad_out[i];
    gx_mean += grad_out[i] * (v[i] - mean);
  }
  g_mean /= n;
  gx_mean /= n;
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = (grad_out[i] - g_mean - (v[i] - mean) * gx_mean / s2) / s;
  return out;
}

// (u.v) / (max(|u|,eps) max(|v|,eps)), clamped to [-1, 1].
inline double cosine(std::span<const double> u, std::span<const double> v,
                     double eps = kDefaultCosineEps) {
  const double nu = std::max(norm(u), eps);
  const double nv = std::max(norm(v), eps);
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

struct CosineGrads {
  double cosine = 0.0;
  Vec d_first;   // d cos / d first argument
  Vec d_second;  // d cos / d second argument
};

// Cosine and its gradient w.r.t. both arguments. A norm under the eps floor
// is treated as the constant eps, matching `cosine`.
inline CosineGrads cosine_with_grads(std::span<const double> a, std::span<const double> b,
                                     double eps = kDefaultCosineEps) {
  check_same_dim(a, b);
  const double raw_na = norm(a);
  const double raw_nb = norm(b);
  const bool floor_a = raw_na <= eps;
  const bool floor_b = raw_nb <= eps;
  const double na = floor_a ? eps : raw_na;
  const double nb = floor_b ? eps : raw_nb;
  const double ab = dot(a, b);
  const double c = ab / (na * nb);

  CosineGrads out;
  out.cosine = std::clamp(c, -1.0, 1.0);
  out.d_first.resize(a.size());
  out.d_second.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.d_first[i] = b[i] / (na * nb) - (floor_a ? 0.0 : c * a[i] / (na * na));
    out.d_second[i] = a[i] / (na * nb) - (floor_b ? 0.0 : c * b[i] / (nb * nb));
  }
  return out;
}

struct CosineLoss {
  double loss = 0.0;
  Vec grad;
};

// loss = 1 - cos(target, variable); grad is w.r.t. `variable` only.
inline CosineLoss cosine_loss_grad(std::span<const double> target, std::span<const double> variable,
                                   double eps = kDefaultCosineEps) {
  check_same_dim(target, variable);
  if (norm(target) <= eps)
    throw Error(ErrorKind::DegenerateTarget, "target norm is not above eps");
  CosineGrads g = cosine_with_grads(target, variable, eps);
  CosineLoss out;
  out.loss = 1.0 - g.cosine;
  out.grad = std::move(g.d_second);
  for (double& x : out.grad) x = -x;
  return out;
}

// D[i][j] = |Z_i - Z_j|_2. Rows may be split across threads; every entry is
// computed by the same sequential loop, so output is independent of `threads`.
inline DistanceMatrix pairwise_distances(const Matrix& points, unsigned threads = 1) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  DistanceMatrix out(n);
  auto fill_rows = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < n; i += step) {
      const auto zi = points.row(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto zj = points.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = zi[k] - zj[k];
          s += diff * diff;
        }
        const double dist = std::sqrt(s);
        out.at(i, j) = dist;
        out.at(j, i) = dist;
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(fill_rows, t, threads);
  }
  return out;
}

inline DistanceMatrix pairwise_distances(const std::vector<Vec>& points, unsigned threads = 1) {
  return pairwise_distances(Matrix::from_rows(points), threads);
}

}  // namespace topoalign
