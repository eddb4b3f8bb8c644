#pragma once

// Topology-aware alignment losses with closed-form gradients.
//
// Bridge directions (v_topo for TTL, v_imp for Topo-TPO) are constant
// targets: topology is extracted from detached embeddings, so gradients
// flow only into the model-side vectors and the projection matrix.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/geometry.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/topic_library.hpp"
#include "topoalign/types.hpp"

namespace topoalign {

inline constexpr double kDefaultLambdaTopo = 0.2;

struct TrajectoryBatch {
  std::vector<std::string> ids;
  Matrix h_prompt;  // B x d
  Matrix h_model;   // B x d
  Matrix h_gold;    // B x d

  std::size_t size() const noexcept { return h_prompt.rows(); }
  std::size_t dim() const noexcept { return h_prompt.cols(); }

  void validate() const {
    const std::size_t b = size();
    if (h_model.rows() != b || h_gold.rows() != b || ids.size() != b)
      throw Error(ErrorKind::DimMismatch, "trajectory batch fields disagree on batch size");
    if (h_model.cols() != dim() || h_gold.cols() != dim())
      throw Error(ErrorKind::DimMismatch, "trajectory batch vectors disagree on dimension");
  }

  // Z = [H_prompt; H_gold] with labels 0 / 1.
  LabeledPointCloud point_cloud() const {
    validate();
    std::vector<Vec> prompts, golds;
    std::vector<std::string> prompt_ids, gold_ids;
    for (std::size_t i = 0; i < size(); ++i) {
      prompts.push_back(h_prompt.row_vec(i));
      golds.push_back(h_gold.row_vec(i));
      prompt_ids.push_back(ids[i] + "/prompt");
      gold_ids.push_back(ids[i] + "/gold");
    }
    return LabeledPointCloud::stacked(prompts, golds, prompt_ids, gold_ids);
  }
};

struct PreferenceBatch {
  std::vector<std::string> ids;
  Matrix h_chosen;    // B x d
  Matrix h_rejected;  // B x d
  std::vector<TopicId> topic_ids;

  std::size_t size() const noexcept { return h_chosen.rows(); }
  std::size_t dim() const noexcept { return h_chosen.cols(); }

  void validate() const {
    const std::size_t b = size();
    if (h_rejected.rows() != b || topic_ids.size() != b || ids.size() != b)
      throw Error(ErrorKind::DimMismatch, "preference batch fields disagree on batch size");
    if (h_rejected.cols() != dim())
      throw Error(ErrorKind::DimMismatch, "preference batch vectors disagree on dimension");
  }
};

// P in R^{d x d_s}, mapping sentence-space topic vectors into hidden space.
struct Projection {
  Matrix values;
  std::uint64_t seed = 0;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }

  // Entries uniform in +-sqrt(6 / (d + d_s)).
  static Projection initialize(std::size_t d, std::size_t d_s, std::uint64_t seed) {
    if (d == 0 || d_s == 0) throw Error(ErrorKind::InvalidArgument, "projection dims must be positive");
    Projection p{Matrix(d, d_s), seed};
    Rng rng(seed);
    const double bound = std::sqrt(6.0 / static_cast<double>(d + d_s));
    for (double& v : p.values.data()) v = rng.uniform(-bound, bound);
    return p;
  }

  Vec apply(std::span<const double> u) const {
    if (u.size() != cols())
      throw Error(ErrorKind::DimMismatch, "topic vector dim does not match projection columns");
    Vec out(rows(), 0.0);
    for (std::size_t r = 0; r < rows(); ++r) {
      const auto row = values.row(r);
      double s = 0.0;
      for (std::size_t c = 0; c < cols(); ++c) s += row[c] * u[c];
      out[r] = s;
    }
    return out;
  }

  bool operator==(const Projection&) const = default;
};

struct ItemCosine {
  std::string id;
  double cosine = 0.0;

  bool operator==(const ItemCosine&) const = default;
};

struct LossResult {
  double value = 0.0;
  std::vector<ItemCosine> per_item;
  std::map<std::string, Matrix> grads;
  std::size_t bridge_count = 0;
};

struct TpoOptions {
  bool layer_norm = true;
  double ln_eps = kDefaultLayerNormEps;
  double cosine_eps = kDefaultCosineEps;
};

struct TopoTpoOptions {
  // Layer-normalize embeddings before building the rejected/chosen cloud.
  bool normalize = false;
  double ln_eps = kDefaultLayerNormEps;
  double cosine_eps = kDefaultCosineEps;
  unsigned threads = 1;
};

namespace detail {

inline void add_outer(Matrix& m, std::span<const double> left, std::span<const double> right) {
  for (std::size_t r = 0; r < left.size(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < right.size(); ++c) row[c] += left[r] * right[c];
  }
}

inline void check_projection(const Projection& proj, std::size_t d, const TopicLibrary& library) {
  if (proj.rows() != d)
    throw Error(ErrorKind::DimMismatch, "projection rows " + std::to_string(proj.rows()) +
                                            " != hidden dim " + std::to_string(d));
  if (proj.cols() != library.dim_s)
    throw Error(ErrorKind::DimMismatch, "projection cols " + std::to_string(proj.cols()) +
                                            " != topic dim " + std::to_string(library.dim_s));
}

}  // namespace detail

// Trajectory topology loss: mean of 1 - cos(v_topo, h_model_p - h_prompt_p)
// over bridges. Gradients w.r.t. h_model; h_prompt gets the negation.
inline LossResult ttl_loss(const TrajectoryBatch& batch, const std::vector<Bridge>& bridges,
                           bool want_grads, double cosine_eps = kDefaultCosineEps) {
  batch.validate();
  const std::size_t b = batch.size();
  const std::size_t d = batch.dim();
  LossResult result;
  result.bridge_count = bridges.size();
  if (bridges.empty()) return result;

  for (const auto& br : bridges) {
    if (br.source >= b)
      throw Error(ErrorKind::IndexError, "bridge source " + std::to_string(br.source) + " is not a prompt row");
    if (br.direction.size() != d) throw Error(ErrorKind::DimMismatch, "bridge direction dim mismatch");
  }

  Matrix d_model(b, d);
  const double scale = 1.0 / static_cast<double>(bridges.size());
  double total = 0.0;
  for (const auto& br : bridges) {
    const Vec v_model = subtract(batch.h_model.row(br.source), batch.h_prompt.row(br.source));
    const CosineGrads g = cosine_with_grads(br.direction, v_model, cosine_eps);
    total += 1.0 - g.cosine;
    result.per_item.push_back({batch.ids[br.source], g.cosine});
    if (want_grads) {
      auto row = d_model.row(br.source);
      for (std::size_t k = 0; k < d; ++k) row[k] -= g.d_second[k] * scale;
    }
  }
  result.value = total * scale;

  if (want_grads) {
    Matrix d_prompt = d_model;
    for (double& v : d_prompt.data()) v = -v;
    result.grads.emplace("h_model", std::move(d_model));
    result.grads.emplace("h_prompt", std::move(d_prompt));
  }
  return result;
}

// TTL over the batch's own persistent-homology bridges.
inline LossResult ttl_loss(const TrajectoryBatch& batch, bool want_grads,
                           double cosine_eps = kDefaultCosineEps, unsigned threads = 1) {
  return ttl_loss(batch, ph_bridges(batch.point_cloud(), threads), want_grads, cosine_eps);
}

inline double combine_sft(double ce, double topo, double lambda_topo = kDefaultLambdaTopo) {
  if (lambda_topo < 0.0) throw Error(ErrorKind::InvalidArgument, "lambda_topo must be non-negative");
  return ce + lambda_topo * topo;
}

// Vector-difference TPO: mean of 1 - cos(LN(h_ch) - LN(h_rj), P u_t).
inline LossResult tpo_loss(const PreferenceBatch& batch, const TopicLibrary& library,
                           const Projection& proj, const TpoOptions& opts, bool want_grads) {
  batch.validate();
  const std::size_t b = batch.size();
  const std::size_t d = batch.dim();
  detail::check_projection(proj, d, library);

  LossResult result;
  if (b == 0) return result;
  Matrix d_delta(b, d), d_chosen(b, d), d_rejected(b, d), d_proj(proj.rows(), proj.cols());
  const double scale = 1.0 / static_cast<double>(b);
  double total = 0.0;

  for (std::size_t i = 0; i < b; ++i) {
    const Topic& topic = library.at(batch.topic_ids[i]);
    const auto ch = batch.h_chosen.row(i);
    const auto rj = batch.h_rejected.row(i);
    const Vec delta = opts.layer_norm ? subtract(layer_norm(ch, opts.ln_eps), layer_norm(rj, opts.ln_eps))
                                      : subtract(ch, rj);
    const Vec u_bar = proj.apply(topic.u);
    const CosineGrads g = cosine_with_grads(delta, u_bar, opts.cosine_eps);
    total += 1.0 - g.cosine;
    result.per_item.push_back({batch.ids[i], g.cosine});
    if (!want_grads) continue;

    Vec g_delta(d), g_ubar(d);
    for (std::size_t k = 0; k < d; ++k) {
      g_delta[k] = -g.d_first[k] * scale;
      g_ubar[k] = -g.d_second[k] * scale;
    }
    std::copy(g_delta.begin(), g_delta.end(), d_delta.row(i).begin());
    if (opts.layer_norm) {
      const Vec gc = layer_norm_backward(ch, g_delta, opts.ln_eps);
      const Vec gr = layer_norm_backward(rj, g_delta, opts.ln_eps);
      for (std::size_t k = 0; k < d; ++k) {
        d_chosen(i, k) = gc[k];
        d_rejected(i, k) = -gr[k];
      }
    } else {
      for (std::size_t k = 0; k < d; ++k) {
        d_chosen(i, k) = g_delta[k];
        d_rejected(i, k) = -g_delta[k];
      }
    }
    detail::add_outer(d_proj, g_ubar, topic.u);
  }
  result.value = total * scale;

  if (want_grads) {
    result.grads.emplace("delta_h", std::move(d_delta));
    result.grads.emplace("h_chosen", std::move(d_chosen));
    result.grads.emplace("h_rejected", std::move(d_rejected));
    result.grads.emplace("P", std::move(d_proj));
  }
  return result;
}

inline LossResult tpo_loss(const PreferenceBatch& batch, const TopicLibrary& library,
                           const Projection& proj, double ln_eps, bool want_grads) {
  TpoOptions opts;
  opts.ln_eps = ln_eps;
  return tpo_loss(batch, library, proj, opts, want_grads);
}

// Rejected/chosen cloud Z_RL = [H_rj; H_ch], optionally layer-normalized.
inline LabeledPointCloud preference_cloud(const PreferenceBatch& batch, bool normalize,
                                          double ln_eps = kDefaultLayerNormEps) {
  batch.validate();
  std::vector<Vec> rejected, chosen;
  std::vector<std::string> rj_ids, ch_ids;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    rejected.push_back(normalize ? layer_norm(batch.h_rejected.row(i), ln_eps) : batch.h_rejected.row_vec(i));
    chosen.push_back(normalize ? layer_norm(batch.h_chosen.row(i), ln_eps) : batch.h_chosen.row_vec(i));
    rj_ids.push_back(batch.ids[i] + "/rejected");
    ch_ids.push_back(batch.ids[i] + "/chosen");
  }
  return LabeledPointCloud::stacked(rejected, chosen, rj_ids, ch_ids);
}

// Fully topological TPO: bridge directions v_imp from the 0D persistence of
// the rejected/chosen cloud, aligned with the projected topic vector of the
// bridge's rejected endpoint. Only dL/dP is produced.
inline LossResult topo_tpo_loss(const PreferenceBatch& batch, const TopicLibrary& library,
                                const Projection& proj, const TopoTpoOptions& opts, bool want_grads) {
  batch.validate();
  if (batch.size() == 0) throw Error(ErrorKind::InvalidArgument, "topo_tpo_loss needs B >= 1");
  detail::check_projection(proj, batch.dim(), library);
  for (TopicId t : batch.topic_ids) (void)library.at(t);

  const LabeledPointCloud cloud = preference_cloud(batch, opts.normalize, opts.ln_eps);
  const std::vector<Bridge> bridges = ph_bridges(cloud, opts.threads);

  LossResult result;
  result.bridge_count = bridges.size();
  if (bridges.empty()) return result;

  Matrix d_proj(proj.rows(), proj.cols());
  const double scale = 1.0 / static_cast<double>(bridges.size());
  double total = 0.0;
  for (const auto& br : bridges) {
    const std::size_t example = br.source;  // rejected rows come first
    const Topic& topic = library.at(batch.topic_ids[example]);
    const Vec u_bar = proj.apply(topic.u);
    const CosineGrads g = cosine_with_grads(br.direction, u_bar, opts.cosine_eps);
    total += 1.0 - g.cosine;
    result.per_item.push_back({batch.ids[example], g.cosine});
    if (want_grads) {
      Vec g_ubar(u_bar.size());
      for (std::size_t k = 0; k < g_ubar.size(); ++k) g_ubar[k] = -g.d_second[k] * scale;
      detail::add_outer(d_proj, g_ubar, topic.u);
    }
  }
  result.value = total * scale;
  if (want_grads) result.grads.emplace("P", std::move(d_proj));
  return result;
}

inline double combine_dpo(double dpo, double tpo, double lambda_dyn) {
  if (lambda_dyn < 0.0) throw Error(ErrorKind::InvalidArgument, "lambda_dyn must be non-negative");
  return dpo + lambda_dyn * tpo;
}

}  // namespace topoalign
