#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/losses.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/topic_library.hpp"

namespace topoalign {

enum class CosineKind { TrajectoryRho, ImprovementSigma };

struct CosineRecord {
  std::string id;
  double value = 0.0;
  CosineKind kind = CosineKind::TrajectoryRho;
  std::optional<TopicId> topic_id;

  bool operator==(const CosineRecord&) const = default;
};

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  std::size_t total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

// Equal-width bins over [-1, 1]; 1.0 lands in the last bin.
inline Histogram cosine_distribution(const std::vector<CosineRecord>& records, std::size_t bins) {
  if (bins == 0) throw Error(ErrorKind::InvalidArgument, "bins must be >= 1");
  Histogram h;
  h.counts.assign(bins, 0);
  for (const auto& r : records) {
    const double v = std::clamp(r.value, -1.0, 1.0);
    auto bin = static_cast<std::size_t>(std::floor((v + 1.0) / 2.0 * static_cast<double>(bins)));
    ++h.counts[std::min(bin, bins - 1)];
  }
  return h;
}

// rho_i = cos(v_model_i, v_topo) for every PH bridge of the batch.
inline std::vector<CosineRecord> trajectory_cosines(const TrajectoryBatch& batch, unsigned threads = 1) {
  const LossResult r = ttl_loss(batch, false, kDefaultCosineEps, threads);
  std::vector<CosineRecord> out;
  for (const auto& item : r.per_item) out.push_back({item.id, item.cosine, CosineKind::TrajectoryRho, std::nullopt});
  return out;
}

// sigma_i = cos(LN(h_ch) - LN(h_rj), P u_t), tagged with the example topic.
inline std::vector<CosineRecord> improvement_cosines(const PreferenceBatch& batch, const TopicLibrary& library,
                                                     const Projection& proj, const TpoOptions& opts = {}) {
  const LossResult r = tpo_loss(batch, library, proj, opts, false);
  std::vector<CosineRecord> out;
  for (std::size_t i = 0; i < r.per_item.size(); ++i)
    out.push_back({r.per_item[i].id, r.per_item[i].cosine, CosineKind::ImprovementSigma, batch.topic_ids[i]});
  return out;
}

struct Score {
  double rm = 0.0;
  double help = 0.0;
};

using ScoreTable = std::map<std::string, Score>;

struct TopicGainRow {
  TopicId topic_id = 0;
  double mean_sigma = 0.0;
  double delta_rm = 0.0;
  double delta_help = 0.0;
  std::size_t n = 0;
};

// Per topic: mean sigma, and mean(score_b) - mean(score_a) for both metrics.
// Members are summed in id order so the result does not depend on input order.
inline std::vector<TopicGainRow> per_topic_gains(const std::vector<CosineRecord>& sigmas, const ScoreTable& scores_a,
                                                 const ScoreTable& scores_b) {
  std::map<TopicId, std::vector<const CosineRecord*>> groups;
  for (const auto& r : sigmas) {
    if (!r.topic_id) throw Error(ErrorKind::InvalidArgument, "sigma record '" + r.id + "' has no topic");
    if (!scores_a.count(r.id)) throw Error(ErrorKind::MissingScore, "id '" + r.id + "' missing from first score file");
    if (!scores_b.count(r.id)) throw Error(ErrorKind::MissingScore, "id '" + r.id + "' missing from second score file");
    groups[*r.topic_id].push_back(&r);
  }
  std::vector<TopicGainRow> rows;
  for (auto& [topic, members] : groups) {
    std::sort(members.begin(), members.end(), [](const CosineRecord* a, const CosineRecord* b) {
      return a->id != b->id ? a->id < b->id : a->value < b->value;
    });
    double sigma = 0.0, rm_a = 0.0, rm_b = 0.0, help_a = 0.0, help_b = 0.0;
    for (const CosineRecord* r : members) {
      sigma += r->value;
      const Score& a = scores_a.at(r->id);
      const Score& b = scores_b.at(r->id);
      rm_a += a.rm;
      rm_b += b.rm;
      help_a += a.help;
      help_b += b.help;
    }
    const double n = static_cast<double>(members.size());
    rows.push_back({topic, sigma / n, rm_b / n - rm_a / n, help_b / n - help_a / n, members.size()});
  }
  return rows;
}

struct LengthQuantiles {
  double min = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double max = 0.0;
};

struct LengthStats {
  std::size_t count = 0;
  LengthQuantiles quantiles;
  double mean_length = 0.0;
};

struct BridgeStats {
  LengthStats ph;
  LengthStats knn;
};

// Quantile with linear interpolation between order statistics of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline LengthStats length_stats(const std::vector<Bridge>& bridges) {
  LengthStats s;
  s.count = bridges.size();
  if (bridges.empty()) return s;
  std::vector<double> lengths;
  for (const auto& b : bridges) lengths.push_back(norm(b.direction));
  std::sort(lengths.begin(), lengths.end());
  double sum = 0.0;
  for (double l : lengths) sum += l;
  s.mean_length = sum / static_cast<double>(lengths.size());
  s.quantiles = {lengths.front(), quantile_sorted(lengths, 0.25), quantile_sorted(lengths, 0.5),
                 quantile_sorted(lengths, 0.75), lengths.back()};
  return s;
}

// PH bridges vs nearest-neighbour pairings on the same cloud.
inline BridgeStats bridge_statistics(const LabeledPointCloud& cloud, unsigned threads = 1) {
  if (!cloud.has_both_labels()) throw Error(ErrorKind::SingleLabelCloud, "bridge statistics need both labels");
  return {length_stats(ph_bridges(cloud, threads)), length_stats(nearest_label_pairs(cloud))};
}

}  // namespace topoalign
