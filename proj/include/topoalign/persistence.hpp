#pragma once

// 0D persistent homology over labeled point clouds. Every vertex is born at
// filtration value 0, so the diagram is fully described by the death edges,
// which coincide with the minimum spanning forest of the distance graph.

#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/geometry.hpp"
#include "topoalign/types.hpp"
#include "topoalign/union_find.hpp"

namespace topoalign {

class LabeledPointCloud {
 public:
  LabeledPointCloud() = default;

  LabeledPointCloud(Matrix points, std::vector<std::uint8_t> labels, std::vector<std::string> ids)
      : points_(std::move(points)), labels_(std::move(labels)), ids_(std::move(ids)) {
    if (labels_.size() != points_.rows() || ids_.size() != points_.rows())
      throw Error(ErrorKind::DimMismatch, "labels/ids length must equal point count");
    for (auto l : labels_)
      if (l > 1) throw Error(ErrorKind::LabelOutOfRange, "labels must be 0 or 1");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_)
      if (!seen.insert(id).second) throw Error(ErrorKind::InvalidArgument, "duplicate id '" + id + "'");
    for (double v : points_.data())
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite coordinate");
  }

  // Ids default to the row index.
  LabeledPointCloud(Matrix points, const std::vector<std::uint8_t>& labels)
      : LabeledPointCloud(std::move(points), labels, index_ids(labels.size())) {}

  // Stacks label-0 rows on top of label-1 rows (the 2B prompt/answer layout).
  static LabeledPointCloud stacked(const std::vector<Vec>& first, const std::vector<Vec>& second,
                                   const std::vector<std::string>& first_ids,
                                   const std::vector<std::string>& second_ids) {
    std::vector<Vec> rows(first);
    rows.insert(rows.end(), second.begin(), second.end());
    std::vector<std::uint8_t> labels(first.size(), 0);
    labels.resize(first.size() + second.size(), 1);
    std::vector<std::string> ids(first_ids);
    ids.insert(ids.end(), second_ids.begin(), second_ids.end());
    return {Matrix::from_rows(rows), std::move(labels), std::move(ids)};
  }

  std::size_t size() const noexcept { return points_.rows(); }
  std::size_t dim() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }
  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  bool has_both_labels() const noexcept {
    const bool zero = std::find(labels_.begin(), labels_.end(), 0) != labels_.end();
    const bool one = std::find(labels_.begin(), labels_.end(), 1) != labels_.end();
    return zero && one;
  }

  // True for the 2B layout: rows [0,B) label 0, rows [B,2B) label 1.
  bool has_paired_layout() const noexcept {
    const std::size_t n = size();
    if (n == 0 || n % 2 != 0) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (labels_[i] != (i < n / 2 ? 0 : 1)) return false;
    return true;
  }

  bool operator==(const LabeledPointCloud&) const = default;

 private:
  static std::vector<std::string> index_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return ids;
  }

  Matrix points_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::string> ids_;
};

struct DeathEdge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double weight = 0.0;

  bool operator==(const DeathEdge&) const = default;
};

struct Bridge {
  std::size_t source = 0;  // label 0 side
  std::size_t target = 0;  // label 1 side
  Vec direction;           // points[target] - points[source]
  double weight = 0.0;

  bool operator==(const Bridge&) const = default;
};

// Kruskal over all n(n-1)/2 pairs in (weight, i, j) order; returns the n-1
// merge edges in emission order (non-decreasing weight).
inline std::vector<DeathEdge> death_edges(const DistanceMatrix& dist) {
  const std::size_t n = dist.size();
  std::vector<DeathEdge> edges;
  edges.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, dist(i, j)});
  std::sort(edges.begin(), edges.end(), [](const DeathEdge& a, const DeathEdge& b) {
    return std::tie(a.weight, a.i, a.j) < std::tie(b.weight, b.i, b.j);
  });

  UnionFind uf(n);
  std::vector<DeathEdge> deaths;
  deaths.reserve(n > 0 ? n - 1 : 0);
  for (const auto& e : edges) {
    if (uf.unite(e.i, e.j)) {
      deaths.push_back(e);
      if (uf.components() == 1) break;
    }
  }
  return deaths;
}

inline std::vector<DeathEdge> death_edges(const LabeledPointCloud& cloud, unsigned threads = 1) {
  return death_edges(pairwise_distances(cloud.points(), threads));
}

inline Bridge make_bridge(const LabeledPointCloud& cloud, std::size_t source, std::size_t target,
                          double weight) {
  return {source, target, subtract(cloud.points().row(target), cloud.points().row(source)), weight};
}

// Cross-label death edges, oriented label 0 -> label 1, in the input order.
inline std::vector<Bridge> extract_bridges(const LabeledPointCloud& cloud,
                                           const std::vector<DeathEdge>& edges) {
  std::vector<Bridge> bridges;
  const auto& labels = cloud.labels();
  for (const auto& e : edges) {
    if (e.i >= cloud.size() || e.j >= cloud.size())
      throw Error(ErrorKind::IndexError, "death edge index outside the cloud");
    if (labels[e.i] == labels[e.j]) continue;
    const auto [source, target] = labels[e.i] == 0 ? std::pair{e.i, e.j} : std::pair{e.j, e.i};
    bridges.push_back(make_bridge(cloud, source, target, e.weight));
  }
  return bridges;
}

inline std::vector<Bridge> ph_bridges(const LabeledPointCloud& cloud, unsigned threads = 1) {
  return extract_bridges(cloud, death_edges(cloud, threads));
}

// Each label-0 point paired with its nearest label-1 point; ties go to the
// lowest index. No layout requirement.
inline std::vector<Bridge> nearest_label_pairs(const LabeledPointCloud& cloud) {
  std::vector<Bridge> out;
  const auto& labels = cloud.labels();
  for (std::size_t p = 0; p < cloud.size(); ++p) {
    if (labels[p] != 0) continue;
    std::size_t best = cloud.size();
    double best_dist = 0.0;
    for (std::size_t q = 0; q < cloud.size(); ++q) {
      if (labels[q] != 1) continue;
      const double dist = norm(subtract(cloud.points().row(q), cloud.points().row(p)));
      if (best == cloud.size() || dist < best_dist) {
        best = q;
        best_dist = dist;
      }
    }
    if (best != cloud.size()) out.push_back(make_bridge(cloud, p, best, best_dist));
  }
  return out;
}

enum class BaselineMode { Random, PerExample, Knn };

// Non-topological pairings used as ablation baselines. Requires the 2B layout.
inline std::vector<Bridge> baseline_pairs(const LabeledPointCloud& cloud, BaselineMode mode,
                                          std::uint64_t seed) {
  if (!cloud.has_paired_layout())
    throw Error(ErrorKind::LayoutError, "expected rows [0,B) label 0 and rows [B,2B) label 1");
  const std::size_t b = cloud.size() / 2;
  std::vector<Bridge> out;
  out.reserve(b);
  auto distance = [&](std::size_t p, std::size_t q) {
    return norm(subtract(cloud.points().row(q), cloud.points().row(p)));
  };
  switch (mode) {
    case BaselineMode::PerExample:
      for (std::size_t i = 0; i < b; ++i) out.push_back(make_bridge(cloud, i, b + i, distance(i, b + i)));
      break;
    case BaselineMode::Random: {
      Rng rng(seed);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t target = b + rng.index(b);
        out.push_back(make_bridge(cloud, i, target, distance(i, target)));
      }
      break;
    }
    case BaselineMode::Knn:
      out = nearest_label_pairs(cloud);
      break;
  }
  return out;
}

}  // namespace topoalign
