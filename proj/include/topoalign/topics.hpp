#pragma once

// Offline construction of topic-aware preference vectors: clustering of
// prompt embeddings, cluster naming, template differencing, and folding of
// small topics into a shared "other" topic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/format.hpp"
#include "topoalign/geometry.hpp"
#include "topoalign/topic_library.hpp"
#include "topoalign/types.hpp"

namespace topoalign {

inline constexpr std::size_t kDefaultClusterCount = 50;
inline constexpr std::int64_t kDefaultMinTopicMembers = 50;
inline constexpr std::size_t kDefaultLabelerSampleSize = 32;
inline constexpr const char* kOtherTopicName = "other";
inline constexpr const char* kWarningLabelerFallback = "labeler_fallback";

// ---------------------------------------------------------------- k-means

struct KMeansResult {
  std::vector<std::size_t> assignments;
  std::vector<Vec> centroids;
  std::vector<double> inertia_history;  // after every Lloyd iteration
  std::size_t iterations = 0;
  bool converged = false;

  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

inline double kmeans_inertia(const std::vector<Vec>& points, const std::vector<std::size_t>& assignments,
                             const std::vector<Vec>& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += squared_distance(points[i], centroids[assignments[i]]);
  return s;
}

inline Vec l2_normalized(std::span<const double> v) {
  const double n = norm(v);
  Vec out(v.begin(), v.end());
  if (n > 0.0)
    for (double& x : out) x /= n;
  return out;
}

namespace detail {

inline std::size_t nearest_centroid(std::span<const double> p, const std::vector<Vec>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    const double dist = squared_distance(p, centroids[k]);
    if (dist < best_d) {
      best_d = dist;
      best = k;
    }
  }
  return best;
}

// k-means++ seeding with D^2 sampling.
inline std::vector<Vec> kmeans_plus_plus(const std::vector<Vec>& points, std::size_t k, Rng& rng) {
  std::vector<Vec> centers;
  centers.push_back(points[rng.index(points.size())]);
  std::vector<double> closest(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) closest[i] = squared_distance(points[i], centers[0]);
  while (centers.size() < k) {
    const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double acc = 0.0;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += closest[i];
        if (r < acc && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(points.size());
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i)
      closest[i] = std::min(closest[i], squared_distance(points[i], centers.back()));
  }
  return centers;
}

}  // namespace detail

// Full-batch Lloyd iterations from a seeded k-means++ start. Empty clusters
// take the point farthest from its own centroid.
inline KMeansResult kmeans_cluster(const std::vector<Vec>& embeddings, std::size_t k, std::uint64_t seed,
                                   std::size_t max_iters = 300, bool normalize = false) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (k > embeddings.size())
    throw Error(ErrorKind::TooFewPoints, "k=" + std::to_string(k) + " exceeds point count " +
                                             std::to_string(embeddings.size()));
  std::vector<Vec> points;
  points.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    if (e.size() != embeddings.front().size()) throw Error(ErrorKind::DimMismatch, "ragged embeddings");
    points.push_back(normalize ? l2_normalized(e) : e);
  }
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();

  Rng rng(seed);
  KMeansResult res;
  res.centroids = detail::kmeans_plus_plus(points, k, rng);
  res.assignments.assign(n, k);  // k marks "unassigned"

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = detail::nearest_centroid(points[i], res.centroids);
      if (c != res.assignments[i]) {
        res.assignments[i] = c;
        changed = true;
      }
    }

    std::vector<std::size_t> counts(k, 0);
    for (auto a : res.assignments) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[res.assignments[i]] < 2) continue;
        const double dist = squared_distance(points[i], res.centroids[res.assignments[i]]);
        if (dist > far_d) {
          far_d = dist;
          far = i;
        }
      }
      if (far == n) break;
      --counts[res.assignments[far]];
      res.assignments[far] = c;
      counts[c] = 1;
      res.centroids[c] = points[far];
      changed = true;
    }

    std::vector<Vec> sums(k, Vec(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dim; ++j) sums[res.assignments[i]][j] += points[i][j];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }

    res.inertia_history.push_back(kmeans_inertia(points, res.assignments, res.centroids));
    res.iterations = iter + 1;
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ------------------------------------------------------ preference vectors

struct TemplatePair {
  std::string positive;
  std::string negative;

  static constexpr std::string_view kSlot = "{t}";

  static std::size_t slot_count(const std::string& s) {
    std::size_t count = 0;
    for (auto pos = s.find(kSlot); pos != std::string::npos; pos = s.find(kSlot, pos + kSlot.size())) ++count;
    return count;
  }

  void validate() const {
    if (slot_count(positive) != 1 || slot_count(negative) != 1)
      throw Error(ErrorKind::InvalidArgument, "templates need exactly one {t} slot");
  }

  static std::string fill(const std::string& tmpl, const std::string& topic) {
    std::string out = tmpl;
    const auto pos = out.find(kSlot);
    if (pos != std::string::npos) out.replace(pos, kSlot.size(), topic);
    return out;
  }

  std::pair<std::string, std::string> instantiate(const std::string& topic) const {
    validate();
    return {fill(positive, topic), fill(negative, topic)};
  }

  bool operator==(const TemplatePair&) const = default;
};

inline std::vector<TemplatePair> default_templates() {
  const std::string pos_a = "a helpful, harmless, and high-quality answer about {t}";
  const std::string neg_a = "a harmful, unhelpful, and low-quality answer about {t}";
  const std::string pos_b = "a clear, precise, and correct explanation regarding {t}";
  const std::string neg_b = "a vague, confusing, and incorrect explanation regarding {t}";
  return {{pos_a, neg_a}, {pos_b, neg_b}, {pos_a, neg_b}, {pos_b, neg_a}};
}

struct EmbeddedTemplate {
  Vec e_pos;
  Vec e_neg;
};

// u_t = mean(e_pos - e_neg).
inline Vec build_topic_vector(const std::vector<EmbeddedTemplate>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyTemplateSet, "no template pairs for topic");
  const std::size_t dim = pairs.front().e_pos.size();
  Vec u(dim, 0.0);
  for (const auto& p : pairs) {
    if (p.e_pos.size() != dim || p.e_neg.size() != dim)
      throw Error(ErrorKind::DimMismatch, "template embedding dims differ");
    for (std::size_t i = 0; i < dim; ++i) u[i] += p.e_pos[i] - p.e_neg[i];
  }
  for (double& x : u) x /= static_cast<double>(pairs.size());
  return u;
}

// ---------------------------------------------------------------- library

// Library skeleton from a clustering: one topic per cluster, ids 0..K-1,
// preference vectors left at zero until template embeddings arrive.
inline TopicLibrary library_from_clusters(const KMeansResult& clusters, const std::vector<std::string>& names) {
  if (names.size() != clusters.centroids.size())
    throw Error(ErrorKind::InvalidArgument, "one name per cluster required");
  TopicLibrary lib;
  lib.dim_s = clusters.centroids.empty() ? 0 : clusters.centroids.front().size();
  std::vector<std::int64_t> counts(clusters.centroids.size(), 0);
  for (auto a : clusters.assignments) ++counts[a];
  for (std::size_t k = 0; k < clusters.centroids.size(); ++k)
    lib.topics.push_back({static_cast<TopicId>(k), names[k], clusters.centroids[k], Vec(lib.dim_s, 0.0), counts[k], {}});
  return lib;
}

inline void apply_template_embeddings(TopicLibrary& lib,
                                      const std::map<TopicId, std::vector<EmbeddedTemplate>>& embedded) {
  for (auto& topic : lib.topics) {
    auto it = embedded.find(topic.id);
    if (it == embedded.end())
      throw Error(ErrorKind::EmptyTemplateSet, "no template embeddings for topic " + std::to_string(topic.id));
    Vec u = build_topic_vector(it->second);
    if (u.size() != lib.dim_s) throw Error(ErrorKind::DimMismatch, "template embedding dim != library dim");
    topic.u = std::move(u);
  }
}

// Topics under `min_members` are replaced by one "other" topic whose u and
// centroid are member-count-weighted means of the removed topics.
inline TopicLibrary merge_small_topics(const TopicLibrary& library,
                                       std::int64_t min_members = kDefaultMinTopicMembers) {
  if (min_members < 1) throw Error(ErrorKind::InvalidArgument, "min_members must be >= 1");
  TopicLibrary out = library;
  out.topics.clear();
  std::vector<const Topic*> merged;
  for (const auto& t : library.topics) {
    const bool is_other = library.other_topic_id && t.id == *library.other_topic_id;
    if (is_other || t.member_count < min_members)
      merged.push_back(&t);
    else
      out.topics.push_back(t);
  }
  const bool any_small = std::any_of(merged.begin(), merged.end(), [&](const Topic* t) {
    return !(library.other_topic_id && t->id == *library.other_topic_id);
  });
  if (!any_small) return library;

  Topic other;
  other.id = library.other_topic_id.value_or(
      library.topics.empty() ? 0
                             : std::max_element(library.topics.begin(), library.topics.end(),
                                                [](const Topic& a, const Topic& b) { return a.id < b.id; })
                                       ->id + 1);
  other.name = kOtherTopicName;
  other.u.assign(library.dim_s, 0.0);
  other.centroid.assign(library.dim_s, 0.0);
  for (const Topic* t : merged) other.member_count += t->member_count;
  for (const Topic* t : merged) {
    const double w = other.member_count > 0
                         ? static_cast<double>(t->member_count) / static_cast<double>(other.member_count)
                         : 1.0 / static_cast<double>(merged.size());
    for (std::size_t i = 0; i < library.dim_s; ++i) {
      other.u[i] += w * t->u[i];
      other.centroid[i] += w * t->centroid[i];
    }
    if (t->absorbed_centroids.empty())
      other.absorbed_centroids.push_back(t->centroid);
    else
      other.absorbed_centroids.insert(other.absorbed_centroids.end(), t->absorbed_centroids.begin(),
                                      t->absorbed_centroids.end());
  }
  out.topics.push_back(std::move(other));
  out.other_topic_id = out.topics.back().id;
  out.sort_topics();
  out.metadata["other_vector"] = "member_weighted_mean";
  return out;
}

// Nearest centroid (including centroids absorbed into "other"); ties go to
// the lowest topic id.
inline TopicId assign_topic(std::span<const double> embedding, const TopicLibrary& library) {
  if (embedding.size() != library.dim_s)
    throw Error(ErrorKind::DimMismatch, "embedding dim " + std::to_string(embedding.size()) +
                                            " != library dim " + std::to_string(library.dim_s));
  if (library.topics.empty()) throw Error(ErrorKind::UnknownTopic, "library has no topics");
  TopicId best = library.topics.front().id;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& t : library.topics) {
    double d = squared_distance(embedding, t.centroid);
    for (const auto& c : t.absorbed_centroids) d = std::min(d, squared_distance(embedding, c));
    if (d < best_d) {
      best_d = d;
      best = t.id;
    }
  }
  return best;
}

// Rounds stored vectors to the 9-significant-digit precision of the file format.
inline void quantize_for_storage(TopicLibrary& lib) {
  for (auto& t : lib.topics) {
    for (double& v : t.centroid) v = round_sig9(v);
    for (double& v : t.u) v = round_sig9(v);
    for (auto& c : t.absorbed_centroids)
      for (double& v : c) v = round_sig9(v);
  }
}

// ---------------------------------------------------------------- naming

struct LabelRequest {
  TopicId cluster_id = 0;
  std::vector<std::string> prompts;
};

// External topic namer. Implementations throw Error(LabelerUnavailable).
class Labeler {
 public:
  virtual ~Labeler() = default;
  virtual std::string label(const LabelRequest& request) = 0;
};

// Offline names from a fixed mapping.
class StaticLabeler : public Labeler {
 public:
  explicit StaticLabeler(std::map<TopicId, std::string> names) : names_(std::move(names)) {}

  std::string label(const LabelRequest& request) override {
    auto it = names_.find(request.cluster_id);
    if (it == names_.end())
      throw Error(ErrorKind::LabelerUnavailable, "no name for cluster " + std::to_string(request.cluster_id));
    return it->second;
  }

 private:
  std::map<TopicId, std::string> names_;
};

inline std::string fallback_topic_name(TopicId id) { return "cluster-" + std::to_string(id); }

// Accepts 1-3 whitespace-separated words.
inline bool valid_topic_name(const std::string& name) {
  std::istringstream in(name);
  std::string word;
  std::size_t words = 0;
  while (in >> word) ++words;
  return words >= 1 && words <= 3;
}

inline std::vector<std::string> sample_prompts(const std::vector<std::string>& prompts, std::size_t m, Rng& rng) {
  if (prompts.size() <= m) return prompts;
  std::vector<std::size_t> idx(prompts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(m);
  for (auto i : idx) out.push_back(prompts[i]);
  return out;
}

struct LabelingResult {
  std::vector<std::string> names;
  bool fallback_used = false;
  std::vector<LabelRequest> requests;  // what was sent, for auditing
};

// Names each cluster from up to `sample_size` of its prompts. Unavailable
// labelers or malformed names fall back to "cluster-<id>".
inline LabelingResult label_clusters(const std::vector<std::vector<std::string>>& cluster_prompts,
                                     Labeler* labeler, std::uint64_t seed,
                                     std::size_t sample_size = kDefaultLabelerSampleSize) {
  LabelingResult res;
  Rng rng(seed);
  for (std::size_t k = 0; k < cluster_prompts.size(); ++k) {
    LabelRequest req{static_cast<TopicId>(k), sample_prompts(cluster_prompts[k], sample_size, rng)};
    std::string name;
    if (labeler) {
      try {
        name = labeler->label(req);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::LabelerUnavailable) throw;
        name.clear();
      }
    }
    if (!valid_topic_name(name)) {
      name = fallback_topic_name(req.cluster_id);
      res.fallback_used = true;
    }
    res.names.push_back(std::move(name));
    res.requests.push_back(std::move(req));
  }
  return res;
}

}  // namespace topoalign
