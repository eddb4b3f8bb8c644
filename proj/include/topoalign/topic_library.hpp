#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/types.hpp"

namespace topoalign {

using TopicId = std::int64_t;

struct Topic {
  TopicId id = 0;
  std::string name;
  Vec centroid;
  Vec u;  // preference vector in sentence-embedding space
  std::int64_t member_count = 0;
  // Centroids of clusters folded into this topic by merge_small_topics.
  std::vector<Vec> absorbed_centroids;

  bool operator==(const Topic&) const = default;
};

// Immutable-after-build collection of topics and their preference vectors.
struct TopicLibrary {
  static constexpr int kFormatVersion = 1;

  std::size_t dim_s = 0;
  std::vector<Topic> topics;  // sorted by id
  std::optional<TopicId> other_topic_id;
  std::map<std::string, std::string> metadata;  // creation info
  std::vector<std::string> warnings;            // e.g. labeler fallback

  std::size_t size() const noexcept { return topics.size(); }

  const Topic* find(TopicId id) const noexcept {
    auto it = std::lower_bound(topics.begin(), topics.end(), id,
                               [](const Topic& t, TopicId v) { return t.id < v; });
    return (it != topics.end() && it->id == id) ? &*it : nullptr;
  }

  const Topic& at(TopicId id) const {
    if (const Topic* t = find(id)) return *t;
    throw Error(ErrorKind::UnknownTopic, "topic id " + std::to_string(id) + " not in library");
  }

  void sort_topics() {
    std::sort(topics.begin(), topics.end(), [](const Topic& a, const Topic& b) { return a.id < b.id; });
  }

  bool has_warning(const std::string& w) const {
    return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
  }

  bool operator==(const TopicLibrary&) const = default;
};

}  // namespace topoalign
