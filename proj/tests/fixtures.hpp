#pragma once

// Seeded random inputs shared by the unit tests and the acceptance binary.

#include <string>
#include <vector>

#include "oracles.hpp"
#include "topoalign/losses.hpp"
#include "topoalign/topic_library.hpp"

namespace fixtures {

using namespace topoalign;

inline std::vector<std::string> ids(std::size_t n, const std::string& prefix = "ex") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline TrajectoryBatch trajectory(Rng& rng, std::size_t b, std::size_t d) {
  return {ids(b), ref::random_matrix(rng, b, d), ref::random_matrix(rng, b, d), ref::random_matrix(rng, b, d)};
}

inline TopicLibrary library(Rng& rng, std::size_t topics, std::size_t d_s) {
  TopicLibrary lib;
  lib.dim_s = d_s;
  for (std::size_t t = 0; t < topics; ++t)
    lib.topics.push_back({static_cast<TopicId>(t), "topic" + std::to_string(t), ref::random_vec(rng, d_s),
                          ref::random_vec(rng, d_s), 100, {}});
  return lib;
}

inline PreferenceBatch preference(Rng& rng, std::size_t b, std::size_t d, std::size_t topics) {
  PreferenceBatch batch{ids(b), ref::random_matrix(rng, b, d), ref::random_matrix(rng, b, d), {}};
  for (std::size_t i = 0; i < b; ++i) batch.topic_ids.push_back(static_cast<TopicId>(rng.index(topics)));
  return batch;
}

inline LabeledPointCloud cloud(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng.index(2));
  return {ref::random_matrix(rng, n, d), labels};
}

// Random cloud (n >= 2) with at least one point of each label.
inline LabeledPointCloud two_label_cloud(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng.index(2));
  const std::size_t zero = rng.index(n);
  labels[zero] = 0;
  labels[(zero + 1 + rng.index(n - 1)) % n] = 1;
  return {ref::random_matrix(rng, n, d), labels};
}

inline Vec flatten(const Matrix& m) { return m.data(); }

inline Matrix reshape(const Vec& v, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  m.data() = v;
  return m;
}

}  // namespace fixtures
