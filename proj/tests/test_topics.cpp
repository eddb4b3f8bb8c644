#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "topoalign/topics.hpp"

using namespace topoalign;

namespace {

std::vector<Vec> blobs(Rng& rng, std::size_t per_blob, const std::vector<Vec>& centers, double spread) {
  std::vector<Vec> out;
  for (const auto& c : centers)
    for (std::size_t i = 0; i < per_blob; ++i) {
      Vec p = c;
      for (double& x : p) x += spread * rng.normal();
      out.push_back(p);
    }
  return out;
}

Topic topic(TopicId id, std::int64_t count, Vec u, Vec centroid) {
  return {id, "t" + std::to_string(id), std::move(centroid), std::move(u), count, {}};
}

class FailingLabeler : public Labeler {
 public:
  std::string label(const LabelRequest&) override { throw Error(ErrorKind::LabelerUnavailable, "down"); }
};

class RecordingLabeler : public Labeler {
 public:
  std::vector<LabelRequest> seen;
  std::string reply = "ok";
  std::string label(const LabelRequest& r) override {
    seen.push_back(r);
    return reply;
  }
};

}  // namespace

TEST(KMeans, OnePointPerCluster) {
  Rng rng(1);
  const auto pts = ref::rows_of(ref::random_matrix(rng, 6, 3));
  const auto res = kmeans_cluster(pts, 6, 9);
  EXPECT_EQ(res.inertia(), 0.0);
  std::set<std::size_t> used(res.assignments.begin(), res.assignments.end());
  EXPECT_EQ(used.size(), 6u);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(res.centroids[res.assignments[i]], pts[i]);
}

TEST(KMeans, SeparatedBlobs) {
  Rng rng(2);
  const auto pts = blobs(rng, 30, {{-10, -10}, {10, 10}}, 0.5);
  const auto res = kmeans_cluster(pts, 2, 4);
  const auto first = res.assignments[0];
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(res.assignments[i], first);
  for (std::size_t i = 30; i < 60; ++i) EXPECT_NE(res.assignments[i], first);
  EXPECT_TRUE(res.converged);
}

TEST(KMeans, InertiaNeverIncreasesAndBeatsRandomRestarts) {
  Rng rng(3);
  const auto pts = ref::rows_of(ref::random_matrix(rng, 200, 4));
  const auto res = kmeans_cluster(pts, 5, 11);
  for (std::size_t i = 1; i < res.inertia_history.size(); ++i)
    EXPECT_LE(res.inertia_history[i], res.inertia_history[i - 1] * (1 + 1e-12));
  double worst = 0.0;
  Rng restart(17);
  for (int r = 0; r < 20; ++r) worst = std::max(worst, ref::naive_lloyd_inertia(pts, 5, restart, 100));
  EXPECT_LE(res.inertia(), worst);
  EXPECT_NEAR(res.inertia(), kmeans_inertia(pts, res.assignments, res.centroids), 1e-9);
}

TEST(KMeans, SeededAndReproducible) {
  Rng rng(4);
  const auto pts = ref::rows_of(ref::random_matrix(rng, 80, 3));
  const auto a = kmeans_cluster(pts, 4, 21);
  const auto b = kmeans_cluster(pts, 4, 21);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(KMeans, DuplicatePointsDoNotLeaveEmptyClusters) {
  std::vector<Vec> pts(10, Vec{1.0, 1.0});
  pts.push_back({5, 5});
  pts.push_back({9, 9});
  const auto res = kmeans_cluster(pts, 3, 1);
  std::set<std::size_t> used(res.assignments.begin(), res.assignments.end());
  EXPECT_EQ(used.size(), 3u);
}

TEST(KMeans, TooFewPoints) {
  try {
    kmeans_cluster({{1.0}, {2.0}}, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewPoints);
  }
}

TEST(TopicVector, SinglePair) { EXPECT_EQ(build_topic_vector({{{1, 1}, {0, 1}}}), (Vec{1, 0})); }

TEST(TopicVector, SymmetricPairsCancel) {
  const Vec a{0.3, -1.2, 2.0}, b{1.1, 0.4, -0.7};
  for (double x : build_topic_vector({{a, b}, {b, a}})) EXPECT_EQ(x, 0.0);
}

TEST(TopicVector, MatchesScalarAverage) {
  Rng rng(5);
  std::vector<EmbeddedTemplate> pairs;
  for (int i = 0; i < 4; ++i) pairs.push_back({ref::random_vec(rng, 6), ref::random_vec(rng, 6)});
  const Vec u = build_topic_vector(pairs);
  for (std::size_t k = 0; k < 6; ++k) {
    double s = 0.0;
    for (const auto& p : pairs) s += p.e_pos[k] - p.e_neg[k];
    EXPECT_NEAR(u[k], s / 4.0, 1e-9);
  }
}

TEST(TopicVector, EmptySetIsAnError) {
  try {
    build_topic_vector({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyTemplateSet);
  }
}

TEST(Templates, SlotValidation) {
  EXPECT_THROW((TemplatePair{"no slot", "{t}"}.validate()), Error);
  EXPECT_THROW((TemplatePair{"{t} {t}", "{t}"}.validate()), Error);
  const auto [pos, neg] = TemplatePair{"good {t}", "bad {t}"}.instantiate("code");
  EXPECT_EQ(pos, "good code");
  EXPECT_EQ(neg, "bad code");
  for (const auto& t : default_templates()) EXPECT_NO_THROW(t.validate());
}

TEST(MergeSmallTopics, AllLargeIsUnchanged) {
  TopicLibrary lib;
  lib.dim_s = 2;
  lib.topics = {topic(0, 60, {1, 0}, {0, 0}), topic(1, 50, {0, 1}, {1, 1})};
  EXPECT_EQ(merge_small_topics(lib), lib);
}

TEST(MergeSmallTopics, WeightedMean) {
  TopicLibrary lib;
  lib.dim_s = 2;
  lib.topics = {topic(0, 10, {1, 0}, {0, 0}), topic(1, 30, {0, 1}, {4, 4}), topic(2, 100, {1, 1}, {9, 9})};
  const auto merged = merge_small_topics(lib);
  ASSERT_EQ(merged.size(), 2u);
  ASSERT_TRUE(merged.other_topic_id);
  EXPECT_EQ(*merged.other_topic_id, 3);
  const Topic& other = merged.at(3);
  EXPECT_EQ(other.name, kOtherTopicName);
  EXPECT_EQ(other.member_count, 40);
  EXPECT_NEAR(other.u[0], 0.25, 1e-15);
  EXPECT_NEAR(other.u[1], 0.75, 1e-15);
  EXPECT_NEAR(other.centroid[0], 3.0, 1e-15);
  EXPECT_EQ(other.absorbed_centroids.size(), 2u);
}

TEST(MergeSmallTopics, EverythingSmall) {
  TopicLibrary lib;
  lib.dim_s = 1;
  lib.topics = {topic(0, 3, {1}, {0}), topic(1, 4, {2}, {1}), topic(2, 5, {3}, {2})};
  const auto merged = merge_small_topics(lib);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged.topics[0].member_count, 12);
}

TEST(MergeSmallTopics, ConservesCountsOnRandomLibraries) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    TopicLibrary lib;
    lib.dim_s = 3;
    std::int64_t total = 0;
    const std::size_t k = 1 + rng.index(20);
    for (std::size_t t = 0; t < k; ++t) {
      const auto count = static_cast<std::int64_t>(1 + rng.index(150));
      total += count;
      lib.topics.push_back(topic(static_cast<TopicId>(t), count, ref::random_vec(rng, 3), ref::random_vec(rng, 3)));
    }
    const auto merged = merge_small_topics(lib);
    std::int64_t after = 0;
    for (const auto& t : merged.topics) {
      after += t.member_count;
      const bool is_other = merged.other_topic_id && t.id == *merged.other_topic_id;
      if (!is_other) {
        EXPECT_GE(t.member_count, kDefaultMinTopicMembers);
      }
    }
    EXPECT_EQ(after, total);
    EXPECT_EQ(merge_small_topics(merged), merged);
  }
}

TEST(AssignTopic, ExactCentroidAndTies) {
  TopicLibrary lib;
  lib.dim_s = 1;
  lib.topics = {topic(0, 50, {1}, {0}), topic(1, 50, {1}, {2}), topic(2, 50, {1}, {7})};
  EXPECT_EQ(assign_topic(Vec{7.0}, lib), 2);
  EXPECT_EQ(assign_topic(Vec{1.0}, lib), 0);
  EXPECT_THROW(assign_topic(Vec{1.0, 2.0}, lib), Error);
}

TEST(AssignTopic, MatchesLinearScan) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto lib = fixtures::library(rng, 5, 4);
    const Vec e = ref::random_vec(rng, 4);
    TopicId best = -1;
    double best_d = 1e300;
    for (const auto& t : lib.topics) {
      const double d = ref::scalar_distance(e, t.centroid);
      if (d < best_d) {
        best_d = d;
        best = t.id;
      }
    }
    EXPECT_EQ(assign_topic(e, lib), best);
  }
}

TEST(AssignTopic, AbsorbedCentroidsRouteToOther) {
  TopicLibrary lib;
  lib.dim_s = 1;
  lib.topics = {topic(0, 5, {1}, {0}), topic(1, 100, {1}, {4}), topic(2, 5, {1}, {10})};
  const auto merged = merge_small_topics(lib);
  EXPECT_EQ(assign_topic(Vec{10.0}, merged), *merged.other_topic_id);
  EXPECT_EQ(assign_topic(Vec{0.1}, merged), *merged.other_topic_id);
  EXPECT_EQ(assign_topic(Vec{4.2}, merged), 1);
}

TEST(Labeling, StaticNamesApplied) {
  StaticLabeler lab({{0, "code"}, {1, "health"}});
  const auto res = label_clusters({{"a"}, {"b"}}, &lab, 1);
  EXPECT_EQ(res.names, (std::vector<std::string>{"code", "health"}));
  EXPECT_FALSE(res.fallback_used);
}

TEST(Labeling, UnavailableFallsBack) {
  FailingLabeler lab;
  const auto res = label_clusters({{"a"}, {"b"}, {"c"}}, &lab, 1);
  EXPECT_EQ(res.names, (std::vector<std::string>{"cluster-0", "cluster-1", "cluster-2"}));
  EXPECT_TRUE(res.fallback_used);
  EXPECT_TRUE(label_clusters({{"a"}}, nullptr, 1).fallback_used);
}

TEST(Labeling, InvalidNamesFallBack) {
  RecordingLabeler lab;
  lab.reply = "far too many words here";
  EXPECT_EQ(label_clusters({{"a"}}, &lab, 1).names[0], "cluster-0");
  lab.reply = "   ";
  EXPECT_EQ(label_clusters({{"a"}}, &lab, 1).names[0], "cluster-0");
  lab.reply = "medical advice";
  EXPECT_EQ(label_clusters({{"a"}}, &lab, 1).names[0], "medical advice");
}

TEST(Labeling, SampleSizeClamps) {
  RecordingLabeler lab;
  std::vector<std::string> small{"p1", "p2", "p3"};
  std::vector<std::string> big;
  for (int i = 0; i < 100; ++i) big.push_back("q" + std::to_string(i));
  label_clusters({small, big}, &lab, 5, 32);
  ASSERT_EQ(lab.seen.size(), 2u);
  EXPECT_EQ(lab.seen[0].prompts, small);
  EXPECT_EQ(lab.seen[1].prompts.size(), 32u);
  std::set<std::string> uniq(lab.seen[1].prompts.begin(), lab.seen[1].prompts.end());
  EXPECT_EQ(uniq.size(), 32u);
}

TEST(Library, FromClustersCountsMembers) {
  KMeansResult km;
  km.assignments = {0, 1, 1, 2, 1};
  km.centroids = {{0.0}, {1.0}, {2.0}};
  const auto lib = library_from_clusters(km, {"a", "b", "c"});
  EXPECT_EQ(lib.dim_s, 1u);
  EXPECT_EQ(lib.at(1).member_count, 3);
  EXPECT_THROW(library_from_clusters(km, {"a"}), Error);
  try {
    lib.at(9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownTopic);
  }
}
