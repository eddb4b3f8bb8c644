#pragma once

// Command-line surface. `run_cli` is the whole program minus process setup so
// tests can drive it in-process. Exit codes: 0 ok, 1 validation/usage, 2 IO.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topoalign/analysis.hpp"
#include "topoalign/io.hpp"
#include "topoalign/kruskal_oracle.hpp"
#include "topoalign/labeler_http.hpp"
#include "topoalign/losses.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/scheduler.hpp"
#include "topoalign/topics.hpp"

namespace topoalign::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

namespace detail {

struct Output {
  std::ostream& out;
  std::ostream& err;

  void emit(const std::string& path, const std::string& text) const {
    if (path.empty() || path == "-")
      out << text;
    else
      io::write_file(path, text);
  }
};

inline std::optional<io::CloudFormat> parse_format(const std::string& f) {
  if (f == "bin") return io::CloudFormat::Binary;
  if (f == "jsonl") return io::CloudFormat::JsonLines;
  return std::nullopt;  // auto
}

inline void require_seed(const CLI::Option* opt, const std::optional<std::uint64_t>& config_seed,
                         const std::string& what) {
  if (opt->count() == 0 && !config_seed)
    throw Error(ErrorKind::InvalidArgument, what + " is stochastic; pass --seed (or set seed in --config)");
}

inline std::vector<Bridge> pair_cloud(const LabeledPointCloud& cloud, const std::string& mode, std::uint64_t seed,
                                      unsigned threads) {
  if (mode == "ph") return ph_bridges(cloud, threads);
  if (mode == "random") return baseline_pairs(cloud, BaselineMode::Random, seed);
  if (mode == "per_example") return baseline_pairs(cloud, BaselineMode::PerExample, seed);
  return baseline_pairs(cloud, BaselineMode::Knn, seed);
}

inline LabeledPointCloud random_cloud(std::size_t n, std::size_t d, Rng& rng) {
  Matrix pts(n, d);
  for (double& v : pts.data()) v = rng.normal();
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint8_t>(rng.index(2));
  return {std::move(pts), labels};
}

}  // namespace detail

// Shared flags resolved against an optional --config file.
struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CLI::Option* seed_opt = nullptr;

  io::RunConfig load() const {
    if (config_path.empty()) return {};
    return io::decode_run_config(io::read_file(config_path));
  }

  std::optional<std::uint64_t> resolved_seed(const io::RunConfig& cfg) const {
    if (seed_opt && seed_opt->count() > 0) return seed;
    return cfg.seed;
  }
};

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"topoalign: persistent-homology alignment losses and tooling", "topoalign"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "topoalign 1.0.0");
  detail::Output sink{out, err};
  std::function<void()> action;

  auto add_common = [](CLI::App* sub, CommonFlags& f, bool with_seed) {
    sub->add_option("--config", f.config_path, "RunConfig JSON file");
    sub->add_option("--threads", f.threads, "Threads for distance computation")->check(CLI::Range(1u, 256u));
    if (with_seed) f.seed_opt = sub->add_option("--seed", f.seed, "RNG seed");
  };

  // ---- bridges
  CommonFlags bridges_flags;
  std::string bridges_input, bridges_output, bridges_format = "auto", bridges_mode = "ph";
  auto* bridges = app.add_subcommand("bridges", "Extract PH bridges (or baseline pairings) from a point cloud");
  bridges->add_option("--input", bridges_input, "Point cloud (.bin or .jsonl)")->required();
  bridges->add_option("--output", bridges_output, "Bridge JSON-lines output (default stdout)");
  bridges->add_option("--format", bridges_format)->check(CLI::IsMember({"auto", "bin", "jsonl"}));
  bridges->add_option("--mode", bridges_mode)->check(CLI::IsMember({"ph", "random", "per_example", "knn"}));
  add_common(bridges, bridges_flags, true);
  bridges->callback([&] {
    action = [&] {
      const auto cfg = bridges_flags.load();
      const auto seed = bridges_flags.resolved_seed(cfg);
      if (bridges_mode == "random") detail::require_seed(bridges_flags.seed_opt, cfg.seed, "--mode random");
      const auto cloud = io::read_point_cloud(bridges_input, detail::parse_format(bridges_format));
      const auto pairs = detail::pair_cloud(cloud, bridges_mode, seed.value_or(0), bridges_flags.threads);
      sink.emit(bridges_output, io::encode_bridges(cloud, pairs));
    };
  });

  // ---- ttl
  CommonFlags ttl_flags;
  std::string ttl_batch, ttl_output, ttl_pairing = "ph";
  bool ttl_grads = false;
  double ttl_ce = 0.0, ttl_lambda = kDefaultLambdaTopo, ttl_cos_eps = kDefaultCosineEps;
  auto* ttl = app.add_subcommand("ttl", "Trajectory topology loss over a batch");
  ttl->add_option("--batch", ttl_batch, "Trajectory batch JSON-lines")->required();
  ttl->add_option("--output", ttl_output);
  ttl->add_option("--pairing", ttl_pairing)->check(CLI::IsMember({"ph", "random", "per_example", "knn"}));
  ttl->add_flag("--grads", ttl_grads, "Include gradients");
  auto* ttl_ce_opt = ttl->add_option("--ce", ttl_ce, "Cross-entropy value to combine with");
  auto* ttl_lambda_opt = ttl->add_option("--lambda-topo", ttl_lambda)->check(CLI::NonNegativeNumber);
  auto* ttl_eps_opt = ttl->add_option("--cosine-eps", ttl_cos_eps);
  add_common(ttl, ttl_flags, true);
  ttl->callback([&] {
    action = [&] {
      const auto cfg = ttl_flags.load();
      if (ttl_pairing == "random") detail::require_seed(ttl_flags.seed_opt, cfg.seed, "--pairing random");
      const double lambda = ttl_lambda_opt->count() ? ttl_lambda : cfg.lambda_topo;
      const double eps = ttl_eps_opt->count() ? ttl_cos_eps : cfg.cosine_eps;
      const auto batch = io::decode_trajectory_batch(io::read_file(ttl_batch));
      const auto cloud = batch.point_cloud();
      const auto pairs = detail::pair_cloud(cloud, ttl_pairing, ttl_flags.resolved_seed(cfg).value_or(0), ttl_flags.threads);
      const auto result = ttl_loss(batch, pairs, ttl_grads, eps);
      auto doc = io::loss_result_json(result);
      doc["pairing"] = ttl_pairing;
      doc["lambda_topo"] = io::number(lambda);
      doc["layer_tag"] = cfg.layer_tag;
      if (ttl_ce_opt->count()) doc["sft_total"] = io::number(combine_sft(ttl_ce, result.value, lambda));
      sink.emit(ttl_output, doc.dump(2) + "\n");
    };
  });

  // ---- tpo / topo-tpo share projection handling
  struct PrefFlags {
    CommonFlags common;
    std::string batch, library, projection, output, save_projection;
    bool init_projection = false, grads = false, no_layer_norm = false, normalize = false;
    double ln_eps = kDefaultLayerNormEps, cos_eps = kDefaultCosineEps, dpo = 0.0, lambda_dyn = 0.0;
    CLI::Option *ln_eps_opt = nullptr, *cos_eps_opt = nullptr, *dpo_opt = nullptr, *lambda_opt = nullptr;
  };
  auto add_pref = [&](CLI::App* sub, PrefFlags& f) {
    sub->add_option("--batch", f.batch, "Preference batch JSON-lines")->required();
    sub->add_option("--library", f.library, "Topic library file")->required();
    auto* p = sub->add_option("--projection", f.projection, "Projection JSON file");
    auto* init = sub->add_flag("--init-projection", f.init_projection, "Initialize P from --seed");
    p->excludes(init);
    sub->add_option("--save-projection", f.save_projection, "Write the projection used");
    sub->add_option("--output", f.output);
    sub->add_flag("--grads", f.grads, "Include gradients");
    f.ln_eps_opt = sub->add_option("--ln-eps", f.ln_eps);
    f.cos_eps_opt = sub->add_option("--cosine-eps", f.cos_eps);
    f.dpo_opt = sub->add_option("--dpo", f.dpo, "DPO loss value to combine with");
    f.lambda_opt = sub->add_option("--lambda-dyn", f.lambda_dyn)->check(CLI::NonNegativeNumber);
    add_common(sub, f.common, true);
  };
  auto load_pref = [&](PrefFlags& f, const io::RunConfig& cfg, const PreferenceBatch& batch,
                       const TopicLibrary& lib) -> Projection {
    if (!f.projection.empty()) return io::decode_projection(io::read_file(f.projection));
    if (!f.init_projection) throw Error(ErrorKind::InvalidArgument, "pass --projection or --init-projection");
    detail::require_seed(f.common.seed_opt, cfg.seed, "--init-projection");
    return Projection::initialize(batch.dim(), lib.dim_s, *f.common.resolved_seed(cfg));
  };
  auto finish_pref = [&](PrefFlags& f, const Projection& proj, nlohmann::ordered_json doc, double value) {
    if (f.dpo_opt->count()) {
      if (!f.lambda_opt->count()) throw Error(ErrorKind::InvalidArgument, "--dpo needs --lambda-dyn");
      doc["dpo_total"] = io::number(combine_dpo(f.dpo, value, f.lambda_dyn));
    }
    if (!f.save_projection.empty()) io::write_file(f.save_projection, io::encode_projection(proj));
    sink.emit(f.output, doc.dump(2) + "\n");
  };

  PrefFlags tpo_flags;
  auto* tpo = app.add_subcommand("tpo", "Vector-difference topological preference loss");
  add_pref(tpo, tpo_flags);
  tpo->add_flag("--no-layer-norm", tpo_flags.no_layer_norm, "Use raw differences instead of LN");
  tpo->callback([&] {
    action = [&] {
      const auto cfg = tpo_flags.common.load();
      const auto batch = io::decode_preference_batch(io::read_file(tpo_flags.batch));
      const auto lib = io::read_library(tpo_flags.library);
      const auto proj = load_pref(tpo_flags, cfg, batch, lib);
      TpoOptions opts;
      opts.layer_norm = !tpo_flags.no_layer_norm;
      opts.ln_eps = tpo_flags.ln_eps_opt->count() ? tpo_flags.ln_eps : cfg.ln_eps;
      opts.cosine_eps = tpo_flags.cos_eps_opt->count() ? tpo_flags.cos_eps : cfg.cosine_eps;
      const auto result = tpo_loss(batch, lib, proj, opts, tpo_flags.grads);
      auto doc = io::loss_result_json(result);
      doc["layer_norm"] = opts.layer_norm;
      doc["layer_tag"] = cfg.layer_tag;
      finish_pref(tpo_flags, proj, doc, result.value);
    };
  });

  PrefFlags topo_flags;
  auto* topo = app.add_subcommand("topo-tpo", "Fully topological preference loss");
  add_pref(topo, topo_flags);
  topo->add_flag("--normalize", topo_flags.normalize, "Layer-normalize embeddings before building the cloud");
  topo->callback([&] {
    action = [&] {
      const auto cfg = topo_flags.common.load();
      const auto batch = io::decode_preference_batch(io::read_file(topo_flags.batch));
      const auto lib = io::read_library(topo_flags.library);
      const auto proj = load_pref(topo_flags, cfg, batch, lib);
      TopoTpoOptions opts;
      opts.normalize = topo_flags.normalize;
      opts.ln_eps = topo_flags.ln_eps_opt->count() ? topo_flags.ln_eps : cfg.ln_eps;
      opts.cosine_eps = topo_flags.cos_eps_opt->count() ? topo_flags.cos_eps : cfg.cosine_eps;
      opts.threads = topo_flags.common.threads;
      const auto result = topo_tpo_loss(batch, lib, proj, opts, topo_flags.grads);
      auto doc = io::loss_result_json(result);
      doc["normalize"] = opts.normalize;
      doc["layer_tag"] = cfg.layer_tag;
      finish_pref(topo_flags, proj, doc, result.value);
    };
  });

  // ---- topics-build
  CommonFlags tb_flags;
  std::string tb_prompts, tb_library, tb_names, tb_url, tb_texts, tb_templates, tb_emit, tb_embedded, tb_output,
      tb_format = "auto";
  std::size_t tb_k = kDefaultClusterCount, tb_iters = 300, tb_sample = kDefaultLabelerSampleSize;
  std::int64_t tb_min = kDefaultMinTopicMembers;
  bool tb_normalize = false;
  auto* tb = app.add_subcommand("topics-build",
                                "Stage 1 (--prompts): cluster + name topics, emit template sentences. "
                                "Stage 2 (--library): ingest template embeddings, build u_t, merge small topics.");
  auto* tb_prompts_opt = tb->add_option("--prompts", tb_prompts, "Prompt sentence embeddings (point cloud)");
  auto* tb_library_opt = tb->add_option("--library", tb_library, "Stage-1 library to complete");
  tb_prompts_opt->excludes(tb_library_opt);
  tb->add_option("--format", tb_format)->check(CLI::IsMember({"auto", "bin", "jsonl"}));
  tb->add_option("--k", tb_k, "Cluster count")->check(CLI::PositiveNumber);
  tb->add_option("--max-iters", tb_iters)->check(CLI::PositiveNumber);
  tb->add_flag("--normalize", tb_normalize, "L2-normalize embeddings before clustering");
  tb->add_option("--names", tb_names, "Offline JSON map cluster id -> name");
  tb->add_option("--labeler-url", tb_url, "HTTP labeler endpoint (token from TOPOALIGN_LABELER_TOKEN)");
  tb->add_option("--prompt-texts", tb_texts, "JSON-lines {id, text} for labeler payloads");
  tb->add_option("--sample-size", tb_sample, "Prompts sent per cluster")->check(CLI::PositiveNumber);
  tb->add_option("--templates", tb_templates, "Template pair JSON (default: built-in set)");
  tb->add_option("--emit-templates", tb_emit, "Write template sentences to encode (stage 1)");
  tb->add_option("--template-embeddings", tb_embedded, "Encoded templates JSON-lines (stage 2)");
  tb->add_option("--min-members", tb_min, "Merge topics below this size")->check(CLI::PositiveNumber);
  tb->add_option("--output", tb_output, "Library output")->required();
  add_common(tb, tb_flags, true);
  tb->callback([&] {
    action = [&] {
      const auto cfg = tb_flags.load();
      if (tb_prompts_opt->count()) {
        detail::require_seed(tb_flags.seed_opt, cfg.seed, "topics-build clustering");
        const std::uint64_t seed = *tb_flags.resolved_seed(cfg);
        const auto cloud = io::read_point_cloud(tb_prompts, detail::parse_format(tb_format));
        std::vector<Vec> emb;
        for (std::size_t i = 0; i < cloud.size(); ++i) emb.push_back(cloud.points().row_vec(i));
        const auto clusters = kmeans_cluster(emb, tb_k, seed, tb_iters, tb_normalize);

        std::unique_ptr<Labeler> labeler;
        if (!tb_names.empty()) {
          labeler = std::make_unique<StaticLabeler>(io::decode_name_map(io::read_file(tb_names)));
        } else if (!tb_url.empty()) {
          labeler = std::make_unique<HttpLabeler>(tb_url);
        }
        std::vector<std::vector<std::string>> prompts(tb_k);
        if (!tb_texts.empty()) {
          const auto texts = io::decode_prompt_texts(io::read_file(tb_texts));
          for (std::size_t i = 0; i < cloud.size(); ++i) {
            auto it = texts.find(cloud.ids()[i]);
            if (it != texts.end()) prompts[clusters.assignments[i]].push_back(it->second);
          }
        } else if (!tb_url.empty()) {
          throw Error(ErrorKind::InvalidArgument, "--labeler-url needs --prompt-texts");
        }
        const auto labels = label_clusters(prompts, labeler.get(), seed, tb_sample);
        TopicLibrary lib = library_from_clusters(clusters, labels.names);
        if (labels.fallback_used) {
          lib.warnings.push_back(kWarningLabelerFallback);
          err << "warning: topic labeler unavailable or returned invalid names; using cluster-<id> fallback\n";
        }
        lib.metadata["stage"] = "clustered";
        lib.metadata["k"] = std::to_string(tb_k);
        lib.metadata["seed"] = std::to_string(seed);
        lib.metadata["normalize"] = tb_normalize ? "true" : "false";
        lib.metadata["iterations"] = std::to_string(clusters.iterations);
        quantize_for_storage(lib);
        const auto templates = tb_templates.empty() ? default_templates() : io::decode_templates(io::read_file(tb_templates));
        if (!tb_emit.empty()) io::write_file(tb_emit, io::encode_template_sentences(lib, templates));
        io::write_library(tb_output, lib);
      } else if (tb_library_opt->count()) {
        if (tb_embedded.empty()) throw Error(ErrorKind::InvalidArgument, "stage 2 needs --template-embeddings");
        TopicLibrary lib = io::read_library(tb_library);
        apply_template_embeddings(lib, io::decode_embedded_templates(io::read_file(tb_embedded)));
        lib = merge_small_topics(lib, tb_min);
        lib.metadata["stage"] = "complete";
        lib.metadata["min_members"] = std::to_string(tb_min);
        quantize_for_storage(lib);
        io::write_library(tb_output, lib);
      } else {
        throw Error(ErrorKind::InvalidArgument, "topics-build needs --prompts (stage 1) or --library (stage 2)");
      }
    };
  });

  // ---- topics-assign
  std::string ta_library, ta_input, ta_output, ta_format = "auto";
  auto* ta = app.add_subcommand("topics-assign", "Assign prompt embeddings to their nearest topic");
  ta->add_option("--library", ta_library)->required();
  ta->add_option("--input", ta_input, "Prompt embeddings (point cloud)")->required();
  ta->add_option("--format", ta_format)->check(CLI::IsMember({"auto", "bin", "jsonl"}));
  ta->add_option("--output", ta_output);
  ta->callback([&] {
    action = [&] {
      const auto lib = io::read_library(ta_library);
      const auto cloud = io::read_point_cloud(ta_input, detail::parse_format(ta_format));
      const bool normalize = lib.metadata.count("normalize") && lib.metadata.at("normalize") == "true";
      std::string text;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec e = normalize ? l2_normalized(cloud.points().row(i)) : cloud.points().row_vec(i);
        const TopicId t = assign_topic(e, lib);
        io::json rec;
        rec["id"] = cloud.ids()[i];
        rec["topic_id"] = t;
        rec["name"] = lib.at(t).name;
        text += rec.dump() + "\n";
      }
      sink.emit(ta_output, text);
    };
  });

  // ---- schedule simulate
  std::string sc_input, sc_output;
  SchedulerConfig sc_cfg;
  CommonFlags sc_flags;
  auto* schedule = app.add_subcommand("schedule", "EMA dynamic loss weighting");
  schedule->require_subcommand(1);
  auto* simulate = schedule->add_subcommand("simulate", "Replay a step,dpo,tpo trace into a lambda trajectory");
  simulate->add_option("--input", sc_input, "Loss trace (step,dpo,tpo)")->required();
  simulate->add_option("--output", sc_output);
  auto* gamma_opt = simulate->add_option("--gamma", sc_cfg.gamma);
  auto* alpha_opt = simulate->add_option("--alpha", sc_cfg.alpha);
  auto* eps_opt = simulate->add_option("--eps", sc_cfg.eps);
  auto* warm_opt = simulate->add_option("--warmup", sc_cfg.warmup_steps);
  simulate->add_option("--config", sc_flags.config_path, "RunConfig JSON file");
  simulate->callback([&] {
    action = [&] {
      SchedulerConfig c = sc_flags.load().scheduler;
      if (gamma_opt->count()) c.gamma = sc_cfg.gamma;
      if (alpha_opt->count()) c.alpha = sc_cfg.alpha;
      if (eps_opt->count()) c.eps = sc_cfg.eps;
      if (warm_opt->count()) c.warmup_steps = sc_cfg.warmup_steps;
      const auto trace = io::decode_loss_trace(io::read_file(sc_input));
      sink.emit(sc_output, io::encode_lambda_trace(trace, simulate_schedule(trace, c)));
    };
  });

  // ---- analyze
  CommonFlags an_flags;
  std::string an_traj, an_pref, an_library, an_projection, an_scores_a, an_scores_b, an_cloud, an_output,
      an_format = "auto";
  std::size_t an_bins = 20;
  bool an_no_ln = false;
  auto* an = app.add_subcommand("analyze", "Cosine distributions, per-topic gains and bridge statistics");
  an->add_option("--trajectory", an_traj, "Trajectory batch for rho distribution");
  an->add_option("--preference", an_pref, "Preference batch for sigma distribution");
  an->add_option("--library", an_library);
  an->add_option("--projection", an_projection);
  an->add_flag("--no-layer-norm", an_no_ln);
  an->add_option("--scores-a", an_scores_a, "Baseline scores id,rm,help");
  an->add_option("--scores-b", an_scores_b, "Candidate scores id,rm,help");
  an->add_option("--cloud", an_cloud, "Point cloud for bridge statistics");
  an->add_option("--format", an_format)->check(CLI::IsMember({"auto", "bin", "jsonl"}));
  an->add_option("--bins", an_bins)->check(CLI::PositiveNumber);
  an->add_option("--output", an_output);
  add_common(an, an_flags, false);
  an->callback([&] {
    action = [&] {
      const auto cfg = an_flags.load();
      io::json report;
      report["bins"] = an_bins;
      if (!an_traj.empty()) {
        const auto batch = io::decode_trajectory_batch(io::read_file(an_traj));
        const auto rho = trajectory_cosines(batch, an_flags.threads);
        io::json r;
        r["count"] = rho.size();
        r["histogram"] = io::histogram_json(cosine_distribution(rho, an_bins));
        io::json values = io::json::array();
        for (const auto& rec : rho) values.push_back({{"id", rec.id}, {"value", io::number(rec.value)}});
        r["values"] = values;
        report["rho"] = r;
      }
      if (!an_pref.empty()) {
        if (an_library.empty() || an_projection.empty())
          throw Error(ErrorKind::InvalidArgument, "--preference needs --library and --projection");
        const auto batch = io::decode_preference_batch(io::read_file(an_pref));
        const auto lib = io::read_library(an_library);
        const auto proj = io::decode_projection(io::read_file(an_projection));
        TpoOptions opts;
        opts.layer_norm = !an_no_ln;
        opts.ln_eps = cfg.ln_eps;
        opts.cosine_eps = cfg.cosine_eps;
        const auto sigma = improvement_cosines(batch, lib, proj, opts);
        io::json s;
        s["count"] = sigma.size();
        s["histogram"] = io::histogram_json(cosine_distribution(sigma, an_bins));
        if (!an_scores_a.empty() || !an_scores_b.empty()) {
          if (an_scores_a.empty() || an_scores_b.empty())
            throw Error(ErrorKind::InvalidArgument, "--scores-a and --scores-b go together");
          s["topics"] = io::topic_rows_json(per_topic_gains(sigma, io::decode_scores(io::read_file(an_scores_a)),
                                                            io::decode_scores(io::read_file(an_scores_b))));
        }
        report["sigma"] = s;
      }
      if (!an_cloud.empty()) {
        const auto cloud = io::read_point_cloud(an_cloud, detail::parse_format(an_format));
        const auto stats = bridge_statistics(cloud, an_flags.threads);
        report["bridges"] = {{"ph", io::length_stats_json(stats.ph)}, {"knn", io::length_stats_json(stats.knn)}};
      }
      sink.emit(an_output, report.dump(2) + "\n");
    };
  });

  // ---- oracle-check
  CommonFlags oc_flags;
  std::size_t oc_n = 32, oc_d = 8, oc_trials = 50;
  auto* oc = app.add_subcommand("oracle-check", "Compare death edges with a brute-force Kruskal oracle");
  oc->add_option("--n", oc_n)->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
  oc->add_option("--d", oc_d)->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
  oc->add_option("--trials", oc_trials)->check(CLI::PositiveNumber);
  add_common(oc, oc_flags, true);
  int oracle_exit = kExitOk;
  oc->callback([&] {
    action = [&] {
      const auto cfg = oc_flags.load();
      detail::require_seed(oc_flags.seed_opt, cfg.seed, "oracle-check");
      const std::uint64_t seed = *oc_flags.resolved_seed(cfg);
      Rng rng(seed);
      std::size_t passes = 0;
      for (std::size_t t = 0; t < oc_trials; ++t) {
        const auto cloud = detail::random_cloud(oc_n, oc_d, rng);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < cloud.size(); ++i) rows.push_back(cloud.points().row_vec(i));
        const auto expected = oracle::kruskal_mst_pairs(rows);
        std::vector<std::pair<std::size_t, std::size_t>> got;
        for (const auto& e : death_edges(cloud, oc_flags.threads)) got.emplace_back(e.i, e.j);
        std::sort(got.begin(), got.end());
        if (got == expected && got.size() == oc_n - 1) ++passes;
      }
      out << "oracle-check: " << passes << "/" << oc_trials << " Kruskal-equivalence passes (n=" << oc_n
          << ", d=" << oc_d << ", seed=" << seed << ")\n";
      if (passes != oc_trials) oracle_exit = kExitValidation;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (action) action();
    return oracle_exit;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Io ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace topoalign::cli
