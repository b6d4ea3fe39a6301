#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcskel/datagen.hpp"
#include "dcskel/error.hpp"
#include "dcskel/io.hpp"
#include "dcskel/learner.hpp"
#include "dcskel/metrics.hpp"
#include "dcskel/parallel.hpp"

namespace dcskel {

/// Declarative description of a simulation grid.
///
/// Every (source, graph, noise, dataset) combination gets its own sampled
/// dataset. Run r > 0 re-evaluates the same dataset with its columns shuffled
/// by a seeded permutation; results are mapped back before scoring.
struct ExperimentSpec {
  std::string experiment = "ablation";  // ablation | measure-comparison | benchmark
  std::uint64_t seed = 1;
  std::vector<int> p{20};
  std::vector<std::string> networks;  // Gaussian-network JSON files; replaces `p` when non-empty
  int n = 5000;
  int graphs = 1;
  int datasets = 1;
  int runs = 1;
  std::vector<std::string> noise{"gaussian"};
  std::vector<std::string> measures{"ce"};
  std::vector<std::string> variants;  // default depends on the experiment
  std::optional<double> edge_prob;
  double weight_low = 0.5;
  double weight_high = 0.9;
  double alpha = 0.05;
  int knn = 3;
  std::optional<int> max_order;
  std::optional<int> max_block_size;
  int expansion_depth = 1;
  std::string output_dir;

  std::vector<std::string> resolved_variants() const {
    if (!variants.empty()) return variants;
    if (experiment == "ablation") return {"pipeline", "no-partition"};
    if (experiment == "benchmark") return {"pipeline", "pc-stable"};
    return {"pipeline"};
  }

  void validate() const {
    if (experiment != "ablation" && experiment != "measure-comparison" && experiment != "benchmark") {
      fail(ErrorKind::invalid_argument, "spec: unknown experiment '" + experiment + "'");
    }
    if (graphs < 1 || datasets < 1 || runs < 1) fail(ErrorKind::invalid_argument, "spec: replicate counts must be >= 1");
    if (n < 1) fail(ErrorKind::invalid_argument, "spec: n must be >= 1");
    if (networks.empty() && p.empty()) fail(ErrorKind::invalid_argument, "spec: need 'p' values or 'networks'");
    for (int v : p)
      if (v < 2) fail(ErrorKind::invalid_argument, "spec: every p must be >= 2");
    for (const auto& f : networks)
      if (!std::filesystem::exists(f)) fail(ErrorKind::io, "spec: network file '" + f + "' does not exist");
    for (const auto& f : noise) (void)parse_noise_family(f);
    for (const auto& m : measures) (void)parse_dependence_kind(m);
    for (const auto& v : resolved_variants())
      if (v != "pipeline" && v != "no-partition" && v != "pc-stable") {
        fail(ErrorKind::invalid_argument, "spec: unknown variant '" + v + "'");
      }
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::invalid_argument, "spec: alpha must lie in (0, 1)");
  }
};

inline ExperimentSpec parse_experiment_spec(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse, std::string("spec: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::parse, "spec: expected a JSON object");
  ExperimentSpec s;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key) && !j[key].is_null()) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    auto get_opt = [&](const char* key, auto& field) {
      if (j.contains(key) && !j[key].is_null()) field = j[key].get<typename std::decay_t<decltype(field)>::value_type>();
    };
    get("experiment", s.experiment);
    get("seed", s.seed);
    if (j.contains("p") && j["p"].is_number_integer()) s.p = {j["p"].get<int>()};
    else get("p", s.p);
    get("networks", s.networks);
    get("n", s.n);
    get("graphs", s.graphs);
    get("datasets", s.datasets);
    get("runs", s.runs);
    get("noise", s.noise);
    get("measures", s.measures);
    get("variants", s.variants);
    get_opt("edge_prob", s.edge_prob);
    get("weight_low", s.weight_low);
    get("weight_high", s.weight_high);
    get("alpha", s.alpha);
    get("knn", s.knn);
    get_opt("max_order", s.max_order);
    get_opt("max_block_size", s.max_block_size);
    get("expansion_depth", s.expansion_depth);
    get("output_dir", s.output_dir);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("spec: ") + e.what());
  }
  return s;
}

inline ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  return parse_experiment_spec(read_text_file(path));
}

struct BenchRow {
  std::string experiment;
  std::string source;  // "random" or network file stem
  int p = 0;
  int graph = 0;
  int dataset = 0;
  int run = 0;
  std::string measure;
  std::string noise;
  std::string variant;
  std::uint64_t seed = 0;
  std::string config_hash;
  SkeletonScore score;
  StageTimings timings;
};

struct BenchError {
  std::string cell;
  std::string message;
};

struct BenchOutput {
  std::vector<BenchRow> rows;
  std::vector<BenchError> errors;
  std::string runs_csv;
  std::string aggregate_csv;
  std::string timings_csv;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string num(double v) { return format_double(v); }

struct DataUnit {
  std::string source;
  int p = 0;
  int graph = 0;
  int dataset = 0;
  int run = 0;
  std::string noise;
  std::uint64_t graph_seed = 0;
  std::uint64_t data_seed = 0;
  const GaussianSEM* network = nullptr;
};

inline std::vector<int> run_permutation(int p, int run, std::uint64_t data_seed) {
  std::vector<int> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  if (run > 0) {
    std::mt19937_64 rng(derive_seed(data_seed, 0x72756eULL, static_cast<std::uint64_t>(run)));
    std::shuffle(perm.begin(), perm.end(), rng);
  }
  return perm;
}

inline std::string row_key(const BenchRow& r) {
  return r.experiment + "|" + r.source + "|" + std::to_string(r.p) + "|" + r.measure + "|" + r.noise + "|" + r.variant;
}

}  // namespace detail

/// Runs every grid cell and renders the result tables. Deterministic given
/// the spec: rows are emitted in grid order regardless of `threads`.
inline BenchOutput run_bench(const ExperimentSpec& spec, unsigned threads = 1) {
  spec.validate();
  std::vector<GaussianSEM> networks;
  std::vector<std::string> network_names;
  for (const auto& f : spec.networks) {
    networks.push_back(load_gaussian_network(f));
    network_names.push_back(std::filesystem::path(f).stem().string());
  }

  std::vector<detail::DataUnit> units;
  auto add_units = [&](const std::string& source, int p, const GaussianSEM* net, std::size_t src_index) {
    const int graphs = net ? 1 : spec.graphs;
    const std::vector<std::string> noises = net ? std::vector<std::string>{"network"} : spec.noise;
    for (int g = 0; g < graphs; ++g) {
      const std::uint64_t graph_seed = derive_seed(spec.seed, fnv1a(source), static_cast<std::uint64_t>(p), src_index, g);
      for (const auto& noise : noises)
        for (int ds = 0; ds < spec.datasets; ++ds) {
          const std::uint64_t data_seed = derive_seed(graph_seed, fnv1a(noise), ds);
          for (int r = 0; r < spec.runs; ++r) units.push_back({source, p, g, ds, r, noise, graph_seed, data_seed, net});
        }
    }
  };
  if (networks.empty()) {
    for (std::size_t t = 0; t < spec.p.size(); ++t) add_units("random", spec.p[t], nullptr, t);
  } else {
    for (std::size_t t = 0; t < networks.size(); ++t) add_units(network_names[t], networks[t].p(), &networks[t], t);
  }

  const auto variants = spec.resolved_variants();
  std::vector<std::vector<BenchRow>> unit_rows(units.size());
  std::vector<std::vector<BenchError>> unit_errors(units.size());

  parallel_for(units.size(), threads, [&](std::size_t u) {
    const auto& unit = units[u];
    const std::string cell = spec.experiment + " source=" + unit.source + " p=" + std::to_string(unit.p) +
                             " graph=" + std::to_string(unit.graph) + " noise=" + unit.noise +
                             " dataset=" + std::to_string(unit.dataset) + " run=" + std::to_string(unit.run);
    GaussianSEM sem;
    Skeleton truth;
    Dataset data;
    try {
      if (unit.network) {
        sem = *unit.network;
      } else {
        GenConfig gc;
        gc.p = unit.p;
        gc.edge_prob = spec.edge_prob;
        gc.weight_low = spec.weight_low;
        gc.weight_high = spec.weight_high;
        gc.noise = NoiseSpec{parse_noise_family(unit.noise), 1.0};
        gc.n = spec.n;
        gc.seed = unit.graph_seed;
        sem = generate_dag(gc).sem;
        // the graph is shared across noise families; only the noise differs
      }
      truth = skeleton_of(sem);
      const Dataset raw = sample_sem(sem, spec.n, unit.data_seed);
      const auto perm = detail::run_permutation(unit.p, unit.run, unit.data_seed);
      data = raw.select(perm);
      // truth in permuted coordinates
      Skeleton permuted_truth(unit.p);
      std::vector<int> inverse(perm.size());
      for (std::size_t t = 0; t < perm.size(); ++t) inverse[perm[t]] = static_cast<int>(t);
      for (const auto& e : truth.edges()) permuted_truth.add_edge(inverse[e.u], inverse[e.v]);
      truth = std::move(permuted_truth);
    } catch (const Error& e) {
      unit_errors[u].push_back({cell, std::string("data: ") + e.what()});
      return;
    }

    // pipeline and no-partition start from the same scaffold; build it once per measure
    std::map<std::string, std::pair<Skeleton, double>> scaffolds;
    for (const auto& variant : variants) {
      const std::vector<std::string> measures =
          variant == "pc-stable" ? std::vector<std::string>{"none"} : spec.measures;
      for (const auto& measure : measures) {
        BenchRow row;
        row.experiment = spec.experiment;
        row.source = unit.source;
        row.p = unit.p;
        row.graph = unit.graph;
        row.dataset = unit.dataset;
        row.run = unit.run;
        row.measure = measure;
        row.noise = unit.noise;
        row.variant = variant;
        row.seed = unit.data_seed;
        LearnConfig cfg;
        cfg.alpha = spec.alpha;
        cfg.max_order = spec.max_order;
        cfg.partition.max_block_size = spec.max_block_size;
        cfg.partition.expansion_depth = spec.expansion_depth;
        cfg.seed = unit.data_seed;
        cfg.use_partition = variant == "pipeline";
        if (measure != "none") cfg.measure = DependenceMeasure{parse_dependence_kind(measure), spec.knn};
        nlohmann::ordered_json hash_doc = {
            {"experiment", spec.experiment}, {"source", unit.source},   {"p", unit.p},
            {"n", spec.n},                   {"graph", unit.graph},     {"dataset", unit.dataset},
            {"run", unit.run},               {"noise", unit.noise},     {"measure", measure},
            {"variant", variant},            {"alpha", spec.alpha},     {"knn", spec.knn},
            {"seed", unit.data_seed},        {"weight_low", spec.weight_low}, {"weight_high", spec.weight_high}};
        hash_doc["edge_prob"] = spec.edge_prob ? nlohmann::ordered_json(*spec.edge_prob) : nlohmann::ordered_json(nullptr);
        hash_doc["max_order"] = spec.max_order ? nlohmann::ordered_json(*spec.max_order) : nlohmann::ordered_json(nullptr);
        hash_doc["max_block_size"] =
            spec.max_block_size ? nlohmann::ordered_json(*spec.max_block_size) : nlohmann::ordered_json(nullptr);
        hash_doc["expansion_depth"] = spec.expansion_depth;
        row.config_hash = detail::hex64(fnv1a(hash_doc.dump()));
        try {
          LearnResult res;
          if (variant == "pc-stable") {
            res = run_pc_stable(data, cfg);
          } else {
            auto it = scaffolds.find(measure);
            if (it == scaffolds.end()) {
              const auto start = std::chrono::steady_clock::now();
              auto sc = detail::run_stage("scaffold", [&] { return build_super_structure(data, cfg.measure); });
              const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
              it = scaffolds.emplace(measure, std::pair{std::move(sc), ms}).first;
            }
            res = run_pipeline(data, cfg, &it->second.first);
            res.report.timings.scaffold_ms = it->second.second;
            res.report.timings.total_ms += it->second.second;
          }
          row.score = score_skeleton(res.skeleton, truth, res.report.unique_ci_tests);
          row.timings = res.report.timings;
          unit_rows[u].push_back(std::move(row));
        } catch (const Error& e) {
          unit_errors[u].push_back({cell + " variant=" + variant + " measure=" + measure + " config=" + row.config_hash,
                                    e.what()});
        }
      }
    }
  });

  BenchOutput out;
  for (std::size_t u = 0; u < units.size(); ++u) {
    for (auto& r : unit_rows[u]) out.rows.push_back(std::move(r));
    for (auto& e : unit_errors[u]) out.errors.push_back(std::move(e));
  }

  using detail::num;
  const std::string key_header = "experiment,p,measure,noise,variant,seed";
  auto key_cols = [](const BenchRow& r) {
    return r.experiment + "," + std::to_string(r.p) + "," + r.measure + "," + r.noise + "," + r.variant + "," +
           std::to_string(r.seed);
  };
  auto tail_cols = [](const BenchRow& r) {
    return r.source + "," + std::to_string(r.graph) + "," + std::to_string(r.dataset) + "," + std::to_string(r.run) +
           "," + r.config_hash;
  };
  out.runs_csv = key_header +
                 ",precision,recall,accuracy,f1,shd,ci_tests,tp,fp,fn,tn,source,graph,dataset,run,config_hash\n";
  out.timings_csv = key_header + ",source,graph,dataset,run,config_hash,wall_ms_scaffold,wall_ms_partition,"
                                 "wall_ms_learn,wall_ms_merge,wall_ms_total\n";
  for (const auto& r : out.rows) {
    const auto& s = r.score;
    out.runs_csv += key_cols(r) + "," + num(s.precision) + "," + num(s.recall) + "," + num(s.accuracy) + "," +
                    num(s.f1) + "," + std::to_string(s.shd) + "," + std::to_string(s.ci_tests) + "," +
                    std::to_string(s.tp) + "," + std::to_string(s.fp) + "," + std::to_string(s.fn) + "," +
                    std::to_string(s.tn) + "," + tail_cols(r) + "\n";
    const auto& t = r.timings;
    out.timings_csv += key_cols(r) + "," + tail_cols(r) + "," + num(t.scaffold_ms) + "," + num(t.partition_ms) + "," +
                       num(t.learn_ms) + "," + num(t.merge_ms) + "," + num(t.total_ms) + "\n";
  }

  // aggregate rows keyed by (experiment, source, p, measure, noise, variant) in first-seen order
  std::vector<std::string> order;
  std::map<std::string, std::vector<const BenchRow*>> groups;
  for (const auto& r : out.rows) {
    const auto k = detail::row_key(r);
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  out.aggregate_csv =
      "experiment,source,p,measure,noise,variant,count,precision_mean,precision_sd,recall_mean,recall_sd,"
      "accuracy_mean,accuracy_sd,f1_mean,f1_sd,shd_mean,shd_sd,ci_tests_mean,ci_tests_sd\n";
  for (const auto& k : order) {
    const auto& g = groups[k];
    std::vector<SkeletonScore> scores;
    for (const auto* r : g) scores.push_back(r->score);
    const auto a = aggregate_scores(scores);
    const auto& r0 = *g.front();
    out.aggregate_csv += r0.experiment + "," + r0.source + "," + std::to_string(r0.p) + "," + r0.measure + "," +
                         r0.noise + "," + r0.variant + "," + std::to_string(a.count);
    for (const auto* m : {&a.precision, &a.recall, &a.accuracy, &a.f1, &a.shd, &a.ci_tests}) {
      out.aggregate_csv += "," + num(m->mean) + "," + num(m->stddev);
    }
    out.aggregate_csv += "\n";
  }
  return out;
}

/// Writes runs.csv, aggregate.csv, timings.csv and (if any) errors.log.
inline void write_bench_output(const BenchOutput& out, const std::filesystem::path& dir) {
  write_text_file(dir / "runs.csv", out.runs_csv);
  write_text_file(dir / "aggregate.csv", out.aggregate_csv);
  write_text_file(dir / "timings.csv", out.timings_csv);
  const auto err_path = dir / "errors.log";
  if (!out.errors.empty()) {
    std::string text;
    for (const auto& e : out.errors) text += e.cell + ": " + e.message + "\n";
    write_text_file(err_path, text);
  } else if (std::filesystem::exists(err_path)) {
    std::filesystem::remove(err_path);
  }
}

}  // namespace dcskel
