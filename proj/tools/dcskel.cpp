// dcskel command-line driver: data generation, each pipeline stage, the
// PC-stable baseline, scoring, and declarative simulation grids.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcskel/dcskel.hpp"

namespace fs = std::filesystem;
using namespace dcskel;

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

struct LearnOptions {
  std::string data;
  double alpha = 0.05;
  std::string measure = "ce";
  int knn = 3;
  int max_order = -1;
  int max_block_size = 0;
  int min_blocks = 1;
  int depth = 1;
  bool no_partition = false;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string report;
};

LearnConfig to_config(const LearnOptions& o) {
  LearnConfig cfg;
  cfg.alpha = o.alpha;
  if (o.max_order >= 0) cfg.max_order = o.max_order;
  cfg.measure = DependenceMeasure{parse_dependence_kind(o.measure), o.knn};
  if (o.max_block_size > 0) cfg.partition.max_block_size = o.max_block_size;
  cfg.partition.min_blocks = o.min_blocks;
  cfg.partition.expansion_depth = o.depth;
  cfg.use_partition = !o.no_partition;
  cfg.threads = o.threads;
  cfg.seed = o.seed;
  return cfg;
}

std::string score_row(const std::string& label, const SkeletonScore& s) {
  return label + "," + detail::format_double(s.precision) + "," + detail::format_double(s.recall) + "," +
         detail::format_double(s.accuracy) + "," + detail::format_double(s.f1) + "," + std::to_string(s.shd) + "," +
         std::to_string(s.ci_tests) + "," + std::to_string(s.tp) + "," + std::to_string(s.fp) + "," +
         std::to_string(s.fn) + "," + std::to_string(s.tn) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divide-and-conquer causal skeleton discovery"};
  app.require_subcommand(1);
  std::string stage = "cli";

  // gen ---------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Sample a random DAG (or load a network) and draw a dataset");
  GenConfig gen_cfg;
  double gen_edge_prob = 0.0;
  std::string gen_noise = "gaussian";
  std::string gen_network, gen_data = "data.csv", gen_truth = "truth.json", gen_sem;
  gen->add_option("--p", gen_cfg.p, "Node count")->check(CLI::Range(2, 100000));
  gen->add_option("--n", gen_cfg.n, "Sample count")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_cfg.seed, "Random seed");
  gen->add_option("--edge-prob", gen_edge_prob, "Bernoulli edge probability (default 0.075 p/(p-1))");
  gen->add_option("--weight-low", gen_cfg.weight_low, "Lower coefficient bound");
  gen->add_option("--weight-high", gen_cfg.weight_high, "Upper coefficient bound");
  gen->add_option("--noise", gen_noise, "gaussian|exponential|gamma|uniform");
  gen->add_option("--network", gen_network, "Gaussian-network JSON to sample instead of a random DAG");
  gen->add_option("--data", gen_data, "Output dataset CSV");
  gen->add_option("--truth", gen_truth, "Output true skeleton JSON");
  gen->add_option("--sem", gen_sem, "Output SEM as Gaussian-network JSON");

  // scaffold ----------------------------------------------------------------
  auto* scaffold = app.add_subcommand("scaffold", "Chow-Liu super-structure of a dataset");
  std::string sc_data, sc_measure = "ce", sc_out;
  int sc_knn = 3;
  unsigned sc_threads = 1;
  scaffold->add_option("--data", sc_data, "Dataset CSV")->required();
  scaffold->add_option("--measure", sc_measure, "ce|mi|pearson|spearman");
  scaffold->add_option("--knn", sc_knn, "Neighbor count for ce/mi");
  scaffold->add_option("--threads", sc_threads, "Worker threads (0 = all cores)");
  scaffold->add_option("--out", sc_out, "Output skeleton JSON (default stdout)");

  // partition ---------------------------------------------------------------
  auto* partition = app.add_subcommand("partition", "Girvan-Newman division plus causal expansion");
  std::string pa_scaffold, pa_out;
  int pa_max_block = 0, pa_min_blocks = 1, pa_depth = 1;
  bool pa_no_expand = false;
  partition->add_option("--scaffold", pa_scaffold, "Scaffold skeleton JSON")->required();
  partition->add_option("--max-block-size", pa_max_block, "Largest allowed block (default max(8, ceil(p/2)))");
  partition->add_option("--min-blocks", pa_min_blocks, "Minimum number of blocks");
  partition->add_option("--depth", pa_depth, "Expansion depth in hops");
  partition->add_flag("--no-expand", pa_no_expand, "Emit the disjoint blocks before expansion");
  partition->add_option("--out", pa_out, "Output partition JSON (default stdout)");

  // learn -------------------------------------------------------------------
  auto* learn = app.add_subcommand("learn", "Full pipeline (or --no-partition ablation)");
  LearnOptions lo;
  learn->add_option("--data", lo.data, "Dataset CSV")->required();
  learn->add_option("--alpha", lo.alpha, "Significance level");
  learn->add_option("--measure", lo.measure, "ce|mi|pearson|spearman");
  learn->add_option("--knn", lo.knn, "Neighbor count for ce/mi");
  learn->add_option("--max-order", lo.max_order, "Largest conditioning-set size (-1 = unbounded)");
  learn->add_option("--max-block-size", lo.max_block_size, "Largest block before expansion (0 = default)");
  learn->add_option("--min-blocks", lo.min_blocks, "Minimum number of blocks");
  learn->add_option("--depth", lo.depth, "Expansion depth in hops");
  learn->add_flag("--no-partition", lo.no_partition, "Ablation: learn the whole graph as one block");
  learn->add_option("--threads", lo.threads, "Worker threads (0 = all cores)");
  learn->add_option("--seed", lo.seed, "Seed recorded in the report");
  learn->add_option("--out", lo.out, "Output skeleton JSON (default stdout)");
  learn->add_option("--report", lo.report, "Output run report JSON");

  // baseline-pc -------------------------------------------------------------
  auto* pc = app.add_subcommand("baseline-pc", "PC-stable skeleton baseline");
  LearnOptions po;
  pc->add_option("--data", po.data, "Dataset CSV")->required();
  pc->add_option("--alpha", po.alpha, "Significance level");
  pc->add_option("--max-order", po.max_order, "Largest conditioning-set size (-1 = unbounded)");
  pc->add_option("--out", po.out, "Output skeleton JSON (default stdout)");
  pc->add_option("--report", po.report, "Output run report JSON");

  // eval --------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Score predicted skeletons against the truth");
  std::vector<std::string> ev_pred, ev_reports;
  std::string ev_truth, ev_out;
  eval->add_option("--pred", ev_pred, "Predicted skeleton JSON (repeatable)")->required();
  eval->add_option("--truth", ev_truth, "True skeleton JSON")->required();
  eval->add_option("--report", ev_reports, "Run report JSON per prediction, for the CI-test count");
  eval->add_option("--out", ev_out, "Output CSV (default stdout)");

  // bench -------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Run a declarative simulation grid");
  std::string be_spec, be_out;
  unsigned be_threads = 1;
  std::optional<std::uint64_t> be_seed;
  std::optional<int> be_n;
  bench->add_option("--spec", be_spec, "Experiment spec JSON")->required();
  bench->add_option("--out-dir", be_out, "Output directory (else DCSKEL_OUTPUT_DIR, else the spec's output_dir)");
  bench->add_option("--threads", be_threads, "Worker threads across grid cells (0 = all cores)");
  bench->add_option("--seed", be_seed, "Override the spec seed");
  bench->add_option("--n", be_n, "Override the sample count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      stage = "gen";
      GaussianSEM sem;
      if (!gen_network.empty()) {
        NetworkSummary summary;
        sem = load_gaussian_network(gen_network, &summary);
        std::cerr << "network: " << summary.nodes << " nodes, " << summary.arcs << " arcs\n";
      } else {
        if (gen_edge_prob > 0.0) gen_cfg.edge_prob = gen_edge_prob;
        gen_cfg.noise = NoiseSpec{parse_noise_family(gen_noise), 1.0};
        sem = generate_dag(gen_cfg).sem;
      }
      const Dataset d = sample_sem(sem, gen_cfg.n, derive_seed(gen_cfg.seed, 0x64617461ULL));
      save_dataset(d, gen_data);
      save_skeleton(skeleton_of(sem), gen_truth);
      if (!gen_sem.empty()) write_text_file(gen_sem, serialize_gaussian_network(sem) + "\n");
    } else if (*scaffold) {
      stage = "scaffold";
      const Dataset d = load_dataset(sc_data);
      const auto g = build_super_structure(d, DependenceMeasure{parse_dependence_kind(sc_measure), sc_knn}, sc_threads);
      emit(serialize_skeleton(g) + "\n", sc_out);
    } else if (*partition) {
      stage = "partition";
      const Skeleton g = load_skeleton(pa_scaffold);
      PartitionConfig cfg;
      if (pa_max_block > 0) cfg.max_block_size = pa_max_block;
      cfg.min_blocks = pa_min_blocks;
      cfg.expansion_depth = pa_depth;
      Partition part = girvan_newman(g, cfg);
      if (!pa_no_expand) part = causal_expansion(g, part, cfg.expansion_depth);
      emit(serialize_partition(part) + "\n", pa_out);
    } else if (*learn) {
      stage = "learn";
      const Dataset d = load_dataset(lo.data);
      const auto res = run_pipeline(d, to_config(lo));
      emit(serialize_skeleton(res.skeleton) + "\n", lo.out);
      if (!lo.report.empty()) write_text_file(lo.report, res.report.to_json().dump(2) + "\n");
    } else if (*pc) {
      stage = "baseline-pc";
      const Dataset d = load_dataset(po.data);
      const auto res = run_pc_stable(d, to_config(po));
      emit(serialize_skeleton(res.skeleton) + "\n", po.out);
      if (!po.report.empty()) write_text_file(po.report, res.report.to_json().dump(2) + "\n");
    } else if (*eval) {
      stage = "eval";
      if (!ev_reports.empty() && ev_reports.size() != ev_pred.size()) {
        fail(ErrorKind::invalid_argument, "--report must be given once per --pred");
      }
      const Skeleton truth = load_skeleton(ev_truth);
      std::string csv = "pred,precision,recall,accuracy,f1,shd,ci_tests,tp,fp,fn,tn\n";
      std::vector<SkeletonScore> scores;
      for (std::size_t t = 0; t < ev_pred.size(); ++t) {
        std::size_t ci = 0;
        if (!ev_reports.empty()) {
          const auto rep = nlohmann::json::parse(read_text_file(ev_reports[t]));
          ci = rep.at("unique_ci_tests").get<std::size_t>();
        }
        scores.push_back(score_skeleton(load_skeleton(ev_pred[t]), truth, ci));
        csv += score_row(ev_pred[t], scores.back());
      }
      const auto agg = aggregate_scores(scores);
      csv += "aggregate," + detail::format_double(agg.precision.mean) + "," + detail::format_double(agg.recall.mean) +
             "," + detail::format_double(agg.accuracy.mean) + "," + detail::format_double(agg.f1.mean) + "," +
             detail::format_double(agg.shd.mean) + "," + detail::format_double(agg.ci_tests.mean) + ",,,,\n";
      emit(csv, ev_out);
    } else if (*bench) {
      stage = "bench";
      ExperimentSpec spec = load_experiment_spec(be_spec);
      if (be_seed) spec.seed = *be_seed;
      if (be_n) spec.n = *be_n;
      std::string dir = be_out;
      if (dir.empty()) {
        if (const char* env = std::getenv("DCSKEL_OUTPUT_DIR")) dir = env;
      }
      if (dir.empty()) dir = spec.output_dir;
      if (dir.empty()) dir = "results";
      const auto out = run_bench(spec, be_threads);
      write_bench_output(out, dir);
      for (const auto& e : out.errors) std::cerr << "dcskel bench: cell failed: " << e.cell << ": " << e.message << "\n";
      std::cerr << "bench: " << out.rows.size() << " rows, " << out.errors.size() << " failed cells -> " << dir << "\n";
      if (!out.errors.empty()) return 2;
    }
  } catch (const Error& e) {
    std::cerr << "dcskel " << stage << ": [" << to_string(e.kind()) << "] " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "dcskel " << stage << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
