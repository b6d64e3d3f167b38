// Command-line entry point: data simulation, consensus runs, scoring and the
// CMC-vs-MCMC approximation diagnostic.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchormc/consensus.hpp"
#include "anchormc/estimation.hpp"
#include "anchormc/io.hpp"
#include "anchormc/parallel.hpp"
#include "anchormc/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace anchormc;

namespace {

struct RunOptions {
  std::string model = "dpm";
  std::string data_path;
  std::string constraints_path;
  int shards = 4;
  int anchors = 0;          // 0 means "use anchor_frac"
  double anchor_frac = 0.0; // 0 means "even split", i.e. 1/(S+1)
  double epsilon = 0.1;
  int iters = 5000;
  int burnin = 2500;
  int thin = 5;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int jobs = 0;  // 0 means hardware concurrency

  // dpm
  double dpm_m = 1.0;
  double kappa0 = 0.01;
  double dpm_b = 0.0;
  int n_aux = 3;
  // fa
  double fa_m = 1.0;
  double p0_a = 1.0, p0_b = 99.0;
  int temper = 1;
  double temper_ratio = 0.8;
  int swap_interval = 10;
  // dfa
  double dfa_m = 1.0;
  double tau2 = 10.0;
  double tau_w = 1.0;
  std::vector<double> dir_c{1.0, 1.0, 1.0};
};

json options_to_json(const RunOptions& o) {
  return json{{"model", o.model},
              {"data", o.data_path},
              {"constraints", o.constraints_path},
              {"shards", o.shards},
              {"anchors", o.anchors},
              {"anchor_frac", o.anchor_frac},
              {"epsilon", o.epsilon},
              {"iters", o.iters},
              {"burnin", o.burnin},
              {"thin", o.thin},
              {"seed", o.seed},
              {"out", o.out_dir},
              {"jobs", o.jobs},
              {"dpm_m", o.dpm_m},
              {"kappa0", o.kappa0},
              {"dpm_b", o.dpm_b},
              {"n_aux", o.n_aux},
              {"fa_m", o.fa_m},
              {"p0_a", o.p0_a},
              {"p0_b", o.p0_b},
              {"temper", o.temper},
              {"temper_ratio", o.temper_ratio},
              {"swap_interval", o.swap_interval},
              {"dfa_m", o.dfa_m},
              {"tau2", o.tau2},
              {"tau_w", o.tau_w},
              {"dir_c", o.dir_c}};
}

// Attach every run option to the given subcommand; returns the option
// pointers so config-file values only fill in flags the user did not pass.
std::map<std::string, CLI::Option*> add_run_options(CLI::App* cmd,
                                                    RunOptions& o) {
  std::map<std::string, CLI::Option*> opts;
  opts["model"] = cmd->add_option("--model", o.model, "Model: dpm, fa or dfa")
                      ->check(CLI::IsMember({"dpm", "fa", "dfa"}));
  opts["data"] = cmd->add_option("--data", o.data_path, "Input data CSV");
  opts["constraints"] = cmd->add_option("--constraints", o.constraints_path,
                                        "Fixed-entry constraints JSON (dfa)");
  opts["shards"] = cmd->add_option("--shards", o.shards, "Worker shard count S");
  opts["anchors"] = cmd->add_option("--anchors", o.anchors,
                                    "Anchor shard size");
  opts["anchor_frac"] = cmd->add_option("--anchor-frac", o.anchor_frac,
                                        "Anchor fraction of n");
  opts["epsilon"] = cmd->add_option("--epsilon", o.epsilon,
                                    "Merge threshold (default 0.1)");
  opts["iters"] = cmd->add_option("--iters", o.iters, "MCMC iterations");
  opts["burnin"] = cmd->add_option("--burnin", o.burnin, "Burn-in iterations");
  opts["thin"] = cmd->add_option("--thin", o.thin, "Thinning stride");
  opts["seed"] = cmd->add_option("--seed", o.seed, "Master seed");
  opts["out"] = cmd->add_option("--out", o.out_dir, "Output directory");
  opts["jobs"] = cmd->add_option("--jobs", o.jobs,
                                 "Worker cap (default: hardware)");
  opts["dpm_m"] = cmd->add_option("--dpm-m", o.dpm_m, "DP concentration");
  opts["kappa0"] = cmd->add_option("--kappa0", o.kappa0, "Prior precision scale");
  opts["dpm_b"] = cmd->add_option("--dpm-b", o.dpm_b,
                                  "IW degrees of freedom (0 = data dim)");
  opts["n_aux"] = cmd->add_option("--n-aux", o.n_aux, "Auxiliary components");
  opts["fa_m"] = cmd->add_option("--fa-m", o.fa_m, "IBP mass (fa)");
  opts["p0_a"] = cmd->add_option("--p0-a", o.p0_a, "Beta prior a for p0");
  opts["p0_b"] = cmd->add_option("--p0-b", o.p0_b, "Beta prior b for p0");
  opts["temper"] = cmd->add_option("--temper", o.temper,
                                   "Tempering ladder length (1 = off)");
  opts["temper_ratio"] = cmd->add_option("--temper-ratio", o.temper_ratio,
                                         "Geometric ladder ratio");
  opts["swap_interval"] = cmd->add_option("--swap-interval", o.swap_interval,
                                          "Iterations between swap attempts");
  opts["dfa_m"] = cmd->add_option("--dfa-m", o.dfa_m, "IBP mass (dfa)");
  opts["tau2"] = cmd->add_option("--tau2", o.tau2, "Offset prior variance");
  opts["tau_w"] = cmd->add_option("--tau-w", o.tau_w, "Weight prior rate");
  opts["dir_c"] = cmd->add_option("--dir-c", o.dir_c,
                                  "Dirichlet prior on pi (three values)")
                      ->expected(3);
  return opts;
}

void apply_config_file(const std::string& path, RunOptions& o,
                       const std::map<std::string, CLI::Option*>& opts) {
  json cfg = json::parse(std::ifstream(path));
  auto unset = [&](const char* key) {
    auto it = opts.find(key);
    return cfg.contains(key) && it != opts.end() && it->second->count() == 0;
  };
  if (unset("model")) o.model = cfg["model"].get<std::string>();
  if (unset("data")) o.data_path = cfg["data"].get<std::string>();
  if (unset("constraints")) o.constraints_path = cfg["constraints"];
  if (unset("shards")) o.shards = cfg["shards"].get<int>();
  if (unset("anchors")) o.anchors = cfg["anchors"].get<int>();
  if (unset("anchor_frac")) o.anchor_frac = cfg["anchor_frac"].get<double>();
  if (unset("epsilon")) o.epsilon = cfg["epsilon"].get<double>();
  if (unset("iters")) o.iters = cfg["iters"].get<int>();
  if (unset("burnin")) o.burnin = cfg["burnin"].get<int>();
  if (unset("thin")) o.thin = cfg["thin"].get<int>();
  if (unset("seed")) o.seed = cfg["seed"].get<std::uint64_t>();
  if (unset("out")) o.out_dir = cfg["out"].get<std::string>();
  if (unset("jobs")) o.jobs = cfg["jobs"].get<int>();
  if (unset("dpm_m")) o.dpm_m = cfg["dpm_m"].get<double>();
  if (unset("kappa0")) o.kappa0 = cfg["kappa0"].get<double>();
  if (unset("dpm_b")) o.dpm_b = cfg["dpm_b"].get<double>();
  if (unset("n_aux")) o.n_aux = cfg["n_aux"].get<int>();
  if (unset("fa_m")) o.fa_m = cfg["fa_m"].get<double>();
  if (unset("p0_a")) o.p0_a = cfg["p0_a"].get<double>();
  if (unset("p0_b")) o.p0_b = cfg["p0_b"].get<double>();
  if (unset("temper")) o.temper = cfg["temper"].get<int>();
  if (unset("temper_ratio")) o.temper_ratio = cfg["temper_ratio"].get<double>();
  if (unset("swap_interval")) o.swap_interval = cfg["swap_interval"].get<int>();
  if (unset("dfa_m")) o.dfa_m = cfg["dfa_m"].get<double>();
  if (unset("tau2")) o.tau2 = cfg["tau2"].get<double>();
  if (unset("tau_w")) o.tau_w = cfg["tau_w"].get<double>();
  if (unset("dir_c")) o.dir_c = cfg["dir_c"].get<std::vector<double>>();
}

// Runtime knobs (worker cap, output location) do not change results and
// stay out of the configuration identity.
std::string run_config_hash(const RunOptions& o) {
  json cfg = options_to_json(o);
  cfg.erase("jobs");
  cfg.erase("out");
  return fnv1a_hex(cfg.dump());
}

ModelData load_model_data(const RunOptions& o) {
  if (o.model == "dpm") return read_dpm_csv(o.data_path);
  if (o.model == "fa") return read_fa_csv(o.data_path);
  return read_dfa_csv(o.data_path);
}

ModelConfig build_model_config(const RunOptions& o) {
  if (o.model == "dpm") {
    DpmConfig cfg;
    cfg.m = o.dpm_m;
    cfg.kappa0 = o.kappa0;
    cfg.b = o.dpm_b;
    cfg.n_aux = o.n_aux;
    cfg.iterations = o.iters;
    cfg.burnin = o.burnin;
    cfg.thin = o.thin;
    return cfg;
  }
  if (o.model == "fa") {
    FaConfig cfg;
    cfg.m_ibp = o.fa_m;
    cfg.p0_a = o.p0_a;
    cfg.p0_b = o.p0_b;
    cfg.tempering = o.temper > 1
                        ? TemperingLadder::geometric(o.temper, o.temper_ratio,
                                                     o.swap_interval)
                        : TemperingLadder{};
    cfg.iterations = o.iters;
    cfg.burnin = o.burnin;
    cfg.thin = o.thin;
    return cfg;
  }
  DfaConfig cfg;
  cfg.m_ibp = o.dfa_m;
  cfg.tau2 = o.tau2;
  cfg.tau_w = o.tau_w;
  cfg.dir_c = Eigen::Vector3d(o.dir_c[0], o.dir_c[1], o.dir_c[2]);
  if (!o.constraints_path.empty()) {
    cfg.fixed = read_constraints_json(o.constraints_path);
  }
  cfg.iterations = o.iters;
  cfg.burnin = o.burnin;
  cfg.thin = o.thin;
  return cfg;
}

int resolve_anchor_size(const RunOptions& o, int n) {
  if (o.anchors > 0) return o.anchors;
  const double frac =
      o.anchor_frac > 0.0 ? o.anchor_frac : 1.0 / (o.shards + 1);
  const int size = static_cast<int>(frac * n + 0.5);
  return std::max(1, size);
}

int resolve_jobs(const RunOptions& o) {
  return o.jobs > 0 ? o.jobs : default_workers();
}

json histogram_json(const std::vector<ConsensusDraw>& draws) {
  std::map<int, int> hist;
  for (const ConsensusDraw& d : draws) ++hist[d.draw.K()];
  json out = json::object();
  for (const auto& [k, count] : hist) out[std::to_string(k)] = count;
  return out;
}

void write_histogram_csv(const fs::path& path,
                         const std::vector<ConsensusDraw>& draws) {
  std::map<int, int> hist;
  for (const ConsensusDraw& d : draws) ++hist[d.draw.K()];
  std::ofstream out(path);
  out << "K,count\n";
  for (const auto& [k, count] : hist) out << k << ',' << count << '\n';
}

int cmd_simulate(const std::string& scenario, int n, int p, double m,
                 std::uint64_t seed, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  TruthFile truth;
  if (scenario == "sim1") {
    Sim1Truth sim = gen_sim1(n, seed);
    write_dpm_csv(dir / "data.csv", sim.data);
    truth = {SubsetKind::Partition, sim.truth, sim.params};
  } else if (scenario == "sim2") {
    Sim2Truth sim = gen_sim2(seed, n, p);
    write_fa_csv(dir / "data.csv", sim.data);
    truth = {SubsetKind::Feature, sim.truth, sim.params};
  } else if (scenario == "sim3") {
    Sim3Truth sim = gen_sim3(n, p, m, seed);
    write_dfa_csv(dir / "data.csv", sim.data);
    truth = {SubsetKind::Feature, sim.truth, sim.params};
  } else {
    std::cerr << "unknown scenario: " << scenario << "\n";
    return 1;
  }
  write_truth_json(dir / "truth.json", truth);
  std::cout << "wrote " << (dir / "data.csv").string() << " and "
            << (dir / "truth.json").string() << "\n";
  return 0;
}

int cmd_run(const RunOptions& o) {
  const ModelData data = load_model_data(o);
  const ModelConfig cfg = build_model_config(o);
  const IdSet& ids = model_data_ids(data);
  const int n = static_cast<int>(ids.size());
  const int anchor_size = resolve_anchor_size(o, n);
  const int jobs = resolve_jobs(o);
  const std::string config_hash = run_config_hash(o);

  const ShardPlan plan =
      make_shard_plan(n, o.shards, anchor_size, derive_seed(o.seed, 0));
  MergeConfig merge_cfg;
  merge_cfg.epsilon = o.epsilon;
  merge_cfg.anchor_ids = plan.anchors();

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  write_shard_plan_json(dir / "shard_plan.json", plan, o.seed, config_hash);

  const ConsensusResult result =
      run_consensus(data, plan, cfg, merge_cfg, o.seed, jobs);

  for (const ChainResult& chain : result.chains) {
    write_sample_set_jsonl(
        dir / ("shard_" + std::to_string(chain.shard_id) + ".jsonl"),
        chain.samples, config_hash, o.seed);
  }
  write_consensus_jsonl(dir / "consensus.jsonl", result.draws, o.model,
                        config_hash, o.seed);
  write_histogram_csv(dir / "k_histogram.csv", result.draws);

  json report;
  report["config"] = options_to_json(o);
  report["config_hash"] = config_hash;
  report["master_seed"] = o.seed;
  report["n"] = n;
  report["anchor_size"] = anchor_size;
  report["jobs"] = jobs;
  report["wall_seconds"] = result.wall_seconds;
  json chains = json::array();
  for (const ChainResult& chain : result.chains) {
    json c;
    c["shard"] = chain.shard_id;
    c["seed"] = chain.seed;
    c["wall_seconds"] = chain.wall_seconds;
    json rates = json::object();
    for (const auto& [name, rate] : chain.samples.meta.acceptance_rates) {
      rates[name] = rate;
    }
    c["acceptance_rates"] = std::move(rates);
    chains.push_back(std::move(c));
  }
  report["chains"] = std::move(chains);
  report["k_histogram"] = histogram_json(result.draws);
  report["k_mode"] = posterior_mode_K(result.draws);
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';

  std::cout << "consensus draws: " << result.draws.size()
            << ", modal K: " << posterior_mode_K(result.draws) << ", outputs in "
            << o.out_dir << "\n";
  return 0;
}

int cmd_score(const std::string& estimate_path, const std::string& truth_path,
              const std::string& report_path, const std::string& csv_path) {
  const TruthFile truth = read_truth_json(truth_path);

  PointEstimate pe;
  if (estimate_path.size() > 6 &&
      estimate_path.substr(estimate_path.size() - 6) == ".jsonl") {
    const SampleSet samples = read_samples_jsonl(estimate_path);
    const SubsetKind kind = samples.meta.model == "dpm"
                                ? SubsetKind::Partition
                                : SubsetKind::Feature;
    pe = point_estimate(samples.draws, kind, samples.meta.ids);
  } else {
    const TruthFile est = read_truth_json(estimate_path);
    pe.K_hat = est.a.K;
    pe.A_hat = est.a;
    pe.params_hat = est.params;
    pe.method = "file";
  }
  if (pe.A_hat.n != truth.a.n) {
    std::cerr << "estimate and truth cover different n (" << pe.A_hat.n
              << " vs " << truth.a.n << ")\n";
    return 1;
  }

  json report;
  report["K_hat"] = pe.K_hat;
  report["K_true"] = truth.a.K;
  const double e_a = misallocation_rate(pe.A_hat, truth.a);
  report["e_A"] = e_a;
  double e_theta = -1.0;
  if (!pe.params_hat.empty() && !truth.params.empty()) {
    e_theta = param_error(pe.params_hat, pe.A_hat, truth.params, truth.a);
    report["e_theta"] = e_theta;
  }
  if (truth.kind == SubsetKind::Partition) {
    IdSet universe(truth.a.n);
    for (int i = 0; i < truth.a.n; ++i) universe[i] = i + 1;
    const SubsetDraw est_draw = draw_from_matrix(pe.A_hat, universe);
    const SubsetDraw true_draw = draw_from_matrix(truth.a, universe);
    report["nmi"] = nmi(partition_labels(est_draw, universe),
                        partition_labels(true_draw, universe));
  }
  const std::string text = report.dump(2);
  std::cout << text << "\n";
  if (!report_path.empty()) std::ofstream(report_path) << text << '\n';
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << "metric,value\n";
    csv << "K_hat," << pe.K_hat << "\n";
    csv << "e_A," << e_a << "\n";
    if (e_theta >= 0.0) csv << "e_theta," << e_theta << "\n";
  }
  return 0;
}

int cmd_diagnose(const RunOptions& o, int reps,
                 const std::vector<double>& sweep,
                 const std::string& report_path) {
  const ModelData data = load_model_data(o);
  const ModelConfig cfg = build_model_config(o);
  const IdSet& ids = model_data_ids(data);
  const int n = static_cast<int>(ids.size());
  const ShardPlan plan = make_shard_plan(n, o.shards,
                                         resolve_anchor_size(o, n),
                                         derive_seed(o.seed, 0));
  MergeConfig merge_cfg;
  merge_cfg.epsilon = o.epsilon;

  std::vector<double> epsilons = sweep;
  if (epsilons.empty()) epsilons = {o.epsilon};
  const auto summaries = approximation_diagnostic(
      data, cfg, plan, merge_cfg, epsilons, reps, o.seed, resolve_jobs(o));

  json report;
  report["model"] = o.model;
  report["reps"] = reps;
  json per_eps = json::array();
  for (const DiagnosticSummary& s : summaries) {
    std::cout << "epsilon " << s.epsilon << ": mean " << s.mean << ", sd "
              << s.sd << " over " << s.n_reps << " repetitions\n";
    per_eps.push_back(json{{"epsilon", s.epsilon},
                           {"mean", s.mean},
                           {"sd", s.sd},
                           {"reps", s.n_reps}});
  }
  report["summaries"] = std::move(per_eps);
  if (!report_path.empty()) std::ofstream(report_path) << report.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus Monte Carlo for Bayesian nonparametric random subsets"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a simulation dataset");
  std::string scenario = "sim1";
  int sim_n = 500, sim_p = 5;
  double sim_m = 1.0;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "out";
  sim->add_option("--scenario", scenario, "sim1, sim2 or sim3")
      ->check(CLI::IsMember({"sim1", "sim2", "sim3"}));
  sim->add_option("--n", sim_n, "Observations");
  sim->add_option("--p", sim_p, "Dimensions/samples/symptoms");
  sim->add_option("--m", sim_m, "IBP mass (sim3)");
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--out", sim_out, "Output directory");

  // run
  auto* run = app.add_subcommand("run", "Run consensus Monte Carlo");
  RunOptions run_opts;
  std::string run_config;
  run->add_option("--config", run_config, "JSON config file (flags override)");
  auto run_flag_opts = add_run_options(run, run_opts);

  // score
  auto* score = app.add_subcommand("score", "Score an estimate against truth");
  std::string est_path, truth_path, score_report, score_csv;
  score->add_option("--estimate", est_path,
                    "Samples .jsonl or estimate .json")->required();
  score->add_option("--truth", truth_path, "Truth JSON")->required();
  score->add_option("--report", score_report, "Report JSON path");
  score->add_option("--csv", score_csv, "Metrics CSV path");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Approximation diagnostic");
  RunOptions diag_opts;
  std::string diag_config;
  int diag_reps = 10;
  std::vector<double> diag_sweep;
  std::string diag_report;
  diag->add_option("--config", diag_config, "JSON config file");
  auto diag_flag_opts = add_run_options(diag, diag_opts);
  diag->add_option("--reps", diag_reps, "Repetitions");
  diag->add_option("--epsilon-sweep", diag_sweep,
                   "Epsilon values to sweep (chains are reused)");
  diag->add_option("--report", diag_report, "Report JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(scenario, sim_n, sim_p, sim_m, sim_seed, sim_out);
    }
    if (run->parsed()) {
      if (!run_config.empty()) {
        apply_config_file(run_config, run_opts, run_flag_opts);
      }
      if (run_opts.data_path.empty()) {
        std::cerr << "run: --data is required\n";
        return 1;
      }
      return cmd_run(run_opts);
    }
    if (score->parsed()) {
      return cmd_score(est_path, truth_path, score_report, score_csv);
    }
    if (diag->parsed()) {
      if (!diag_config.empty()) {
        apply_config_file(diag_config, diag_opts, diag_flag_opts);
      }
      if (diag_opts.data_path.empty()) {
        std::cerr << "diagnose: --data is required\n";
        return 1;
      }
      return cmd_diagnose(diag_opts, diag_reps, diag_sweep, diag_report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
