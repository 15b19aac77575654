// Command-line front end. Exit codes: 0 success, 1 failed acceptance
// criterion (paper-repro), 2 configuration error, 3 numerical guard.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctbpq/ctbpq.hpp"
#include "../acceptance/criteria.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ctbpq;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> reps;
  bool post_horizon = false;
  std::vector<std::size_t> k_sweep;
  std::string preset;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunConfig resolve(const Options& opt) {
  if (opt.config_path.empty() && opt.preset.empty()) throw ConfigError("need --config PATH or --preset NAME");
  std::string text;
  if (!opt.preset.empty()) text += "preset = " + opt.preset + "\n";
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("cannot read config file '" + opt.config_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text += ss.str();
  }
  RunConfig cfg = parse_config(text);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.reps) cfg.reps = *opt.reps;
  cfg.validate();
  if (opt.post_horizon && !cfg.model.t_max) throw ConfigError("--post-horizon needs t_max in the configuration");
  if (!opt.post_horizon) {
    for (const double t : cfg.t_grid) {
      if (t > cfg.model.horizon()) {
        throw ConfigError("t_grid value " + num(t) + " lies beyond T = " + num(cfg.model.horizon()) + "; pass --post-horizon");
      }
    }
  }
  return cfg;
}

// One model per --k-sweep value (or just the configured K), with the file
// suffix used for its outputs.
std::vector<std::pair<ModelSpec, std::string>> models(const RunConfig& cfg, const Options& opt) {
  std::vector<std::pair<ModelSpec, std::string>> out;
  if (opt.k_sweep.empty()) {
    out.emplace_back(cfg.model, "");
    return out;
  }
  for (const std::size_t K : opt.k_sweep) {
    ModelSpec m = cfg.model;
    m.K = K;
    m.validate();
    out.emplace_back(m, "_K" + std::to_string(K));
  }
  return out;
}

std::ofstream open_out(const Options& opt, const std::string& name) {
  fs::create_directories(opt.out_dir);
  const fs::path path = fs::path(opt.out_dir) / name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  return f;
}

void require_grid(const RunConfig& cfg) {
  if (cfg.t_grid.empty()) throw ConfigError("t_grid is empty");
}

void cmd_plan(const Options& opt) {
  const RunConfig cfg = resolve(opt);
  for (const auto& [spec, suffix] : models(cfg, opt)) {
    const TruncationPlan plan = build_truncation_plan(spec, opt.post_horizon);
    json j;
    j["K"] = spec.K;
    j["epsilon"] = spec.epsilon;
    j["per_interval_target"] = plan.per_interval_target;
    j["per_interval_tail"] = plan.per_interval_tail;
    j["post_horizon"] = plan.post_horizon;
    j["segments"] = json::array();
    std::printf("K = %zu, epsilon = %s, per_interval_target = %s\n", spec.K, num(spec.epsilon).c_str(),
                num(plan.per_interval_target).c_str());
    std::printf("%4s %22s %12s %8s\n", "n", "theta", "duration", "M");
    for (std::size_t n = 0; n < plan.thetas.size(); ++n) {
      std::printf("%4zu %22s %12s %8zu%s\n", n + 1, num(plan.thetas[n]).c_str(), num(plan.durations[n]).c_str(),
                  plan.trunc_points[n], n >= plan.arrival_intervals() ? "  (post-horizon)" : "");
      j["segments"].push_back({{"n", n + 1},
                               {"theta", plan.thetas[n]},
                               {"duration", plan.durations[n]},
                               {"M", plan.trunc_points[n]},
                               {"post_horizon", n >= plan.arrival_intervals()}});
    }
    open_out(opt, "plan" + suffix + ".json") << j.dump(2) << "\n";
  }
}

void cmd_analyze(const Options& opt) {
  const RunConfig cfg = resolve(opt);
  require_grid(cfg);
  for (const auto& [spec, suffix] : models(cfg, opt)) {
    auto csv = open_out(opt, "analyze" + suffix + ".csv");
    csv << "t,ell,prob\n";
    json defects = json::array();
    queue_length_distributions(spec, cfg.t_grid, opt.post_horizon, [&](const QueueLengthDistribution& d) {
      for (std::size_t l = 0; l < d.probs.size(); ++l) csv << num(d.t) << "," << l << "," << num(d.probs[l]) << "\n";
      defects.push_back({{"t", d.t}, {"mass_defect", d.mass_defect}});
    });
    json j;
    j["K"] = spec.K;
    j["epsilon"] = spec.epsilon;
    j["mass_defect"] = defects;
    open_out(opt, "analyze" + suffix + ".json") << j.dump(2) << "\n";
  }
}

void write_stats_row(std::ostream& out, const QueueLengthDistribution& d, const Summary& s) {
  out << num(d.t) << "," << num(s.mean) << "," << s.median << "," << s.mode << "," << s.p95 << "," << num(s.variance) << ","
      << num(d.mass_defect) << "\n";
}

void cmd_stats(const Options& opt) {
  const RunConfig cfg = resolve(opt);
  require_grid(cfg);
  for (const auto& [spec, suffix] : models(cfg, opt)) {
    auto csv = open_out(opt, "stats" + suffix + ".csv");
    csv << "t,mean,median,mode,p95,variance,mass_defect\n";
    queue_length_distributions(spec, cfg.t_grid, opt.post_horizon,
                               [&](const QueueLengthDistribution& d) { write_stats_row(csv, d, summarize(d)); });
  }
}

void write_empirical(std::ostream& out, const SimulationResult& r) {
  out << "t,ell,count,prob\n";
  for (const auto& e : r.distributions) {
    const auto p = e.pmf();
    for (std::size_t l = 0; l < e.counts.size(); ++l) out << num(e.t) << "," << l << "," << e.counts[l] << "," << num(p[l]) << "\n";
  }
}

constexpr std::size_t kStoredPaths = 30;

void cmd_simulate(const Options& opt) {
  const RunConfig cfg = resolve(opt);
  require_grid(cfg);
  for (const auto& [spec, suffix] : models(cfg, opt)) {
    const SimulationResult ctbp = simulate_ctbp(spec, cfg.reps, cfg.seed, cfg.t_grid, kStoredPaths);
    const SimulationResult nhpp = simulate_nhpp(spec, cfg.reps, cfg.seed, cfg.t_grid);
    auto ctbp_csv = open_out(opt, "simulate_ctbp" + suffix + ".csv");
    write_empirical(ctbp_csv, ctbp);
    auto nhpp_csv = open_out(opt, "simulate_nhpp" + suffix + ".csv");
    write_empirical(nhpp_csv, nhpp);
    auto paths = open_out(opt, "paths" + suffix + ".csv");
    paths << "path_id,t,L\n";
    for (std::size_t i = 0; i < ctbp.paths.size(); ++i) {
      paths << i << ",0,0\n";
      std::size_t level = 0;
      for (std::size_t e = 0; e < ctbp.paths[i].times.size(); ++e) {
        level = ctbp.paths[i].kinds[e] == EventKind::Arrival ? level + 1 : level - 1;
        paths << i << "," << num(ctbp.paths[i].times[e]) << "," << level << "\n";
      }
    }
    auto tv = open_out(opt, "simulate_tv" + suffix + ".csv");
    tv << "t,tv_ctbp_vs_analytic,replications\n";
    std::size_t q = 0;
    queue_length_distributions(spec, cfg.t_grid, opt.post_horizon, [&](const QueueLengthDistribution& d) {
      const auto& e = ctbp.distributions[q++];
      tv << num(d.t) << "," << num(total_variation(e, d.probs)) << "," << e.replications << "\n";
    });
  }
}

void cmd_compare(const Options& opt) {
  const RunConfig cfg = resolve(opt);
  require_grid(cfg);
  for (const auto& [spec, suffix] : models(cfg, opt)) {
    const auto mt = mtmc_transient(spec, cfg.t_grid);
    auto csv = open_out(opt, "compare" + suffix + ".csv");
    csv << "t,ctbp_mean,mtmc_mean,ctbp_median,mtmc_median,ctbp_mode,mtmc_mode,ctbp_p95,mtmc_p95,ctbp_variance,mtmc_variance,"
           "ctbp_mass_defect,mtmc_mass_defect\n";
    std::size_t q = 0;
    queue_length_distributions(spec, cfg.t_grid, opt.post_horizon, [&](const QueueLengthDistribution& d) {
      const Summary c = summarize(d);
      const Summary m = summarize(mt[q]);
      csv << num(d.t) << "," << num(c.mean) << "," << num(m.mean) << "," << c.median << "," << m.median << "," << c.mode << ","
          << m.mode << "," << c.p95 << "," << m.p95 << "," << num(c.variance) << "," << num(m.variance) << ","
          << num(d.mass_defect) << "," << num(mt[q].mass_defect) << "\n";
      ++q;
    });
  }
}

int cmd_paper_repro(const Options& opt) {
  json j = json::array();
  bool all = true;
  for (int id = 1; id <= 10; ++id) {
    const auto o = acceptance::run_criterion(id);
    acceptance::print(std::cout, o);
    j.push_back({{"criterion", id}, {"pass", o.pass}, {"detail", o.detail}, {"seconds", o.seconds}});
    all = all && o.pass;
  }
  open_out(opt, "paper_repro.json") << j.dump(2) << "\n";

  auto csv = open_out(opt, "paper_repro_stats.csv");
  csv << "K,t,mean,median,mode,p95,variance,mass_defect\n";
  for (const std::size_t K : {900, 1000, 1100}) {
    const auto& run = acceptance::benchmark_run(K);
    for (std::size_t i = 0; i < run.t.size(); ++i) {
      const Summary& s = run.stats[i];
      csv << K << "," << num(run.t[i]) << "," << num(s.mean) << "," << s.median << "," << s.mode << "," << s.p95 << ","
          << num(s.variance) << "," << num(run.mass_defect[i]) << "\n";
    }
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient queue-length distribution of the CTBP/M/c queue"};
  app.require_subcommand(1);
  Options opt;
  std::string k_sweep_text;
  app.add_option("--config", opt.config_path, "configuration file (key = value)");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--reps", opt.reps, "Monte Carlo replications");
  app.add_flag("--post-horizon", opt.post_horizon, "extend the solution past T up to t_max");
  app.add_option("--k-sweep", k_sweep_text, "comma-separated list of K values");
  app.add_option("--preset", opt.preset, "built-in configuration (paper-section5)");

  auto* plan = app.add_subcommand("plan", "truncation points per interval");
  auto* analyze = app.add_subcommand("analyze", "queue-length pmf on the t grid");
  auto* stats = app.add_subcommand("stats", "mean, median, mode, p95, variance on the t grid");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo pmfs and sample paths");
  auto* compare = app.add_subcommand("compare", "CTBP/M/c against M_t/M/c");
  auto* repro = app.add_subcommand("paper-repro", "run every acceptance criterion");
  for (auto* sub : {plan, analyze, stats, simulate, compare, repro}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (!k_sweep_text.empty()) {
      std::string s = k_sweep_text;
      for (char& ch : s) {
        if (ch == ',') ch = ' ';
      }
      std::istringstream in(s);
      std::string tok;
      while (in >> tok) opt.k_sweep.push_back(static_cast<std::size_t>(detail::parse_count("--k-sweep", tok)));
      if (opt.k_sweep.empty()) throw ConfigError("--k-sweep is empty");
    }
    if (plan->parsed()) cmd_plan(opt);
    if (analyze->parsed()) cmd_analyze(opt);
    if (stats->parsed()) cmd_stats(opt);
    if (simulate->parsed()) cmd_simulate(opt);
    if (compare->parsed()) cmd_compare(opt);
    if (repro->parsed()) return cmd_paper_repro(opt);
  } catch (const GuardError& e) {
    std::cerr << "guard violation: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
