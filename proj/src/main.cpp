#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "biht/experiments.hpp"
#include "biht/verify.hpp"

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw biht::InvalidParams("cannot read config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw biht::InvalidParams("config file is not valid JSON: " + std::string(e.what()));
  }
}

// Fills an option from the config file when it was not set on the command
// line (or through its environment variable). Flags always win.
template <typename T>
void merge(const json& cfg, const CLI::Option* opt, const char* key, T& var) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(key)) return;
  try {
    var = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw biht::InvalidParams(std::string("config key '") + key + "' has the wrong type");
  }
}

biht::LinkModel make_model(const std::string& name, double beta) {
  if (name == "sign") {
    if (!std::isnan(beta))
      throw biht::InvalidParams("the sign model takes no --beta");
    return biht::LinkModel::sign_model();
  }
  if (std::isnan(beta))
    throw biht::InvalidParams("--model " + name + " requires --beta");
  if (name == "logistic") return biht::LinkModel::logistic(beta);
  if (name == "probit") return biht::LinkModel::probit(beta);
  throw biht::InvalidParams("unknown model: " + name);
}

biht::VariantChoice parse_variant(const std::string& v) {
  if (v == "normalized") return biht::VariantChoice::normalized;
  if (v == "unnormalized") return biht::VariantChoice::unnormalized;
  if (v == "both") return biht::VariantChoice::both;
  throw biht::InvalidParams("unknown variant: " + v);
}

void apply_jobs(int jobs) {
  if (jobs < 0) throw biht::InvalidParams("--jobs must be positive");
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    try {
      out.push_back(std::stoi(s.substr(pos, next - pos)));
    } catch (const std::exception&) {
      throw biht::InvalidParams("bad integer list: " + s);
    }
    pos = next + 1;
  }
  if (out.empty()) throw biht::InvalidParams("empty integer list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    try {
      out.push_back(std::stod(s.substr(pos, next - pos)));
    } catch (const std::exception&) {
      throw biht::InvalidParams("bad number list: " + s);
    }
    pos = next + 1;
  }
  if (out.empty()) throw biht::InvalidParams("empty number list");
  return out;
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  const std::size_t dotpos = path.find_last_of('.');
  const std::size_t slashpos = path.find_last_of('/');
  if (dotpos == std::string::npos || (slashpos != std::string::npos && dotpos < slashpos))
    return path + ext;
  return path.substr(0, dotpos) + ext;
}

std::string fmt4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

void print_aggregate(const char* label, const biht::AggregateResult& agg) {
  std::cout << label << ": final mean error " << fmt4(agg.per_iteration.back().mean_error)
            << ", success fraction " << fmt4(agg.final_success_fraction);
  if (agg.failed_trials > 0) std::cout << ", failed trials " << agg.failed_trials;
  std::cout << "\n";
}

// Shared option block for the experiment-driving subcommands.
struct ExperimentOpts {
  std::string model;
  double beta = kNaN;
  int d = 0;
  int k = 0;
  int n = 0;
  int trials = 100;
  int iters = 30;
  double epsilon = 0.25;
  std::string variant = "normalized";
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string config_path;

  CLI::Option* model_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* d_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* cmd, bool need_n) {
    model_opt = cmd->add_option("--model", model, "link family: sign, logistic, probit")
                    ->check(CLI::IsMember({"sign", "logistic", "probit"}));
    beta_opt = cmd->add_option("--beta", beta, "noise scale of the link");
    d_opt = cmd->add_option("--d", d, "ambient dimension");
    k_opt = cmd->add_option("--k", k, "sparsity level");
    if (need_n) n_opt = cmd->add_option("--n", n, "sample size");
    trials_opt = cmd->add_option("--trials", trials, "independent trials (default 100)");
    iters_opt = cmd->add_option("--iters", iters, "iterations per trial (default 30)");
    epsilon_opt =
        cmd->add_option("--epsilon", epsilon, "target accuracy in (0, 1) (default 0.25)");
    variant_opt = cmd->add_option("--variant", variant,
                                  "normalized, unnormalized, or both (default normalized)")
                      ->check(CLI::IsMember({"normalized", "unnormalized", "both"}));
    seed_opt = cmd->add_option("--seed", seed, "master seed (default 1)")
                   ->envname("BIHT_SEED");
    cmd->add_option("--jobs", jobs, "worker threads (default: all cores); never changes results");
    cmd->add_option("--config", config_path, "JSON file with defaults for these options");
  }

  // Flags beat the config file; the config file beats built-in defaults.
  void merge_config() {
    const json cfg = load_config(config_path);
    merge(cfg, model_opt, "model", model);
    merge(cfg, beta_opt, "beta", beta);
    merge(cfg, d_opt, "d", d);
    merge(cfg, k_opt, "k", k);
    merge(cfg, n_opt, "n", n);
    merge(cfg, trials_opt, "trials", trials);
    merge(cfg, iters_opt, "iters", iters);
    merge(cfg, epsilon_opt, "epsilon", epsilon);
    merge(cfg, variant_opt, "variant", variant);
    merge(cfg, seed_opt, "seed", seed);
  }

  biht::ExperimentConfig to_config(bool need_n) const {
    if (model.empty()) throw biht::InvalidParams("--model is required");
    if (d <= 0) throw biht::InvalidParams("--d is required and must be positive");
    if (k <= 0) throw biht::InvalidParams("--k is required and must be positive");
    if (need_n && n <= 0) throw biht::InvalidParams("--n is required and must be positive");
    biht::ExperimentConfig c;
    c.d = d;
    c.k = k;
    c.n = need_n ? n : 1;
    c.model = make_model(model, beta);
    c.trials = trials;
    c.iters = iters;
    c.epsilon = epsilon;
    c.variant = parse_variant(variant);
    c.master_seed = seed;
    return c;
  }
};

int cmd_run(const ExperimentOpts& opts, const std::string& out_path) {
  const biht::ExperimentConfig cfg = opts.to_config(true);
  const biht::ExperimentOutput out = biht::run_experiment(cfg);
  biht::emit_results(cfg, out, biht::ResultFormat::csv, out_path);
  const std::string json_path = replace_extension(out_path, ".json");
  biht::emit_results(cfg, out, biht::ResultFormat::json, json_path);
  if (out.normalized) print_aggregate("normalized", *out.normalized);
  if (out.unnormalized) print_aggregate("unnormalized", *out.unnormalized);
  std::cout << "wrote " << out_path << " and " << json_path << "\n";
  return 0;
}

int cmd_sweep(const ExperimentOpts& opts, const std::string& n_values_str,
              const std::string& out_path) {
  const biht::ExperimentConfig cfg = opts.to_config(false);
  const std::vector<int> n_values = parse_int_list(n_values_str);
  const std::vector<biht::SweepRow> rows = biht::sweep_n(cfg, n_values);
  biht::emit_sweep_csv(rows, out_path);
  for (const biht::SweepRow& r : rows)
    std::cout << "n = " << r.n << ": mean final error " << fmt4(r.mean_final_error) << "\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_figure(int id, double scale, std::uint64_t seed, const std::string& out_prefix) {
  biht::ExperimentConfig cfg;
  cfg.d = 2000;
  cfg.k = 5;
  cfg.epsilon = 0.25;
  cfg.iters = 30;
  cfg.variant = biht::VariantChoice::both;
  cfg.master_seed = seed;
  cfg.trials = std::max(1, static_cast<int>(std::lround(100.0 * scale)));
  if (id == 1) {
    cfg.model = biht::LinkModel::logistic(1.0);
    cfg.n = 3000;
  } else {
    cfg.model = biht::LinkModel::sign_model();
    cfg.n = 700;
  }
  const biht::ExperimentOutput out = biht::run_experiment(cfg);
  biht::ExperimentOutput norm_only;
  norm_only.normalized = out.normalized;
  biht::ExperimentOutput unnorm_only;
  unnorm_only.unnormalized = out.unnormalized;
  const std::string norm_path = out_prefix + "_normalized.csv";
  const std::string unnorm_path = out_prefix + "_unnormalized.csv";
  biht::emit_results(cfg, norm_only, biht::ResultFormat::csv, norm_path);
  biht::emit_results(cfg, unnorm_only, biht::ResultFormat::csv, unnorm_path);
  print_aggregate("normalized", *out.normalized);
  print_aggregate("unnormalized", *out.unnormalized);
  std::cout << "wrote " << norm_path << " and " << unnorm_path << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  const std::vector<biht::VerifyReport> reports = biht::run_verify_suites(suite, seed);
  int failures = 0;
  int total = 0;
  for (const biht::VerifyReport& rep : reports) {
    for (const biht::VerifyLine& line : rep.lines) {
      ++total;
      if (!line.pass) ++failures;
      char buf[160];
      std::snprintf(buf, sizeof(buf), "[%s] %-34s %s", line.pass ? "PASS" : "FAIL",
                    (rep.suite + "/" + line.name).c_str(), line.detail.c_str());
      std::cout << buf << "\n";
    }
  }
  if (failures > 0) {
    std::cout << failures << " of " << total << " properties failed\n";
    return 3;
  }
  std::cout << "all " << total << " properties passed\n";
  return 0;
}

int cmd_alpha_gamma(const std::string& model_name, const std::string& beta_grid_str,
                    const std::string& out_path) {
  std::string body = "beta,alpha,gamma,gamma_stein,alpha_upper,gamma_lower\n";
  const auto fmt = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
  };
  if (model_name == "sign") {
    if (!beta_grid_str.empty())
      throw biht::InvalidParams("the sign model takes no --beta-grid");
    const biht::LinkModel m = biht::LinkModel::sign_model();
    body += "0," + fmt(biht::alpha(m)) + "," + fmt(biht::gamma(m)) + ",,,\n";
  } else {
    if (beta_grid_str.empty())
      throw biht::InvalidParams("--model " + model_name + " requires --beta-grid");
    for (double b : parse_double_list(beta_grid_str)) {
      const biht::LinkModel m = make_model(model_name, b);
      body += fmt(b) + "," + fmt(biht::alpha(m)) + "," + fmt(biht::gamma(m)) + "," +
              fmt(biht::gamma_stein(m));
      if (model_name == "logistic") {
        const biht::LogisticBounds lb = biht::logistic_bounds(b);
        body += "," + fmt(lb.alpha_upper) + "," + fmt(lb.gamma_lower) + "\n";
      } else {
        body += ",,\n";
      }
    }
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw biht::IoFailure("cannot open for writing: " + out_path);
  out << body;
  out.flush();
  if (!out.good()) throw biht::IoFailure("write failed: " + out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary iterative hard thresholding for one-bit parameter estimation"};
  app.require_subcommand(1);

  // run
  CLI::App* run = app.add_subcommand("run", "run one experiment and write CSV + JSON");
  ExperimentOpts run_opts;
  run_opts.attach(run, true);
  std::string run_out;
  run->add_option("--out", run_out, "output CSV path (JSON lands next to it)")->required();

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "rerun at growing sample sizes");
  ExperimentOpts sweep_opts;
  sweep_opts.trials = 30;
  sweep_opts.attach(sweep, false);
  std::string sweep_n_values;
  sweep->add_option("--n-values", sweep_n_values, "comma-separated sample sizes, increasing")
      ->required();
  std::string sweep_out;
  sweep->add_option("--out", sweep_out, "output CSV path")->required();

  // figure
  CLI::App* figure = app.add_subcommand("figure", "reproduce a benchmark figure");
  int figure_id = 0;
  figure->add_option("--id", figure_id, "1: logistic beta=1, n=3000; 2: sign, n=700")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  double figure_scale = 1.0;
  figure
      ->add_option("--scale", figure_scale,
                   "trial-count multiplier in (0, 1] (default 1 = 100 trials)")
      ->check([](const std::string& s) -> std::string {
        try {
          const double v = std::stod(s);
          if (v > 0.0 && v <= 1.0) return {};
        } catch (const std::exception&) {
        }
        return std::string("scale must lie in (0, 1]");
      });
  std::uint64_t figure_seed = 1;
  figure->add_option("--seed", figure_seed, "master seed (default 1)")->envname("BIHT_SEED");
  int figure_jobs = 0;
  figure->add_option("--jobs", figure_jobs,
                     "worker threads (default: all cores); never changes results");
  std::string figure_out;
  figure->add_option("--out", figure_out, "output prefix for the paired CSVs")->required();

  // verify
  CLI::App* verify = app.add_subcommand("verify", "run the empirical property suites");
  std::string verify_suite = "all";
  verify->add_option("--suite", verify_suite, "all, facts, glm, theory, raic (default all)")
      ->check(CLI::IsMember({"all", "facts", "glm", "theory", "raic"}));
  std::uint64_t verify_seed = 1;
  verify->add_option("--seed", verify_seed, "suite seed (default 1)")->envname("BIHT_SEED");
  int verify_jobs = 0;
  verify->add_option("--jobs", verify_jobs,
                     "worker threads (default: all cores); never changes results");

  // alpha-gamma
  CLI::App* ag = app.add_subcommand("alpha-gamma", "tabulate model quantities over beta");
  std::string ag_model;
  ag->add_option("--model", ag_model, "link family: sign, logistic, probit")
      ->required()
      ->check(CLI::IsMember({"sign", "logistic", "probit"}));
  std::string ag_grid;
  ag->add_option("--beta-grid", ag_grid, "comma-separated beta values");
  std::string ag_out;
  ag->add_option("--out", ag_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(run)) {
      run_opts.merge_config();
      apply_jobs(run_opts.jobs);
      return cmd_run(run_opts, run_out);
    }
    if (app.got_subcommand(sweep)) {
      sweep_opts.merge_config();
      apply_jobs(sweep_opts.jobs);
      return cmd_sweep(sweep_opts, sweep_n_values, sweep_out);
    }
    if (app.got_subcommand(figure)) {
      apply_jobs(figure_jobs);
      return cmd_figure(figure_id, figure_scale, figure_seed, figure_out);
    }
    if (app.got_subcommand(verify)) {
      apply_jobs(verify_jobs);
      return cmd_verify(verify_suite, verify_seed);
    }
    if (app.got_subcommand(ag)) return cmd_alpha_gamma(ag_model, ag_grid, ag_out);
  } catch (const biht::InvalidParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const biht::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
