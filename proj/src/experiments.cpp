#include "biht/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include "biht/theory.hpp"

namespace biht {

namespace {

void validate_config(const ExperimentConfig& c) {
  if (c.d < 1 || c.k < 1 || c.k > c.d)
    throw InvalidParams("experiment: need 1 <= k <= d");
  if (c.n < 1) throw InvalidParams("experiment: n must be positive");
  if (c.trials < 1) throw InvalidParams("experiment: trials must be positive");
  if (c.iters < 0) throw InvalidParams("experiment: iters must be nonnegative");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
    throw InvalidParams("experiment: epsilon must lie in (0, 1)");
}

TrialTrace run_one_variant(const GaussianDesign& X, const ResponseVector& y,
                           const ExperimentConfig& c, RunVariant variant,
                           std::uint64_t init_seed, const Vec& theta_star) {
  BihtConfig bc;
  bc.k = c.k;
  bc.max_iters = c.iters;
  bc.variant = variant;
  bc.init_seed = init_seed;
  return biht_run(X, y, bc, &theta_star);
}

}  // namespace

std::string variant_name(VariantChoice v) {
  switch (v) {
    case VariantChoice::normalized: return "normalized";
    case VariantChoice::unnormalized: return "unnormalized";
    case VariantChoice::both: return "both";
  }
  return "unknown";
}

TrialOutput run_trial(const ExperimentConfig& config, int trial_index) {
  validate_config(config);
  if (trial_index < 0) throw InvalidParams("run_trial: trial_index must be nonnegative");
  const std::uint64_t trial = static_cast<std::uint64_t>(trial_index);

  Rng signal_rng = Rng::stream(config.master_seed, trial, StreamPurpose::signal);
  const SparseUnitVector theta_star = random_sparse_unit(config.d, config.k, signal_rng);

  const GaussianDesign X = gaussian_design(
      config.n, config.d, derive_key(config.master_seed, trial, StreamPurpose::design));
  Vec m_star;
  margins(X, theta_star.entries, m_star);
  Rng resp_rng = Rng::stream(config.master_seed, trial, StreamPurpose::responses);
  const ResponseVector y = sample_responses(config.model, m_star, resp_rng);

  const std::uint64_t init_seed =
      derive_key(config.master_seed, trial, StreamPurpose::init);

  TrialOutput out;
  if (config.variant != VariantChoice::unnormalized) {
    try {
      out.normalized = run_one_variant(X, y, config, RunVariant::normalized, init_seed,
                                       theta_star.entries);
    } catch (const DegenerateIterate&) {
      out.normalized_failed = true;
    }
  }
  if (config.variant != VariantChoice::normalized) {
    try {
      out.unnormalized = run_one_variant(X, y, config, RunVariant::unnormalized, init_seed,
                                         theta_star.entries);
    } catch (const DegenerateIterate&) {
      out.unnormalized_failed = true;
    }
  }
  return out;
}

AggregateResult aggregate_traces(const std::vector<const TrialTrace*>& ok_traces,
                                 int total_trials, int iters, double epsilon) {
  if (total_trials < 1) throw InvalidParams("aggregate_traces: no trials");
  if (ok_traces.empty())
    throw ExperimentFailed("aggregate_traces: every trial hit a degenerate iterate");
  const int T = iters;
  const int N = static_cast<int>(ok_traces.size());
  for (const TrialTrace* tr : ok_traces)
    if (static_cast<int>(tr->errors.size()) != T + 1 ||
        static_cast<int>(tr->mismatch_fractions.size()) != T + 1)
      throw InvalidParams("aggregate_traces: trace length mismatch");

  // Nearest-rank quantile over an ascending copy; the small nudge keeps
  // ceil from spilling to the next rank on inexact products like 0.1 * N.
  const auto quantile = [](const std::vector<double>& sorted, double q) {
    const int rank = std::max(
        1, static_cast<int>(std::ceil(q * static_cast<double>(sorted.size()) - 1e-9)));
    return sorted[rank - 1];
  };

  AggregateResult agg;
  agg.per_iteration.resize(T + 1);
  agg.theoretical_curve.resize(T + 1);
  agg.failed_trials = total_trials - N;
  std::vector<double> errs(N);
  for (int t = 0; t <= T; ++t) {
    double mean = 0.0;
    double mism = 0.0;
    for (int i = 0; i < N; ++i) {
      errs[i] = ok_traces[i]->errors[t];
      mean += errs[i];
      mism += ok_traces[i]->mismatch_fractions[t];
    }
    std::sort(errs.begin(), errs.end());
    IterationStats& st = agg.per_iteration[t];
    st.mean_error = mean / N;
    st.median_error = quantile(errs, 0.5);
    st.q10_error = quantile(errs, 0.1);
    st.q90_error = quantile(errs, 0.9);
    st.mean_mismatch_frac = mism / N;
    agg.theoretical_curve[t] = theoretical_error_curve(epsilon, t);
  }
  int successes = 0;
  for (const TrialTrace* tr : ok_traces)
    if (tr->errors.back() <= epsilon) ++successes;
  agg.final_success_fraction = static_cast<double>(successes) / total_trials;
  return agg;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  std::vector<TrialOutput> slots(config.trials);
  std::vector<std::exception_ptr> errors(config.trials);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < config.trials; ++t) {
    try {
      slots[t] = run_trial(config, t);
      // Iterates are not aggregated; drop them early to bound memory.
      if (slots[t].normalized) slots[t].normalized->iterates.clear();
      if (slots[t].unnormalized) slots[t].unnormalized->iterates.clear();
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentOutput out;
  if (config.variant != VariantChoice::unnormalized) {
    std::vector<const TrialTrace*> ok;
    for (const TrialOutput& s : slots)
      if (s.normalized) ok.push_back(&*s.normalized);
    out.normalized = aggregate_traces(ok, config.trials, config.iters, config.epsilon);
  }
  if (config.variant != VariantChoice::normalized) {
    std::vector<const TrialTrace*> ok;
    for (const TrialOutput& s : slots)
      if (s.unnormalized) ok.push_back(&*s.unnormalized);
    out.unnormalized = aggregate_traces(ok, config.trials, config.iters, config.epsilon);
  }
  return out;
}

std::vector<SweepRow> sweep_n(const ExperimentConfig& config,
                              const std::vector<int>& n_values) {
  if (config.variant == VariantChoice::both)
    throw InvalidParams("sweep_n: pick a single variant");
  if (n_values.empty()) throw InvalidParams("sweep_n: n_values must not be empty");
  int prev = 0;
  for (int n : n_values) {
    if (n <= prev) throw InvalidParams("sweep_n: n_values must be strictly increasing");
    prev = n;
  }
  std::vector<SweepRow> rows;
  rows.reserve(n_values.size());
  for (int n : n_values) {
    ExperimentConfig c = config;
    c.n = n;
    const ExperimentOutput out = run_experiment(c);
    const AggregateResult& agg = config.variant == VariantChoice::unnormalized
                                     ? *out.unnormalized
                                     : *out.normalized;
    SweepRow row;
    row.n = n;
    row.mean_final_error = agg.per_iteration.back().mean_error;
    row.mean_final_error_sq = row.mean_final_error * row.mean_final_error;
    row.inv_error_sq = 1.0 / row.mean_final_error_sq;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << body;
  out.flush();
  if (!out.good()) throw IoFailure("write failed: " + path);
}

std::string csv_body(const AggregateResult& agg) {
  std::string s =
      "iter,mean_error,median_error,q10_error,q90_error,mean_mismatch_frac,theory_bound\n";
  for (std::size_t t = 0; t < agg.per_iteration.size(); ++t) {
    const IterationStats& st = agg.per_iteration[t];
    s += std::to_string(t);
    s += ',';
    s += fmt12(st.mean_error);
    s += ',';
    s += fmt12(st.median_error);
    s += ',';
    s += fmt12(st.q10_error);
    s += ',';
    s += fmt12(st.q90_error);
    s += ',';
    s += fmt12(st.mean_mismatch_frac);
    s += ',';
    s += fmt12(agg.theoretical_curve[t]);
    s += '\n';
  }
  return s;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dotpos = path.find_last_of('.');
  const std::size_t slashpos = path.find_last_of('/');
  if (dotpos == std::string::npos || (slashpos != std::string::npos && dotpos < slashpos))
    return path + suffix;
  return path.substr(0, dotpos) + suffix + path.substr(dotpos);
}

void json_aggregate(std::string& s, const AggregateResult& agg, const std::string& indent) {
  s += "{\n";
  s += indent + "  \"per_iteration\": [\n";
  for (std::size_t t = 0; t < agg.per_iteration.size(); ++t) {
    const IterationStats& st = agg.per_iteration[t];
    s += indent + "    {\"iter\": " + std::to_string(t);
    s += ", \"mean_error\": " + fmt17(st.mean_error);
    s += ", \"median_error\": " + fmt17(st.median_error);
    s += ", \"q10_error\": " + fmt17(st.q10_error);
    s += ", \"q90_error\": " + fmt17(st.q90_error);
    s += ", \"mean_mismatch_frac\": " + fmt17(st.mean_mismatch_frac);
    s += ", \"theory_bound\": " + fmt17(agg.theoretical_curve[t]) + "}";
    s += t + 1 < agg.per_iteration.size() ? ",\n" : "\n";
  }
  s += indent + "  ],\n";
  s += indent + "  \"final_success_fraction\": " + fmt17(agg.final_success_fraction) + ",\n";
  s += indent + "  \"failed_trials\": " + std::to_string(agg.failed_trials) + "\n";
  s += indent + "}";
}

std::string json_body(const ExperimentConfig& c, const ExperimentOutput& out) {
  std::string s = "{\n  \"config\": {\n";
  s += "    \"d\": " + std::to_string(c.d) + ",\n";
  s += "    \"k\": " + std::to_string(c.k) + ",\n";
  s += "    \"n\": " + std::to_string(c.n) + ",\n";
  s += "    \"model\": \"" + family_name(c.model.family) + "\",\n";
  s += "    \"beta\": " + fmt17(c.model.beta) + ",\n";
  s += "    \"trials\": " + std::to_string(c.trials) + ",\n";
  s += "    \"iters\": " + std::to_string(c.iters) + ",\n";
  s += "    \"epsilon\": " + fmt17(c.epsilon) + ",\n";
  s += "    \"variant\": \"" + variant_name(c.variant) + "\",\n";
  s += "    \"master_seed\": " + std::to_string(c.master_seed) + "\n";
  s += "  }";
  if (out.normalized) {
    s += ",\n  \"normalized\": ";
    json_aggregate(s, *out.normalized, "  ");
  }
  if (out.unnormalized) {
    s += ",\n  \"unnormalized\": ";
    json_aggregate(s, *out.unnormalized, "  ");
  }
  s += "\n}\n";
  return s;
}

}  // namespace

void emit_results(const ExperimentConfig& config, const ExperimentOutput& out,
                  ResultFormat format, const std::string& path) {
  if (!out.normalized && !out.unnormalized)
    throw InvalidParams("emit_results: nothing to write");
  if (format == ResultFormat::json) {
    write_file(path, json_body(config, out));
    return;
  }
  if (out.normalized && out.unnormalized) {
    write_file(with_suffix(path, "_normalized"), csv_body(*out.normalized));
    write_file(with_suffix(path, "_unnormalized"), csv_body(*out.unnormalized));
  } else {
    write_file(path, csv_body(out.normalized ? *out.normalized : *out.unnormalized));
  }
}

void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::string s = "n,mean_final_error,mean_final_error_sq,inv_error_sq\n";
  for (const SweepRow& r : rows) {
    s += std::to_string(r.n);
    s += ',';
    s += fmt12(r.mean_final_error);
    s += ',';
    s += fmt12(r.mean_final_error_sq);
    s += ',';
    s += fmt12(r.inv_error_sq);
    s += '\n';
  }
  write_file(path, s);
}

}  // namespace biht
