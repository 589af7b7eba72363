#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biht/biht.hpp"
#include "biht/glm.hpp"

namespace biht {

enum class VariantChoice { normalized, unnormalized, both };

std::string variant_name(VariantChoice v);

struct ExperimentConfig {
  int d = 0;
  int k = 0;
  int n = 0;
  LinkModel model;
  int trials = 0;
  int iters = 0;
  double epsilon = 0.0;
  VariantChoice variant = VariantChoice::normalized;
  std::uint64_t master_seed = 0;
};

// One trial draws, from substreams of (master_seed, trial_index): the
// planted k-sparse unit parameter, the design, the responses, and the
// initialization. The requested variants then run on that shared data, so
// with both variants the comparison is paired. Results depend only on
// (config, trial_index), never on scheduling.
struct TrialOutput {
  std::optional<TrialTrace> normalized;
  std::optional<TrialTrace> unnormalized;
  bool normalized_failed = false;
  bool unnormalized_failed = false;
};

TrialOutput run_trial(const ExperimentConfig& config, int trial_index);

struct IterationStats {
  double mean_error = 0.0;
  double median_error = 0.0;
  double q10_error = 0.0;
  double q90_error = 0.0;
  double mean_mismatch_frac = 0.0;
};

struct AggregateResult {
  std::vector<IterationStats> per_iteration;  // length iters + 1
  std::vector<double> theoretical_curve;      // guarantee curve at the same indices
  double final_success_fraction = 0.0;        // final error <= epsilon, over all trials
  int failed_trials = 0;
};

struct ExperimentOutput {
  std::optional<AggregateResult> normalized;
  std::optional<AggregateResult> unnormalized;
};

// Runs all trials (in parallel when OpenMP is enabled) and aggregates each
// requested variant. Trials that hit a degenerate iterate are counted in
// failed_trials, excluded from the error statistics, and count against the
// success fraction. Raises ExperimentFailed when no trial of a requested
// variant survives.
ExperimentOutput run_experiment(const ExperimentConfig& config);

// Aggregation core, exposed so tests can drive it with synthetic traces.
// Quantiles are nearest-rank: the ceil(q N)-th smallest value.
AggregateResult aggregate_traces(const std::vector<const TrialTrace*>& ok_traces,
                                 int total_trials, int iters, double epsilon);

struct SweepRow {
  int n = 0;
  double mean_final_error = 0.0;
  double mean_final_error_sq = 0.0;
  double inv_error_sq = 0.0;
};

// Reruns the experiment at each sample size. n_values must be strictly
// increasing and positive; the variant must be a single one.
std::vector<SweepRow> sweep_n(const ExperimentConfig& config,
                              const std::vector<int>& n_values);

enum class ResultFormat { csv, json };

// CSV: one block per variant. Single variant writes exactly `path`; with
// both, `_normalized` / `_unnormalized` are inserted before the extension.
// JSON: always a single file carrying the config echo and each computed
// variant. Both formats are byte stable for a given input: LF line ends,
// '.' decimal point, fixed significand widths.
void emit_results(const ExperimentConfig& config, const ExperimentOutput& out,
                  ResultFormat format, const std::string& path);

void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace biht
