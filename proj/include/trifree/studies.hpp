#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trifree/expect.hpp"
#include "trifree/fisher.hpp"
#include "trifree/infer.hpp"
#include "trifree/rng.hpp"

// Study harness behind the CLI: seeded, replicated experiment layouts
// rendered as CSV with provenance metadata.  Replicates are distributed
// over a worker pool; replicate r draws from counter-based streams keyed
// by (master seed, r) and results are folded in replicate order, so
// output bytes do not depend on the worker count.

namespace trifree::studies {

inline constexpr const char* kVersion = "0.1.0";

struct StudyConfig {
  infer::Family family = infer::Family::nb;
  std::vector<double> params;  // truth parameters, natural scale
  std::vector<long> m_grid;    // strictly increasing truncation points
  long replicates = 200;       // B
  long sample_size = 1000;     // N per replicate
  long mc_replicates = 200;    // Monte Carlo repeats behind each median
  long bench_reps = 5;         // timing repetitions per cell
  double level = 0.95;         // Wald interval level
  long m_ref = expect::kDefaultMRef;
  std::optional<std::uint64_t> seed;  // required for stochastic studies
  int workers = 1;                    // scheduling only, never affects bytes
};

// Canonical key=value rendering (workers excluded: scheduling is not part
// of the experiment's identity) and the FNV-1a hash stamped into outputs.
std::string config_string(const StudyConfig& config);
std::uint64_t fnv1a_hash(const std::string& text);

// Runs fn(0), ..., fn(count-1) on `workers` threads.  A job exception
// stops the pool and is rethrown on the calling thread.
void parallel_for(long count, int workers,
                  const std::function<void(long)>& fn);

// Stream for one replicate; `purpose` separates independent uses (data,
// ingredient draws, expectation draws) inside the same replicate.
rng::Stream replicate_stream(std::uint64_t seed, long replicate,
                             std::uint64_t purpose);

// ---- compare: truncation errors of every method on one model -----------

struct CompareRow {
  long m;
  std::string method;
  std::optional<double> ln_abs_error;          // deterministic methods
  std::optional<double> mc_median_ln_abs_error;  // monte-carlo rows
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double marker_half_mean;   // E(Y)/2
  double marker_mean;        // E(Y)
  double marker_twice_mean;  // 2 E(Y)
  std::string csv;
};

// Deterministic rows carry the tail-form truncation error against m_ref;
// the monte-carlo row at grid point M is the median absolute error of B
// estimates that each spend M draws.
CompareResult run_compare(const StudyConfig& config);

// ---- sensitivity: errors under fitted parameters ------------------------

struct SensitivityRow {
  std::string method;
  long m;
  double median_ln_abs_error;
  double q95_ln_abs_error;
};

struct SensitivityResult {
  std::vector<SensitivityRow> rows;
  long converged;
  long excluded;  // replicates dropped for non-convergence
  std::string csv;
};

// B times: simulate from the truth, fit, then measure every method's
// absolute error at each grid M against the fitted model's m_ref series
// value.  Medians and 0.95 quantiles are over converged replicates.
SensitivityResult run_sensitivity(const StudyConfig& config);

// ---- fim_sim: information-matrix stability and CI coverage --------------

struct FimReplicateRow {
  long replicate;
  bool converged;
  std::vector<double> estimate;  // fitted parameters; empty if !converged
  std::string method;
  long m;
  double frobenius;
  double max_ci_length_change;  // actual interval-length units
  std::vector<int> hits;        // truth-inside-CI indicator per parameter
};

struct FimAggregate {
  std::string method;
  long m;
  double mean_frobenius;
  double mean_max_ci_length_change;
  std::vector<double> coverage;  // per parameter
};

struct FimSimResult {
  std::vector<std::string> labels;
  std::vector<FimReplicateRow> rows;
  std::vector<FimAggregate> aggregates;
  long converged;
  long excluded;
  std::string csv;
};

// Per replicate: simulate, fit, build the information matrix per method
// and grid M at the fitted parameters, compare each against the m_ref
// series reference at those same parameters, and score CI coverage of
// the truth.  Non-converged replicates are recorded and excluded from
// aggregates.
FimSimResult run_fim_sim(const StudyConfig& config);

// ---- bench: wall-clock means with exact evaluation counters -------------

struct BenchRow {
  std::string method;
  long m;
  double mean_seconds;
  std::uint64_t trigamma_evals;  // per single invocation
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::string csv;
};

// Sequential by design; absolute times are environment-dependent and
// reported as-is.  The monte-carlo method is benchmarked only when a
// seed is configured.
BenchResult run_bench(const StudyConfig& config);

// ---- synthetic regression data -------------------------------------------

// Draws d standard-normal covariate columns (named x1..xd), maps each row
// through the spec's links at the given coefficients, and samples the
// response.  Fill order: all covariates row by row, then responses.
infer::Dataset simulate_regression(const infer::RegressionSpec& spec,
                                   const Eigen::VectorXd& coefficients,
                                   long n, long d, rng::Stream& stream);

}  // namespace trifree::studies
