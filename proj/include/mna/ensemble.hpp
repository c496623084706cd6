#pragma once

#include <cstdint>
#include <vector>

#include "mna/histogram.hpp"
#include "mna/model.hpp"

namespace mna::model {

struct EnsembleOptions {
  double band_low_quantile = 0.05;
  double band_high_quantile = 0.95;
  analysis::Binning binning = analysis::Binning::logarithmic(2.0);
  unsigned threads = 0;     // 0: hardware concurrency
  bool keep_runs = false;   // retain every run's sorted final ancestries
};

/// Ancestry at one Zipf rank across runs. Runs whose final population is
/// shorter than the rank contribute 0.
struct RankEnvelopePoint {
  std::uint64_t rank = 0;
  std::uint64_t min = 0;
  double band_low = 0.0;
  double band_high = 0.0;
  std::uint64_t max = 0;
  friend bool operator==(const RankEnvelopePoint&, const RankEnvelopePoint&) = default;
};

/// Histogram frequency of one bin across runs (absent bin counts as 0).
struct BinEnvelopePoint {
  std::int64_t index = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  friend bool operator==(const BinEnvelopePoint&, const BinEnvelopePoint&) = default;
};

struct RunOutcome {
  std::uint64_t seed = 0;
  Termination termination = Termination::reached_target;
  std::uint64_t cycles_run = 0;
  std::vector<std::uint64_t> ancestry_desc;  // final population, sorted descending
  friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

struct EnsembleSummary {
  std::uint64_t n_runs = 0;
  std::uint64_t n_terminated = 0;  // runs that reached target_count
  double band_low_quantile = 0.0;
  double band_high_quantile = 0.0;
  analysis::Binning binning;
  std::vector<RankEnvelopePoint> rank_envelope;
  std::uint64_t zero_count_min = 0;
  std::uint64_t zero_count_max = 0;
  std::vector<BinEnvelopePoint> distribution_envelope;
  std::vector<RunOutcome> runs;  // run-index order; empty unless keep_runs

  friend bool operator==(const EnsembleSummary&, const EnsembleSummary&) = default;
};

/// Seed of run `index`; see derive_seed.
std::uint64_t ensemble_run_seed(std::uint64_t master_seed, std::uint64_t index);

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted values.
double quantile_sorted(const std::vector<std::uint64_t>& sorted, double q);

/// Reduces run outcomes into rank and distribution envelopes. The result does
/// not depend on the order of `outcomes`, except for the retained run list.
EnsembleSummary summarize_runs(std::vector<RunOutcome> outcomes, const EnsembleOptions& options);

/// n_runs independent simulations, run i seeded with ensemble_run_seed(master_seed, i).
/// Runs are distributed over worker threads; the summary is the same for any
/// thread count.
EnsembleSummary run_ensemble(const ModelParams& params, std::uint64_t n_runs, std::uint64_t master_seed,
                             const EnsembleOptions& options = {});

}  // namespace mna::model
