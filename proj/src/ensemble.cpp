#include "mna/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mna::model {

std::uint64_t ensemble_run_seed(std::uint64_t master_seed, std::uint64_t index) {
  return derive_seed(master_seed, index);
}

double quantile_sorted(const std::vector<std::uint64_t>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const auto a = static_cast<double>(sorted[lo]);
  const auto b = static_cast<double>(sorted[hi]);
  return a + (h - static_cast<double>(lo)) * (b - a);
}

EnsembleSummary summarize_runs(std::vector<RunOutcome> outcomes, const EnsembleOptions& options) {
  if (outcomes.empty()) throw std::invalid_argument("summarize_runs: no runs");
  if (!(0.0 <= options.band_low_quantile && options.band_low_quantile <= options.band_high_quantile &&
        options.band_high_quantile <= 1.0)) {
    throw std::invalid_argument("band quantiles must satisfy 0 <= low <= high <= 1");
  }

  EnsembleSummary summary;
  summary.n_runs = outcomes.size();
  summary.band_low_quantile = options.band_low_quantile;
  summary.band_high_quantile = options.band_high_quantile;
  summary.binning = options.binning;

  std::size_t max_len = 0;
  for (const auto& run : outcomes) {
    if (run.termination == Termination::reached_target) ++summary.n_terminated;
    max_len = std::max(max_len, run.ancestry_desc.size());
  }

  std::vector<std::uint64_t> column(outcomes.size());
  summary.rank_envelope.reserve(max_len);
  for (std::size_t r = 0; r < max_len; ++r) {
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& values = outcomes[i].ancestry_desc;
      column[i] = r < values.size() ? values[r] : 0;
    }
    std::sort(column.begin(), column.end());
    summary.rank_envelope.push_back({r + 1, column.front(), quantile_sorted(column, options.band_low_quantile),
                                     quantile_sorted(column, options.band_high_quantile), column.back()});
  }

  // Per-bin frequencies across runs; a run without a bin contributes 0.
  std::map<std::int64_t, std::vector<std::uint64_t>> per_bin;
  std::vector<std::uint64_t> zeros;
  zeros.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& values = outcomes[i].ancestry_desc;
    if (values.empty()) {
      zeros.push_back(0);
      continue;
    }
    const auto h = analysis::ancestry_distribution(values, options.binning);
    zeros.push_back(h.zero_count);
    for (const auto& bin : h.bins) {
      auto& freqs = per_bin[bin.index];
      freqs.push_back(bin.frequency);
    }
  }
  summary.zero_count_min = *std::min_element(zeros.begin(), zeros.end());
  summary.zero_count_max = *std::max_element(zeros.begin(), zeros.end());
  for (const auto& [index, freqs] : per_bin) {
    const std::uint64_t max = *std::max_element(freqs.begin(), freqs.end());
    const std::uint64_t min = freqs.size() < outcomes.size() ? 0 : *std::min_element(freqs.begin(), freqs.end());
    summary.distribution_envelope.push_back(
        {index, options.binning.lower_edge(index), options.binning.upper_edge(index), min, max});
  }

  if (options.keep_runs) summary.runs = std::move(outcomes);
  return summary;
}

EnsembleSummary run_ensemble(const ModelParams& params, std::uint64_t n_runs, std::uint64_t master_seed,
                             const EnsembleOptions& options) {
  if (n_runs == 0) throw std::invalid_argument("n_runs must be >= 1");
  params.validate();

  std::vector<RunOutcome> outcomes(n_runs);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::uint64_t i = next++; i < n_runs; i = next++) {
      try {
        const std::uint64_t seed = ensemble_run_seed(master_seed, i);
        SimulationResult result = run_simulation(params, seed);
        RunOutcome& out = outcomes[i];
        out.seed = seed;
        out.termination = result.termination;
        out.cycles_run = result.cycles_run;
        out.ancestry_desc = result.final_population.ancestries_by_id();
        std::sort(out.ancestry_desc.begin(), out.ancestry_desc.end(), std::greater<>{});
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_runs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return summarize_runs(std::move(outcomes), options);
}

}  // namespace mna::model
