#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mna/ensemble.hpp"
#include "mna/genealogy.hpp"
#include "mna/histogram.hpp"

namespace mna::analysis {

using genealogy::EntityId;

/// Balance-sheet sizes keyed by (entity, year). Sizes are strictly positive
/// and each (entity, year) appears once; add() throws DataError otherwise.
class BalancePanel {
 public:
  void add(const EntityId& entity, int year, double balance);

  std::optional<double> balance(const EntityId& entity, int year) const;
  /// Entities observed in `year`, ascending id.
  std::vector<std::pair<EntityId, double>> year_slice(int year) const;
  std::vector<int> years() const;
  std::size_t size() const noexcept { return size_; }

  /// Copy with every balance multiplied by `factor` (> 0).
  BalancePanel scaled(double factor) const;

 private:
  std::map<int, std::map<EntityId, double>> by_year_;
  std::size_t size_ = 0;
};

/// GDP index level per year; levels strictly positive, years unique.
class GdpSeries {
 public:
  void add(int year, double level);
  std::optional<double> level(int year) const;
  const std::map<int, double>& values() const noexcept { return values_; }
  GdpSeries scaled(double factor) const;

 private:
  std::map<int, double> values_;
};

// ---------------------------------------------------------------------------
// Zipf slope

struct RankRange {
  std::uint64_t first = 1;
  std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of log10(value) on log10(rank) over the points whose
/// rank lies in `range`. Throws std::invalid_argument with fewer than 3 points.
SlopeFit zipf_slope(std::span<const ZipfPoint> series, RankRange range = {});

// ---------------------------------------------------------------------------
// Ranking quality

enum class RankMethod { ancestry, balance_sheet };
const char* to_string(RankMethod method);

enum class WindowAveraging {
  per_base_year,          // mean over base years of forward-window totals
  per_base_year_and_year  // the same, further divided by window length
};

struct RankGroup {
  std::uint64_t first_rank = 0;
  std::uint64_t last_rank = 0;
  double mean_mergers = 0.0;
};

struct RankGroupReport {
  RankMethod method = RankMethod::ancestry;
  std::vector<RankGroup> groups;
  /// Per processed base year, forward-window merger totals for each group.
  std::vector<std::pair<int, std::vector<std::uint64_t>>> per_year;
};

struct RankForecastOptions {
  int window_years = 3;
  std::uint64_t group_size = 100;
  WindowAveraging averaging = WindowAveraging::per_base_year;
};

struct RankForecast {
  RankGroupReport by_ancestry;
  RankGroupReport by_balance_sheet;
  std::vector<int> processed_years;
  std::vector<int> skipped_years;  // no panel observations
};

/**
 * For each base year Y, ranks the entities observed in the panel in Y and
 * still live at the end of Y, once by ancestry (as of Y-12-31) and once by
 * balance sheet in Y. Ties fall back to ascending id. Each entity's
 * acquisitions dated in years Y+1 .. Y+window are summed per rank group of
 * `group_size`, and group totals are averaged over the processed base years.
 */
RankForecast rank_merger_forecast(const genealogy::GenealogyForest& forest, const BalancePanel& panel,
                                  std::span<const int> years, const RankForecastOptions& options = {});

// ---------------------------------------------------------------------------
// Organic growth

struct GrowthRecord {
  EntityId entity_id;
  std::uint64_t acquisition_count = 0;
  double end_balance = 0.0;
  double baseline = 0.0;       // GDP-indexed start-year aggregate
  double growth_index = 0.0;   // log10(end_balance / baseline)
  std::size_t baseline_members = 0;
};

struct GrowthReport {
  std::vector<GrowthRecord> records;
  std::vector<EntityId> excluded_no_baseline;
  std::uint64_t ancestors_missing_start_balance = 0;
};

/**
 * Growth of each entity live at the end of `end_year` (with an end-year
 * balance) relative to the GDP-indexed start-year balances of itself and of
 * every ancestor absorbed after `start_year` and by the end of `end_year`.
 * Throws std::invalid_argument for start_year >= end_year, DataError for
 * missing GDP years or an empty survivor set.
 */
GrowthReport organic_growth(const genealogy::GenealogyForest& forest, const BalancePanel& panel,
                            const GdpSeries& gdp, int start_year, int end_year);

/// End-balance-weighted mean growth index, optionally restricted to records
/// with more than `more_than` acquisitions. nullopt when none qualify.
std::optional<double> weighted_mean_growth(std::span<const GrowthRecord> records,
                                           std::optional<std::uint64_t> more_than = std::nullopt);

// ---------------------------------------------------------------------------
// Market share by percentile

inline constexpr std::size_t kPercentiles = 100;

struct YearShares {
  int year = 0;
  std::size_t entities = 0;
  std::array<double, kPercentiles> share{};       // index 0 = top 1%
  std::array<double, kPercentiles> cumulative{};  // see ShareSeries
};

/**
 * Per year, entities sorted by balance (descending, ties by id) are split
 * into 100 count-based buckets; when N is not a multiple of 100 the N % 100
 * leftover entities go one each to the top buckets.
 *
 * `cumulative` is the change relative to the first year: element 0 holds the
 * top-percentile change and element k (k >= 1) the summed change of
 * percentiles 2..k+1, so element 99 equals minus element 0.
 */
struct ShareSeries {
  std::vector<YearShares> years;
  std::vector<int> degraded_years;  // fewer than 100 entities
};

/// Empty `years` means every panel year. Throws DataError for a requested
/// year without observations.
ShareSeries market_share_percentiles(const BalancePanel& panel, std::span<const int> years = {});

// ---------------------------------------------------------------------------
// Ensemble overlay

struct OverlayPoint {
  double key = 0.0;  // rank, or bin lower edge
  double value = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool inside = false;
};

struct OverlayReport {
  std::vector<OverlayPoint> points;
  double coverage = 0.0;  // fraction of points inside [min, max]
};

/// Compares an empirical Zipf series with the ensemble rank envelope.
/// Throws std::invalid_argument when a rank falls outside the envelope.
OverlayReport distribution_envelope(const model::EnsembleSummary& summary, std::span<const ZipfPoint> data);

/// Compares an empirical histogram with the ensemble distribution envelope.
/// Throws std::invalid_argument when the binnings differ.
OverlayReport distribution_envelope(const model::EnsembleSummary& summary, const Histogram& data);

}  // namespace mna::analysis
