#include "mna/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mna/format.hpp"

namespace mna::analysis {

void BalancePanel::add(const EntityId& entity, int year, double balance) {
  if (!(balance > 0.0) || !std::isfinite(balance)) {
    throw DataError("balance of " + entity + " in " + std::to_string(year) + " must be a positive number");
  }
  auto [it, inserted] = by_year_[year].emplace(entity, balance);
  if (!inserted) throw DataError("duplicate balance for " + entity + " in " + std::to_string(year));
  ++size_;
}

std::optional<double> BalancePanel::balance(const EntityId& entity, int year) const {
  const auto y = by_year_.find(year);
  if (y == by_year_.end()) return std::nullopt;
  const auto e = y->second.find(entity);
  if (e == y->second.end()) return std::nullopt;
  return e->second;
}

std::vector<std::pair<EntityId, double>> BalancePanel::year_slice(int year) const {
  const auto y = by_year_.find(year);
  if (y == by_year_.end()) return {};
  return {y->second.begin(), y->second.end()};
}

std::vector<int> BalancePanel::years() const {
  std::vector<int> out;
  for (const auto& [year, slice] : by_year_) out.push_back(year);
  return out;
}

BalancePanel BalancePanel::scaled(double factor) const {
  BalancePanel out;
  for (const auto& [year, slice] : by_year_) {
    for (const auto& [entity, balance] : slice) out.add(entity, year, balance * factor);
  }
  return out;
}

void GdpSeries::add(int year, double level) {
  if (!(level > 0.0) || !std::isfinite(level)) {
    throw DataError("GDP level for " + std::to_string(year) + " must be a positive number");
  }
  if (!values_.emplace(year, level).second) throw DataError("duplicate GDP year " + std::to_string(year));
}

std::optional<double> GdpSeries::level(int year) const {
  const auto it = values_.find(year);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

GdpSeries GdpSeries::scaled(double factor) const {
  GdpSeries out;
  for (const auto& [year, level] : values_) out.add(year, level * factor);
  return out;
}

// ---------------------------------------------------------------------------

SlopeFit zipf_slope(std::span<const ZipfPoint> series, RankRange range) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : series) {
    if (p.rank < range.first || p.rank > range.last || p.value == 0 || p.rank == 0) continue;
    xy.emplace_back(std::log10(static_cast<double>(p.rank)), std::log10(static_cast<double>(p.value)));
  }
  const std::size_t n = xy.size();
  if (n < 3) throw std::invalid_argument("zipf_slope needs at least 3 points in range");

  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("zipf_slope: ranks do not vary");

  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : xy) {
    const double r = y - (fit.intercept + fit.slope * x);
    ssr += r * r;
  }
  fit.standard_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

// ---------------------------------------------------------------------------

const char* to_string(RankMethod method) {
  return method == RankMethod::ancestry ? "ancestry" : "balance_sheet";
}

RankForecast rank_merger_forecast(const genealogy::GenealogyForest& forest, const BalancePanel& panel,
                                  std::span<const int> years, const RankForecastOptions& options) {
  if (options.window_years < 1) throw std::invalid_argument("window_years must be >= 1");
  if (options.group_size < 1) throw std::invalid_argument("group_size must be >= 1");

  RankForecast out;
  out.by_ancestry.method = RankMethod::ancestry;
  out.by_balance_sheet.method = RankMethod::balance_sheet;

  struct Candidate {
    EntityId id;
    std::uint64_t ancestry;
    double balance;
    std::uint64_t forward_mergers;
  };

  std::size_t max_groups = 0;
  std::vector<int> sorted_years(years.begin(), years.end());
  std::sort(sorted_years.begin(), sorted_years.end());
  sorted_years.erase(std::unique(sorted_years.begin(), sorted_years.end()), sorted_years.end());

  for (const int year : sorted_years) {
    const auto slice = panel.year_slice(year);
    if (slice.empty()) {
      out.skipped_years.push_back(year);
      continue;
    }
    const Date as_of = Date::last_of_year(year);
    const auto ancestry = genealogy::ancestry_table(forest, as_of);

    std::map<EntityId, std::uint64_t> forward;
    for (const auto& ev : forest.events()) {
      const int y = ev.date.year();
      if (y > year && y <= year + options.window_years) ++forward[ev.acquirer_id];
    }

    std::vector<Candidate> universe;
    for (const auto& [id, balance] : slice) {
      std::uint64_t a = 0;
      if (forest.contains(id)) {
        const auto it = ancestry.find(id);
        if (it == ancestry.end()) continue;  // absorbed by the end of the base year
        a = it->second;
      }
      const auto f = forward.find(id);
      universe.push_back({id, a, balance, f == forward.end() ? 0 : f->second});
    }
    if (universe.empty()) {
      out.skipped_years.push_back(year);
      continue;
    }

    const std::size_t groups = (universe.size() + options.group_size - 1) / options.group_size;
    max_groups = std::max(max_groups, groups);
    auto tally = [&](RankGroupReport& report, auto&& before) {
      std::sort(universe.begin(), universe.end(), before);
      std::vector<std::uint64_t> totals(groups, 0);
      for (std::size_t r = 0; r < universe.size(); ++r) totals[r / options.group_size] += universe[r].forward_mergers;
      report.per_year.emplace_back(year, std::move(totals));
    };
    tally(out.by_ancestry, [](const Candidate& a, const Candidate& b) {
      return a.ancestry != b.ancestry ? a.ancestry > b.ancestry : a.id < b.id;
    });
    tally(out.by_balance_sheet, [](const Candidate& a, const Candidate& b) {
      return a.balance != b.balance ? a.balance > b.balance : a.id < b.id;
    });
    out.processed_years.push_back(year);
  }

  const double denominator =
      static_cast<double>(out.processed_years.size()) *
      (options.averaging == WindowAveraging::per_base_year_and_year ? options.window_years : 1);
  for (RankGroupReport* report : {&out.by_ancestry, &out.by_balance_sheet}) {
    for (auto& [year, totals] : report->per_year) totals.resize(max_groups, 0);
    for (std::size_t g = 0; g < max_groups; ++g) {
      std::uint64_t sum = 0;
      for (const auto& [year, totals] : report->per_year) sum += totals[g];
      report->groups.push_back({g * options.group_size + 1, (g + 1) * options.group_size,
                                static_cast<double>(sum) / denominator});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

GrowthReport organic_growth(const genealogy::GenealogyForest& forest, const BalancePanel& panel,
                            const GdpSeries& gdp, int start_year, int end_year) {
  if (start_year >= end_year) throw std::invalid_argument("start_year must precede end_year");
  const auto gdp_start = gdp.level(start_year);
  const auto gdp_end = gdp.level(end_year);
  if (!gdp_start) throw DataError("GDP series has no value for " + std::to_string(start_year));
  if (!gdp_end) throw DataError("GDP series has no value for " + std::to_string(end_year));
  const double gdp_factor = *gdp_end / *gdp_start;
  const Date end_date = Date::last_of_year(end_year);

  GrowthReport report;
  std::vector<std::size_t> stack;
  for (const auto& [id, end_balance] : panel.year_slice(end_year)) {
    double raw = 0.0;
    std::size_t members = 0;
    std::uint64_t acquisitions = 0;
    if (const auto own = panel.balance(id, start_year)) {
      raw += *own;
      ++members;
    }
    if (forest.contains(id)) {
      if (!forest.is_live(id, end_date)) continue;
      stack.assign(1, forest.index_of(id));
      while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        for (const auto& [date, child] : forest.child_edges(node)) {
          if (date > end_date) continue;
          ++acquisitions;
          stack.push_back(child);
          if (date.year() <= start_year) continue;  // already inside an acquirer's start balance
          if (const auto b = panel.balance(forest.id_at(child), start_year)) {
            raw += *b;
            ++members;
          } else {
            ++report.ancestors_missing_start_balance;
          }
        }
      }
    }
    if (members == 0) {
      report.excluded_no_baseline.push_back(id);
      continue;
    }
    const double baseline = raw * gdp_factor;
    report.records.push_back({id, acquisitions, end_balance, baseline, std::log10(end_balance / baseline), members});
  }
  if (report.records.empty() && report.excluded_no_baseline.empty()) {
    throw DataError("no surviving entities with a balance in " + std::to_string(end_year));
  }
  return report;
}

std::optional<double> weighted_mean_growth(std::span<const GrowthRecord> records,
                                           std::optional<std::uint64_t> more_than) {
  double weight = 0.0;
  double acc = 0.0;
  for (const auto& r : records) {
    if (more_than && r.acquisition_count <= *more_than) continue;
    weight += r.end_balance;
    acc += r.end_balance * r.growth_index;
  }
  if (weight <= 0.0) return std::nullopt;
  return acc / weight;
}

// ---------------------------------------------------------------------------

ShareSeries market_share_percentiles(const BalancePanel& panel, std::span<const int> years) {
  std::vector<int> wanted(years.begin(), years.end());
  if (wanted.empty()) wanted = panel.years();
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  if (wanted.empty()) throw DataError("balance panel is empty");

  ShareSeries out;
  for (const int year : wanted) {
    auto slice = panel.year_slice(year);
    if (slice.empty()) throw DataError("no balance observations in " + std::to_string(year));
    std::sort(slice.begin(), slice.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    const std::size_t n = slice.size();
    if (n < kPercentiles) out.degraded_years.push_back(year);
    const double total = std::accumulate(slice.begin(), slice.end(), 0.0,
                                         [](double acc, const auto& e) { return acc + e.second; });

    YearShares ys;
    ys.year = year;
    ys.entities = n;
    const std::size_t base = n / kPercentiles;
    const std::size_t extra = n % kPercentiles;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < kPercentiles; ++b) {
      const std::size_t take = base + (b < extra ? 1 : 0);
      double assets = 0.0;
      for (std::size_t k = 0; k < take; ++k) assets += slice[pos + k].second;
      pos += take;
      ys.share[b] = assets / total;
    }
    out.years.push_back(ys);
  }

  const auto& first = out.years.front().share;
  for (auto& ys : out.years) {
    ys.cumulative[0] = ys.share[0] - first[0];
    double acc = 0.0;
    for (std::size_t b = 1; b < kPercentiles; ++b) {
      acc += ys.share[b] - first[b];
      ys.cumulative[b] = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

OverlayReport finish(std::vector<OverlayPoint> points) {
  if (points.empty()) throw std::invalid_argument("overlay: no data points");
  OverlayReport report;
  const auto inside = std::count_if(points.begin(), points.end(), [](const auto& p) { return p.inside; });
  report.coverage = static_cast<double>(inside) / static_cast<double>(points.size());
  report.points = std::move(points);
  return report;
}

}  // namespace

OverlayReport distribution_envelope(const model::EnsembleSummary& summary, std::span<const ZipfPoint> data) {
  std::vector<OverlayPoint> points;
  for (const auto& d : data) {
    if (d.rank == 0 || d.rank > summary.rank_envelope.size()) {
      throw std::invalid_argument("rank " + std::to_string(d.rank) + " lies outside the ensemble envelope (" +
                                  std::to_string(summary.rank_envelope.size()) + " ranks)");
    }
    const auto& e = summary.rank_envelope[d.rank - 1];
    const auto v = static_cast<double>(d.value);
    points.push_back({static_cast<double>(d.rank), v, static_cast<double>(e.min), static_cast<double>(e.max),
                      e.min <= d.value && d.value <= e.max});
  }
  return finish(std::move(points));
}

OverlayReport distribution_envelope(const model::EnsembleSummary& summary, const Histogram& data) {
  if (!(summary.binning == data.binning)) {
    throw std::invalid_argument("binning mismatch: ensemble " + summary.binning.to_string() + ", data " +
                                data.binning.to_string());
  }
  std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> envelope;
  for (const auto& e : summary.distribution_envelope) envelope[e.index] = {e.min, e.max};
  std::map<std::int64_t, std::uint64_t> observed;
  for (const auto& b : data.bins) observed[b.index] = b.frequency;

  std::map<std::int64_t, int> keys;
  for (const auto& [k, v] : envelope) keys[k];
  for (const auto& [k, v] : observed) keys[k];

  std::vector<OverlayPoint> points;
  for (const auto& [k, unused] : keys) {
    const auto e = envelope.count(k) ? envelope[k] : std::pair<std::uint64_t, std::uint64_t>{0, 0};
    const std::uint64_t v = observed.count(k) ? observed[k] : 0;
    points.push_back({data.binning.lower_edge(k), static_cast<double>(v), static_cast<double>(e.first),
                      static_cast<double>(e.second), e.first <= v && v <= e.second});
  }
  return finish(std::move(points));
}

}  // namespace mna::analysis
