// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. All tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mna/analysis.hpp"
#include "mna/cli.hpp"
#include "mna/ensemble.hpp"
#include "mna/genealogy.hpp"
#include "mna/io.hpp"
#include "mna/model.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace mna;

namespace {

constexpr double kSlopeTolerance = 1e-9;
constexpr double kGrowthTolerance = 1e-12;
constexpr double kShareSumTolerance = 1e-9;
constexpr double kSeparationFraction = 0.90;
constexpr double kCoverageFraction = 0.90;
constexpr double kSlopeBandLow = -2.5;
constexpr double kSlopeBandHigh = -1.5;

// Shared by criteria 6 and 9: default p and exponent, 20000 agents
// consolidated to 200.
constexpr std::uint64_t kEnsembleInitial = 20000;
constexpr std::uint64_t kEnsembleTarget = 200;
constexpr std::uint64_t kEnsembleRuns = 1000;
constexpr std::uint64_t kEnsembleSeed = 20240601;
constexpr std::uint64_t kHeldOutSeed = 0x5EED0F'4E1D0u;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome merger_probability_exactness() {
  Outcome o;
  model::ModelParams params;  // p = 1/40000, exponent 3/2
  const double p = params.base_probability;
  const bool a0 = model::merger_probability(0, params) == p;
  const bool a3 = model::merger_probability(3, params) == 8.0 * p;
  const std::uint64_t threshold = oracle::clamp_threshold_three_halves(40000);
  const bool below = model::merger_probability(threshold - 1, params) < 1.0;
  const bool at = model::merger_probability(threshold, params) == 1.0;
  const bool beyond = model::merger_probability(threshold + 1000, params) == 1.0;
  o.pass = a0 && a3 && below && at && beyond;
  o.detail << "P(0)=p " << (a0 ? "ok" : "no") << ", P(3)=8p " << (a3 ? "ok" : "no") << ", clamp first at A="
           << threshold << " (P(" << threshold - 1 << ")=" << fmt(model::merger_probability(threshold - 1, params), 6)
           << ")";
  return o;
}

// Replays a scheduled-engine merger log with independent bookkeeping and
// checks the invariants after every recorded cycle.
bool replay_log_conserves(const model::ModelParams& params, const model::SimulationResult& run, std::string& why) {
  const auto n = params.initial_count;
  std::vector<std::uint64_t> ancestry(n, 0);
  std::vector<bool> alive(n, true);
  std::uint64_t live = n;
  std::uint64_t absorbed = 0;
  std::uint64_t live_sum = 0;
  std::size_t m = 0;
  for (const auto& h : run.history) {
    while (m < run.mergers.size() && run.mergers[m].cycle_index == h.cycle_index) {
      const auto& rec = run.mergers[m++];
      const auto s = rec.source.value;
      const auto t = rec.partner.value;
      if (!alive[s] || !alive[t] || s == t || ancestry[t] != rec.partner_ancestry) {
        why = "inconsistent merger at cycle " + std::to_string(h.cycle_index);
        return false;
      }
      ancestry[s] += ancestry[t] + 1;
      alive[t] = false;
      --live;
      ++absorbed;
      live_sum += 1;  // the partner itself; its own ancestors just change owner
    }
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += alive[i] ? ancestry[i] : 0;
    if (live + absorbed != n || sum != absorbed || sum != live_sum || live != h.live_count_after) {
      why = "invariant broken after cycle " + std::to_string(h.cycle_index);
      return false;
    }
  }
  if (m != run.mergers.size()) {
    why = "merger log outside recorded cycles";
    return false;
  }
  for (const auto& agent : run.final_population.live_agents()) {
    if (!alive[agent.id.value] || ancestry[agent.id.value] != agent.ancestry) {
      why = "final population differs from replayed log";
      return false;
    }
  }
  return live == run.final_population.live_count();
}

Outcome conservation_suite() {
  Outcome o;
  std::mt19937_64 gen(777);
  std::uint64_t cycles_checked = 0;
  std::uint64_t events = 0;
  for (int trial = 0; trial < 50 && o.pass; ++trial) {
    model::ModelParams params;
    params.initial_count = static_cast<std::uint64_t>(std::exp(std::uniform_real_distribution<>(std::log(10.0),
                                                                                                std::log(10000.0))(gen)));
    params.target_count = 1 + gen() % (params.initial_count - 1);
    params.base_probability = std::pow(10.0, std::uniform_real_distribution<>(-4.0, -1.0)(gen));
    params.ancestry_exponent = std::uniform_real_distribution<>(0.0, 2.0)(gen);
    params.ancestry_weighting = gen() % 2 == 0;
    const std::uint64_t seed = gen();

    // Reference engine: inspect the population after each cycle directly.
    model::Population pop(params.initial_count);
    Rng rng(seed);
    for (std::uint64_t c = 0; pop.live_count() > params.target_count && c < params.max_cycles; ++c) {
      model::execute_cycle(pop, params, rng, c);
      std::uint64_t sum = 0;
      for (const auto& agent : pop.live_agents()) sum += agent.ancestry;
      if (pop.live_count() + pop.absorbed_count() != params.initial_count || sum != pop.absorbed_count()) {
        o.pass = false;
        o.detail << "stepwise trial " << trial << " broke at cycle " << c;
        break;
      }
      ++cycles_checked;
    }

    // Production engine: check every cycle through its own logs.
    const auto run = model::run_simulation(params, seed, {true, true});
    std::string why;
    if (!replay_log_conserves(params, run, why)) {
      o.pass = false;
      o.detail << "scheduled trial " << trial << ": " << why;
    }
    events += run.history.size();
  }
  if (o.pass) {
    o.detail << "50 parameter sets; " << cycles_checked << " stepwise cycles and " << events
             << " scheduled cycles checked exactly";
  }
  return o;
}

Outcome replay_determinism() {
  Outcome o;
  TempDir dir;
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) { return cli::run_cli(args, sink, sink); };

  struct Case {
    std::vector<std::string> args;
    std::vector<std::string> files;
  };
  const std::vector<Case> cases{
      {{"simulate", "--initial", "5000", "--target", "500", "--p", "0.0001", "--seed", "42", "--history", "--mergers"},
       {"population.csv", "zipf.csv", "distribution.csv", "history.csv", "mergers.csv"}},
      {{"simulate", "--initial", "3000", "--target", "300", "--baseline", "--seed", "9"},
       {"population.csv", "zipf.csv", "distribution.csv"}},
      {{"ensemble", "--initial", "2000", "--target", "200", "--runs", "40", "--seed", "11"},
       {"rank_envelope.csv", "distribution_envelope.csv", "runs.csv"}},
  };
  std::size_t compared = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto original = dir.path() / ("orig" + std::to_string(i));
    auto args = cases[i].args;
    args.insert(args.end(), {"--out", original.string()});
    if (run(args) != 0) {
      o.pass = false;
      o.detail << "case " << i << " failed to run; ";
      continue;
    }
    for (const auto& from : cases[i].files) {
      const auto replayed = dir.path() / ("replay" + std::to_string(i) + "_" + from);
      if (run({"replay", (original / from).string(), "--out", replayed.string()}) != 0) {
        o.pass = false;
        o.detail << "replay of " << from << " failed; ";
        continue;
      }
      for (const auto& f : cases[i].files) {
        ++compared;
        if (read_file(original / f) != read_file(replayed / f)) {
          o.pass = false;
          o.detail << "case " << i << " " << f << " differs after replay from " << from << "; ";
        }
      }
    }
  }
  if (o.pass) o.detail << compared << " replayed files byte-identical (2 simulate, 1 ensemble)";
  return o;
}

Outcome genealogy_oracle() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::uint64_t queries = 0;
  for (int trial = 0; trial < 500 && o.pass; ++trial) {
    const auto events = oracle::random_event_log(gen, 200);
    const auto forest = genealogy::build_forest(events);
    std::vector<Date> probes;
    if (events.empty()) {
      probes = {Date(2000, 1, 1), Date(2000, 1, 1), Date(2000, 1, 1)};
    } else {
      auto [lo, hi] = std::minmax_element(events.begin(), events.end(),
                                          [](const auto& a, const auto& b) { return a.date < b.date; });
      const auto span = (hi->date.days() - lo->date.days()).count();
      for (int k = 0; k < 3; ++k) {
        const auto offset = static_cast<int>(gen() % static_cast<std::uint64_t>(span + 3)) - 1;
        probes.push_back(Date(lo->date.days() + std::chrono::days(offset)));
      }
    }
    for (const Date probe : probes) {
      const auto expected = oracle::subtree_ancestry(events, probe);
      for (const auto& [id, count] : expected) {
        ++queries;
        if (genealogy::ancestry_count(forest, id, probe) != count) {
          o.pass = false;
          o.detail << "trial " << trial << ": " << id << " at " << probe.to_string() << " disagrees";
          break;
        }
      }
      std::uint64_t live_sum = 0;
      for (const auto& [id, n] : genealogy::ancestry_table(forest, probe)) live_sum += n;
      if (live_sum != oracle::naive_absorbed(events, probe).size()) {
        o.pass = false;
        o.detail << "trial " << trial << ": live ancestry sum != absorbed count at " << probe.to_string();
      }
      if (!o.pass) break;
    }
  }
  if (o.pass) o.detail << "500 logs, 1500 probe dates, " << queries << " entity queries match the oracle";
  return o;
}

Outcome weighted_vs_baseline() {
  Outcome o;
  model::ModelParams weighted;
  weighted.initial_count = 5000;
  weighted.target_count = 2500;
  model::ModelParams baseline = weighted;
  baseline.ancestry_weighting = false;
  int wins = 0;
  double w_sum = 0.0;
  double b_sum = 0.0;
  constexpr int kPairs = 200;
  for (int i = 0; i < kPairs; ++i) {
    const auto seed = derive_seed(5000, static_cast<std::uint64_t>(i));
    auto max_of = [](const model::SimulationResult& r) {
      std::uint64_t m = 0;
      for (const auto& a : r.final_population.live_agents()) m = std::max(m, a.ancestry);
      return m;
    };
    const auto w = max_of(model::run_simulation(weighted, seed));
    const auto b = max_of(model::run_simulation(baseline, seed));
    wins += w > b ? 1 : 0;
    w_sum += static_cast<double>(w);
    b_sum += static_cast<double>(b);
  }
  const double fraction = static_cast<double>(wins) / kPairs;
  o.pass = fraction >= kSeparationFraction;
  o.detail << "weighted max exceeds baseline max in " << wins << "/" << kPairs << " pairs (need >= "
           << fmt(kSeparationFraction) << "); mean max " << fmt(w_sum / kPairs) << " vs " << fmt(b_sum / kPairs);
  return o;
}

struct SharedEnsemble {
  model::ModelParams params;
  model::EnsembleSummary summary;
};

const SharedEnsemble& shared_ensemble() {
  static const SharedEnsemble shared = [] {
    SharedEnsemble s;
    s.params.initial_count = kEnsembleInitial;
    s.params.target_count = kEnsembleTarget;
    model::EnsembleOptions options;
    options.keep_runs = true;
    s.summary = model::run_ensemble(s.params, kEnsembleRuns, kEnsembleSeed, options);
    return s;
  }();
  return shared;
}

Outcome zipf_fit() {
  Outcome o;
  double worst = 0.0;
  for (double s : {-2.0, -1.0, -0.5}) {
    // Integer ancestries C * r^s rounded at C = 1e15; rounding moves log10
    // values by well under 1e-11.
    std::vector<analysis::ZipfPoint> series;
    for (std::uint64_t r = 1; r <= 100; ++r) {
      series.push_back({r, static_cast<std::uint64_t>(std::llround(1e15 * std::pow(static_cast<double>(r), s)))});
    }
    worst = std::max(worst, std::abs(analysis::zipf_slope(series).slope - s));
  }
  const bool planted_ok = worst <= kSlopeTolerance;

  const auto& e = shared_ensemble();
  double sum = 0.0;
  std::size_t in_band = 0;
  for (const auto& run : e.summary.runs) {
    const auto fit = analysis::zipf_slope(analysis::zipf_series(run.ancestry_desc), {1, 100});
    sum += fit.slope;
    in_band += fit.slope >= kSlopeBandLow && fit.slope <= kSlopeBandHigh ? 1 : 0;
  }
  const double mean = sum / static_cast<double>(e.summary.runs.size());
  const bool band_ok = mean >= kSlopeBandLow && mean <= kSlopeBandHigh;
  o.pass = planted_ok && band_ok;
  o.detail << "planted slopes max error " << fmt(worst, 3) << "; " << kEnsembleInitial << "->" << kEnsembleTarget
           << " ensemble mean top-100 slope " << fmt(mean) << " (band [" << kSlopeBandLow << ", " << kSlopeBandHigh
           << "]), " << in_band << "/" << e.summary.runs.size() << " runs individually in band";
  return o;
}

Outcome growth_forced_cases() {
  Outcome o;
  analysis::GdpSeries gdp;
  gdp.add(1992, 100.0);
  gdp.add(2013, 180.0);
  analysis::BalancePanel panel;
  panel.add("T", 1992, 100.0);
  panel.add("T", 2013, 180.0);
  panel.add("F", 1992, 100.0);
  panel.add("F", 2013, 1800.0);
  const auto solo = analysis::organic_growth(genealogy::build_forest({}), panel, gdp, 1992, 2013);
  double tracking = 1.0;
  double tenfold = 0.0;
  for (const auto& r : solo.records) (r.entity_id == "T" ? tracking : tenfold) = r.growth_index;
  const bool t_ok = std::abs(tracking) <= kGrowthTolerance;
  const bool f_ok = std::abs(tenfold - 1.0) <= kGrowthTolerance;

  // A absorbs B (2000) and C (2005); B absorbed D in 1990.
  const auto forest = genealogy::build_forest(
      {{Date(1990, 1, 1), "B", "D"}, {Date(2000, 1, 1), "A", "B"}, {Date(2005, 1, 1), "A", "C"}});
  analysis::BalancePanel agg;
  agg.add("A", 1992, 100.0);
  agg.add("B", 1992, 50.0);
  agg.add("C", 1992, 30.0);
  agg.add("A", 2013, 720.0);
  const auto report = analysis::organic_growth(forest, agg, gdp, 1992, 2013);
  const double manual = std::log10(720.0 / ((100.0 + 50.0 + 30.0) * (180.0 / 100.0)));
  const bool agg_ok = report.records.size() == 1 && report.records[0].acquisition_count == 3 &&
                      std::abs(report.records[0].growth_index - manual) <= kGrowthTolerance;
  o.pass = t_ok && f_ok && agg_ok;
  o.detail << "GDP-tracking " << fmt(tracking, 3) << ", tenfold " << fmt(tenfold, 15) << ", aggregate "
           << (report.records.empty() ? std::string("missing") : fmt(report.records[0].growth_index, 15))
           << " vs manual " << fmt(manual, 15);
  return o;
}

Outcome market_share_properties() {
  Outcome o;
  std::mt19937_64 gen(99);
  double worst = 0.0;
  std::size_t years = 0;
  for (int trial = 0; trial < 100; ++trial) {
    analysis::BalancePanel panel;
    const int n_years = 1 + static_cast<int>(gen() % 5);
    for (int y = 0; y < n_years; ++y) {
      const auto n = 1 + gen() % 3000;
      for (std::uint64_t i = 0; i < n; ++i) {
        // Lognormal sizes spanning several decades.
        panel.add("E" + std::to_string(i), 1990 + y, std::exp(std::normal_distribution<>(10.0, 2.5)(gen)));
      }
    }
    for (const auto& ys : analysis::market_share_percentiles(panel).years) {
      double total = 0.0;
      for (double s : ys.share) total += s;
      worst = std::max(worst, std::abs(total - 1.0));
      ++years;
    }
  }
  analysis::BalancePanel equal;
  for (int i = 0; i < 100; ++i) equal.add("E" + std::to_string(i), 2000, 42.0);
  bool uniform = true;
  const auto equal_shares = analysis::market_share_percentiles(equal);
  for (double s : equal_shares.years[0].share) {
    uniform = uniform && std::abs(s - 0.01) <= 1e-15;
  }
  analysis::BalancePanel giant;
  giant.add("G", 2000, 5e11);
  const bool top = analysis::market_share_percentiles(giant).years[0].share[0] == 1.0;
  o.pass = worst <= kShareSumTolerance && uniform && top;
  o.detail << years << " panel-years, max |sum-1| " << fmt(worst, 3) << "; equal entities uniform "
           << (uniform ? "ok" : "no") << "; single giant top share " << (top ? "1" : "not 1");
  return o;
}

Outcome envelope_coverage() {
  Outcome o;
  const auto& e = shared_ensemble();
  const auto held_out = model::run_simulation(e.params, kHeldOutSeed);
  for (std::uint64_t i = 0; i < kEnsembleRuns; ++i) {
    if (model::ensemble_run_seed(kEnsembleSeed, i) == kHeldOutSeed) {
      o.pass = false;
      o.detail << "held-out seed collides with ensemble run " << i;
      return o;
    }
  }
  const auto series = analysis::zipf_series(held_out.final_population.ancestries_by_id());
  const auto report = analysis::distribution_envelope(e.summary, series);
  o.pass = report.coverage >= kCoverageFraction;
  std::size_t inside = 0;
  for (const auto& p : report.points) inside += p.inside ? 1 : 0;
  o.detail << inside << "/" << report.points.size() << " ranks inside the " << kEnsembleRuns
           << "-run min-max band (coverage " << fmt(report.coverage) << ", need >= " << fmt(kCoverageFraction) << ")";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "merger probability exactness", merger_probability_exactness},
      {2, "conservation at every cycle", conservation_suite},
      {3, "replay determinism", replay_determinism},
      {4, "genealogy oracle", genealogy_oracle},
      {5, "weighted vs baseline separation", weighted_vs_baseline},
      {6, "Zipf fit", zipf_fit},
      {7, "growth index forced cases", growth_forced_cases},
      {8, "market share properties", market_share_properties},
      {9, "ensemble envelope coverage", envelope_coverage},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail << "exception: " << ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail.str()
              << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
