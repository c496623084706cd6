#include "mna/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>

#include "mna/analysis.hpp"
#include "mna/ensemble.hpp"
#include "mna/errors.hpp"
#include "mna/format.hpp"
#include "mna/genealogy.hpp"
#include "mna/io.hpp"
#include "mna/model.hpp"

namespace mna::cli {
namespace {

namespace fs = std::filesystem;
using io::Cell;
using io::Metadata;
using io::ResultTable;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Round-trip exact, unlike the 12-digit data format: replayed parameters
// must parse back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string text_of(const std::string& v) { return v; }
std::string text_of(double v) { return shortest(v); }
std::string text_of(std::uint64_t v) { return std::to_string(v); }
std::string text_of(int v) { return std::to_string(v); }

template <class T>
std::string join(const std::vector<T>& values) {
  std::string s;
  for (const auto& v : values) {
    if (!s.empty()) s += ',';
    if constexpr (std::is_same_v<T, Date>) {
      s += v.to_string();
    } else {
      s += std::to_string(v);
    }
  }
  return s;
}

// Registers options on a subcommand and remembers how to echo each resolved
// value into result metadata as arg.<name>.
class Recorder {
 public:
  explicit Recorder(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& name, T& var, const std::string& help) {
    entries_.push_back({name, [&var] { return text_of(var); }, false});
    return app_->add_option("--" + name, var, help);
  }

  // Input files are echoed as absolute paths so a replay works from any cwd.
  CLI::Option* path(const std::string& name, std::string& var, const std::string& help) {
    entries_.push_back({name, [&var] { return var.empty() ? var : fs::absolute(var).lexically_normal().string(); },
                        false});
    return app_->add_option("--" + name, var, help);
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    entries_.push_back({name, [&var] { return std::string(var ? "true" : "false"); }, true});
    return app_->add_flag("--" + name, var, help);
  }

  void record(Metadata& meta) const {
    meta.set("command", app_->get_name());
    for (const auto& e : entries_) meta.set("arg." + e.name, e.value());
  }

  CLI::App* app() const { return app_; }

 private:
  struct Entry {
    std::string name;
    std::function<std::string()> value;
    bool flag;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
};

struct Common {
  std::string out_dir;
  bool lenient = false;
  std::string aliases;
};

struct ModelArgs {
  std::uint64_t initial = 0;
  std::uint64_t target = 0;
  double p = model::kDefaultBaseProbability;
  double exponent = model::kDefaultAncestryExponent;
  bool baseline = false;
  std::uint64_t seed = 1;
  std::uint64_t max_cycles = model::kDefaultMaxCycles;
  std::string events;
  std::string as_of;
  std::string binning = "log:2";
};

struct Args {
  Common common;
  ModelArgs model;
  // simulate
  bool history = false;
  bool mergers = false;
  // ensemble
  std::uint64_t runs = 1000;
  double q_low = 0.05;
  double q_high = 0.95;
  unsigned threads = 0;
  std::string compare;
  // analyses
  std::string counts;
  std::string panel;
  std::string gdp;
  std::string dates;
  std::string years;
  std::uint64_t rank_first = 1;
  std::uint64_t rank_last = 0;  // 0: last rank of the series
  int window = 3;
  std::uint64_t group_size = 100;
  std::string averaging = "per-base-year";
  int start_year = 0;
  int end_year = 0;
  // replay
  std::string replay_file;
};

// ---------------------------------------------------------------------------
// Shared plumbing

io::Strictness strictness(const Common& c) { return c.lenient ? io::Strictness::lenient : io::Strictness::strict; }

void report_rejections(const std::string& what, const io::DataQualityReport& report, std::ostream& err) {
  for (const auto& issue : report.rejected) err << what << " line " << issue.line << ": " << issue.reason << '\n';
}

genealogy::GenealogyForest load_forest(const std::string& path, const Common& c, std::ostream& err,
                                       Metadata& meta) {
  io::AliasMap aliases;
  if (!c.aliases.empty()) aliases = io::read_alias_map(c.aliases);
  auto read = io::read_events(path, strictness(c), c.aliases.empty() ? nullptr : &aliases);
  report_rejections("events", read.report, err);
  meta.set("input.events_rows", std::to_string(read.report.rows_read));
  meta.set("input.events_rejected", std::to_string(read.report.rejected.size()));
  return genealogy::build_forest(std::move(read.events));
}

analysis::BalancePanel load_panel(const std::string& path, const Common& c, std::ostream& err, Metadata& meta) {
  auto read = io::read_panel(path, strictness(c));
  report_rejections("panel", read.report, err);
  meta.set("input.panel_rows", std::to_string(read.report.rows_read));
  meta.set("input.panel_rejected", std::to_string(read.report.rejected.size()));
  return std::move(read.panel);
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError("--" + flag + " is required");
}

Date parse_date_arg(const std::string& text, const std::string& flag) {
  const auto d = Date::parse(text);
  if (!d) throw UsageError("--" + flag + ": expected YYYY-MM-DD, got '" + text + "'");
  return *d;
}

std::vector<Date> parse_dates(const std::string& text) {
  std::vector<Date> out;
  std::string item;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      if (!item.empty()) out.push_back(parse_date_arg(item, "dates"));
      item.clear();
    } else {
      item += text[i];
    }
  }
  return out;
}

// "1992,1995-1997" -> 1992, 1995, 1996, 1997
std::vector<int> parse_years(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, comma - start);
    start = comma + 1;
    if (item.empty()) continue;
    const std::size_t dash = item.find('-', 1);
    const auto a = parse_i64(item.substr(0, dash));
    const auto b = dash == std::string::npos ? a : parse_i64(item.substr(dash + 1));
    if (!a || !b || *a > *b || *b - *a > 10000) throw UsageError("--years: bad item '" + item + "'");
    for (auto y = *a; y <= *b; ++y) out.push_back(static_cast<int>(y));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

analysis::Binning parse_binning(const std::string& text) {
  try {
    return analysis::Binning::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--binning: ") + e.what());
  }
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const ResultTable& table, const Metadata& meta, std::ostream& out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const auto path = dir_ / name;
    io::write_result(path, table, meta);
    out << "wrote " << path.string() << '\n';
  }

 private:
  fs::path dir_;
};

fs::path output_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

std::vector<std::pair<std::string, std::uint64_t>> live_counts(const genealogy::GenealogyForest& forest,
                                                               Date as_of) {
  std::vector<std::pair<std::string, std::uint64_t>> out;
  for (const auto& [id, n] : genealogy::ancestry_table(forest, as_of)) out.emplace_back(id, n);
  return out;
}

std::vector<std::uint64_t> values_of(const std::vector<std::pair<std::string, std::uint64_t>>& counts) {
  std::vector<std::uint64_t> out;
  out.reserve(counts.size());
  for (const auto& [id, n] : counts) out.push_back(n);
  return out;
}

ResultTable zipf_fit_table(const analysis::SlopeFit& fit, analysis::RankRange range) {
  ResultTable t{"zipf_fit", io::schema_columns("zipf_fit"), {}};
  t.rows.push_back({Cell{range.first}, Cell{range.last}, Cell{static_cast<std::uint64_t>(fit.points)},
                    Cell{fit.slope}, Cell{fit.intercept}, Cell{fit.standard_error}});
  return t;
}

void write_zipf_and_distribution(Output& output, const std::vector<std::uint64_t>& values,
                                 const analysis::Binning& binning, const Metadata& meta, std::ostream& out) {
  output.write("zipf.csv", io::zipf_table(analysis::zipf_series(values)), meta, out);
  Metadata dist_meta = meta;
  const auto table = io::distribution_table(analysis::ancestry_distribution(values, binning), dist_meta);
  output.write("distribution.csv", table, dist_meta, out);
}

const char* termination_name(model::Termination t) {
  return t == model::Termination::reached_target ? "reached_target" : "max_cycles";
}

// Resolves initial/target from an event file when given, then validates.
model::ModelParams resolve_model(ModelArgs& m, const Common& c, std::ostream& err, Metadata& meta) {
  if (!m.events.empty()) {
    const auto forest = load_forest(m.events, c, err, meta);
    if (forest.nodes().empty()) throw DataError("event file has no entities");
    if (m.as_of.empty()) m.as_of = forest.latest_date()->to_string();
    const Date as_of = parse_date_arg(m.as_of, "as-of");
    if (m.initial == 0) m.initial = forest.nodes().size();
    if (m.target == 0) {
      for (const auto& id : forest.nodes()) m.target += forest.is_live(id, as_of) ? 1 : 0;
    }
  }
  model::ModelParams params;
  params.base_probability = m.p;
  params.ancestry_exponent = m.exponent;
  params.ancestry_weighting = !m.baseline;
  params.initial_count = m.initial;
  params.target_count = m.target;
  params.max_cycles = m.max_cycles;
  params.validate();
  parse_binning(m.binning);
  return params;
}

void add_model_options(Recorder& r, ModelArgs& m) {
  r.option("initial", m.initial, "initial agent count (0: entity count of --events)");
  r.option("target", m.target, "stop once at most this many agents are live (0: live count of --events)");
  r.option("p", m.p, "base merger probability per agent and cycle");
  r.option("exponent", m.exponent, "ancestry exponent");
  r.flag("baseline", m.baseline, "random-walk baseline: merger probability ignores ancestry");
  r.option("seed", m.seed, "master seed");
  r.option("max-cycles", m.max_cycles, "cycle cap");
  r.path("events", m.events, "take initial/target counts from this event file");
  r.option("as-of", m.as_of, "date for the live count of --events (default: last event date)");
  r.option("binning", m.binning, "histogram binning, linear:<width> or log:<base>");
}

void add_ingest_options(Recorder& r, Common& c) {
  r.flag("lenient", c.lenient, "skip malformed rows instead of failing");
  r.path("aliases", c.aliases, "alias,canonical map applied to event ids");
}

void model_labels(const model::ModelParams& params, Metadata& meta) {
  meta.set("model", params.ancestry_weighting ? "ancestry_weighted" : "random_walk_baseline");
  meta.set("rng", std::string(Rng::kAlgorithm));
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(Args& a, const Recorder& rec, std::ostream& out, std::ostream& err) {
  Metadata meta;
  const auto params = resolve_model(a.model, a.common, err, meta);
  model::SimulationOptions options{a.history, a.mergers};
  const auto result = model::run_simulation(params, a.model.seed, options);

  const auto& pop = result.final_population;
  if (pop.live_count() + pop.absorbed_count() != params.initial_count ||
      pop.total_ancestry() != pop.absorbed_count()) {
    throw std::logic_error("conservation check failed");
  }

  Metadata full;
  rec.record(full);
  for (const auto& [k, v] : meta.entries()) full.set(k, v);
  model_labels(params, full);
  full.set("result.termination", termination_name(result.termination));
  full.set("result.cycles_run", std::to_string(result.cycles_run));
  full.set("result.live_count", std::to_string(pop.live_count()));
  full.set("result.absorbed_count", std::to_string(pop.absorbed_count()));

  Output output(output_dir(a.common));
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  for (const auto& agent : pop.live_agents()) counts.emplace_back(std::to_string(agent.id.value), agent.ancestry);
  std::sort(counts.begin(), counts.end(), [](const auto& x, const auto& y) {
    return std::stoull(x.first) < std::stoull(y.first);
  });
  output.write("population.csv", io::counts_table("population", counts), full, out);
  write_zipf_and_distribution(output, values_of(counts), parse_binning(a.model.binning), full, out);

  if (a.history) {
    ResultTable t{"history", io::schema_columns("history"), {}};
    for (const auto& h : result.history) {
      t.rows.push_back({Cell{h.cycle_index}, Cell{h.mergers_executed}, Cell{h.live_count_after}});
    }
    output.write("history.csv", t, full, out);
  }
  if (a.mergers) {
    ResultTable t{"mergers", io::schema_columns("mergers"), {}};
    for (const auto& m : result.mergers) {
      t.rows.push_back({Cell{m.cycle_index}, Cell{std::uint64_t{m.source.value}}, Cell{std::uint64_t{m.partner.value}},
                        Cell{m.partner_ancestry}});
    }
    output.write("mergers.csv", t, full, out);
  }
  out << "cycles " << result.cycles_run << ", live " << pop.live_count() << ", "
      << termination_name(result.termination) << '\n';
  return result.termination == model::Termination::max_cycles ? kExitMaxCycles : kExitOk;
}

ResultTable overlay_table(const analysis::OverlayReport& report) {
  ResultTable t{"overlay", io::schema_columns("overlay"), {}};
  for (const auto& p : report.points) {
    t.rows.push_back({Cell{p.key}, Cell{p.value}, Cell{p.min}, Cell{p.max}, Cell{std::uint64_t{p.inside ? 1u : 0u}}});
  }
  return t;
}

int cmd_ensemble(Args& a, const Recorder& rec, std::ostream& out, std::ostream& err) {
  Metadata meta;
  const auto params = resolve_model(a.model, a.common, err, meta);
  if (a.runs == 0) throw UsageError("--runs must be at least 1");
  model::EnsembleOptions options;
  options.band_low_quantile = a.q_low;
  options.band_high_quantile = a.q_high;
  options.binning = parse_binning(a.model.binning);
  options.threads = a.threads;
  options.keep_runs = true;

  std::optional<std::vector<std::pair<std::string, std::uint64_t>>> data;
  if (!a.compare.empty()) data = io::read_counts(a.compare);

  const auto summary = model::run_ensemble(params, a.runs, a.model.seed, options);

  Metadata full;
  rec.record(full);
  for (const auto& [k, v] : meta.entries()) full.set(k, v);
  model_labels(params, full);
  full.set("result.n_runs", std::to_string(summary.n_runs));
  full.set("result.n_terminated", std::to_string(summary.n_terminated));

  Output output(output_dir(a.common));
  ResultTable ranks{"rank_envelope", io::schema_columns("rank_envelope"), {}};
  for (const auto& p : summary.rank_envelope) {
    ranks.rows.push_back({Cell{p.rank}, Cell{p.min}, Cell{p.band_low}, Cell{p.band_high}, Cell{p.max}});
  }
  output.write("rank_envelope.csv", ranks, full, out);

  Metadata dist_meta = full;
  dist_meta.set("binning", summary.binning.to_string());
  dist_meta.set("zero_count_min", std::to_string(summary.zero_count_min));
  dist_meta.set("zero_count_max", std::to_string(summary.zero_count_max));
  ResultTable bins{"distribution_envelope", io::schema_columns("distribution_envelope"), {}};
  for (const auto& b : summary.distribution_envelope) {
    bins.rows.push_back({Cell{b.index}, Cell{b.lower}, Cell{b.upper}, Cell{b.min}, Cell{b.max}});
  }
  output.write("distribution_envelope.csv", bins, dist_meta, out);

  ResultTable runs{"runs", io::schema_columns("runs"), {}};
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    const auto& r = summary.runs[i];
    const std::uint64_t top = r.ancestry_desc.empty() ? 0 : r.ancestry_desc.front();
    runs.rows.push_back({Cell{static_cast<std::uint64_t>(i)}, Cell{r.seed}, Cell{std::string(termination_name(r.termination))},
                         Cell{r.cycles_run}, Cell{top}});
  }
  output.write("runs.csv", runs, full, out);

  if (data) {
    const auto values = values_of(*data);
    analysis::OverlayReport zipf;
    analysis::OverlayReport dist;
    try {
      zipf = analysis::distribution_envelope(summary, analysis::zipf_series(values));
      dist = analysis::distribution_envelope(summary, analysis::ancestry_distribution(values, options.binning));
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("--compare: ") + e.what());
    }
    Metadata zm = full;
    zm.set("result.coverage", format_double(zipf.coverage));
    output.write("overlay_zipf.csv", overlay_table(zipf), zm, out);
    Metadata dm = full;
    dm.set("binning", summary.binning.to_string());
    dm.set("result.coverage", format_double(dist.coverage));
    output.write("overlay_distribution.csv", overlay_table(dist), dm, out);
    out << "rank coverage " << format_double(zipf.coverage) << ", bin coverage " << format_double(dist.coverage)
        << '\n';
  }
  out << summary.n_terminated << " of " << summary.n_runs << " runs reached the target\n";
  return summary.n_terminated == summary.n_runs ? kExitOk : kExitMaxCycles;
}

int cmd_ancestry(Args& a, const Recorder& rec, std::ostream& out, std::ostream& err) {
  require(a.model.events, "events");
  Metadata meta;
  const auto forest = load_forest(a.model.events, a.common, err, meta);
  if (forest.nodes().empty()) throw DataError("event file has no events");
  if (a.model.as_of.empty()) a.model.as_of = forest.latest_date()->to_string();
  const Date as_of = parse_date_arg(a.model.as_of, "as-of");
  const auto dates = parse_dates(a.dates);
  const auto binning = parse_binning(a.model.binning);

  Metadata full;
  rec.record(full);
  for (const auto& [k, v] : meta.entries()) full.set(k, v);

  Output output(output_dir(a.common));
  const auto counts = live_counts(forest, as_of);
  output.write("ancestry.csv", io::counts_table("ancestry", counts), full, out);
  write_zipf_and_distribution(output, values_of(counts), binning, full, out);
  if (!dates.empty()) {
    ResultTable t{"ancestry_series", io::schema_columns("ancestry_series"), {}};
    for (const auto& snap : genealogy::accumulated_ancestry_series(forest, dates)) {
      for (const auto& [id, n] : snap.table) t.rows.push_back({Cell{snap.as_of.to_string()}, Cell{id}, Cell{n}});
    }
    output.write("ancestry_series.csv", t, full, out);
  }
  return kExitOk;
}

int cmd_zipf(Args& a, const Recorder& rec, std::ostream& out, std::ostream& err) {
  if (a.counts.empty() == a.model.events.empty()) throw UsageError("give exactly one of --counts and --events");
  Metadata meta;
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  if (!a.counts.empty()) {
    counts = io::read_counts(a.counts);
  } else {
    const auto forest = load_forest(a.model.events, a.common, err, meta);
    if (forest.nodes().empty()) throw DataError("event file has no events");
    if (a.model.as_of.empty()) a.model.as_of = forest.latest_date()->to_string();
    counts = live_counts(forest, parse_date_arg(a.model.as_of, "as-of"));
  }
  if (counts.empty()) throw DataError("no entities to rank");
  const auto series = analysis::zipf_series(values_of(counts));
  if (a.rank_last == 0) a.rank_last = std::max<std::uint64_t>(series.size(), 1);
  if (a.rank_first == 0 || a.rank_first > a.rank_last) throw UsageError("need 1 <= --rank-first <= --rank-last");

  Metadata full;
  rec.record(full);
  for (const auto& [k, v] : meta.entries()) full.set(k, v);
  Output output(output_dir(a.common));
  output.write("zipf.csv", io::zipf_table(series), full, out);

  const analysis::RankRange range{a.rank_first, a.rank_last};
  try {
    const auto fit = analysis::zipf_slope(series, range);
    Metadata fm = full;
    fm.set("result.slope", format_double(fit.slope));
    output.write("zipf_fit.csv", zipf_fit_table(fit, range), fm, out);
    out << "slope " << format_double(fit.slope) << " +/- " << format_double(fit.standard_error) << " over "
        << fit.points << " ranks\n";
  } catch (const std::invalid_argument& e) {
    err << "no slope fit: " << e.what() << '\n';
  }
  return kExitOk;
}

int cmd_rank_compare(Args& a, const Recorder& rec, std::ostream& out, std::ostream& err) {
  require(a.model.events, "events");
  require(a.panel, "panel");
  if (a.window < 1) throw UsageError("--window must be at least 1");
  if (a.group_size < 1) throw UsageError("--group-size must be at least 1");
  analysis::RankForecastOptions options;
  options.window_years = a.window;
  options.group_size = a.group_size;
  if (a.averaging == "per-base-year") {
    options.averaging = analysis::WindowAveraging::per_base_year;
  } else if (a.averaging == "per-base-year-and-year") {
    options.averaging = analysis::WindowAveraging::per_base_year_and_year;
  } else {
    throw UsageError("--averaging: expected per-base-year or per-base-year-and-year");
  }
  Metadata meta;
  const auto forest = load_forest(a.model.events, a.common, err, meta);
  const auto panel = load_panel(a.panel, a.common, err, meta);
  std::vector<int> years = a.years.empty() ? panel.years() : parse_years(a.years);
  a.years = join(years);
  const auto r = analysis::rank_merger_forecast(forest, panel, years, options);
  if (r.processed_years.empty()) throw DataError("no requested year has panel observations");

  Metadata full;
  rec.record(full);
  for (const auto& [k, v] : meta.entries()) full.set(k, v);
  full.set("result.processed_years", join(r.processed_years));
  full.set("result.skipped_years", join(r.skipped_years));

  ResultTable groups{"rank_compare", io::schema_columns("rank_compare"), {}};
  ResultTable by_year{"rank_compare_by_year", io::schema_columns("rank_compare_by_year"), {}};
  for (const auto* report : {&r.by_ancestry, &r.by_balance_sheet}) {
    const std::string method = analysis::to_string(report->method);
    for (std::size_t g = 0; g < report->groups.size(); ++g) {
      const auto& grp = report->groups[g];
      groups.rows.push_back({Cell{method}, Cell{static_cast<std::uint64_t>(g + 1)}, Cell{grp.first_rank},
                             Cell{grp.last_rank}, Cell{grp.mean_mergers}});
    }
    for (const auto& [year, totals] : report->per_year) {
      for (std::size_t g = 0; g < totals.size(); ++g) {
        by_year.rows.push_back({Cell{method}, Cell{std::int64_t{year}}, Cell{static_cast<std::uint64_t>(g + 1)},
                                Cell{totals[g]}});
      }
    }
  }
  Output output(output_dir(a.common));
  output.write("rank_compare.csv", groups, full, out);
  output.write("rank_compare_by_year.csv", by_year, full, out);
  return kExitOk;
}

int cmd_growth(Args& a, const Recorder& rec, std::ostream& out, std::ostream& err) {
  require(a.model.events, "events");
  require(a.panel, "panel");
  require(a.gdp, "gdp");
  Metadata meta;
  const auto forest = load_forest(a.model.events, a.common, err, meta);
  const auto panel = load_panel(a.panel, a.common, err, meta);
  auto gdp_read = io::read_gdp(a.gdp, strictness(a.common));
  report_rejections("gdp", gdp_read.report, err);
  const auto years = panel.years();
  if (years.empty()) throw DataError("panel is empty");
  if (a.start_year == 0) a.start_year = years.front();
  if (a.end_year == 0) a.end_year = years.back();
  const auto report = analysis::organic_growth(forest, panel, gdp_read.gdp, a.start_year, a.end_year);

  Metadata full;
  rec.record(full);
  for (const auto& [k, v] : meta.entries()) full.set(k, v);
  full.set("growth_log_base", "10");
  full.set("result.survivors", std::to_string(report.records.size()));
  full.set("result.excluded_no_baseline", std::to_string(report.excluded_no_baseline.size()));
  full.set("result.ancestors_missing_start_balance", std::to_string(report.ancestors_missing_start_balance));
  if (const auto w = analysis::weighted_mean_growth(report.records)) {
    full.set("result.weighted_mean_growth", format_double(*w));
  }
  if (const auto w = analysis::weighted_mean_growth(report.records, 0)) {
    full.set("result.weighted_mean_growth_acquirers", format_double(*w));
  }

  ResultTable t{"growth", io::schema_columns("growth"), {}};
  for (const auto& g : report.records) {
    t.rows.push_back({Cell{g.entity_id}, Cell{g.acquisition_count}, Cell{g.end_balance}, Cell{g.baseline},
                      Cell{static_cast<std::uint64_t>(g.baseline_members)}, Cell{g.growth_index}});
  }
  Output output(output_dir(a.common));
  output.write("growth.csv", t, full, out);
  for (const auto& id : report.excluded_no_baseline) err << "no start-year baseline for " << id << '\n';
  return kExitOk;
}

int cmd_market_share(Args& a, const Recorder& rec, std::ostream& out, std::ostream& err) {
  require(a.panel, "panel");
  Metadata meta;
  const auto panel = load_panel(a.panel, a.common, err, meta);
  std::vector<int> years = a.years.empty() ? panel.years() : parse_years(a.years);
  a.years = join(years);
  const auto series = analysis::market_share_percentiles(panel, years);

  Metadata full;
  rec.record(full);
  for (const auto& [k, v] : meta.entries()) full.set(k, v);
  full.set("result.degraded_years", join(series.degraded_years));

  ResultTable t{"market_share", io::schema_columns("market_share"), {}};
  for (const auto& ys : series.years) {
    for (std::size_t b = 0; b < analysis::kPercentiles; ++b) {
      t.rows.push_back({Cell{std::int64_t{ys.year}}, Cell{static_cast<std::uint64_t>(b + 1)}, Cell{ys.share[b]},
                        Cell{ys.cumulative[b]}});
    }
  }
  Output output(output_dir(a.common));
  output.write("market_share.csv", t, full, out);
  for (int y : series.degraded_years) err << "year " << y << " has fewer than 100 entities\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace {

int cmd_replay(const Args& a, std::ostream& out, std::ostream& err) {
  const auto file = io::read_result(a.replay_file);
  const auto command = file.metadata.get("command");
  if (!command || *command == "replay") throw DataError(a.replay_file + ": no replayable command in metadata");
  std::vector<std::string> argv{*command};
  for (const auto& [key, value] : file.metadata.entries()) {
    if (key.rfind("arg.", 0) != 0 || value.empty() || value == "false") continue;
    argv.push_back("--" + key.substr(4));
    if (value != "true") argv.push_back(value);
  }
  argv.push_back("--out");
  argv.push_back(output_dir(a.common).string());
  return run_cli(argv, out, err);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ancestry-weighted merger model: simulation and genealogy analyses", "mna"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string("mna ") + std::string(io::kToolVersion));
  Args a;

  std::vector<std::pair<Recorder, std::function<int(const Recorder&)>>> commands;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--out", a.common.out_dir, std::string("output directory (default: $") + kOutputDirEnv + " or .)");
    return Recorder(sub);
  };

  {
    Recorder r = add("simulate", "run one simulation");
    add_model_options(r, a.model);
    add_ingest_options(r, a.common);
    r.flag("history", a.history, "also write per-cycle history");
    r.flag("mergers", a.mergers, "also write the merger log");
    commands.emplace_back(r, [&](const Recorder& rec) { return cmd_simulate(a, rec, out, err); });
  }
  {
    Recorder r = add("ensemble", "run many simulations and summarize their spread");
    add_model_options(r, a.model);
    add_ingest_options(r, a.common);
    r.option("runs", a.runs, "number of runs");
    r.option("quantile-low", a.q_low, "lower band quantile");
    r.option("quantile-high", a.q_high, "upper band quantile");
    r.path("compare", a.compare, "entity_id,ancestry file to overlay on the envelopes");
    r.app()->add_option("--threads", a.threads, "worker threads (0: all cores); does not affect output");
    commands.emplace_back(r, [&](const Recorder& rec) { return cmd_ensemble(a, rec, out, err); });
  }
  {
    Recorder r = add("ancestry", "ancestor counts of live entities from an event file");
    r.path("events", a.model.events, "date,acquirer_id,target_id file");
    r.option("as-of", a.model.as_of, "snapshot date (default: last event date)");
    r.option("dates", a.dates, "comma-separated dates for an accumulated series");
    r.option("binning", a.model.binning, "histogram binning, linear:<width> or log:<base>");
    add_ingest_options(r, a.common);
    commands.emplace_back(r, [&](const Recorder& rec) { return cmd_ancestry(a, rec, out, err); });
  }
  {
    Recorder r = add("zipf", "rank-ordered ancestry and fitted log-log slope");
    r.path("counts", a.counts, "entity_id,ancestry file");
    r.path("events", a.model.events, "event file (alternative to --counts)");
    r.option("as-of", a.model.as_of, "snapshot date for --events (default: last event date)");
    r.option("rank-first", a.rank_first, "first rank of the fit");
    r.option("rank-last", a.rank_last, "last rank of the fit (default: whole series)");
    add_ingest_options(r, a.common);
    commands.emplace_back(r, [&](const Recorder& rec) { return cmd_zipf(a, rec, out, err); });
  }
  {
    Recorder r = add("rank-compare", "forward merger counts by ancestry rank and by size rank");
    r.path("events", a.model.events, "event file");
    r.path("panel", a.panel, "entity_id,year,balance file");
    r.option("years", a.years, "base years, e.g. 1992-2010 (default: every panel year)");
    r.option("window", a.window, "forward window in years");
    r.option("group-size", a.group_size, "ranks per group");
    r.option("averaging", a.averaging, "per-base-year or per-base-year-and-year");
    add_ingest_options(r, a.common);
    commands.emplace_back(r, [&](const Recorder& rec) { return cmd_rank_compare(a, rec, out, err); });
  }
  {
    Recorder r = add("growth", "GDP-indexed organic growth of surviving entities");
    r.path("events", a.model.events, "event file");
    r.path("panel", a.panel, "entity_id,year,balance file");
    r.path("gdp", a.gdp, "year,gdp file");
    r.option("start-year", a.start_year, "baseline year (default: first panel year)");
    r.option("end-year", a.end_year, "end year (default: last panel year)");
    add_ingest_options(r, a.common);
    commands.emplace_back(r, [&](const Recorder& rec) { return cmd_growth(a, rec, out, err); });
  }
  {
    Recorder r = add("market-share", "asset share of each size percentile per year");
    r.path("panel", a.panel, "entity_id,year,balance file");
    r.option("years", a.years, "years (default: every panel year)");
    r.flag("lenient", a.common.lenient, "skip malformed rows instead of failing");
    commands.emplace_back(r, [&](const Recorder& rec) { return cmd_market_share(a, rec, out, err); });
  }
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a result file");
  replay->add_option("file", a.replay_file, "result file")->required();
  replay->add_option("--out", a.common.out_dir, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (replay->parsed()) return cmd_replay(a, out, err);
    for (const auto& [rec, run] : commands) {
      if (rec.app()->parsed()) return run(rec);
    }
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace mna::cli
