// Python bindings for the core operations. Plain containers cross the
// boundary: events are (date, acquirer, target) tuples with ISO dates, panels
// are (entity, year, balance) tuples.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mna/analysis.hpp"
#include "mna/cli.hpp"
#include "mna/ensemble.hpp"
#include "mna/errors.hpp"
#include "mna/genealogy.hpp"
#include "mna/io.hpp"
#include "mna/model.hpp"

namespace py = pybind11;
using namespace mna;

namespace {

using EventTuple = std::tuple<std::string, std::string, std::string>;
using PanelTuple = std::tuple<std::string, int, double>;

Date to_date(const std::string& text) {
  const auto d = Date::parse(text);
  if (!d) throw std::invalid_argument("expected YYYY-MM-DD, got '" + text + "'");
  return *d;
}

genealogy::GenealogyForest forest_of(const std::vector<EventTuple>& events) {
  std::vector<genealogy::MergerEvent> out;
  out.reserve(events.size());
  for (const auto& [date, acquirer, target] : events) out.push_back({to_date(date), acquirer, target});
  return genealogy::build_forest(std::move(out));
}

analysis::BalancePanel panel_of(const std::vector<PanelTuple>& rows) {
  analysis::BalancePanel panel;
  for (const auto& [id, year, balance] : rows) panel.add(id, year, balance);
  return panel;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> zipf_pairs(const std::vector<analysis::ZipfPoint>& s) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (const auto& p : s) out.emplace_back(p.rank, p.value);
  return out;
}

const char* termination_name(model::Termination t) {
  return t == model::Termination::reached_target ? "reached_target" : "max_cycles";
}

}  // namespace

PYBIND11_MODULE(_mna, m) {
  m.doc() = "Ancestry-weighted merger model and genealogy analyses";
  m.attr("__version__") = std::string(io::kToolVersion);
  m.attr("RNG_ALGORITHM") = std::string(Rng::kAlgorithm);

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  py::class_<model::ModelParams>(m, "ModelParams")
      .def(py::init([](std::uint64_t initial, std::uint64_t target, double p, double exponent, bool weighting,
                       std::uint64_t max_cycles) {
             model::ModelParams params;
             params.initial_count = initial;
             params.target_count = target;
             params.base_probability = p;
             params.ancestry_exponent = exponent;
             params.ancestry_weighting = weighting;
             params.max_cycles = max_cycles;
             return params;
           }),
           py::arg("initial_count") = 0, py::arg("target_count") = 0,
           py::arg("base_probability") = model::kDefaultBaseProbability,
           py::arg("ancestry_exponent") = model::kDefaultAncestryExponent, py::arg("ancestry_weighting") = true,
           py::arg("max_cycles") = model::kDefaultMaxCycles)
      .def_readwrite("initial_count", &model::ModelParams::initial_count)
      .def_readwrite("target_count", &model::ModelParams::target_count)
      .def_readwrite("base_probability", &model::ModelParams::base_probability)
      .def_readwrite("ancestry_exponent", &model::ModelParams::ancestry_exponent)
      .def_readwrite("ancestry_weighting", &model::ModelParams::ancestry_weighting)
      .def_readwrite("max_cycles", &model::ModelParams::max_cycles)
      .def("validate", &model::ModelParams::validate);

  m.def("merger_probability", &model::merger_probability, py::arg("ancestry"), py::arg("params"));
  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"));

  m.def(
      "simulate",
      [](const model::ModelParams& params, std::uint64_t seed, bool history, bool mergers) {
        model::SimulationResult r;
        {
          py::gil_scoped_release release;
          r = model::run_simulation(params, seed, {history, mergers});
        }
        py::dict out;
        out["ancestries"] = r.final_population.ancestries_by_id();
        std::vector<std::uint32_t> ids;
        for (const auto& a : r.final_population.live_agents()) ids.push_back(a.id.value);
        out["live_ids"] = ids;
        out["cycles_run"] = r.cycles_run;
        out["termination"] = termination_name(r.termination);
        out["absorbed_count"] = r.final_population.absorbed_count();
        std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> h;
        for (const auto& c : r.history) h.emplace_back(c.cycle_index, c.mergers_executed, c.live_count_after);
        out["history"] = h;
        std::vector<std::tuple<std::uint64_t, std::uint32_t, std::uint32_t, std::uint64_t>> log;
        for (const auto& x : r.mergers) log.emplace_back(x.cycle_index, x.source.value, x.partner.value, x.partner_ancestry);
        out["mergers"] = log;
        return out;
      },
      py::arg("params"), py::arg("seed"), py::arg("record_history") = false, py::arg("record_mergers") = false,
      "One simulation. `ancestries` lists live agents' ancestry in ascending id order.");

  m.def(
      "run_ensemble",
      [](const model::ModelParams& params, std::uint64_t n_runs, std::uint64_t master_seed, double band_low,
         double band_high, const std::string& binning, unsigned threads, bool keep_runs) {
        model::EnsembleOptions opts;
        opts.band_low_quantile = band_low;
        opts.band_high_quantile = band_high;
        opts.binning = analysis::Binning::parse(binning);
        opts.threads = threads;
        opts.keep_runs = keep_runs;
        model::EnsembleSummary s;
        {
          py::gil_scoped_release release;
          s = model::run_ensemble(params, n_runs, master_seed, opts);
        }
        py::dict out;
        out["n_runs"] = s.n_runs;
        out["n_terminated"] = s.n_terminated;
        std::vector<std::tuple<std::uint64_t, std::uint64_t, double, double, std::uint64_t>> ranks;
        for (const auto& p : s.rank_envelope) ranks.emplace_back(p.rank, p.min, p.band_low, p.band_high, p.max);
        out["rank_envelope"] = ranks;
        std::vector<std::tuple<std::int64_t, double, double, std::uint64_t, std::uint64_t>> bins;
        for (const auto& b : s.distribution_envelope) bins.emplace_back(b.index, b.lower, b.upper, b.min, b.max);
        out["distribution_envelope"] = bins;
        std::vector<std::vector<std::uint64_t>> runs;
        for (const auto& r : s.runs) runs.push_back(r.ancestry_desc);
        out["runs"] = runs;
        return out;
      },
      py::arg("params"), py::arg("n_runs"), py::arg("master_seed"), py::arg("band_low") = 0.05,
      py::arg("band_high") = 0.95, py::arg("binning") = "log:2", py::arg("threads") = 0,
      py::arg("keep_runs") = false);

  m.def(
      "zipf_series",
      [](const std::vector<std::uint64_t>& counts) {
        return zipf_pairs(analysis::zipf_series(std::span<const std::uint64_t>(counts)));
      },
      py::arg("counts"), "Descending (rank, value) pairs; zeros dropped.");

  m.def(
      "zipf_slope",
      [](const std::vector<std::uint64_t>& counts, std::uint64_t rank_first, std::uint64_t rank_last) {
        const auto fit =
            analysis::zipf_slope(analysis::zipf_series(std::span<const std::uint64_t>(counts)), {rank_first, rank_last});
        py::dict out;
        out["slope"] = fit.slope;
        out["intercept"] = fit.intercept;
        out["standard_error"] = fit.standard_error;
        out["points"] = fit.points;
        return out;
      },
      py::arg("counts"), py::arg("rank_first") = 1, py::arg("rank_last") = 100);

  m.def(
      "ancestry_distribution",
      [](const std::vector<std::uint64_t>& counts, const std::string& binning) {
        const auto h = analysis::ancestry_distribution(counts, analysis::Binning::parse(binning));
        py::dict out;
        out["zero_count"] = h.zero_count;
        out["total"] = h.total;
        std::vector<std::tuple<std::int64_t, double, double, std::uint64_t>> bins;
        for (const auto& b : h.bins) bins.emplace_back(b.index, b.lower, b.upper, b.frequency);
        out["bins"] = bins;
        return out;
      },
      py::arg("counts"), py::arg("binning") = "log:2");

  m.def(
      "ancestry_table",
      [](const std::vector<EventTuple>& events, const std::string& as_of) {
        return genealogy::ancestry_table(forest_of(events), to_date(as_of));
      },
      py::arg("events"), py::arg("as_of"), "Ancestor counts of the entities live on `as_of`.");

  m.def(
      "ancestry_count",
      [](const std::vector<EventTuple>& events, const std::string& entity, const std::string& as_of) {
        return genealogy::ancestry_count(forest_of(events), entity, to_date(as_of));
      },
      py::arg("events"), py::arg("entity"), py::arg("as_of"));

  m.def(
      "organic_growth",
      [](const std::vector<EventTuple>& events, const std::vector<PanelTuple>& panel,
         const std::map<int, double>& gdp, int start_year, int end_year) {
        analysis::GdpSeries series;
        for (const auto& [y, v] : gdp) series.add(y, v);
        const auto report = analysis::organic_growth(forest_of(events), panel_of(panel), series, start_year, end_year);
        py::list records;
        for (const auto& r : report.records) {
          py::dict d;
          d["entity_id"] = r.entity_id;
          d["acquisition_count"] = r.acquisition_count;
          d["end_balance"] = r.end_balance;
          d["baseline"] = r.baseline;
          d["baseline_members"] = r.baseline_members;
          d["growth_index"] = r.growth_index;
          records.append(d);
        }
        py::dict out;
        out["records"] = records;
        out["excluded_no_baseline"] = report.excluded_no_baseline;
        out["ancestors_missing_start_balance"] = report.ancestors_missing_start_balance;
        return out;
      },
      py::arg("events"), py::arg("panel"), py::arg("gdp"), py::arg("start_year"), py::arg("end_year"));

  m.def(
      "market_share_percentiles",
      [](const std::vector<PanelTuple>& panel, const std::vector<int>& years) {
        const auto s = analysis::market_share_percentiles(panel_of(panel), years);
        py::list out;
        for (const auto& ys : s.years) {
          py::dict d;
          d["year"] = ys.year;
          d["entities"] = ys.entities;
          d["share"] = std::vector<double>(ys.share.begin(), ys.share.end());
          d["cumulative"] = std::vector<double>(ys.cumulative.begin(), ys.cumulative.end());
          out.append(d);
        }
        return out;
      },
      py::arg("panel"), py::arg("years") = std::vector<int>{});

  m.def(
      "rank_merger_forecast",
      [](const std::vector<EventTuple>& events, const std::vector<PanelTuple>& panel, const std::vector<int>& years,
         int window, std::uint64_t group_size) {
        const auto r = analysis::rank_merger_forecast(forest_of(events), panel_of(panel), years,
                                                      {window, group_size, analysis::WindowAveraging::per_base_year});
        auto groups = [](const analysis::RankGroupReport& rep) {
          std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> g;
          for (const auto& x : rep.groups) g.emplace_back(x.first_rank, x.last_rank, x.mean_mergers);
          return g;
        };
        py::dict out;
        out["ancestry"] = groups(r.by_ancestry);
        out["balance_sheet"] = groups(r.by_balance_sheet);
        out["processed_years"] = r.processed_years;
        out["skipped_years"] = r.skipped_years;
        return out;
      },
      py::arg("events"), py::arg("panel"), py::arg("years"), py::arg("window") = 3, py::arg("group_size") = 100);

  m.def(
      "read_events",
      [](const std::string& path, bool lenient) {
        const auto r =
            io::read_events(path, lenient ? io::Strictness::lenient : io::Strictness::strict);
        std::vector<EventTuple> events;
        for (const auto& e : r.events) events.emplace_back(e.date.to_string(), e.acquirer_id, e.target_id);
        std::vector<std::pair<std::size_t, std::string>> rejected;
        for (const auto& issue : r.report.rejected) rejected.emplace_back(issue.line, issue.reason);
        return py::make_tuple(events, rejected);
      },
      py::arg("path"), py::arg("lenient") = false, "Returns (events, rejected rows as (line, reason)).");

  m.def(
      "read_result",
      [](const std::string& path) {
        const auto f = io::read_result(path);
        py::dict out;
        out["kind"] = f.kind;
        out["schema_version"] = f.schema_version;
        out["tool"] = f.tool;
        out["metadata"] = f.metadata.entries();
        out["columns"] = f.columns;
        out["rows"] = f.rows;
        return out;
      },
      py::arg("path"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs an `mna` command line in-process; returns (exit code, stdout, stderr).");
}
