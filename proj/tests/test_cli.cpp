#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mna/cli.hpp"
#include "mna/format.hpp"
#include "mna/io.hpp"
#include "temp_dir.hpp"

using namespace mna;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run mna_run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

double cell(const io::ResultFile& f, std::size_t row, std::size_t col) { return *parse_double(f.rows.at(row).at(col)); }

}  // namespace

TEST_CASE("cli simulate: two agents, certain merger") {
  TempDir dir;
  const auto r = mna_run({"simulate", "--initial", "2", "--target", "1", "--p", "1", "--seed", "7", "--out",
                          dir.path().string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto pop = io::read_result(dir.path() / "population.csv");
  REQUIRE(pop.rows.size() == 1);
  CHECK(pop.rows[0][1] == "1");
  CHECK(pop.metadata.get("result.cycles_run") == "1");
  CHECK(pop.metadata.get("arg.seed") == "7");
  CHECK(pop.metadata.get("arg.p") == "1");
}

TEST_CASE("cli simulate: repeat runs and replay are byte-identical") {
  TempDir dir;
  const auto a = dir.path() / "a";
  const std::vector<std::string> args{"simulate", "--initial", "500", "--target", "100", "--seed", "3", "--p", "0.001",
                                      "--history", "--mergers"};
  auto with_out = [&](const std::filesystem::path& p) {
    auto v = args;
    v.push_back("--out");
    v.push_back(p.string());
    return v;
  };
  REQUIRE(mna_run(with_out(a)).code == 0);
  REQUIRE(mna_run(with_out(dir.path() / "b")).code == 0);
  REQUIRE(mna_run({"replay", (a / "zipf.csv").string(), "--out", (dir.path() / "c").string()}).code == 0);
  for (const char* name : {"population.csv", "zipf.csv", "distribution.csv", "history.csv", "mergers.csv"}) {
    const auto ref = read_file(a / name);
    CHECK(!ref.empty());
    CHECK(read_file(dir.path() / "b" / name) == ref);
    CHECK(read_file(dir.path() / "c" / name) == ref);
  }
}

TEST_CASE("cli simulate: 20000 -> 10000 conserves agents") {
  TempDir dir;
  const auto r = mna_run({"simulate", "--initial", "20000", "--target", "10000", "--p", "0.000025", "--seed", "1",
                          "--out", dir.path().string()});
  REQUIRE(r.code == 0);
  const auto pop = io::read_result(dir.path() / "population.csv");
  std::uint64_t sum = 0;
  for (const auto& row : pop.rows) sum += *parse_u64(row[1]);
  CHECK(pop.rows.size() == 10000);
  CHECK(sum == 10000);
  CHECK(pop.metadata.get("result.absorbed_count") == "10000");
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  const auto out = dir.path().string();
  CHECK(mna_run({"simulate", "--nonsense"}).code == cli::kExitUsage);
  CHECK(mna_run({}).code == cli::kExitUsage);
  CHECK(mna_run({"simulate", "--initial", "5", "--target", "9", "--out", out}).code == cli::kExitUsage);
  CHECK(mna_run({"simulate", "--initial", "100", "--target", "1", "--p", "1e-9", "--max-cycles", "5", "--out", out})
            .code == cli::kExitMaxCycles);
  const auto bad = dir.write("bad.csv", "date,acquirer_id,target_id\n2000-01-01,A,A\n");
  const auto r = mna_run({"ancestry", "--events", bad.string(), "--out", out});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find(":2:") != std::string::npos);
  CHECK(mna_run({"ancestry", "--events", (dir.path() / "missing.csv").string(), "--out", out}).code ==
        cli::kExitData);
  CHECK(mna_run({"simulate", "--help"}).code == cli::kExitOk);
}

TEST_CASE("cli output directory falls back to the environment") {
  TempDir dir;
  const auto target = dir.path() / "env";
  ::setenv(cli::kOutputDirEnv, target.c_str(), 1);
  const auto r = mna_run({"simulate", "--initial", "2", "--target", "1", "--p", "1"});
  ::unsetenv(cli::kOutputDirEnv);
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(target / "population.csv"));
  CHECK(io::read_result(target / "population.csv").metadata.get("arg.out") == std::nullopt);
}

TEST_CASE("cli zipf on counts {5,3,3}") {
  TempDir dir;
  const auto counts = dir.write("c.csv", "entity_id,ancestry\nA,5\nB,3\nC,3\n");
  REQUIRE(mna_run({"zipf", "--counts", counts.string(), "--out", dir.path().string()}).code == 0);
  const auto z = io::zipf_from_result(io::read_result(dir.path() / "zipf.csv"));
  CHECK(z == std::vector<analysis::ZipfPoint>{{1, 5}, {2, 3}, {3, 3}});
  const auto fit = io::read_result(dir.path() / "zipf_fit.csv");
  CHECK(fit.rows.at(0).at(2) == "3");
}

TEST_CASE("cli growth on the three-entity fixture") {
  TempDir dir;
  const auto events = dir.write("e.csv", "date,acquirer_id,target_id\n1990-01-01,B,D\n2000-01-01,A,B\n2005-01-01,A,C\n");
  const auto panel = dir.write("p.csv", "entity_id,year,balance\nA,1992,100\nB,1992,50\nC,1992,30\nA,2013,720\n");
  const auto gdp = dir.write("g.csv", "year,gdp\n1992,100\n2013,180\n");
  const auto r = mna_run({"growth", "--events", events.string(), "--panel", panel.string(), "--gdp", gdp.string(),
                          "--out", dir.path().string()});
  REQUIRE(r.code == 0);
  const auto g = io::read_result(dir.path() / "growth.csv");
  REQUIRE(g.rows.size() == 1);
  CHECK(g.rows[0][0] == "A");
  CHECK(g.rows[0][1] == "3");
  // 12 significant digits on disk.
  CHECK(std::abs(cell(g, 0, 5) - 0.3467874862246563) < 1e-11);
  CHECK(g.metadata.get("arg.start-year") == "1992");
  CHECK(g.metadata.get("arg.end-year") == "2013");
  CHECK(g.metadata.get("growth_log_base") == "10");
}

TEST_CASE("cli market-share on 100 equal entities") {
  TempDir dir;
  std::string panel = "entity_id,year,balance\n";
  for (int i = 0; i < 100; ++i) panel += "E" + std::to_string(i) + ",2000,3.5\n";
  const auto p = dir.write("p.csv", panel);
  REQUIRE(mna_run({"market-share", "--panel", p.string(), "--out", dir.path().string()}).code == 0);
  const auto f = io::read_result(dir.path() / "market_share.csv");
  REQUIRE(f.rows.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) CHECK(cell(f, i, 2) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(f.metadata.get("arg.years") == "2000");
}

TEST_CASE("cli rank-compare and ancestry") {
  TempDir dir;
  std::string ev = "date,acquirer_id,target_id\n";
  for (int i = 0; i < 5; ++i) ev += "1995-01-0" + std::to_string(i + 1) + ",X,a" + std::to_string(i) + "\n";
  for (int i = 0; i < 3; ++i) ev += std::to_string(2001 + i) + "-06-01,X,b" + std::to_string(i) + "\n";
  const auto events = dir.write("e.csv", ev);
  const auto panel = dir.write("p.csv", "entity_id,year,balance\nX,2000,10\nY,2000,1000\n");
  REQUIRE(mna_run({"rank-compare", "--events", events.string(), "--panel", panel.string(), "--group-size", "1",
                   "--out", dir.path().string()})
              .code == 0);
  const auto f = io::read_result(dir.path() / "rank_compare.csv");
  REQUIRE(f.rows.size() == 4);
  CHECK(f.rows[0][0] == "ancestry");
  CHECK(cell(f, 0, 4) == 3.0);
  CHECK(f.rows[2][0] == "balance_sheet");
  CHECK(cell(f, 2, 4) == 0.0);

  REQUIRE(mna_run({"ancestry", "--events", events.string(), "--as-of", "2000-12-31", "--dates",
                   "1994-12-31,2010-01-01", "--out", dir.path().string()})
              .code == 0);
  const auto a = io::read_result(dir.path() / "ancestry.csv");
  // b0..b2 are absorbed later, so they are still live with no ancestors.
  REQUIRE(a.rows.size() == 4);
  CHECK(a.rows[0] == std::vector<std::string>{"X", "5"});
  CHECK(a.rows[3] == std::vector<std::string>{"b2", "0"});
  const auto s = io::read_result(dir.path() / "ancestry_series.csv");
  CHECK(s.rows.back() == std::vector<std::string>{"2010-01-01", "X", "8"});
}

TEST_CASE("cli ensemble: replay and compare") {
  TempDir dir;
  const auto a = dir.path() / "a";
  REQUIRE(mna_run({"ensemble", "--initial", "300", "--target", "60", "--p", "0.002", "--runs", "12", "--seed", "5",
                   "--out", a.string()})
              .code == 0);
  REQUIRE(mna_run({"replay", (a / "runs.csv").string(), "--out", (dir.path() / "b").string(), }).code == 0);
  for (const char* name : {"rank_envelope.csv", "distribution_envelope.csv", "runs.csv"}) {
    CHECK(read_file(dir.path() / "b" / name) == read_file(a / name));
  }
  const auto runs = io::read_result(a / "runs.csv");
  CHECK(runs.rows.size() == 12);

  std::string counts = "entity_id,ancestry\n";
  for (int i = 0; i < 61; ++i) counts += "E" + std::to_string(i) + ",1\n";
  const auto wide = dir.write("wide.csv", counts);
  const auto r = mna_run({"ensemble", "--initial", "300", "--target", "60", "--p", "0.002", "--runs", "4",
                          "--compare", wide.string(), "--out", a.string()});
  CHECK(r.code == cli::kExitData);
}
