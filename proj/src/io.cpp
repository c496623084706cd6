#include "mna/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <tuple>

#include "mna/errors.hpp"
#include "mna/format.hpp"

namespace mna::io {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

/// Splits content into lines, drops the BOM, CR, blank lines and the '#'
/// preamble. The first remaining line is the header.
std::vector<Line> lines_of(std::string_view content) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
  std::vector<Line> out;
  std::size_t number = 0;
  bool header_seen = false;
  while (!content.empty()) {
    ++number;
    const auto eol = content.find('\n');
    std::string_view line = content.substr(0, eol);
    content.remove_prefix(eol == std::string_view::npos ? content.size() : eol + 1);
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen && line.starts_with('#')) continue;
    header_seen = true;
    out.push_back({number, line});
  }
  return out;
}

/// Body rows after checking the header against the accepted alternatives.
std::vector<Line> body_after_header(const std::filesystem::path& path, std::string_view content,
                                    std::initializer_list<std::string_view> headers) {
  auto lines = lines_of(content);
  if (lines.empty()) throw ParseError(path.string() + ": missing header", 0);
  const bool ok = std::any_of(headers.begin(), headers.end(), [&](auto h) { return lines.front().text == h; });
  if (!ok) {
    throw ParseError(path.string() + ": expected header '" + std::string(*headers.begin()) + "', found '" +
                         std::string(lines.front().text) + "'",
                     lines.front().number);
  }
  lines.erase(lines.begin());
  return lines;
}

/// Records or throws, depending on strictness.
class RowGate {
 public:
  RowGate(const std::filesystem::path& path, Strictness strictness, DataQualityReport& report)
      : path_(path), strictness_(strictness), report_(report) {}

  void reject(std::size_t line, std::string reason) {
    if (strictness_ == Strictness::strict) {
      throw ParseError(path_.string() + ":" + std::to_string(line) + ": " + reason, line);
    }
    report_.rejected.push_back({line, std::move(reason)});
  }

 private:
  const std::filesystem::path& path_;
  Strictness strictness_;
  DataQualityReport& report_;
};

bool valid_id(std::string_view id) {
  return !id.empty() && id.find_first_of("\"\r\n") == std::string_view::npos;
}

std::optional<int> parse_year(std::string_view text) {
  const auto v = parse_i64(text);
  if (!v || *v < -9999 || *v > 9999) return std::nullopt;
  return static_cast<int>(*v);
}

}  // namespace

// ---------------------------------------------------------------------------

AliasMap read_alias_map(const std::filesystem::path& path) {
  const std::string content = slurp(path);
  AliasMap aliases;
  for (const auto& line : body_after_header(path, content, {"alias,canonical"})) {
    const auto f = split(line.text);
    if (f.size() != 2 || !valid_id(f[0]) || !valid_id(f[1])) {
      throw ParseError(path.string() + ":" + std::to_string(line.number) + ": malformed alias row", line.number);
    }
    if (!aliases.emplace(f[0], f[1]).second) {
      throw ParseError(path.string() + ":" + std::to_string(line.number) + ": alias " + f[0] + " defined twice",
                       line.number);
    }
  }
  return aliases;
}

std::string resolve_alias(const AliasMap& aliases, const std::string& id) {
  std::string current = id;
  for (std::size_t hops = 0; hops <= aliases.size(); ++hops) {
    const auto it = aliases.find(current);
    if (it == aliases.end()) return current;
    current = it->second;
  }
  throw DataError("alias cycle involving " + id);
}

EventsRead read_events(const std::filesystem::path& path, Strictness strictness, const AliasMap* aliases) {
  const std::string content = slurp(path);
  EventsRead out;
  RowGate gate(path, strictness, out.report);
  std::set<std::tuple<Date, std::string, std::string>> seen;
  for (const auto& line : body_after_header(path, content, {"date,acquirer_id,target_id"})) {
    ++out.report.rows_read;
    const auto f = split(line.text);
    if (f.size() != 3) {
      gate.reject(line.number, "expected 3 fields, found " + std::to_string(f.size()));
      continue;
    }
    const auto date = Date::parse(f[0]);
    if (!date) {
      gate.reject(line.number, "bad date '" + f[0] + "'");
      continue;
    }
    if (!valid_id(f[1]) || !valid_id(f[2])) {
      gate.reject(line.number, "empty or invalid entity id");
      continue;
    }
    std::string acquirer = aliases ? resolve_alias(*aliases, f[1]) : f[1];
    std::string target = aliases ? resolve_alias(*aliases, f[2]) : f[2];
    if (acquirer == target) {
      gate.reject(line.number, "acquirer equals target (" + acquirer + ")");
      continue;
    }
    if (!seen.emplace(*date, acquirer, target).second) {
      gate.reject(line.number, "duplicate event " + f[0] + "," + acquirer + "," + target);
      continue;
    }
    out.events.push_back({*date, std::move(acquirer), std::move(target)});
    ++out.report.rows_accepted;
  }
  return out;
}

PanelRead read_panel(const std::filesystem::path& path, Strictness strictness) {
  const std::string content = slurp(path);
  PanelRead out;
  RowGate gate(path, strictness, out.report);
  std::map<std::pair<std::string, int>, std::size_t> first_line;
  for (const auto& line : body_after_header(path, content, {"entity_id,year,balance"})) {
    ++out.report.rows_read;
    const auto f = split(line.text);
    if (f.size() != 3) {
      gate.reject(line.number, "expected 3 fields, found " + std::to_string(f.size()));
      continue;
    }
    const auto year = parse_year(f[1]);
    const auto balance = parse_double(f[2]);
    if (!valid_id(f[0])) {
      gate.reject(line.number, "empty or invalid entity id");
      continue;
    }
    if (!year) {
      gate.reject(line.number, "bad year '" + f[1] + "'");
      continue;
    }
    if (!balance || !(*balance > 0.0) || !std::isfinite(*balance)) {
      gate.reject(line.number, "balance must be a positive number, found '" + f[2] + "'");
      continue;
    }
    const auto [it, inserted] = first_line.emplace(std::pair{f[0], *year}, line.number);
    if (!inserted) {
      gate.reject(line.number, "duplicate (" + f[0] + ", " + f[1] + ") on lines " + std::to_string(it->second) +
                                   " and " + std::to_string(line.number));
      continue;
    }
    out.panel.add(f[0], *year, *balance);
    ++out.report.rows_accepted;
  }
  return out;
}

GdpRead read_gdp(const std::filesystem::path& path, Strictness strictness) {
  const std::string content = slurp(path);
  GdpRead out;
  RowGate gate(path, strictness, out.report);
  std::map<int, std::size_t> first_line;
  for (const auto& line : body_after_header(path, content, {"year,gdp"})) {
    ++out.report.rows_read;
    const auto f = split(line.text);
    if (f.size() != 2) {
      gate.reject(line.number, "expected 2 fields, found " + std::to_string(f.size()));
      continue;
    }
    const auto year = parse_year(f[0]);
    const auto level = parse_double(f[1]);
    if (!year) {
      gate.reject(line.number, "bad year '" + f[0] + "'");
      continue;
    }
    if (!level || !(*level > 0.0) || !std::isfinite(*level)) {
      gate.reject(line.number, "GDP level must be a positive number, found '" + f[1] + "'");
      continue;
    }
    const auto [it, inserted] = first_line.emplace(*year, line.number);
    if (!inserted) {
      gate.reject(line.number, "duplicate year " + f[0] + " on lines " + std::to_string(it->second) + " and " +
                                   std::to_string(line.number));
      continue;
    }
    out.gdp.add(*year, *level);
    ++out.report.rows_accepted;
  }
  return out;
}

std::vector<std::pair<std::string, std::uint64_t>> read_counts(const std::filesystem::path& path) {
  const std::string content = slurp(path);
  std::vector<std::pair<std::string, std::uint64_t>> out;
  std::set<std::string> seen;
  for (const auto& line : body_after_header(path, content, {"entity_id,ancestry", "entity_id,ancestor_count"})) {
    const auto f = split(line.text);
    const auto value = f.size() == 2 ? parse_u64(f[1]) : std::nullopt;
    if (!value || !valid_id(f[0])) {
      throw ParseError(path.string() + ":" + std::to_string(line.number) + ": malformed count row", line.number);
    }
    if (!seen.insert(f[0]).second) {
      throw ParseError(path.string() + ":" + std::to_string(line.number) + ": duplicate entity " + f[0],
                       line.number);
    }
    out.emplace_back(f[0], *value);
  }
  return out;
}

// ---------------------------------------------------------------------------

void Metadata::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of("= \t\n\r") != std::string::npos) {
    throw std::invalid_argument("invalid metadata key '" + key + "'");
  }
  if (value.find_first_of("\n\r") != std::string::npos) {
    throw std::invalid_argument("metadata value for '" + key + "' spans lines");
  }
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::optional<std::string> Metadata::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::vector<std::string>& schema_columns(const std::string& kind) {
  static const std::map<std::string, std::vector<std::string>> schemas = {
      {"population", {"entity_id", "ancestry"}},
      {"history", {"cycle", "mergers", "live_after"}},
      {"mergers", {"cycle", "source", "partner", "partner_ancestry"}},
      {"zipf", {"rank", "ancestry"}},
      {"zipf_fit", {"rank_first", "rank_last", "points", "slope", "intercept", "standard_error"}},
      {"distribution", {"bin_index", "bin_lower", "bin_upper", "frequency"}},
      {"rank_envelope", {"rank", "min", "band_low", "band_high", "max"}},
      {"distribution_envelope", {"bin_index", "bin_lower", "bin_upper", "min", "max"}},
      {"runs", {"run", "seed", "termination", "cycles_run", "max_ancestry"}},
      {"overlay", {"key", "value", "min", "max", "inside"}},
      {"ancestry", {"entity_id", "ancestor_count"}},
      {"ancestry_series", {"as_of", "entity_id", "ancestor_count"}},
      {"rank_compare", {"method", "group", "rank_first", "rank_last", "mean_mergers"}},
      {"rank_compare_by_year", {"method", "base_year", "group", "mergers"}},
      {"growth", {"entity_id", "acquisition_count", "end_balance", "baseline", "baseline_members", "growth_index"}},
      {"market_share", {"year", "percentile", "share", "cumulative_change"}},
  };
  const auto it = schemas.find(kind);
  if (it == schemas.end()) throw std::invalid_argument("unknown result kind '" + kind + "'");
  return it->second;
}

std::vector<std::string> schema_kinds() {
  return {"population", "history", "mergers", "zipf", "zipf_fit", "distribution", "rank_envelope",
          "distribution_envelope", "runs", "overlay", "ancestry", "ancestry_series", "rank_compare",
          "rank_compare_by_year", "growth", "market_share"};
}

std::string format_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\r\n") != std::string::npos) {
            throw std::invalid_argument("cell text cannot contain separators: '" + v + "'");
          }
          return v;
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

std::string render_result(const ResultTable& table, const Metadata& metadata) {
  if (schema_columns(table.kind) != table.columns) {
    throw std::invalid_argument("columns do not match the '" + table.kind + "' schema");
  }
  std::string out;
  out += "# mna-result\n";
  out += "# schema_version=" + std::to_string(kSchemaVersion) + "\n";
  out += "# kind=" + table.kind + "\n";
  out += "# tool=mna " + std::string(kToolVersion) + "\n";
  for (const auto& [k, v] : metadata.entries()) out += "# " + k + "=" + v + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::invalid_argument("row width does not match columns");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_result(const std::filesystem::path& path, const ResultTable& table, const Metadata& metadata) {
  const std::string content = render_result(table, metadata);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot write " + path.string());
  }
}

ResultFile parse_result(std::string_view content) {
  ResultFile file;
  std::size_t number = 0;
  bool magic = false;
  bool header = false;
  while (!content.empty()) {
    ++number;
    const auto eol = content.find('\n');
    std::string_view line = content.substr(0, eol);
    content.remove_prefix(eol == std::string_view::npos ? content.size() : eol + 1);
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (!header && line.starts_with("# ")) {
      const auto body = line.substr(2);
      if (!magic) {
        if (body != "mna-result") throw ParseError("not an mna result file", number);
        magic = true;
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError("malformed metadata line", number);
      const std::string key(body.substr(0, eq));
      const std::string value(body.substr(eq + 1));
      if (key == "schema_version") {
        const auto v = parse_i64(value);
        if (!v) throw ParseError("bad schema_version", number);
        file.schema_version = static_cast<int>(*v);
      } else if (key == "kind") {
        file.kind = value;
      } else if (key == "tool") {
        file.tool = value;
      } else {
        file.metadata.set(key, value);
      }
      continue;
    }
    if (!magic) throw ParseError("not an mna result file", number);
    if (line.empty()) continue;
    if (!header) {
      file.columns = split(line);
      header = true;
      continue;
    }
    auto row = split(line);
    if (row.size() != file.columns.size()) throw ParseError("row width does not match header", number);
    file.rows.push_back(std::move(row));
  }
  if (!header) throw ParseError("result file has no column header", number);
  if (file.schema_version != kSchemaVersion) {
    throw ParseError("unsupported schema_version " + std::to_string(file.schema_version), 0);
  }
  if (schema_columns(file.kind) != file.columns) throw ParseError("columns do not match kind " + file.kind, 0);
  return file;
}

ResultFile read_result(const std::filesystem::path& path) { return parse_result(slurp(path)); }

// ---------------------------------------------------------------------------

namespace {

std::uint64_t u64_at(const ResultFile& file, std::size_t row, std::size_t col) {
  const auto v = parse_u64(file.rows[row][col]);
  if (!v) throw ParseError("expected an unsigned integer in column " + file.columns[col], 0);
  return *v;
}

std::int64_t i64_at(const ResultFile& file, std::size_t row, std::size_t col) {
  const auto v = parse_i64(file.rows[row][col]);
  if (!v) throw ParseError("expected an integer in column " + file.columns[col], 0);
  return *v;
}

void require_kind(const ResultFile& file, std::string_view kind) {
  if (file.kind != kind) throw ParseError("expected a '" + std::string(kind) + "' result, found " + file.kind, 0);
}

}  // namespace

ResultTable zipf_table(std::span<const analysis::ZipfPoint> series) {
  ResultTable t{"zipf", schema_columns("zipf"), {}};
  for (const auto& p : series) t.rows.push_back({p.rank, p.value});
  return t;
}

std::vector<analysis::ZipfPoint> zipf_from_result(const ResultFile& file) {
  require_kind(file, "zipf");
  std::vector<analysis::ZipfPoint> out;
  for (std::size_t r = 0; r < file.rows.size(); ++r) out.push_back({u64_at(file, r, 0), u64_at(file, r, 1)});
  return out;
}

ResultTable distribution_table(const analysis::Histogram& histogram, Metadata& metadata) {
  metadata.set("binning", histogram.binning.to_string());
  metadata.set("zero_count", std::to_string(histogram.zero_count));
  metadata.set("total", std::to_string(histogram.total));
  ResultTable t{"distribution", schema_columns("distribution"), {}};
  for (const auto& b : histogram.bins) t.rows.push_back({b.index, b.lower, b.upper, b.frequency});
  return t;
}

analysis::Histogram distribution_from_result(const ResultFile& file) {
  require_kind(file, "distribution");
  analysis::Histogram h;
  const auto binning = file.metadata.get("binning");
  const auto zeros = file.metadata.get("zero_count");
  const auto total = file.metadata.get("total");
  if (!binning || !zeros || !total) throw ParseError("distribution metadata incomplete", 0);
  h.binning = analysis::Binning::parse(*binning);
  h.zero_count = parse_u64(*zeros).value_or(0);
  h.total = parse_u64(*total).value_or(0);
  for (std::size_t r = 0; r < file.rows.size(); ++r) {
    const std::int64_t index = i64_at(file, r, 0);
    h.bins.push_back({index, h.binning.lower_edge(index), h.binning.upper_edge(index), u64_at(file, r, 3)});
  }
  return h;
}

ResultTable counts_table(const std::string& kind, const std::vector<std::pair<std::string, std::uint64_t>>& counts) {
  ResultTable t{kind, schema_columns(kind), {}};
  if (t.columns.size() != 2 || t.columns[0] != "entity_id") {
    throw std::invalid_argument("'" + kind + "' is not an entity count schema");
  }
  for (const auto& [id, count] : counts) t.rows.push_back({id, count});
  return t;
}

}  // namespace mna::io
