#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mna/analysis.hpp"
#include "mna/genealogy.hpp"
#include "mna/histogram.hpp"

namespace mna::io {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Input files. Plain comma-separated text, UTF-8, no quoting. A leading
// UTF-8 BOM, CRLF line ends and blank lines are tolerated, as are '#' lines
// before the header (so result files can be fed back in).

enum class Strictness { strict, lenient };

struct RowIssue {
  std::size_t line = 0;
  std::string reason;
};

struct DataQualityReport {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::vector<RowIssue> rejected;
};

/// alias -> canonical id. Header `alias,canonical`.
using AliasMap = std::map<std::string, std::string>;

AliasMap read_alias_map(const std::filesystem::path& path);

/// Follows alias chains to the canonical id (at most map-size hops).
std::string resolve_alias(const AliasMap& aliases, const std::string& id);

struct EventsRead {
  std::vector<genealogy::MergerEvent> events;
  DataQualityReport report;
};

/**
 * Header `date,acquirer_id,target_id`, ISO-8601 dates. Aliases are applied
 * before validation. Rows with a bad date, empty id, acquirer == target or a
 * repeated (date, acquirer, target) triple are rejected: strict mode throws
 * ParseError at the first one, lenient mode records it and moves on. A
 * missing file or wrong header always throws.
 */
EventsRead read_events(const std::filesystem::path& path, Strictness strictness = Strictness::strict,
                       const AliasMap* aliases = nullptr);

struct PanelRead {
  analysis::BalancePanel panel;
  DataQualityReport report;
};

/// Header `entity_id,year,balance`; balance strictly positive. A repeated
/// (entity, year) is reported with both line numbers.
PanelRead read_panel(const std::filesystem::path& path, Strictness strictness = Strictness::strict);

struct GdpRead {
  analysis::GdpSeries gdp;
  DataQualityReport report;
};

/// Header `year,gdp`; unique years, positive levels.
GdpRead read_gdp(const std::filesystem::path& path, Strictness strictness = Strictness::strict);

/// Header `entity_id,ancestry`, as written by the population and ancestry
/// exports (`ancestor_count` is accepted as the second column name too).
std::vector<std::pair<std::string, std::uint64_t>> read_counts(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Result files
//
//   # mna-result
//   # schema_version=1
//   # kind=<kind>
//   # tool=mna <version>
//   # <key>=<value>         (producer metadata, in insertion order)
//   <column>,<column>,...
//   <row>
//
// '\n' line ends, doubles at 12 significant digits via std::to_chars.

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

class Metadata {
 public:
  /// Appends, or overwrites in place if the key exists.
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  friend bool operator==(const Metadata&, const Metadata&) = default;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct ResultTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Column layout of every export kind. Throws std::invalid_argument for an
/// unknown kind.
const std::vector<std::string>& schema_columns(const std::string& kind);
std::vector<std::string> schema_kinds();

/// Serialized file content. Throws std::invalid_argument when the table does
/// not match its declared schema.
std::string render_result(const ResultTable& table, const Metadata& metadata);

/// Writes via a temporary file in the same directory and renames over
/// `path`. Throws std::runtime_error when the path is unwritable.
void write_result(const std::filesystem::path& path, const ResultTable& table, const Metadata& metadata);

struct ResultFile {
  std::string kind;
  int schema_version = 0;
  std::string tool;
  Metadata metadata;  // producer entries only
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

ResultFile parse_result(std::string_view content);
ResultFile read_result(const std::filesystem::path& path);

std::string format_cell(const Cell& cell);

// Typed adapters between analysis values and tables.
ResultTable zipf_table(std::span<const analysis::ZipfPoint> series);
std::vector<analysis::ZipfPoint> zipf_from_result(const ResultFile& file);

/// Also records binning, zero_count and total in `metadata`.
ResultTable distribution_table(const analysis::Histogram& histogram, Metadata& metadata);
analysis::Histogram distribution_from_result(const ResultFile& file);

ResultTable counts_table(const std::string& kind, const std::vector<std::pair<std::string, std::uint64_t>>& counts);

}  // namespace mna::io
