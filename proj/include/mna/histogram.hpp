#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mna::analysis {

/**
 * Bin layout for ancestry histograms.
 *
 * Linear bins of width w: bin k is [k*w, (k+1)*w).
 * Logarithmic bins of base b: bin k is [b^k, b^(k+1)), k >= 0.
 * Zero counts never enter a bin; they are tallied separately because they
 * have no place on a log axis.
 */
struct Binning {
  enum class Kind { linear, logarithmic };

  Kind kind = Kind::logarithmic;
  double parameter = 2.0;  // width for linear, base for logarithmic

  static Binning linear(double width = 1.0);
  static Binning logarithmic(double base = 2.0);

  /// "linear:<width>" or "log:<base>".
  static Binning parse(std::string_view text);
  std::string to_string() const;

  std::int64_t bin_index(std::uint64_t value) const;  // value >= 1 for log bins
  double lower_edge(std::int64_t index) const;
  double upper_edge(std::int64_t index) const;

  friend bool operator==(const Binning&, const Binning&) = default;
};

struct HistogramBin {
  std::int64_t index = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t frequency = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// Sparse histogram: only non-empty bins, ascending.
struct Histogram {
  Binning binning;
  std::uint64_t zero_count = 0;
  std::uint64_t total = 0;
  std::vector<HistogramBin> bins;
};

/// Throws std::invalid_argument on empty input.
Histogram ancestry_distribution(std::span<const std::uint64_t> counts, Binning binning);

struct ZipfPoint {
  std::uint64_t rank = 0;
  std::uint64_t value = 0;

  friend bool operator==(const ZipfPoint&, const ZipfPoint&) = default;
};

/// Rank/value pairs in descending value order, rank starting at 1. Ties keep
/// input order (the caller's id order). Zeros are dropped, so all-zero input
/// yields an empty series. Throws std::invalid_argument on empty input.
std::vector<ZipfPoint> zipf_series(std::span<const std::uint64_t> counts);

/// Same, for id-keyed counts; ties resolve by ascending id.
std::vector<ZipfPoint> zipf_series(std::vector<std::pair<std::string, std::uint64_t>> counts);

}  // namespace mna::analysis
