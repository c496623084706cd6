#include "mna/histogram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mna/format.hpp"

namespace mna::analysis {

Binning Binning::linear(double width) {
  if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("linear bin width must be > 0");
  return {Kind::linear, width};
}

Binning Binning::logarithmic(double base) {
  if (!(base > 1.0) || !std::isfinite(base)) throw std::invalid_argument("log bin base must be > 1");
  return {Kind::logarithmic, base};
}

Binning Binning::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("binning must be linear:<w> or log:<b>");
  const auto kind = text.substr(0, colon);
  const auto value = parse_double(text.substr(colon + 1));
  if (!value) throw std::invalid_argument("bad binning parameter: " + std::string(text));
  if (kind == "linear") return linear(*value);
  if (kind == "log") return logarithmic(*value);
  throw std::invalid_argument("unknown binning kind: " + std::string(kind));
}

std::string Binning::to_string() const {
  return (kind == Kind::linear ? "linear:" : "log:") + format_double(parameter);
}

std::int64_t Binning::bin_index(std::uint64_t value) const {
  const auto v = static_cast<double>(value);
  if (kind == Kind::linear) return static_cast<std::int64_t>(std::floor(v / parameter));
  if (value == 0) throw std::invalid_argument("zero has no logarithmic bin");
  auto k = static_cast<std::int64_t>(std::floor(std::log(v) / std::log(parameter)));
  // log() rounding can land one bin off near the edges
  while (k > 0 && lower_edge(k) > v) --k;
  while (upper_edge(k) <= v) ++k;
  return k;
}

double Binning::lower_edge(std::int64_t index) const {
  if (kind == Kind::linear) return static_cast<double>(index) * parameter;
  return std::pow(parameter, static_cast<double>(index));
}

double Binning::upper_edge(std::int64_t index) const { return lower_edge(index + 1); }

Histogram ancestry_distribution(std::span<const std::uint64_t> counts, Binning binning) {
  if (counts.empty()) throw std::invalid_argument("ancestry_distribution: empty input");
  Histogram h;
  h.binning = binning;
  h.total = counts.size();
  std::vector<std::int64_t> indices;
  indices.reserve(counts.size());
  for (auto c : counts) {
    if (c == 0) {
      ++h.zero_count;
    } else {
      indices.push_back(binning.bin_index(c));
    }
  }
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size();) {
    std::size_t j = i;
    while (j < indices.size() && indices[j] == indices[i]) ++j;
    h.bins.push_back({indices[i], binning.lower_edge(indices[i]), binning.upper_edge(indices[i]),
                      static_cast<std::uint64_t>(j - i)});
    i = j;
  }
  return h;
}

std::vector<ZipfPoint> zipf_series(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("zipf_series: empty input");
  std::vector<std::uint64_t> values;
  values.reserve(counts.size());
  for (auto c : counts) {
    if (c > 0) values.push_back(c);
  }
  std::stable_sort(values.begin(), values.end(), std::greater<>{});
  std::vector<ZipfPoint> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back({i + 1, values[i]});
  return out;
}

std::vector<ZipfPoint> zipf_series(std::vector<std::pair<std::string, std::uint64_t>> counts) {
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::uint64_t> values(counts.size());
  std::transform(counts.begin(), counts.end(), values.begin(), [](const auto& p) { return p.second; });
  return zipf_series(values);
}

}  // namespace mna::analysis
