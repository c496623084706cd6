#include "mna/model.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

namespace mna::model {

void ModelParams::validate() const {
  if (!(base_probability > 0.0 && base_probability <= 1.0)) {
    throw std::invalid_argument("base_probability must lie in (0, 1]");
  }
  if (!(ancestry_exponent >= 0.0) || !std::isfinite(ancestry_exponent)) {
    throw std::invalid_argument("ancestry_exponent must be finite and >= 0");
  }
  if (target_count == 0) throw std::invalid_argument("target_count must be > 0");
  if (target_count >= initial_count) throw std::invalid_argument("target_count must be < initial_count");
  if (initial_count > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("initial_count exceeds the agent id range");
  }
  if (max_cycles == 0) throw std::invalid_argument("max_cycles must be > 0");
}

double merger_probability(std::uint64_t ancestry, const ModelParams& params) {
  if (!params.ancestry_weighting) return params.base_probability;
  const double weight = std::pow(1.0 + static_cast<double>(ancestry), params.ancestry_exponent);
  return std::min(1.0, params.base_probability * weight);
}

// ---------------------------------------------------------------------------

Population::Population(std::size_t count) : live_(count), slot_(count) {
  for (std::size_t i = 0; i < count; ++i) {
    live_[i].id = AgentId{static_cast<std::uint32_t>(i)};
    slot_[i] = i;
  }
}

Population Population::from_ancestries(std::span<const std::uint64_t> ancestries) {
  Population pop(ancestries.size());
  for (std::size_t i = 0; i < ancestries.size(); ++i) pop.live_[i].ancestry = ancestries[i];
  pop.absorbed_ = std::accumulate(ancestries.begin(), ancestries.end(), std::uint64_t{0});
  return pop;
}

bool Population::is_live(AgentId id) const { return id.value < slot_.size() && slot_[id.value] != kAbsent; }

std::size_t Population::index_of(AgentId id) const {
  if (!is_live(id)) throw std::out_of_range("agent " + std::to_string(id.value) + " is not live");
  return slot_[id.value];
}

std::uint64_t Population::total_ancestry() const {
  std::uint64_t sum = 0;
  for (const auto& a : live_) sum += a.ancestry;
  return sum;
}

void Population::absorb(AgentId source, AgentId partner) {
  if (source == partner) throw std::invalid_argument("an agent cannot absorb itself");
  const std::size_t src = index_of(source);
  const std::size_t dst = index_of(partner);
  live_[src].ancestry += live_[dst].ancestry + 1;

  const std::size_t last = live_.size() - 1;
  if (dst != last) {
    live_[dst] = live_[last];
    slot_[live_[dst].id.value] = dst;
  }
  live_.pop_back();
  slot_[partner.value] = kAbsent;
  ++absorbed_;
}

std::vector<std::uint64_t> Population::ancestries_by_id() const {
  std::vector<std::uint64_t> out;
  out.reserve(live_.size());
  for (std::size_t id = 0; id < slot_.size(); ++id) {
    if (slot_[id] != kAbsent) out.push_back(live_[slot_[id]].ancestry);
  }
  return out;
}

bool operator==(const Population& a, const Population& b) {
  return a.absorbed_ == b.absorbed_ && a.live_ == b.live_ && a.slot_ == b.slot_;
}

// ---------------------------------------------------------------------------

std::vector<AgentId> select_sources(const Population& population, const ModelParams& params, Rng& rng) {
  std::vector<AgentId> selected;
  for (const auto& agent : population.live_agents()) {
    if (rng.bernoulli(merger_probability(agent.ancestry, params))) selected.push_back(agent.id);
  }
  rng.shuffle(std::span(selected));
  return selected;
}

CycleStats execute_mergers(Population& population, std::span<const AgentId> ordered_sources, Rng& rng,
                           std::uint64_t cycle_index, std::vector<MergerRecord>* log) {
  CycleStats stats{cycle_index, 0, 0};
  for (const AgentId source : ordered_sources) {
    if (!population.is_live(source)) continue;
    const std::size_t n = population.live_count();
    if (n < 2) break;
    const std::size_t self = population.index_of(source);
    auto pick = static_cast<std::size_t>(rng.below(n - 1));
    if (pick >= self) ++pick;
    const Agent partner = population.live_at(pick);
    if (log) log->push_back({cycle_index, source, partner.id, partner.ancestry});
    population.absorb(source, partner.id);
    ++stats.mergers_executed;
  }
  stats.live_count_after = population.live_count();
  return stats;
}

CycleStats execute_cycle(Population& population, const ModelParams& params, Rng& rng, std::uint64_t cycle_index,
                         std::vector<MergerRecord>* log) {
  const auto sources = select_sources(population, params, rng);
  return execute_mergers(population, sources, rng, cycle_index, log);
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

struct Scheduled {
  std::uint64_t cycle;
  AgentId id;
  friend bool operator>(const Scheduled& a, const Scheduled& b) {
    return a.cycle != b.cycle ? a.cycle > b.cycle : a.id > b.id;
  }
};

}  // namespace

SimulationResult run_simulation(const ModelParams& params, std::uint64_t seed, SimulationOptions options) {
  params.validate();
  Rng rng(seed);
  SimulationResult result;
  result.seed = seed;
  result.final_population = Population(params.initial_count);
  Population& pop = result.final_population;
  std::vector<MergerRecord>* log = options.record_mergers ? &result.mergers : nullptr;

  // Every live agent owns exactly one queue entry; entries of absorbed agents
  // go stale and are discarded when they surface.
  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue;
  for (std::uint32_t i = 0; i < params.initial_count; ++i) {
    queue.push({rng.geometric_failures(merger_probability(0, params)), AgentId{i}});
  }

  std::vector<AgentId> sources;
  while (pop.live_count() > params.target_count) {
    while (!pop.is_live(queue.top().id)) queue.pop();
    const std::uint64_t cycle = queue.top().cycle;
    if (cycle >= params.max_cycles) {
      result.cycles_run = params.max_cycles;
      result.termination = Termination::max_cycles;
      return result;
    }

    sources.clear();
    while (!queue.empty() && queue.top().cycle == cycle) {
      if (pop.is_live(queue.top().id)) sources.push_back(queue.top().id);
      queue.pop();
    }
    rng.shuffle(std::span(sources));
    const CycleStats stats = execute_mergers(pop, sources, rng, cycle, log);
    if (options.record_history) result.history.push_back(stats);

    for (const AgentId id : sources) {
      if (!pop.is_live(id)) continue;
      const double p = merger_probability(pop.ancestry(id), params);
      queue.push({saturating_add(cycle + 1, rng.geometric_failures(p)), id});
    }
    result.cycles_run = cycle + 1;
  }
  result.termination = Termination::reached_target;
  return result;
}

SimulationResult run_simulation_stepwise(const ModelParams& params, std::uint64_t seed, SimulationOptions options) {
  params.validate();
  Rng rng(seed);
  SimulationResult result;
  result.seed = seed;
  result.final_population = Population(params.initial_count);
  Population& pop = result.final_population;
  std::vector<MergerRecord>* log = options.record_mergers ? &result.mergers : nullptr;

  std::uint64_t cycle = 0;
  for (; cycle < params.max_cycles && pop.live_count() > params.target_count; ++cycle) {
    const auto sources = select_sources(pop, params, rng);
    const CycleStats stats = execute_mergers(pop, sources, rng, cycle, log);
    if (options.record_history && !sources.empty()) result.history.push_back(stats);
  }
  result.cycles_run = cycle;
  result.termination =
      pop.live_count() > params.target_count ? Termination::max_cycles : Termination::reached_target;
  return result;
}

}  // namespace mna::model
