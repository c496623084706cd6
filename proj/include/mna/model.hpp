#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mna/rng.hpp"

namespace mna::model {

inline constexpr double kDefaultBaseProbability = 1.0 / 40000.0;
inline constexpr double kDefaultAncestryExponent = 1.5;
inline constexpr std::uint64_t kDefaultMaxCycles = 10'000'000;

/// Knobs of the merger dynamics. Merger probability per agent and cycle is
/// min(1, base_probability * (1 + ancestry)^ancestry_exponent), or the
/// constant base_probability when ancestry_weighting is off.
struct ModelParams {
  double base_probability = kDefaultBaseProbability;
  double ancestry_exponent = kDefaultAncestryExponent;
  bool ancestry_weighting = true;
  std::uint64_t initial_count = 0;
  std::uint64_t target_count = 0;
  std::uint64_t max_cycles = kDefaultMaxCycles;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

double merger_probability(std::uint64_t ancestry, const ModelParams& params);

struct AgentId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(AgentId, AgentId) = default;
};

struct Agent {
  AgentId id;
  std::uint64_t ancestry = 0;
  friend bool operator==(const Agent&, const Agent&) = default;
};

/**
 * Live agents plus bookkeeping for absorbed ones.
 *
 * Agents are stored densely so that a uniformly random live agent is one
 * index draw away; removal swaps the last agent into the hole. The dense
 * order is therefore a deterministic function of the merger history.
 *
 * Invariants: live_count() + absorbed_count() == initial_count(), and the
 * ancestry of all live agents sums to absorbed_count().
 */
class Population {
 public:
  /// `count` fresh agents with ids 0..count-1 and no ancestors.
  explicit Population(std::size_t count);

  /// Agents with the given ancestries, ids 0..n-1. The absorbed count is
  /// taken as the ancestry sum so the accounting invariant holds.
  static Population from_ancestries(std::span<const std::uint64_t> ancestries);

  std::size_t live_count() const noexcept { return live_.size(); }
  std::uint64_t absorbed_count() const noexcept { return absorbed_; }
  std::uint64_t initial_count() const noexcept { return live_.size() + absorbed_; }

  std::span<const Agent> live_agents() const noexcept { return live_; }
  const Agent& live_at(std::size_t index) const { return live_[index]; }

  bool is_live(AgentId id) const;
  std::size_t index_of(AgentId id) const;  // precondition: is_live(id)
  std::uint64_t ancestry(AgentId id) const { return live_[index_of(id)].ancestry; }
  std::uint64_t total_ancestry() const;

  /// `partner` leaves the population; `source` gains partner.ancestry + 1.
  void absorb(AgentId source, AgentId partner);

  /// Live ancestries ordered by agent id.
  std::vector<std::uint64_t> ancestries_by_id() const;

  friend bool operator==(const Population& a, const Population& b);

 private:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

  std::vector<Agent> live_;
  std::vector<std::size_t> slot_;  // id -> index in live_, kAbsent once absorbed
  std::uint64_t absorbed_ = 0;
};

struct CycleStats {
  std::uint64_t cycle_index = 0;
  std::uint64_t mergers_executed = 0;
  std::uint64_t live_count_after = 0;
  friend bool operator==(const CycleStats&, const CycleStats&) = default;
};

/// One executed merger, for audit trails.
struct MergerRecord {
  std::uint64_t cycle_index = 0;
  AgentId source;
  AgentId partner;
  std::uint64_t partner_ancestry = 0;
  friend bool operator==(const MergerRecord&, const MergerRecord&) = default;
};

enum class Termination { reached_target, max_cycles };

struct SimulationOptions {
  bool record_history = false;  // CycleStats for every cycle that selected a source
  bool record_mergers = false;  // one MergerRecord per merger
};

struct SimulationResult {
  Population final_population{0};
  std::uint64_t cycles_run = 0;
  std::uint64_t seed = 0;
  Termination termination = Termination::reached_target;
  std::vector<CycleStats> history;
  std::vector<MergerRecord> mergers;

  friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

/// Each live agent is included independently with its merger probability;
/// the selection is returned in uniformly random order.
std::vector<AgentId> select_sources(const Population& population, const ModelParams& params, Rng& rng);

/// Carries out the mergers of already-selected sources, in the given order.
/// A source absorbed earlier in the cycle forfeits its turn; each remaining
/// source absorbs a uniformly chosen live agent other than itself.
CycleStats execute_mergers(Population& population, std::span<const AgentId> ordered_sources, Rng& rng,
                           std::uint64_t cycle_index = 0, std::vector<MergerRecord>* log = nullptr);

/// select_sources followed by execute_mergers.
CycleStats execute_cycle(Population& population, const ModelParams& params, Rng& rng,
                         std::uint64_t cycle_index = 0, std::vector<MergerRecord>* log = nullptr);

/**
 * Runs cycles from a fresh population until live count <= target_count or
 * max_cycles cycles have elapsed.
 *
 * Per-agent selection is a Bernoulli process whose rate only changes when
 * the agent itself merges, so instead of drawing N Bernoullis per cycle the
 * engine schedules each agent's next selection cycle with a geometric draw
 * and jumps straight to the next cycle that has a source. The law of the
 * process is the same as iterating execute_cycle.
 */
SimulationResult run_simulation(const ModelParams& params, std::uint64_t seed, SimulationOptions options = {});

/// Reference engine that literally iterates execute_cycle. O(N) per cycle;
/// meant for small populations and cross-checking run_simulation.
SimulationResult run_simulation_stepwise(const ModelParams& params, std::uint64_t seed,
                                         SimulationOptions options = {});

}  // namespace mna::model
