#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mna/date.hpp"
#include "mna/errors.hpp"

namespace mna::genealogy {

using EntityId = std::string;

struct MergerEvent {
  Date date;
  EntityId acquirer_id;
  EntityId target_id;

  friend auto operator<=>(const MergerEvent&, const MergerEvent&) = default;
};

struct Absorption {
  EntityId acquirer;
  Date date;
};

struct Acquisition {
  Date date;
  EntityId target;
};

/**
 * Acquisition forest built from dated merger events.
 *
 * Events are ordered by (date, acquirer, target). Validation rejects a target
 * absorbed twice, an entity acquiring on a date strictly after its own
 * absorption, and absorption cycles (possible only among same-day events).
 * Immutable after construction.
 */
class GenealogyForest {
 public:
  GenealogyForest() = default;

  /// Throws ValidationError.
  static GenealogyForest build(std::vector<MergerEvent> events);

  /// All entity ids, ascending.
  const std::vector<EntityId>& nodes() const noexcept { return ids_; }
  /// Events in processing order.
  const std::vector<MergerEvent>& events() const noexcept { return events_; }

  bool contains(const EntityId& id) const { return index_.contains(id); }
  std::optional<Absorption> absorption(const EntityId& id) const;
  /// Direct acquisitions of `id`, in processing order.
  std::vector<Acquisition> children(const EntityId& id) const;

  /// Not absorbed on or before `as_of`.
  bool is_live(const EntityId& id, Date as_of) const;

  std::optional<Date> earliest_date() const;
  std::optional<Date> latest_date() const;

  // Index-level access used by the query functions.
  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t index_of(const EntityId& id) const;
  const EntityId& id_at(std::size_t node) const { return ids_[node]; }
  std::optional<Date> absorbed_on(std::size_t node) const { return absorbed_on_[node]; }
  std::optional<std::size_t> absorbed_by(std::size_t node) const { return absorbed_by_[node]; }
  /// (date, child node) edges in processing order.
  const std::vector<std::pair<Date, std::size_t>>& child_edges(std::size_t node) const { return children_[node]; }

 private:
  std::vector<EntityId> ids_;
  std::map<EntityId, std::size_t> index_;
  std::vector<MergerEvent> events_;
  std::vector<std::optional<Date>> absorbed_on_;
  std::vector<std::optional<std::size_t>> absorbed_by_;
  std::vector<std::vector<std::pair<Date, std::size_t>>> children_;
};

inline GenealogyForest build_forest(std::vector<MergerEvent> events) {
  return GenealogyForest::build(std::move(events));
}

/// Number of entities in `entity`'s absorbed subtree, following only edges
/// dated on or before `as_of`. The entity itself is not counted.
/// Throws std::out_of_range for an unknown id.
std::uint64_t ancestry_count(const GenealogyForest& forest, const EntityId& entity, Date as_of);

using AncestryTable = std::map<EntityId, std::uint64_t>;

/// Ancestor counts for every entity live at `as_of`.
AncestryTable ancestry_table(const GenealogyForest& forest, Date as_of);

struct AncestrySnapshot {
  Date as_of;
  AncestryTable table;
};

/// One ancestry_table per date. Dates must be strictly increasing.
std::vector<AncestrySnapshot> accumulated_ancestry_series(const GenealogyForest& forest, std::span<const Date> dates);

}  // namespace mna::genealogy
