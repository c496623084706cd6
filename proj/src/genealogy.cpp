#include "mna/genealogy.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace mna::genealogy {

GenealogyForest GenealogyForest::build(std::vector<MergerEvent> events) {
  std::sort(events.begin(), events.end());

  GenealogyForest forest;
  std::set<EntityId> ids;
  for (const auto& ev : events) {
    if (ev.acquirer_id == ev.target_id) {
      throw ValidationError("entity " + ev.acquirer_id + " acquires itself on " + ev.date.to_string());
    }
    ids.insert(ev.acquirer_id);
    ids.insert(ev.target_id);
  }
  forest.ids_.assign(ids.begin(), ids.end());
  for (std::size_t i = 0; i < forest.ids_.size(); ++i) forest.index_.emplace(forest.ids_[i], i);
  const std::size_t n = forest.ids_.size();
  forest.absorbed_on_.resize(n);
  forest.absorbed_by_.resize(n);
  forest.children_.resize(n);

  for (const auto& ev : events) {
    const std::size_t acquirer = forest.index_.at(ev.acquirer_id);
    const std::size_t target = forest.index_.at(ev.target_id);
    if (const auto& prior = forest.absorbed_on_[target]) {
      throw ValidationError("entity " + ev.target_id + " absorbed twice: by " +
                            forest.ids_[*forest.absorbed_by_[target]] + " on " + prior->to_string() + " and by " +
                            ev.acquirer_id + " on " + ev.date.to_string());
    }
    if (const auto& gone = forest.absorbed_on_[acquirer]; gone && *gone < ev.date) {
      throw ValidationError("entity " + ev.acquirer_id + " acquires " + ev.target_id + " on " +
                            ev.date.to_string() + " after its own absorption on " + gone->to_string());
    }
    forest.absorbed_on_[target] = ev.date;
    forest.absorbed_by_[target] = acquirer;
    forest.children_[acquirer].emplace_back(ev.date, target);
  }

  // Each node has at most one parent, so a cycle shows up as a parent chain
  // that returns to a node visited on the same walk.
  enum : unsigned char { unseen, on_path, done };
  std::vector<unsigned char> state(n, unseen);
  std::vector<std::size_t> path;
  for (std::size_t start = 0; start < n; ++start) {
    path.clear();
    std::optional<std::size_t> node = start;
    while (node && state[*node] == unseen) {
      state[*node] = on_path;
      path.push_back(*node);
      node = forest.absorbed_by_[*node];
    }
    if (node && state[*node] == on_path) {
      throw ValidationError("absorption cycle through entity " + forest.ids_[*node]);
    }
    for (auto p : path) state[p] = done;
  }

  forest.events_ = std::move(events);
  return forest;
}

std::size_t GenealogyForest::index_of(const EntityId& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown entity: " + id);
  return it->second;
}

std::optional<Absorption> GenealogyForest::absorption(const EntityId& id) const {
  const std::size_t node = index_of(id);
  if (!absorbed_on_[node]) return std::nullopt;
  return Absorption{ids_[*absorbed_by_[node]], *absorbed_on_[node]};
}

std::vector<Acquisition> GenealogyForest::children(const EntityId& id) const {
  std::vector<Acquisition> out;
  for (const auto& [date, child] : children_[index_of(id)]) out.push_back({date, ids_[child]});
  return out;
}

bool GenealogyForest::is_live(const EntityId& id, Date as_of) const {
  const auto& absorbed = absorbed_on_[index_of(id)];
  return !absorbed || *absorbed > as_of;
}

std::optional<Date> GenealogyForest::earliest_date() const {
  if (events_.empty()) return std::nullopt;
  return events_.front().date;
}

std::optional<Date> GenealogyForest::latest_date() const {
  if (events_.empty()) return std::nullopt;
  return events_.back().date;
}

namespace {

std::uint64_t subtree_size(const GenealogyForest& forest, std::size_t root, Date as_of,
                           std::vector<std::size_t>& stack) {
  std::uint64_t count = 0;
  stack.clear();
  stack.push_back(root);
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    for (const auto& [date, child] : forest.child_edges(node)) {
      if (date > as_of) continue;
      ++count;
      stack.push_back(child);
    }
  }
  return count;
}

}  // namespace

std::uint64_t ancestry_count(const GenealogyForest& forest, const EntityId& entity, Date as_of) {
  std::vector<std::size_t> stack;
  return subtree_size(forest, forest.index_of(entity), as_of, stack);
}

AncestryTable ancestry_table(const GenealogyForest& forest, Date as_of) {
  AncestryTable table;
  std::vector<std::size_t> stack;
  for (std::size_t node = 0; node < forest.size(); ++node) {
    const auto absorbed = forest.absorbed_on(node);
    if (absorbed && *absorbed <= as_of) continue;
    table.emplace_hint(table.end(), forest.id_at(node), subtree_size(forest, node, as_of, stack));
  }
  return table;
}

std::vector<AncestrySnapshot> accumulated_ancestry_series(const GenealogyForest& forest,
                                                          std::span<const Date> dates) {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) throw std::invalid_argument("snapshot dates must be strictly increasing");
  }
  std::vector<AncestrySnapshot> out;
  out.reserve(dates.size());
  for (const Date d : dates) out.push_back({d, ancestry_table(forest, d)});
  return out;
}

}  // namespace mna::genealogy
