#ifndef DPDT_GREEDY_HPP
#define DPDT_GREEDY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpdt/dataset.hpp"
#include "dpdt/tree.hpp"

namespace dpdt {

enum class Impurity { gini, entropy };

inline std::string to_string(Impurity i) { return i == Impurity::gini ? "gini" : "entropy"; }

inline Impurity impurity_from_string(const std::string& s) {
  if (s == "gini") return Impurity::gini;
  if (s == "entropy") return Impurity::entropy;
  throw std::invalid_argument("unknown impurity '" + s + "' (expected gini or entropy)");
}

/// Impurity of a node from its per-class weight masses.
inline double impurity(Impurity kind, const std::vector<double>& masses, double total) {
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  if (kind == Impurity::gini) {
    for (double m : masses) {
      double q = m / total;
      acc += q * q;
    }
    return 1.0 - acc;
  }
  for (double m : masses) {
    if (m <= 0.0) continue;
    double q = m / total;
    acc -= q * std::log2(q);
  }
  return acc;
}

/// Lowest-index class with the largest mass.
inline ClassIndex majority_class(const std::vector<double>& masses) {
  ClassIndex best = 0;
  for (ClassIndex k = 1; k < masses.size(); ++k)
    if (masses[k] > masses[best]) best = k;
  return best;
}

struct ScoredSplit {
  Split split;
  double gain = 0.0;
};

/// Gains at or below this are treated as no improvement when growing trees.
inline constexpr double kMinPositiveGain = 1e-12;

/// Visits every valid split of `view` (observed-value thresholds, both
/// children holding at least `min_samples_leaf` rows), in (feature,
/// threshold) ascending order, with its impurity decrease
/// I(parent) - p_l I(left) - p_r I(right).
template <typename Visit>
void scan_splits(const SampleView& view, Impurity kind, std::size_t min_samples_leaf, Visit&& visit) {
  const Dataset& data = view.data();
  const std::size_t n = view.size();
  if (n < 2) return;
  min_samples_leaf = std::max<std::size_t>(min_samples_leaf, 1);
  const std::size_t k = data.class_count();
  const std::vector<double> parent = view.class_masses();
  const double total = view.mass();
  if (total <= 0.0) return;
  const double parent_impurity = impurity(kind, parent, total);

  std::vector<std::pair<double, RowIndex>> column(n);
  std::vector<double> left(k), right(k);
  for (FeatureIndex f = 0; f < data.feature_count(); ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      RowIndex r = view.indices()[i];
      column[i] = {data.value(r, f), r};
    }
    std::sort(column.begin(), column.end());
    std::fill(left.begin(), left.end(), 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      RowIndex r = column[i].second;
      left[data.label(r)] += view.weight(r);
      if (column[i].first == column[i + 1].first) continue;
      const std::size_t left_count = i + 1;
      if (left_count < min_samples_leaf || n - left_count < min_samples_leaf) continue;
      double left_total = 0.0, right_total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        right[c] = parent[c] - left[c];
        left_total += left[c];
        right_total += right[c];
      }
      double children = left_total * impurity(kind, left, left_total) + right_total * impurity(kind, right, right_total);
      double gain = parent_impurity - children / total;
      visit(ScoredSplit{Split{f, column[i].first}, gain});
    }
  }
}

/// Highest-gain split of the view; ties go to the lower feature, then the
/// lower threshold. Nothing when the view is pure or has no valid split.
inline std::optional<ScoredSplit> best_split(const SampleView& view, Impurity kind = Impurity::gini,
                                             std::size_t min_samples_leaf = 1) {
  if (view.empty()) throw std::invalid_argument("best_split needs a nonempty view");
  if (view.pure()) return std::nullopt;
  std::optional<ScoredSplit> best;
  scan_splits(view, kind, min_samples_leaf, [&](const ScoredSplit& s) {
    if (!best || s.gain > best->gain) best = s;
  });
  return best;
}

struct GreedyConfig {
  std::size_t max_depth = 3;
  /// Best-first growth cap on internal nodes; unlimited when empty.
  std::optional<std::size_t> max_internal_nodes;
  Impurity impurity = Impurity::gini;
  std::size_t min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;

  void validate() const {
    if (max_internal_nodes && *max_internal_nodes < 1) throw std::invalid_argument("node budget must be >= 1");
    if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
    if (!(min_impurity_decrease >= 0.0)) throw std::invalid_argument("min_impurity_decrease must be >= 0");
  }
};

/// A greedy fit plus the order in which internal nodes were created.
struct GreedyFit {
  Tree tree;
  std::vector<Split> expansion_order;
  std::size_t nodes_evaluated = 0;
};

namespace detail {

inline std::optional<ScoredSplit> expandable_split(const SampleView& view, std::size_t depth,
                                                   const GreedyConfig& config) {
  if (depth >= config.max_depth) return std::nullopt;
  auto s = best_split(view, config.impurity, config.min_samples_leaf);
  if (!s || s->gain <= kMinPositiveGain || s->gain < config.min_impurity_decrease) return std::nullopt;
  return s;
}

inline void grow_depth_first(GreedyFit& fit, std::size_t node, const SampleView& view, std::size_t depth,
                             const GreedyConfig& config) {
  ++fit.nodes_evaluated;
  auto s = expandable_split(view, depth, config);
  if (!s) return;
  auto [left, right] = split_view(view, s->split);
  auto [l, r] = fit.tree.expand(node, s->split, majority_class(left.class_masses()),
                                majority_class(right.class_masses()));
  fit.expansion_order.push_back(s->split);
  grow_depth_first(fit, l, left, depth + 1, config);
  grow_depth_first(fit, r, right, depth + 1, config);
}

inline void grow_best_first(GreedyFit& fit, const SampleView& root, const GreedyConfig& config) {
  struct Frontier {
    std::size_t node;
    SampleView view;
    std::size_t depth;
    ScoredSplit candidate;
  };
  std::vector<Frontier> frontier;
  auto consider = [&](std::size_t node, SampleView view, std::size_t depth) {
    ++fit.nodes_evaluated;
    if (auto s = expandable_split(view, depth, config)) frontier.push_back({node, std::move(view), depth, *s});
  };
  consider(0, root, 0);
  const std::size_t budget = *config.max_internal_nodes;
  std::size_t built = 0;
  while (built < budget && !frontier.empty()) {
    // Frontier stays in insertion order so the first maximum wins ties.
    auto best = frontier.begin();
    for (auto it = frontier.begin() + 1; it != frontier.end(); ++it)
      if (it->candidate.gain > best->candidate.gain) best = it;
    Frontier chosen = std::move(*best);
    frontier.erase(best);
    auto [left, right] = split_view(chosen.view, chosen.candidate.split);
    auto [l, r] = fit.tree.expand(chosen.node, chosen.candidate.split, majority_class(left.class_masses()),
                                  majority_class(right.class_masses()));
    fit.expansion_order.push_back(chosen.candidate.split);
    ++built;
    if (built == budget) break;
    consider(l, std::move(left), chosen.depth + 1);
    consider(r, std::move(right), chosen.depth + 1);
  }
}

}  // namespace detail

/// CART-style greedy induction. Without a node budget, nodes are expanded
/// recursively down to `max_depth`; with one, the frontier leaf whose best
/// split has the largest gain is expanded until the budget is spent. A node
/// is expanded only when its best split has positive gain.
inline GreedyFit fit_greedy_traced(const SampleView& view, const GreedyConfig& config) {
  if (view.empty()) throw std::invalid_argument("fit_greedy needs a nonempty view");
  config.validate();
  GreedyFit fit;
  fit.tree = Tree::leaf(majority_class(view.class_masses()));
  fit.tree.with_schema(view.data().feature_count(), view.data().class_count());
  if (config.max_internal_nodes)
    detail::grow_best_first(fit, view, config);
  else
    detail::grow_depth_first(fit, 0, view, 0, config);
  return fit;
}

inline Tree fit_greedy(const SampleView& view, const GreedyConfig& config) {
  return fit_greedy_traced(view, config).tree;
}

inline Tree fit_greedy(const Dataset& data, const GreedyConfig& config) {
  return fit_greedy(SampleView(data), config);
}

}  // namespace dpdt

#endif  // DPDT_GREEDY_HPP
