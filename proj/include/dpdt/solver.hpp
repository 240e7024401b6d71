#ifndef DPDT_SOLVER_HPP
#define DPDT_SOLVER_HPP

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "dpdt/dataset.hpp"
#include "dpdt/greedy.hpp"
#include "dpdt/splitgen.hpp"
#include "dpdt/tree.hpp"

namespace dpdt {

/// How equal-valued actions are ordered. Within splits the lower (feature,
/// threshold) wins and within classes the lower index wins in both modes.
enum class TieBreak {
  prefer_leaf,   ///< a leaf beats a split of equal value
  prefer_split,  ///< a split beats a leaf of equal value
};

inline std::string to_string(TieBreak t) { return t == TieBreak::prefer_leaf ? "leaf" : "split"; }

inline TieBreak tie_break_from_string(const std::string& s) {
  if (s == "leaf") return TieBreak::prefer_leaf;
  if (s == "split") return TieBreak::prefer_split;
  throw std::invalid_argument("unknown tie-break '" + s + "' (expected leaf or split)");
}

struct DpdtConfig {
  std::size_t max_depth = 3;
  double alpha = 0.0;
  GeneratorSpec generator = GeneratorSpec::cart_call({8, 1, 1});
  TieBreak tie_break = TieBreak::prefer_leaf;
  /// Workers for the root candidates; 0 uses the hardware concurrency.
  unsigned threads = 1;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    generator.validate(max_depth);
  }
};

/// Optimal value of an MDP state and the action achieving it.
///
/// `value` is V*(s): minus the regularized loss of the best subtree on the
/// state's samples. `weighted_value` is the same quantity scaled by the
/// state's weight mass; the recursion runs on it so that unit-weight fits
/// at alpha = 0 use exact integer arithmetic.
struct StateValue {
  double value = 0.0;
  double weighted_value = 0.0;
  std::variant<ClassIndex, Split> action = ClassIndex{0};
  double p_left = 0.0;
  /// Empty for a leaf action, otherwise {left, right}.
  std::vector<StateValue> children;

  bool is_leaf() const { return std::holds_alternative<ClassIndex>(action); }
};

namespace detail {

inline StateValue leaf_value(const SampleView& view) {
  auto masses = view.class_masses();
  ClassIndex k = majority_class(masses);
  StateValue v;
  v.weighted_value = -(view.mass() - masses[k]);
  v.value = view.mass() > 0.0 ? v.weighted_value / view.mass() : 0.0;
  v.action = k;
  return v;
}

inline StateValue split_value(const SampleView& view, const Split& split, std::size_t depth, const DpdtConfig& config,
                              OpsCounter& counter);

inline StateValue solve(const SampleView& view, std::size_t depth, const DpdtConfig& config, OpsCounter& counter,
                        unsigned workers) {
  StateValue leaf = leaf_value(view);
  if (depth >= config.max_depth) return leaf;

  std::vector<Split> candidates = generate(config.generator, view, depth, counter);
  if (candidates.empty()) return leaf;
  std::sort(candidates.begin(), candidates.end());

  const double tolerance = 1e-13 * std::max(view.mass(), 1e-300);
  std::optional<StateValue> best;
  if (config.tie_break == TieBreak::prefer_leaf) best = std::move(leaf);
  auto offer = [&](StateValue v) {
    if (!best || v.weighted_value > best->weighted_value + tolerance) best = std::move(v);
  };

  if (workers > 1 && candidates.size() > 1) {
    std::vector<std::optional<StateValue>> results(candidates.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(candidates.size()));
    for (unsigned t = 0; t < n; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < candidates.size(); i = next++)
          results[i] = split_value(view, candidates[i], depth, config, counter);
      });
    for (auto& th : pool) th.join();
    for (auto& r : results) offer(std::move(*r));
  } else {
    for (const Split& s : candidates) offer(split_value(view, s, depth, config, counter));
  }

  if (config.tie_break == TieBreak::prefer_split) offer(leaf_value(view));
  return std::move(*best);
}

inline StateValue split_value(const SampleView& view, const Split& split, std::size_t depth, const DpdtConfig& config,
                              OpsCounter& counter) {
  auto [left, right] = split_view(view, split);
  StateValue v;
  v.action = split;
  v.p_left = left.mass() / view.mass();
  v.children.reserve(2);
  v.children.push_back(solve(left, depth + 1, config, counter, 1));
  v.children.push_back(solve(right, depth + 1, config, counter, 1));
  v.weighted_value = -config.alpha * view.mass() + v.children[0].weighted_value + v.children[1].weighted_value;
  v.value = v.weighted_value / view.mass();
  return v;
}

inline Tree extract(const StateValue& v) {
  if (v.is_leaf()) return Tree::leaf(std::get<ClassIndex>(v.action));
  return Tree::internal(std::get<Split>(v.action), extract(v.children[0]), extract(v.children[1]));
}

}  // namespace detail

/// Optimal value of state (view, depth) under the configured split generator.
///
/// The MDP is never materialized: each state generates its candidates,
/// recursively solves both children of every candidate, and keeps only the
/// best action's subtree, so memory stays linear in the data size times the
/// depth.
inline StateValue solve_state(const SampleView& view, std::size_t depth, const DpdtConfig& config,
                              OpsCounter& counter) {
  if (view.empty()) throw std::invalid_argument("cannot solve an empty state");
  if (depth > config.max_depth) throw std::invalid_argument("state depth beyond the horizon");
  config.validate();
  unsigned workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  return detail::solve(view, depth, config, counter, workers);
}

/// Follows the optimal action from the root: leaf actions become leaves,
/// split actions become internal nodes over the extracted children.
inline Tree extract_tree(const StateValue& root) { return detail::extract(root); }

struct DpdtResult {
  Tree tree;
  OpsCounter ops;
  /// Optimal return from the root state; equals minus the tree's regularized loss.
  double j_alpha = 0.0;
};

inline DpdtResult fit_dpdt(const SampleView& view, const DpdtConfig& config) {
  if (view.empty()) throw std::invalid_argument("fit_dpdt needs a nonempty view");
  DpdtResult result;
  StateValue root = solve_state(view, 0, config, result.ops);
  result.tree = extract_tree(root);
  result.tree.with_schema(view.data().feature_count(), view.data().class_count());
  result.j_alpha = root.value;
  assert(std::abs(result.j_alpha + regularized_loss(result.tree, view, config.alpha)) < 1e-9);
  return result;
}

inline DpdtResult fit_dpdt(const Dataset& data, const DpdtConfig& config) { return fit_dpdt(SampleView(data), config); }

}  // namespace dpdt

#endif  // DPDT_SOLVER_HPP
