#ifndef DPDT_SPLITGEN_HPP
#define DPDT_SPLITGEN_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpdt/dataset.hpp"
#include "dpdt/greedy.hpp"

namespace dpdt {

/// Operation counts accumulated during a fit. Increments are atomic so
/// concurrent subproblem solves add up to the sequential total.
class OpsCounter {
 public:
  OpsCounter() = default;
  OpsCounter(const OpsCounter& other)
      : candidates_(other.candidate_splits_generated()), states_(other.states_expanded()) {}
  OpsCounter& operator=(const OpsCounter& other) {
    candidates_.store(other.candidate_splits_generated(), std::memory_order_relaxed);
    states_.store(other.states_expanded(), std::memory_order_relaxed);
    return *this;
  }

  void add_candidates(std::uint64_t n) { candidates_.fetch_add(n, std::memory_order_relaxed); }
  void add_state() { states_.fetch_add(1, std::memory_order_relaxed); }
  void add_states(std::uint64_t n) { states_.fetch_add(n, std::memory_order_relaxed); }
  void merge(const OpsCounter& other) {
    add_candidates(other.candidate_splits_generated());
    add_states(other.states_expanded());
  }

  std::uint64_t candidate_splits_generated() const { return candidates_.load(std::memory_order_relaxed); }
  std::uint64_t states_expanded() const { return states_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> candidates_{0};
  std::atomic<std::uint64_t> states_{0};
};

enum class GeneratorKind { exhaustive, top_b, cart_call };

inline std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::exhaustive:
      return "exhaustive";
    case GeneratorKind::top_b:
      return "top_b";
    case GeneratorKind::cart_call:
      return "cart_call";
  }
  return "unknown";
}

inline GeneratorKind generator_from_string(const std::string& s) {
  if (s == "exhaustive") return GeneratorKind::exhaustive;
  if (s == "top_b") return GeneratorKind::top_b;
  if (s == "cart_call") return GeneratorKind::cart_call;
  throw std::invalid_argument("unknown generator '" + s + "' (expected exhaustive, top_b or cart_call)");
}

/// Split-generating function: which heuristic and its per-depth budgets
/// (B_1, ..., B_D). The state at depth d uses budgets[d].
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::cart_call;
  std::vector<std::size_t> budgets;
  Impurity impurity = Impurity::gini;

  static GeneratorSpec exhaustive() { return {GeneratorKind::exhaustive, {}, Impurity::gini}; }
  static GeneratorSpec top_b(std::vector<std::size_t> b, Impurity i = Impurity::gini) {
    return {GeneratorKind::top_b, std::move(b), i};
  }
  static GeneratorSpec cart_call(std::vector<std::size_t> b, Impurity i = Impurity::gini) {
    return {GeneratorKind::cart_call, std::move(b), i};
  }

  void validate(std::size_t max_depth) const {
    if (kind == GeneratorKind::exhaustive) return;
    if (budgets.size() != max_depth)
      throw std::invalid_argument("budget list has " + std::to_string(budgets.size()) + " entries, depth is " +
                                  std::to_string(max_depth));
    for (std::size_t b : budgets)
      if (b < 1) throw std::invalid_argument("every budget must be >= 1");
  }
};

inline std::string format_budgets(const std::vector<std::size_t>& budgets) {
  std::ostringstream out;
  for (std::size_t i = 0; i < budgets.size(); ++i) out << (i ? "," : "") << budgets[i];
  return out.str();
}

inline std::vector<std::size_t> parse_budgets(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = detail::trim(item);
    auto v = detail::parse_integer(item);
    if (!v || *v < 1) throw std::invalid_argument("invalid budget '" + item + "' (expected integers >= 1)");
    out.push_back(static_cast<std::size_t>(*v));
  }
  if (out.empty()) throw std::invalid_argument("empty budget list");
  return out;
}

namespace detail {

inline std::vector<Split> exhaustive_splits(const SampleView& view) {
  const Dataset& data = view.data();
  std::vector<Split> out;
  std::vector<double> values(view.size());
  for (FeatureIndex f = 0; f < data.feature_count(); ++f) {
    for (std::size_t i = 0; i < view.size(); ++i) values[i] = data.value(view.indices()[i], f);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    // The largest value sends everything left.
    for (std::size_t i = 0; i + 1 < values.size(); ++i) out.push_back(Split{f, values[i]});
    values.resize(view.size());
  }
  return out;
}

inline std::vector<RowIndex> left_rows(const SampleView& view, const Split& split) {
  std::vector<RowIndex> rows;
  for (RowIndex r : view.indices())
    if (split.goes_left(view.data().value(r, split.feature))) rows.push_back(r);
  return rows;
}

}  // namespace detail

/// Candidate splits for the state (view, depth). Every returned split leaves
/// both children nonempty; pure states get no candidates.
inline std::vector<Split> generate(const GeneratorSpec& spec, const SampleView& view, std::size_t depth,
                                   OpsCounter& counter) {
  if (view.empty()) throw std::invalid_argument("cannot generate splits for an empty state");
  if (spec.kind != GeneratorKind::exhaustive && depth >= spec.budgets.size())
    throw std::invalid_argument("state depth " + std::to_string(depth) + " is at or beyond the horizon");
  counter.add_state();
  if (view.pure()) return {};

  switch (spec.kind) {
    case GeneratorKind::exhaustive: {
      auto out = detail::exhaustive_splits(view);
      counter.add_candidates(out.size());
      return out;
    }
    case GeneratorKind::top_b: {
      std::vector<ScoredSplit> scored;
      scan_splits(view, spec.impurity, 1, [&](const ScoredSplit& s) { scored.push_back(s); });
      counter.add_candidates(scored.size());
      const std::size_t keep = std::min(spec.budgets[depth], scored.size());
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                        [](const ScoredSplit& a, const ScoredSplit& b) {
                          if (a.gain != b.gain) return a.gain > b.gain;
                          return a.split < b.split;
                        });
      std::vector<Split> out;
      for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[i].split);
      return out;
    }
    case GeneratorKind::cart_call: {
      GreedyConfig inner;
      inner.max_depth = spec.budgets.size() - depth;
      inner.max_internal_nodes = spec.budgets[depth];
      inner.impurity = spec.impurity;
      GreedyFit fit = fit_greedy_traced(view, inner);
      counter.add_candidates(fit.expansion_order.size());
      std::vector<Split> out;
      std::vector<std::vector<RowIndex>> seen;
      for (const Split& s : fit.expansion_order) {
        auto rows = detail::left_rows(view, s);
        if (rows.empty() || rows.size() == view.size()) continue;
        if (std::find(seen.begin(), seen.end(), rows) != seen.end()) continue;
        seen.push_back(std::move(rows));
        out.push_back(s);
      }
      return out;
    }
  }
  return {};
}

}  // namespace dpdt

#endif  // DPDT_SPLITGEN_HPP
