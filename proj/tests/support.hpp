// Test-only helpers: random data, random trees and brute-force oracles that
// share no code path with the library routines they check.
#ifndef DPDT_TESTS_SUPPORT_HPP
#define DPDT_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <dpdt/dpdt.hpp>

namespace dpdt::testing {

/// Features on a 0.05 grid (so ties occur) and labels from a noisy
/// axis-aligned rule.
inline Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t p, std::size_t k) {
  SplitMix64 rng(seed);
  std::vector<double> x(n * p);
  for (double& v : x) v = std::round(rng.uniform() * 20.0) / 20.0;
  std::vector<ClassIndex> y(n);
  FeatureIndex f1 = rng.below(p), f2 = rng.below(p);
  double t1 = 0.2 + 0.6 * rng.uniform(), t2 = 0.2 + 0.6 * rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    ClassIndex base = (x[i * p + f1] <= t1 ? 0 : 1) + (x[i * p + f2] <= t2 ? 0 : 1);
    y[i] = rng.uniform() < 0.2 ? rng.below(k) : base % k;
  }
  // Keep K fixed even when the noise draws miss a class.
  return Dataset(std::move(x), p, std::move(y), k);
}

inline Tree random_tree(SplitMix64& rng, std::size_t p, std::size_t k, std::size_t depth) {
  if (depth == 0 || rng.uniform() < 0.25) return Tree::leaf(rng.below(k));
  double t;
  switch (rng.below(4)) {
    case 0:
      t = rng.uniform();
      break;
    case 1:
      t = (rng.uniform() - 0.5) * 1e6;
      break;
    case 2:
      t = std::ldexp(rng.uniform(), -static_cast<int>(rng.below(1000)));
      break;
    default:
      t = 0.1 * static_cast<double>(rng.below(11));
  }
  Split s{rng.below(p), t};
  return Tree::internal(s, random_tree(rng, p, k, depth - 1), random_tree(rng, p, k, depth - 1));
}

/// Weighted-average number of splits on each sample's root-to-leaf path.
inline double direct_expected_splits(const Tree& tree, const SampleView& view) {
  double total = 0.0, mass = 0.0;
  for (RowIndex r : view.indices()) {
    std::size_t id = 0, count = 0;
    while (!tree.node(id).is_leaf()) {
      const auto& n = tree.node(id);
      id = view.data().value(r, n.split.feature) <= n.split.threshold ? n.left : n.right;
      ++count;
    }
    total += view.weight(r) * static_cast<double>(count);
    mass += view.weight(r);
  }
  return total / mass;
}

/// Impurity decrease of one split computed from scratch.
inline double direct_gain(const SampleView& view, const Split& s, Impurity kind) {
  const Dataset& d = view.data();
  std::vector<double> all(d.class_count()), l(d.class_count()), r(d.class_count());
  double wa = 0, wl = 0, wr = 0;
  for (RowIndex i : view.indices()) {
    double w = view.weight(i);
    all[d.label(i)] += w;
    wa += w;
    if (d.value(i, s.feature) <= s.threshold) {
      l[d.label(i)] += w;
      wl += w;
    } else {
      r[d.label(i)] += w;
      wr += w;
    }
  }
  auto imp = [&](const std::vector<double>& m, double w) {
    if (w <= 0) return 0.0;
    double out = kind == Impurity::gini ? 1.0 : 0.0;
    for (double c : m) {
      double q = c / w;
      if (kind == Impurity::gini)
        out -= q * q;
      else if (q > 0)
        out -= q * std::log(q) / std::log(2.0);
    }
    return out;
  };
  return imp(all, wa) - (wl / wa) * imp(l, wl) - (wr / wa) * imp(r, wr);
}

struct BruteSplit {
  Split split;
  double gain;
};

/// Every (feature, observed value) pair with two nonempty children.
inline std::vector<BruteSplit> all_valid_splits(const SampleView& view, Impurity kind) {
  const Dataset& d = view.data();
  std::vector<BruteSplit> out;
  for (FeatureIndex f = 0; f < d.feature_count(); ++f) {
    std::vector<double> vals;
    for (RowIndex i : view.indices()) vals.push_back(d.value(i, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (double t : vals) {
      std::size_t left = 0;
      for (RowIndex i : view.indices()) left += d.value(i, f) <= t;
      if (left == 0 || left == view.size()) continue;
      out.push_back({Split{f, t}, direct_gain(view, Split{f, t}, kind)});
    }
  }
  return out;
}

/// Minimum regularized loss over every tree of depth <= 2 whose thresholds
/// are observed values. Enumerates whole trees; the loss of each is counted
/// sample by sample. Requires unit weights. Returns (misclassified count +
/// alpha * total path splits) / N.
inline double brute_force_min_loss_depth2(const Dataset& d, double alpha) {
  const std::size_t n = d.size(), k = d.class_count();
  std::vector<Split> splits;
  for (FeatureIndex f = 0; f < d.feature_count(); ++f) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) vals.push_back(d.value(i, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (double t : vals) splits.push_back({f, t});
  }
  const std::size_t s = splits.size();
  std::vector<char> goes_left(s * n);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < n; ++i) goes_left[j * n + i] = d.value(i, splits[j].feature) <= splits[j].threshold;

  // A depth-<=1 subtree: leaf (split == -1) or one split with two leaf classes.
  struct Sub {
    long split;
    ClassIndex a, b;
  };
  std::vector<Sub> subs;
  for (ClassIndex c = 0; c < k; ++c) subs.push_back({-1, c, c});
  for (std::size_t j = 0; j < s; ++j)
    for (ClassIndex a = 0; a < k; ++a)
      for (ClassIndex b = 0; b < k; ++b) subs.push_back({static_cast<long>(j), a, b});

  double best = std::numeric_limits<double>::infinity();
  for (ClassIndex c = 0; c < k; ++c) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) wrong += d.label(i) != c;
    best = std::min(best, static_cast<double>(wrong) / static_cast<double>(n));
  }
  for (std::size_t root = 0; root < s; ++root) {
    for (const Sub& left : subs) {
      for (const Sub& right : subs) {
        std::size_t wrong = 0, path = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const Sub& sub = goes_left[root * n + i] ? left : right;
          ++path;
          ClassIndex pred = sub.a;
          if (sub.split >= 0) {
            ++path;
            pred = goes_left[static_cast<std::size_t>(sub.split) * n + i] ? sub.a : sub.b;
          }
          wrong += d.label(i) != pred;
        }
        double loss = (static_cast<double>(wrong) + alpha * static_cast<double>(path)) / static_cast<double>(n);
        best = std::min(best, loss);
      }
    }
  }
  return best;
}

}  // namespace dpdt::testing

#endif  // DPDT_TESTS_SUPPORT_HPP
