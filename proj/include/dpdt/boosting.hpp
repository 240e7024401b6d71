#ifndef DPDT_BOOSTING_HPP
#define DPDT_BOOSTING_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dpdt/dataset.hpp"
#include "dpdt/greedy.hpp"
#include "dpdt/solver.hpp"
#include "dpdt/tree.hpp"

namespace dpdt {

using WeakLearner = std::variant<DpdtConfig, GreedyConfig>;

/// Stage weight used when a weak learner makes no weighted error.
inline const double kMaxStageWeight = std::log(1e12);

struct EnsembleMember {
  Tree tree;
  double beta = 0.0;
};

struct Ensemble {
  std::vector<EnsembleMember> members;
  std::size_t class_count = 0;
  std::size_t feature_count = 0;
  std::vector<std::string> features;
  nlohmann::json weak_config = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json m = nlohmann::json::array();
    for (const auto& member : members) {
      ModelDocument doc{member.tree, features, weak_config};
      m.push_back({{"beta", member.beta}, {"tree", doc.to_json()}});
    }
    return {{"members", m}, {"k", class_count}};
  }

  std::string dump(int indent = 2) const { return to_json().dump(indent); }

  static Ensemble from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("members") || !doc.contains("k"))
      throw FormatError("ensemble document needs \"members\" and \"k\"");
    if (!doc["members"].is_array()) throw FormatError("/members: expected an array");
    if (!doc["k"].is_number_unsigned()) throw FormatError("/k: expected a nonnegative integer");
    Ensemble e;
    e.class_count = doc["k"].get<std::size_t>();
    std::size_t i = 0;
    for (const auto& m : doc["members"]) {
      std::string at = "/members/" + std::to_string(i++);
      if (!m.is_object() || !m.contains("beta") || !m.contains("tree") || !m["beta"].is_number())
        throw FormatError(at + ": expected {\"beta\": number, \"tree\": model}");
      ModelDocument d;
      try {
        d = ModelDocument::from_json(m["tree"]);
      } catch (const FormatError& err) {
        throw FormatError(at + "/tree: " + err.what());
      }
      e.feature_count = std::max(e.feature_count, d.tree.feature_count());
      if (e.features.empty()) e.features = d.features;
      if (e.weak_config.empty()) e.weak_config = d.config;
      e.members.push_back({std::move(d.tree), m["beta"].get<double>()});
    }
    return e;
  }

  static Ensemble parse(const std::string& text) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
      throw FormatError("malformed JSON at byte " + std::to_string(err.byte) + ": " + err.what());
    }
    return from_json(doc);
  }
};

/// Weighted vote: argmax_k sum_m beta_m [member m predicts k], ties to the lowest k.
inline ClassIndex predict_ensemble(const Ensemble& ensemble, std::span<const double> x) {
  if (ensemble.members.empty()) throw std::invalid_argument("empty ensemble");
  if (ensemble.feature_count != 0 && x.size() != ensemble.feature_count)
    throw std::invalid_argument("feature vector has " + std::to_string(x.size()) + " components, ensemble expects " +
                                std::to_string(ensemble.feature_count));
  std::vector<double> score(std::max<std::size_t>(ensemble.class_count, 1), 0.0);
  for (const auto& m : ensemble.members) {
    ClassIndex k = predict(m.tree, x);
    if (k >= score.size()) score.resize(k + 1, 0.0);
    score[k] += m.beta;
  }
  return majority_class(score);
}

inline double ensemble_accuracy(const Ensemble& ensemble, const Dataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predict_ensemble(ensemble, data.row(i)) == data.label(i)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

enum class BoostStop { completed, perfect_learner, no_better_than_chance };

inline std::string to_string(BoostStop s) {
  switch (s) {
    case BoostStop::completed:
      return "completed";
    case BoostStop::perfect_learner:
      return "perfect_learner";
    case BoostStop::no_better_than_chance:
      return "no_better_than_chance";
  }
  return "unknown";
}

struct BoostRound {
  std::size_t round = 0;
  double weighted_error = 0.0;
  double beta = 0.0;
  bool retained = false;
  /// Sum of the sample weights after this round's update.
  double weight_sum = 1.0;
};

struct BoostResult {
  Ensemble ensemble;
  std::vector<BoostRound> rounds;
  BoostStop stop = BoostStop::completed;
  OpsCounter ops;

  std::size_t rounds_completed() const { return ensemble.members.size(); }
};

inline Tree fit_weak(const WeakLearner& weak, const SampleView& view, OpsCounter& ops) {
  if (const auto* d = std::get_if<DpdtConfig>(&weak)) {
    DpdtResult r = fit_dpdt(view, *d);
    ops.merge(r.ops);
    return r.tree;
  }
  GreedyFit g = fit_greedy_traced(view, std::get<GreedyConfig>(weak));
  ops.add_candidates(g.expansion_order.size());
  ops.add_states(g.nodes_evaluated);
  return g.tree;
}

/// Multiclass AdaBoost (SAMME) over decision-tree weak learners.
///
/// Stage weight beta = learning_rate * (ln((1 - err) / err) + ln(K - 1)).
/// A round with zero weighted error is kept with beta = ln(1e12) and ends the
/// loop; a round with err >= 1 - 1/K is discarded and ends the loop.
inline BoostResult fit_adaboost(const Dataset& data, const WeakLearner& weak, std::size_t rounds,
                                double learning_rate = 1.0) {
  const std::size_t k = data.class_count();
  if (k < 2) throw std::invalid_argument("boosting needs at least two classes");
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw std::invalid_argument("learning rate must lie in (0, 1]");

  const std::size_t n = data.size();
  BoostResult result;
  result.ensemble.class_count = k;
  result.ensemble.feature_count = data.feature_count();
  result.ensemble.features = data.feature_names();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<char> missed(n);

  for (std::size_t m = 1; m <= rounds; ++m) {
    SampleView view(data, weights);
    Tree tree = fit_weak(weak, view, result.ops);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      missed[i] = tree.node(tree.leaf_for_row(data, i)).klass != data.label(i);
      if (missed[i]) err += weights[i];
    }
    err /= view.mass();

    BoostRound record{m, err, 0.0, false};
    if (err >= 1.0 - 1.0 / static_cast<double>(k)) {
      result.rounds.push_back(record);
      result.stop = BoostStop::no_better_than_chance;
      break;
    }
    if (err <= 0.0) {
      record.beta = kMaxStageWeight;
      record.retained = true;
      result.rounds.push_back(record);
      result.ensemble.members.push_back({std::move(tree), record.beta});
      result.stop = BoostStop::perfect_learner;
      break;
    }
    record.beta = std::min(kMaxStageWeight,
                           learning_rate * (std::log((1.0 - err) / err) + std::log(static_cast<double>(k - 1))));
    record.retained = true;
    result.rounds.push_back(record);
    result.ensemble.members.push_back({std::move(tree), record.beta});

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (missed[i]) weights[i] *= std::exp(record.beta);
      total += weights[i];
    }
    double renormalized = 0.0;
    for (double& w : weights) renormalized += (w /= total);
    result.rounds.back().weight_sum = renormalized;
  }

  if (result.ensemble.members.empty())
    throw std::domain_error("the first weak learner is no better than chance; nothing to boost");
  return result;
}

}  // namespace dpdt

#endif  // DPDT_BOOSTING_HPP
