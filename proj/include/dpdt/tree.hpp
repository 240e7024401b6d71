#ifndef DPDT_TREE_HPP
#define DPDT_TREE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpdt/dataset.hpp"

namespace dpdt {

/// Malformed model or ensemble document.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary decision tree with axis-aligned splits, stored as a flat node array
/// rooted at node 0. Nodes are either leaves (class) or internal (split with
/// two children).
class Tree {
 public:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Node {
    ClassIndex klass = 0;
    Split split{};
    std::size_t left = kNone;
    std::size_t right = kNone;
    bool is_leaf() const { return left == kNone; }
  };

  Tree() : nodes_{Node{}} {}

  static Tree leaf(ClassIndex k) {
    Tree t;
    t.nodes_[0].klass = k;
    return t;
  }

  static Tree internal(Split split, const Tree& left, const Tree& right) {
    Tree t;
    t.nodes_.reserve(1 + left.nodes_.size() + right.nodes_.size());
    t.nodes_[0].split = split;
    t.nodes_[0].left = t.append(left);
    t.nodes_[0].right = t.append(right);
    t.feature_count_ = std::max(left.feature_count_, right.feature_count_);
    t.class_count_ = std::max(left.class_count_, right.class_count_);
    return t;
  }

  /// Turns leaf `node` into an internal node with two new leaves; returns
  /// the ids of the new (left, right) children.
  std::pair<std::size_t, std::size_t> expand(std::size_t node, Split split, ClassIndex left_class,
                                             ClassIndex right_class) {
    if (!nodes_.at(node).is_leaf()) throw std::logic_error("expanding an internal node");
    std::size_t l = nodes_.size();
    nodes_.push_back(Node{left_class});
    nodes_.push_back(Node{right_class});
    nodes_[node].split = split;
    nodes_[node].left = l;
    nodes_[node].right = l + 1;
    return {l, l + 1};
  }

  Tree& with_schema(std::size_t feature_count, std::size_t class_count) {
    feature_count_ = feature_count;
    class_count_ = class_count;
    return *this;
  }

  /// 0 when unknown.
  std::size_t feature_count() const { return feature_count_; }
  std::size_t class_count() const { return class_count_; }

  const Node& node(std::size_t id) const { return nodes_.at(id); }
  const Node& root() const { return nodes_[0]; }
  std::size_t node_count() const { return nodes_.size(); }
  bool is_leaf() const { return nodes_[0].is_leaf(); }

  Tree subtree(std::size_t id) const {
    const Node& n = nodes_.at(id);
    Tree t = n.is_leaf() ? leaf(n.klass) : internal(n.split, subtree(n.left), subtree(n.right));
    t.with_schema(feature_count_, class_count_);
    return t;
  }

  std::size_t internal_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes_) c += n.is_leaf() ? 0 : 1;
    return c;
  }

  std::size_t depth() const { return depth_from(0); }

  /// Splits of internal nodes in pre-order.
  std::vector<Split> splits() const {
    std::vector<Split> out;
    std::function<void(std::size_t)> walk = [&](std::size_t id) {
      const Node& n = nodes_[id];
      if (n.is_leaf()) return;
      out.push_back(n.split);
      walk(n.left);
      walk(n.right);
    };
    walk(0);
    return out;
  }

  /// Id of the leaf reached by `x`.
  std::size_t leaf_for(std::span<const double> x) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
      const Node& n = nodes_[id];
      id = n.split.goes_left(x[n.split.feature]) ? n.left : n.right;
    }
    return id;
  }

  std::size_t leaf_for_row(const Dataset& data, std::size_t row) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
      const Node& n = nodes_[id];
      id = n.split.goes_left(data.value(row, n.split.feature)) ? n.left : n.right;
    }
    return id;
  }

  /// Number of internal nodes traversed by `row`.
  std::size_t path_splits(const Dataset& data, std::size_t row) const {
    std::size_t id = 0, count = 0;
    while (!nodes_[id].is_leaf()) {
      const Node& n = nodes_[id];
      id = n.split.goes_left(data.value(row, n.split.feature)) ? n.left : n.right;
      ++count;
    }
    return count;
  }

  std::size_t max_feature_used() const {
    std::size_t m = 0;
    for (const auto& n : nodes_)
      if (!n.is_leaf()) m = std::max(m, n.split.feature + 1);
    return m;
  }

  /// Structural equality (layout of the node array is irrelevant).
  friend bool operator==(const Tree& a, const Tree& b) { return same_shape(a, 0, b, 0); }

 private:
  std::size_t append(const Tree& other) {
    std::size_t offset = nodes_.size();
    for (Node n : other.nodes_) {
      if (!n.is_leaf()) {
        n.left += offset;
        n.right += offset;
      }
      nodes_.push_back(n);
    }
    return offset;
  }

  std::size_t depth_from(std::size_t id) const {
    const Node& n = nodes_[id];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  static bool same_shape(const Tree& a, std::size_t ia, const Tree& b, std::size_t ib) {
    const Node& x = a.nodes_[ia];
    const Node& y = b.nodes_[ib];
    if (x.is_leaf() != y.is_leaf()) return false;
    if (x.is_leaf()) return x.klass == y.klass;
    return x.split == y.split && same_shape(a, x.left, b, y.left) && same_shape(a, x.right, b, y.right);
  }

  std::vector<Node> nodes_;
  std::size_t feature_count_ = 0;
  std::size_t class_count_ = 0;
};

inline ClassIndex predict(const Tree& tree, std::span<const double> x) {
  if (tree.feature_count() != 0 ? x.size() != tree.feature_count() : x.size() < tree.max_feature_used())
    throw std::invalid_argument("feature vector has " + std::to_string(x.size()) + " components, tree expects " +
                                std::to_string(tree.feature_count() ? tree.feature_count() : tree.max_feature_used()));
  return tree.node(tree.leaf_for(x)).klass;
}

/// Weighted fraction of the view classified correctly.
inline double accuracy(const Tree& tree, const SampleView& view) {
  const Dataset& data = view.data();
  double correct = 0.0;
  for (RowIndex r : view.indices())
    if (tree.node(tree.leaf_for_row(data, r)).klass == data.label(r)) correct += view.weight(r);
  return correct / view.mass();
}

inline double accuracy(const Tree& tree, const Dataset& data) { return accuracy(tree, SampleView(data)); }

namespace detail {

inline double expected_splits_at(const Tree& tree, std::size_t id, const SampleView& view) {
  const Tree::Node& n = tree.node(id);
  if (n.is_leaf() || view.empty() || view.mass() <= 0.0) return 0.0;
  auto [left, right] = split_view(view, n.split);
  double p_left = left.mass() / view.mass();
  double p_right = 1.0 - p_left;
  double c = 1.0;
  if (!left.empty()) c += p_left * expected_splits_at(tree, n.left, left);
  if (!right.empty()) c += p_right * expected_splits_at(tree, n.right, right);
  return c;
}

}  // namespace detail

/// Expected number of splits applied to a sample drawn from the view's weights:
/// C(leaf) = 0, C(T) = 1 + p_l C(T_l) + p_r C(T_r).
inline double expected_splits(const Tree& tree, const SampleView& view) {
  if (view.empty()) throw std::invalid_argument("expected_splits needs a nonempty view");
  return detail::expected_splits_at(tree, 0, view);
}

/// Weighted 0-1 loss plus alpha times the expected number of splits.
inline double regularized_loss(const Tree& tree, const SampleView& view, double alpha) {
  if (view.empty()) throw std::invalid_argument("regularized_loss needs a nonempty view");
  double loss = 1.0 - accuracy(tree, view);
  if (alpha != 0.0) loss += alpha * expected_splits(tree, view);
  return loss;
}

// ----------------------------------------------------------------------------
// Serialization
// ----------------------------------------------------------------------------

using json = nlohmann::json;

/// {"leaf": k} or {"split": {"feature": j, "threshold": t}, "left": ..., "right": ...}
inline json to_json(const Tree& tree) {
  std::function<json(std::size_t)> emit = [&](std::size_t id) -> json {
    const Tree::Node& n = tree.node(id);
    if (n.is_leaf()) return json{{"leaf", n.klass}};
    return json{{"split", {{"feature", n.split.feature}, {"threshold", n.split.threshold}}},
                {"left", emit(n.left)},
                {"right", emit(n.right)}};
  };
  return emit(0);
}

namespace detail {

inline Tree node_from_json(const json& doc, const std::string& path, std::size_t class_count) {
  if (!doc.is_object()) throw FormatError(path + ": node must be an object");
  const bool has_leaf = doc.contains("leaf");
  const bool has_split = doc.contains("split");
  if (has_leaf == has_split) throw FormatError(path + ": node needs exactly one of \"leaf\" or \"split\"");
  if (has_leaf) {
    if (doc.size() != 1) throw FormatError(path + ": leaf node has extra keys");
    const json& v = doc["leaf"];
    if (!v.is_number_integer() || v.get<long long>() < 0) throw FormatError(path + "/leaf: expected a class index");
    auto k = v.get<ClassIndex>();
    if (class_count != 0 && k >= class_count) throw FormatError(path + "/leaf: class index out of range");
    return Tree::leaf(k);
  }
  if (!doc.contains("left") || !doc.contains("right"))
    throw FormatError(path + ": split node must have both \"left\" and \"right\"");
  if (doc.size() != 3) throw FormatError(path + ": split node has extra keys");
  const json& s = doc["split"];
  if (!s.is_object() || !s.contains("feature") || !s.contains("threshold"))
    throw FormatError(path + "/split: expected {\"feature\", \"threshold\"}");
  if (!s["feature"].is_number_integer() || s["feature"].get<long long>() < 0)
    throw FormatError(path + "/split/feature: expected a feature index");
  if (!s["threshold"].is_number()) throw FormatError(path + "/split/threshold: expected a number");
  Split split{s["feature"].get<FeatureIndex>(), s["threshold"].get<double>()};
  return Tree::internal(split, node_from_json(doc["left"], path + "/left", class_count),
                        node_from_json(doc["right"], path + "/right", class_count));
}

}  // namespace detail

inline Tree tree_from_json(const json& doc, std::size_t class_count = 0) {
  return detail::node_from_json(doc, "", class_count);
}

/// Self-describing model file: schema, fitting config and the tree.
struct ModelDocument {
  Tree tree;
  std::vector<std::string> features;
  json config = json::object();

  json to_json() const {
    return json{{"p", tree.feature_count()},
                {"k", tree.class_count()},
                {"features", features},
                {"config", config},
                {"root", dpdt::to_json(tree)}};
  }

  std::string dump(int indent = 2) const { return to_json().dump(indent); }

  static ModelDocument from_json(const json& doc) {
    if (!doc.is_object()) throw FormatError("model document must be an object");
    for (const char* key : {"p", "k", "root"})
      if (!doc.contains(key)) throw FormatError(std::string("model document is missing \"") + key + "\"");
    if (!doc["p"].is_number_unsigned() || !doc["k"].is_number_unsigned())
      throw FormatError("\"p\" and \"k\" must be nonnegative integers");
    ModelDocument m;
    auto p = doc["p"].get<std::size_t>();
    auto k = doc["k"].get<std::size_t>();
    m.tree = detail::node_from_json(doc["root"], "/root", k);
    if (p != 0 && m.tree.max_feature_used() > p) throw FormatError("/root: split feature index >= p");
    m.tree.with_schema(p, k);
    if (doc.contains("features")) {
      if (!doc["features"].is_array()) throw FormatError("/features: expected an array of strings");
      for (const auto& f : doc["features"]) {
        if (!f.is_string()) throw FormatError("/features: expected an array of strings");
        m.features.push_back(f.get<std::string>());
      }
    }
    if (doc.contains("config")) m.config = doc["config"];
    return m;
  }

  /// Parses text; syntax errors carry the byte offset.
  static ModelDocument parse(const std::string& text) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return from_json(doc);
  }
};

inline std::string serialize(const Tree& tree) { return to_json(tree).dump(); }

inline Tree deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("root")) return ModelDocument::from_json(doc).tree;
  return tree_from_json(doc);
}

/// Indented text rendering for reports.
inline std::string describe(const Tree& tree, const std::vector<std::string>& feature_names = {}) {
  std::string out;
  std::function<void(std::size_t, int)> walk = [&](std::size_t id, int indent) {
    const Tree::Node& n = tree.node(id);
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (n.is_leaf()) {
      out += pad + "class " + std::to_string(n.klass) + "\n";
      return;
    }
    std::string name = n.split.feature < feature_names.size() ? feature_names[n.split.feature]
                                                              : "f" + std::to_string(n.split.feature);
    out += pad + name + " <= " + json(n.split.threshold).dump() + "\n";
    walk(n.left, indent + 1);
    out += pad + name + " > " + json(n.split.threshold).dump() + "\n";
    walk(n.right, indent + 1);
  };
  walk(0, 0);
  return out;
}

}  // namespace dpdt

#endif  // DPDT_TREE_HPP
