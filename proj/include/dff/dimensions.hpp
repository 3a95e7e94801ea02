#pragma once

#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dff/constraints.hpp"
#include "dff/teacher_class.hpp"
#include "dff/types.hpp"

namespace dff {

/// Adversary-vs-learner interaction tree. Nodes carry the teacher feedback for
/// the previous prediction (absent at the root and on correct-free paths) and
/// the next example (absent at leaves). Edges carry the (explanation, label)
/// answer the learner gave.
struct DffTree {
  struct Node {
    std::optional<Label> y;
    std::optional<Feature> phi;
    std::optional<ExampleId> x;
    // outgoing edges, sorted by (explanation, label)
    std::vector<std::pair<std::pair<ExampleId, Label>, std::size_t>> edges;
  };

  std::vector<Node> nodes;  // node 0 is the root

  bool empty() const { return nodes.empty(); }

  int height() const {
    if (nodes.empty()) return -1;
    return height_from(0);
  }

  int height_from(std::size_t v) const {
    if (nodes[v].edges.empty()) return 0;
    int h = 0;
    for (const auto& [label, child] : nodes[v].edges) {
      h = std::max(h, 1 + height_from(child));
    }
    return h;
  }
};

/// Exact game value of a restricted class. Label constraints double as the
/// set of legal explanation pairs. Memoized on the class's canonical state
/// key; one solver instance can serve many queries against the same class.
class DimSolver {
 public:
  explicit DimSolver(const TeacherClass& cls) : cls_(cls) {
    const Instance* inst = cls.instance();
    if (inst == nullptr) throw OracleError("dimension games need a materialized instance");
    if (inst->example_count > (1u << 16)) throw ParameterError("instance too large for the game solver");
  }

  /// max over fresh examples x of min over legal pairs of
  /// (0 if no disagreeing response is feasible, else 1 + value after the
  /// worst response); -1 when no member survives the constraints.
  int value(const ConstraintSet& c) {
    const std::string key = cls_.restriction_key(c);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    int result;
    if (cls_.is_empty(c)) {
      result = -1;
    } else {
      result = 0;
      const std::uint64_t n = cls_.instance()->example_count;
      for (ExampleId x = 0; x < n; ++x) {
        if (c.label_of(x)) continue;  // a known example can always be answered safely
        const int w = example_value(c, x, result);
        result = std::max(result, w);
      }
    }
    memo_.emplace(key, result);
    return result;
  }

  /// min over legal pairs of the mistake-forcing value when the environment
  /// presents x. `floor` allows pruning: values <= floor are reported as some
  /// number <= floor but not necessarily exactly.
  int example_value(const ConstraintSet& c, ExampleId x, int floor = -1) {
    // Cheap pass first: a pair with no disagreeing response is a safe answer
    // and settles the min at 0 without any recursion.
    std::vector<std::vector<Response>> responses;
    responses.reserve(c.labels().size());
    for (const auto& [xhat, yhat] : c.labels()) {
      responses.push_back(cls_.feasible_responses(c, x, xhat, yhat));
      if (responses.back().empty()) return 0;
    }
    int worst = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < responses.size(); ++i) {
      const auto& [xhat, yhat] = c.labels()[i];
      int best = -1;
      for (const Response& r : responses[i]) {
        best = std::max(best, value(child(c, x, xhat, r)));
      }
      worst = std::min(worst, 1 + best);
      if (worst <= floor) break;
    }
    return worst;
  }

  /// max over feasible responses (y, phi) of the value after restricting by
  /// the round; -1 when the pair admits no disagreement (a safe answer).
  int pair_value(const ConstraintSet& c, ExampleId x, ExampleId xhat, Label yhat) {
    int best = -1;
    for (const Response& r : cls_.feasible_responses(c, x, xhat, yhat)) {
      best = std::max(best, value(child(c, x, xhat, r)));
    }
    return best;
  }

  static ConstraintSet child(const ConstraintSet& c, ExampleId x, ExampleId xhat,
                             const Response& r) {
    return c.with_label(x, r.y).with_feedback(x, xhat, r.phi);
  }

  /// A witness tree of height exactly value(c). Maximizing choices are
  /// materialized; ties break toward the smallest identifiers.
  DffTree witness(const ConstraintSet& c) {
    const int v = value(c);
    if (v < 0) throw OracleError("no consistent teacher: no witness tree exists");
    DffTree tree;
    tree.nodes.push_back(DffTree::Node{});
    build(tree, 0, c, v);
    return tree;
  }

  const TeacherClass& cls() const { return cls_; }

 private:
  void build(DffTree& tree, std::size_t node, const ConstraintSet& c, int target) {
    if (target == 0) return;  // leaf: x stays absent
    const std::uint64_t n = cls_.instance()->example_count;
    ExampleId chosen = 0;
    bool found = false;
    for (ExampleId x = 0; x < n && !found; ++x) {
      if (c.label_of(x)) continue;
      if (example_value(c, x) >= target) {
        chosen = x;
        found = true;
      }
    }
    if (!found) throw Error("witness extraction lost the game value");
    tree.nodes[node].x = chosen;
    // one child per legal pair, carrying a response that keeps the value
    const auto pairs = c.labels();
    for (const auto& [xhat, yhat] : pairs) {
      const auto responses = cls_.feasible_responses(c, chosen, xhat, yhat);
      const Response* pick = nullptr;
      int pick_value = -1;
      for (const Response& r : responses) {
        const int cv = value(child(c, chosen, xhat, r));
        if (cv > pick_value) {
          pick_value = cv;
          pick = &r;
        }
      }
      if (pick == nullptr || pick_value < target - 1) {
        throw Error("witness extraction lost the game value");
      }
      DffTree::Node kid;
      kid.y = pick->y;
      kid.phi = pick->phi;
      tree.nodes.push_back(kid);
      const std::size_t kid_idx = tree.nodes.size() - 1;
      tree.nodes[node].edges.push_back({{xhat, yhat}, kid_idx});
      build(tree, kid_idx, child(c, chosen, xhat, *pick), target - 1);
    }
  }

  const TeacherClass& cls_;
  std::unordered_map<std::string, int> memo_;
};

/// The optimal deterministic mistake bound of (class, history): the maximal
/// height of a shattered interaction tree. -1 when no member is consistent
/// with the history (or the class is empty); with strict=true an inconsistent
/// history on a non-empty class throws instead.
inline int dff_dim(const TeacherClass& cls, const History& history, bool strict = false) {
  if (history.empty()) throw ParameterError("history must be non-empty");
  const ConstraintSet c = ConstraintSet::from_history(history);
  if (strict && cls.is_empty(c) && !cls.is_empty(ConstraintSet{})) {
    throw OracleError("history is inconsistent with every teacher in the class");
  }
  DimSolver solver(cls);
  return solver.value(c);
}

inline DffTree witness_tree(const TeacherClass& cls, const History& history) {
  if (history.empty()) throw ParameterError("history must be non-empty");
  DimSolver solver(cls);
  return solver.witness(ConstraintSet::from_history(history));
}

struct VerifyResult {
  bool ok = true;
  int violated_property = 0;  // 1..4 per the shattering conditions, 0 = structural
  std::string detail;
};

/// Checks the four shattering conditions of a tree against (class, history):
/// (1) every response label differs from the predicted label, (2) outgoing
/// edges are exactly the history plus the path's labeled examples, (3) every
/// root-to-leaf path is consistent with a member teacher consistent with the
/// history, (4) all paths have equal length. Structural node rules are
/// checked first.
inline VerifyResult verify_shattered(const DffTree& tree, const TeacherClass& cls,
                                     const History& history) {
  auto fail = [](int prop, std::string detail) {
    return VerifyResult{false, prop, std::move(detail)};
  };
  if (tree.empty()) return fail(0, "empty tree");
  if (tree.nodes[0].y || tree.nodes[0].phi) return fail(0, "root must carry no feedback");

  struct Item {
    std::size_t node;
    ConstraintSet constraints;  // history + labeled examples + feedbacks on the path
    int depth;
  };
  std::vector<Item> stack;
  stack.push_back({0, ConstraintSet::from_history(history), 0});
  std::optional<int> leaf_depth;

  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    const DffTree::Node& node = tree.nodes[item.node];
    const bool is_leaf = node.edges.empty();
    if (node.x.has_value() == is_leaf) {
      return fail(0, "a node carries an example iff it is not a leaf");
    }
    if (is_leaf) {
      if (cls.is_empty(item.constraints)) {
        return fail(3, "a root-to-leaf path is consistent with no teacher");
      }
      if (leaf_depth && *leaf_depth != item.depth) return fail(4, "tree is not complete");
      leaf_depth = item.depth;
      continue;
    }
    // property 2: edges are exactly the legal pairs at this node
    std::set<std::pair<ExampleId, Label>> expect(item.constraints.labels().begin(),
                                                 item.constraints.labels().end());
    std::set<std::pair<ExampleId, Label>> got;
    for (const auto& [label, child] : node.edges) {
      if (!got.insert(label).second) return fail(0, "duplicate outgoing edge");
    }
    if (got != expect) return fail(2, "outgoing edges differ from the legal explanation pairs");

    for (const auto& [edge, child_idx] : node.edges) {
      const auto& [xhat, yhat] = edge;
      const DffTree::Node& child = tree.nodes[child_idx];
      if (!child.y) return fail(0, "non-root node without a response label");
      if (*child.y != yhat) {
        if (!child.phi) return fail(0, "mistake response without a feature");
      }
      if (*child.y == yhat) return fail(1, "response label equals the predicted label");
      ConstraintSet next = item.constraints;
      next.add_label(*node.x, *child.y);
      if (*child.y != yhat && child.phi) next.add_feedback(*node.x, xhat, *child.phi);
      stack.push_back({child_idx, std::move(next), item.depth + 1});
    }
  }
  return VerifyResult{};
}

/// A finite multiclass hypothesis class.
struct HypothesisClass {
  std::uint64_t example_count = 0;
  Label label_count = 0;
  std::vector<std::vector<Label>> functions;  // duplicate-free rows

  void dedup() {
    std::sort(functions.begin(), functions.end());
    functions.erase(std::unique(functions.begin(), functions.end()), functions.end());
  }
  friend bool operator==(const HypothesisClass&, const HypothesisClass&) = default;
};

namespace detail {

inline int ldim_rec(const HypothesisClass& f, std::vector<std::uint32_t> alive,
                    std::map<std::vector<std::uint32_t>, int>& memo) {
  if (alive.empty()) return -1;
  if (alive.size() == 1) return 0;
  if (auto it = memo.find(alive); it != memo.end()) return it->second;
  int best = 0;
  for (ExampleId x = 0; x < f.example_count; ++x) {
    // split the survivors by their label on x
    std::map<Label, std::vector<std::uint32_t>> by_label;
    for (auto i : alive) by_label[f.functions[i][x]].push_back(i);
    if (by_label.size() < 2) continue;
    for (auto it1 = by_label.begin(); it1 != by_label.end(); ++it1) {
      for (auto it2 = std::next(it1); it2 != by_label.end(); ++it2) {
        const int v1 = ldim_rec(f, it1->second, memo);
        const int v2 = ldim_rec(f, it2->second, memo);
        best = std::max(best, 1 + std::min(v1, v2));
      }
    }
  }
  memo.emplace(std::move(alive), best);
  return best;
}

}  // namespace detail

/// Multiclass Littlestone dimension, by the standard shattered-binary-tree
/// recursion: an adversary picks an example and two labels, each answered by
/// a surviving sub-class.
inline int littlestone_dim(const HypothesisClass& f) {
  std::vector<std::uint32_t> alive(f.functions.size());
  for (std::uint32_t i = 0; i < alive.size(); ++i) alive[i] = i;
  std::map<std::vector<std::uint32_t>, int> memo;
  return detail::ldim_rec(f, std::move(alive), memo);
}

}  // namespace dff
