#pragma once

#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "dff/dimensions.hpp"
#include "dff/protocol.hpp"
#include "dff/types.hpp"

namespace dff {

/// Replays a fixed example sequence with feedback drawn from one teacher: the
/// true label, plus the teacher's discriminating feature on mistakes. A
/// mistaken round the teacher cannot discriminate (the learner explained with
/// a pair the teacher considers same-labeled, possible only after earlier
/// exceptions lied to it) is conceded as correct and declared an exception.
class TeacherEnvironment final : public Environment {
 public:
  TeacherEnvironment(std::function<Label(ExampleId)> label,
                     std::function<std::optional<Feature>(ExampleId, ExampleId)> psi,
                     std::vector<ExampleId> sequence)
      : label_(std::move(label)), psi_(std::move(psi)), sequence_(std::move(sequence)) {}

  TeacherEnvironment(const Instance& inst, const Teacher& teacher, std::vector<ExampleId> sequence)
      : TeacherEnvironment(
            [t = teacher](ExampleId x) { return t.label(x); },
            [t = teacher, i = inst](ExampleId x, ExampleId xh) { return t.psi(i, x, xh); },
            std::move(sequence)) {}

  std::optional<ExampleId> next_example(const Transcript& so_far) override {
    round_ = so_far.rounds.size();
    if (round_ >= sequence_.size()) return std::nullopt;
    return sequence_[round_];
  }

  EnvFeedback feedback(ExampleId x, const Prediction& pred) override {
    const Label y = label_(x);
    if (y == pred.label) return {y, std::nullopt};
    auto phi = psi_(x, pred.explanation);
    if (!phi || !phi->eval(x) || phi->eval(pred.explanation)) {
      concessions_.insert(round_);
      return {pred.label, std::nullopt};
    }
    return {y, phi};
  }

  std::vector<std::size_t> exception_rounds() const override {
    return {concessions_.begin(), concessions_.end()};
  }

 private:
  std::function<Label(ExampleId)> label_;
  std::function<std::optional<Feature>(ExampleId, ExampleId)> psi_;
  std::vector<ExampleId> sequence_;
  std::size_t round_ = 0;
  std::set<std::size_t> concessions_;
};

/// Walks a shattered tree: presents the node's example, follows the edge the
/// learner answered with, and returns that child's feedback. Forces a mistake
/// every round until the leaf.
class TreeAdversary final : public Environment {
 public:
  explicit TreeAdversary(DffTree tree) : tree_(std::move(tree)) {
    if (tree_.empty()) throw ParameterError("tree adversary needs a non-empty tree");
  }

  std::optional<ExampleId> next_example(const Transcript&) override {
    return tree_.nodes[current_].x;  // absent at leaves ends the episode
  }

  EnvFeedback feedback(ExampleId, const Prediction& pred) override {
    const auto& edges = tree_.nodes[current_].edges;
    for (const auto& [label, child] : edges) {
      if (label == std::pair{pred.explanation, pred.label}) {
        current_ = child;
        const auto& node = tree_.nodes[current_];
        if (*node.y == pred.label) return {*node.y, std::nullopt};
        return {*node.y, node.phi};
      }
    }
    throw ProtocolError("learner answered a pair with no outgoing edge");
  }

 private:
  DffTree tree_;
  std::size_t current_ = 0;
};

/// A planned substitution for one round. The label may fake correctness (then
/// no feature), or contradict the prediction (then the feature must hold for
/// the example and fail for the explanation).
struct Replacement {
  Label label = 0;
  std::optional<Feature> feature;
};

/// Wraps an environment and substitutes the feedback of the planned rounds,
/// declaring them as protocol exceptions.
class ExceptionInjector final : public Environment {
 public:
  ExceptionInjector(Environment& base, std::map<std::size_t, Replacement> plan)
      : base_(base), plan_(std::move(plan)) {}

  std::optional<ExampleId> next_example(const Transcript& so_far) override {
    round_ = so_far.rounds.size();
    return base_.next_example(so_far);
  }

  EnvFeedback feedback(ExampleId x, const Prediction& pred) override {
    EnvFeedback fb = base_.feedback(x, pred);
    auto it = plan_.find(round_);
    if (it == plan_.end()) return fb;
    const Replacement& rep = it->second;
    if (rep.label == pred.label) {
      if (rep.feature) throw ParameterError("replacement fakes correctness but carries a feature");
    } else {
      if (!rep.feature) throw ParameterError("replacement mistake without a feature");
      if (!rep.feature->eval(x) || rep.feature->eval(pred.explanation)) {
        throw ParameterError("replacement feature is not syntactically valid");
      }
    }
    injected_.insert(round_);
    return {rep.label, rep.feature};
  }

  std::vector<std::size_t> exception_rounds() const override {
    auto out = base_.exception_rounds();
    out.insert(out.end(), injected_.begin(), injected_.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  Environment& base_;
  std::map<std::size_t, Replacement> plan_;
  std::set<std::size_t> injected_;
  std::size_t round_ = 0;
};

}  // namespace dff
