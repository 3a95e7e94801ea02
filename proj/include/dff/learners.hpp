#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dff/component_class.hpp"
#include "dff/dimensions.hpp"
#include "dff/protocol.hpp"
#include "dff/teacher_class.hpp"

namespace dff {

/// The answer SOA gives for x at a given game state: among the legal pairs,
/// the one whose worst feasible teacher response leaves the smallest
/// dimension. A pair with no feasible disagreement is a guaranteed-correct
/// answer and ranks below everything; ties break toward smaller identifiers.
inline Prediction soa_choice(DimSolver& solver, const ConstraintSet& state, ExampleId x) {
  std::optional<Prediction> best;
  int best_rank = 0;
  for (const auto& [xhat, yhat] : state.labels()) {
    const int rank = solver.pair_value(state, x, xhat, yhat);  // -1 = safe
    if (!best || rank < best_rank) {
      best = Prediction{xhat, yhat};
      best_rank = rank;
    }
    if (best_rank < 0) break;
  }
  if (!best) throw ParameterError("no legal explanation pair");
  return *best;
}

/// The standard optimal algorithm: the version space is a constraint set,
/// shrunk by every observation, and predictions follow soa_choice.
class SoaDff final : public Learner {
 public:
  SoaDff(const TeacherClass& cls, History history, std::shared_ptr<DimSolver> solver = nullptr)
      : cls_(cls),
        solver_(solver ? std::move(solver) : std::make_shared<DimSolver>(cls)),
        initial_(ConstraintSet::from_history(history)),
        state_(initial_) {
    if (history.empty()) throw ParameterError("history must be non-empty");
  }

  void reset() override { state_ = initial_; }

  Prediction predict(ExampleId x) const override {
    if (cls_.is_empty(state_)) {
      throw EmptyVersionSpaceError("no teacher is consistent with the observations");
    }
    return soa_choice(*solver_, state_, x);
  }

  void observe(ExampleId x, const Prediction& made, Label truth,
               const std::optional<Feature>& phi) override {
    state_.add_label(x, truth);
    if (truth != made.label) {
      if (!phi) throw ProtocolError("mistake round without a feature");
      state_.add_feedback(x, made.explanation, *phi);
    }
  }

  const ConstraintSet& state() const { return state_; }
  const std::shared_ptr<DimSolver>& solver() const { return solver_; }

  /// Dimension of the current version space with the running history.
  int current_dim() const { return solver_->value(state_); }

 private:
  const TeacherClass& cls_;
  std::shared_ptr<DimSolver> solver_;
  ConstraintSet initial_;
  ConstraintSet state_;
};

/// Generic agnostic wrapper: run any base learner and re-initialize it after
/// mistake_bound + 1 mistakes. A base that cannot answer at all (its version
/// space died on inconsistent feedback) is re-initialized as well before
/// predicting.
class Gaa final : public Learner {
 public:
  Gaa(std::function<std::unique_ptr<Learner>()> factory, int mistake_bound)
      : factory_(std::move(factory)), bound_(mistake_bound), base_(factory_()) {}

  void reset() override {
    base_ = factory_();
    mistakes_ = 0;
    restarts_ = 0;
  }

  Prediction predict(ExampleId x) const override {
    revive(x);
    return base_->predict(x);
  }

  std::vector<std::pair<Prediction, double>> predict_distribution(ExampleId x) const override {
    revive(x);
    return base_->predict_distribution(x);
  }

  void observe(ExampleId x, const Prediction& made, Label truth,
               const std::optional<Feature>& phi) override {
    base_->observe(x, made, truth, phi);
    if (truth != made.label) ++mistakes_;
    if (mistakes_ == bound_ + 1) restart();
  }

  std::size_t restarts() const { return restarts_; }
  int mistake_bound() const { return bound_; }

 private:
  void restart() const {
    base_ = factory_();
    mistakes_ = 0;
    ++restarts_;
  }

  void revive(ExampleId x) const {
    try {
      (void)base_->predict(x);
    } catch (const EmptyVersionSpaceError&) {
      restart();
    }
  }

  std::function<std::unique_ptr<Learner>()> factory_;
  int bound_;
  mutable std::unique_ptr<Learner> base_;
  mutable int mistakes_ = 0;
  mutable std::size_t restarts_ = 0;
};

/// The agnostic standard optimal algorithm is exactly the generic wrapper
/// around SOA with the dimension as the restart bound. Restarts use the
/// original class and history.
inline Gaa a_soa_dff(const TeacherClass& cls, const History& history,
                     std::shared_ptr<DimSolver> solver = nullptr) {
  if (!solver) solver = std::make_shared<DimSolver>(cls);
  const int d = solver->value(ConstraintSet::from_history(history));
  if (d < 0) throw OracleError("history is inconsistent with the class");
  return Gaa([&cls, history, solver] { return std::make_unique<SoaDff>(cls, history, solver); },
             d);
}

/// The component-model learner: an ordered list of conjunction rules anchored
/// at observed labeled examples, with a label-0 default anchor from the
/// history. A mistake against a rule sharpens its conjunction with the negated
/// feedback; a mistake against the default opens a new rule from the feedback.
class ComponentLearner final : public Learner {
 public:
  ComponentLearner(const ComponentParams& params, History history)
      : inst_(coordinate_instance(params.coords, params.nonzero_labels + 1)) {
    for (const auto& [x, y] : history.entries()) {
      if (y == 0) {
        default_anchor_ = x;
        break;
      }
    }
    if (!default_anchor_) throw ParameterError("history must contain a label-0 example");
  }

  void reset() override { rules_.clear(); }

  Prediction predict(ExampleId x) const override {
    for (const Rule& r : rules_) {
      if (matches(r, x)) return Prediction{r.anchor, r.label};
    }
    return Prediction{*default_anchor_, 0};
  }

  void observe(ExampleId x, const Prediction& made, Label truth,
               const std::optional<Feature>& phi) override {
    if (truth == made.label) return;
    if (!phi) throw ProtocolError("mistake round without a feature");
    for (Rule& r : rules_) {
      if (matches(r, x)) {
        r.conjunction.push_back(inst_.negate(*phi));
        return;
      }
    }
    rules_.push_back(Rule{{*phi}, x, truth});
  }

  struct Rule {
    std::vector<Feature> conjunction;
    ExampleId anchor;
    Label label;
  };

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  bool matches(const Rule& r, ExampleId x) const {
    for (const Feature& f : r.conjunction) {
      if (!f.eval(x)) return false;
    }
    return true;
  }

  Instance inst_;
  std::optional<ExampleId> default_anchor_;
  std::vector<Rule> rules_;
};

/// Deterministic baseline: answer the majority label of the surviving
/// teachers among the labels it can point to, via the smallest explanation.
class GreedyBaseline final : public Learner {
 public:
  GreedyBaseline(const ExtensionalClass& cls, History history)
      : cls_(cls), initial_(ConstraintSet::from_history(history)), state_(initial_) {
    if (history.empty()) throw ParameterError("history must be non-empty");
  }

  void reset() override { state_ = initial_; }

  Prediction predict(ExampleId x) const override {
    const auto alive = cls_.survivors(state_);
    std::vector<std::size_t> votes(static_cast<std::size_t>(cls_.instance()->label_count), 0);
    for (auto i : alive) ++votes[static_cast<std::size_t>(cls_.teachers()[i].label(x))];
    const Prediction* best = nullptr;
    std::size_t best_votes = 0;
    std::vector<Prediction> pairs;
    for (const auto& [xhat, yhat] : state_.labels()) pairs.push_back({xhat, yhat});
    for (const Prediction& p : pairs) {
      const std::size_t v = votes[static_cast<std::size_t>(p.label)];
      if (best == nullptr || v > best_votes ||
          (v == best_votes && std::pair(p.label, p.explanation) <
                                  std::pair(best->label, best->explanation))) {
        best = &p;
        best_votes = v;
      }
    }
    return *best;
  }

  void observe(ExampleId x, const Prediction& made, Label truth,
               const std::optional<Feature>& phi) override {
    state_.add_label(x, truth);
    if (truth != made.label && phi) state_.add_feedback(x, made.explanation, *phi);
  }

 private:
  const ExtensionalClass& cls_;
  ConstraintSet initial_;
  ConstraintSet state_;
};

}  // namespace dff
