#pragma once

#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dff/types.hpp"

namespace dff {

/// One broken teacher clause, named by the offending pair.
struct TeacherViolation {
  ExampleId x = 0;
  ExampleId xhat = 0;
  std::string clause;
};

/// Checks the discriminativity contract of a teacher's feedback table: on
/// every pair with differing labels a feature must be present, hold for x and
/// fail for xhat. Pairs with equal labels are unconstrained.
inline std::vector<TeacherViolation> validate_teacher(const Instance& inst, const Teacher& t) {
  const std::size_t n = inst.example_count;
  if (t.labels.size() != n) throw ParameterError("teacher labeling is not total");
  if (t.feedback.size() != n * n) throw ParameterError("teacher feedback table is not total");
  std::vector<TeacherViolation> out;
  for (ExampleId x = 0; x < n; ++x) {
    if (t.labels[x] < 0 || t.labels[x] >= inst.label_count) {
      out.push_back({x, x, "label outside the instance's label set"});
    }
    for (ExampleId xh = 0; xh < n; ++xh) {
      const std::int32_t id = t.feedback_id(x, xh);
      if (id >= 0 && static_cast<std::size_t>(id) >= inst.features.size()) {
        out.push_back({x, xh, "feedback feature outside the instance's pool"});
        continue;
      }
      if (t.labels[x] == t.labels[xh]) continue;
      if (id < 0) {
        out.push_back({x, xh, "missing feature on a pair with differing labels"});
        continue;
      }
      const Feature& phi = inst.features[static_cast<std::size_t>(id)];
      if (!phi.eval(x)) out.push_back({x, xh, "phi(x)=false"});
      if (phi.eval(xh)) out.push_back({x, xh, "phi(xhat)=true"});
    }
  }
  return out;
}

/// Explanations available after the given rounds: the history, every revealed
/// (x_s, y_s), and (x_s, yhat_s) of correct rounds (a silent teacher confirms
/// the label).
inline std::vector<std::pair<ExampleId, Label>> legal_explanations(const History& history,
                                                                   const Transcript& so_far) {
  std::set<std::pair<ExampleId, Label>> pool(history.entries().begin(), history.entries().end());
  for (const Round& r : so_far.rounds) {
    pool.insert({r.x, r.truth});
    if (!r.mistake()) pool.insert({r.x, r.predicted});
  }
  return {pool.begin(), pool.end()};
}

inline std::size_t count_mistakes(const Transcript& t) {
  std::size_t m = 0;
  for (const Round& r : t.rounds) {
    if (r.mistake()) ++m;
  }
  return m;
}

class Learner {
 public:
  virtual ~Learner() = default;

  /// Re-initialize to the construction state.
  virtual void reset() = 0;

  /// The answer for x. Must be a currently legal explanation pair. Const:
  /// probing a prediction must not advance the learner.
  virtual Prediction predict(ExampleId x) const = 0;

  /// Distribution over answers; deterministic learners are a point mass.
  virtual std::vector<std::pair<Prediction, double>> predict_distribution(ExampleId x) const {
    return {{predict(x), 1.0}};
  }

  /// Probability that this learner answers label y for x.
  double label_probability(ExampleId x, Label y) const {
    double p = 0;
    for (const auto& [pred, w] : predict_distribution(x)) {
      if (pred.label == y) p += w;
    }
    return p;
  }

  virtual void observe(ExampleId x, const Prediction& made, Label truth,
                       const std::optional<Feature>& phi) = 0;
};

class Environment {
 public:
  virtual ~Environment() = default;

  /// Next example to present, or nothing at end of sequence.
  virtual std::optional<ExampleId> next_example(const Transcript& so_far) = 0;

  /// The teacher-side response to a prediction on x. A feature is present iff
  /// the prediction was wrong.
  virtual EnvFeedback feedback(ExampleId x, const Prediction& pred) = 0;

  /// Rounds this environment has declared as protocol exceptions so far.
  virtual std::vector<std::size_t> exception_rounds() const { return {}; }
};

/// Runs the interaction loop for at most max_rounds rounds, enforcing the
/// protocol on both sides: the learner may only answer with currently legal
/// explanation pairs, and the environment's feedback must carry a feature
/// exactly on mistakes, holding for x and failing for the explanation.
inline Transcript run_episode(Learner& learner, Environment& env, const History& history,
                              std::size_t max_rounds) {
  if (history.empty()) throw ParameterError("history must be non-empty");
  Transcript t;
  t.initial_history = history;
  std::set<std::pair<ExampleId, Label>> legal(history.entries().begin(), history.entries().end());
  for (std::size_t round = 0; round < max_rounds; ++round) {
    auto x = env.next_example(t);
    if (!x) break;
    const Prediction pred = learner.predict(*x);
    if (!legal.contains({pred.explanation, pred.label})) {
      std::ostringstream os;
      os << "illegal explanation (" << pred.explanation << ", " << pred.label << ") in round "
         << round;
      throw ProtocolError(os.str());
    }
    const EnvFeedback fb = env.feedback(*x, pred);
    if ((fb.label != pred.label) != fb.feature.has_value()) {
      throw ProtocolError("feedback must carry a feature exactly on mistakes");
    }
    if (fb.feature) {
      if (!fb.feature->eval(*x)) throw ProtocolError("feedback feature does not hold for x");
      if (fb.feature->eval(pred.explanation)) {
        throw ProtocolError("feedback feature holds for the explanation");
      }
    }
    learner.observe(*x, pred, fb.label, fb.feature);
    t.rounds.push_back(Round{*x, pred.explanation, pred.label, fb.label, fb.feature});
    legal.insert({*x, fb.label});
    if (fb.label == pred.label) legal.insert({*x, pred.label});
  }
  t.exceptions = env.exception_rounds();
  return t;
}

}  // namespace dff
