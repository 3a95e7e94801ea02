#pragma once

#include <algorithm>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dff/constraints.hpp"
#include "dff/protocol.hpp"
#include "dff/types.hpp"

namespace dff {

/// A disagreeing response the environment could give: a label different from
/// the prediction together with a witnessing feature.
struct Response {
  Label y = 0;
  Feature phi;
  friend bool operator==(const Response&, const Response&) = default;
  friend auto operator<=>(const Response&, const Response&) = default;
};

/// A set of teachers, queried through restriction oracles. Implementations
/// must be sound and complete: a response is reported feasible iff some member
/// teacher realizes it under the given constraints.
class TeacherClass {
 public:
  virtual ~TeacherClass() = default;

  bool is_empty(const ConstraintSet& c) const {
    if (c.contradictory()) return true;
    return is_empty_impl(c);
  }

  /// All (y, phi) with y != yhat such that restricting by the constraints plus
  /// {l(x)=y, psi(x,xhat)=phi} leaves the class non-empty. Sorted.
  std::vector<Response> feasible_responses(const ConstraintSet& c, ExampleId x, ExampleId xhat,
                                           Label yhat) const {
    if (c.contradictory()) return {};
    auto out = feasible_responses_impl(c, x, xhat, yhat);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Labels y for which the restriction plus {l(x)=y} is non-empty.
  virtual std::vector<Label> feasible_labels(const ConstraintSet& c, ExampleId x) const {
    std::vector<Label> out;
    const Instance* inst = instance();
    if (inst == nullptr) throw OracleError("feasible_labels needs a materialized instance");
    for (Label y = 0; y < inst->label_count; ++y) {
      if (!is_empty(c.with_label(x, y))) out.push_back(y);
    }
    return out;
  }

  /// Canonical key identifying the game state (restriction + history). Two
  /// constraint sets with equal keys must behave identically under all future
  /// oracle queries.
  virtual std::string restriction_key(const ConstraintSet& c) const { return c.canonical_key(); }

  /// The finite domain, or nullptr for classes over an unbounded example space.
  virtual const Instance* instance() const { return nullptr; }

  /// Number of member teachers, when the class is extensional.
  virtual std::optional<std::size_t> size() const { return std::nullopt; }

  /// All member labeling functions (duplicates included), for enumerable
  /// classes. Throws OracleError otherwise.
  virtual std::vector<std::vector<Label>> labelings() const {
    throw OracleError("class is not enumerable");
  }

  /// Minimal number of rounds that must be discounted for some member teacher
  /// to be consistent with the rest of the transcript.
  virtual std::size_t min_exceptions(const Transcript& t) const = 0;

 protected:
  virtual bool is_empty_impl(const ConstraintSet& c) const = 0;
  virtual std::vector<Response> feasible_responses_impl(const ConstraintSet& c, ExampleId x,
                                                        ExampleId xhat, Label yhat) const = 0;
};

/// Explicit list of validated teachers over a finite instance.
class ExtensionalClass final : public TeacherClass {
 public:
  ExtensionalClass(Instance inst, std::vector<Teacher> teachers)
      : inst_(std::move(inst)) {
    inst_.validate();
    for (auto& t : teachers) {
      auto violations = validate_teacher(inst_, t);
      if (!violations.empty()) {
        std::ostringstream os;
        os << "invalid teacher: " << violations.size() << " violations, first at ("
           << violations[0].x << ", " << violations[0].xhat << "): " << violations[0].clause;
        throw ParameterError(os.str());
      }
      if (std::find(teachers_.begin(), teachers_.end(), t) == teachers_.end()) {
        teachers_.push_back(std::move(t));
      }
    }
  }

  const Instance* instance() const override { return &inst_; }
  std::optional<std::size_t> size() const override { return teachers_.size(); }
  const std::vector<Teacher>& teachers() const { return teachers_; }

  std::vector<std::vector<Label>> labelings() const override {
    std::vector<std::vector<Label>> out;
    out.reserve(teachers_.size());
    for (const auto& t : teachers_) out.push_back(t.labels);
    return out;
  }

  bool satisfies(const Teacher& t, const ConstraintSet& c) const {
    for (const auto& [x, y] : c.labels()) {
      if (t.label(x) != y) return false;
    }
    for (const auto& e : c.feedbacks()) {
      const std::int32_t id = t.feedback_id(e.x, e.xhat);
      if (id < 0) return false;
      if (inst_.features[static_cast<std::size_t>(id)] != e.phi) return false;
    }
    return true;
  }

  std::vector<std::uint32_t> survivors(const ConstraintSet& c) const {
    std::vector<std::uint32_t> out;
    if (c.contradictory()) return out;
    for (std::uint32_t i = 0; i < teachers_.size(); ++i) {
      if (satisfies(teachers_[i], c)) out.push_back(i);
    }
    return out;
  }

  std::string restriction_key(const ConstraintSet& c) const override {
    // Surviving members plus the label set fully determine the game state.
    std::ostringstream os;
    for (auto i : survivors(c)) os << i << ',';
    os << '|';
    for (const auto& [x, y] : c.labels()) os << x << ':' << y << ';';
    return os.str();
  }

  std::size_t min_exceptions(const Transcript& t) const override {
    if (teachers_.empty()) throw OracleError("empty teacher class");
    std::size_t best = t.rounds.size() + 1;
    bool any = false;
    for (const auto& teacher : teachers_) {
      bool in_pool = true;
      for (const auto& [x, y] : t.initial_history.entries()) {
        if (teacher.label(x) != y) in_pool = false;
      }
      if (!in_pool) continue;  // the reference teacher must honor the history
      any = true;
      std::size_t bad = 0;
      for (const Round& r : t.rounds) {
        if (!round_consistent(teacher, r)) ++bad;
      }
      best = std::min(best, bad);
    }
    if (!any) throw OracleError("no teacher is consistent with the transcript's history");
    return best;
  }

  bool round_consistent(const Teacher& teacher, const Round& r) const {
    if (teacher.label(r.x) != r.truth) return false;
    if (r.mistake()) {
      // an absent feature matches an absent table entry (possible only when
      // the teacher considers the pair same-labeled)
      if (teacher.psi(inst_, r.x, r.explanation) != r.feature) return false;
    }
    return true;
  }

 protected:
  bool is_empty_impl(const ConstraintSet& c) const override {
    for (const auto& t : teachers_) {
      if (satisfies(t, c)) return false;
    }
    return true;
  }

  std::vector<Response> feasible_responses_impl(const ConstraintSet& c, ExampleId x,
                                                ExampleId xhat, Label yhat) const override {
    std::vector<Response> out;
    for (const auto& t : teachers_) {
      if (t.label(x) == yhat) continue;
      if (!satisfies(t, c)) continue;
      auto phi = t.psi(inst_, x, xhat);
      if (!phi) continue;  // cannot happen for valid teachers with l(xhat)=yhat
      out.push_back(Response{t.label(x), *phi});
    }
    return out;
  }

 private:
  Instance inst_;
  std::vector<Teacher> teachers_;
};

inline ExtensionalClass make_extensional(Instance inst, std::vector<Teacher> teachers) {
  return ExtensionalClass(std::move(inst), std::move(teachers));
}

}  // namespace dff
