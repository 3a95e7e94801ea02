#pragma once

#include <string>
#include <unordered_map>

#include "dff/learners.hpp"

namespace dff {

/// Exhaustive realizable adversary against SOA: from a game state, the
/// adversary may present any fresh example and answer with any response that
/// keeps some member teacher consistent, including conceding a correct round.
/// Returns the maximal number of mistakes any such play forces. Because SOA's
/// answer is a pure function of the state, the joint search memoizes on the
/// class's state key.
class ExhaustiveSoaSearch {
 public:
  explicit ExhaustiveSoaSearch(const TeacherClass& cls)
      : cls_(cls), solver_(std::make_shared<DimSolver>(cls)) {}

  int max_mistakes(const History& history) {
    return walk(ConstraintSet::from_history(history));
  }

  const std::shared_ptr<DimSolver>& solver() const { return solver_; }

 private:
  int walk(const ConstraintSet& c) {
    const std::string key = cls_.restriction_key(c);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    int best = 0;
    const std::uint64_t n = cls_.instance()->example_count;
    for (ExampleId x = 0; x < n; ++x) {
      if (c.label_of(x)) continue;
      const Prediction pred = soa_choice(*solver_, c, x);
      // conceding the round: only sound if some teacher really labels x this way
      const ConstraintSet conceded = c.with_label(x, pred.label);
      if (!cls_.is_empty(conceded)) best = std::max(best, walk(conceded));
      for (const Response& r : cls_.feasible_responses(c, x, pred.explanation, pred.label)) {
        best = std::max(best, 1 + walk(DimSolver::child(c, x, pred.explanation, r)));
      }
    }
    memo_.emplace(key, best);
    return best;
  }

  const TeacherClass& cls_;
  std::shared_ptr<DimSolver> solver_;
  std::unordered_map<std::string, int> memo_;
};

}  // namespace dff
