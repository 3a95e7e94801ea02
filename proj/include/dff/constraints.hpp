#pragma once

#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dff/types.hpp"

namespace dff {

/// A restriction of a teacher class: label constraints l(x) = y plus feedback
/// constraints psi(x, xhat) = phi. At most one constraint per example / per
/// ordered pair; conflicting additions mark the set contradictory (no teacher
/// can satisfy it). Inside the dimension game the label constraints double as
/// the running history of legal explanations.
class ConstraintSet {
 public:
  ConstraintSet() = default;

  static ConstraintSet from_history(const History& h) {
    ConstraintSet c;
    for (const auto& [x, y] : h.entries()) c.add_label(x, y);
    return c;
  }

  void add_label(ExampleId x, Label y) {
    auto it = std::lower_bound(labels_.begin(), labels_.end(),
                               std::make_pair(x, std::numeric_limits<Label>::min()));
    if (it != labels_.end() && it->first == x) {
      if (it->second != y) contradictory_ = true;
      return;
    }
    labels_.insert(it, {x, y});
  }

  void add_feedback(ExampleId x, ExampleId xhat, const Feature& phi) {
    auto key = std::make_pair(x, xhat);
    auto it = std::lower_bound(feedbacks_.begin(), feedbacks_.end(), key,
                               [](const Entry& e, const std::pair<ExampleId, ExampleId>& k) {
                                 return std::make_pair(e.x, e.xhat) < k;
                               });
    if (it != feedbacks_.end() && it->x == x && it->xhat == xhat) {
      if (it->phi != phi) contradictory_ = true;
      return;
    }
    feedbacks_.insert(it, Entry{x, xhat, phi});
  }

  ConstraintSet with_label(ExampleId x, Label y) const {
    ConstraintSet c = *this;
    c.add_label(x, y);
    return c;
  }

  ConstraintSet with_feedback(ExampleId x, ExampleId xhat, const Feature& phi) const {
    ConstraintSet c = *this;
    c.add_feedback(x, xhat, phi);
    return c;
  }

  std::optional<Label> label_of(ExampleId x) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(),
                               std::make_pair(x, std::numeric_limits<Label>::min()));
    if (it != labels_.end() && it->first == x) return it->second;
    return std::nullopt;
  }

  struct Entry {
    ExampleId x;
    ExampleId xhat;
    Feature phi;
  };

  bool contradictory() const { return contradictory_; }
  const std::vector<std::pair<ExampleId, Label>>& labels() const { return labels_; }
  const std::vector<Entry>& feedbacks() const { return feedbacks_; }

  /// Canonical text form, usable as a memo key.
  std::string canonical_key() const {
    std::ostringstream os;
    if (contradictory_) return "!";
    for (const auto& [x, y] : labels_) os << x << ':' << y << ';';
    os << '|';
    for (const auto& e : feedbacks_) {
      os << e.x << ',' << e.xhat << ':';
      for (ExampleId m : e.phi.members()) os << m << '.';
      os << ';';
    }
    return os.str();
  }

 private:
  std::vector<std::pair<ExampleId, Label>> labels_;  // sorted by example
  std::vector<Entry> feedbacks_;                     // sorted by (x, xhat)
  bool contradictory_ = false;
};

}  // namespace dff
