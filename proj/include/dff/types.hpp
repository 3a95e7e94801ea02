#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dff {

using ExampleId = std::uint64_t;
using Label = std::int32_t;

class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad construction parameters (non-prime modulus, oversized block, ...).
class ParameterError : public Error {
  using Error::Error;
};

/// A learner or environment broke the interaction rules.
class ProtocolError : public Error {
  using Error::Error;
};

/// An oracle query that the class cannot answer (empty class, non-enumerable
/// class asked to enumerate, ...).
class OracleError : public Error {
  using Error::Error;
};

/// SOA-style learner asked to predict with no surviving teacher.
class EmptyVersionSpaceError : public Error {
  using Error::Error;
};

/// A Boolean feature, canonically represented by the sorted set of examples
/// it holds for. Two features are equal iff their truth sets are equal.
class Feature {
 public:
  Feature() = default;
  explicit Feature(std::vector<ExampleId> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  bool eval(ExampleId x) const {
    return std::binary_search(members_.begin(), members_.end(), x);
  }
  const std::vector<ExampleId>& members() const { return members_; }

  friend bool operator==(const Feature&, const Feature&) = default;
  friend auto operator<=>(const Feature&, const Feature&) = default;

 private:
  std::vector<ExampleId> members_;
};

/// Indicator feature of a finite set of examples.
inline Feature indicator(std::initializer_list<ExampleId> xs) {
  return Feature(std::vector<ExampleId>(xs));
}

/// A finite domain: examples 0..example_count-1, labels 0..label_count-1, and
/// an explicit feature pool closed under negation.
struct Instance {
  std::uint64_t example_count = 0;
  Label label_count = 0;
  std::vector<Feature> features;

  /// Complement of a feature's truth set relative to this domain.
  Feature negate(const Feature& f) const {
    std::vector<ExampleId> out;
    out.reserve(example_count - f.members().size());
    for (ExampleId x = 0; x < example_count; ++x) {
      if (!f.eval(x)) out.push_back(x);
    }
    return Feature(std::move(out));
  }

  std::optional<std::size_t> feature_id(const Feature& f) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features[i] == f) return i;
    }
    return std::nullopt;
  }

  void validate() const {
    if (example_count == 0) throw ParameterError("instance has no examples");
    if (label_count <= 0) throw ParameterError("instance has no labels");
    if (features.empty()) throw ParameterError("instance has no features");
    for (std::size_t i = 0; i < features.size(); ++i) {
      for (std::size_t j = i + 1; j < features.size(); ++j) {
        if (features[i] == features[j]) throw ParameterError("duplicate feature in instance");
      }
      for (ExampleId x : features[i].members()) {
        if (x >= example_count) throw ParameterError("feature mentions unknown example");
      }
      if (!feature_id(negate(features[i]))) {
        throw ParameterError("feature pool is not closed under negation");
      }
    }
  }
};

/// Total labeling plus total feature-feedback table over a finite instance.
/// Feedback entries index into the instance's feature pool; -1 means "no
/// feature" (allowed only when the two labels agree).
struct Teacher {
  std::vector<Label> labels;
  std::vector<std::int32_t> feedback;  // row-major, size = n*n, -1 = none

  Label label(ExampleId x) const { return labels.at(x); }

  std::int32_t feedback_id(ExampleId x, ExampleId xhat) const {
    return feedback.at(static_cast<std::size_t>(x) * labels.size() + xhat);
  }

  std::optional<Feature> psi(const Instance& inst, ExampleId x, ExampleId xhat) const {
    const std::int32_t id = feedback_id(x, xhat);
    if (id < 0) return std::nullopt;
    return inst.features.at(static_cast<std::size_t>(id));
  }

  friend bool operator==(const Teacher&, const Teacher&) = default;
  friend auto operator<=>(const Teacher&, const Teacher&) = default;
};

/// Labeled examples available as explanations, at most one label per example.
class History {
 public:
  History() = default;
  explicit History(std::vector<std::pair<ExampleId, Label>> entries) {
    for (const auto& [x, y] : entries) add(x, y);
  }

  /// Inserts (x, y). Throws if x already carries a different label.
  void add(ExampleId x, Label y) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(),
                               std::make_pair(x, std::numeric_limits<Label>::min()));
    if (it != entries_.end() && it->first == x) {
      if (it->second != y) throw ParameterError("history labels an example twice");
      return;
    }
    entries_.insert(it, {x, y});
  }

  bool contains(ExampleId x, Label y) const {
    auto l = label_of(x);
    return l && *l == y;
  }

  std::optional<Label> label_of(ExampleId x) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(),
                               std::make_pair(x, std::numeric_limits<Label>::min()));
    if (it != entries_.end() && it->first == x) return it->second;
    return std::nullopt;
  }

  const std::vector<std::pair<ExampleId, Label>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<std::pair<ExampleId, Label>> entries_;  // sorted by example id
};

/// The learner's answer in one round: "x is predicted to have `label` because
/// `explanation` was observed with that label".
struct Prediction {
  ExampleId explanation = 0;
  Label label = 0;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// The environment's answer: the true label, plus a discriminating feature
/// exactly when the prediction was wrong.
struct EnvFeedback {
  Label label = 0;
  std::optional<Feature> feature;
};

struct Round {
  ExampleId x = 0;
  ExampleId explanation = 0;
  Label predicted = 0;
  Label truth = 0;
  std::optional<Feature> feature;

  bool mistake() const { return predicted != truth; }
};

struct Transcript {
  History initial_history;
  std::vector<Round> rounds;
  std::vector<std::size_t> exceptions;  // round indices declared by the environment
};

}  // namespace dff
