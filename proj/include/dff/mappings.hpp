#pragma once

#include <vector>

#include "dff/dimensions.hpp"
#include "dff/teacher_class.hpp"
#include "dff/types.hpp"

namespace dff {

struct OtdResult {
  ExtensionalClass cls;
  History history;
};

/// Maps an online-learning problem to an interaction problem over a
/// star-augmented domain: one fresh anchor example per label, labeled in the
/// history; features are the singleton indicators (closed under negation);
/// every teacher always answers with the uninformative indicator of the
/// presented example.
inline OtdResult otd(const HypothesisClass& f) {
  const std::uint64_t n = f.example_count;
  const Label labels = f.label_count;
  Instance inst;
  inst.example_count = n + static_cast<std::uint64_t>(labels);
  inst.label_count = labels;
  for (ExampleId x = 0; x < inst.example_count; ++x) {
    inst.features.push_back(indicator({x}));
  }
  const std::size_t singleton_count = inst.features.size();
  for (std::size_t i = 0; i < singleton_count; ++i) {
    inst.features.push_back(inst.negate(inst.features[i]));
  }

  History h;
  for (Label y = 0; y < labels; ++y) h.add(n + static_cast<ExampleId>(y), y);

  std::vector<Teacher> teachers;
  for (const auto& fn : f.functions) {
    Teacher t;
    t.labels = fn;
    for (Label y = 0; y < labels; ++y) t.labels.push_back(y);  // star anchors
    t.feedback.assign(inst.example_count * inst.example_count, -1);
    for (ExampleId x = 0; x < inst.example_count; ++x) {
      for (ExampleId xh = 0; xh < inst.example_count; ++xh) {
        t.feedback[x * inst.example_count + xh] = static_cast<std::int32_t>(x);
      }
    }
    teachers.push_back(std::move(t));
  }
  return OtdResult{make_extensional(std::move(inst), std::move(teachers)), std::move(h)};
}

/// Maps an interaction problem back to online learning: drop the history's
/// examples from the domain and keep the member labelings, as a set.
inline HypothesisClass dto(const TeacherClass& cls, const History& history) {
  const Instance* inst = cls.instance();
  if (inst == nullptr) throw OracleError("conversion needs a materialized instance");
  std::vector<ExampleId> keep;
  for (ExampleId x = 0; x < inst->example_count; ++x) {
    if (!history.label_of(x)) keep.push_back(x);
  }
  HypothesisClass out;
  out.example_count = keep.size();
  out.label_count = inst->label_count;
  for (const auto& labeling : cls.labelings()) {
    std::vector<Label> row;
    row.reserve(keep.size());
    for (ExampleId x : keep) row.push_back(labeling[x]);
    out.functions.push_back(std::move(row));
  }
  out.dedup();
  return out;
}

}  // namespace dff
