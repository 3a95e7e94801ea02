#pragma once

#include <random>
#include <vector>

#include "dff/dimensions.hpp"
#include "dff/teacher_class.hpp"
#include "dff/types.hpp"

namespace dff::testing {

// Two examples a=0, b=1; labels {0,1}; all indicator/co-indicator features:
// {} , {a}, {b}, {a,b}.
inline Instance two_point_instance() {
  Instance inst;
  inst.example_count = 2;
  inst.label_count = 2;
  inst.features = {indicator({}), indicator({0}), indicator({1}), indicator({0, 1})};
  return inst;
}

// T1: a -> 0, b -> 1 with psi(b,a)=I{b}, psi(a,b)=I{a}.
inline Teacher teacher_t1() {
  const Instance inst = two_point_instance();
  Teacher t;
  t.labels = {0, 1};
  t.feedback = {-1, static_cast<std::int32_t>(*inst.feature_id(indicator({0}))),
                static_cast<std::int32_t>(*inst.feature_id(indicator({1}))), -1};
  return t;
}

// T2: constant 0. All feedback entries none.
inline Teacher teacher_t2() {
  Teacher t;
  t.labels = {0, 0};
  t.feedback = {-1, -1, -1, -1};
  return t;
}

inline ExtensionalClass e1_class() {
  return make_extensional(two_point_instance(), {teacher_t1(), teacher_t2()});
}

inline History e1_history() { return History({{0, 0}}); }

// A small instance with every subset of examples as a feature (trivially
// closed under negation), so every differing-label pair can be discriminated.
inline Instance full_feature_instance(std::uint64_t examples, Label labels) {
  Instance inst;
  inst.example_count = examples;
  inst.label_count = labels;
  for (std::uint64_t mask = 0; mask < (1ull << examples); ++mask) {
    std::vector<ExampleId> members;
    for (ExampleId x = 0; x < examples; ++x) {
      if (mask & (1ull << x)) members.push_back(x);
    }
    inst.features.push_back(Feature(std::move(members)));
  }
  return inst;
}

inline Teacher random_teacher(const Instance& inst, std::mt19937_64& rng) {
  const std::uint64_t n = inst.example_count;
  Teacher t;
  for (ExampleId x = 0; x < n; ++x) {
    t.labels.push_back(static_cast<Label>(rng() % inst.label_count));
  }
  t.feedback.assign(n * n, -1);
  for (ExampleId x = 0; x < n; ++x) {
    for (ExampleId xh = 0; xh < n; ++xh) {
      if (t.labels[x] == t.labels[xh]) continue;
      std::vector<std::int32_t> ok;
      for (std::size_t i = 0; i < inst.features.size(); ++i) {
        if (inst.features[i].eval(x) && !inst.features[i].eval(xh)) {
          ok.push_back(static_cast<std::int32_t>(i));
        }
      }
      t.feedback[x * n + xh] = ok[rng() % ok.size()];
    }
  }
  return t;
}

// Random extensional class plus a consistent non-empty history.
inline std::pair<ExtensionalClass, History> random_class_with_history(std::mt19937_64& rng,
                                                                      std::uint64_t max_examples = 4,
                                                                      Label max_labels = 3,
                                                                      std::size_t max_teachers = 8) {
  const std::uint64_t n = 2 + rng() % (max_examples - 1);
  const Label labels = 2 + static_cast<Label>(rng() % (max_labels - 1));
  Instance inst = full_feature_instance(n, labels);
  std::vector<Teacher> teachers;
  const std::size_t count = 1 + rng() % max_teachers;
  for (std::size_t i = 0; i < count; ++i) teachers.push_back(random_teacher(inst, rng));
  ExtensionalClass cls(std::move(inst), std::move(teachers));
  const Teacher& anchor = cls.teachers()[rng() % cls.teachers().size()];
  History h;
  const std::size_t hist_size = 1 + rng() % n;
  for (std::size_t i = 0; i < hist_size; ++i) {
    const ExampleId x = rng() % n;
    h.add(x, anchor.label(x));
  }
  return {std::move(cls), std::move(h)};
}

inline HypothesisClass random_hypothesis_class(std::mt19937_64& rng, std::uint64_t max_examples = 4,
                                               Label max_labels = 3, std::size_t max_functions = 12) {
  HypothesisClass f;
  f.example_count = 1 + rng() % max_examples;
  f.label_count = 2 + static_cast<Label>(rng() % (max_labels - 1));
  const std::size_t count = 1 + rng() % max_functions;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Label> row;
    for (ExampleId x = 0; x < f.example_count; ++x) {
      row.push_back(static_cast<Label>(rng() % f.label_count));
    }
    f.functions.push_back(std::move(row));
  }
  f.dedup();
  return f;
}

}  // namespace dff::testing
