#pragma once

#include <utility>
#include <vector>

#include "dff/teacher_class.hpp"
#include "dff/types.hpp"

namespace dff {

/// The coordinate-dictator class at truncation width `coords`: teacher n
/// labels by the n-th bit and discriminates with that coordinate feature (or
/// its negation), staying silent when the bits agree. The history labels the
/// all-zeros and all-ones vectors. Dimension values at a finite truncation
/// lower-bound the untruncated construction.
inline std::pair<ExtensionalClass, History> make_separation_class(int coords, int teacher_count) {
  if (coords < 1 || coords > 16) throw ParameterError("separation class needs 1 <= coords <= 16");
  if (teacher_count < 1 || teacher_count > coords) {
    throw ParameterError("separation class needs 1 <= teachers <= coords");
  }
  Instance inst;
  inst.example_count = 1ull << coords;
  inst.label_count = 2;
  for (int j = 0; j < coords; ++j) {
    std::vector<ExampleId> pos, neg;
    for (ExampleId x = 0; x < inst.example_count; ++x) {
      ((x >> j) & 1 ? pos : neg).push_back(x);
    }
    inst.features.push_back(Feature(std::move(pos)));  // id 2j: coordinate j
    inst.features.push_back(Feature(std::move(neg)));  // id 2j+1: its negation
  }
  const std::uint64_t n = inst.example_count;
  std::vector<Teacher> teachers;
  for (int j = 0; j < teacher_count; ++j) {
    Teacher t;
    t.labels.resize(n);
    t.feedback.assign(n * n, -1);
    for (ExampleId x = 0; x < n; ++x) t.labels[x] = static_cast<Label>((x >> j) & 1);
    for (ExampleId x = 0; x < n; ++x) {
      for (ExampleId xh = 0; xh < n; ++xh) {
        const bool bx = (x >> j) & 1;
        const bool bxh = (xh >> j) & 1;
        if (bx && !bxh) t.feedback[x * n + xh] = 2 * j;
        if (!bx && bxh) t.feedback[x * n + xh] = 2 * j + 1;
      }
    }
    teachers.push_back(std::move(t));
  }
  History h;
  h.add(0, 0);
  h.add(n - 1, 1);
  return {make_extensional(std::move(inst), std::move(teachers)), std::move(h)};
}

}  // namespace dff
