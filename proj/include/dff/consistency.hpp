#pragma once

#include "dff/teacher_class.hpp"

namespace dff {

/// Minimal number of rounds that must be written off as exceptions for some
/// member of the class to be consistent with the rest of the transcript: a
/// round is consistent with a teacher when the teacher agrees with the true
/// label, and on mistakes also with the feedback feature.
inline std::size_t k_consistency(const Transcript& t, const TeacherClass& cls) {
  if (auto size = cls.size(); size && *size == 0) {
    throw OracleError("empty teacher class");
  }
  return cls.min_exceptions(t);
}

inline bool is_k_consistent(const Transcript& t, const TeacherClass& cls, std::size_t k) {
  return k_consistency(t, cls) <= k;
}

}  // namespace dff
