#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "dff/teacher_class.hpp"
#include "dff/types.hpp"

namespace dff {

/// Parameters of the relaxed component model over X = {0,1}^coords with the
/// 2*coords coordinate features. Labels are 0..nonzero_labels; label 0 is
/// reserved for examples covered by no conjunction.
struct ComponentParams {
  int coords = 2;          // n: example ids are the 2^n bit patterns
  Label nonzero_labels = 1;  // L
  int max_rules = 1;       // R: number of conjunction sets
  int max_conj = 1;        // M: features per set
};

/// X = {0,1}^coords with the coordinate features f_j (id 2j) and their
/// negations (id 2j+1).
inline Instance coordinate_instance(int coords, Label label_count) {
  Instance inst;
  inst.example_count = 1ull << coords;
  inst.label_count = label_count;
  for (int j = 0; j < coords; ++j) {
    std::vector<ExampleId> pos, neg;
    for (ExampleId x = 0; x < inst.example_count; ++x) {
      ((x >> j) & 1 ? pos : neg).push_back(x);
    }
    inst.features.push_back(Feature(std::move(pos)));
    inst.features.push_back(Feature(std::move(neg)));
  }
  inst.validate();
  return inst;
}

/// The union over all (S, q) of the teachers whose labeling is l_{S,q} and
/// whose feedback obeys the primary-conjunction rule. Enumerates the (S, q)
/// structures explicitly; the per-example choice of primary conjunction stays
/// symbolic, so feasibility queries reduce to non-empty candidate sets.
class ComponentClass final : public TeacherClass {
 public:
  explicit ComponentClass(const ComponentParams& params) : params_(params) {
    if (params.coords < 1 || params.coords > 6 || params.nonzero_labels < 1 ||
        params.max_rules < 1 || params.max_rules > 2 || params.max_conj < 1 ||
        params.max_conj > 2) {
      throw ParameterError("component class supports coords <= 6 and R, M <= 2");
    }
    build_instance();
    build_bases();
  }

  const Instance* instance() const override { return &inst_; }
  const ComponentParams& params() const { return params_; }

  /// One (S, q) structure: concrete labeling plus, per non-zero example, the
  /// set of conjunctions that may serve as its primary one.
  struct Base {
    std::vector<std::vector<std::int32_t>> sets;  // feature ids, sorted
    std::vector<Label> set_labels;
    std::vector<Label> labeling;                 // per example
    std::vector<std::uint8_t> candidates;        // per example, bitmask over sets
  };

  const std::vector<Base>& bases() const { return bases_; }

  std::vector<std::vector<Label>> labelings() const override {
    std::set<std::vector<Label>> distinct;
    for (const auto& b : bases_) distinct.insert(b.labeling);
    return {distinct.begin(), distinct.end()};
  }

  /// Remaining primary-conjunction choices per example after imposing the
  /// constraints; nullopt when the base is ruled out entirely.
  std::optional<std::vector<std::uint8_t>> restrict_base(const Base& b,
                                                         const ConstraintSet& c) const {
    for (const auto& [x, y] : c.labels()) {
      if (b.labeling[x] != y) return std::nullopt;
    }
    std::vector<std::uint8_t> masks = b.candidates;
    for (const auto& e : c.feedbacks()) {
      auto phi_id = inst_.feature_id(e.phi);
      if (!phi_id) return std::nullopt;  // feedback values live in the feature pool
      const auto id = static_cast<std::int32_t>(*phi_id);
      const Label lx = b.labeling[e.x];
      const Label lxh = b.labeling[e.xhat];
      if (lx == lxh) continue;  // unconstrained on equal labels
      if (lxh != 0) {
        // phi must hold for x and its negation must sit in the explanation's
        // primary conjunction
        if (!feature_holds(id, e.x)) return std::nullopt;
        masks[e.xhat] &= set_mask_containing(b, negated(id));
        if (masks[e.xhat] == 0) return std::nullopt;
      } else {
        // phi comes from x's own primary conjunction and must fail for xhat
        if (feature_holds(id, e.xhat)) return std::nullopt;
        masks[e.x] &= set_mask_containing(b, id);
        if (masks[e.x] == 0) return std::nullopt;
      }
    }
    return masks;
  }

  std::size_t min_exceptions(const Transcript& t) const override {
    if (bases_.empty()) throw OracleError("empty teacher class");
    std::size_t best = t.rounds.size() + 1;
    bool any = false;
    for (const auto& b : bases_) {
      bool in_pool = true;
      for (const auto& [x, y] : t.initial_history.entries()) {
        if (b.labeling[x] != y) in_pool = false;
      }
      if (!in_pool) continue;  // the reference teacher must honor the history
      any = true;
      best = std::min(best, base_min_exceptions(b, t));
    }
    if (!any) throw OracleError("no teacher is consistent with the transcript's history");
    return best;
  }

  /// One concrete member teacher of the given structure: lowest-index primary
  /// conjunction per example, first allowed feature per differing-label pair.
  Teacher canonical_teacher(const Base& b) const {
    const std::uint64_t n = inst_.example_count;
    std::vector<std::size_t> primary(n, 0);
    for (ExampleId x = 0; x < n; ++x) {
      if (b.labeling[x] == 0) continue;
      while ((b.candidates[x] & (1u << primary[x])) == 0) ++primary[x];
    }
    Teacher t;
    t.labels = b.labeling;
    t.feedback.assign(n * n, -1);
    for (ExampleId x = 0; x < n; ++x) {
      for (ExampleId xh = 0; xh < n; ++xh) {
        if (b.labeling[x] == b.labeling[xh]) continue;
        std::int32_t chosen = -1;
        if (b.labeling[xh] != 0) {
          for (std::int32_t fid : b.sets[primary[xh]]) {
            if (feature_holds(negated(fid), x)) {
              chosen = negated(fid);
              break;
            }
          }
        } else {
          for (std::int32_t fid : b.sets[primary[x]]) {
            if (!feature_holds(fid, xh)) {
              chosen = fid;
              break;
            }
          }
        }
        if (chosen < 0) throw Error("component structure admits no feedback for a pair");
        t.feedback[x * n + xh] = chosen;
      }
    }
    return t;
  }

  /// Game-state key: the label set plus every surviving (S, q) structure with
  /// its filtered primary-candidate masks. States reached through different
  /// but equivalent feedback sequences collapse onto one entry.
  std::string restriction_key(const ConstraintSet& c) const override {
    std::ostringstream os;
    for (const auto& [x, y] : c.labels()) os << x << ':' << y << ';';
    os << '|';
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      auto masks = restrict_base(bases_[i], c);
      if (!masks) continue;
      os << i;
      for (ExampleId x = 0; x < inst_.example_count; ++x) {
        if ((*masks)[x] != bases_[i].candidates[x]) {
          os << ':' << x << '.' << static_cast<int>((*masks)[x]);
        }
      }
      os << ',';
    }
    return os.str();
  }

 protected:
  bool is_empty_impl(const ConstraintSet& c) const override {
    for (const auto& b : bases_) {
      if (restrict_base(b, c)) return false;
    }
    return true;
  }

  std::vector<Response> feasible_responses_impl(const ConstraintSet& c, ExampleId x,
                                                ExampleId xhat, Label yhat) const override {
    std::set<Response> out;
    for (const auto& b : bases_) {
      auto masks = restrict_base(b, c);
      if (!masks) continue;
      const Label y = b.labeling[x];
      if (y == yhat) continue;
      const Label lxh = b.labeling[xhat];
      if (lxh != 0) {
        for (std::size_t j = 0; j < b.sets.size(); ++j) {
          if (((*masks)[xhat] & (1u << j)) == 0) continue;
          for (std::int32_t fid : b.sets[j]) {
            const std::int32_t phi = negated(fid);
            if (feature_holds(phi, x)) out.insert(Response{y, inst_.features[phi]});
          }
        }
      } else {
        for (std::size_t j = 0; j < b.sets.size(); ++j) {
          if (((*masks)[x] & (1u << j)) == 0) continue;
          for (std::int32_t phi : b.sets[j]) {
            if (!feature_holds(phi, xhat)) out.insert(Response{y, inst_.features[phi]});
          }
        }
      }
    }
    return {out.begin(), out.end()};
  }

 private:
  // feature ids: 2j = coordinate j positive, 2j+1 = its negation
  static std::int32_t negated(std::int32_t id) { return id ^ 1; }

  bool feature_holds(std::int32_t id, ExampleId x) const {
    const int coord = id / 2;
    const bool bit = (x >> coord) & 1;
    return (id % 2 == 0) ? bit : !bit;
  }

  std::uint8_t set_mask_containing(const Base& b, std::int32_t fid) const {
    std::uint8_t mask = 0;
    for (std::size_t j = 0; j < b.sets.size(); ++j) {
      if (std::binary_search(b.sets[j].begin(), b.sets[j].end(), fid)) mask |= (1u << j);
    }
    return mask;
  }

  void build_instance() {
    inst_ = coordinate_instance(params_.coords, params_.nonzero_labels + 1);
  }

  void build_bases() {
    const int feature_count = 2 * params_.coords;
    // all non-empty conjunction sets of size <= M
    std::vector<std::vector<std::int32_t>> sets;
    for (std::int32_t a = 0; a < feature_count; ++a) {
      sets.push_back({a});
      if (params_.max_conj >= 2) {
        for (std::int32_t b = a + 1; b < feature_count; ++b) sets.push_back({a, b});
      }
    }
    // collections of 1..R distinct sets with a non-zero label each
    std::vector<std::vector<std::size_t>> collections;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      collections.push_back({i});
      if (params_.max_rules >= 2) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) collections.push_back({i, j});
      }
    }
    for (const auto& coll : collections) {
      std::vector<Label> labels(coll.size(), 1);
      while (true) {
        if (auto base = try_base(sets, coll, labels)) bases_.push_back(std::move(*base));
        // next label assignment
        std::size_t k = 0;
        while (k < labels.size() && ++labels[k] > params_.nonzero_labels) labels[k++] = 1;
        if (k == labels.size()) break;
      }
    }
    if (bases_.empty()) throw ParameterError("component class came out empty");
  }

  std::optional<Base> try_base(const std::vector<std::vector<std::int32_t>>& sets,
                               const std::vector<std::size_t>& coll,
                               const std::vector<Label>& labels) const {
    Base b;
    for (std::size_t j = 0; j < coll.size(); ++j) {
      b.sets.push_back(sets[coll[j]]);
      b.set_labels.push_back(labels[j]);
    }
    const std::uint64_t n = 1ull << params_.coords;
    b.labeling.assign(n, 0);
    b.candidates.assign(n, 0);
    for (ExampleId x = 0; x < n; ++x) {
      Label found = 0;
      std::uint8_t mask = 0;
      for (std::size_t j = 0; j < b.sets.size(); ++j) {
        bool sat = true;
        for (std::int32_t fid : b.sets[j]) {
          if (!feature_holds(fid, x)) {
            sat = false;
            break;
          }
        }
        if (!sat) continue;
        if (found != 0 && found != b.set_labels[j]) return std::nullopt;  // labeling undefined
        found = b.set_labels[j];
        mask |= (1u << j);
      }
      b.labeling[x] = found;
      b.candidates[x] = mask;
    }
    return b;
  }

  /// Exact minimum over this base's teachers: rounds with a wrong label are
  /// always exceptions; feedback violations decompose per constrained example
  /// (each example's primary conjunction is chosen to maximize matches), with
  /// repeated pairs sharing one feedback value.
  std::size_t base_min_exceptions(const Base& b, const Transcript& t) const {
    std::size_t exceptions = 0;
    // per-round feedback code: -1 = no feature, -2 = feature outside the
    // pool (matches no teacher), >= 0 = pool id
    auto code_of = [this](const Round& r) -> std::int64_t {
      if (!r.feature) return -1;
      auto id = inst_.feature_id(*r.feature);
      return id ? static_cast<std::int64_t>(*id) : -2;
    };
    struct PairData {
      ExampleId x;
      ExampleId xhat;
      ExampleId owner;          // example whose primary conjunction is constrained
      bool owner_is_xhat;
      std::vector<std::int64_t> codes;  // per round on this pair
    };
    std::map<std::pair<ExampleId, ExampleId>, PairData> pairs;
    // pairs the structure labels equally: psi is one free value, absent or
    // any pool feature, shared across the pair's rounds
    std::map<std::pair<ExampleId, ExampleId>, std::vector<std::int64_t>> free_pairs;
    for (const Round& r : t.rounds) {
      if (b.labeling[r.x] != r.truth) {
        ++exceptions;
        continue;
      }
      if (!r.mistake()) continue;
      const Label lx = b.labeling[r.x];
      const Label lxh = b.labeling[r.explanation];
      if (lx == lxh) {
        free_pairs[{r.x, r.explanation}].push_back(code_of(r));
        continue;
      }
      auto& pd = pairs[{r.x, r.explanation}];
      pd.x = r.x;
      pd.xhat = r.explanation;
      pd.owner = lxh != 0 ? r.explanation : r.x;
      pd.owner_is_xhat = lxh != 0;
      pd.codes.push_back(code_of(r));
    }
    for (const auto& [key, codes] : free_pairs) {
      std::map<std::int64_t, std::size_t> counts;
      for (auto c : codes) {
        if (c != -2) ++counts[c];
      }
      std::size_t best = 0;
      for (const auto& [id, c] : counts) best = std::max(best, c);
      exceptions += codes.size() - best;
    }
    // constrained pairs: group by owning example, choose its primary set
    std::map<ExampleId, std::vector<const PairData*>> by_owner;
    for (const auto& [key, pd] : pairs) by_owner[pd.owner].push_back(&pd);
    for (const auto& [owner, pds] : by_owner) {
      std::size_t best_bad = std::numeric_limits<std::size_t>::max();
      for (std::size_t j = 0; j < b.sets.size(); ++j) {
        if ((b.candidates[owner] & (1u << j)) == 0) continue;
        std::size_t bad = 0;
        for (const PairData* pd : pds) {
          // one value per pair: count the most frequent allowed value
          std::map<std::int64_t, std::size_t> counts;
          for (auto c : pd->codes) {
            if (c < 0) continue;  // differing labels demand a pool feature
            const auto id = static_cast<std::int32_t>(c);
            bool allowed;
            if (pd->owner_is_xhat) {
              // phi in F(x), negation in the explanation's primary set
              allowed = feature_holds(id, pd->x) &&
                        std::binary_search(b.sets[j].begin(), b.sets[j].end(), negated(id));
            } else {
              // phi in x's primary set, failing for the explanation
              allowed = !feature_holds(id, pd->xhat) &&
                        std::binary_search(b.sets[j].begin(), b.sets[j].end(), id);
            }
            if (allowed) ++counts[c];
          }
          std::size_t best = 0;
          for (const auto& [id, c] : counts) best = std::max(best, c);
          bad += pd->codes.size() - best;
        }
        best_bad = std::min(best_bad, bad);
      }
      if (best_bad == std::numeric_limits<std::size_t>::max()) best_bad = 0;  // no candidates: unreachable
      exceptions += best_bad;
    }
    return exceptions;
  }

  ComponentParams params_;
  Instance inst_;
  std::vector<Base> bases_;
};

inline ComponentClass make_component_class(const ComponentParams& params) {
  return ComponentClass(params);
}

}  // namespace dff
