#pragma once

#include <cassert>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "dff/field.hpp"
#include "dff/teacher_class.hpp"

namespace dff {

/// Parameters of one block of the secret-sharing construction: examples are
/// naturals, block i is X_i = {2^i, ..., 2^(i+1)-1}, labelings are free on the
/// block (1 at x=1, 0 elsewhere), and feedback inside the block evaluates
/// per-explanation sharing polynomials over F_prime, shifted past the block.
struct SecretParams {
  int block = 2;       // i
  int degree = 2;      // d: shares needed to pin a polynomial
  std::uint64_t prime = 17;

  ExampleId block_start() const { return 1ull << block; }
  ExampleId block_end() const { return 1ull << (block + 1); }  // exclusive
  bool in_block(ExampleId x) const { return x >= block_start() && x < block_end(); }

  /// Share point of a block example, in [1, 2^i].
  std::uint64_t point(ExampleId x) const { return x - block_start() + 1; }
  ExampleId shifted_base() const { return block_end(); }
  bool in_shifted_range(ExampleId z) const {
    return z >= shifted_base() && z < shifted_base() + prime;
  }

  int labeling_bits() const { return 1 << block; }
  std::uint64_t labeling_count() const { return 1ull << labeling_bits(); }

  /// The fixed bijection between block labelings and field elements: the
  /// base-2 value of the labeling read in increasing example order.
  std::uint64_t encode(std::uint64_t f_bits) const { return f_bits; }
  std::optional<std::uint64_t> decode(std::uint64_t secret) const {
    if (secret >= labeling_count()) return std::nullopt;
    return secret;
  }

  bool bit(std::uint64_t f_bits, ExampleId x) const {
    return (f_bits >> (x - block_start())) & 1;
  }

  Label label_of(std::uint64_t f_bits, ExampleId x) const {
    if (x == 1) return 1;
    if (in_block(x)) return bit(f_bits, x) ? 1 : 0;
    return 0;
  }
};

inline SecretParams make_secret_params(int block, int degree,
                                       std::optional<std::uint64_t> prime = std::nullopt) {
  if (block < 1 || block > 5) {
    throw ParameterError("secret block index must lie in [1, 5] for 64-bit field arithmetic");
  }
  if (degree < 1) throw ParameterError("secret degree must be at least 1");
  SecretParams p;
  p.block = block;
  p.degree = degree;
  const std::uint64_t need = 1ull << (1 << block);  // 2^(2^i) labelings of the block
  p.prime = prime ? *prime : next_prime_at_least(need);
  if (!is_prime_u64(p.prime)) throw ParameterError("secret modulus is not prime");
  if (p.prime < need) throw ParameterError("secret modulus smaller than the labeling count");
  return p;
}

/// z = 2^(i+1) + P(x - 2^i + 1): the polynomial value re-encoded as an
/// example identifier outside the block.
inline ExampleId shifted_eval(const SecretParams& params, const FieldPoly& poly, ExampleId x) {
  if (!params.in_block(x)) throw ParameterError("shifted evaluation outside the block");
  if (poly.p != params.prime) throw ParameterError("polynomial over the wrong field");
  return params.shifted_base() + poly_eval(poly, params.point(x));
}

/// One member teacher, sampled as a block labeling plus lazily generated
/// sharing polynomials, one per (explanation, label) pair. Polynomials for
/// the (xhat, 0) pairs of 1-labeled explanations carry the labeling's secret.
class SecretTeacher {
 public:
  SecretTeacher(SecretParams params, std::uint64_t f_bits, std::uint64_t seed)
      : params_(params), f_bits_(f_bits & (params.labeling_count() - 1)), seed_(seed) {}

  Label label(ExampleId x) const { return params_.label_of(f_bits_, x); }
  std::uint64_t labeling_bits() const { return f_bits_; }

  /// Total feedback per the construction: a two-element indicator carrying a
  /// polynomial evaluation inside the block, the bare indicator otherwise.
  std::optional<Feature> feedback(ExampleId x, ExampleId xhat) const {
    if (!params_.in_block(x) || !params_.in_block(xhat)) return Feature({x});
    const FieldPoly& poly = poly_for(xhat, label(x));
    return Feature({x, shifted_eval(params_, poly, x)});
  }

  const FieldPoly& poly_for(ExampleId xhat, Label y) const {
    auto key = std::make_pair(xhat, y);
    if (auto it = polys_.find(key); it != polys_.end()) return it->second;
    // order-independent per-pair generator
    std::uint64_t s = seed_ ^ (0x9e3779b97f4a7c15ull * (xhat * 2 + static_cast<unsigned>(y) + 1));
    auto next = [&s]() {
      s += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      return z ^ (z >> 31);
    };
    FieldPoly poly{params_.prime, {}};
    for (int j = 0; j < params_.degree; ++j) poly.coeffs.push_back(next() % params_.prime);
    if (y == 0 && label(xhat) == 1) poly.coeffs[0] = params_.encode(f_bits_);
    return polys_.emplace(key, std::move(poly)).first->second;
  }

  const SecretParams& params() const { return params_; }

 private:
  SecretParams params_;
  std::uint64_t f_bits_;
  std::uint64_t seed_;
  mutable std::map<std::pair<ExampleId, Label>, FieldPoly> polys_;
};

inline SecretTeacher sample_secret_teacher(const SecretParams& params, std::uint64_t seed) {
  std::uint64_t s = seed;
  auto next = [&s]() {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return SecretTeacher(params, next(), next());
}

/// The block-i teacher class, queried intensionally. Restriction feasibility
/// follows the structure of the construction: label constraints pin labeling
/// bits; feedback constraints pin polynomial evaluations per (explanation,
/// label) group; a group holding `degree` evaluations pins its polynomial,
/// and when its label is 0 the group's secret must match the labeling of any
/// member that labels the explanation 1.
class SecretClass final : public TeacherClass {
 public:
  explicit SecretClass(const SecretParams& params) : params_(params) {}

  const SecretParams& params() const { return params_; }

  std::vector<Label> feasible_labels(const ConstraintSet& c, ExampleId x) const override {
    std::vector<Label> out;
    for (Label y = 0; y <= 1; ++y) {
      if (!is_empty(c.with_label(x, y))) out.push_back(y);
    }
    return out;
  }

  std::size_t min_exceptions(const Transcript& t) const override {
    if (params_.labeling_bits() <= 16) {
      // exact minimum by scanning every block labeling
      std::size_t best = t.rounds.size() + 1;
      bool any = false;
      for (std::uint64_t f = 0; f < params_.labeling_count(); ++f) {
        if (!labeling_matches_history(f, t.initial_history)) continue;
        any = true;
        best = std::min(best, exceptions_for(f, t));
      }
      if (!any) throw OracleError("no teacher is consistent with the transcript's history");
      return best;
    }
    return min_exceptions_over_candidates(t);
  }

  bool labeling_matches_history(std::uint64_t f, const History& h) const {
    for (const auto& [x, y] : h.entries()) {
      if (params_.label_of(f, x) != y) return false;
    }
    return true;
  }

  /// Minimum over the structured candidate family: the transcript's own
  /// labels with subsets of in-block explanation anchors flipped to 0, plus
  /// the decodings of every interpolable group secret. This family contains
  /// the canonical consistent teacher of any adversarial run, so the result
  /// is always an achievable exception count.
  std::size_t min_exceptions_over_candidates(const Transcript& t) const {
    std::set<std::uint64_t> candidates = candidate_labelings(t);
    std::size_t best = t.rounds.size() + 1;
    bool any = false;
    for (std::uint64_t f : candidates) {
      if (!labeling_matches_history(f, t.initial_history)) continue;
      any = true;
      best = std::min(best, exceptions_for(f, t));
    }
    if (!any) throw OracleError("no candidate teacher is consistent with the history");
    return best;
  }

  std::set<std::uint64_t> candidate_labelings(const Transcript& t) const {
    std::set<std::uint64_t> candidates;
    std::uint64_t base = 0;
    std::vector<ExampleId> anchors;
    for (const Round& r : t.rounds) {
      if (params_.in_block(r.x)) {
        if (r.truth == 1) base |= 1ull << (r.x - params_.block_start());
        if (r.mistake() && params_.in_block(r.explanation)) {
          anchors.push_back(r.explanation);
        }
      }
    }
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    if (anchors.size() > 12) anchors.resize(12);
    for (std::uint64_t mask = 0; mask < (1ull << anchors.size()); ++mask) {
      std::uint64_t f = base;
      for (std::size_t j = 0; j < anchors.size(); ++j) {
        if (mask & (1ull << j)) f &= ~(1ull << (anchors[j] - params_.block_start()));
      }
      candidates.insert(f);
    }
    for (const auto& [key, evals] : collect_groups(t)) {
      add_pinned_candidates(evals, candidates);
    }
    return candidates;
  }

  /// Exceptions needed for the member teachers with block labeling f_bits.
  std::size_t exceptions_for(std::uint64_t f_bits, const Transcript& t) const {
    std::size_t exceptions = 0;
    std::map<std::pair<ExampleId, Label>, std::vector<Share>> groups;
    for (const Round& r : t.rounds) {
      if (params_.label_of(f_bits, r.x) != r.truth) {
        ++exceptions;
        continue;
      }
      if (!r.mistake()) continue;
      if (!r.feature) {
        ++exceptions;
        continue;
      }
      if (!params_.in_block(r.x) || !params_.in_block(r.explanation)) {
        if (*r.feature != Feature({r.x})) ++exceptions;
        continue;
      }
      auto share = decode_share(r.x, *r.feature);
      if (!share) {
        ++exceptions;
        continue;
      }
      groups[{r.explanation, r.truth}].push_back(*share);
    }
    for (const auto& [key, evals] : groups) {
      const auto& [xhat, y] = key;
      std::optional<std::uint64_t> secret;
      if (y == 0 && params_.label_of(f_bits, xhat) == 1) secret = params_.encode(f_bits);
      exceptions += group_penalty(evals, secret);
    }
    return exceptions;
  }

  /// A member labeling satisfying the constraints, or nothing. The candidate
  /// space is small by the structure of the construction: either the labeling
  /// zeroes every pinned explanation, or it is the decoding of one of the
  /// pinned secrets.
 public:
  std::optional<std::uint64_t> find_labeling(const ConstraintSet& c) const {
    if (c.contradictory()) return std::nullopt;
    // forced labeling bits
    std::map<ExampleId, bool> forced;
    for (const auto& [x, y] : c.labels()) {
      if (y < 0 || y > 1) return std::nullopt;
      if (x == 1) {
        if (y != 1) return std::nullopt;
      } else if (params_.in_block(x)) {
        forced[x] = (y == 1);
      } else {
        if (y != 0) return std::nullopt;
      }
    }
    // evaluation groups
    std::map<std::pair<ExampleId, Label>, std::vector<Share>> groups;
    for (const auto& e : c.feedbacks()) {
      if (!params_.in_block(e.x) || !params_.in_block(e.xhat)) {
        if (e.phi != Feature({e.x})) return std::nullopt;
        continue;
      }
      auto y = c.label_of(e.x);
      if (!y) {
        throw OracleError("secret oracle needs the label of every feedback-constrained example");
      }
      auto share = decode_share(e.x, e.phi);
      if (!share) return std::nullopt;
      groups[{e.xhat, *y}].push_back(*share);
    }
    // pinned secrets of full (xhat, 0) groups
    std::vector<std::pair<ExampleId, std::uint64_t>> pins;
    for (auto& [key, evals] : groups) {
      std::sort(evals.begin(), evals.end());
      evals.erase(std::unique(evals.begin(), evals.end()), evals.end());
      for (std::size_t i = 1; i < evals.size(); ++i) {
        if (evals[i].first == evals[i - 1].first) return std::nullopt;  // one point, two values
      }
      if (evals.size() >= static_cast<std::size_t>(params_.degree)) {
        std::vector<Share> head(evals.begin(), evals.begin() + params_.degree);
        const FieldPoly poly = reconstruct(head, params_.prime);
        for (const auto& [pt, v] : evals) {
          if (poly_eval(poly, pt) != v) return std::nullopt;
        }
        if (key.second == 0) pins.emplace_back(key.first, poly_eval(poly, 0));
      }
    }
    auto consistent_with_forced = [&](std::uint64_t f) {
      for (const auto& [x, bit] : forced) {
        if (params_.bit(f, x) != bit) return false;
      }
      return true;
    };
    {
      bool ok = true;
      for (const auto& [xhat, secret] : pins) {
        auto it = forced.find(xhat);
        if (it != forced.end() && it->second) ok = false;
      }
      if (ok) {
        std::uint64_t f = 0;
        for (const auto& [x, bit] : forced) {
          if (bit) f |= 1ull << (x - params_.block_start());
        }
        for (const auto& [xhat, secret] : pins) f &= ~(1ull << (xhat - params_.block_start()));
        if (consistent_with_forced(f)) return f;
      }
    }
    for (const auto& [xhat, secret] : pins) {
      auto decoded = params_.decode(secret);
      if (!decoded) continue;
      const std::uint64_t f = *decoded;
      if (!consistent_with_forced(f)) continue;
      bool ok = true;
      for (const auto& [xh2, s2] : pins) {
        if (params_.bit(f, xh2) && s2 != secret) ok = false;
      }
      if (ok) return f;
    }
    return std::nullopt;
  }

 protected:
  bool is_empty_impl(const ConstraintSet& c) const override { return !find_labeling(c); }

  std::vector<Response> feasible_responses_impl(const ConstraintSet& c, ExampleId x,
                                                ExampleId xhat, Label yhat) const override {
    if (params_.prime > 4096) {
      throw OracleError("feasible responses are only enumerable for small share fields");
    }
    std::vector<Response> out;
    for (Label y = 0; y <= 1; ++y) {
      if (y == yhat) continue;
      const ConstraintSet base = c.with_label(x, y);
      if (is_empty(base)) continue;
      if (!params_.in_block(x) || !params_.in_block(xhat)) {
        const Feature phi({x});
        if (!is_empty(base.with_feedback(x, xhat, phi))) out.push_back({y, phi});
        continue;
      }
      for (std::uint64_t z = params_.shifted_base(); z < params_.shifted_base() + params_.prime;
           ++z) {
        const Feature phi({x, z});
        if (!is_empty(base.with_feedback(x, xhat, phi))) out.push_back({y, phi});
      }
    }
    return out;
  }

 private:
  std::optional<Share> decode_share(ExampleId x, const Feature& phi) const {
    const auto& m = phi.members();
    if (m.size() != 2) return std::nullopt;
    if (m[0] != x && m[1] != x) return std::nullopt;
    const ExampleId z = m[0] == x ? m[1] : m[0];
    if (!params_.in_shifted_range(z)) return std::nullopt;
    return Share{params_.point(x), z - params_.shifted_base()};
  }

  std::map<std::pair<ExampleId, Label>, std::vector<Share>> collect_groups(
      const Transcript& t) const {
    std::map<std::pair<ExampleId, Label>, std::vector<Share>> groups;
    for (const Round& r : t.rounds) {
      if (!r.mistake() || !r.feature) continue;
      if (!params_.in_block(r.x) || !params_.in_block(r.explanation)) continue;
      if (auto share = decode_share(r.x, *r.feature)) {
        groups[{r.explanation, r.truth}].push_back(*share);
      }
    }
    return groups;
  }

  void add_pinned_candidates(const std::vector<Share>& evals,
                             std::set<std::uint64_t>& candidates) const {
    std::vector<Share> unique = evals;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    const std::size_t d = static_cast<std::size_t>(params_.degree);
    if (unique.size() < d) return;
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    while (true) {
      std::vector<Share> sub;
      bool distinct = true;
      for (auto i : idx) {
        if (!sub.empty() && sub.back().first == unique[i].first) distinct = false;
        sub.push_back(unique[i]);
      }
      if (distinct) {
        if (auto f = params_.decode(poly_eval(reconstruct(sub, params_.prime), 0))) {
          candidates.insert(*f);
        }
      }
      std::size_t k = d;
      while (k > 0 && idx[k - 1] == unique.size() - d + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t t2 = k; t2 < d; ++t2) idx[t2] = idx[t2 - 1] + 1;
      if (candidates.size() > 4096) break;
    }
  }

  /// Fewest evaluations that must be discarded so the rest lie on one
  /// polynomial of degree < d (with the given constant term, when pinned).
  std::size_t group_penalty(const std::vector<Share>& evals,
                            std::optional<std::uint64_t> secret) const {
    const std::size_t m = evals.size();
    // count per distinct pair and per point
    std::map<Share, std::size_t> pair_count;
    std::set<std::uint64_t> points;
    for (const auto& e : evals) {
      ++pair_count[e];
      points.insert(e.first);
    }
    const std::size_t free_dims = static_cast<std::size_t>(params_.degree) - (secret ? 1 : 0);
    if (points.size() <= free_dims) {
      // any per-point value choice is interpolable; keep the best value per point
      std::size_t kept = 0;
      for (std::uint64_t pt : points) {
        std::size_t best = 0;
        for (const auto& [pv, c] : pair_count) {
          if (pv.first == pt) best = std::max(best, c);
        }
        kept += best;
      }
      return m - kept;
    }
    // maximal fitting sets use at least free_dims distinct points; enumerate
    // all point combinations with all value choices and keep the best fit
    std::vector<std::uint64_t> pts(points.begin(), points.end());
    std::vector<std::size_t> idx(free_dims);
    for (std::size_t i = 0; i < free_dims; ++i) idx[i] = i;
    std::size_t best_fit = 0;
    std::vector<Share> chosen(free_dims);
    std::function<void(std::size_t)> pick_values = [&](std::size_t level) {
      if (level == free_dims) {
        std::vector<Share> shares = chosen;
        if (secret) shares.push_back({0, *secret});
        const FieldPoly poly = reconstruct(shares, params_.prime);
        std::size_t fit = 0;
        for (const auto& [pv, c] : pair_count) {
          if (poly_eval(poly, pv.first) == pv.second) fit += c;
        }
        best_fit = std::max(best_fit, fit);
        return;
      }
      for (const auto& [pv, c] : pair_count) {
        if (pv.first != pts[idx[level]]) continue;
        chosen[level] = pv;
        pick_values(level + 1);
      }
    };
    while (true) {
      if (free_dims == 0) {
        std::vector<Share> shares;
        shares.push_back({0, *secret});
        const FieldPoly poly = reconstruct(shares, params_.prime);
        std::size_t fit = 0;
        for (const auto& [pv, c] : pair_count) {
          if (poly_eval(poly, pv.first) == pv.second) fit += c;
        }
        best_fit = std::max(best_fit, fit);
        break;
      }
      pick_values(0);
      std::size_t k = free_dims;
      while (k > 0 && idx[k - 1] == pts.size() - free_dims + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t t2 = k; t2 < free_dims; ++t2) idx[t2] = idx[t2 - 1] + 1;
    }
    return m - best_fit;
  }

  SecretParams params_;
};

inline SecretClass make_secret_class(const SecretParams& params) { return SecretClass(params); }

}  // namespace dff
