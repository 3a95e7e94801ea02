#pragma once

#include <map>
#include <optional>
#include <vector>

#include "dff/protocol.hpp"
#include "dff/secret.hpp"

namespace dff {

/// The reconstruction learner for the union of secret blocks: predict 0 until
/// a 1-labeled example other than 1 pins the block, then predict 1 anchored
/// there, harvesting one share per mistake; `degree` shares interpolate the
/// secret and the decoded labeling answers everything afterwards. If the
/// history's 1-example already sits in a block, the anchor is set up front and
/// the discovery mistake never happens.
class SecretLearner final : public Learner {
 public:
  SecretLearner(int degree, History history, std::optional<int> preset_block = std::nullopt)
      : degree_(degree), history_(std::move(history)), preset_block_(preset_block) {
    if (degree < 1) throw ParameterError("degree must be at least 1");
    for (const auto& [x, y] : history_.entries()) {
      if (y == 0 && !anchor0_) anchor0_ = x;
      if (y == 1 && !anchor1_) anchor1_ = x;
    }
    if (!anchor0_ || !anchor1_) {
      throw ParameterError("history must contain one 0-labeled and one 1-labeled example");
    }
    reset();
  }

  void reset() override {
    known_.clear();
    shares_.clear();
    fhat_.reset();
    failed_ = false;
    xhat_.reset();
    block_.reset();
    for (const auto& [x, y] : history_.entries()) known_[x] = y;
    if (*anchor1_ != 1) {
      xhat_ = *anchor1_;
      block_ = block_index_of(*anchor1_);
      params_ = make_secret_params(*block_, degree_);
    } else if (preset_block_) {
      block_ = *preset_block_;
      params_ = make_secret_params(*block_, degree_);
    }
  }

  Prediction predict(ExampleId x) const override {
    if (fhat_) {
      const Label y = params_->label_of(*fhat_, x);
      return anchored(y);
    }
    if (x == 1) return Prediction{*anchor1_, 1};
    if (auto it = known_.find(x); it != known_.end()) return Prediction{x, it->second};
    if (xhat_ && params_->in_block(x) && shares_.size() < static_cast<std::size_t>(degree_)) {
      return Prediction{*xhat_, 1};
    }
    return Prediction{*anchor0_, 0};
  }

  void observe(ExampleId x, const Prediction& made, Label truth,
               const std::optional<Feature>& phi) override {
    const bool mistake = truth != made.label;
    const bool was_known = known_.contains(x);
    known_[x] = truth;
    if (!mistake || fhat_ || x == 1 || was_known) return;
    if (!xhat_) {
      // the discovery mistake: a fresh example with true label 1
      if (truth == 1 && (!block_ || block_index_of(x) == *block_)) {
        xhat_ = x;
        if (!block_) {
          block_ = block_index_of(x);
          params_ = make_secret_params(*block_, degree_);
        }
      }
      return;
    }
    if (!params_->in_block(x) || made.explanation != *xhat_) return;
    if (shares_.size() >= static_cast<std::size_t>(degree_)) return;
    harvest(x, phi);
    if (shares_.size() == static_cast<std::size_t>(degree_)) reconstruct_labeling();
  }

  std::optional<std::uint64_t> reconstructed() const { return fhat_; }
  std::size_t share_count() const { return shares_.size(); }
  bool reconstruction_failed() const { return failed_; }

 private:
  static int block_index_of(ExampleId x) {
    int i = 0;
    while ((2ull << i) <= x) ++i;
    return i;
  }

  Prediction anchored(Label y) const { return Prediction{y == 1 ? *anchor1_ : *anchor0_, y}; }

  void harvest(ExampleId x, const std::optional<Feature>& phi) {
    if (!phi) return;
    const auto& m = phi->members();
    if (m.size() > 2 || !phi->eval(x)) {
      throw ProtocolError("share feedback must be an indicator of at most two examples incl. x");
    }
    if (m.size() != 2) return;  // a bare indicator carries no share
    const ExampleId z = m[0] == x ? m[1] : m[0];
    if (!params_->in_shifted_range(z)) return;
    const Share share{params_->point(x), z - params_->shifted_base()};
    for (const auto& s : shares_) {
      if (s.first == share.first) return;  // repeated point, not a fresh share
    }
    shares_.push_back(share);
  }

  void reconstruct_labeling() {
    const FieldPoly poly = reconstruct(shares_, params_->prime);
    if (auto f = params_->decode(poly_eval(poly, 0))) {
      fhat_ = *f;
    } else {
      failed_ = true;  // feedback was not consistent with any member teacher
    }
  }

  int degree_;
  History history_;
  std::optional<int> preset_block_;
  std::optional<ExampleId> anchor0_, anchor1_;
  std::optional<ExampleId> xhat_;
  std::optional<int> block_;
  std::optional<SecretParams> params_;
  std::map<ExampleId, Label> known_;
  std::vector<Share> shares_;
  std::optional<std::uint64_t> fhat_;
  bool failed_ = false;
};

/// The adaptive environment for the secret construction: presents the fresh
/// block examples 2^i + t, answers with the label the learner is least likely
/// to predict while both labels stay feasible, draws features from committed
/// per-group sharing polynomials, and retroactively declares the source round
/// of an explanation an exception once that explanation has handed out
/// `degree` shares, keeping every emitted sequence k-consistent.
class SecretAdversary final : public Environment {
 public:
  struct RoundAudit {
    bool both_feasible = false;
    bool precondition = false;  // no non-exception explanation had degree shares yet
    std::size_t exceptions = 0;
  };

  SecretAdversary(const SecretParams& params, std::size_t k, std::size_t rounds,
                  std::function<double(ExampleId, Label)> label_probability)
      : params_(params),
        cls_(params),
        k_(k),
        rounds_(rounds),
        probe_(std::move(label_probability)) {
    if (rounds_ > params_.block_start() - 1) {
      throw ParameterError("sequence longer than the block can supply fresh examples");
    }
  }

  std::optional<ExampleId> next_example(const Transcript& so_far) override {
    const std::size_t t = so_far.rounds.size();
    if (t >= rounds_) return std::nullopt;
    current_x_ = params_.block_start() + t + 1;
    commit_label();
    return current_x_;
  }

  EnvFeedback feedback(ExampleId x, const Prediction& pred) override {
    const Label y = committed_y_;
    std::optional<Feature> phi;
    if (y != pred.label) phi = committed_feature(x, pred.explanation);
    // record the round before updating the exception set
    rounds_seen_.push_back(Round{x, pred.explanation, pred.label, y, phi});
    update_exceptions(pred);
    return {y, phi};
  }

  std::vector<std::size_t> exception_rounds() const override {
    return {exceptions_.begin(), exceptions_.end()};
  }

  const std::vector<RoundAudit>& audits() const { return audits_; }

 private:
  /// Non-exception rounds as a transcript-like view.
  std::vector<const Round*> surviving_rounds() const {
    std::vector<const Round*> out;
    for (std::size_t i = 0; i < rounds_seen_.size(); ++i) {
      if (!exceptions_.contains(i)) out.push_back(&rounds_seen_[i]);
    }
    return out;
  }

  ConstraintSet surviving_constraints() const {
    ConstraintSet c;
    for (const Round* r : surviving_rounds()) {
      c.add_label(r->x, r->truth);
      if (r->mistake() && r->feature) c.add_feedback(r->x, r->explanation, *r->feature);
    }
    return c;
  }

  void commit_label() {
    const ConstraintSet base = surviving_constraints();
    const bool can0 = !cls_.is_empty(base.with_label(current_x_, 0));
    const bool can1 = !cls_.is_empty(base.with_label(current_x_, 1));
    if (!can0 && !can1) throw Error("adversary lost consistency");  // cannot happen
    RoundAudit audit;
    audit.both_feasible = can0 && can1;
    audit.precondition = precondition_holds();
    audit.exceptions = exceptions_.size();
    audits_.push_back(audit);
    if (can0 && !can1) {
      committed_y_ = 0;
    } else if (can1 && !can0) {
      committed_y_ = 1;
    } else {
      committed_y_ = probe_(current_x_, 1) < probe_(current_x_, 0) ? 1 : 0;
    }
  }

  bool precondition_holds() const {
    std::map<ExampleId, std::size_t> counts;
    for (const Round* r : surviving_rounds()) {
      if (r->mistake() && r->feature && r->truth == 0 && params_.in_block(r->explanation)) {
        // explanations whose source round is an exception do not count
        if (!is_exception_source(r->explanation)) ++counts[r->explanation];
      }
    }
    for (const auto& [xh, c] : counts) {
      if (c >= static_cast<std::size_t>(params_.degree)) return false;
    }
    return true;
  }

  bool is_exception_source(ExampleId x) const {
    for (std::size_t i : exceptions_) {
      if (rounds_seen_[i].x == x) return true;
    }
    return false;
  }

  Feature committed_feature(ExampleId x, ExampleId xhat) {
    if (!params_.in_block(x) || !params_.in_block(xhat)) return Feature({x});
    // interpolate the group polynomial of a witness teacher: all surviving
    // evaluations of this (explanation, label) group, plus the secret when
    // the witness labeling marks the explanation
    std::vector<LinearConstraint> rows;
    const auto witness =
        cls_.find_labeling(surviving_constraints().with_label(current_x_, committed_y_));
    if (!witness) throw Error("adversary lost consistency");  // cannot happen
    const std::uint64_t f = *witness;
    for (const Round* r : surviving_rounds()) {
      if (!r->mistake() || !r->feature || r->explanation != xhat || r->truth != committed_y_) {
        continue;
      }
      if (!params_.in_block(r->x)) continue;
      const auto& m = r->feature->members();
      if (m.size() != 2) continue;
      const ExampleId z = m[0] == r->x ? m[1] : m[0];
      rows.push_back(eval_row(params_.point(r->x), z - params_.shifted_base()));
    }
    if (committed_y_ == 0 && params_.bit(f, xhat)) {
      LinearConstraint secret_row;
      secret_row.lhs.assign(params_.degree, 0);
      secret_row.lhs[0] = 1;
      secret_row.rhs = params_.encode(f);
      rows.push_back(secret_row);
    }
    auto coeffs = lex_least_solution(rows, static_cast<std::size_t>(params_.degree), params_.prime);
    if (!coeffs) throw Error("adversary group polynomial became overconstrained");
    const FieldPoly poly{params_.prime, *coeffs};
    return Feature({x, shifted_eval(params_, poly, x)});
  }

  LinearConstraint eval_row(std::uint64_t point, std::uint64_t value) const {
    LinearConstraint row;
    row.lhs.assign(params_.degree, 0);
    std::uint64_t p = 1;
    PrimeField field(params_.prime);
    for (int j = 0; j < params_.degree; ++j) {
      row.lhs[j] = p;
      p = field.mul(p, point % params_.prime);
    }
    row.rhs = value;
    return row;
  }

  void update_exceptions(const Prediction& pred) {
    if (exceptions_.size() >= k_) return;
    if (!params_.in_block(pred.explanation)) return;
    std::size_t r_count = 0;  // feedback rounds with this explanation and true label 0
    for (const Round& r : rounds_seen_) {
      if (r.explanation == pred.explanation && r.truth == 0 && r.feature) ++r_count;
    }
    if (r_count != static_cast<std::size_t>(params_.degree)) return;
    std::optional<std::size_t> source;
    for (std::size_t i = 0; i < rounds_seen_.size(); ++i) {
      if (rounds_seen_[i].x == pred.explanation) {
        if (source) throw Error("explanation presented twice");  // examples are fresh
        source = i;
      }
    }
    if (source) exceptions_.insert(*source);
  }

  SecretParams params_;
  SecretClass cls_;
  std::size_t k_;
  std::size_t rounds_;
  std::function<double(ExampleId, Label)> probe_;
  ExampleId current_x_ = 0;
  Label committed_y_ = 0;
  std::vector<Round> rounds_seen_;
  std::set<std::size_t> exceptions_;
  std::vector<RoundAudit> audits_;
};

}  // namespace dff
