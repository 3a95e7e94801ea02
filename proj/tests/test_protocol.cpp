#include <catch2/catch_amalgamated.hpp>

#include "dff/protocol.hpp"
#include "dff/teacher_class.hpp"
#include "fixtures.hpp"

using namespace dff;
using namespace dff::testing;

namespace {

// Answers a fixed explanation pair forever.
class FixedLearner : public Learner {
 public:
  explicit FixedLearner(Prediction p) : pred_(p) {}
  void reset() override {}
  Prediction predict(ExampleId) const override { return pred_; }
  void observe(ExampleId, const Prediction&, Label, const std::optional<Feature>&) override {}

 private:
  Prediction pred_;
};

// Echoes the label of already-seen examples, otherwise a fixed anchor.
class EchoLearner : public Learner {
 public:
  explicit EchoLearner(Prediction anchor) : anchor_(anchor) {}
  void reset() override { known_.clear(); }
  Prediction predict(ExampleId x) const override {
    for (const auto& [kx, ky] : known_) {
      if (kx == x) return Prediction{x, ky};
    }
    return anchor_;
  }
  void observe(ExampleId x, const Prediction&, Label truth,
               const std::optional<Feature>&) override {
    known_.emplace_back(x, truth);
  }

 private:
  Prediction anchor_;
  std::vector<std::pair<ExampleId, Label>> known_;
};

// Plays one fixed teacher on a fixed sequence (local copy; the library's
// teacher environment lives in adversaries.hpp and is tested there).
class ReplayEnv : public Environment {
 public:
  ReplayEnv(Instance inst, Teacher t, std::vector<ExampleId> seq)
      : inst_(std::move(inst)), teacher_(std::move(t)), seq_(std::move(seq)) {}
  std::optional<ExampleId> next_example(const Transcript& t) override {
    if (t.rounds.size() >= seq_.size()) return std::nullopt;
    return seq_[t.rounds.size()];
  }
  EnvFeedback feedback(ExampleId x, const Prediction& pred) override {
    const Label y = teacher_.label(x);
    if (y == pred.label) return {y, std::nullopt};
    return {y, teacher_.psi(inst_, x, pred.explanation)};
  }

 private:
  Instance inst_;
  Teacher teacher_;
  std::vector<ExampleId> seq_;
};

}  // namespace

TEST_CASE("validate_teacher") {
  const Instance inst = two_point_instance();
  SECTION("valid teacher passes") { CHECK(validate_teacher(inst, teacher_t1()).empty()); }
  SECTION("feature must hold for x") {
    Teacher bad = teacher_t1();
    // psi(b, a) := I{a}: fails x=b, holds xhat=a
    bad.feedback[2] = static_cast<std::int32_t>(*inst.feature_id(indicator({0})));
    auto v = validate_teacher(inst, bad);
    REQUIRE(v.size() == 2);
    CHECK(v[0].clause == "phi(x)=false");
    CHECK(v[1].clause == "phi(xhat)=true");
    CHECK(v[0].x == 1);
    CHECK(v[0].xhat == 0);
  }
  SECTION("none is allowed when labels agree") {
    CHECK(validate_teacher(inst, teacher_t2()).empty());
  }
  SECTION("missing feature on differing labels is a violation") {
    Teacher bad = teacher_t1();
    bad.feedback[2] = -1;
    auto v = validate_teacher(inst, bad);
    REQUIRE(v.size() == 1);
    CHECK(v[0].clause == "missing feature on a pair with differing labels");
  }
  SECTION("partial tables are rejected") {
    Teacher bad = teacher_t1();
    bad.labels.pop_back();
    CHECK_THROWS_AS(validate_teacher(inst, bad), ParameterError);
  }
}

TEST_CASE("run_episode on the two-point instance") {
  const Instance inst = two_point_instance();
  SECTION("one forced mistake against T1") {
    FixedLearner learner(Prediction{0, 0});
    ReplayEnv env(inst, teacher_t1(), {1});
    Transcript t = run_episode(learner, env, e1_history(), 100);
    REQUIRE(t.rounds.size() == 1);
    CHECK(t.rounds[0].mistake());
    CHECK(t.rounds[0].truth == 1);
    CHECK(t.rounds[0].feature == indicator({1}));
    CHECK(count_mistakes(t) == 1);
  }
  SECTION("empty sequence gives an empty transcript") {
    FixedLearner learner(Prediction{0, 0});
    ReplayEnv env(inst, teacher_t1(), {});
    Transcript t = run_episode(learner, env, e1_history(), 100);
    CHECK(t.rounds.empty());
    CHECK(count_mistakes(t) == 0);
  }
  SECTION("replaying a known example draws no feedback") {
    EchoLearner learner(Prediction{0, 0});
    ReplayEnv env(inst, teacher_t1(), {1, 1});
    Transcript t = run_episode(learner, env, e1_history(), 100);
    REQUIRE(t.rounds.size() == 2);
    CHECK(t.rounds[0].mistake());
    CHECK_FALSE(t.rounds[1].mistake());
    CHECK_FALSE(t.rounds[1].feature.has_value());
    CHECK(count_mistakes(t) == 1);
  }
  SECTION("correct rounds everywhere") {
    EchoLearner learner(Prediction{0, 0});
    ReplayEnv env(inst, teacher_t2(), {1, 0, 1});
    Transcript t = run_episode(learner, env, e1_history(), 100);
    REQUIRE(t.rounds.size() == 3);
    CHECK(count_mistakes(t) == 0);
  }
  SECTION("illegal explanations are rejected") {
    FixedLearner learner(Prediction{1, 1});  // (b, 1) was never observed
    ReplayEnv env(inst, teacher_t1(), {0});
    CHECK_THROWS_AS(run_episode(learner, env, e1_history(), 10), ProtocolError);
  }
  SECTION("max_rounds truncates") {
    EchoLearner learner(Prediction{0, 0});
    ReplayEnv env(inst, teacher_t2(), {0, 0, 0, 0});
    CHECK(run_episode(learner, env, e1_history(), 2).rounds.size() == 2);
  }
  SECTION("empty history is rejected") {
    FixedLearner learner(Prediction{0, 0});
    ReplayEnv env(inst, teacher_t1(), {1});
    CHECK_THROWS_AS(run_episode(learner, env, History(), 10), ParameterError);
  }
}

TEST_CASE("malformed environments are caught") {
  const Instance inst = two_point_instance();
  struct BadEnv : Environment {
    int mode;
    explicit BadEnv(int m) : mode(m) {}
    std::optional<ExampleId> next_example(const Transcript& t) override {
      if (!t.rounds.empty()) return std::nullopt;
      return 1;
    }
    EnvFeedback feedback(ExampleId x, const Prediction&) override {
      switch (mode) {
        case 0: return {1, std::nullopt};                     // mistake without feature
        case 1: return {0, indicator({1})};                   // feature on a correct round
        case 2: return {1, indicator({0})};                   // phi(x) = false
        default: return {1, indicator({0, 1})};               // phi(xhat) = true
      }
    }
  };
  FixedLearner learner(Prediction{0, 0});
  for (int mode = 0; mode < 4; ++mode) {
    BadEnv env(mode);
    CHECK_THROWS_AS(run_episode(learner, env, e1_history(), 10), ProtocolError);
  }
}

TEST_CASE("legal_explanations grows monotonically") {
  const History h({{0, 0}});
  Transcript t;
  t.initial_history = h;
  auto pool0 = legal_explanations(h, t);
  CHECK(pool0 == std::vector<std::pair<ExampleId, Label>>{{0, 0}});

  // a mistaken round on b reveals label 1
  t.rounds.push_back(Round{1, 0, 0, 1, indicator({1})});
  auto pool1 = legal_explanations(h, t);
  CHECK(pool1 == std::vector<std::pair<ExampleId, Label>>{{0, 0}, {1, 1}});

  // a correct round on a fresh example joins the pool too
  t.rounds.push_back(Round{2, 0, 0, 0, std::nullopt});
  auto pool2 = legal_explanations(h, t);
  CHECK(pool2 == std::vector<std::pair<ExampleId, Label>>{{0, 0}, {1, 1}, {2, 0}});

  // monotone under set inclusion
  CHECK(std::includes(pool2.begin(), pool2.end(), pool1.begin(), pool1.end()));
  CHECK(std::includes(pool1.begin(), pool1.end(), pool0.begin(), pool0.end()));
}

TEST_CASE("extensional class construction and oracles") {
  SECTION("construction validates and dedups") {
    auto cls = e1_class();
    CHECK(cls.size() == 2);
    auto dup = make_extensional(two_point_instance(), {teacher_t1(), teacher_t1()});
    CHECK(dup.size() == 1);
    auto empty = make_extensional(two_point_instance(), {});
    CHECK(empty.size() == 0);
    Teacher bad = teacher_t1();
    bad.feedback[2] = -1;
    CHECK_THROWS_AS(make_extensional(two_point_instance(), {bad}), ParameterError);
  }
  SECTION("is_empty filters the member list") {
    auto cls = e1_class();
    ConstraintSet c;
    c.add_label(1, 1);
    CHECK_FALSE(cls.is_empty(c));  // T1 survives
    ConstraintSet c2;
    c2.add_label(0, 1);
    CHECK(cls.is_empty(c2));  // nobody labels a with 1
    CHECK_FALSE(cls.is_empty(ConstraintSet{}));
    auto empty = make_extensional(two_point_instance(), {});
    CHECK(empty.is_empty(ConstraintSet{}));
  }
  SECTION("contradictory constraint sets are empty") {
    auto cls = e1_class();
    ConstraintSet c;
    c.add_label(1, 1);
    c.add_label(1, 0);
    CHECK(c.contradictory());
    CHECK(cls.is_empty(c));
  }
  SECTION("feasible_responses") {
    auto cls = e1_class();
    ConstraintSet c;
    c.add_label(0, 0);
    auto r = cls.feasible_responses(c, 1, 0, 0);
    REQUIRE(r.size() == 1);
    CHECK(r[0].y == 1);
    CHECK(r[0].phi == indicator({1}));

    ConstraintSet c2 = c.with_label(1, 0);  // only T2 survives, agrees on b
    CHECK(cls.feasible_responses(c2, 1, 0, 0).empty());

    auto singleton = make_extensional(two_point_instance(), {teacher_t2()});
    CHECK(singleton.feasible_responses(c, 1, 0, 0).empty());
  }
}
