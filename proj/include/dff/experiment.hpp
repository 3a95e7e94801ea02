#pragma once

#include <future>
#include <random>
#include <sstream>
#include <thread>

#include "dff/adversaries.hpp"
#include "dff/learners.hpp"
#include "dff/secret_learner.hpp"
#include "dff/serialize.hpp"

namespace dff {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Per-trial seed: a stable hash of the master seed and the trial id,
/// recorded per row so any trial can be replayed alone.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return splitmix64(master ^ splitmix64(trial + 1));
}

/// Substitutes seeded syntactically-valid random feedback on planned rounds.
class RandomExceptionInjector final : public Environment {
 public:
  RandomExceptionInjector(Environment& base, std::set<std::size_t> rounds, const Instance& inst,
                          std::uint64_t seed)
      : base_(base), planned_(std::move(rounds)), inst_(inst), rng_(seed) {}

  std::optional<ExampleId> next_example(const Transcript& so_far) override {
    round_ = so_far.rounds.size();
    return base_.next_example(so_far);
  }

  EnvFeedback feedback(ExampleId x, const Prediction& pred) override {
    EnvFeedback fb = base_.feedback(x, pred);
    if (!planned_.contains(round_)) return fb;
    injected_.insert(round_);
    // candidate replacements: fake correctness, or any differing label with a
    // feature separating x from the explanation
    std::vector<EnvFeedback> options;
    options.push_back({pred.label, std::nullopt});
    for (Label y = 0; y < inst_.label_count; ++y) {
      if (y == pred.label) continue;
      for (const Feature& f : inst_.features) {
        if (f.eval(x) && !f.eval(pred.explanation)) options.push_back({y, f});
      }
    }
    return options[rng_() % options.size()];
  }

  std::vector<std::size_t> exception_rounds() const override {
    auto out = base_.exception_rounds();
    out.insert(out.end(), injected_.begin(), injected_.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  Environment& base_;
  std::set<std::size_t> planned_;
  const Instance& inst_;
  std::mt19937_64 rng_;
  std::size_t round_ = 0;
  std::set<std::size_t> injected_;
};

struct ExperimentConfig {
  Json raw;
  Json class_spec;
  std::optional<History> history;
  std::string learner_name;
  Json learner_params;
  std::string environment_name;
  Json environment_params;
  std::size_t rounds = 0;
  std::size_t k = 0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
};

inline ExperimentConfig parse_config(const Json& j, const std::string& base_dir = ".") {
  ExperimentConfig cfg;
  cfg.raw = j;
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ParameterError("unsupported config schema version");
  }
  Json cls = j.at("class");
  if (cls.contains("file")) {
    cfg.class_spec = load_json_file(base_dir + "/" + cls.at("file").get<std::string>());
  } else {
    cfg.class_spec = cls;
  }
  if (j.contains("history")) cfg.history = history_from_json(j.at("history"));
  cfg.learner_name = j.at("learner").at("name").get<std::string>();
  cfg.learner_params = j.at("learner").value("params", Json::object());
  cfg.environment_name = j.at("environment").at("name").get<std::string>();
  cfg.environment_params = j.at("environment").value("params", Json::object());
  cfg.rounds = j.value("rounds", 0u);
  cfg.k = j.value("k", 0u);
  cfg.trials = j.value("trials", 1u);
  cfg.seed = j.value("seed", 0ull);
  return cfg;
}

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t mistakes = 0;
  std::size_t exceptions = 0;
  std::size_t rounds = 0;
  std::string status = "ok";
  Transcript transcript;
};

namespace detail {

struct TrialContext {
  const ExperimentConfig& cfg;
  LoadedClass loaded;
  History history;
  std::mt19937_64 rng;

  const Instance* instance() const { return loaded.cls->instance(); }
};

inline std::unique_ptr<Learner> build_learner(TrialContext& ctx, const std::string& name,
                                              const Json& params) {
  const TeacherClass& cls = *ctx.loaded.cls;
  if (name == "soa-dff") return std::make_unique<SoaDff>(cls, ctx.history);
  if (name == "a-soa-dff") return std::make_unique<Gaa>(a_soa_dff(cls, ctx.history));
  if (name == "greedy") {
    auto* ext = dynamic_cast<const ExtensionalClass*>(&cls);
    if (!ext) throw ParameterError("the greedy baseline needs an extensional class");
    return std::make_unique<GreedyBaseline>(*ext, ctx.history);
  }
  if (name == "component") {
    auto* comp = dynamic_cast<const ComponentClass*>(&cls);
    if (!comp) throw ParameterError("the component learner needs a component class");
    return std::make_unique<ComponentLearner>(comp->params(), ctx.history);
  }
  if (name == "secret") {
    auto* sec = dynamic_cast<const SecretClass*>(&cls);
    if (!sec) throw ParameterError("the secret learner needs a secret class");
    std::optional<int> preset;
    if (params.value("preset_block", false)) preset = sec->params().block;
    return std::make_unique<SecretLearner>(sec->params().degree, ctx.history, preset);
  }
  if (name.starts_with("gaa:")) {
    const std::string base = name.substr(4);
    int bound;
    if (params.contains("mistake_bound")) {
      bound = params.at("mistake_bound").get<int>();
    } else if (base == "soa-dff") {
      bound = dff_dim(cls, ctx.history);
    } else if (base == "component") {
      auto* comp = dynamic_cast<const ComponentClass*>(&cls);
      if (!comp) throw ParameterError("gaa:component needs a component class");
      bound = comp->params().max_rules * comp->params().max_conj;
    } else if (base == "secret") {
      auto* sec = dynamic_cast<const SecretClass*>(&cls);
      if (!sec) throw ParameterError("gaa:secret needs a secret class");
      bound = sec->params().degree + 1;
    } else {
      throw ParameterError("gaa base learner needs an explicit mistake_bound");
    }
    auto factory = [&ctx, base, params]() { return build_learner(ctx, base, params); };
    return std::make_unique<Gaa>(factory, bound);
  }
  throw ParameterError("unknown learner: " + name);
}

inline std::vector<ExampleId> build_sequence(TrialContext& ctx, const Json& params) {
  if (params.contains("sequence") && params.at("sequence").is_array()) {
    return params.at("sequence").get<std::vector<ExampleId>>();
  }
  const std::size_t length =
      params.contains("sequence") ? params.at("sequence").at("length").get<std::size_t>()
                                  : ctx.cfg.rounds;
  std::vector<ExampleId> pool;
  if (auto* sec = dynamic_cast<const SecretClass*>(ctx.loaded.cls.get())) {
    for (ExampleId x = sec->params().block_start(); x < sec->params().block_end(); ++x) {
      pool.push_back(x);
    }
  } else {
    for (ExampleId x = 0; x < ctx.instance()->example_count; ++x) pool.push_back(x);
  }
  std::vector<ExampleId> seq;
  for (std::size_t i = 0; i < length; ++i) seq.push_back(pool[ctx.rng() % pool.size()]);
  return seq;
}

/// A teacher consistent with the trial history, as label/feedback closures.
struct PickedTeacher {
  std::function<Label(ExampleId)> label;
  std::function<std::optional<Feature>(ExampleId, ExampleId)> psi;
};

inline PickedTeacher pick_teacher(TrialContext& ctx, const Json& params) {
  if (auto* ext = dynamic_cast<const ExtensionalClass*>(ctx.loaded.cls.get())) {
    std::vector<std::uint32_t> ok =
        ext->survivors(ConstraintSet::from_history(ctx.history));
    if (ok.empty()) throw ParameterError("no teacher is consistent with the history");
    std::size_t index;
    if (params.contains("teacher") && params.at("teacher").contains("index")) {
      index = params.at("teacher").at("index").get<std::size_t>();
    } else {
      index = ok[ctx.rng() % ok.size()];
    }
    const Teacher& t = ext->teachers().at(index);
    const Instance& inst = *ext->instance();
    return {[&t](ExampleId x) { return t.label(x); },
            [&t, &inst](ExampleId x, ExampleId xh) { return t.psi(inst, x, xh); }};
  }
  if (auto* comp = dynamic_cast<const ComponentClass*>(ctx.loaded.cls.get())) {
    for (int tries = 0; tries < 4096; ++tries) {
      const auto& base = comp->bases()[ctx.rng() % comp->bases().size()];
      bool ok = true;
      for (const auto& [x, y] : ctx.history.entries()) {
        if (base.labeling[x] != y) ok = false;
      }
      if (!ok) continue;
      auto teacher = std::make_shared<Teacher>(comp->canonical_teacher(base));
      const Instance& inst = *comp->instance();
      return {[teacher](ExampleId x) { return teacher->label(x); },
              [teacher, &inst](ExampleId x, ExampleId xh) { return teacher->psi(inst, x, xh); }};
    }
    throw ParameterError("no component structure is consistent with the history");
  }
  if (auto* sec = dynamic_cast<const SecretClass*>(ctx.loaded.cls.get())) {
    for (int tries = 0; tries < 4096; ++tries) {
      auto teacher = std::make_shared<SecretTeacher>(
          sample_secret_teacher(sec->params(), ctx.rng()));
      bool ok = true;
      for (const auto& [x, y] : ctx.history.entries()) {
        if (teacher->label(x) != y) ok = false;
      }
      if (!ok) continue;
      return {[teacher](ExampleId x) { return teacher->label(x); },
              [teacher](ExampleId x, ExampleId xh) { return teacher->feedback(x, xh); }};
    }
    throw ParameterError("no sampled teacher is consistent with the history");
  }
  throw ParameterError("cannot pick a teacher from this class kind");
}

}  // namespace detail

/// Runs one trial: builds the class, learner, and environment from the config
/// and the trial seed, then drives the episode.
inline TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial) {
  TrialResult result;
  result.trial = trial;
  result.seed = trial_seed(cfg.seed, trial);
  detail::TrialContext ctx{cfg, class_from_json(cfg.class_spec), History{},
                           std::mt19937_64(result.seed)};
  if (cfg.history) {
    ctx.history = *cfg.history;
  } else if (ctx.loaded.history) {
    ctx.history = *ctx.loaded.history;
  }
  if (ctx.history.empty()) throw ParameterError("no history given and none bundled");

  auto learner = detail::build_learner(ctx, cfg.learner_name, cfg.learner_params);

  std::unique_ptr<Environment> env;
  std::unique_ptr<Environment> base_env;  // kept alive for wrappers
  const std::string& ename = cfg.environment_name;
  if (ename == "teacher-replay" || ename == "exception-plan" || ename == "random-exceptions") {
    auto teacher = detail::pick_teacher(ctx, cfg.environment_params);
    auto seq = detail::build_sequence(ctx, cfg.environment_params);
    base_env = std::make_unique<TeacherEnvironment>(teacher.label, teacher.psi, std::move(seq));
    if (ename == "teacher-replay") {
      env = std::move(base_env);
    } else if (ename == "exception-plan") {
      std::map<std::size_t, Replacement> plan;
      for (const auto& e : cfg.environment_params.at("plan")) {
        Replacement rep;
        rep.label = e.at("label").get<Label>();
        if (e.contains("phi") && !e.at("phi").is_null()) {
          rep.feature = feature_from_json(e.at("phi"));
        }
        plan[e.at("round").get<std::size_t>()] = rep;
      }
      env = std::make_unique<ExceptionInjector>(*base_env, std::move(plan));
    } else {
      std::set<std::size_t> rounds;
      const std::size_t budget = cfg.environment_params.value("count", cfg.k);
      const std::size_t horizon = std::max<std::size_t>(cfg.rounds, 1);
      while (rounds.size() < budget && rounds.size() < horizon) {
        rounds.insert(ctx.rng() % horizon);
      }
      env = std::make_unique<RandomExceptionInjector>(*base_env, std::move(rounds),
                                                      *ctx.instance(), ctx.rng());
    }
  } else if (ename == "tree-adversary") {
    env = std::make_unique<TreeAdversary>(witness_tree(*ctx.loaded.cls, ctx.history));
  } else if (ename == "secret-adversary") {
    auto* sec = dynamic_cast<const SecretClass*>(ctx.loaded.cls.get());
    if (!sec) throw ParameterError("the secret adversary needs a secret class");
    Learner* lp = learner.get();
    env = std::make_unique<SecretAdversary>(
        sec->params(), cfg.k, cfg.rounds,
        [lp](ExampleId x, Label y) { return lp->label_probability(x, y); });
  } else {
    throw ParameterError("unknown environment: " + ename);
  }

  result.transcript =
      run_episode(*learner, *env, ctx.history, cfg.rounds == 0 ? 1u << 20 : cfg.rounds);
  result.mistakes = count_mistakes(result.transcript);
  result.exceptions = result.transcript.exceptions.size();
  result.rounds = result.transcript.rounds.size();
  return result;
}

struct ExperimentReport {
  std::vector<TrialResult> rows;
  std::size_t max_mistakes = 0;
  double mean_mistakes = 0;
  std::optional<int> dim;
  std::optional<long long> upper_bound;  // (k+1)d + k
  std::optional<long long> lower_bound;  // (k+1)d - k - 2
  bool any_error = false;
};

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.rows.resize(cfg.trials);
  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  auto worker = [&cfg, &report, workers](unsigned w) {
    for (std::size_t t = w; t < cfg.trials; t += workers) {
      try {
        report.rows[t] = run_trial(cfg, t);
      } catch (const std::exception& e) {
        TrialResult r;
        r.trial = t;
        r.seed = trial_seed(cfg.seed, t);
        r.status = std::string("error: ") + e.what();
        report.rows[t] = std::move(r);
      }
    }
  };
  std::vector<std::thread> threads;
  for (unsigned w = 1; w < workers; ++w) threads.emplace_back(worker, w);
  worker(0);
  for (auto& th : threads) th.join();
  double total = 0;
  for (const auto& r : report.rows) {
    report.max_mistakes = std::max(report.max_mistakes, r.mistakes);
    total += static_cast<double>(r.mistakes);
    if (r.status != "ok") report.any_error = true;
  }
  report.mean_mistakes = report.rows.empty() ? 0 : total / static_cast<double>(report.rows.size());

  // bound columns, when the dimension is known or declared
  try {
    LoadedClass loaded = class_from_json(cfg.class_spec);
    if (auto* sec = dynamic_cast<const SecretClass*>(loaded.cls.get())) {
      report.dim = sec->params().degree;
    } else if (loaded.cls->instance() != nullptr) {
      const History h = cfg.history ? *cfg.history : loaded.history.value_or(History{});
      if (!h.empty()) report.dim = dff_dim(*loaded.cls, h);
    }
  } catch (const std::exception&) {
    // no dimension column
  }
  if (report.dim) {
    const long long d = *report.dim;
    const long long k = static_cast<long long>(cfg.k);
    report.upper_bound = (k + 1) * d + k;
    if (k >= 1) report.lower_bound = (k + 1) * d - k - 2;
  }
  return report;
}

inline std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "trial,seed,mistakes,exceptions,rounds,status\n";
  for (const auto& r : report.rows) {
    os << r.trial << ',' << r.seed << ',' << r.mistakes << ',' << r.exceptions << ',' << r.rounds
       << ',' << r.status << '\n';
  }
  return os.str();
}

inline Json report_to_json(const ExperimentReport& report, const ExperimentConfig& cfg) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back(Json{{"trial", r.trial},
                        {"seed", r.seed},
                        {"mistakes", r.mistakes},
                        {"exceptions", r.exceptions},
                        {"rounds", r.rounds},
                        {"status", r.status}});
  }
  Json out{{"schema_version", kSchemaVersion},
           {"config", cfg.raw},
           {"rows", rows},
           {"aggregate", Json{{"max_mistakes", report.max_mistakes},
                              {"mean_mistakes", report.mean_mistakes}}}};
  Json bounds = Json::object();
  if (report.dim) bounds["d"] = *report.dim;
  if (report.upper_bound) bounds["upper"] = *report.upper_bound;
  if (report.lower_bound) bounds["lower"] = *report.lower_bound;
  out["bounds"] = bounds;
  return out;
}

}  // namespace dff
