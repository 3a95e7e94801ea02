// Command-line front end: dimension computation, witness emission and
// verification, episode simulation, mapping conversion, and batch
// experiments with reproducible seeds.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dff/consistency.hpp"
#include "dff/experiment.hpp"
#include "dff/mappings.hpp"
#include "dff/search.hpp"

namespace {

using namespace dff;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitParse = 2;
constexpr int kExitInconsistent = 3;
constexpr int kExitProtocol = 4;
constexpr int kExitTrialError = 5;

History resolve_history(const LoadedClass& loaded, const std::string& history_arg) {
  if (!history_arg.empty()) {
    if (std::filesystem::exists(history_arg)) {
      return history_from_json(load_json_file(history_arg));
    }
    return history_from_json(Json::parse(history_arg));
  }
  if (loaded.history) return *loaded.history;
  throw ParameterError("no history given and none bundled with the class");
}

int cmd_dim(const std::string& class_file, const std::string& history_arg, bool as_json) {
  LoadedClass loaded = class_from_json(load_json_file(class_file));
  const History history = resolve_history(loaded, history_arg);
  const int d = dff_dim(*loaded.cls, history);
  if (d < 0 && !loaded.cls->is_empty(ConstraintSet{})) {
    std::cerr << "history is inconsistent with every teacher in the class\n";
    return kExitInconsistent;
  }
  std::optional<int> ldim;
  try {
    ldim = littlestone_dim(dto(*loaded.cls, history));
  } catch (const OracleError&) {
    // non-enumerable class: no online-learning counterpart at this scale
  }
  std::optional<int> witness_height;
  if (d >= 0) witness_height = witness_tree(*loaded.cls, history).height();
  if (as_json) {
    Json out{{"dffdim", d}};
    out["ldim_of_dto"] = ldim ? Json(*ldim) : Json(nullptr);
    out["witness_height"] = witness_height ? Json(*witness_height) : Json(nullptr);
    std::cout << out.dump() << '\n';
  } else {
    std::cout << "dffdim " << d << '\n';
    std::cout << "ldim-of-dto " << (ldim ? std::to_string(*ldim) : "n/a") << '\n';
    std::cout << "witness-height " << (witness_height ? std::to_string(*witness_height) : "n/a")
              << '\n';
  }
  return kExitOk;
}

int cmd_witness(const std::string& class_file, const std::string& history_arg,
                const std::string& out_file) {
  LoadedClass loaded = class_from_json(load_json_file(class_file));
  const History history = resolve_history(loaded, history_arg);
  DffTree tree = witness_tree(*loaded.cls, history);
  auto verdict = verify_shattered(tree, *loaded.cls, history);
  if (!verdict.ok) throw Error("extracted witness failed verification: " + verdict.detail);
  const Json out = tree_to_json(tree, loaded.cls->instance());
  if (out_file.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::ofstream f(out_file);
    f << out.dump(2) << '\n';
  }
  std::cerr << "height " << tree.height() << ", verified\n";
  return kExitOk;
}

int cmd_verify(const std::string& transcript_file, const std::string& class_file, std::size_t k) {
  LoadedClass loaded = class_from_json(load_json_file(class_file));
  Transcript transcript;
  std::ifstream in(transcript_file);
  if (!in) throw ParameterError("cannot open transcript: " + transcript_file);
  std::string first_line;
  std::getline(in, first_line);
  in.seekg(0);
  if (first_line.find("\"type\"") != std::string::npos) {
    transcript = transcript_from_jsonl(in);
  } else {
    transcript = transcript_from_json(Json::parse(in));
  }
  const std::size_t minimal = k_consistency(transcript, *loaded.cls);
  const bool pass = minimal <= k;
  std::cout << "minimal-exceptions " << minimal << '\n'
            << (pass ? "pass" : "fail") << " (budget " << k << ")\n";
  return pass ? kExitOk : kExitFail;
}

int cmd_simulate(const std::string& config_file, const std::string& out_dir) {
  const auto base_dir = std::filesystem::path(config_file).parent_path().string();
  ExperimentConfig cfg = parse_config(load_json_file(config_file),
                                      base_dir.empty() ? "." : base_dir);
  TrialResult result = run_trial(cfg, 0);
  LoadedClass loaded = class_from_json(cfg.class_spec);
  const std::string jsonl = transcript_to_jsonl(result.transcript, loaded.cls->instance());
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream f(std::filesystem::path(out_dir) / "transcript.jsonl");
    f << jsonl;
  } else {
    std::cout << jsonl;
  }
  std::cerr << "rounds " << result.rounds << ", mistakes " << result.mistakes << ", exceptions "
            << result.exceptions << '\n';
  return kExitOk;
}

int cmd_map(const std::string& in_file, const std::string& out_file) {
  const Json j = load_json_file(in_file);
  Json out;
  if (j.at("kind").get<std::string>() == "hypotheses") {
    OtdResult mapped = otd(hypothesis_class_from_json(j));
    out = extensional_class_to_json(mapped.cls);
    out["history"] = history_to_json(mapped.history);
  } else {
    LoadedClass loaded = class_from_json(j);
    History history;
    if (j.contains("history")) {
      history = history_from_json(j.at("history"));
    } else if (loaded.history) {
      history = *loaded.history;
    } else {
      throw ParameterError("mapping to online learning needs a history");
    }
    out = hypothesis_class_to_json(dto(*loaded.cls, history));
  }
  if (out_file.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::ofstream f(out_file);
    f << out.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_experiment(const std::string& config_file, const std::string& out_dir) {
  const auto base_dir = std::filesystem::path(config_file).parent_path().string();
  ExperimentConfig cfg = parse_config(load_json_file(config_file),
                                      base_dir.empty() ? "." : base_dir);
  ExperimentReport report = run_experiment(cfg);
  const std::string csv = report_to_csv(report);
  const Json json = report_to_json(report, cfg);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream f(std::filesystem::path(out_dir) / "report.csv");
      f << csv;
    }
    {
      std::ofstream f(std::filesystem::path(out_dir) / "report.json");
      f << json.dump(2) << '\n';
    }
  } else {
    std::cout << csv;
  }
  std::cerr << "trials " << report.rows.size() << ", max mistakes " << report.max_mistakes
            << ", mean " << report.mean_mistakes << '\n';
  return report.any_error ? kExitTrialError : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact computation and simulation for discriminative feature feedback"};
  app.require_subcommand(1);

  std::string class_file, history_arg, transcript_file, config_file, in_file, out_arg;
  std::size_t budget = 0;
  bool as_json = false;

  auto* dim = app.add_subcommand("dim", "dimension of a class with a history");
  dim->add_option("--class", class_file, "class specification file")->required();
  dim->add_option("--history", history_arg, "history as JSON or a file");
  dim->add_flag("--json", as_json, "machine-readable output");

  auto* witness = app.add_subcommand("witness", "emit a verified witness tree");
  witness->add_option("--class", class_file)->required();
  witness->add_option("--history", history_arg);
  witness->add_option("--out", out_arg, "output file (stdout by default)");

  auto* verify = app.add_subcommand("verify", "audit a transcript against an exception budget");
  verify->add_option("--transcript", transcript_file)->required();
  verify->add_option("--class", class_file)->required();
  verify->add_option("--k", budget, "exception budget")->required();

  auto* simulate = app.add_subcommand("simulate", "run one learner-vs-environment episode");
  simulate->add_option("--config", config_file)->required();
  simulate->add_option("--out", out_arg, "output directory");

  auto* map = app.add_subcommand("map", "convert between online learning and feedback classes");
  map->add_option("--in", in_file)->required();
  map->add_option("--out", out_arg);

  auto* experiment = app.add_subcommand("experiment", "run seeded trials and report");
  experiment->add_option("--config", config_file)->required();
  experiment->add_option("--out", out_arg, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(dim)) return cmd_dim(class_file, history_arg, as_json);
    if (app.got_subcommand(witness)) return cmd_witness(class_file, history_arg, out_arg);
    if (app.got_subcommand(verify)) return cmd_verify(transcript_file, class_file, budget);
    if (app.got_subcommand(simulate)) return cmd_simulate(config_file, out_arg);
    if (app.got_subcommand(map)) return cmd_map(in_file, out_arg);
    if (app.got_subcommand(experiment)) return cmd_experiment(config_file, out_arg);
  } catch (const ProtocolError& e) {
    std::cerr << "protocol violation: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const dff::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  }
  return kExitOk;
}
