#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "dff/component_class.hpp"
#include "dff/dimensions.hpp"
#include "dff/secret.hpp"
#include "dff/separation_class.hpp"
#include "dff/teacher_class.hpp"

namespace dff {

// nlohmann::json with sorted keys gives canonical, byte-stable encodings
using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Features over a materialized instance serialize as 0/1 arrays; features of
/// unbounded domains as their member list.
inline Json feature_to_json(const Feature& f, const Instance* inst) {
  if (inst != nullptr) {
    std::vector<int> bits(inst->example_count, 0);
    for (ExampleId x : f.members()) bits.at(x) = 1;
    return Json(bits);
  }
  return Json{{"members", f.members()}};
}

inline Feature feature_from_json(const Json& j) {
  std::vector<ExampleId> members;
  if (j.is_array()) {
    for (std::size_t x = 0; x < j.size(); ++x) {
      if (j[x].get<int>() != 0) members.push_back(x);
    }
  } else {
    members = j.at("members").get<std::vector<ExampleId>>();
  }
  return Feature(std::move(members));
}

inline Json instance_to_json(const Instance& inst) {
  Json features = Json::array();
  for (const auto& f : inst.features) features.push_back(feature_to_json(f, &inst));
  return Json{{"schema_version", kSchemaVersion},
              {"examples", inst.example_count},
              {"labels", inst.label_count},
              {"features", features}};
}

inline Instance instance_from_json(const Json& j) {
  Instance inst;
  inst.example_count = j.at("examples").get<std::uint64_t>();
  inst.label_count = j.at("labels").get<Label>();
  for (const auto& f : j.at("features")) inst.features.push_back(feature_from_json(f));
  inst.validate();
  return inst;
}

inline Json teacher_to_json(const Instance& inst, const Teacher& t) {
  Json feedback = Json::array();
  for (ExampleId x = 0; x < inst.example_count; ++x) {
    Json row = Json::array();
    for (ExampleId xh = 0; xh < inst.example_count; ++xh) {
      auto phi = t.psi(inst, x, xh);
      row.push_back(phi ? feature_to_json(*phi, &inst) : Json(nullptr));
    }
    feedback.push_back(std::move(row));
  }
  return Json{{"labels", t.labels}, {"feedback", feedback}};
}

inline Teacher teacher_from_json(const Instance& inst, const Json& j) {
  Teacher t;
  t.labels = j.at("labels").get<std::vector<Label>>();
  const auto& fb = j.at("feedback");
  t.feedback.assign(inst.example_count * inst.example_count, -1);
  for (ExampleId x = 0; x < inst.example_count; ++x) {
    for (ExampleId xh = 0; xh < inst.example_count; ++xh) {
      const Json& cell = fb.at(x).at(xh);
      if (cell.is_null()) continue;
      auto id = inst.feature_id(feature_from_json(cell));
      if (!id) throw ParameterError("teacher feedback uses a feature outside the pool");
      t.feedback[x * inst.example_count + xh] = static_cast<std::int32_t>(*id);
    }
  }
  return t;
}

inline Json history_to_json(const History& h) {
  Json out = Json::array();
  for (const auto& [x, y] : h.entries()) out.push_back(Json::array({x, y}));
  return out;
}

inline History history_from_json(const Json& j) {
  History h;
  for (const auto& e : j) h.add(e.at(0).get<ExampleId>(), e.at(1).get<Label>());
  return h;
}

inline Json round_to_json(const Round& r, const Instance* inst) {
  Json out{{"x", r.x},
           {"explanation", r.explanation},
           {"predicted", r.predicted},
           {"truth", r.truth}};
  out["phi"] = r.feature ? feature_to_json(*r.feature, inst) : Json(nullptr);
  return out;
}

inline Round round_from_json(const Json& j) {
  Round r;
  r.x = j.at("x").get<ExampleId>();
  r.explanation = j.at("explanation").get<ExampleId>();
  r.predicted = j.at("predicted").get<Label>();
  r.truth = j.at("truth").get<Label>();
  if (!j.at("phi").is_null()) r.feature = feature_from_json(j.at("phi"));
  return r;
}

inline Json transcript_to_json(const Transcript& t, const Instance* inst) {
  Json rounds = Json::array();
  for (const Round& r : t.rounds) rounds.push_back(round_to_json(r, inst));
  return Json{{"schema_version", kSchemaVersion},
              {"history", history_to_json(t.initial_history)},
              {"rounds", rounds},
              {"exceptions", t.exceptions}};
}

inline Transcript transcript_from_json(const Json& j) {
  Transcript t;
  t.initial_history = history_from_json(j.at("history"));
  for (const auto& r : j.at("rounds")) t.rounds.push_back(round_from_json(r));
  t.exceptions = j.at("exceptions").get<std::vector<std::size_t>>();
  return t;
}

/// JSON Lines: a header object, one round per line, a trailing summary.
inline std::string transcript_to_jsonl(const Transcript& t, const Instance* inst) {
  std::ostringstream os;
  os << Json{{"type", "header"},
             {"schema_version", kSchemaVersion},
             {"history", history_to_json(t.initial_history)},
             {"exceptions", t.exceptions}}
            .dump()
     << '\n';
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    Json row = round_to_json(t.rounds[i], inst);
    row["type"] = "round";
    row["t"] = i;
    os << row.dump() << '\n';
  }
  os << Json{{"type", "summary"},
             {"rounds", t.rounds.size()},
             {"mistakes", count_mistakes(t)},
             {"exceptions", t.exceptions.size()}}
            .dump()
     << '\n';
  return os.str();
}

inline Transcript transcript_from_jsonl(std::istream& in) {
  Transcript t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      t.initial_history = history_from_json(j.at("history"));
      t.exceptions = j.at("exceptions").get<std::vector<std::size_t>>();
    } else if (type == "round") {
      t.rounds.push_back(round_from_json(j));
    }
  }
  return t;
}

inline Json hypothesis_class_to_json(const HypothesisClass& f) {
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "hypotheses"},
              {"examples", f.example_count},
              {"labels", f.label_count},
              {"functions", f.functions}};
}

inline HypothesisClass hypothesis_class_from_json(const Json& j) {
  HypothesisClass f;
  f.example_count = j.at("examples").get<std::uint64_t>();
  f.label_count = j.at("labels").get<Label>();
  f.functions = j.at("functions").get<std::vector<std::vector<Label>>>();
  f.dedup();
  return f;
}

/// A parsed class specification: the class object plus an optional bundled
/// history (the separation construction fixes its own).
struct LoadedClass {
  std::unique_ptr<TeacherClass> cls;
  std::optional<History> history;
  std::string kind;
};

inline Json extensional_class_to_json(const ExtensionalClass& cls) {
  Json teachers = Json::array();
  for (const auto& t : cls.teachers()) teachers.push_back(teacher_to_json(*cls.instance(), t));
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "extensional"},
              {"instance", instance_to_json(*cls.instance())},
              {"teachers", teachers}};
}

inline LoadedClass class_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  LoadedClass out;
  out.kind = kind;
  if (kind == "extensional") {
    Instance inst = instance_from_json(j.at("instance"));
    std::vector<Teacher> teachers;
    for (const auto& t : j.at("teachers")) teachers.push_back(teacher_from_json(inst, t));
    out.cls = std::make_unique<ExtensionalClass>(std::move(inst), std::move(teachers));
  } else if (kind == "component") {
    const auto& p = j.at("params");
    ComponentParams params{p.at("coords").get<int>(), p.at("nonzero_labels").get<Label>(),
                           p.at("max_rules").get<int>(), p.at("max_conj").get<int>()};
    out.cls = std::make_unique<ComponentClass>(params);
  } else if (kind == "separation") {
    const auto& p = j.at("params");
    auto [cls, history] =
        make_separation_class(p.at("coords").get<int>(), p.at("teachers").get<int>());
    out.cls = std::make_unique<ExtensionalClass>(std::move(cls));
    out.history = std::move(history);
  } else if (kind == "secret") {
    const auto& p = j.at("params");
    std::optional<std::uint64_t> prime;
    if (p.contains("prime")) prime = p.at("prime").get<std::uint64_t>();
    out.cls = std::make_unique<SecretClass>(
        make_secret_params(p.at("block").get<int>(), p.at("degree").get<int>(), prime));
  } else {
    throw ParameterError("unknown class kind: " + kind);
  }
  return out;
}

inline Json tree_to_json(const DffTree& tree, const Instance* inst) {
  std::function<Json(std::size_t)> emit = [&](std::size_t idx) {
    const DffTree::Node& n = tree.nodes[idx];
    Json node;
    node["y"] = n.y ? Json(*n.y) : Json(nullptr);
    node["phi"] = n.phi ? feature_to_json(*n.phi, inst) : Json(nullptr);
    node["x"] = n.x ? Json(*n.x) : Json(nullptr);
    Json children = Json::array();
    for (const auto& [edge, child] : n.edges) {
      children.push_back(Json{{"explanation", edge.first}, {"label", edge.second},
                              {"node", emit(child)}});
    }
    node["children"] = std::move(children);
    return node;
  };
  return Json{{"schema_version", kSchemaVersion}, {"root", emit(0)}};
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open file: " + path);
  return Json::parse(in);
}

}  // namespace dff
