#include "ivmed/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace ivmed {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError("scenario " + (where.empty() ? std::string("/") : where) + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(where + "/" + key, "unknown key");
  }
}

const json& field(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where + "/" + key, "missing required key");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  fail(where, "expected a non-negative integer");
}

const json& pair_array(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) fail(where, "expected an array of length 2");
  return v;
}

MediatorResponse mediator_table(const json& v, const std::string& where) {
  MediatorResponse r;
  pair_array(v, where);
  for (int d = 0; d < 2; ++d) {
    const std::string row = where + "/" + std::to_string(d);
    pair_array(v[d], row);
    for (int z = 0; z < 2; ++z) {
      const std::string cell = row + "/" + std::to_string(z);
      const json& x = v[d][z];
      if (!x.is_number_integer() || (x.get<std::int64_t>() != 0 && x.get<std::int64_t>() != 1)) {
        fail(cell, "mediator entries must be 0 or 1");
      }
      r.m[d][z] = static_cast<std::uint8_t>(x.get<std::int64_t>());
    }
  }
  return r;
}

OutcomeProfile outcome_table(const json& v, const std::string& where) {
  OutcomeProfile p;
  pair_array(v, where);
  for (int d = 0; d < 2; ++d) {
    const std::string row = where + "/" + std::to_string(d);
    pair_array(v[d], row);
    for (int m = 0; m < 2; ++m) p.y[d][m] = number(v[d][m], row + "/" + std::to_string(m));
  }
  return p;
}

McSettings mc_settings(const json& v, const std::string& where) {
  reject_unknown(v, where, {"n_grid", "reps", "seed", "estimators"});
  McSettings mc;
  if (auto it = v.find("n_grid"); it != v.end()) {
    if (!it->is_array()) fail(where + "/n_grid", "expected an array");
    mc.n_grid.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      mc.n_grid.push_back(unsigned_integer((*it)[i], where + "/n_grid/" + std::to_string(i)));
    }
  }
  if (auto it = v.find("reps"); it != v.end()) mc.reps = unsigned_integer(*it, where + "/reps");
  if (auto it = v.find("seed"); it != v.end()) mc.seed = unsigned_integer(*it, where + "/seed");
  if (auto it = v.find("estimators"); it != v.end()) {
    if (!it->is_array()) fail(where + "/estimators", "expected an array");
    mc.estimators.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string loc = where + "/estimators/" + std::to_string(i);
      const json& e = (*it)[i];
      std::optional<EstimatorKind> kind;
      if (e.is_string()) kind = parse_estimator(e.get<std::string>());
      if (!kind) fail(loc, "estimator must be \"iv\" or \"si\"");
      mc.estimators.push_back(*kind);
    }
  }
  return mc;
}

OutputPaths output_paths(const json& v, const std::string& where) {
  reject_unknown(v, where, {"json", "csv"});
  OutputPaths out;
  for (const char* key : {"json", "csv"}) {
    if (auto it = v.find(key); it != v.end()) {
      if (!it->is_string()) fail(where + "/" + key, "expected a string");
      (std::string_view(key) == "json" ? out.json : out.csv) = it->get<std::string>();
    }
  }
  return out;
}

}  // namespace

Population population_from_json(const json& doc, const std::string& where) {
  if (!doc.is_object()) fail(where, "expected an object");
  Population pop;
  pop.p_z = number(field(doc, where, "p_z"), where + "/p_z");
  pop.p_d = number(field(doc, where, "p_d"), where + "/p_d");
  const json& strata = field(doc, where, "strata");
  if (!strata.is_array()) fail(where + "/strata", "expected an array");
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const std::string loc = where + "/strata/" + std::to_string(s);
    const json& st = strata[s];
    reject_unknown(st, loc, {"weight", "m", "y", "noise_sd"});
    Stratum stratum;
    stratum.weight = number(field(st, loc, "weight"), loc + "/weight");
    stratum.response = mediator_table(field(st, loc, "m"), loc + "/m");
    stratum.outcomes = outcome_table(field(st, loc, "y"), loc + "/y");
    stratum.noise_sd = number(field(st, loc, "noise_sd"), loc + "/noise_sd");
    pop.strata.push_back(stratum);
  }
  return pop;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: malformed JSON: ") + e.what());
  }
  reject_unknown(doc, "", {"p_z", "p_d", "strata", "mc", "output"});

  Scenario sc;
  sc.population = population_from_json(doc);
  if (auto it = doc.find("mc"); it != doc.end()) sc.mc = mc_settings(*it, "/mc");
  if (auto it = doc.find("output"); it != doc.end()) sc.output = output_paths(*it, "/output");
  require_valid(sc.population);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

json to_json(const Population& pop) {
  json strata = json::array();
  for (const Stratum& s : pop.strata) {
    json m = json::array();
    json y = json::array();
    for (int d = 0; d < 2; ++d) {
      m.push_back({s.response.at(d, 0), s.response.at(d, 1)});
      y.push_back({s.outcomes.at(d, 0), s.outcomes.at(d, 1)});
    }
    strata.push_back({{"weight", s.weight}, {"m", m}, {"y", y}, {"noise_sd", s.noise_sd}});
  }
  return {{"p_z", pop.p_z}, {"p_d", pop.p_d}, {"strata", strata}};
}

}  // namespace ivmed
