#include "teamci/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "teamci/errors.hpp"

namespace teamci {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

// Strict field policy: unknown keys are rejected with their location.
void expect_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& required, const std::set<std::string>& optional) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!required.count(key) && !optional.count(key)) fail(where, "unknown field '" + key + "'");
  }
  for (const auto& key : required)
    if (!obj.contains(key)) fail(where, "missing field '" + key + "'");
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::vector<double> get_number_array(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

SpacePtr parse_space(const json& obj, const std::string& where, const std::string& label) {
  expect_keys(obj, where, {"atoms"}, {"coords", "compact"});
  const json& atoms_j = obj.at("atoms");
  if (!atoms_j.is_array() || atoms_j.empty()) fail(where + ".atoms", "expected a nonempty array");

  std::vector<Atom> atoms;
  atoms.reserve(atoms_j.size());
  for (std::size_t i = 0; i < atoms_j.size(); ++i) {
    if (!atoms_j[i].is_string())
      fail(where + ".atoms[" + std::to_string(i) + "]", "expected a string label");
    atoms.push_back({atoms_j[i].get<std::string>(), {}});
  }
  if (obj.contains("coords")) {
    const json& coords = obj.at("coords");
    if (!coords.is_array() || coords.size() != atoms.size())
      fail(where + ".coords", "expected one coordinate vector per atom");
    for (std::size_t i = 0; i < coords.size(); ++i)
      atoms[i].coord = get_number_array(coords[i], where + ".coords[" + std::to_string(i) + "]");
  }
  bool compact = false;
  if (obj.contains("compact")) {
    if (!obj.at("compact").is_boolean()) fail(where + ".compact", "expected a boolean");
    compact = obj.at("compact").get<bool>();
  }
  try {
    return FiniteSpace::make(label, std::move(atoms), compact);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

ObservationChannel parse_channel(const json& obj, const std::string& where, int agent,
                                 const SpacePtr& obs_space, const SpacePtr& state_space) {
  const std::size_t ny = obs_space->size();
  const std::size_t nx = state_space->size();

  ObservationChannel ch{agent, Measure::uniform(obs_space), {}, "table", {}};

  if (obj.contains("family")) {
    if (!obj.at("family").is_string()) fail(where + ".family", "expected a string");
    const std::string family = obj.at("family").get<std::string>();
    if (family == "binary-symmetric") {
      expect_keys(obj, where, {"family", "p"}, {});
      if (ny != 2 || nx != 2)
        fail(where, "binary-symmetric channel requires binary observation and state spaces");
      const double p = get_number(obj.at("p"), where + ".p");
      if (p < 0.0 || p > 1.0) fail(where + ".p", "crossover probability outside [0,1]");
      // W(y|x) = 1-p on the diagonal; q = W / mu with uniform mu
      ch.density.assign(ny * nx, 0.0);
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x)
          ch.density[y * nx + x] = (y == x ? 1.0 - p : p) * 2.0;
      ch.family = "binary-symmetric";
      ch.family_params = {p};
      return ch;
    }
    if (family == "additive-noise") {
      expect_keys(obj, where, {"family", "sigma"}, {"floor"});
      if (obs_space->coord_dim() != 1 || state_space->coord_dim() != 1)
        fail(where, "additive-noise channel requires 1-d coordinates on Y and X");
      const double sigma = get_number(obj.at("sigma"), where + ".sigma");
      if (!(sigma > 0.0)) fail(where + ".sigma", "sigma must be positive");
      double floor = 0.0;
      if (obj.contains("floor")) {
        floor = get_number(obj.at("floor"), where + ".floor");
        if (floor < 0.0 || floor > 1.0) fail(where + ".floor", "floor outside [0,1]");
      }
      // W(y|x) = (1-floor) * discretized gaussian(y - x) + floor * uniform
      ch.density.assign(ny * nx, 0.0);
      for (std::size_t x = 0; x < nx; ++x) {
        double xc = state_space->atom(x).coord[0];
        double norm = 0.0;
        std::vector<double> g(ny);
        for (std::size_t y = 0; y < ny; ++y) {
          double d = obs_space->atom(y).coord[0] - xc;
          g[y] = std::exp(-d * d / (2.0 * sigma * sigma));
          norm += g[y];
        }
        for (std::size_t y = 0; y < ny; ++y) {
          double w = (1.0 - floor) * g[y] / norm + floor / static_cast<double>(ny);
          ch.density[y * nx + x] = w * static_cast<double>(ny);  // q = W / uniform mu
        }
      }
      ch.family = "additive-noise";
      ch.family_params = {sigma, floor};
      return ch;
    }
    fail(where + ".family", "unknown channel family '" + family + "'");
  }

  expect_keys(obj, where, {"density"}, {"reference"});
  const json& density = obj.at("density");
  if (!density.is_array() || density.size() != ny)
    fail(where + ".density", "expected one row per observation atom");
  ch.density.assign(ny * nx, 0.0);
  for (std::size_t y = 0; y < ny; ++y) {
    auto row = get_number_array(density[y], where + ".density[" + std::to_string(y) + "]");
    if (row.size() != nx)
      fail(where + ".density[" + std::to_string(y) + "]", "expected one entry per state atom");
    for (std::size_t x = 0; x < nx; ++x) ch.density[y * nx + x] = row[x];
  }
  if (obj.contains("reference")) {
    auto w = get_number_array(obj.at("reference"), where + ".reference");
    if (w.size() != ny) fail(where + ".reference", "expected one weight per observation atom");
    try {
      ch.reference = Measure::probability(obs_space, std::move(w));
    } catch (const std::invalid_argument& e) {
      fail(where + ".reference", e.what());
    }
  }
  return ch;
}

CostSpec parse_cost(const json& obj, const std::string& where) {
  if (obj.contains("family")) {
    if (!obj.at("family").is_string()) fail(where + ".family", "expected a string");
    const std::string family = obj.at("family").get<std::string>();
    if (family == "quadratic") {
      expect_keys(obj, where, {"family", "track_weights", "coupling_weight", "effort_weights"},
                  {});
      return CostSpec::quadratic(
          get_number_array(obj.at("track_weights"), where + ".track_weights"),
          get_number(obj.at("coupling_weight"), where + ".coupling_weight"),
          get_number_array(obj.at("effort_weights"), where + ".effort_weights"));
    }
    if (family == "mismatch") {
      expect_keys(obj, where, {"family", "state_weights", "disagreement_weight"}, {});
      return CostSpec::mismatch(
          get_number_array(obj.at("state_weights"), where + ".state_weights"),
          get_number(obj.at("disagreement_weight"), where + ".disagreement_weight"));
    }
    fail(where + ".family", "unknown cost family '" + family + "'");
  }
  expect_keys(obj, where, {"table"}, {});
  return CostSpec::table(get_number_array(obj.at("table"), where + ".table"));
}

}  // namespace

TeamProblem load_problem_json(const json& doc, const std::string& source) {
  expect_keys(doc, source, {"version", "name", "state_space", "common_space", "agents",
                            "joint_law", "cost"},
              {"metadata"});

  if (!doc.at("version").is_number_integer() ||
      doc.at("version").get<int>() != kProblemFileVersion)
    fail(source + ".version", "unsupported format version (expected " +
                                  std::to_string(kProblemFileVersion) + ")");
  if (!doc.at("name").is_string()) fail(source + ".name", "expected a string");

  SpacePtr state = parse_space(doc.at("state_space"), source + ".state_space", "state");
  SpacePtr common = parse_space(doc.at("common_space"), source + ".common_space", "common");

  const json& agents = doc.at("agents");
  if (!agents.is_array() || agents.empty())
    fail(source + ".agents", "expected a nonempty array");

  std::vector<SpacePtr> obs_spaces, act_spaces;
  std::vector<ObservationChannel> channels;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = source + ".agents[" + std::to_string(i) + "]";
    expect_keys(agents[i], where, {"observation_space", "action_space", "channel"}, {});
    obs_spaces.push_back(parse_space(agents[i].at("observation_space"),
                                     where + ".observation_space", "y" + std::to_string(i)));
    act_spaces.push_back(parse_space(agents[i].at("action_space"), where + ".action_space",
                                     "u" + std::to_string(i)));
    channels.push_back(parse_channel(agents[i].at("channel"), where + ".channel",
                                     static_cast<int>(i), obs_spaces.back(), state));
  }

  const json& law = doc.at("joint_law");
  if (!law.is_array() || law.size() != state->size())
    fail(source + ".joint_law", "expected one row per state atom");
  std::vector<double> joint(state->size() * common->size());
  for (std::size_t x = 0; x < state->size(); ++x) {
    auto row = get_number_array(law[x], source + ".joint_law[" + std::to_string(x) + "]");
    if (row.size() != common->size())
      fail(source + ".joint_law[" + std::to_string(x) + "]",
           "expected one entry per common-space atom");
    for (std::size_t x0 = 0; x0 < common->size(); ++x0)
      joint[x * common->size() + x0] = row[x0];
  }

  CostSpec cost = parse_cost(doc.at("cost"), source + ".cost");

  std::uint64_t cap = kDefaultEnumerationCap;
  std::optional<double> tv_modulus;
  if (doc.contains("metadata")) {
    const json& meta = doc.at("metadata");
    expect_keys(meta, source + ".metadata", {},
                {"enumeration_cap", "seed", "channel_tv_modulus"});
    if (meta.contains("enumeration_cap")) {
      if (!meta.at("enumeration_cap").is_number_unsigned())
        fail(source + ".metadata.enumeration_cap", "expected a nonnegative integer");
      cap = meta.at("enumeration_cap").get<std::uint64_t>();
    }
    if (meta.contains("channel_tv_modulus"))
      tv_modulus = get_number(meta.at("channel_tv_modulus"),
                              source + ".metadata.channel_tv_modulus");
  }

  try {
    TeamProblem problem(doc.at("name").get<std::string>(), state, common, obs_spaces,
                        act_spaces, std::move(joint), std::move(channels), std::move(cost),
                        cap);
    if (tv_modulus) problem.set_channel_tv_modulus(*tv_modulus);
    return problem;
  } catch (const std::invalid_argument& e) {
    fail(source, e.what());
  }
}

TeamProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return load_problem_json(doc, path.filename().string());
}

TeamProblem parse_problem(const std::filesystem::path& path) {
  TeamProblem problem = load_problem(path);
  ValidationReport report = validate(problem);
  if (!report.ok())
    throw ParseError(path.string() + ": validation failed\n" + report.to_string());
  return problem;
}

namespace {

json space_to_json(const SpacePtr& space) {
  json obj;
  json atoms = json::array();
  for (const auto& a : space->atoms()) atoms.push_back(a.label);
  obj["atoms"] = std::move(atoms);
  if (space->coord_dim() > 0) {
    json coords = json::array();
    for (const auto& a : space->atoms()) coords.push_back(a.coord);
    obj["coords"] = std::move(coords);
  }
  if (space->compact_flag()) obj["compact"] = true;
  return obj;
}

}  // namespace

json serialize_problem(const TeamProblem& problem) {
  json doc;
  doc["version"] = kProblemFileVersion;
  doc["name"] = problem.name();
  doc["state_space"] = space_to_json(problem.state_space());
  doc["common_space"] = space_to_json(problem.common_space());

  json agents = json::array();
  for (int i = 0; i < problem.num_agents(); ++i) {
    json agent;
    agent["observation_space"] = space_to_json(problem.observation_space(i));
    agent["action_space"] = space_to_json(problem.action_space(i));
    const auto& ch = problem.channel(i);
    json channel;
    if (ch.family == "binary-symmetric") {
      channel["family"] = ch.family;
      channel["p"] = ch.family_params.at(0);
    } else if (ch.family == "additive-noise") {
      channel["family"] = ch.family;
      channel["sigma"] = ch.family_params.at(0);
      if (ch.family_params.at(1) != 0.0) channel["floor"] = ch.family_params.at(1);
    } else {
      const std::size_t nx = problem.state_space()->size();
      const std::size_t ny = problem.observation_space(i)->size();
      json rows = json::array();
      for (std::size_t y = 0; y < ny; ++y) {
        json row = json::array();
        for (std::size_t x = 0; x < nx; ++x) row.push_back(ch.density[y * nx + x]);
        rows.push_back(std::move(row));
      }
      channel["density"] = std::move(rows);
      channel["reference"] = ch.reference.weights();
    }
    agent["channel"] = std::move(channel);
    agents.push_back(std::move(agent));
  }
  doc["agents"] = std::move(agents);

  json law = json::array();
  for (std::size_t x = 0; x < problem.state_space()->size(); ++x) {
    json row = json::array();
    for (std::size_t x0 = 0; x0 < problem.common_space()->size(); ++x0)
      row.push_back(problem.joint_weight(x, x0));
    law.push_back(std::move(row));
  }
  doc["joint_law"] = std::move(law);

  json cost;
  switch (problem.cost().family()) {
    case CostSpec::Family::Quadratic:
      cost["family"] = "quadratic";
      cost["track_weights"] = problem.cost().track_weights();
      cost["coupling_weight"] = problem.cost().coupling_weight();
      cost["effort_weights"] = problem.cost().effort_weights();
      break;
    case CostSpec::Family::Mismatch:
      cost["family"] = "mismatch";
      cost["state_weights"] = problem.cost().state_weights();
      cost["disagreement_weight"] = problem.cost().disagreement_weight();
      break;
    case CostSpec::Family::Table:
      cost["table"] = problem.cost().table_values();
      break;
  }
  doc["cost"] = std::move(cost);

  json metadata = json::object();
  if (problem.enumeration_cap() != kDefaultEnumerationCap)
    metadata["enumeration_cap"] = problem.enumeration_cap();
  if (problem.channel_tv_modulus()) metadata["channel_tv_modulus"] = *problem.channel_tv_modulus();
  if (!metadata.empty()) doc["metadata"] = std::move(metadata);
  return doc;
}

namespace {

bool same_space_content(const SpacePtr& a, const SpacePtr& b) {
  return a->same_as(*b) && a->compact_flag() == b->compact_flag();
}

}  // namespace

bool same_problem_content(const TeamProblem& a, const TeamProblem& b) {
  if (a.name() != b.name() || a.num_agents() != b.num_agents()) return false;
  if (!same_space_content(a.state_space(), b.state_space())) return false;
  if (!same_space_content(a.common_space(), b.common_space())) return false;
  for (int i = 0; i < a.num_agents(); ++i) {
    if (!same_space_content(a.observation_space(i), b.observation_space(i))) return false;
    if (!same_space_content(a.action_space(i), b.action_space(i))) return false;
    if (a.channel(i).density != b.channel(i).density) return false;
    if (a.channel(i).reference.weights() != b.channel(i).reference.weights()) return false;
  }
  if (a.joint_law() != b.joint_law()) return false;
  if (a.cost_table() != b.cost_table()) return false;
  if (a.enumeration_cap() != b.enumeration_cap()) return false;
  if (a.channel_tv_modulus() != b.channel_tv_modulus()) return false;
  return true;
}

}  // namespace teamci
