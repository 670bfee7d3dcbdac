#include "dpfed/serialization.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace dpfed {

using nlohmann::json;

namespace {

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("malformed JSON: {}", e.what()));
  }
}

void require_object(const json& j, std::string_view what) {
  if (!j.is_object()) throw std::invalid_argument(fmt::format("{}: expected a JSON object", what));
}

void only_keys(const json& j, std::string_view what, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(fmt::format("{}: unknown key '{}'", what, key));
  }
}

const json& field(const json& j, std::string_view what, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(fmt::format("{}: missing key '{}'", what, key));
  return *it;
}

double as_real(const json& v, std::string_view what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
  }
  throw std::invalid_argument(fmt::format("{}: expected a number", what));
}

std::uint64_t as_u64(const json& v, std::string_view what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw std::invalid_argument(fmt::format("{}: expected a non-negative integer", what));
}

int as_int(const json& v, std::string_view what) {
  if (!v.is_number_integer()) throw std::invalid_argument(fmt::format("{}: expected an integer", what));
  return v.get<int>();
}

std::string as_string(const json& v, std::string_view what) {
  if (!v.is_string()) throw std::invalid_argument(fmt::format("{}: expected a string", what));
  return v.get<std::string>();
}

json real_or_inf(double x) { return std::isinf(x) ? json("inf") : json(x); }

json tree_json(const CoeffTree& t) {
  json levels = json::array();
  levels.push_back(std::vector<double>(t.father().begin(), t.father().end()));
  for (int l = t.l0(); l <= t.top_level(); ++l)
    levels.push_back(std::vector<double>(t.level(l).begin(), t.level(l).end()));
  return json{{"l0", t.l0()}, {"levels", levels}};
}

CoeffTree tree_from(const json& j) {
  require_object(j, "tree");
  only_keys(j, "tree", {"l0", "levels"});
  const int l0 = as_int(field(j, "tree", "l0"), "tree.l0");
  const auto& levels = field(j, "tree", "levels");
  if (!levels.is_array() || levels.empty())
    throw std::invalid_argument("tree.levels: expected a non-empty array");
  if (l0 < 0 || l0 > 24) throw std::invalid_argument("tree.l0 out of range");
  std::vector<double> flat;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& lev = levels[i];
    const std::size_t expect = std::size_t{1} << (i == 0 ? l0 : l0 + static_cast<int>(i) - 1);
    if (!lev.is_array() || lev.size() != expect)
      throw std::invalid_argument(fmt::format("tree.levels[{}]: expected {} values", i, expect));
    for (const auto& v : lev) flat.push_back(as_real(v, "tree value"));
  }
  return CoeffTree::from_flat(l0, flat);
}

json plan_fields(const ProtocolPlan& p, std::size_t server) {
  json j{{"server", server},
         {"target", p.target.kind == TargetKind::global ? "global" : "point"},
         {"L", p.L},
         {"tau", p.tau},
         {"l0", p.l0},
         {"gamma", p.gamma},
         {"D", p.D}};
  if (p.target.kind == TargetKind::point) j["x0"] = p.target.x0;
  return j;
}

struct Decoded {
  ProtocolPlan plan;
  std::size_t server = 0;
  std::vector<double> values;
};

Decoded decode(std::string_view line) {
  const json j = parse(line);
  require_object(j, "transcript");
  only_keys(j, "transcript", {"server", "target", "L", "tau", "values", "l0", "x0", "gamma", "D"});
  Decoded d;
  d.server = as_u64(field(j, "transcript", "server"), "transcript.server");
  const auto target = as_string(field(j, "transcript", "target"), "transcript.target");
  if (target == "global") {
    d.plan.target = Target::global();
  } else if (target == "point") {
    d.plan.target = Target::point(as_real(field(j, "transcript", "x0"), "transcript.x0"));
  } else {
    throw std::invalid_argument(fmt::format("transcript.target: unknown value '{}'", target));
  }
  d.plan.L = as_int(field(j, "transcript", "L"), "transcript.L");
  d.plan.tau = as_real(field(j, "transcript", "tau"), "transcript.tau");
  d.plan.l0 = j.contains("l0") ? as_int(j["l0"], "transcript.l0") : 0;
  if (j.contains("gamma")) d.plan.gamma = as_real(j["gamma"], "transcript.gamma");
  if (j.contains("D")) d.plan.D = as_real(j["D"], "transcript.D");
  const auto& values = field(j, "transcript", "values");
  if (!values.is_array()) throw std::invalid_argument("transcript.values: expected an array");
  for (const auto& v : values) d.values.push_back(as_real(v, "transcript value"));
  if (d.plan.L < 1 || d.plan.L > 24 || d.plan.l0 < 0 || d.plan.l0 >= d.plan.L)
    throw std::invalid_argument("transcript: inconsistent levels");
  return d;
}

std::vector<ServerSpec> servers_from(const json& j, double eps_cap) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("servers: expected a non-empty array");
  std::vector<ServerSpec> out;
  for (const auto& s : j) {
    require_object(s, "server");
    only_keys(s, "server", {"n", "eps", "delta", "count"});
    ServerSpec spec;
    spec.n = as_u64(field(s, "server", "n"), "server.n");
    spec.budget = PrivacyBudget::make(as_real(field(s, "server", "eps"), "server.eps"),
                                      s.contains("delta") ? as_real(s["delta"], "server.delta") : 0.0,
                                      eps_cap);
    const std::uint64_t count = s.contains("count") ? as_u64(s["count"], "server.count") : 1;
    if (count == 0) throw std::invalid_argument("server.count must be >= 1");
    out.insert(out.end(), count, spec);
  }
  return out;
}

}  // namespace

std::string coeff_tree_to_json(const CoeffTree& tree) { return tree_json(tree).dump(); }

CoeffTree coeff_tree_from_json(std::string_view text) { return tree_from(parse(text)); }

std::string TranscriptCodec::encode(const GlobalTranscript& t) {
  json j = plan_fields(t.plan(), t.server_id());
  j["values"] = t.noisy_coeffs();
  return j.dump();
}

std::string TranscriptCodec::encode(const PointTranscript& t) {
  json j = plan_fields(t.plan(), t.server_id());
  j["values"] = std::vector<double>{t.value()};
  return j.dump();
}

GlobalTranscript TranscriptCodec::decode_global(std::string_view line) {
  Decoded d = decode(line);
  if (d.plan.target.kind != TargetKind::global)
    throw std::invalid_argument("transcript: expected a global transcript");
  if (d.values.size() != d.plan.dimension())
    throw std::invalid_argument(
        fmt::format("transcript: {} values for L = {}", d.values.size(), d.plan.L));
  return GlobalTranscript(std::move(d.values), d.plan, d.server);
}

PointTranscript TranscriptCodec::decode_point(std::string_view line) {
  Decoded d = decode(line);
  if (d.plan.target.kind != TargetKind::point)
    throw std::invalid_argument("transcript: expected a point transcript");
  if (d.values.size() != 1) throw std::invalid_argument("transcript: point transcript needs one value");
  return PointTranscript(d.values[0], d.plan, d.server);
}

TargetKind TranscriptCodec::kind_of(std::string_view line) {
  return decode(line).plan.target.kind;
}

ExperimentConfig config_from_json(std::string_view text) {
  const json j = parse(text);
  require_object(j, "config");
  only_keys(j, "config",
            {"experiment_id", "besov", "family", "cascade_depth", "sigma", "servers", "target",
             "truth", "reps", "seed", "risk_grid", "eps_cap", "envelope"});
  ExperimentConfig c;
  if (j.contains("experiment_id")) c.experiment_id = as_string(j["experiment_id"], "experiment_id");

  const auto& b = field(j, "config", "besov");
  require_object(b, "besov");
  only_keys(b, "besov", {"alpha", "p", "q", "R"});
  c.besov.alpha = as_real(field(b, "besov", "alpha"), "besov.alpha");
  if (b.contains("p")) c.besov.p = as_real(b["p"], "besov.p");
  if (b.contains("q")) c.besov.q = as_real(b["q"], "besov.q");
  if (b.contains("R")) c.besov.R = as_real(b["R"], "besov.R");

  if (j.contains("family")) c.family = parse_family_name(as_string(j["family"], "family"));
  if (j.contains("cascade_depth")) c.cascade_depth = as_int(j["cascade_depth"], "cascade_depth");
  if (j.contains("sigma")) c.sigma = as_real(j["sigma"], "sigma");
  if (j.contains("eps_cap")) c.eps_cap = as_real(j["eps_cap"], "eps_cap");
  c.servers = servers_from(field(j, "config", "servers"), c.eps_cap);

  if (j.contains("target")) {
    const auto& t = j["target"];
    require_object(t, "target");
    only_keys(t, "target", {"kind", "x0"});
    const auto kind = as_string(field(t, "target", "kind"), "target.kind");
    const double x0 = t.contains("x0") ? as_real(t["x0"], "target.x0") : 0.5;
    if (kind == "global") c.target = Target::global();
    else if (kind == "point") c.target = Target::point(x0);
    else throw std::invalid_argument(fmt::format("target.kind: unknown value '{}'", kind));
  }

  if (j.contains("truth")) {
    const auto& t = j["truth"];
    require_object(t, "truth");
    only_keys(t, "truth", {"style", "seed", "max_level", "tree"});
    if (t.contains("tree")) c.truth.tree = tree_from(t["tree"]);
    if (t.contains("style")) c.truth.style = parse_truth_style(as_string(t["style"], "truth.style"));
    if (t.contains("seed")) c.truth.seed = as_u64(t["seed"], "truth.seed");
    if (t.contains("max_level")) c.truth.max_level = as_int(t["max_level"], "truth.max_level");
  }

  if (j.contains("reps")) c.reps = as_u64(j["reps"], "reps");
  if (j.contains("seed")) c.seed = as_u64(j["seed"], "seed");
  if (j.contains("risk_grid")) c.risk_grid = as_u64(j["risk_grid"], "risk_grid");
  if (j.contains("envelope")) c.envelope = as_real(j["envelope"], "envelope");
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json servers = json::array();
  for (const auto& s : c.servers)
    servers.push_back({{"n", s.n}, {"eps", s.budget.eps}, {"delta", s.budget.delta}});
  json target{{"kind", c.target.kind == TargetKind::global ? "global" : "point"}};
  if (c.target.kind == TargetKind::point) target["x0"] = c.target.x0;
  json truth;
  if (c.truth.tree) truth["tree"] = tree_json(*c.truth.tree);
  truth["style"] = to_string(c.truth.style);
  truth["seed"] = c.truth.seed;
  truth["max_level"] = c.truth.max_level;
  json j{{"experiment_id", c.experiment_id},
         {"besov",
          {{"alpha", c.besov.alpha}, {"p", real_or_inf(c.besov.p)}, {"q", real_or_inf(c.besov.q)},
           {"R", c.besov.R}}},
         {"family", to_string(c.family)},
         {"cascade_depth", c.cascade_depth},
         {"sigma", c.sigma},
         {"servers", servers},
         {"target", target},
         {"truth", truth},
         {"reps", c.reps},
         {"seed", c.seed},
         {"risk_grid", c.risk_grid},
         {"eps_cap", c.eps_cap}};
  if (c.envelope) j["envelope"] = *c.envelope;
  return j.dump(2);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_file(path)); }

std::vector<ServerSpec> servers_from_json(std::string_view text, double eps_cap) {
  const json j = parse(text);
  if (j.is_object()) {
    only_keys(j, "servers file", {"servers"});
    return servers_from(field(j, "servers file", "servers"), eps_cap);
  }
  return servers_from(j, eps_cap);
}

}  // namespace dpfed
