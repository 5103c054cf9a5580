#include "selftimed/delay.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace selftimed {

DelayModel DelayModel::nominal() {
  DelayModel m;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(GateKind::Delay); ++k) {
    const auto kind = static_cast<GateKind>(k);
    Time d = 25;
    if (kind == GateKind::Inv || kind == GateKind::Buf) d = 10;
    else if (kind == GateKind::C2) d = 30;
    else if (kind == GateKind::Delay) continue;
    else if (arity(kind) == 2) d = 15;
    m.defaults[kind] = {d, d};
  }
  return m;
}

DelaySpec DelayModel::base(const Netlist& n, GateId g) const {
  const Gate& gate = n.gate(g);
  if (gate.kind == GateKind::Delay) return gate.delay.value_or(DelaySpec{});
  if (auto it = overrides.find(g); it != overrides.end()) return it->second;
  if (auto it = defaults.find(gate.kind); it != defaults.end()) return it->second;
  throw std::runtime_error("delay model has no entry for " + std::string(kind_name(gate.kind)));
}

std::vector<DelaySpec> resolve_delays(const Netlist& n, const DelayModel& m) {
  std::vector<double> factor(n.num_gates(), 1.0);
  if (m.jitter) {
    std::mt19937_64 rng(m.jitter->seed);
    std::uniform_real_distribution<double> dist(m.jitter->min, m.jitter->max);
    for (double& f : factor) f = m.jitter->min == m.jitter->max ? m.jitter->min : dist(rng);
  }
  std::vector<DelaySpec> out(n.num_gates());
  for (GateId g = 0; g < n.num_gates(); ++g) {
    const DelaySpec b = m.base(n, g);
    const bool delay_gate = n.gate(g).kind == GateKind::Delay;
    const double k = (delay_gate ? 1.0 : factor[g]) * m.vdd_multiplier;
    const Time lo = delay_gate ? 0 : 1;
    auto scale = [&](Time t) {
      return std::max<Time>(lo, static_cast<Time>(std::ceil(static_cast<double>(t) * k - 1e-9)));
    };
    out[g] = {scale(b.rise), scale(b.fall)};
  }
  return out;
}

std::vector<DelaySpec> corner_delays(const Netlist& n, const DelayModel& m, bool slow) {
  DelayModel c = m;
  if (m.jitter) {
    const double k = slow ? m.jitter->max : m.jitter->min;
    c.jitter = Jitter{k, k, 0};
  }
  return resolve_delays(n, c);
}

nlohmann::json to_json(const DelayModel& m) {
  nlohmann::json def = nlohmann::json::object();
  for (const auto& [k, d] : m.defaults) def[std::string(kind_name(k))] = {{"rise", d.rise}, {"fall", d.fall}};
  nlohmann::json ov = nlohmann::json::object();
  for (const auto& [g, d] : m.overrides) ov[std::to_string(g)] = {{"rise", d.rise}, {"fall", d.fall}};
  nlohmann::json j{{"default", def}, {"overrides", ov}, {"vdd_multiplier", m.vdd_multiplier}};
  if (m.jitter) j["jitter"] = {{"min", m.jitter->min}, {"max", m.jitter->max}, {"seed", m.jitter->seed}};
  return j;
}

namespace {

DelaySpec read_spec(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items())
    if (key != "rise" && key != "fall") throw std::invalid_argument("delay entry: unknown field '" + key + "'");
  DelaySpec d{j.at("rise").get<Time>(), j.at("fall").get<Time>()};
  if (d.rise < 0 || d.fall < 0) throw std::invalid_argument("delays must be non-negative");
  return d;
}

}  // namespace

DelayModel delay_model_from_json(const nlohmann::json& j) {
  DelayModel m = DelayModel::nominal();
  try {
    for (const auto& [key, _] : j.items())
      if (key != "default" && key != "overrides" && key != "jitter" && key != "vdd_multiplier")
        throw std::invalid_argument("delay model: unknown field '" + key + "'");
    if (j.contains("default")) {
      for (const auto& [name, spec] : j.at("default").items()) {
        const auto kind = kind_from_name(name);
        if (!kind) throw std::invalid_argument("delay model: unknown gate kind '" + name + "'");
        m.defaults[*kind] = read_spec(spec);
      }
    }
    if (j.contains("overrides"))
      for (const auto& [id, spec] : j.at("overrides").items())
        m.overrides[static_cast<GateId>(std::stoul(id))] = read_spec(spec);
    if (j.contains("jitter")) {
      const auto& jt = j.at("jitter");
      Jitter x{jt.at("min").get<double>(), jt.at("max").get<double>(), jt.value("seed", std::uint64_t{0})};
      if (x.min <= 0 || x.max < x.min) throw std::invalid_argument("jitter range must satisfy 0 < min <= max");
      m.jitter = x;
    }
    m.vdd_multiplier = j.value("vdd_multiplier", 1.0);
    if (m.vdd_multiplier <= 0) throw std::invalid_argument("vdd_multiplier must be positive");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("delay model JSON: ") + e.what());
  }
  return m;
}

DelayModel load_delay_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return delay_model_from_json(nlohmann::json::parse(in));
}

}  // namespace selftimed
