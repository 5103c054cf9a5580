#include "selftimed/netlist.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <set>
#include <sstream>

namespace selftimed {

namespace {

struct KindInfo {
  GateKind kind;
  std::string_view name;
  std::size_t arity;
  Unateness unate;
};

constexpr std::array<KindInfo, 26> kKinds{{
    {GateKind::Inv, "INV", 1, Unateness::Negative},
    {GateKind::Buf, "BUF", 1, Unateness::Positive},
    {GateKind::And2, "AND2", 2, Unateness::Positive},
    {GateKind::And3, "AND3", 3, Unateness::Positive},
    {GateKind::And4, "AND4", 4, Unateness::Positive},
    {GateKind::Or2, "OR2", 2, Unateness::Positive},
    {GateKind::Or3, "OR3", 3, Unateness::Positive},
    {GateKind::Or4, "OR4", 4, Unateness::Positive},
    {GateKind::Nand2, "NAND2", 2, Unateness::Negative},
    {GateKind::Nand3, "NAND3", 3, Unateness::Negative},
    {GateKind::Nand4, "NAND4", 4, Unateness::Negative},
    {GateKind::Nor2, "NOR2", 2, Unateness::Negative},
    {GateKind::Nor3, "NOR3", 3, Unateness::Negative},
    {GateKind::Nor4, "NOR4", 4, Unateness::Negative},
    {GateKind::Aoi21, "AOI21", 3, Unateness::Negative},
    {GateKind::Aoi22, "AOI22", 4, Unateness::Negative},
    {GateKind::Oai21, "OAI21", 3, Unateness::Negative},
    {GateKind::Oai22, "OAI22", 4, Unateness::Negative},
    {GateKind::Ao21, "AO21", 3, Unateness::Positive},
    {GateKind::Ao22, "AO22", 4, Unateness::Positive},
    {GateKind::Oa21, "OA21", 3, Unateness::Positive},
    {GateKind::Oa22, "OA22", 4, Unateness::Positive},
    {GateKind::C2, "C2", 2, Unateness::Positive},
    {GateKind::Xor2, "XOR2", 2, Unateness::Non},
    {GateKind::Xnor2, "XNOR2", 2, Unateness::Non},
    {GateKind::Delay, "DELAY", 1, Unateness::Positive},
}};

const KindInfo& info(GateKind k) { return kKinds[static_cast<std::size_t>(k)]; }

// Ternary AND/OR with pessimistic X.
Logic and_of(std::span<const Logic> in) {
  bool any_x = false;
  for (Logic v : in) {
    if (v == Logic::Zero) return Logic::Zero;
    any_x |= v == Logic::X;
  }
  return any_x ? Logic::X : Logic::One;
}

Logic or_of(std::span<const Logic> in) {
  bool any_x = false;
  for (Logic v : in) {
    if (v == Logic::One) return Logic::One;
    any_x |= v == Logic::X;
  }
  return any_x ? Logic::X : Logic::Zero;
}

Logic and2(Logic a, Logic b) {
  const std::array<Logic, 2> v{a, b};
  return and_of(v);
}
Logic or2(Logic a, Logic b) {
  const std::array<Logic, 2> v{a, b};
  return or_of(v);
}

Logic xor2(Logic a, Logic b) {
  if (a == Logic::X || b == Logic::X) return Logic::X;
  return to_logic(a != b);
}

std::string net_label(const NetlistSpec& s, NetId n) {
  std::ostringstream os;
  os << "net " << n;
  if (n < s.net_names.size() && !s.net_names[n].empty()) os << " (" << s.net_names[n] << ")";
  return os.str();
}

std::string gate_label(const NetlistSpec& s, GateId g) {
  std::ostringstream os;
  os << "gate " << g << " (" << kind_name(s.gates[g].kind) << ")";
  return os.str();
}

}  // namespace

char to_char(Logic v) {
  switch (v) {
    case Logic::Zero: return '0';
    case Logic::One: return '1';
    default: return 'x';
  }
}

std::size_t arity(GateKind kind) { return info(kind).arity; }
Unateness unateness(GateKind kind) { return info(kind).unate; }
bool is_inverting(GateKind kind) { return info(kind).unate == Unateness::Negative; }
bool is_sequential(GateKind kind) { return kind == GateKind::C2 || kind == GateKind::Delay; }
std::string_view kind_name(GateKind kind) { return info(kind).name; }

std::optional<GateKind> kind_from_name(std::string_view name) {
  for (const auto& k : kKinds)
    if (k.name == name) return k.kind;
  return std::nullopt;
}

std::optional<GateKind> complement_kind(GateKind kind) {
  using K = GateKind;
  switch (kind) {
    case K::Inv: return K::Buf;
    case K::Buf: return K::Inv;
    case K::And2: return K::Nand2;
    case K::And3: return K::Nand3;
    case K::And4: return K::Nand4;
    case K::Or2: return K::Nor2;
    case K::Or3: return K::Nor3;
    case K::Or4: return K::Nor4;
    case K::Nand2: return K::And2;
    case K::Nand3: return K::And3;
    case K::Nand4: return K::And4;
    case K::Nor2: return K::Or2;
    case K::Nor3: return K::Or3;
    case K::Nor4: return K::Or4;
    case K::Aoi21: return K::Ao21;
    case K::Aoi22: return K::Ao22;
    case K::Oai21: return K::Oa21;
    case K::Oai22: return K::Oa22;
    case K::Ao21: return K::Aoi21;
    case K::Ao22: return K::Aoi22;
    case K::Oa21: return K::Oai21;
    case K::Oa22: return K::Oai22;
    case K::Xor2: return K::Xnor2;
    case K::Xnor2: return K::Xor2;
    default: return std::nullopt;
  }
}

GateKind and_kind(std::size_t fan_in) {
  switch (fan_in) {
    case 1: return GateKind::Buf;
    case 2: return GateKind::And2;
    case 3: return GateKind::And3;
    case 4: return GateKind::And4;
    default: throw std::invalid_argument("AND fan-in must be 1..4");
  }
}

GateKind or_kind(std::size_t fan_in) {
  switch (fan_in) {
    case 1: return GateKind::Buf;
    case 2: return GateKind::Or2;
    case 3: return GateKind::Or3;
    case 4: return GateKind::Or4;
    default: throw std::invalid_argument("OR fan-in must be 1..4");
  }
}

Logic eval_gate(GateKind kind, std::span<const Logic> in, Logic state) {
  using K = GateKind;
  switch (kind) {
    case K::Inv: return !in[0];
    case K::Buf:
    case K::Delay: return in[0];
    case K::And2:
    case K::And3:
    case K::And4: return and_of(in);
    case K::Or2:
    case K::Or3:
    case K::Or4: return or_of(in);
    case K::Nand2:
    case K::Nand3:
    case K::Nand4: return !and_of(in);
    case K::Nor2:
    case K::Nor3:
    case K::Nor4: return !or_of(in);
    case K::Ao21: return or2(and2(in[0], in[1]), in[2]);
    case K::Ao22: return or2(and2(in[0], in[1]), and2(in[2], in[3]));
    case K::Oa21: return and2(or2(in[0], in[1]), in[2]);
    case K::Oa22: return and2(or2(in[0], in[1]), or2(in[2], in[3]));
    case K::Aoi21: return !eval_gate(K::Ao21, in);
    case K::Aoi22: return !eval_gate(K::Ao22, in);
    case K::Oai21: return !eval_gate(K::Oa21, in);
    case K::Oai22: return !eval_gate(K::Oa22, in);
    case K::Xor2: return xor2(in[0], in[1]);
    case K::Xnor2: return !xor2(in[0], in[1]);
    case K::C2: {
      if (in[0] == in[1] && in[0] != Logic::X) return in[0];
      // Known mismatch holds; an X input can only resolve to the held value
      // if the other input already agrees with it.
      if (in[0] != Logic::X && in[1] != Logic::X) return state;
      const Logic known = in[0] == Logic::X ? in[1] : in[0];
      if (known != Logic::X && known == state) return state;
      return Logic::X;
    }
  }
  return Logic::X;
}

NetId NetlistSpec::add_net(std::string name) {
  net_names.push_back(std::move(name));
  return static_cast<NetId>(net_names.size() - 1);
}

GateId NetlistSpec::add_gate(GateKind kind, std::vector<NetId> inputs, NetId output,
                             std::optional<DelaySpec> delay) {
  gates.push_back(Gate{kind, std::move(inputs), output, delay});
  return static_cast<GateId>(gates.size() - 1);
}

NetId NetlistSpec::emit(GateKind kind, std::vector<NetId> inputs, std::string name) {
  const NetId out = add_net(std::move(name));
  add_gate(kind, std::move(inputs), out);
  return out;
}

Netlist Netlist::build(NetlistSpec spec) {
  Netlist n;
  const std::size_t nn = spec.net_names.size();
  auto check_net = [&](NetId id, const std::string& where) {
    if (id >= nn)
      throw NetlistError(NetlistErrorKind::UnknownNet,
                         where + " references undeclared net " + std::to_string(id));
  };

  n.driver_.assign(nn, std::numeric_limits<std::int64_t>::min());
  n.pi_index_.assign(nn, -1);
  n.po_flag_.assign(nn, false);
  n.fanout_.assign(nn, {});

  for (std::size_t i = 0; i < spec.pis.size(); ++i) {
    const NetId p = spec.pis[i];
    check_net(p, "primary input list");
    if (n.pi_index_[p] >= 0)
      throw NetlistError(NetlistErrorKind::MultipleDrivers,
                         net_label(spec, p) + " is listed as a primary input twice");
    n.pi_index_[p] = static_cast<int>(i);
    n.driver_[p] = -1;
  }
  for (GateId g = 0; g < spec.gates.size(); ++g) {
    const Gate& gate = spec.gates[g];
    if (gate.inputs.size() != arity(gate.kind))
      throw NetlistError(NetlistErrorKind::ArityMismatch,
                         gate_label(spec, g) + " has " + std::to_string(gate.inputs.size()) +
                             " inputs, expected " + std::to_string(arity(gate.kind)));
    if (gate.kind == GateKind::Delay && !gate.delay)
      throw NetlistError(NetlistErrorKind::Parse, gate_label(spec, g) + " lacks rise/fall delay");
    check_net(gate.output, gate_label(spec, g));
    for (NetId in : gate.inputs) check_net(in, gate_label(spec, g));
    if (n.driver_[gate.output] != std::numeric_limits<std::int64_t>::min())
      throw NetlistError(NetlistErrorKind::MultipleDrivers,
                         net_label(spec, gate.output) + " has more than one driver");
    n.driver_[gate.output] = g;
  }
  for (GateId g = 0; g < spec.gates.size(); ++g) {
    for (NetId in : spec.gates[g].inputs) {
      if (n.driver_[in] == std::numeric_limits<std::int64_t>::min())
        throw NetlistError(NetlistErrorKind::FloatingNet,
                           net_label(spec, in) + " feeds " + gate_label(spec, g) +
                               " but has no driver");
      auto& fo = n.fanout_[in];
      if (fo.empty() || fo.back() != g) fo.push_back(g);
    }
  }
  for (NetId p : spec.pos) {
    check_net(p, "primary output list");
    if (n.driver_[p] == std::numeric_limits<std::int64_t>::min())
      throw NetlistError(NetlistErrorKind::FloatingNet,
                         net_label(spec, p) + " is a primary output without a driver");
    n.po_flag_[p] = true;
  }

  // Kahn over the combinational core; sequential gate outputs act as sources.
  const std::size_t ng = spec.gates.size();
  std::vector<std::size_t> pending(ng, 0);
  std::vector<GateId> order;
  order.reserve(ng);
  for (GateId g = 0; g < ng; ++g) {
    if (is_sequential(spec.gates[g].kind)) {
      order.push_back(g);
      continue;
    }
    for (NetId in : spec.gates[g].inputs) {
      const auto d = n.driver_[in];
      if (d >= 0 && !is_sequential(spec.gates[static_cast<GateId>(d)].kind)) ++pending[g];
    }
  }
  std::deque<GateId> ready;
  for (GateId g = 0; g < ng; ++g)
    if (!is_sequential(spec.gates[g].kind) && pending[g] == 0) ready.push_back(g);
  while (!ready.empty()) {
    const GateId g = ready.front();
    ready.pop_front();
    order.push_back(g);
    for (GateId succ : n.fanout_[spec.gates[g].output]) {
      if (is_sequential(spec.gates[succ].kind)) continue;
      // fanout_ is deduplicated per net, but a gate may use the net twice
      const auto uses = static_cast<std::size_t>(
          std::count(spec.gates[succ].inputs.begin(), spec.gates[succ].inputs.end(),
                     spec.gates[g].output));
      pending[succ] -= uses;
      if (pending[succ] == 0) ready.push_back(succ);
    }
  }
  if (order.size() != ng) {
    for (GateId g = 0; g < ng; ++g)
      if (!is_sequential(spec.gates[g].kind) && pending[g] != 0)
        throw NetlistError(NetlistErrorKind::CombinationalCycle,
                           gate_label(spec, g) + " lies on a combinational cycle");
  }
  n.topo_ = std::move(order);
  n.topo_index_.assign(ng, 0);
  for (std::size_t i = 0; i < n.topo_.size(); ++i) n.topo_index_[n.topo_[i]] = i;
  n.spec_ = std::move(spec);
  return n;
}

std::string Netlist::net_name(NetId n) const {
  if (n < spec_.net_names.size() && !spec_.net_names[n].empty()) return spec_.net_names[n];
  return "n" + std::to_string(n);
}

std::optional<NetId> Netlist::find_net(std::string_view name) const {
  for (NetId i = 0; i < spec_.net_names.size(); ++i)
    if (spec_.net_names[i] == name) return i;
  return std::nullopt;
}

std::optional<GateId> Netlist::driver(NetId n) const {
  if (driver_[n] < 0) return std::nullopt;
  return static_cast<GateId>(driver_[n]);
}

EvalResult eval_zero_delay(const Netlist& n, std::span<const Logic> pi_values, Logic c2_initial) {
  if (pi_values.size() != n.pis().size())
    throw std::invalid_argument("eval_zero_delay: expected " + std::to_string(n.pis().size()) +
                                " PI values, got " + std::to_string(pi_values.size()));
  EvalResult r;
  r.nets.assign(n.num_nets(), Logic::X);
  for (std::size_t i = 0; i < n.pis().size(); ++i) r.nets[n.pis()[i]] = pi_values[i];
  for (const Gate& g : n.gates())
    if (g.kind == GateKind::C2) r.nets[g.output] = c2_initial;

  const std::size_t bound = 2 * n.num_gates() + 4;
  std::array<Logic, 4> buf{};
  bool changed = true;
  std::size_t sweeps = 0;
  while (changed) {
    if (sweeps++ > bound)
      throw NetlistError(NetlistErrorKind::Oscillation,
                         "zero-delay evaluation did not converge after " +
                             std::to_string(bound) + " sweeps");
    changed = false;
    for (GateId gid : n.topo_order()) {
      const Gate& g = n.gate(gid);
      // C2 keeps its initial state until its feedback has been evaluated once
      if (sweeps == 1 && g.kind == GateKind::C2) {
        changed = true;
        continue;
      }
      for (std::size_t i = 0; i < g.inputs.size(); ++i) buf[i] = r.nets[g.inputs[i]];
      const Logic v =
          eval_gate(g.kind, std::span<const Logic>(buf.data(), g.inputs.size()), r.nets[g.output]);
      if (v != r.nets[g.output]) {
        r.nets[g.output] = v;
        changed = true;
      }
    }
  }
  r.pos.reserve(n.pos().size());
  for (NetId p : n.pos()) r.pos.push_back(r.nets[p]);
  return r;
}

std::vector<UnateViolation> check_unate_only(const Netlist& n) {
  std::vector<UnateViolation> out;
  for (GateId g = 0; g < n.num_gates(); ++g)
    if (unateness(n.gate(g).kind) == Unateness::Non) out.push_back({g, n.gate(g).kind});
  return out;
}

std::vector<NetId> instantiate(NetlistSpec& dst, const Netlist& src,
                               std::span<const NetId> pi_nets, const std::string& prefix,
                               std::vector<GateId>* added_gates) {
  if (pi_nets.size() != src.pis().size())
    throw std::invalid_argument("instantiate: PI count mismatch");
  std::vector<NetId> map(src.num_nets(), kNoNet);
  for (std::size_t i = 0; i < pi_nets.size(); ++i) map[src.pis()[i]] = pi_nets[i];
  for (NetId net = 0; net < src.num_nets(); ++net)
    if (map[net] == kNoNet) map[net] = dst.add_net(prefix + src.net_name(net));
  for (const Gate& g : src.gates()) {
    std::vector<NetId> ins;
    ins.reserve(g.inputs.size());
    for (NetId in : g.inputs) ins.push_back(map[in]);
    const GateId id = dst.add_gate(g.kind, std::move(ins), map[g.output], g.delay);
    if (added_gates) added_gates->push_back(id);
  }
  return map;
}

CompactMap compact(NetlistSpec& spec) {
  CompactMap m;
  const std::size_t nn = spec.net_names.size();
  std::vector<bool> keep(nn, false);
  for (NetId p : spec.pis) keep[p] = true;
  for (NetId p : spec.pos) keep[p] = true;
  for (const Gate& g : spec.gates) {
    if (g.output == kNoNet) continue;
    keep[g.output] = true;
    for (NetId in : g.inputs) keep[in] = true;
  }
  m.nets.assign(nn, kNoNet);
  std::vector<std::string> names;
  for (NetId i = 0; i < nn; ++i) {
    if (!keep[i]) continue;
    m.nets[i] = static_cast<NetId>(names.size());
    names.push_back(std::move(spec.net_names[i]));
  }
  m.gates.assign(spec.gates.size(), kNoGate);
  std::vector<Gate> gates;
  for (GateId g = 0; g < spec.gates.size(); ++g) {
    Gate& gate = spec.gates[g];
    if (gate.output == kNoNet) continue;
    for (NetId& in : gate.inputs) in = m.nets[in];
    gate.output = m.nets[gate.output];
    m.gates[g] = static_cast<GateId>(gates.size());
    gates.push_back(std::move(gate));
  }
  for (NetId& p : spec.pis) p = m.nets[p];
  for (NetId& p : spec.pos) p = m.nets[p];
  spec.net_names = std::move(names);
  spec.gates = std::move(gates);
  return m;
}

nlohmann::json to_json(const Netlist& n) {
  using nlohmann::json;
  json nets = json::array();
  for (NetId i = 0; i < n.num_nets(); ++i) {
    json e{{"id", i}};
    if (!n.spec().net_names[i].empty()) e["name"] = n.spec().net_names[i];
    nets.push_back(std::move(e));
  }
  json gates = json::array();
  for (GateId g = 0; g < n.num_gates(); ++g) {
    const Gate& gate = n.gate(g);
    json e{{"id", g},
           {"kind", std::string(kind_name(gate.kind))},
           {"inputs", gate.inputs},
           {"output", gate.output}};
    if (gate.delay) e["delay"] = json{{"rise", gate.delay->rise}, {"fall", gate.delay->fall}};
    gates.push_back(std::move(e));
  }
  return json{{"nets", nets}, {"gates", gates}, {"pis", n.pis()}, {"pos", n.pos()},
              {"meta", n.meta()}};
}

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                    std::span<const std::string_view> extra, const std::string& where) {
  if (!obj.is_object()) throw NetlistError(NetlistErrorKind::Parse, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::find(known.begin(), known.end(), key) != known.end() ||
                    std::find(extra.begin(), extra.end(), key) != extra.end();
    if (!ok) throw NetlistError(NetlistErrorKind::Parse, where + ": unknown field '" + key + "'");
  }
}

std::vector<NetId> net_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j.at(key).is_array())
    throw NetlistError(NetlistErrorKind::Parse, std::string(key) + " must be an array");
  std::vector<NetId> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_unsigned())
      throw NetlistError(NetlistErrorKind::Parse,
                         std::string(key) + " entries must be non-negative integers");
    out.push_back(v.get<NetId>());
  }
  return out;
}

}  // namespace

Netlist netlist_from_json(const nlohmann::json& j, std::span<const std::string_view> extra) {
  reject_unknown(j, {"nets", "gates", "pis", "pos", "meta"}, extra, "netlist");
  NetlistSpec spec;
  try {
    const auto& nets = j.at("nets");
    spec.net_names.assign(nets.size(), {});
    std::vector<bool> seen(nets.size(), false);
    for (const auto& e : nets) {
      reject_unknown(e, {"id", "name"}, {}, "net entry");
      const auto id = e.at("id").get<std::size_t>();
      if (id >= nets.size() || seen[id])
        throw NetlistError(NetlistErrorKind::Parse,
                           "net ids must be unique and dense, bad id " + std::to_string(id));
      seen[id] = true;
      if (e.contains("name")) spec.net_names[id] = e.at("name").get<std::string>();
    }
    const auto& gates = j.at("gates");
    spec.gates.resize(gates.size());
    std::vector<bool> gseen(gates.size(), false);
    for (const auto& e : gates) {
      reject_unknown(e, {"id", "kind", "inputs", "output", "delay"}, {}, "gate entry");
      const auto id = e.at("id").get<std::size_t>();
      if (id >= gates.size() || gseen[id])
        throw NetlistError(NetlistErrorKind::Parse,
                           "gate ids must be unique and dense, bad id " + std::to_string(id));
      gseen[id] = true;
      const auto kname = e.at("kind").get<std::string>();
      const auto kind = kind_from_name(kname);
      if (!kind) throw NetlistError(NetlistErrorKind::Parse, "unknown gate kind '" + kname + "'");
      Gate& g = spec.gates[id];
      g.kind = *kind;
      g.inputs = net_list(e, "inputs");
      g.output = e.at("output").get<NetId>();
      if (e.contains("delay")) {
        const auto& d = e.at("delay");
        reject_unknown(d, {"rise", "fall"}, {}, "gate delay");
        g.delay = DelaySpec{d.at("rise").get<Time>(), d.at("fall").get<Time>()};
      }
    }
    spec.pis = net_list(j, "pis");
    spec.pos = net_list(j, "pos");
    if (j.contains("meta")) spec.meta = j.at("meta").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& ex) {
    throw NetlistError(NetlistErrorKind::Parse, std::string("netlist JSON: ") + ex.what());
  }
  return Netlist::build(std::move(spec));
}

std::string serialize(const Netlist& n) { return to_json(n).dump(1); }

Netlist parse_netlist(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw NetlistError(NetlistErrorKind::Parse, ex.what());
  }
  return netlist_from_json(j);
}

}  // namespace selftimed
