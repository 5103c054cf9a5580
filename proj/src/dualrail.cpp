#include "selftimed/dualrail.hpp"

#include <algorithm>
#include <map>

namespace selftimed {

std::string_view polarity_name(SpacerPolarity p) {
  return p == SpacerPolarity::AllZero ? "ALL0" : "ALL1";
}

std::optional<SpacerPolarity> polarity_from_name(std::string_view s) {
  if (s == "ALL0") return SpacerPolarity::AllZero;
  if (s == "ALL1") return SpacerPolarity::AllOne;
  return std::nullopt;
}

CodewordState classify(Codeword c, SpacerPolarity p) {
  if (c.pos == Logic::X || c.neg == Logic::X) return CodewordState::Unknown;
  if (c == spacer_codeword(p)) return CodewordState::Spacer;
  if (c == forbidden_codeword(p)) return CodewordState::Forbidden;
  return c.pos == Logic::One ? CodewordState::One : CodewordState::Zero;
}

const RailPair* DualRailBinding::find(std::string_view signal) const {
  for (const auto& p : pairs)
    if (p.signal == signal) return &p;
  return nullptr;
}

RailPair* DualRailBinding::find(std::string_view signal) {
  for (auto& p : pairs)
    if (p.signal == signal) return &p;
  return nullptr;
}

const RailPair* DualRailBinding::owner(NetId net) const {
  for (const auto& p : pairs)
    if (p.pos == net || p.neg == net) return &p;
  return nullptr;
}

namespace {

std::vector<RailPair> lookup_all(const DualRailBinding& b, const std::vector<std::string>& names) {
  std::vector<RailPair> out;
  out.reserve(names.size());
  for (const auto& s : names) {
    const RailPair* p = b.find(s);
    if (!p) throw MappingError(MappingErrorKind::UnknownSignal, "unbound signal '" + s + "'");
    out.push_back(*p);
  }
  return out;
}

}  // namespace

std::vector<RailPair> DualRailBinding::input_pairs() const { return lookup_all(*this, inputs); }
std::vector<RailPair> DualRailBinding::output_pairs() const { return lookup_all(*this, outputs); }

nlohmann::json to_json(const DualRailBinding& b) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : b.pairs)
    pairs.push_back({{"signal", p.signal},
                     {"pos", p.pos},
                     {"neg", p.neg},
                     {"spacer", std::string(polarity_name(p.spacer))}});
  return pairs;
}

DualRailBinding binding_from_json(const nlohmann::json& j) {
  DualRailBinding b;
  for (const auto& e : j) {
    for (const auto& [key, _] : e.items())
      if (key != "signal" && key != "pos" && key != "neg" && key != "spacer")
        throw std::runtime_error("binding entry: unknown field '" + key + "'");
    const auto pol = polarity_from_name(e.at("spacer").get<std::string>());
    if (!pol) throw std::runtime_error("binding entry: spacer must be ALL0 or ALL1");
    b.pairs.push_back(
        {e.at("signal").get<std::string>(), e.at("pos").get<NetId>(), e.at("neg").get<NetId>(), *pol});
  }
  return b;
}

namespace {

struct DualKinds {
  GateKind true_rail;   // computes f on positive rails
  GateKind false_rail;  // computes !f on negative rails
  bool swap;            // gate is inverting: rails trade places
};

DualKinds dual_kinds(GateKind k) {
  using K = GateKind;
  switch (k) {
    case K::And2: return {K::And2, K::Or2, false};
    case K::And3: return {K::And3, K::Or3, false};
    case K::And4: return {K::And4, K::Or4, false};
    case K::Or2: return {K::Or2, K::And2, false};
    case K::Or3: return {K::Or3, K::And3, false};
    case K::Or4: return {K::Or4, K::And4, false};
    case K::Nand2: return {K::And2, K::Or2, true};
    case K::Nand3: return {K::And3, K::Or3, true};
    case K::Nand4: return {K::And4, K::Or4, true};
    case K::Nor2: return {K::Or2, K::And2, true};
    case K::Nor3: return {K::Or3, K::And3, true};
    case K::Nor4: return {K::Or4, K::And4, true};
    case K::Ao21: return {K::Ao21, K::Oa21, false};
    case K::Ao22: return {K::Ao22, K::Oa22, false};
    case K::Oa21: return {K::Oa21, K::Ao21, false};
    case K::Oa22: return {K::Oa22, K::Ao22, false};
    case K::Aoi21: return {K::Ao21, K::Oa21, true};
    case K::Aoi22: return {K::Ao22, K::Oa22, true};
    case K::Oai21: return {K::Oa21, K::Ao21, true};
    case K::Oai22: return {K::Oa22, K::Ao22, true};
    default: throw MappingError(MappingErrorKind::NonUnateGate,
                                "gate kind " + std::string(kind_name(k)) + " cannot be dual-rail mapped");
  }
}

std::string signal_name(const Netlist& n, NetId net) { return n.net_name(net); }

}  // namespace

DualRail direct_map(const Netlist& sr, SpacerPolarity pi_polarity) {
  if (const auto v = check_unate_only(sr); !v.empty())
    throw MappingError(MappingErrorKind::NonUnateGate,
                       "gate " + std::to_string(v.front().gate) + " (" +
                           std::string(kind_name(v.front().kind)) + ") is non-unate");
  for (GateId g = 0; g < sr.num_gates(); ++g)
    if (is_sequential(sr.gate(g).kind))
      throw MappingError(MappingErrorKind::SequentialGate,
                         "gate " + std::to_string(g) + " is sequential; direct_map needs a combinational netlist");

  NetlistSpec out;
  out.meta = sr.meta();
  DualRail dr{Netlist{}, {}};
  // (pos, neg) rail of every single-rail net; aliases share rails.
  std::vector<std::pair<NetId, NetId>> rails(sr.num_nets(), {kNoNet, kNoNet});
  std::vector<bool> owns(sr.num_nets(), false);

  for (NetId pi : sr.pis()) {
    const std::string s = signal_name(sr, pi);
    rails[pi] = {out.add_net(s + "__p"), out.add_net(s + "__n")};
    owns[pi] = true;
    out.pis.push_back(rails[pi].first);
    out.pis.push_back(rails[pi].second);
    dr.binding.inputs.push_back(s);
  }
  for (GateId gid : sr.topo_order()) {
    const Gate& g = sr.gate(gid);
    if (g.kind == GateKind::Inv) {
      rails[g.output] = {rails[g.inputs[0]].second, rails[g.inputs[0]].first};
      continue;
    }
    if (g.kind == GateKind::Buf) {
      rails[g.output] = rails[g.inputs[0]];
      continue;
    }
    const DualKinds dk = dual_kinds(g.kind);
    std::vector<NetId> pos_in, neg_in;
    for (NetId in : g.inputs) {
      pos_in.push_back(rails[in].first);
      neg_in.push_back(rails[in].second);
    }
    const std::string s = signal_name(sr, g.output);
    const NetId p = out.add_net(s + "__p");
    const NetId n = out.add_net(s + "__n");
    // Inverting gate: the true-function gate now drives the negative rail.
    out.add_gate(dk.true_rail, pos_in, dk.swap ? n : p);
    out.add_gate(dk.false_rail, neg_in, dk.swap ? p : n);
    rails[g.output] = {p, n};
    owns[g.output] = true;
  }
  for (NetId po : sr.pos()) {
    out.pos.push_back(rails[po].first);
    out.pos.push_back(rails[po].second);
  }

  for (NetId net = 0; net < sr.num_nets(); ++net)
    if (owns[net])
      dr.binding.pairs.push_back({signal_name(sr, net), rails[net].first, rails[net].second, pi_polarity});
  // POs that alias another signal (inverter or buffer outputs) get their own name
  // only when the rails are not already bound.
  for (NetId po : sr.pos()) {
    const std::string s = signal_name(sr, po);
    if (owns[po]) {
      dr.binding.outputs.push_back(s);
      continue;
    }
    const RailPair* existing = nullptr;
    for (const auto& p : dr.binding.pairs)
      if (p.pos == rails[po].first && p.neg == rails[po].second) existing = &p;
    if (existing) {
      dr.binding.outputs.push_back(existing->signal);
    } else {
      // swapped alias of a bound signal: record as its own view of the rails
      dr.binding.outputs.push_back(s);
      dr.binding.pairs.push_back({s, rails[po].first, rails[po].second, pi_polarity});
    }
  }
  dr.netlist = Netlist::build(std::move(out));
  return dr;
}

namespace {

struct Rewrite {
  NetlistSpec spec;
  std::vector<std::vector<GateId>> readers;  // per net, gate ids (with repeats per use)
  std::vector<std::int64_t> driver;
  std::vector<bool> is_po;

  explicit Rewrite(const Netlist& n) : spec(n.spec()) { reindex(); }

  void reindex() {
    const std::size_t nn = spec.net_names.size();
    readers.assign(nn, {});
    driver.assign(nn, -1);
    is_po.assign(nn, false);
    for (GateId g = 0; g < spec.gates.size(); ++g) {
      const Gate& gate = spec.gates[g];
      if (gate.output == kNoNet) continue;
      driver[gate.output] = g;
      for (NetId in : gate.inputs) readers[in].push_back(g);
    }
    for (NetId p : spec.pos) is_po[p] = true;
  }

  // Net read by exactly one gate input, not a PO, driven by a gate.
  bool private_net(NetId net) const {
    return readers[net].size() == 1 && !is_po[net] && driver[net] >= 0;
  }
};

bool absorb_inverters(Rewrite& rw) {
  bool changed = false;
  for (GateId g = 0; g < rw.spec.gates.size(); ++g) {
    Gate& inv = rw.spec.gates[g];
    if (inv.output == kNoNet || inv.kind != GateKind::Inv) continue;
    const NetId mid = inv.inputs[0];
    if (!rw.private_net(mid)) continue;
    Gate& src = rw.spec.gates[static_cast<GateId>(rw.driver[mid])];
    const auto comp = complement_kind(src.kind);
    if (!comp || is_sequential(src.kind)) continue;
    src.kind = *comp;
    src.output = inv.output;
    inv.output = kNoNet;
    rw.reindex();
    changed = true;
  }
  return changed;
}

// NOR2 over AND2 children -> AOI21/AOI22; NAND2 over OR2 children -> OAI21/OAI22.
bool fuse_complex(Rewrite& rw) {
  bool changed = false;
  for (GateId g = 0; g < rw.spec.gates.size(); ++g) {
    Gate& top = rw.spec.gates[g];
    if (top.output == kNoNet) continue;
    GateKind child_kind;
    GateKind k21, k22;
    if (top.kind == GateKind::Nor2) {
      child_kind = GateKind::And2;
      k21 = GateKind::Aoi21;
      k22 = GateKind::Aoi22;
    } else if (top.kind == GateKind::Nand2) {
      child_kind = GateKind::Or2;
      k21 = GateKind::Oai21;
      k22 = GateKind::Oai22;
    } else {
      continue;
    }
    auto fusible = [&](NetId net) {
      if (!rw.private_net(net)) return false;
      return rw.spec.gates[static_cast<GateId>(rw.driver[net])].kind == child_kind;
    };
    const NetId a = top.inputs[0], b = top.inputs[1];
    if (a == b) continue;
    const bool fa = fusible(a), fb = fusible(b);
    if (!fa && !fb) continue;
    auto take = [&](NetId net) {
      Gate& child = rw.spec.gates[static_cast<GateId>(rw.driver[net])];
      auto ins = child.inputs;
      child.output = kNoNet;
      return ins;
    };
    std::vector<NetId> ins;
    if (fa && fb) {
      ins = take(a);
      auto more = take(b);
      ins.insert(ins.end(), more.begin(), more.end());
      top.kind = k22;
    } else {
      ins = take(fa ? a : b);
      ins.push_back(fa ? b : a);
      top.kind = k21;
    }
    top.inputs = std::move(ins);
    rw.reindex();
    changed = true;
  }
  return changed;
}

DualRailBinding remap_binding(const DualRailBinding& b, const std::vector<NetId>& net_map) {
  DualRailBinding out;
  out.inverting_spacer = b.inverting_spacer;
  out.inputs = b.inputs;
  out.outputs = b.outputs;
  for (const auto& p : b.pairs) {
    const NetId np = net_map[p.pos], nn = net_map[p.neg];
    if (np == kNoNet || nn == kNoNet) continue;
    out.pairs.push_back({p.signal, np, nn, p.spacer});
  }
  return out;
}

}  // namespace

DualRail negative_gate_optimize(const DualRail& in) {
  Rewrite rw(in.netlist);
  bool changed = true;
  while (changed) {
    changed = absorb_inverters(rw);
    changed = fuse_complex(rw) || changed;
  }
  const CompactMap m = compact(rw.spec);
  DualRail out{Netlist::build(std::move(rw.spec)), remap_binding(in.binding, m.nets)};
  const auto a = compute_spacer_polarity(out);
  if (a.ok()) apply_polarity(out, a);
  return out;
}

SpacerAnalysis compute_spacer_polarity(const DualRail& dr, std::span<const SpacerPolarity> pi_pol) {
  const Netlist& n = dr.netlist;
  std::vector<SpacerPolarity> pols;
  if (pi_pol.empty()) {
    for (const auto& p : dr.binding.input_pairs()) pols.push_back(p.spacer);
    pi_pol = pols;
  }
  if (pi_pol.size() * 2 != n.pis().size())
    throw std::invalid_argument("compute_spacer_polarity: one polarity per input pair expected");
  std::vector<Logic> pi_vals;
  for (SpacerPolarity p : pi_pol) {
    pi_vals.push_back(spacer_value(p));
    pi_vals.push_back(spacer_value(p));
  }
  SpacerAnalysis a;
  a.net_spacer = eval_zero_delay(n, pi_vals).nets;

  for (GateId gid : n.topo_order()) {
    const Gate& g = n.gate(gid);
    if (g.kind == GateKind::Delay) continue;
    const Logic first = a.net_spacer[g.inputs[0]];
    for (NetId in : g.inputs) {
      if (a.net_spacer[in] != first || first == Logic::X) {
        a.conflict = ParityConflict{
            g.output, gid,
            "net " + n.net_name(g.output) + " is reached with both spacer polarities (gate " +
                std::to_string(gid) + " " + std::string(kind_name(g.kind)) + ")"};
        return a;
      }
    }
  }
  for (const auto& p : dr.binding.pairs) {
    if (a.net_spacer[p.pos] != a.net_spacer[p.neg] || a.net_spacer[p.pos] == Logic::X) {
      a.conflict = ParityConflict{p.neg, n.driver(p.neg).value_or(kNoGate),
                                  "rails of " + p.signal + " settle to different spacer values"};
      return a;
    }
  }
  return a;
}

void apply_polarity(DualRail& dr, const SpacerAnalysis& a) {
  if (!a.ok()) throw std::logic_error("apply_polarity on a conflicting analysis");
  for (auto& p : dr.binding.pairs)
    p.spacer = a.net_spacer[p.pos] == Logic::One ? SpacerPolarity::AllOne : SpacerPolarity::AllZero;
  const auto ins = dr.binding.input_pairs();
  const auto outs = dr.binding.output_pairs();
  if (!ins.empty() && !outs.empty()) dr.binding.inverting_spacer = ins.front().spacer != outs.front().spacer;
}

std::string insert_spacer_inverter(DualRail& dr, const std::string& signal,
                                   std::span<const GateId> consumers, std::vector<GateId>* added) {
  RailPair* pair = dr.binding.find(signal);
  if (!pair) throw MappingError(MappingErrorKind::UnknownSignal, "unbound signal '" + signal + "'");
  const RailPair old = *pair;
  NetlistSpec spec = dr.netlist.spec();
  const bool all = consumers.empty();
  std::string new_name = signal;
  if (!all) {
    int k = 0;
    do new_name = signal + "__spinv" + std::to_string(k++);
    while (dr.binding.find(new_name));
  }
  const NetId new_pos = spec.add_net(new_name + (all ? "__spinv__p" : "__p"));
  const NetId new_neg = spec.add_net(new_name + (all ? "__spinv__n" : "__n"));

  auto should_rewire = [&](GateId g) {
    return all || std::find(consumers.begin(), consumers.end(), g) != consumers.end();
  };
  for (GateId g = 0; g < spec.gates.size(); ++g) {
    if (!should_rewire(g)) continue;
    for (NetId& in : spec.gates[g].inputs) {
      if (in == old.pos) in = new_pos;
      else if (in == old.neg) in = new_neg;
    }
  }
  if (all) {
    for (NetId& p : spec.pos) {
      if (p == old.pos) p = new_pos;
      else if (p == old.neg) p = new_neg;
    }
  }
  // new positive rail = !old negative rail, new negative rail = !old positive rail
  const GateId g1 = spec.add_gate(GateKind::Inv, {old.neg}, new_pos);
  const GateId g2 = spec.add_gate(GateKind::Inv, {old.pos}, new_neg);
  if (added) {
    added->push_back(g1);
    added->push_back(g2);
  }
  dr.netlist = Netlist::build(std::move(spec));

  if (all) {
    // other names for the same rails (inverter or buffer aliases) follow the readers
    for (auto& p : dr.binding.pairs) {
      if (&p == pair) continue;
      if (std::find(dr.binding.inputs.begin(), dr.binding.inputs.end(), p.signal) != dr.binding.inputs.end())
        continue;
      if (p.pos == old.pos && p.neg == old.neg) p = {p.signal, new_pos, new_neg, flip(p.spacer)};
      else if (p.pos == old.neg && p.neg == old.pos) p = {p.signal, new_neg, new_pos, flip(p.spacer)};
    }
    pair->pos = new_pos;
    pair->neg = new_neg;
    pair->spacer = flip(old.spacer);
    std::string pre = signal + "__pre_spinv";
    for (int k = 0; dr.binding.find(pre); ++k) pre = signal + "__pre_spinv" + std::to_string(k);
    RailPair before = old;
    before.signal = pre;
    dr.binding.pairs.push_back(before);
    // inputs keep naming the original rails
    for (auto& s : dr.binding.inputs)
      if (s == signal) s = pre;
  } else {
    dr.binding.pairs.push_back({new_name, new_pos, new_neg, flip(old.spacer)});
  }
  return new_name;
}

std::size_t resolve_spacer_conflicts(DualRail& dr, std::size_t max_inserts) {
  std::size_t inserted = 0;
  for (;;) {
    const SpacerAnalysis a = compute_spacer_polarity(dr);
    if (a.ok()) {
      apply_polarity(dr, a);
      return inserted;
    }
    if (inserted >= max_inserts || a.conflict->gate == kNoGate)
      throw MappingError(MappingErrorKind::UnresolvableConflict, a.conflict->message);
    const Netlist& n = dr.netlist;
    const Gate& g = n.gate(a.conflict->gate);
    int zeros = 0, ones = 0;
    for (NetId in : g.inputs) (a.net_spacer[in] == Logic::One ? ones : zeros)++;
    const Logic majority = ones > zeros ? Logic::One
                           : zeros > ones ? Logic::Zero
                                          : a.net_spacer[g.inputs[0]];
    const RailPair* victim = nullptr;
    for (NetId in : g.inputs) {
      if (a.net_spacer[in] == majority) continue;
      victim = dr.binding.owner(in);
      if (!victim)
        throw MappingError(MappingErrorKind::UnresolvableConflict,
                           "net " + n.net_name(in) + " has no dual-rail binding: " + a.conflict->message);
      break;
    }
    if (!victim) throw MappingError(MappingErrorKind::UnresolvableConflict, a.conflict->message);
    // Every reader of the victim rails whose inputs are currently mixed.
    std::vector<GateId> readers;
    for (NetId rail : {victim->pos, victim->neg}) {
      for (GateId r : n.fanout(rail)) {
        const Gate& rg = n.gate(r);
        const bool mixed = std::any_of(rg.inputs.begin(), rg.inputs.end(), [&](NetId in) {
          return a.net_spacer[in] != a.net_spacer[rg.inputs[0]];
        });
        if (mixed && std::find(readers.begin(), readers.end(), r) == readers.end())
          readers.push_back(r);
      }
    }
    // The two rail gates of one logical gate must read the same copy.
    const std::size_t direct = readers.size();
    for (std::size_t i = 0; i < direct; ++i) {
      const RailPair* out = dr.binding.owner(n.gate(readers[i]).output);
      if (!out) continue;
      for (NetId rail : {out->pos, out->neg}) {
        const auto d = n.driver(rail);
        if (!d || std::find(readers.begin(), readers.end(), *d) != readers.end()) continue;
        const auto& ins = n.gate(*d).inputs;
        const bool reads_victim = std::any_of(ins.begin(), ins.end(), [&](NetId in) {
          return in == victim->pos || in == victim->neg;
        });
        if (reads_victim) readers.push_back(*d);
      }
    }
    insert_spacer_inverter(dr, victim->signal, readers);
    ++inserted;
  }
}

std::set<int> path_inversion_counts(const Netlist& n) {
  std::vector<std::set<int>> at(n.num_nets());
  for (NetId pi : n.pis()) at[pi].insert(0);
  for (GateId gid : n.topo_order()) {
    const Gate& g = n.gate(gid);
    const int add = is_inverting(g.kind) ? 1 : 0;
    std::set<int> s;
    for (NetId in : g.inputs)
      for (int c : at[in]) s.insert(c + add);
    at[g.output] = std::move(s);
  }
  std::set<int> out;
  for (NetId po : n.pos()) out.insert(at[po].begin(), at[po].end());
  return out;
}

std::vector<Logic> spacer_inputs(const DualRail& dr) {
  std::vector<Logic> v;
  for (const auto& p : dr.binding.input_pairs()) {
    v.push_back(spacer_value(p.spacer));
    v.push_back(spacer_value(p.spacer));
  }
  return v;
}

std::vector<Logic> codeword_inputs(const DualRail& dr, const std::vector<bool>& inputs) {
  if (inputs.size() * 2 != dr.netlist.pis().size())
    throw std::invalid_argument("codeword_inputs: logical input count mismatch");
  std::vector<Logic> v;
  for (bool b : inputs) {
    const Codeword c = encode(b);
    v.push_back(c.pos);
    v.push_back(c.neg);
  }
  return v;
}

std::vector<bool> eval_dual_rail(const DualRail& dr, const std::vector<bool>& inputs) {
  const auto r = eval_zero_delay(dr.netlist, codeword_inputs(dr, inputs));
  std::vector<bool> out;
  for (std::size_t i = 0; i + 1 < r.pos.size(); i += 2) {
    const Codeword c{r.pos[i], r.pos[i + 1]};
    if (c == encode(true)) out.push_back(true);
    else if (c == encode(false)) out.push_back(false);
    else
      throw std::runtime_error("output " + std::to_string(i / 2) + " is not a valid codeword");
  }
  return out;
}

}  // namespace selftimed
