#include "selftimed/datapath.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace selftimed {

std::map<std::string, std::size_t> DrBlock::block_gate_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& l : block_map) ++out[l];
  return out;
}

std::size_t DrBlock::count_blocks(const std::string& prefix) const {
  std::set<std::string> seen;
  for (const auto& l : block_map) {
    if (l.size() <= prefix.size() || l.compare(0, prefix.size(), prefix) != 0) continue;
    const auto rest = std::string_view(l).substr(prefix.size());
    if (std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      seen.insert(l);
  }
  return seen.size();
}

namespace {

struct DrSignal {
  NetId pos = kNoNet;
  NetId neg = kNoNet;
  SpacerPolarity spacer = SpacerPolarity::AllZero;
};

class Builder {
 public:
  NetlistSpec spec;
  std::vector<std::string> labels;
  DualRailBinding binding;
  std::string label;
  std::string prefix;  // prepended to block labels and signal names
  std::size_t next_ha = 0, next_fa = 0, next_or = 0, next_spinv = 0;

  NetId gate(GateKind k, std::vector<NetId> ins, const std::string& name = {}) {
    const NetId out = spec.emit(k, std::move(ins), name);
    labels.push_back(prefix + label);
    return out;
  }

  DrSignal input(const std::string& name, SpacerPolarity p) {
    DrSignal s{spec.add_net(name + "__p"), spec.add_net(name + "__n"), p};
    spec.pis.push_back(s.pos);
    spec.pis.push_back(s.neg);
    binding.inputs.push_back(name);
    binding.pairs.push_back({name, s.pos, s.neg, p});
    return s;
  }

  DrSignal bind(const std::string& name, NetId pos, NetId neg, SpacerPolarity p) {
    spec.net_names[pos] = prefix + name + "__p";
    spec.net_names[neg] = prefix + name + "__n";
    binding.pairs.push_back({prefix + name, pos, neg, p});
    return {pos, neg, p};
  }

  void output(const std::string& name, const DrSignal& s) {
    spec.pos.push_back(s.pos);
    spec.pos.push_back(s.neg);
    for (auto& p : binding.pairs) {
      const bool is_input = std::find(binding.inputs.begin(), binding.inputs.end(), p.signal) != binding.inputs.end();
      if (p.pos == s.pos && p.neg == s.neg && !is_input) {
        p.signal = name;
        binding.outputs.push_back(name);
        return;
      }
    }
    binding.pairs.push_back({name, s.pos, s.neg, s.spacer});
    binding.outputs.push_back(name);
  }

  DrBlock finish() {
    DrBlock b{Netlist::build(std::move(spec)), std::move(binding), std::move(labels), {}, kNoNet, kNoNet};
    return b;
  }
};

std::string idx(const std::string& base, std::size_t i) { return base + std::to_string(i); }

// Balanced tree of fan-in <= 4; groups take consecutive inputs, larger groups first.
NetId tree(Builder& b, std::vector<NetId> nets, GateKind (*kind_for)(std::size_t)) {
  while (nets.size() > 1) {
    const std::size_t groups = (nets.size() + 3) / 4;
    const std::size_t base = nets.size() / groups, extra = nets.size() % groups;
    std::vector<NetId> next;
    std::size_t at = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t len = base + (g < extra ? 1 : 0);
      std::vector<NetId> grp(nets.begin() + static_cast<std::ptrdiff_t>(at),
                             nets.begin() + static_cast<std::ptrdiff_t>(at + len));
      at += len;
      next.push_back(len == 1 ? grp[0] : b.gate(kind_for(len), grp));
    }
    nets = std::move(next);
  }
  return nets.front();
}

DrSignal spacer_inverter(Builder& b, const DrSignal& s) {
  b.label = idx("spinv_", b.next_spinv++);
  const NetId p = b.gate(GateKind::Inv, {s.neg});
  const NetId n = b.gate(GateKind::Inv, {s.pos});
  return b.bind(b.label, p, n, flip(s.spacer));
}

// Complementary style takes ALL1 inputs to ALL0 outputs with inverting cells.
std::pair<DrSignal, DrSignal> half_adder(Builder& b, const DrSignal& x, const DrSignal& y) {
  if (x.spacer != y.spacer) throw DatapathError(DatapathErrorKind::Structure, "half adder inputs disagree on spacer");
  b.label = idx("ha_", b.next_ha++);
  const std::string l = b.label;
  if (x.spacer == SpacerPolarity::AllZero) {
    const NetId cp = b.gate(GateKind::And2, {x.pos, y.pos});
    const NetId cn = b.gate(GateKind::Or2, {x.neg, y.neg});
    const NetId sp = b.gate(GateKind::Ao22, {x.pos, y.neg, x.neg, y.pos});
    const NetId sn = b.gate(GateKind::Ao22, {x.pos, y.pos, x.neg, y.neg});
    return {b.bind(l + ".s", sp, sn, x.spacer), b.bind(l + ".c", cp, cn, x.spacer)};
  }
  const NetId cp = b.gate(GateKind::Nor2, {x.neg, y.neg});
  const NetId cn = b.gate(GateKind::Nand2, {x.pos, y.pos});
  const NetId sp = b.gate(GateKind::Aoi22, {x.pos, y.pos, x.neg, y.neg});
  const NetId sn = b.gate(GateKind::Aoi22, {x.pos, y.neg, x.neg, y.pos});
  return {b.bind(l + ".s", sp, sn, SpacerPolarity::AllZero), b.bind(l + ".c", cp, cn, SpacerPolarity::AllZero)};
}

// Carry-in and carry-out carry the opposite spacer of x, y and the sum.
std::pair<DrSignal, DrSignal> full_adder(Builder& b, const DrSignal& x, const DrSignal& y, const DrSignal& cin) {
  if (x.spacer != y.spacer || cin.spacer == x.spacer)
    throw DatapathError(DatapathErrorKind::Structure, "full adder needs carry-in with the opposite spacer");
  b.label = idx("fa_", b.next_fa++);
  const std::string l = b.label;
  const NetId cip = b.gate(GateKind::Inv, {cin.neg});
  const NetId cin_n = b.gate(GateKind::Inv, {cin.pos});
  const NetId gp = b.gate(GateKind::And2, {x.pos, y.pos});
  const NetId gn = b.gate(GateKind::Or2, {x.neg, y.neg});
  const NetId tp = b.gate(GateKind::Ao22, {x.pos, y.neg, x.neg, y.pos});
  const NetId tn = b.gate(GateKind::Ao22, {x.pos, y.pos, x.neg, y.neg});
  const NetId sp = b.gate(GateKind::Ao22, {tp, cin_n, tn, cip});
  const NetId sn = b.gate(GateKind::Ao22, {tp, cip, tn, cin_n});
  const NetId kp = b.gate(GateKind::Ao21, {tp, cip, gp});
  const NetId kn = b.gate(GateKind::Oa21, {tn, cin_n, gn});
  const NetId cop = b.gate(GateKind::Inv, {kn});
  const NetId con = b.gate(GateKind::Inv, {kp});
  b.bind(l + ".cin_i", cip, cin_n, x.spacer);
  b.bind(l + ".g", gp, gn, x.spacer);
  b.bind(l + ".t", tp, tn, x.spacer);
  b.bind(l + ".k", kp, kn, x.spacer);
  return {b.bind(l + ".s", sp, sn, x.spacer), b.bind(l + ".co", cop, con, cin.spacer)};
}

// Sum of two bits known never to be 1 together.
DrSignal or_block(Builder& b, const DrSignal& x, const DrSignal& y) {
  b.label = idx("or_", b.next_or++);
  const NetId p = b.gate(GateKind::Or2, {x.pos, y.pos});
  const NetId n = b.gate(GateKind::And2, {x.neg, y.neg});
  return b.bind(b.label + ".o", p, n, x.spacer);
}

DrSignal to_spacer(Builder& b, const DrSignal& s, SpacerPolarity p) {
  return s.spacer == p ? s : spacer_inverter(b, s);
}

std::vector<DrSignal> popcount8_into(Builder& b, const std::vector<DrSignal>& x) {
  const auto [s0, c0] = half_adder(b, x[0], x[1]);
  const auto [s1, c1] = half_adder(b, x[2], x[3]);
  const auto [s2, c2] = half_adder(b, x[4], x[5]);
  const auto [s3, c3] = half_adder(b, x[6], x[7]);
  const auto [u0, v0] = half_adder(b, s0, s1);
  const auto [u1, v1] = half_adder(b, s2, s3);
  const auto [h0, k0] = half_adder(b, c0, c1);
  const auto [h1, k1] = half_adder(b, c2, c3);
  const auto [y0, v2] = half_adder(b, u0, u1);
  // h0 = c0^c1 and v0 = s0&s1 are never both 1, likewise h1 and v1.
  const DrSignal w0 = or_block(b, h0, v0);
  const DrSignal w1 = or_block(b, h1, v1);
  const DrSignal ci = spacer_inverter(b, v2);
  const auto [y1, co0] = full_adder(b, w0, w1, ci);
  const auto [y2, co1] = full_adder(b, k0, k1, co0);
  const DrSignal y3 = spacer_inverter(b, co1);
  return {y0, y1, y2, y3};
}

std::vector<DrSignal> popcount_into(Builder& b, std::vector<DrSignal> x) {
  constexpr auto P = SpacerPolarity::AllZero;
  const std::size_t width = popcount_width(x.size());
  std::vector<std::vector<DrSignal>> cols(1);
  if (!x.empty() && x.front().spacer == SpacerPolarity::AllOne) {
    std::size_t i = 0;
    for (; i + 1 < x.size(); i += 2) {
      const auto [s, c] = half_adder(b, x[i], x[i + 1]);
      cols[0].push_back(s);
      if (cols.size() < 2) cols.resize(2);
      cols[1].push_back(c);
    }
    if (i < x.size()) cols[0].push_back(spacer_inverter(b, x[i]));
  } else {
    cols[0] = std::move(x);
  }
  std::vector<DrSignal> out;
  for (std::size_t w = 0; w < cols.size(); ++w) {
    while (cols[w].size() > 1) {
      if (cols.size() <= w + 1) cols.resize(w + 2);
      auto& col_now = cols[w];
      if (w + 1 == width) {
        // nothing carries out of the top column, so its bits are mutually exclusive
        const DrSignal xa = to_spacer(b, col_now[0], P);
        const DrSignal xb = to_spacer(b, col_now[1], P);
        col_now.erase(col_now.begin(), col_now.begin() + 2);
        col_now.push_back(or_block(b, xa, xb));
        continue;
      }
      if (col_now.size() >= 3) {
        auto cin_it = std::find_if(col_now.begin(), col_now.end(), [](const DrSignal& s) { return s.spacer != P; });
        DrSignal cin;
        if (cin_it != col_now.end()) {
          cin = *cin_it;
          col_now.erase(cin_it);
        } else {
          cin = spacer_inverter(b, col_now.back());
          col_now.pop_back();
        }
        const DrSignal xa = to_spacer(b, col_now[0], P);
        const DrSignal xb = to_spacer(b, col_now[1], P);
        col_now.erase(col_now.begin(), col_now.begin() + 2);
        const auto [s, co] = full_adder(b, xa, xb, cin);
        cols[w].push_back(s);
        cols[w + 1].push_back(co);
      } else {
        const DrSignal xa = to_spacer(b, col_now[0], P);
        const DrSignal xb = to_spacer(b, col_now[1], P);
        col_now.clear();
        const auto [s, c] = half_adder(b, xa, xb);
        cols[w].push_back(s);
        cols[w + 1].push_back(c);
      }
    }
    if (!cols[w].empty()) out.push_back(to_spacer(b, cols[w][0], P));
  }
  return out;
}

struct ComparatorOut {
  NetId greater, equal, less;
};

ComparatorOut comparator_into(Builder& b, const std::vector<DrSignal>& a, const std::vector<DrSignal>& bv) {
  const std::size_t w = a.size();
  std::vector<NetId> gts, lts;
  NetId req = kNoNet;
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t i = w - 1 - k;  // MSB first
    b.label = idx("cmp_stage_", i);
    const DrSignal& x = a[i];
    const DrSignal& y = bv[i];
    auto gated = [&](NetId p, NetId q) {
      return req == kNoNet ? b.gate(GateKind::And2, {p, q}) : b.gate(GateKind::And3, {req, p, q});
    };
    gts.push_back(gated(x.pos, y.neg));
    lts.push_back(gated(x.neg, y.pos));
    const NetId e1 = gated(x.pos, y.pos);
    const NetId e0 = gated(x.neg, y.neg);
    req = b.gate(GateKind::Or2, {e1, e0}, b.prefix + idx("cmp_req_", i));
  }
  b.label = "cmp_out";
  const NetId g = tree(b, gts, or_kind);
  const NetId l = tree(b, lts, or_kind);
  b.spec.net_names[g] = "greater";
  b.spec.net_names[req] = "equal";
  b.spec.net_names[l] = "less";
  return {g, req, l};
}

}  // namespace

Netlist build_clause_block(std::size_t features) {
  if (features < 1) throw std::invalid_argument("build_clause_block: F must be >= 1");
  NetlistSpec s;
  std::vector<NetId> f, e;
  for (std::size_t m = 0; m < features; ++m) f.push_back(s.add_net(idx("f", m)));
  for (std::size_t k = 0; k < 2 * features; ++k) e.push_back(s.add_net(idx("e", k)));
  s.pis = f;
  s.pis.insert(s.pis.end(), e.begin(), e.end());
  std::vector<NetId> masks;
  for (std::size_t m = 0; m < features; ++m) {
    const NetId nf = s.emit(GateKind::Inv, {f[m]}, idx("nf", m));
    masks.push_back(s.emit(GateKind::Or2, {e[2 * m], f[m]}, idx("pc", 2 * m)));
    masks.push_back(s.emit(GateKind::Or2, {e[2 * m + 1], nf}, idx("pc", 2 * m + 1)));
  }
  Builder tmp;  // reuse the tree helper on a scratch spec
  tmp.spec = std::move(s);
  const NetId root = tree(tmp, masks, and_kind);
  tmp.spec.net_names[root] = "clause";
  tmp.spec.pos = {root};
  return Netlist::build(std::move(tmp.spec));
}

DrBlock build_clause_dr(std::size_t features) {
  DualRail dr = direct_map(build_clause_block(features));
  insert_spacer_inverter(dr, "clause");
  dr = negative_gate_optimize(dr);
  DrBlock b{dr.netlist, dr.binding, std::vector<std::string>(dr.netlist.num_gates(), "clause"), {}, kNoNet, kNoNet};
  return b;
}

DrBlock build_half_adder_dr() {
  Builder b;
  const DrSignal x = b.input("a", SpacerPolarity::AllZero);
  const DrSignal y = b.input("b", SpacerPolarity::AllZero);
  const auto [s, c] = half_adder(b, x, y);
  b.output("s", s);
  b.output("c", c);
  return b.finish();
}

DrBlock build_full_adder_dr() {
  Builder b;
  const DrSignal x = b.input("a", SpacerPolarity::AllZero);
  const DrSignal y = b.input("b", SpacerPolarity::AllZero);
  const DrSignal ci = b.input("cin", SpacerPolarity::AllOne);
  const auto [s, co] = full_adder(b, x, y, ci);
  b.output("s", s);
  b.output("cout", co);
  return b.finish();
}

DrBlock build_popcount8(SpacerPolarity input_polarity) {
  Builder b;
  std::vector<DrSignal> x;
  for (std::size_t i = 0; i < 8; ++i) x.push_back(b.input(idx("x", i), input_polarity));
  const auto y = popcount8_into(b, x);
  for (std::size_t i = 0; i < y.size(); ++i) b.output(idx("y", i), y[i]);
  return b.finish();
}

std::size_t popcount_width(std::size_t n) {
  std::size_t w = 1;
  while ((std::size_t{1} << w) <= n) ++w;
  return w;
}

DrBlock build_popcount(std::size_t n, SpacerPolarity input_polarity) {
  if (n < 1) throw std::invalid_argument("build_popcount: n must be >= 1");
  Builder b;
  std::vector<DrSignal> x;
  for (std::size_t i = 0; i < n; ++i) x.push_back(b.input(idx("x", i), input_polarity));
  const auto y = popcount_into(b, x);
  for (std::size_t i = 0; i < y.size(); ++i) b.output(idx("y", i), y[i]);
  return b.finish();
}

DrBlock build_comparator(std::size_t width) {
  if (width < 1) throw std::invalid_argument("build_comparator: width must be >= 1");
  Builder b;
  std::vector<DrSignal> a, bv;
  for (std::size_t i = 0; i < width; ++i) a.push_back(b.input(idx("a", i), SpacerPolarity::AllZero));
  for (std::size_t i = 0; i < width; ++i) bv.push_back(b.input(idx("b", i), SpacerPolarity::AllZero));
  const auto out = comparator_into(b, a, bv);
  b.spec.pos = {out.greater, out.equal, out.less};
  DrBlock blk = b.finish();
  blk.one_hot = {out.greater, out.equal, out.less};
  return blk;
}

void attach_completion_detector(DrBlock& block, Time t_d) {
  if (t_d < 0) throw std::invalid_argument("attach_completion_detector: t_d must be >= 0");
  const DualRail dr = block.dual_rail();
  const auto spacer = eval_zero_delay(block.netlist, spacer_inputs(dr)).nets;
  NetlistSpec spec = block.netlist.spec();
  auto& labels = block.block_map;
  auto emit = [&](GateKind k, std::vector<NetId> ins, std::string name = {}) {
    labels.push_back("cd");
    return spec.emit(k, std::move(ins), std::move(name));
  };
  std::vector<NetId> valid;
  for (const auto& p : dr.binding.output_pairs()) {
    const Logic sp = spacer[p.pos];
    if (sp == Logic::X || sp != spacer[p.neg] || sp != spacer_value(p.spacer))
      throw DatapathError(DatapathErrorKind::UnknownPolarity,
                          "output " + p.signal + " has no resolved spacer polarity");
    // ALL0: a rail went high; ALL1: a rail went low
    valid.push_back(emit(sp == Logic::Zero ? GateKind::Or2 : GateKind::Nand2, {p.pos, p.neg}, p.signal + "__valid"));
  }
  if (!block.one_hot.empty()) {
    for (NetId w : block.one_hot)
      if (spacer[w] != Logic::Zero)
        throw DatapathError(DatapathErrorKind::UnknownPolarity, "1-of-3 outputs must have an all-low spacer");
    valid.push_back(emit(or_kind(block.one_hot.size()), block.one_hot, "onehot__valid"));
  }
  if (valid.empty()) throw DatapathError(DatapathErrorKind::Structure, "no outputs to detect");
  while (valid.size() > 1) {
    const std::size_t groups = (valid.size() + 3) / 4;
    const std::size_t base = valid.size() / groups, extra = valid.size() % groups;
    std::vector<NetId> next;
    std::size_t at = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t len = base + (g < extra ? 1 : 0);
      std::vector<NetId> grp(valid.begin() + static_cast<std::ptrdiff_t>(at),
                             valid.begin() + static_cast<std::ptrdiff_t>(at + len));
      at += len;
      next.push_back(len == 1 ? grp[0] : emit(and_kind(len), grp));
    }
    valid = std::move(next);
  }
  const NetId done_raw = valid.front();
  const NetId done = spec.add_net("done");
  spec.add_gate(GateKind::Delay, {done_raw}, done, DelaySpec{0, t_d});
  labels.push_back("cd");
  spec.pos.push_back(done);
  block.netlist = Netlist::build(std::move(spec));
  block.done_raw = done_raw;
  block.done = done;
}

std::vector<bool> DatapathBundle::operand(const tm::Bits& features) const {
  return operand(features, config.exclude);
}

std::vector<bool> DatapathBundle::operand(const tm::Bits& features, const std::vector<tm::Bits>& exclude) const {
  if (features.size() != config.features || exclude.size() != config.clauses)
    throw tm::SizeMismatch("operand: feature/exclude sizes do not match the datapath");
  std::vector<bool> v(features.begin(), features.end());
  for (const auto& row : exclude) {
    if (row.size() != config.literals()) throw tm::SizeMismatch("operand: exclude row must have 2F bits");
    v.insert(v.end(), row.begin(), row.end());
  }
  return v;
}

std::pair<tm::Bits, std::vector<tm::Bits>> DatapathBundle::split(const std::vector<bool>& v) const {
  const std::size_t F = config.features, L = config.literals();
  if (v.size() != F + config.clauses * L) throw tm::SizeMismatch("operand has the wrong length");
  tm::Bits f(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(F));
  std::vector<tm::Bits> ex(config.clauses);
  for (std::size_t j = 0; j < config.clauses; ++j) {
    const auto at = v.begin() + static_cast<std::ptrdiff_t>(F + j * L);
    ex[j].assign(at, at + static_cast<std::ptrdiff_t>(L));
  }
  return {std::move(f), std::move(ex)};
}

tm::Compare DatapathBundle::golden(const std::vector<bool>& v) const {
  auto [f, ex] = split(v);
  tm::TmConfig c = config;
  c.exclude = std::move(ex);
  return tm::infer(f, c).outcome;
}

DatapathBundle build_inference_datapath(const tm::TmConfig& config, const DelayModel& delays, double td_margin) {
  config.validate();
  const std::size_t F = config.features, C = config.clauses;
  Builder b;
  std::vector<DrSignal> f;
  std::vector<std::vector<DrSignal>> e(C);
  for (std::size_t m = 0; m < F; ++m) f.push_back(b.input(idx("f", m), SpacerPolarity::AllZero));
  for (std::size_t j = 0; j < C; ++j)
    for (std::size_t k = 0; k < 2 * F; ++k)
      e[j].push_back(b.input("e" + std::to_string(j) + "_" + std::to_string(k), SpacerPolarity::AllZero));

  const DrBlock clause = build_clause_dr(F);
  std::vector<DrSignal> pos_votes, neg_votes;
  for (std::size_t j = 0; j < C; ++j) {
    std::vector<NetId> pi_nets;
    for (const auto& name : clause.binding.inputs) {
      const DrSignal& s = name[0] == 'f' ? f[std::stoul(name.substr(1))] : e[j][std::stoul(name.substr(1))];
      pi_nets.push_back(s.pos);
      pi_nets.push_back(s.neg);
    }
    const std::string label = idx("clause_", j);
    const std::size_t before = b.spec.gates.size();
    const auto map = instantiate(b.spec, clause.netlist, pi_nets, label + ".");
    b.labels.resize(before, "");
    b.labels.resize(b.spec.gates.size(), label);
    for (const auto& p : clause.binding.pairs) {
      if (std::find(clause.binding.inputs.begin(), clause.binding.inputs.end(), p.signal) != clause.binding.inputs.end())
        continue;
      b.binding.pairs.push_back({label + "." + p.signal, map[p.pos], map[p.neg], p.spacer});
    }
    const RailPair out = clause.binding.output_pairs().front();
    const DrSignal vote{map[out.pos], map[out.neg], out.spacer};
    (config.polarity[j] > 0 ? pos_votes : neg_votes).push_back(vote);
  }

  auto count = [&](const std::vector<DrSignal>& votes, const std::string& tree_prefix) {
    b.prefix = tree_prefix;
    b.next_ha = b.next_fa = b.next_or = b.next_spinv = 0;
    auto y = votes.size() == 8 ? popcount8_into(b, votes) : popcount_into(b, votes);
    b.prefix.clear();
    return y;
  };
  auto pos_count = count(pos_votes, "pos.");
  auto neg_count = count(neg_votes, "neg.");
  const std::size_t w = std::max(pos_count.size(), neg_count.size());
  if (pos_count.size() != neg_count.size())
    throw DatapathError(DatapathErrorKind::Structure, "popcount trees differ in width");
  const auto cmp = comparator_into(b, pos_count, neg_count);
  b.spec.pos = {cmp.greater, cmp.equal, cmp.less};

  DatapathBundle bundle;
  bundle.config = config;
  bundle.comparator_width = w;
  bundle.circuit = b.finish();
  bundle.circuit.one_hot = {cmp.greater, cmp.equal, cmp.less};
  bundle.timing = compute_timing(bundle.circuit.netlist, delays, spacer_inputs(bundle.circuit.dual_rail()), td_margin);
  attach_completion_detector(bundle.circuit, bundle.timing.t_d_applied);
  return bundle;
}

std::optional<tm::Compare> decode_one_hot(Logic g, Logic e, Logic l) {
  const int high = (g == Logic::One) + (e == Logic::One) + (l == Logic::One);
  if (high != 1) return std::nullopt;
  if (g == Logic::One) return tm::Compare::Greater;
  if (e == Logic::One) return tm::Compare::Equal;
  return tm::Compare::Less;
}

tm::Compare eval_outcome(const DrBlock& block, const std::vector<bool>& operand) {
  const DualRail dr = block.dual_rail();
  const auto r = eval_zero_delay(block.netlist, codeword_inputs(dr, operand));
  const auto c = decode_one_hot(r.nets[block.one_hot[0]], r.nets[block.one_hot[1]], r.nets[block.one_hot[2]]);
  if (!c) throw std::runtime_error("1-of-3 output is not a valid codeword");
  return *c;
}

nlohmann::json to_json(const DatapathBundle& b) {
  auto j = to_json(b.circuit.netlist);
  j["binding"] = to_json(b.circuit.binding);
  j["block_map"] = b.circuit.block_map;
  j["interface"] = {{"inputs", b.circuit.binding.inputs},
                    {"outputs", b.circuit.binding.outputs},
                    {"one_hot", b.circuit.one_hot},
                    {"done", b.circuit.done},
                    {"done_raw", b.circuit.done_raw},
                    {"comparator_width", b.comparator_width}};
  j["config"] = tm::to_json(b.config);
  j["timing"] = to_json(b.timing);
  return j;
}

DatapathBundle bundle_from_json(const nlohmann::json& j) {
  static constexpr std::string_view extra[] = {"binding", "block_map", "interface", "config", "timing"};
  DatapathBundle b;
  b.circuit.netlist = netlist_from_json(j, extra);
  try {
    b.circuit.binding = binding_from_json(j.at("binding"));
    b.circuit.block_map = j.at("block_map").get<std::vector<std::string>>();
    const auto& itf = j.at("interface");
    b.circuit.binding.inputs = itf.at("inputs").get<std::vector<std::string>>();
    b.circuit.binding.outputs = itf.at("outputs").get<std::vector<std::string>>();
    b.circuit.one_hot = itf.at("one_hot").get<std::vector<NetId>>();
    b.circuit.done = itf.at("done").get<NetId>();
    b.circuit.done_raw = itf.at("done_raw").get<NetId>();
    b.comparator_width = itf.at("comparator_width").get<std::size_t>();
    b.config = tm::config_from_json(j.at("config"));
    const auto& t = j.at("timing");
    b.timing.t_io = t.at("t_io_ps").get<Time>();
    b.timing.t_int = t.at("t_int_ps").get<Time>();
    b.timing.t_d = t.at("t_d_ps").get<Time>();
    b.timing.t_reset_min = t.at("t_reset_min_ps").get<Time>();
    b.timing.t_d_required = t.at("t_d_required_ps").get<Time>();
    b.timing.margin = t.at("margin").get<double>();
    b.timing.t_d_applied = t.at("t_d_applied_ps").get<Time>();
    b.timing.t_done_fall = t.at("t_done_fall_ps").get<Time>();
    b.timing.max_t_spcw = t.at("max_t_spcw_ps").get<Time>();
    b.timing.io_path = t.at("io_path").get<std::vector<GateId>>();
    b.timing.int_path = t.at("int_path").get<std::vector<GateId>>();
    b.timing.spcw_path = t.at("spcw_path").get<std::vector<GateId>>();
  } catch (const nlohmann::json::exception& e) {
    throw NetlistError(NetlistErrorKind::Parse, std::string("bundle JSON: ") + e.what());
  }
  if (b.circuit.block_map.size() != b.circuit.netlist.num_gates())
    throw NetlistError(NetlistErrorKind::Parse, "bundle JSON: block_map must label every gate");
  return b;
}

}  // namespace selftimed
