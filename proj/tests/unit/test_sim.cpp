#include <doctest.h>

#include <random>
#include <sstream>

#include "selftimed/sim.hpp"

using namespace selftimed;

namespace {

constexpr Logic L0 = Logic::Zero, L1 = Logic::One;

std::vector<bool> bits_of(unsigned v, std::size_t n) {
  std::vector<bool> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (v >> i) & 1;
  return b;
}

DelayModel uniform(Time rise, Time fall) {
  DelayModel m = DelayModel::nominal();
  for (auto& [k, d] : m.defaults) d = {rise, fall};
  return m;
}

std::vector<bool> cmp_operand(unsigned a, unsigned b, std::size_t w) {
  auto in = bits_of(a, w);
  const auto bb = bits_of(b, w);
  in.insert(in.end(), bb.begin(), bb.end());
  return in;
}

std::size_t violations_of(const HandshakeResult& r, ViolationKind k) {
  std::size_t n = 0;
  for (const auto& v : r.violations) n += v.kind == k;
  return n;
}

}  // namespace

TEST_CASE("single AND2 rises after its rise delay") {
  NetlistSpec s;
  const NetId a = s.add_net("a"), b = s.add_net("b");
  const NetId y = s.emit(GateKind::And2, {a, b}, "y");
  s.pis = {a, b};
  s.pos = {y};
  const Netlist n = Netlist::build(s);
  DelayModel m = DelayModel::nominal();
  m.defaults[GateKind::And2] = {7, 9};
  const Trace t = simulate(n, m, {{0, {L0, L0}}, {0, {L1, L1}}});
  CHECK(t.transitions(y) == std::vector<std::pair<Time, Logic>>{{7, L1}});
  const Trace f = simulate(n, m, {{0, {L1, L1}}, {3, {L0, L1}}});
  CHECK(f.transitions(y) == std::vector<std::pair<Time, Logic>>{{12, L0}});
}

TEST_CASE("inverter chain delays add up") {
  NetlistSpec s;
  NetId x = s.add_net("a");
  s.pis = {x};
  for (int i = 0; i < 3; ++i) x = s.emit(GateKind::Inv, {x});
  s.pos = {x};
  const Netlist n = Netlist::build(s);
  const Trace t = simulate(n, uniform(5, 5), {{0, {L0}}, {0, {L1}}});
  CHECK(t.transitions(x) == std::vector<std::pair<Time, Logic>>{{15, L0}});
}

TEST_CASE("doubling every delay doubles every timestamp") {
  const DrBlock c = build_comparator(3);
  const DualRail dr = c.dual_rail();
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto in = codeword_inputs(dr, bits_of(rng() % 64, 6));
    const std::vector<Stimulus> st{{0, spacer_inputs(dr)}, {0, in}, {500, spacer_inputs(dr)}};
    const DelayModel m1 = DelayModel::nominal();
    DelayModel m2 = m1;
    m2.vdd_multiplier = 2.0;
    const Trace a = simulate(c.netlist, m1, st), b = simulate(c.netlist, m2, {st[0], st[1], {1000, st[2].pis}});
    REQUIRE(a.changes.size() == b.changes.size());
    for (std::size_t i = 0; i < a.changes.size(); ++i) {
      CHECK(b.changes[i].time == 2 * a.changes[i].time);
      CHECK(b.changes[i].net == a.changes[i].net);
      CHECK(b.changes[i].value == a.changes[i].value);
    }
  }
}

TEST_CASE("settled simulation equals zero-delay evaluation") {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(2, 4));
  const DualRail dr = b.circuit.dual_rail();
  const auto sampler = full_sampler(b);
  std::mt19937_64 rng(12);
  Simulator sim(b.circuit.netlist, resolve_delays(b.circuit.netlist, DelayModel::nominal()), spacer_inputs(dr));
  for (int t = 0; t < 50; ++t) {
    const auto op = sampler(rng);
    const auto pis = codeword_inputs(dr, op);
    sim.apply_inputs(pis);
    sim.run_until_quiet();
    CHECK(sim.values() == eval_zero_delay(b.circuit.netlist, pis).nets);
    sim.apply_inputs(spacer_inputs(dr));
    sim.run_until_quiet();
    CHECK(sim.values() == eval_zero_delay(b.circuit.netlist, spacer_inputs(dr)).nets);
    sim.clear_trace();
  }
}

TEST_CASE("event budget") {
  NetlistSpec s;
  NetId x = s.add_net("a");
  s.pis = {x};
  for (int i = 0; i < 10; ++i) x = s.emit(GateKind::Inv, {x});
  s.pos = {x};
  const Netlist n = Netlist::build(s);
  SimOptions o;
  o.max_events = 4;
  CHECK_THROWS_AS(simulate(n, uniform(1, 1), {{0, {L0}}, {0, {L1}}}, o), EventExplosion);
  o.max_events = 100;
  CHECK_NOTHROW(simulate(n, uniform(1, 1), {{0, {L0}}, {0, {L1}}}, o));
}

TEST_CASE("a new event cancels later pending events on the same net") {
  // a pulse shorter than the delay still appears at the output under transport delay
  NetlistSpec s;
  const NetId a = s.add_net("a");
  const NetId y = s.emit(GateKind::Buf, {a}, "y");
  s.pis = {a};
  s.pos = {y};
  const Netlist n = Netlist::build(s);
  const Trace t = simulate(n, uniform(10, 10), {{0, {L0}}, {0, {L1}}, {3, {L0}}});
  CHECK(t.transitions(y) == std::vector<std::pair<Time, Logic>>{{10, L1}, {13, L0}});
  // rise 10, fall 2: the falling event at 5 lands before the rise at 10 and cancels it
  const Trace u = simulate(n, uniform(10, 2), {{0, {L0}}, {0, {L1}}, {3, {L0}}});
  CHECK(u.transitions(y).empty());
}

TEST_CASE("checkers flag injected faults") {
  SUBCASE("glitch within the valid phase") {
    Trace t;
    t.initial = {L0, L0};
    t.changes = {{5, 0, L1}, {8, 0, L0}, {9, 0, L1}};
    t.marks = {{0, 0, Phase::Valid, 0}, {3, 20, Phase::Spacer, 0}};
    const auto v = check_monotonic(t);
    REQUIRE(v.size() == 2);  // second and third transitions
    CHECK(v[0].kind == ViolationKind::NonMonotonic);
    CHECK(v[0].net == 0);
    CHECK(v[0].time == 8);
    CHECK(v[1].time == 9);
  }
  SUBCASE("one rise and one fall per cycle is clean") {
    Trace t;
    t.initial = {L0};
    t.changes = {{5, 0, L1}, {25, 0, L0}};
    t.marks = {{0, 0, Phase::Valid, 0}, {1, 20, Phase::Spacer, 0}};
    CHECK(check_monotonic(t).empty());
  }
  SUBCASE("real hazard: AND(a, !a)") {
    NetlistSpec s;
    const NetId a = s.add_net("a");
    const NetId na = s.emit(GateKind::Inv, {a});
    const NetId y = s.emit(GateKind::And2, {a, na}, "y");
    s.pis = {a};
    s.pos = {y};
    const Netlist n = Netlist::build(s);
    DelayModel m = uniform(5, 5);
    m.defaults[GateKind::Inv] = {20, 20};
    Simulator sim(n, resolve_delays(n, m), std::vector<Logic>{L0});
    sim.mark(Phase::Valid, 0);
    sim.apply_inputs(std::vector<Logic>{L1});
    sim.run_until_quiet();
    CHECK(sim.trace().transitions(y) == std::vector<std::pair<Time, Logic>>{{5, L1}, {25, L0}});
    const auto v = check_monotonic(sim.trace());
    REQUIRE(v.size() == 1);
    CHECK(v[0].net == y);
  }
  SUBCASE("pair forced to {1,1} under an ALL0 spacer") {
    DualRailBinding b;
    b.pairs = {{"x", 0, 1, SpacerPolarity::AllZero}, {"z", 2, 3, SpacerPolarity::AllOne}};
    Trace t;
    t.initial = {L0, L0, L1, L1};
    t.changes = {{5, 0, L1}, {7, 2, L0}, {9, 1, L1}, {9, 0, L0}, {12, 3, L0}};
    const auto v = check_forbidden(t, b);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::ForbiddenState);
    CHECK(v[0].time == 12);
  }
  SUBCASE("two 1-of-3 wires high together") {
    Trace t;
    t.initial = {L0, L0, L0};
    t.changes = {{5, 0, L1}, {6, 0, L0}, {6, 2, L1}, {8, 1, L1}};
    const std::vector<NetId> oh{0, 1, 2};
    const auto v = check_one_hot(t, oh);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::OneHotViolation);
    CHECK(v[0].time == 8);
  }
}

TEST_CASE("clean clause block handshakes") {
  const DrBlock c = build_clause_dr(2);
  std::vector<std::vector<bool>> ops;
  for (unsigned v = 0; v < 64; ++v) ops.push_back(bits_of(v, 6));
  HandshakeOptions o;
  const auto r = run_handshake(c, ops, resolve_delays(c.netlist, DelayModel::nominal()), o);
  CHECK(r.violations.empty());
  REQUIRE(r.operands.size() == 64);
  for (const auto& op : r.operands) {
    CHECK(op.t_spcw > 0);
    CHECK(op.t_cwsp > 0);
  }
}

TEST_CASE("identical operands back to back give identical results") {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(3, 6));
  std::mt19937_64 rng(4);
  const auto op = full_sampler(b)(rng);
  const auto r = run_handshake(b, {op, op, op}, DelayModel::nominal(), HandshakeMode::DoneSignalled);
  CHECK(r.violations.empty());
  REQUIRE(r.operands.size() == 3);
  for (const auto& x : r.operands) {
    CHECK(x.t_spcw == r.operands[0].t_spcw);
    CHECK(x.t_cwsp == r.operands[0].t_cwsp);
    CHECK(x.done_rise == r.operands[0].done_rise);
    CHECK(x.done_fall == r.operands[0].done_fall);
    CHECK(x.outcome == b.golden(op));
  }
  const auto again = run_handshake(b, {op, op, op}, DelayModel::nominal(), HandshakeMode::DoneSignalled);
  CHECK(again.operands[2].t_spcw == r.operands[2].t_spcw);
}

TEST_CASE("done rises one validity gate after the outputs are valid") {
  // the 1-of-3 group feeds a single OR3, which is also done_raw
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(2, 4));
  const auto delays = resolve_delays(b.circuit.netlist, DelayModel::nominal());
  const GateId or3 = *b.circuit.netlist.driver(b.circuit.done_raw);
  REQUIRE(b.circuit.netlist.gate(or3).kind == GateKind::Or3);
  std::mt19937_64 rng(6);
  const auto sampler = full_sampler(b);
  std::vector<std::vector<bool>> ops;
  for (int i = 0; i < 40; ++i) ops.push_back(sampler(rng));
  const auto r = run_handshake(b, ops, DelayModel::nominal(), HandshakeMode::DoneSignalled);
  CHECK(r.violations.empty());
  for (const auto& op : r.operands) CHECK(op.done_rise == op.t_spcw + delays[or3].rise);
}

TEST_CASE("comparator latency depends on the first differing bit") {
  constexpr std::size_t w = 4;
  DrBlock c = build_comparator(w);
  const auto delays = resolve_delays(c.netlist, DelayModel::nominal());
  std::vector<std::vector<bool>> ops;
  std::vector<int> first_diff;  // bit index from the LSB; -1 when equal
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b) {
      ops.push_back(cmp_operand(a, b, w));
      int d = -1;
      for (int i = w - 1; i >= 0; --i)
        if (((a ^ b) >> i) & 1) {
          d = i;
          break;
        }
      first_diff.push_back(d);
    }
  const auto r = run_handshake(c, ops, delays, HandshakeOptions{});
  CHECK(r.violations.empty());
  std::map<int, std::pair<Time, Time>> range;  // min, max
  for (std::size_t i = 0; i < ops.size(); ++i) {
    auto [it, fresh] = range.try_emplace(first_diff[i], r.operands[i].t_spcw, r.operands[i].t_spcw);
    it->second.first = std::min(it->second.first, r.operands[i].t_spcw);
    it->second.second = std::max(it->second.second, r.operands[i].t_spcw);
  }
  // every pair with the same first differing bit takes the same time
  for (const auto& [d, mm] : range) CHECK(mm.first == mm.second);
  for (int i = 0; i + 1 < int(w); ++i) CHECK(range[i].first >= range[i + 1].second);
  for (int i = 1; i < int(w); ++i) CHECK(range[-1].first >= range[i].second);
  CHECK(range[w - 1].second < range[0].first);
}

TEST_CASE("latency distribution summary") {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(2, 4));
  const auto d = measure_latency_distribution(b, full_sampler(b), 200, 1, DelayModel::nominal());
  CHECK(d.t_spcw.size() == 200);
  CHECK(d.violations.empty());
  CHECK(d.mean <= d.max);
  CHECK(d.mean < d.max);
  std::size_t total = 0;
  for (const auto& [bin, n] : d.histogram) {
    CHECK(bin % 10 == 0);
    total += n;
  }
  CHECK(total == 200);
  const auto again = measure_latency_distribution(b, full_sampler(b), 200, 1, DelayModel::nominal());
  CHECK(again.t_spcw == d.t_spcw);
}

TEST_CASE("oracle-timed mode is clean at nominal delays") {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(2, 4));
  std::mt19937_64 rng(2);
  std::vector<std::vector<bool>> ops;
  for (int i = 0; i < 50; ++i) ops.push_back(full_sampler(b)(rng));
  const auto r = run_handshake(b, ops, DelayModel::nominal(), HandshakeMode::OracleTimed);
  CHECK(r.violations.empty());
  for (std::size_t i = 0; i < ops.size(); ++i) CHECK(r.operands[i].outcome == b.golden(ops[i]));
}

TEST_CASE("an undersized done delay is reported as a missing reset") {
  auto b = build_inference_datapath(tm::TmConfig::first_half_positive(4, 16));
  REQUIRE(b.timing.t_d_applied > 0);
  // zero the done fall delay
  NetlistSpec spec = b.circuit.netlist.spec();
  for (auto& g : spec.gates)
    if (g.kind == GateKind::Delay) g.delay = {0, 0};
  b.circuit.netlist = Netlist::build(spec);
  std::mt19937_64 rng(7);
  std::vector<std::vector<bool>> ops;
  for (int i = 0; i < 100; ++i) ops.push_back(full_sampler(b)(rng));
  const auto r = run_handshake(b, ops, DelayModel::nominal(), HandshakeMode::DoneSignalled);
  CHECK(violations_of(r, ViolationKind::MissingReset) > 0);
}

TEST_CASE("trace writers") {
  NetlistSpec s;
  const NetId a = s.add_net("a"), b = s.add_net("b");
  s.pos = {s.emit(GateKind::And2, {a, b}, "y")};
  s.pis = {a, b};
  const Netlist n = Netlist::build(s);
  const Trace t = simulate(n, uniform(15, 15), {{0, {L0, L0}}, {0, {L1, L1}}});
  std::ostringstream vcd;
  write_vcd(vcd, n, t);
  const std::string v = vcd.str();
  CHECK(v.find("$timescale 1ps $end") != std::string::npos);
  CHECK(v.find(" y $end") != std::string::npos);
  CHECK(v.find("#15\n") != std::string::npos);
  CHECK(v.find("$enddefinitions $end") != std::string::npos);

  std::ostringstream csv;
  write_measurements_csv(csv, {{0, 120, 80, 145, 200, tm::Compare::Less}, {1, 100, 70, 125, 200, std::nullopt}});
  CHECK(csv.str() ==
        "operand_index,t_spcw_ps,t_cwsp_ps,done_rise_ps,done_fall_ps,outcome\n"
        "0,120,80,145,200,LESS\n"
        "1,100,70,125,200,NONE\n");
}
