// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion...]   (no arguments runs all eight)

#include <fmt/core.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "selftimed/bench.hpp"

using namespace selftimed;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::vector<bool> bits_of(std::uint64_t v, std::size_t n) {
  std::vector<bool> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (v >> i) & 1;
  return b;
}

std::uint64_t value_of(const std::vector<bool>& b) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < b.size(); ++i) v |= std::uint64_t(b[i]) << i;
  return v;
}

std::size_t outcome_mismatches(const DatapathBundle& b, const HandshakeResult& r,
                               const std::vector<std::vector<bool>>& ops) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) bad += r.operands[i].outcome != b.golden(ops[i]);
  return bad;
}

// 1. F=2, C=4: every feature vector against every exclude matrix, plus timed runs.
Outcome oracle_equivalence() {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(2, 4));
  const auto ex = verify_exhaustive(b);

  std::mt19937_64 rng(1);
  std::vector<std::vector<bool>> ops;
  for (int m = 0; m < 200; ++m) {
    std::vector<tm::Bits> exclude(4, tm::Bits(4));
    for (auto& row : exclude)
      for (auto&& bit : row) bit = rng() & 1;
    for (unsigned f = 0; f < 4; ++f) ops.push_back(b.operand(bits_of(f, 2), exclude));
  }
  const auto run = run_handshake(b, ops, DelayModel::nominal(), HandshakeMode::DoneSignalled);
  const std::size_t bad = outcome_mismatches(b, run, ops);
  const bool pass = ex.pass && ex.checked == 4u * 65536u && bad == 0 && run.violations.empty();
  return {pass, fmt::format("{} zero-delay operands checked, exhaustive {}; timed: {} operands over 200 matrices, "
                            "{} mismatches, {} violations",
                            ex.checked, ex.pass ? "ok" : "FAILED", ops.size(), bad, run.violations.size())};
}

// 2. popcount8: all inputs and the block audit.
Outcome popcount8_exhaustive() {
  const DrBlock p = build_popcount8();
  std::size_t bad = 0;
  for (unsigned v = 0; v < 256; ++v) {
    const auto in = bits_of(v, 8);
    bad += value_of(eval_dual_rail(p.dual_rail(), in)) != tm::popcount_oracle(in);
  }
  std::vector<std::vector<bool>> ops;
  for (unsigned v = 0; v < 256; ++v) ops.push_back(bits_of(v, 8));
  const auto run = run_handshake(p, ops, resolve_delays(p.netlist, DelayModel::nominal()), HandshakeOptions{});
  std::size_t timed_bad = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) timed_bad += run.operands[i].t_spcw < 0;
  const std::size_t ha = p.count_blocks("ha_"), fa = p.count_blocks("fa_"), ors = p.count_blocks("or_"),
                    spinv = p.count_blocks("spinv_");
  const bool polarity_ok = compute_spacer_polarity(p.dual_rail()).ok();
  const bool pass = bad == 0 && timed_bad == 0 && run.violations.empty() && ha == 9 && fa == 2 && ors == 2 &&
                    spinv == 2 && polarity_ok;
  return {pass, fmt::format("256 inputs, {} mismatches; audit {} HA / {} FA / {} OR / {} spacer inverters; "
                            "polarity {}; timed violations {}",
                            bad, ha, fa, ors, spinv, polarity_ok ? "ok" : "conflict", run.violations.size())};
}

// 3. Comparator w=4: all pairs, 1-of-3 exclusivity, silent lower stages.
Outcome comparator_exhaustive() {
  constexpr std::size_t w = 4;
  const DrBlock c = build_comparator(w);
  std::vector<std::vector<bool>> ops;
  std::vector<std::pair<unsigned, unsigned>> pairs;
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b) {
      auto in = bits_of(a, w);
      const auto bb = bits_of(b, w);
      in.insert(in.end(), bb.begin(), bb.end());
      ops.push_back(in);
      pairs.emplace_back(a, b);
    }
  std::size_t zero_delay_bad = 0;
  for (std::size_t i = 0; i < ops.size(); ++i)
    zero_delay_bad += eval_outcome(c, ops[i]) != tm::compare_oracle(pairs[i].first, pairs[i].second);

  HandshakeOptions o;
  o.keep_traces = true;
  const auto run = run_handshake(c, ops, resolve_delays(c.netlist, DelayModel::nominal()), o);
  std::size_t timed_bad = 0, one_hot = 0, msb_pairs = 0, lower_transitions = 0;
  std::vector<bool> lower(c.netlist.num_nets(), false);
  for (GateId g = 0; g < c.netlist.num_gates(); ++g) {
    const auto& label = c.block_map[g];
    if (label == "cmp_stage_0" || label == "cmp_stage_1" || label == "cmp_stage_2") lower[c.netlist.gate(g).output] = true;
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    timed_bad += run.operands[i].outcome != tm::compare_oracle(pairs[i].first, pairs[i].second);
    const Trace& t = run.traces[i];
    one_hot += check_one_hot(t, c.one_hot).size();
    if (((pairs[i].first ^ pairs[i].second) >> (w - 1)) & 1) {
      ++msb_pairs;
      std::size_t spacer_at = t.changes.size();
      for (const auto& m : t.marks)
        if (m.phase == Phase::Spacer) spacer_at = m.change_index;
      for (std::size_t k = 0; k < spacer_at; ++k) lower_transitions += lower[t.changes[k].net];
    }
  }
  const bool pass = zero_delay_bad == 0 && timed_bad == 0 && one_hot == 0 && lower_transitions == 0 &&
                    run.violations.empty() && msb_pairs == 128;
  return {pass, fmt::format("256 pairs, {} zero-delay / {} timed mismatches; one-hot violations {}; "
                            "{} MSB-differing pairs, {} lower-stage transitions in the valid phase",
                            zero_delay_bad, timed_bad, one_hot, msb_pairs, lower_transitions)};
}

// 4. 10 x 1,000 handshakes with static jitter in [0.5, 1.5].
Outcome jitter_robustness() {
  DelayModel sizing = DelayModel::nominal();
  sizing.jitter = Jitter{0.5, 1.5, 0};
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(4, 8), sizing);
  std::map<std::string, std::size_t> kinds;
  std::size_t total = 0, changed = 0, wrong = 0, handshakes = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ops = sample_operands(b, SamplerKind::Full, 1000, seed);
    DelayModel m = sizing;
    m.jitter->seed = seed;
    const auto jit = run_handshake(b, ops, m, HandshakeMode::DoneSignalled);
    const auto ref = run_handshake(b, ops, DelayModel::nominal(), HandshakeMode::DoneSignalled);
    for (const auto& v : jit.violations) ++kinds[std::string(to_string(v.kind))];
    total += jit.violations.size() + ref.violations.size();
    for (std::size_t i = 0; i < ops.size(); ++i) {
      changed += jit.operands[i].outcome != ref.operands[i].outcome;
      wrong += jit.operands[i].outcome != b.golden(ops[i]);
    }
    handshakes += ops.size();
  }
  std::string by_kind;
  for (const char* k : {"NonMonotonic", "ForbiddenState", "OneHotViolation", "PrematureInput", "MissingReset", "Stall"})
    by_kind += fmt::format(" {}={}", k, kinds[k]);
  return {total == 0 && changed == 0 && wrong == 0 && handshakes == 10000,
          fmt::format("{} handshakes; violations{}; decisions changed vs zero jitter {}, vs reference {}; "
                      "done fall delay {} ps",
                      handshakes, by_kind, changed, wrong, b.timing.t_d_applied)};
}

// 5. done falls no earlier than the last internal net reaches its spacer.
Outcome cd_timing() {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(4, 8));
  const auto ops = sample_operands(b, SamplerKind::Full, 1000, 5);
  const auto run = run_handshake(b, ops, DelayModel::nominal(), HandshakeMode::DoneSignalled);
  std::size_t early = 0;
  Time min_slack = std::numeric_limits<Time>::max();
  for (const auto& r : run.operands) {
    early += r.done_fall < r.t_cwsp;
    min_slack = std::min(min_slack, r.done_fall - r.t_cwsp);
  }
  const auto& t = b.timing;
  const bool formula = t.t_d == std::max<Time>(0, t.t_int - t.t_io) && t.t_io + t.t_d == t.t_int;
  return {early == 0 && formula && run.violations.empty(),
          fmt::format("1000 operands, {} with done falling early, min slack {} ps; t_io {} + t_d {} = {} "
                      "(t_int {}); applied fall delay {} ps",
                      early, min_slack, t.t_io, t.t_d, t.t_io + t.t_d, t.t_int, t.t_d_applied)};
}

// 6. Average-case latency against the worst case.
Outcome early_propagation() {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(4, 8));
  const auto ops = sample_operands(b, SamplerKind::Full, 10000, 42);
  const auto run = run_handshake(b, ops, DelayModel::nominal(), HandshakeMode::DoneSignalled);
  const auto r = make_bench_report(b, run, ops, ops.size(), 42, HandshakeMode::DoneSignalled, SamplerKind::Full);
  const bool ratio_ok = r.mean_over_max < 0.8;
  const bool speedup_ok = r.speedup > 1.0;
  return {ratio_ok && speedup_ok && r.violation_count == 0 && r.decision_mismatches == 0,
          fmt::format("mean {:.1f} ps, measured max {} ps, mean/max {:.3f} (target < 0.8: {}); "
                      "mean/STA max {:.3f}; baseline {} ps, speedup {:.3f} (target > 1: {}); min {} ps",
                      r.mean_latency, r.max_latency, r.mean_over_max, ratio_ok ? "met" : "NOT met",
                      r.mean_over_sta_max, r.baseline_period, r.speedup, speedup_ok ? "met" : "NOT met",
                      r.min_latency)};
}

// 7. Latency scales with the delay multiplier and decisions do not change.
Outcome voltage_scaling() {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(4, 8));
  SweepOptions o;
  o.vdds = {1.2, 0.6, 0.25};
  o.n = 1000;
  o.seed = 7;
  o.sampler = SamplerKind::Full;
  const VddTable table = VddTable::default_table();
  const auto ops = sample_operands(b, o.sampler, o.n, o.seed);
  std::vector<HandshakeResult> runs;
  for (double v : o.vdds) runs.push_back(run_handshake(b, ops, scale_delay_model(DelayModel::nominal(), v, table),
                                                       HandshakeMode::DoneSignalled));
  // tolerance: one time unit per gate on the longest path
  const double tol = static_cast<double>(b.timing.spcw_path.size());
  bool pass = true;
  std::string detail;
  double base_mean = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto d = summarize(runs[k]);
    const double mult = table.multiplier(o.vdds[k]);
    if (k == 0) base_mean = d.mean;
    const double expected = base_mean * mult;
    std::size_t differ = 0;
    for (std::size_t i = 0; i < ops.size(); ++i) differ += runs[k].operands[i].outcome != runs[0].operands[i].outcome;
    const bool ok = std::abs(d.mean - expected) <= tol && differ == 0 && runs[k].violations.empty() &&
                    outcome_mismatches(b, runs[k], ops) == 0;
    pass = pass && ok;
    detail += fmt::format("{}{} V x{:g}: mean {:.2f} ps (expected {:.2f}), decisions changed {}", k ? "; " : "",
                          o.vdds[k], mult, d.mean, expected, differ);
  }
  return {pass, detail};
}

// 8. Random unate netlists survive mapping, optimisation and polarity repair.
Outcome mapping_soundness() {
  std::mt19937_64 rng(99);
  const std::vector<GateKind> kinds{GateKind::Inv,   GateKind::Buf,   GateKind::And2,  GateKind::And3,
                                    GateKind::And4,  GateKind::Or2,   GateKind::Or3,   GateKind::Or4,
                                    GateKind::Nand2, GateKind::Nand3, GateKind::Nor2,  GateKind::Nor3,
                                    GateKind::Aoi21, GateKind::Aoi22, GateKind::Oai21, GateKind::Oai22,
                                    GateKind::Ao21,  GateKind::Ao22,  GateKind::Oa21,  GateKind::Oa22};
  std::size_t func_bad = 0, grew = 0, polarity_bad = 0, inverters = 0, folded = 0;
  for (int t = 0; t < 100; ++t) {
    NetlistSpec s;
    const std::size_t npi = 1 + rng() % 8, ng = 1 + rng() % 25;
    std::vector<NetId> nets;
    for (std::size_t i = 0; i < npi; ++i) nets.push_back(s.add_net("i" + std::to_string(i)));
    s.pis = nets;
    std::vector<int> fanout(npi + ng, 0);
    for (std::size_t g = 0; g < ng; ++g) {
      GateKind k = kinds[rng() % kinds.size()];
      while (arity(k) > nets.size()) k = kinds[rng() % kinds.size()];
      std::vector<NetId> pool = nets, ins;
      for (std::size_t a = 0; a < arity(k); ++a) {
        const std::size_t pick = rng() % pool.size();
        ins.push_back(pool[pick]);
        ++fanout[pool[pick]];
        pool.erase(pool.begin() + pick);
      }
      nets.push_back(s.emit(k, ins, "g" + std::to_string(g)));
    }
    for (std::size_t i = npi; i < nets.size(); ++i)
      if (fanout[nets[i]] == 0) s.pos.push_back(nets[i]);
    const Netlist sr = Netlist::build(s);

    auto reference = [&](const std::vector<bool>& in) {
      std::vector<Logic> pis;
      for (bool bit : in) pis.push_back(to_logic(bit));
      std::vector<bool> out;
      for (Logic v : eval_zero_delay(sr, pis).pos) out.push_back(v == Logic::One);
      return out;
    };
    auto equivalent = [&](const DualRail& dr) {
      for (std::uint64_t v = 0; v < (1u << npi); ++v)
        if (eval_dual_rail(dr, bits_of(v, npi)) != reference(bits_of(v, npi))) return false;
      return true;
    };

    DualRail dr = direct_map(sr);
    if (!equivalent(dr)) ++func_bad;
    // spacer inverters on a few internal signals give the optimiser work
    const std::size_t extra = rng() % 4;
    for (std::size_t k = 0; k < extra; ++k) {
      std::vector<std::string> candidates;
      for (const auto& p : dr.binding.pairs)
        if (std::find(dr.binding.inputs.begin(), dr.binding.inputs.end(), p.signal) == dr.binding.inputs.end())
          candidates.push_back(p.signal);
      if (candidates.empty()) break;
      insert_spacer_inverter(dr, candidates[rng() % candidates.size()]);
      ++inverters;
    }
    resolve_spacer_conflicts(dr);
    const std::size_t before = dr.netlist.num_gates();
    DualRail opt = negative_gate_optimize(dr);
    if (opt.netlist.num_gates() > before) ++grew;
    folded += before - std::min(before, opt.netlist.num_gates());
    resolve_spacer_conflicts(opt);
    if (!compute_spacer_polarity(opt).ok()) ++polarity_bad;
    if (!equivalent(opt)) ++func_bad;
  }
  return {func_bad == 0 && grew == 0 && polarity_bad == 0,
          fmt::format("100 netlists; function mismatches {}; optimiser growth {}; polarity failures {}; "
                      "{} spacer inverters inserted, {} gates removed by optimisation",
                      func_bad, grew, polarity_bad, inverters, folded)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "oracle equivalence, F=2 C=4 exhaustive", oracle_equivalence},
      {2, "popcount8 exhaustive and block audit", popcount8_exhaustive},
      {3, "comparator w=4 exhaustive with early propagation", comparator_exhaustive},
      {4, "protocol robustness under delay jitter", jitter_robustness},
      {5, "reduced completion detection timing", cd_timing},
      {6, "early propagation: mean/max < 0.8 and speedup > 1", early_propagation},
      {7, "voltage sweep latency scaling", voltage_scaling},
      {8, "mapping soundness on random unate netlists", mapping_soundness},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("criterion {} {}: {} [{}] ({:.1f} s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail, secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
