#include "selftimed/sim.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

namespace selftimed {

std::vector<std::pair<Time, Logic>> Trace::transitions(NetId net) const {
  std::vector<std::pair<Time, Logic>> out;
  for (const auto& c : changes)
    if (c.net == net) out.emplace_back(c.time, c.value);
  return out;
}

Simulator::Simulator(const Netlist& n, std::vector<DelaySpec> delays, std::span<const Logic> initial_pis,
                     SimOptions options)
    : n_(&n), delays_(std::move(delays)), opt_(options) {
  if (delays_.size() != n.num_gates()) throw std::invalid_argument("Simulator: one delay per gate required");
  if (opt_.max_events == 0) opt_.max_events = 2000 * n.num_gates() + 10000;
  values_ = eval_zero_delay(n, initial_pis).nets;
  last_change_.assign(n.num_nets(), 0);
  pending_.resize(n.num_nets());
  dirty_flag_.assign(n.num_gates(), false);
  trace_.initial = values_;
}

void Simulator::clear_trace() {
  trace_.changes.clear();
  trace_.marks.clear();
  trace_.initial = values_;
  budget_used_ = 0;
}

void Simulator::mark(Phase p, std::size_t operand) {
  trace_.marks.push_back({trace_.changes.size(), now_, p, operand});
}

void Simulator::schedule(NetId net, Time at, Logic v, std::uint64_t order) {
  auto& pend = pending_[net];
  while (!pend.empty() && pend.back().time >= at) pend.pop_back();
  const Logic projected = pend.empty() ? values_[net] : pend.back().value;
  if (projected == v) return;
  const std::uint64_t id = next_id_++;
  pend.push_back({at, v, id});
  queue_.push({at, order, net, id});
}

void Simulator::apply_inputs(std::span<const Logic> pis) {
  if (pis.size() != n_->pis().size()) throw std::invalid_argument("apply_inputs: PI count mismatch");
  for (std::size_t i = 0; i < pis.size(); ++i) apply_input(i, pis[i]);
}

void Simulator::apply_input(std::size_t pi_index, Logic v) { schedule(n_->pis().at(pi_index), now_, v, 0); }

void Simulator::evaluate(GateId g) {
  const Gate& gate = n_->gate(g);
  Logic in[4];
  for (std::size_t i = 0; i < gate.inputs.size(); ++i) in[i] = values_[gate.inputs[i]];
  const Logic v = eval_gate(gate.kind, std::span<const Logic>(in, gate.inputs.size()), values_[gate.output]);
  const DelaySpec& d = delays_[g];
  const Time delay = v == Logic::One ? d.rise : v == Logic::Zero ? d.fall : std::max(d.rise, d.fall);
  schedule(gate.output, now_ + delay, v, std::uint64_t{g} + 1);
}

bool Simulator::step() {
  while (!queue_.empty()) {
    const QueueEntry top = queue_.top();
    if (!pending_[top.net].empty() && pending_[top.net].front().id == top.id) break;
    queue_.pop();  // cancelled
  }
  if (queue_.empty()) return false;
  now_ = queue_.top().time;
  while (!queue_.empty() && queue_.top().time == now_) {
    const QueueEntry e = queue_.top();
    queue_.pop();
    auto& pend = pending_[e.net];
    if (pend.empty() || pend.front().id != e.id) continue;
    const Logic v = pend.front().value;
    pend.erase(pend.begin());
    ++events_;
    if (++budget_used_ > opt_.max_events)
      throw EventExplosion("event count exceeded " + std::to_string(opt_.max_events));
    if (values_[e.net] == v) continue;
    values_[e.net] = v;
    last_change_[e.net] = now_;
    if (opt_.record) trace_.changes.push_back({now_, e.net, v});
    for (GateId g : n_->fanout(e.net)) {
      if (!dirty_flag_[g]) {
        dirty_flag_[g] = true;
        dirty_.push_back(g);
      }
    }
  }
  std::sort(dirty_.begin(), dirty_.end());
  for (GateId g : dirty_) {
    dirty_flag_[g] = false;
    evaluate(g);
  }
  dirty_.clear();
  return true;
}

void Simulator::run_until_quiet() {
  while (step()) {
  }
}

bool Simulator::run_until(NetId net, Logic v) {
  while (values_[net] != v)
    if (!step()) return false;
  return true;
}

void Simulator::advance_to(Time t) {
  while (!queue_.empty()) {
    const QueueEntry top = queue_.top();
    if (pending_[top.net].empty() || pending_[top.net].front().id != top.id) {
      queue_.pop();
      continue;
    }
    if (top.time >= t) break;
    step();
  }
  now_ = std::max(now_, t);
}

Trace simulate(const Netlist& n, const DelayModel& m, const std::vector<Stimulus>& schedule, SimOptions options) {
  if (schedule.empty()) throw std::invalid_argument("simulate: empty stimulus schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i].time < schedule[i - 1].time) throw std::invalid_argument("simulate: stimulus times must not decrease");
  Simulator sim(n, resolve_delays(n, m), schedule.front().pis, options);
  sim.advance_to(schedule.front().time);
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    sim.advance_to(schedule[i].time);
    sim.apply_inputs(schedule[i].pis);
  }
  sim.run_until_quiet();
  return sim.trace();
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::NonMonotonic: return "NonMonotonic";
    case ViolationKind::ForbiddenState: return "ForbiddenState";
    case ViolationKind::PrematureInput: return "PrematureInput";
    case ViolationKind::MissingReset: return "MissingReset";
    case ViolationKind::OneHotViolation: return "OneHotViolation";
    default: return "Stall";
  }
}

std::vector<ProtocolViolation> check_monotonic(const Trace& t) {
  std::vector<ProtocolViolation> out;
  std::vector<const PhaseMark*> valids, spacers;
  for (const auto& m : t.marks) (m.phase == Phase::Valid ? valids : spacers).push_back(&m);
  if (valids.empty()) {
    // No phase information: any net that changes more than twice is suspect.
    std::vector<int> count(t.initial.size(), 0);
    for (const auto& c : t.changes)
      if (++count[c.net] == 3) out.push_back({ViolationKind::NonMonotonic, 0, c.time, c.net, "third transition"});
    return out;
  }
  std::vector<int> before_spacer(t.initial.size(), 0), total(t.initial.size(), 0);
  std::vector<std::size_t> touched;
  std::size_t vi = 0;
  const PhaseMark* cur_valid = nullptr;
  const PhaseMark* cur_spacer = nullptr;
  auto reset_counts = [&] {
    for (NetId nt : touched) before_spacer[nt] = total[nt] = 0;
    touched.clear();
  };
  for (std::size_t i = 0; i <= t.changes.size(); ++i) {
    while (vi < valids.size() && valids[vi]->change_index == i) {
      reset_counts();
      cur_valid = valids[vi++];
      cur_spacer = nullptr;
      for (const auto* s : spacers)
        if (s->operand == cur_valid->operand && s->change_index >= cur_valid->change_index) {
          cur_spacer = s;
          break;
        }
    }
    if (i == t.changes.size()) break;
    if (!cur_valid) continue;
    const Change& c = t.changes[i];
    if (total[c.net] == 0 && before_spacer[c.net] == 0) touched.push_back(c.net);
    ++total[c.net];
    const bool in_valid_half = !cur_spacer || i < cur_spacer->change_index;
    if (in_valid_half && ++before_spacer[c.net] == 2)
      out.push_back({ViolationKind::NonMonotonic, cur_valid->operand, c.time, c.net, "second transition before spacer"});
    else if (total[c.net] == 3)
      out.push_back({ViolationKind::NonMonotonic, cur_valid->operand, c.time, c.net, "third transition in one cycle"});
  }
  return out;
}

namespace {

template <typename Check>
void replay_by_time(const Trace& t, Check&& check) {
  std::vector<Logic> v = t.initial;
  std::vector<NetId> touched;
  std::size_t operand = 0, mi = 0;
  for (std::size_t i = 0; i < t.changes.size();) {
    const Time now = t.changes[i].time;
    touched.clear();
    for (; i < t.changes.size() && t.changes[i].time == now; ++i) {
      while (mi < t.marks.size() && t.marks[mi].change_index <= i) operand = t.marks[mi++].operand;
      v[t.changes[i].net] = t.changes[i].value;
      touched.push_back(t.changes[i].net);
    }
    check(v, touched, now, operand);
  }
}

}  // namespace

std::vector<ProtocolViolation> check_forbidden(const Trace& t, const DualRailBinding& b) {
  std::vector<ProtocolViolation> out;
  std::vector<std::vector<std::size_t>> pairs_of(t.initial.size());
  for (std::size_t p = 0; p < b.pairs.size(); ++p) {
    const auto& rp = b.pairs[p];
    if (rp.pos < pairs_of.size()) pairs_of[rp.pos].push_back(p);
    if (rp.neg < pairs_of.size() && rp.neg != rp.pos) pairs_of[rp.neg].push_back(p);
  }
  auto forbidden = [&](const std::vector<Logic>& v, const RailPair& rp) {
    const Logic f = spacer_value(flip(rp.spacer));
    return v[rp.pos] == f && v[rp.neg] == f;
  };
  for (const auto& rp : b.pairs)
    if (forbidden(t.initial, rp))
      out.push_back({ViolationKind::ForbiddenState, 0, 0, rp.pos, rp.signal + " starts in its forbidden state"});
  replay_by_time(t, [&](const std::vector<Logic>& v, const std::vector<NetId>& touched, Time now, std::size_t op) {
    std::vector<std::size_t> seen;
    for (NetId nt : touched)
      for (std::size_t p : pairs_of[nt]) {
        if (std::find(seen.begin(), seen.end(), p) != seen.end()) continue;
        seen.push_back(p);
        if (forbidden(v, b.pairs[p]))
          out.push_back({ViolationKind::ForbiddenState, op, now, b.pairs[p].pos, b.pairs[p].signal});
      }
  });
  return out;
}

std::vector<ProtocolViolation> check_one_hot(const Trace& t, std::span<const NetId> one_hot) {
  std::vector<ProtocolViolation> out;
  if (one_hot.empty()) return out;
  auto high = [&](const std::vector<Logic>& v) {
    return std::count_if(one_hot.begin(), one_hot.end(), [&](NetId w) { return v[w] == Logic::One; });
  };
  if (high(t.initial) > 1) out.push_back({ViolationKind::OneHotViolation, 0, 0, one_hot[0], "initial state"});
  replay_by_time(t, [&](const std::vector<Logic>& v, const std::vector<NetId>& touched, Time now, std::size_t op) {
    if (std::none_of(touched.begin(), touched.end(),
                     [&](NetId nt) { return std::find(one_hot.begin(), one_hot.end(), nt) != one_hot.end(); }))
      return;
    if (high(v) > 1) out.push_back({ViolationKind::OneHotViolation, op, now, one_hot[0], "more than one output high"});
  });
  return out;
}

namespace {

class Environment {
 public:
  Environment(const DrBlock& c, const std::vector<DelaySpec>& delays, const HandshakeOptions& o)
      : c_(c), opt_(o), dr_(c.dual_rail()), spacer_pis_(spacer_inputs(dr_)),
        sim_(c.netlist, delays, spacer_pis_, o.sim) {
    spacer_state_ = sim_.values();
    for (const auto& p : dr_.binding.output_pairs()) outputs_.push_back(p);
  }

  void run(std::size_t index, const std::vector<bool>& operand, HandshakeResult& res) {
    OperandResult r;
    r.index = index;
    const Time t_valid = sim_.now();
    sim_.mark(Phase::Valid, index);
    sim_.apply_inputs(codeword_inputs(dr_, operand));

    // valid phase
    const NetId ack = opt_.mode == HandshakeMode::OracleTimed ? c_.done_raw : c_.done;
    bool ok = true;
    if (ack != kNoNet) {
      ok = run_tracking_outputs([&] { return sim_.value(ack) == Logic::One; }, t_valid, r);
      if (ok) {
        r.done_rise = sim_.now() - t_valid;
        if (!outputs_valid())
          res.violations.push_back({ViolationKind::PrematureInput, index, sim_.now(), ack,
                                    "acknowledge rose before every output was valid"});
      }
    } else {
      ok = run_tracking_outputs([&] { return outputs_valid(); }, t_valid, r);
    }
    if (!ok) {
      res.violations.push_back({ViolationKind::Stall, index, sim_.now(), ack, "outputs never became valid"});
      finish(index, res, r);
      return;
    }
    r.outcome = outcome();

    // spacer phase
    const Time t_spacer = sim_.now();
    sim_.mark(Phase::Spacer, index);
    sim_.apply_inputs(spacer_pis_);
    if (opt_.mode == HandshakeMode::DoneSignalled && c_.done != kNoNet) {
      if (!sim_.run_until(c_.done, Logic::Zero)) {
        res.violations.push_back({ViolationKind::Stall, index, sim_.now(), c_.done, "done never fell"});
        finish(index, res, r);
        return;
      }
      r.done_fall = sim_.now() - t_spacer;
      check_reset(index, res, "done fell");
    } else if (opt_.mode == HandshakeMode::OracleTimed) {
      sim_.advance_to(t_spacer + opt_.grace);
      check_reset(index, res, "grace period ended");
    }
    sim_.run_until_quiet();
    Time last = t_spacer;
    for (NetId nt = 0; nt < c_.netlist.num_nets(); ++nt)
      if (nt != c_.done && sim_.last_change(nt) > last) last = sim_.last_change(nt);
    r.t_cwsp = last - t_spacer;
    if (c_.done != kNoNet && opt_.mode == HandshakeMode::DoneSignalled && r.done_fall < 0)
      r.done_fall = sim_.last_change(c_.done) - t_spacer;
    finish(index, res, r);
  }

 private:
  template <typename Pred>
  bool run_tracking_outputs(Pred&& done, Time t_valid, OperandResult& r) {
    while (!done()) {
      if (!sim_.step()) return false;
      if (r.t_spcw < 0 && outputs_valid()) r.t_spcw = sim_.now() - t_valid;
    }
    if (r.t_spcw < 0 && outputs_valid()) r.t_spcw = sim_.now() - t_valid;
    return true;
  }

  bool outputs_valid() const {
    for (const auto& p : outputs_) {
      const auto s = classify({sim_.value(p.pos), sim_.value(p.neg)}, p.spacer);
      if (s != CodewordState::Zero && s != CodewordState::One) return false;
    }
    if (!c_.one_hot.empty()) {
      int high = 0;
      for (NetId w : c_.one_hot) high += sim_.value(w) == Logic::One;
      if (high != 1) return false;
    }
    return true;
  }

  std::optional<tm::Compare> outcome() const {
    if (c_.one_hot.size() != 3) return std::nullopt;
    return decode_one_hot(sim_.value(c_.one_hot[0]), sim_.value(c_.one_hot[1]), sim_.value(c_.one_hot[2]));
  }

  void check_reset(std::size_t index, HandshakeResult& res, const char* when) {
    for (NetId nt = 0; nt < c_.netlist.num_nets(); ++nt) {
      if (nt == c_.done) continue;
      if (sim_.value(nt) != spacer_state_[nt] || sim_.has_pending(nt)) {
        res.violations.push_back({ViolationKind::MissingReset, index, sim_.now(), nt,
                                  c_.netlist.net_name(nt) + " not at spacer when " + when});
        return;
      }
    }
  }

  void finish(std::size_t, HandshakeResult& res, OperandResult& r) {
    sim_.run_until_quiet();
    if (sim_.trace().changes.size() > 0 || !sim_.trace().marks.empty()) {
      auto add = [&](std::vector<ProtocolViolation> v) {
        res.violations.insert(res.violations.end(), v.begin(), v.end());
      };
      if (opt_.sim.record) {
        add(check_monotonic(sim_.trace()));
        add(check_forbidden(sim_.trace(), dr_.binding));
        add(check_one_hot(sim_.trace(), c_.one_hot));
        if (opt_.keep_traces) res.traces.push_back(sim_.trace());
      }
    }
    sim_.clear_trace();
    res.operands.push_back(r);
  }

  const DrBlock& c_;
  HandshakeOptions opt_;
  DualRail dr_;
  std::vector<Logic> spacer_pis_;
  Simulator sim_;
  std::vector<Logic> spacer_state_;
  std::vector<RailPair> outputs_;
};

}  // namespace

HandshakeResult run_handshake(const DrBlock& circuit, const std::vector<std::vector<bool>>& operands,
                              const std::vector<DelaySpec>& delays, const HandshakeOptions& options) {
  HandshakeResult res;
  Environment env(circuit, delays, options);
  for (std::size_t i = 0; i < operands.size(); ++i) env.run(i, operands[i], res);
  return res;
}

HandshakeResult run_handshake(const DatapathBundle& bundle, const std::vector<std::vector<bool>>& operands,
                              const DelayModel& model, HandshakeMode mode) {
  HandshakeOptions o;
  o.mode = mode;
  // t_int of the circuit under this model, completion-detector gates included
  if (mode == HandshakeMode::OracleTimed)
    o.grace = compute_timing(bundle.circuit.netlist, model, spacer_inputs(bundle.circuit.dual_rail())).t_int;
  return run_handshake(bundle.circuit, operands, resolve_delays(bundle.circuit.netlist, model), o);
}

OperandSampler feature_sampler(const DatapathBundle& b) {
  return [&b](std::mt19937_64& rng) {
    tm::Bits f(b.config.features);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (rng() & 1) != 0;
    return b.operand(f);
  };
}

OperandSampler full_sampler(const DatapathBundle& b) {
  return [&b](std::mt19937_64& rng) {
    std::vector<bool> v(b.config.features + b.config.clauses * b.config.literals());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (rng() & 1) != 0;
    return v;
  };
}

OperandSampler block_sampler(const DrBlock& b) {
  const std::size_t n = b.binding.inputs.size();
  return [n](std::mt19937_64& rng) {
    std::vector<bool> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (rng() & 1) != 0;
    return v;
  };
}

LatencyDistribution summarize(const HandshakeResult& r, Time bin_width) {
  if (bin_width < 1) throw std::invalid_argument("histogram bin width must be >= 1");
  LatencyDistribution d;
  d.violations = r.violations;
  double sum = 0, sum_cwsp = 0;
  for (const auto& o : r.operands) {
    d.t_spcw.push_back(o.t_spcw);
    d.t_cwsp.push_back(o.t_cwsp);
    sum += static_cast<double>(o.t_spcw);
    sum_cwsp += static_cast<double>(o.t_cwsp);
    d.max = std::max(d.max, o.t_spcw);
    d.max_cwsp = std::max(d.max_cwsp, o.t_cwsp);
    ++d.histogram[(o.t_spcw / bin_width) * bin_width];
    if (o.outcome) d.outcomes.push_back(*o.outcome);
  }
  if (!r.operands.empty()) {
    d.mean = sum / static_cast<double>(r.operands.size());
    d.mean_cwsp = sum_cwsp / static_cast<double>(r.operands.size());
  }
  return d;
}

LatencyDistribution measure_latency_distribution(const DatapathBundle& bundle, const OperandSampler& sampler,
                                                 std::size_t n, std::uint64_t seed, const DelayModel& model,
                                                 HandshakeMode mode, Time bin_width) {
  if (n < 1) throw std::invalid_argument("measure_latency_distribution: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<bool>> ops;
  ops.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ops.push_back(sampler(rng));
  return summarize(run_handshake(bundle, ops, model, mode), bin_width);
}

namespace {

std::string vcd_id(std::size_t i) {
  std::string s;
  do {
    s.push_back(static_cast<char>('!' + i % 94));
    i /= 94;
  } while (i > 0);
  return s;
}

std::string vcd_name(const Netlist& n, NetId id) {
  std::string s = n.net_name(id);
  if (s.empty()) s = "n" + std::to_string(id);
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') ch = '_';
  return s;
}

}  // namespace

void write_vcd(std::ostream& os, const Netlist& n, const Trace& t) {
  os << "$timescale 1ps $end\n$scope module top $end\n";
  for (NetId i = 0; i < n.num_nets(); ++i) os << "$var wire 1 " << vcd_id(i) << ' ' << vcd_name(n, i) << " $end\n";
  os << "$upscope $end\n$enddefinitions $end\n#0\n$dumpvars\n";
  for (NetId i = 0; i < n.num_nets(); ++i) os << to_char(t.initial[i]) << vcd_id(i) << '\n';
  os << "$end\n";
  Time cur = -1;
  for (const auto& c : t.changes) {
    if (c.time != cur) {
      cur = c.time;
      os << '#' << cur << '\n';
    }
    os << to_char(c.value) << vcd_id(c.net) << '\n';
  }
}

void write_measurements_csv(std::ostream& os, const std::vector<OperandResult>& rows) {
  os << "operand_index,t_spcw_ps,t_cwsp_ps,done_rise_ps,done_fall_ps,outcome\n";
  for (const auto& r : rows)
    os << r.index << ',' << r.t_spcw << ',' << r.t_cwsp << ',' << r.done_rise << ',' << r.done_fall << ','
       << (r.outcome ? tm::to_string(*r.outcome) : std::string_view("NONE")) << '\n';
}

}  // namespace selftimed
