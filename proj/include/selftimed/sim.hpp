#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "selftimed/datapath.hpp"
#include "selftimed/delay.hpp"
#include "selftimed/netlist.hpp"

namespace selftimed {

class EventExplosion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Change {
  Time time;
  NetId net;
  Logic value;
};

enum class Phase { Valid, Spacer };

struct PhaseMark {
  std::size_t change_index;  // first change that belongs to the new phase
  Time time;
  Phase phase;
  std::size_t operand;
};

/// Value changes in global (time, driver) order plus phase markers.
struct Trace {
  std::vector<Logic> initial;
  std::vector<Change> changes;
  std::vector<PhaseMark> marks;

  /// Transitions of one net, in time order.
  std::vector<std::pair<Time, Logic>> transitions(NetId net) const;
};

struct SimOptions {
  std::size_t max_events = 0;  // per trace segment; 0: 2000 per gate plus slack
  bool record = true;
};

/// Transport-delay event simulator. The state starts settled under
/// `initial_pis`. Events at equal times apply together, ordered by driving
/// gate id with primary inputs first.
class Simulator {
 public:
  Simulator(const Netlist& n, std::vector<DelaySpec> delays, std::span<const Logic> initial_pis,
            SimOptions options = {});

  /// Schedules PI changes at now().
  void apply_inputs(std::span<const Logic> pis);
  void apply_input(std::size_t pi_index, Logic v);

  /// Processes the next batch of simultaneous events. False when idle.
  bool step();
  void run_until_quiet();
  /// Runs until `net` holds `v`; false if the simulator goes idle first.
  bool run_until(NetId net, Logic v);
  /// Processes every event strictly before `t`, then moves now() to `t`.
  void advance_to(Time t);

  Time now() const { return now_; }
  bool quiet() const { return queue_.empty(); }
  bool has_pending(NetId n) const { return !pending_[n].empty(); }
  Logic value(NetId n) const { return values_[n]; }
  const std::vector<Logic>& values() const { return values_; }
  std::size_t event_count() const { return events_; }
  /// Time of the most recent change on each net.
  Time last_change(NetId n) const { return last_change_[n]; }

  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }
  /// Drops recorded changes and resets the event budget; the current values
  /// become the new initial state.
  void clear_trace();
  void mark(Phase p, std::size_t operand);

 private:
  struct Pending {
    Time time;
    Logic value;
    std::uint64_t id;
  };
  struct QueueEntry {
    Time time;
    std::uint64_t order;  // driver gate id + 1; 0 for PIs
    NetId net;
    std::uint64_t id;
    bool operator>(const QueueEntry& o) const {
      if (time != o.time) return time > o.time;
      if (order != o.order) return order > o.order;
      return id > o.id;
    }
  };

  void schedule(NetId net, Time at, Logic v, std::uint64_t order);
  void evaluate(GateId g);

  const Netlist* n_;
  std::vector<DelaySpec> delays_;
  SimOptions opt_;
  std::vector<Logic> values_;
  std::vector<Time> last_change_;
  std::vector<std::vector<Pending>> pending_;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue_;
  std::uint64_t next_id_ = 0;
  std::size_t events_ = 0;
  std::size_t budget_used_ = 0;
  Time now_ = 0;
  Trace trace_;
  std::vector<GateId> dirty_;
  std::vector<bool> dirty_flag_;
};

struct Stimulus {
  Time time;
  std::vector<Logic> pis;
};

/// Runs a stimulus schedule from the state settled under the first entry.
Trace simulate(const Netlist& n, const DelayModel& m, const std::vector<Stimulus>& schedule,
               SimOptions options = {});

enum class ViolationKind { NonMonotonic, ForbiddenState, PrematureInput, MissingReset, OneHotViolation, Stall };
std::string_view to_string(ViolationKind k);

struct ProtocolViolation {
  ViolationKind kind;
  std::size_t operand = 0;
  Time time = 0;
  NetId net = kNoNet;
  std::string detail;
};

/// Per cycle, a net may leave its spacer value once before the spacer is
/// applied and return once; anything else is non-monotonic.
std::vector<ProtocolViolation> check_monotonic(const Trace& t);
std::vector<ProtocolViolation> check_forbidden(const Trace& t, const DualRailBinding& b);
std::vector<ProtocolViolation> check_one_hot(const Trace& t, std::span<const NetId> one_hot);

enum class HandshakeMode { DoneSignalled, OracleTimed };

struct OperandResult {
  std::size_t index = 0;
  Time t_spcw = -1;      // valid applied -> every output valid
  Time t_cwsp = -1;      // spacer applied -> last net (other than done) at spacer
  Time done_rise = -1;   // relative to valid applied
  Time done_fall = -1;   // relative to spacer applied
  std::optional<tm::Compare> outcome;
};

struct HandshakeOptions {
  HandshakeMode mode = HandshakeMode::DoneSignalled;
  Time grace = 0;  // spacer wait in OracleTimed mode
  bool keep_traces = false;
  SimOptions sim;
};

struct HandshakeResult {
  std::vector<OperandResult> operands;
  std::vector<ProtocolViolation> violations;
  std::vector<Trace> traces;  // one per operand when keep_traces is set
};

/// Four-phase environment. Blocks without a done wire are observed
/// directly: the valid phase ends when all outputs are codewords and the
/// spacer phase when the circuit is idle.
HandshakeResult run_handshake(const DrBlock& circuit, const std::vector<std::vector<bool>>& operands,
                              const std::vector<DelaySpec>& delays, const HandshakeOptions& options);
/// OracleTimed waits t_int of the whole circuit (done excluded) under `model`.
HandshakeResult run_handshake(const DatapathBundle& bundle, const std::vector<std::vector<bool>>& operands,
                              const DelayModel& model, HandshakeMode mode);

using OperandSampler = std::function<std::vector<bool>(std::mt19937_64&)>;
/// Random features; exclude matrix fixed to the bundle's configuration.
OperandSampler feature_sampler(const DatapathBundle& b);
/// Random features and random exclude bits.
OperandSampler full_sampler(const DatapathBundle& b);
/// Uniform random logical vector over a block's inputs.
OperandSampler block_sampler(const DrBlock& b);

struct LatencyDistribution {
  std::vector<Time> t_spcw;
  std::vector<Time> t_cwsp;
  double mean = 0;
  Time max = 0;
  double mean_cwsp = 0;
  Time max_cwsp = 0;
  std::map<Time, std::size_t> histogram;  // bin start -> count
  std::vector<tm::Compare> outcomes;
  std::vector<ProtocolViolation> violations;
};

LatencyDistribution measure_latency_distribution(const DatapathBundle& bundle, const OperandSampler& sampler,
                                                 std::size_t n, std::uint64_t seed, const DelayModel& model,
                                                 HandshakeMode mode = HandshakeMode::DoneSignalled,
                                                 Time bin_width = 10);
LatencyDistribution summarize(const HandshakeResult& r, Time bin_width = 10);

void write_vcd(std::ostream& os, const Netlist& n, const Trace& t);
void write_measurements_csv(std::ostream& os, const std::vector<OperandResult>& rows);

}  // namespace selftimed
