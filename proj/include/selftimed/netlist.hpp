#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace selftimed {

using NetId = std::uint32_t;
using GateId = std::uint32_t;
using Time = std::int64_t;

inline constexpr NetId kNoNet = static_cast<NetId>(-1);

enum class GateKind : std::uint8_t {
  Inv,
  Buf,
  And2,
  And3,
  And4,
  Or2,
  Or3,
  Or4,
  Nand2,
  Nand3,
  Nand4,
  Nor2,
  Nor3,
  Nor4,
  Aoi21,
  Aoi22,
  Oai21,
  Oai22,
  Ao21,
  Ao22,
  Oa21,
  Oa22,
  C2,
  Xor2,
  Xnor2,
  Delay,
};

enum class Unateness : std::uint8_t { Positive, Negative, Non };

enum class Logic : std::uint8_t { Zero = 0, One = 1, X = 2 };

inline constexpr Logic to_logic(bool b) { return b ? Logic::One : Logic::Zero; }
inline constexpr Logic operator!(Logic v) {
  return v == Logic::X ? Logic::X : (v == Logic::One ? Logic::Zero : Logic::One);
}
char to_char(Logic v);

std::size_t arity(GateKind kind);
Unateness unateness(GateKind kind);
/// Negative-unate gates count as one inversion on every path through them.
bool is_inverting(GateKind kind);
/// C2 and DELAY hold state (or time) and are excluded from the combinational core.
bool is_sequential(GateKind kind);
std::string_view kind_name(GateKind kind);
std::optional<GateKind> kind_from_name(std::string_view name);
/// Kind with the output complemented (AND2 <-> NAND2, AO21 <-> AOI21, ...).
std::optional<GateKind> complement_kind(GateKind kind);
GateKind and_kind(std::size_t fan_in);
GateKind or_kind(std::size_t fan_in);

/// Combinational output of a gate; C2 needs the held state.
Logic eval_gate(GateKind kind, std::span<const Logic> in, Logic state = Logic::Zero);

struct DelaySpec {
  Time rise = 0;
  Time fall = 0;
  bool operator==(const DelaySpec&) const = default;
};

struct Gate {
  GateKind kind = GateKind::Buf;
  std::vector<NetId> inputs;
  NetId output = kNoNet;
  std::optional<DelaySpec> delay;  // DELAY gates carry their own rise/fall
  bool operator==(const Gate&) const = default;
};

struct NetlistSpec {
  std::vector<std::string> net_names;  // index = net id; empty name allowed
  std::vector<Gate> gates;             // index = gate id
  std::vector<NetId> pis;
  std::vector<NetId> pos;
  std::map<std::string, std::string> meta;

  NetId add_net(std::string name = {});
  GateId add_gate(GateKind kind, std::vector<NetId> inputs, NetId output,
                  std::optional<DelaySpec> delay = std::nullopt);
  /// Adds a fresh output net and a gate driving it.
  NetId emit(GateKind kind, std::vector<NetId> inputs, std::string name = {});

  bool operator==(const NetlistSpec&) const = default;
};

enum class NetlistErrorKind {
  MultipleDrivers,
  FloatingNet,
  ArityMismatch,
  CombinationalCycle,
  UnknownNet,
  Oscillation,
  Parse,
};

class NetlistError : public std::runtime_error {
 public:
  NetlistError(NetlistErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  NetlistErrorKind kind() const { return kind_; }

 private:
  NetlistErrorKind kind_;
};

/// Validated, immutable gate graph.
class Netlist {
 public:
  static Netlist build(NetlistSpec spec);

  const NetlistSpec& spec() const { return spec_; }
  std::size_t num_nets() const { return spec_.net_names.size(); }
  std::size_t num_gates() const { return spec_.gates.size(); }
  const Gate& gate(GateId g) const { return spec_.gates[g]; }
  const std::vector<Gate>& gates() const { return spec_.gates; }
  const std::vector<NetId>& pis() const { return spec_.pis; }
  const std::vector<NetId>& pos() const { return spec_.pos; }
  const std::map<std::string, std::string>& meta() const { return spec_.meta; }
  std::string net_name(NetId n) const;
  std::optional<NetId> find_net(std::string_view name) const;

  /// Driving gate, or nullopt for primary inputs.
  std::optional<GateId> driver(NetId n) const;
  bool is_pi(NetId n) const { return pi_index_[n] >= 0; }
  bool is_po(NetId n) const { return po_flag_[n]; }
  int pi_index(NetId n) const { return pi_index_[n]; }
  const std::vector<GateId>& fanout(NetId n) const { return fanout_[n]; }
  /// All gates; combinational gates in dependency order, sequential ones first.
  const std::vector<GateId>& topo_order() const { return topo_; }
  /// Position of each gate in topo_order().
  std::size_t topo_index(GateId g) const { return topo_index_[g]; }

  bool operator==(const Netlist& o) const { return spec_ == o.spec_; }

 private:
  NetlistSpec spec_;
  std::vector<std::int64_t> driver_;  // -1 = PI
  std::vector<int> pi_index_;
  std::vector<bool> po_flag_;
  std::vector<std::vector<GateId>> fanout_;
  std::vector<GateId> topo_;
  std::vector<std::size_t> topo_index_;
};

struct EvalResult {
  std::vector<Logic> nets;
  std::vector<Logic> pos;
};

/// Fixed-point zero-delay evaluation. Throws NetlistError(Oscillation) after
/// 2 * gates + 4 sweeps without convergence.
EvalResult eval_zero_delay(const Netlist& n, std::span<const Logic> pi_values,
                           Logic c2_initial = Logic::Zero);

struct UnateViolation {
  GateId gate;
  GateKind kind;
};
std::vector<UnateViolation> check_unate_only(const Netlist& n);

/// Copies `src` into `dst`, binding src PIs to `pi_nets`. Returns the dst net
/// of every src net. Net names are prefixed.
std::vector<NetId> instantiate(NetlistSpec& dst, const Netlist& src,
                               std::span<const NetId> pi_nets, const std::string& prefix,
                               std::vector<GateId>* added_gates = nullptr);

struct CompactMap {
  std::vector<NetId> nets;    // old -> new, kNoNet if removed
  std::vector<GateId> gates;  // old -> new, kNoGate if removed
};
inline constexpr GateId kNoGate = static_cast<GateId>(-1);

/// Removes gates whose output is kNoNet and nets that are no longer driven or
/// referenced, then renumbers densely.
CompactMap compact(NetlistSpec& spec);

nlohmann::json to_json(const Netlist& n);
/// `extra_sections` are top-level keys the caller handles itself.
Netlist netlist_from_json(const nlohmann::json& j,
                          std::span<const std::string_view> extra_sections = {});
std::string serialize(const Netlist& n);
Netlist parse_netlist(std::string_view text);

}  // namespace selftimed
