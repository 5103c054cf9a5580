#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "selftimed/netlist.hpp"

namespace selftimed {

enum class SpacerPolarity : std::uint8_t { AllZero, AllOne };

inline SpacerPolarity flip(SpacerPolarity p) {
  return p == SpacerPolarity::AllZero ? SpacerPolarity::AllOne : SpacerPolarity::AllZero;
}
inline Logic spacer_value(SpacerPolarity p) {
  return p == SpacerPolarity::AllZero ? Logic::Zero : Logic::One;
}
std::string_view polarity_name(SpacerPolarity p);  // "ALL0" / "ALL1"
std::optional<SpacerPolarity> polarity_from_name(std::string_view s);

struct Codeword {
  Logic pos;
  Logic neg;
  bool operator==(const Codeword&) const = default;
};

/// Logical 1 -> {1,0}, logical 0 -> {0,1}, independent of spacer polarity.
inline Codeword encode(bool value) {
  return value ? Codeword{Logic::One, Logic::Zero} : Codeword{Logic::Zero, Logic::One};
}
inline Codeword spacer_codeword(SpacerPolarity p) {
  return {spacer_value(p), spacer_value(p)};
}
inline Codeword forbidden_codeword(SpacerPolarity p) { return spacer_codeword(flip(p)); }

enum class CodewordState : std::uint8_t { Spacer, Zero, One, Forbidden, Unknown };
CodewordState classify(Codeword c, SpacerPolarity p);

struct RailPair {
  std::string signal;
  NetId pos = kNoNet;
  NetId neg = kNoNet;
  SpacerPolarity spacer = SpacerPolarity::AllZero;
};

struct DualRailBinding {
  std::vector<RailPair> pairs;
  std::vector<std::string> inputs;   // logical PIs, in netlist PI order (pos, neg per signal)
  std::vector<std::string> outputs;  // logical POs, in netlist PO order (pos, neg per signal)
  /// Whether block outputs carry the opposite spacer of block inputs.
  bool inverting_spacer = false;

  const RailPair* find(std::string_view signal) const;
  RailPair* find(std::string_view signal);
  /// Pair owning `net` as either rail.
  const RailPair* owner(NetId net) const;
  std::vector<RailPair> input_pairs() const;
  std::vector<RailPair> output_pairs() const;
};

nlohmann::json to_json(const DualRailBinding& b);
DualRailBinding binding_from_json(const nlohmann::json& j);

struct DualRail {
  Netlist netlist;
  DualRailBinding binding;
};

enum class MappingErrorKind { NonUnateGate, SequentialGate, UnknownSignal, UnresolvableConflict };

class MappingError : public std::runtime_error {
 public:
  MappingError(MappingErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  MappingErrorKind kind() const { return kind_; }

 private:
  MappingErrorKind kind_;
};

/// Every single-rail gate becomes a positive/negative rail gate pair; inverters
/// become rail swaps. Rails are named `<signal>__p` / `<signal>__n`.
DualRail direct_map(const Netlist& single_rail,
                    SpacerPolarity pi_polarity = SpacerPolarity::AllZero);

/// Peephole pass to convergence: gate + single-fanout INV collapses into the
/// complemented gate, and NOR2/NAND2 over single-fanout AND2/OR2 fuse into
/// AOI/OAI cells. Never adds gates.
DualRail negative_gate_optimize(const DualRail& in);

struct ParityConflict {
  NetId net = kNoNet;
  GateId gate = kNoGate;
  std::string message;
};

struct SpacerAnalysis {
  std::vector<Logic> net_spacer;  // spacer value each net settles to
  std::optional<ParityConflict> conflict;
  bool ok() const { return !conflict.has_value(); }
};

/// Forward-propagates spacer values from the inputs. Reports the first gate
/// (in dependency order) whose inputs carry mixed spacers, or the first bound
/// pair whose rails disagree. With no explicit polarities the binding's input
/// polarities are used.
SpacerAnalysis compute_spacer_polarity(const DualRail& dr,
                                       std::span<const SpacerPolarity> pi_polarity = {});

/// Writes the analysed polarities back into the binding. Requires an ok() analysis.
void apply_polarity(DualRail& dr, const SpacerAnalysis& a);

/// Two INVs plus a rail swap: same logical value, opposite spacer. With an
/// empty `consumers` every reader (and PO) of the signal is moved to the new
/// rails; otherwise only the listed gates are, and the converted copy is bound
/// as a new signal. Returns the new signal name.
std::string insert_spacer_inverter(DualRail& dr, const std::string& signal,
                                   std::span<const GateId> consumers = {},
                                   std::vector<GateId>* added = nullptr);

/// Repeats compute_spacer_polarity / insert_spacer_inverter until no conflict
/// remains. Returns the number of spacer inverters inserted.
std::size_t resolve_spacer_conflicts(DualRail& dr, std::size_t max_inserts = 10000);

/// Distinct counts of inverting gates over all PI->PO paths.
std::set<int> path_inversion_counts(const Netlist& n);

/// Evaluates logical inputs through the dual-rail netlist and decodes the
/// logical outputs. Throws if an output is not a valid codeword.
std::vector<bool> eval_dual_rail(const DualRail& dr, const std::vector<bool>& inputs);

/// PI values placing every input at its spacer.
std::vector<Logic> spacer_inputs(const DualRail& dr);
/// PI values for a logical input vector.
std::vector<Logic> codeword_inputs(const DualRail& dr, const std::vector<bool>& inputs);

}  // namespace selftimed
