#pragma once

#include <map>
#include <string>
#include <vector>

#include "selftimed/delay.hpp"
#include "selftimed/dualrail.hpp"
#include "selftimed/timing.hpp"
#include "selftimed/tm.hpp"

namespace selftimed {

/// A dual-rail circuit with block labels, optional 1-of-3 outputs and, once a
/// completion detector is attached, its done wires.
struct DrBlock {
  Netlist netlist;
  DualRailBinding binding;
  std::vector<std::string> block_map;  // label per gate id
  std::vector<NetId> one_hot;          // greater, equal, less
  NetId done_raw = kNoNet;
  NetId done = kNoNet;

  DualRail dual_rail() const { return {netlist, binding}; }
  /// Gate count per label.
  std::map<std::string, std::size_t> block_gate_counts() const;
  /// Number of distinct labels matching `<prefix><digits>` (e.g. "ha_", "pos.ha_").
  std::size_t count_blocks(const std::string& prefix) const;
};

enum class DatapathErrorKind { UnknownPolarity, Structure };

class DatapathError : public std::runtime_error {
 public:
  DatapathError(DatapathErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  DatapathErrorKind kind() const { return kind_; }

 private:
  DatapathErrorKind kind_;
};

/// Single-rail clause: OR masks over (e, literal), AND tree of fan-in <= 4.
/// PIs f0..f{F-1}, e0..e{2F-1}; PO clause. !f comes from an INV that the
/// dual-rail mapping turns into a rail swap.
Netlist build_clause_block(std::size_t features);

/// build_clause_block mapped to dual rail, with a spacer inverter on the
/// output absorbed by negative-gate optimisation: one inversion on every path.
DrBlock build_clause_dr(std::size_t features);

/// Inputs a, b; outputs s, c; both ALL0. Two complex and two simple gates.
DrBlock build_half_adder_dr();
/// Inputs a, b (ALL0) and cin (ALL1); outputs s (ALL0) and cout (ALL1).
DrBlock build_full_adder_dr();

/// Eight-input count from nine half adders, two full adders and two OR
/// blocks, with spacer inverters between ha_8/fa_0 and fa_1/y3.
DrBlock build_popcount8(SpacerPolarity input_polarity = SpacerPolarity::AllZero);
/// Column-compression adder tree for any n; outputs are always ALL0. ALL1
/// inputs are taken by a first layer of complementary-spacer half adders.
DrBlock build_popcount(std::size_t n, SpacerPolarity input_polarity = SpacerPolarity::AllZero);
std::size_t popcount_width(std::size_t n);

/// MSB-first request-chain comparator with 1-of-3 output. Inputs a0..a{w-1},
/// b0..b{w-1} (ALL0); POs greater, equal, less.
DrBlock build_comparator(std::size_t width);

/// Appends validity detection for every output pair and the 1-of-3 group,
/// an AND tree to done_raw and a DELAY (rise 0, fall t_d) to done. done is
/// added as the last PO.
void attach_completion_detector(DrBlock& block, Time t_d);

struct DatapathBundle {
  tm::TmConfig config;
  DrBlock circuit;
  TimingReport timing;  // datapath before the completion detector
  std::size_t comparator_width = 0;

  /// Logical PI vector: f[0..F-1], then exclude[j][0..2F-1] for each clause.
  std::vector<bool> operand(const tm::Bits& features) const;
  std::vector<bool> operand(const tm::Bits& features, const std::vector<tm::Bits>& exclude) const;
  /// Inverse of operand().
  std::pair<tm::Bits, std::vector<tm::Bits>> split(const std::vector<bool>& operand) const;
  /// Reference outcome for an operand.
  tm::Compare golden(const std::vector<bool>& operand) const;
};

/// Clause blocks -> positive/negative popcounts -> comparator -> completion
/// detector. The exclude bits in `config` only serve as the default operand;
/// they are circuit inputs.
DatapathBundle build_inference_datapath(const tm::TmConfig& config,
                                        const DelayModel& delays = DelayModel::nominal(),
                                        double td_margin = 1.1);

/// Zero-delay outcome of the 1-of-3 outputs for one logical operand.
tm::Compare eval_outcome(const DrBlock& block, const std::vector<bool>& operand);
std::optional<tm::Compare> decode_one_hot(Logic greater, Logic equal, Logic less);

nlohmann::json to_json(const DatapathBundle& b);
DatapathBundle bundle_from_json(const nlohmann::json& j);

}  // namespace selftimed
