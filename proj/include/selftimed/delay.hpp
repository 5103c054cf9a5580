#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "selftimed/netlist.hpp"

namespace selftimed {

struct Jitter {
  double min = 1.0;
  double max = 1.0;
  std::uint64_t seed = 0;
};

/// Gate delays in integer picoseconds. DELAY gates keep the rise/fall stored
/// on the gate itself and are never jittered.
struct DelayModel {
  std::map<GateKind, DelaySpec> defaults;
  std::map<GateId, DelaySpec> overrides;
  std::optional<Jitter> jitter;
  double vdd_multiplier = 1.0;

  /// INV/BUF 10, 2-input 15, wider and complex 25, C2 30.
  static DelayModel nominal();
  DelaySpec base(const Netlist& n, GateId g) const;
};

/// Per-gate delays after jitter and voltage scaling; always >= 1 except DELAY gates.
std::vector<DelaySpec> resolve_delays(const Netlist& n, const DelayModel& m);
/// Every gate at the slow (max) or fast (min) end of the jitter range.
std::vector<DelaySpec> corner_delays(const Netlist& n, const DelayModel& m, bool slow);

nlohmann::json to_json(const DelayModel& m);
DelayModel delay_model_from_json(const nlohmann::json& j);
DelayModel load_delay_model(const std::string& path);

}  // namespace selftimed
