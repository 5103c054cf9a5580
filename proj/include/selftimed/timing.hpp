#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "selftimed/delay.hpp"
#include "selftimed/netlist.hpp"

namespace selftimed {

class TimingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduced completion-detection timing. v->s quantities follow each net toward
/// its spacer value, so ALL1-spacer nets use rise delays for their reset.
struct TimingReport {
  Time t_io = 0;          // longest PI->PO valid->spacer path
  Time t_int = 0;         // longest valid->spacer path to any net, false paths included
  Time t_d = 0;           // t_int - t_io, floored at 0
  Time t_reset_min = 0;   // shortest PI->PO valid->spacer path: earliest possible PO reset
  Time t_d_required = 0;  // max(t_d, t_int - t_reset_min)
  double margin = 1.1;
  Time t_d_applied = 0;   // ceil(t_d_required * margin): the fall delay built into done
  Time t_done_fall = 0;   // t_io + t_d_applied
  Time max_t_spcw = 0;    // longest PI->PO spacer->valid path
  std::vector<GateId> io_path;
  std::vector<GateId> int_path;
  std::vector<GateId> spcw_path;
};

/// Topological path analysis. Gates downstream of a DELAY gate (the
/// completion detector's own delay element) are left out. `pi_spacer` gives
/// each PI's spacer value; empty means all zero. A jitter range in the model
/// is treated as corners: long paths at its maximum, the shortest reset path
/// at its minimum.
TimingReport compute_timing(const Netlist& n, const DelayModel& m,
                            std::span<const Logic> pi_spacer = {}, double margin = 1.1);

nlohmann::json to_json(const TimingReport& r);

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Supply voltage -> gate delay multiplier, log-linear between points.
class VddTable {
 public:
  VddTable() = default;
  explicit VddTable(std::vector<std::pair<double, double>> points);

  /// Placeholder shape with an exponential tail below 0.6 V; not measured data.
  static VddTable default_table();

  double multiplier(double vdd) const;
  double nominal_vdd() const { return points_.front().first; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;  // descending vdd
};

nlohmann::json to_json(const VddTable& t);
VddTable vdd_table_from_json(const nlohmann::json& j);
/// Rows of "vdd,multiplier"; a non-numeric first row is taken as a header.
VddTable vdd_table_from_csv(const std::string& text);
VddTable load_vdd_table(const std::string& path);

DelayModel scale_delay_model(const DelayModel& m, double vdd, const VddTable& table);

}  // namespace selftimed
