#include "selftimed/timing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace selftimed {

namespace {

struct Arrival {
  std::vector<Time> time;
  std::vector<GateId> via;  // gate that set the arrival, kNoGate for PIs
};

std::vector<GateId> trace_back(const Netlist& n, const Arrival& a, NetId end) {
  std::vector<GateId> path;
  NetId net = end;
  while (a.via[net] != kNoGate) {
    const GateId g = a.via[net];
    path.push_back(g);
    const Gate& gate = n.gate(g);
    NetId best = gate.inputs[0];
    for (NetId in : gate.inputs)
      if (a.time[in] > a.time[best]) best = in;
    net = best;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

TimingReport compute_timing(const Netlist& n, const DelayModel& m, std::span<const Logic> pi_spacer,
                            double margin) {
  const std::size_t ng = n.num_gates();
  std::vector<Logic> pis(n.pis().size(), Logic::Zero);
  if (!pi_spacer.empty()) {
    if (pi_spacer.size() != pis.size()) throw std::invalid_argument("compute_timing: PI spacer count mismatch");
    pis.assign(pi_spacer.begin(), pi_spacer.end());
  }
  const auto spacer = eval_zero_delay(n, pis).nets;
  const auto delays = corner_delays(n, m, true);
  const auto fast = corner_delays(n, m, false);

  // Everything fed by a DELAY gate belongs to the done path and is skipped.
  std::vector<bool> excluded_gate(ng, false), excluded_net(n.num_nets(), false);
  for (GateId g : n.topo_order()) {
    const Gate& gate = n.gate(g);
    bool ex = gate.kind == GateKind::Delay;
    for (NetId in : gate.inputs) ex = ex || excluded_net[in];
    if (ex) {
      excluded_gate[g] = true;
      excluded_net[gate.output] = true;
    }
  }
  // Second sweep: sequential gates sit first in topo order, so propagate again.
  for (bool again = true; again;) {
    again = false;
    for (GateId g = 0; g < ng; ++g) {
      if (excluded_gate[g]) continue;
      for (NetId in : n.gate(g).inputs)
        if (excluded_net[in]) {
          excluded_gate[g] = true;
          excluded_net[n.gate(g).output] = true;
          again = true;
          break;
        }
    }
  }

  // Kahn over the analysed gates, C2 included.
  std::vector<std::size_t> pending(ng, 0);
  for (GateId g = 0; g < ng; ++g) {
    if (excluded_gate[g]) continue;
    for (NetId in : n.gate(g).inputs)
      if (n.driver(in)) ++pending[g];
  }
  std::deque<GateId> ready;
  for (GateId g = 0; g < ng; ++g)
    if (!excluded_gate[g] && pending[g] == 0) ready.push_back(g);
  std::vector<GateId> order;
  while (!ready.empty()) {
    const GateId g = ready.front();
    ready.pop_front();
    order.push_back(g);
    for (GateId s : n.fanout(n.gate(g).output)) {
      if (excluded_gate[s]) continue;
      const auto uses = static_cast<std::size_t>(
          std::count(n.gate(s).inputs.begin(), n.gate(s).inputs.end(), n.gate(g).output));
      if ((pending[s] -= uses) == 0) ready.push_back(s);
    }
  }
  const auto analysed = static_cast<std::size_t>(std::count(excluded_gate.begin(), excluded_gate.end(), false));
  if (order.size() != analysed) throw TimingError("combinational cycle reaches the timing analyser");

  Arrival vs{std::vector<Time>(n.num_nets(), 0), std::vector<GateId>(n.num_nets(), kNoGate)};
  Arrival sv = vs;
  std::vector<Time> early(n.num_nets(), 0);  // shortest v->s arrival
  for (GateId g : order) {
    const Gate& gate = n.gate(g);
    const NetId out = gate.output;
    const bool resets_high = spacer[out] == Logic::One;
    const Time d_vs = resets_high ? delays[g].rise : delays[g].fall;
    const Time d_sv = resets_high ? delays[g].fall : delays[g].rise;
    Time a_vs = 0, a_sv = 0, a_early = std::numeric_limits<Time>::max();
    for (NetId in : gate.inputs) {
      a_vs = std::max(a_vs, vs.time[in]);
      a_sv = std::max(a_sv, sv.time[in]);
      a_early = std::min(a_early, early[in]);
    }
    early[out] = a_early + (resets_high ? fast[g].rise : fast[g].fall);
    vs.time[out] = a_vs + d_vs;
    vs.via[out] = g;
    sv.time[out] = a_sv + d_sv;
    sv.via[out] = g;
  }

  TimingReport r;
  r.margin = margin;
  NetId io_end = kNoNet, int_end = kNoNet, sv_end = kNoNet;
  for (NetId po : n.pos()) {
    if (excluded_net[po]) continue;
    if (io_end == kNoNet || early[po] < r.t_reset_min) r.t_reset_min = early[po];
    if (io_end == kNoNet || vs.time[po] > r.t_io) {
      r.t_io = vs.time[po];
      io_end = po;
    }
    if (sv_end == kNoNet || sv.time[po] > r.max_t_spcw) {
      r.max_t_spcw = sv.time[po];
      sv_end = po;
    }
  }
  for (NetId net = 0; net < n.num_nets(); ++net) {
    if (excluded_net[net]) continue;
    if (int_end == kNoNet || vs.time[net] > r.t_int) {
      r.t_int = vs.time[net];
      int_end = net;
    }
  }
  r.t_d = std::max<Time>(0, r.t_int - r.t_io);
  r.t_d_required = std::max<Time>(r.t_d, r.t_int - r.t_reset_min);
  r.t_d_applied = static_cast<Time>(std::ceil(static_cast<double>(r.t_d_required) * margin - 1e-9));
  r.t_done_fall = r.t_io + r.t_d_applied;
  if (io_end != kNoNet) r.io_path = trace_back(n, vs, io_end);
  if (int_end != kNoNet) r.int_path = trace_back(n, vs, int_end);
  if (sv_end != kNoNet) r.spcw_path = trace_back(n, sv, sv_end);
  return r;
}

nlohmann::json to_json(const TimingReport& r) {
  return {{"t_io_ps", r.t_io},         {"t_int_ps", r.t_int},
          {"t_d_ps", r.t_d},           {"t_reset_min_ps", r.t_reset_min},
          {"t_d_required_ps", r.t_d_required}, {"margin", r.margin},
          {"t_d_applied_ps", r.t_d_applied}, {"t_done_fall_ps", r.t_done_fall},
          {"max_t_spcw_ps", r.max_t_spcw}, {"io_path", r.io_path},
          {"int_path", r.int_path},    {"spcw_path", r.spcw_path}};
}

VddTable::VddTable(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("VddTable needs at least one point");
  std::sort(points_.begin(), points_.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].second < 1.0) throw std::invalid_argument("VddTable multipliers must be >= 1");
    if (i > 0 && points_[i].first == points_[i - 1].first)
      throw std::invalid_argument("VddTable has duplicate voltages");
    if (i > 0 && points_[i].second < points_[i - 1].second)
      throw std::invalid_argument("VddTable multipliers must not increase with voltage");
  }
  if (points_.front().second != 1.0) throw std::invalid_argument("VddTable multiplier at nominal vdd must be 1");
}

VddTable VddTable::default_table() {
  return VddTable({{1.2, 1.0}, {0.9, 1.5}, {0.6, 4.0}, {0.4, 60.0}, {0.25, 3000.0}});
}

double VddTable::multiplier(double vdd) const {
  constexpr double eps = 1e-9;
  if (vdd > points_.front().first + eps || vdd < points_.back().first - eps)
    throw OutOfRange("vdd " + std::to_string(vdd) + " V is outside the table range");
  for (const auto& [v, k] : points_)
    if (std::abs(v - vdd) <= eps) return k;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto [hi_v, hi_k] = points_[i - 1];
    const auto [lo_v, lo_k] = points_[i];
    if (vdd <= hi_v && vdd >= lo_v) {
      const double t = (hi_v - vdd) / (hi_v - lo_v);
      return std::exp(std::log(hi_k) + t * (std::log(lo_k) - std::log(hi_k)));
    }
  }
  throw OutOfRange("vdd outside table");
}

nlohmann::json to_json(const VddTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [v, k] : t.points()) rows.push_back({{"vdd", v}, {"multiplier", k}});
  return {{"points", rows}, {"interpolation", "log-linear"}};
}

VddTable vdd_table_from_json(const nlohmann::json& j) {
  std::vector<std::pair<double, double>> pts;
  const auto& rows = j.is_array() ? j : j.at("points");
  for (const auto& r : rows) pts.emplace_back(r.at("vdd").get<double>(), r.at("multiplier").get<double>());
  return VddTable(std::move(pts));
}

VddTable vdd_table_from_csv(const std::string& text) {
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("VddTable CSV row lacks a comma: " + line);
    try {
      pts.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::invalid_argument&) {
      if (!first) throw std::invalid_argument("VddTable CSV: bad row '" + line + "'");
    }
    first = false;
  }
  return VddTable(std::move(pts));
}

VddTable load_vdd_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b != std::string::npos && (text[b] == '{' || text[b] == '['))
    return vdd_table_from_json(nlohmann::json::parse(text));
  return vdd_table_from_csv(text);
}

DelayModel scale_delay_model(const DelayModel& m, double vdd, const VddTable& table) {
  DelayModel out = m;
  out.vdd_multiplier *= table.multiplier(vdd);
  return out;
}

}  // namespace selftimed
