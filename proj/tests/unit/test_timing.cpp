#include <doctest.h>

#include <cmath>
#include <random>

#include "selftimed/sim.hpp"
#include "selftimed/timing.hpp"

using namespace selftimed;

namespace {

// a -> BUF (fall 300) -> y (PO); a -> BUF (fall 500) -> z (internal only)
Netlist false_path_netlist() {
  NetlistSpec s;
  const NetId a = s.add_net("a");
  const NetId y = s.emit(GateKind::Buf, {a}, "y");
  s.emit(GateKind::Buf, {a}, "z");
  s.pis = {a};
  s.pos = {y};
  return Netlist::build(s);
}

}  // namespace

TEST_CASE("single AND2 has no extra done delay") {
  NetlistSpec s;
  const NetId a = s.add_net("a"), b = s.add_net("b");
  s.pos = {s.emit(GateKind::And2, {a, b}, "y")};
  s.pis = {a, b};
  const Netlist n = Netlist::build(s);
  const auto r = compute_timing(n, DelayModel::nominal());
  CHECK(r.t_io == 15);
  CHECK(r.t_int == 15);
  CHECK(r.t_d == 0);
  CHECK(r.t_reset_min == 15);
  CHECK(r.t_d_required == 0);
  CHECK(r.t_d_applied == 0);
  CHECK(r.t_done_fall == 15);
  CHECK(r.max_t_spcw == 15);
  CHECK(r.io_path == std::vector<GateId>{0});
}

TEST_CASE("a longer internal false path sets t_d") {
  const Netlist n = false_path_netlist();
  DelayModel m = DelayModel::nominal();
  m.overrides[0] = {300, 300};
  m.overrides[1] = {500, 500};
  const auto r = compute_timing(n, m, {}, 1.0);
  CHECK(r.t_io == 300);
  CHECK(r.t_int == 500);
  CHECK(r.t_d == 200);
  CHECK(r.t_d_applied == 200);
  CHECK(r.t_done_fall == 500);
  CHECK(r.int_path == std::vector<GateId>{1});
  const auto with_margin = compute_timing(n, m);
  CHECK(with_margin.t_d == 200);
  CHECK(with_margin.t_d_applied == 220);
  CHECK(with_margin.t_done_fall >= with_margin.t_int);
}

TEST_CASE("reset direction follows the spacer value") {
  // PI spacer 1: the reset edge on an AND2 output is a rise
  NetlistSpec s;
  const NetId a = s.add_net("a"), b = s.add_net("b");
  s.pos = {s.emit(GateKind::And2, {a, b}, "y")};
  s.pis = {a, b};
  const Netlist n = Netlist::build(s);
  DelayModel m = DelayModel::nominal();
  m.defaults[GateKind::And2] = {7, 40};
  const std::vector<Logic> ones{Logic::One, Logic::One};
  const auto hi = compute_timing(n, m, ones);
  CHECK(hi.t_io == 7);
  CHECK(hi.max_t_spcw == 40);
  const auto lo = compute_timing(n, m);
  CHECK(lo.t_io == 40);
  CHECK(lo.max_t_spcw == 7);
}

TEST_CASE("jitter range is analysed at its corners") {
  const Netlist n = false_path_netlist();
  DelayModel m = DelayModel::nominal();
  m.overrides[0] = {100, 100};
  m.overrides[1] = {200, 200};
  m.jitter = Jitter{0.5, 1.5, 3};
  const auto r = compute_timing(n, m, {}, 1.0);
  CHECK(r.t_io == 150);
  CHECK(r.t_int == 300);
  CHECK(r.t_reset_min == 50);
  CHECK(r.t_d == 150);
  CHECK(r.t_d_required == 250);
}

TEST_CASE("combinational cycles are rejected") {
  NetlistSpec s;
  const NetId a = s.add_net("a");
  const NetId fb = s.add_net("fb");
  const NetId y = s.emit(GateKind::C2, {a, fb}, "y");
  s.add_gate(GateKind::Buf, {y}, fb);
  s.pis = {a};
  s.pos = {y};
  const Netlist n = Netlist::build(s);
  CHECK_THROWS_AS(compute_timing(n, DelayModel::nominal()), TimingError);
}

TEST_CASE("t_d + t_io = t_int whenever t_int > t_io") {
  for (auto [F, C] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}, {2, 4}, {3, 6}, {4, 8}, {4, 16}}) {
    const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(F, C));
    const auto& r = b.timing;
    CHECK(r.t_int >= r.t_io);
    CHECK(r.t_io >= 0);
    CHECK(r.t_d == r.t_int - r.t_io);
    CHECK(r.t_d_required >= r.t_d);
    CHECK(r.t_d_applied == static_cast<Time>(std::ceil(r.t_d_required * r.margin - 1e-9)));
    CHECK(r.t_done_fall == r.t_io + r.t_d_applied);
    CHECK(r.t_done_fall >= r.t_int);
  }
}

TEST_CASE("simulated times stay within the static bounds") {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(4, 8));
  const DelayModel m = DelayModel::nominal();
  // the whole circuit up to done_raw; done itself sits behind the DELAY
  const auto full = compute_timing(b.circuit.netlist, m, spacer_inputs(b.circuit.dual_rail()));
  const auto d = measure_latency_distribution(b, full_sampler(b), 1000, 17, m);
  CHECK(d.violations.empty());
  CHECK(d.max <= b.timing.max_t_spcw);
  CHECK(d.max_cwsp <= full.t_int);
}

TEST_CASE("VddTable interpolation") {
  const VddTable t = VddTable::default_table();
  CHECK(t.nominal_vdd() == doctest::Approx(1.2));
  CHECK(t.multiplier(1.2) == doctest::Approx(1.0));
  CHECK(t.multiplier(0.6) == doctest::Approx(4.0));
  CHECK(t.multiplier(0.25) == doctest::Approx(3000.0));
  // halfway between (0.9, 1.5) and (0.6, 4) in log space
  CHECK(t.multiplier(0.75) == doctest::Approx(std::sqrt(6.0)));
  double prev = 0;
  for (double v = 1.2; v >= 0.25; v -= 0.01) {
    const double k = t.multiplier(v);
    CHECK(k >= prev);
    prev = k;
  }
  CHECK_THROWS_AS(t.multiplier(1.3), OutOfRange);
  CHECK_THROWS_AS(t.multiplier(0.2), OutOfRange);
  CHECK_THROWS(VddTable({{1.2, 1.0}, {0.6, 0.5}}));
  CHECK_THROWS(VddTable({{1.2, 2.0}, {0.6, 4.0}}));
  CHECK_THROWS(VddTable({{1.2, 1.0}, {0.6, 4.0}, {0.9, 5.0}}));

  const VddTable csv = vdd_table_from_csv("vdd,multiplier\n1.2,1\n0.6,4\n");
  CHECK(csv.multiplier(0.6) == doctest::Approx(4.0));
  const VddTable js = vdd_table_from_json(to_json(t));
  CHECK(js.points() == t.points());
}

TEST_CASE("delay scaling") {
  NetlistSpec s;
  const NetId a = s.add_net("a"), b = s.add_net("b");
  const NetId x = s.emit(GateKind::And2, {a, b});
  s.pos = {s.emit(GateKind::Inv, {x}, "y")};
  s.pis = {a, b};
  const Netlist n = Netlist::build(s);
  const DelayModel base = DelayModel::nominal();
  const auto d0 = resolve_delays(n, base);

  const auto same = resolve_delays(n, scale_delay_model(base, 1.2, VddTable::default_table()));
  CHECK(same == d0);

  const VddTable steep({{1.2, 1.0}, {0.25, 10000.0}});
  const auto big = resolve_delays(n, scale_delay_model(base, 0.25, steep));
  for (GateId g = 0; g < n.num_gates(); ++g) {
    CHECK(big[g].rise == 10000 * d0[g].rise);
    CHECK(big[g].fall == 10000 * d0[g].fall);
  }
  CHECK_THROWS_AS(scale_delay_model(base, 0.1, steep), OutOfRange);

  // fractional results round up and never drop below one unit
  DelayModel tiny = base;
  tiny.defaults[GateKind::Inv] = {1, 1};
  tiny.vdd_multiplier = 0.3;
  CHECK(resolve_delays(n, tiny)[1].rise == 1);
  tiny.vdd_multiplier = 1.5;
  tiny.defaults[GateKind::And2] = {15, 15};
  CHECK(resolve_delays(n, tiny)[0].rise == 23);
}

TEST_CASE("timing report JSON fields") {
  const auto b = build_inference_datapath(tm::TmConfig::first_half_positive(2, 4));
  const auto j = to_json(b.timing);
  for (const char* k : {"t_io_ps", "t_int_ps", "t_d_ps", "t_reset_min_ps", "t_d_required_ps", "margin",
                        "t_d_applied_ps", "t_done_fall_ps", "max_t_spcw_ps", "io_path", "int_path"})
    CHECK(j.contains(k));
  CHECK(j["t_d_ps"].get<Time>() == b.timing.t_d);
}
