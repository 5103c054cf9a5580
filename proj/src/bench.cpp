#include "selftimed/bench.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace selftimed {

namespace fs = std::filesystem;

std::string_view to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::Features: return "features";
    case SamplerKind::Full: return "full";
    case SamplerKind::Equal: return "equal";
    default: return "msb-skew";
  }
}

std::optional<SamplerKind> sampler_from_name(std::string_view s) {
  for (auto k : {SamplerKind::Features, SamplerKind::Full, SamplerKind::Equal, SamplerKind::MsbSkew})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

OperandSampler make_sampler(const DatapathBundle& b, SamplerKind k) {
  switch (k) {
    case SamplerKind::Features: return feature_sampler(b);
    case SamplerKind::Full: return full_sampler(b);
    case SamplerKind::Equal:
      return [&b](std::mt19937_64& rng) {
        tm::Bits f(b.config.features);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = (rng() & 1) != 0;
        return b.operand(f, std::vector<tm::Bits>(b.config.clauses, tm::Bits(b.config.literals(), true)));
      };
    default:
      return [&b](std::mt19937_64& rng) {
        tm::Bits f(b.config.features);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = (rng() & 1) != 0;
        std::vector<tm::Bits> ex(b.config.clauses, tm::Bits(b.config.literals(), true));
        for (std::size_t j = 0; j < ex.size(); ++j) {
          if (b.config.polarity[j] > 0) continue;
          // f0 and !f0 both included: the clause is always 0
          ex[j][0] = false;
          ex[j][1] = false;
          for (std::size_t i = 2; i < ex[j].size(); ++i) ex[j][i] = (rng() & 1) != 0;
        }
        return b.operand(f, ex);
      };
  }
}

std::map<std::string, std::size_t> grouped_gate_counts(const DrBlock& b) {
  std::map<std::string, std::size_t> out{{"clause", 0}, {"popcount", 0}, {"comparator", 0}, {"cd", 0}};
  for (const auto& l : b.block_map) {
    if (l.starts_with("clause")) ++out["clause"];
    else if (l.starts_with("pos.") || l.starts_with("neg.")) ++out["popcount"];
    else if (l.starts_with("cmp")) ++out["comparator"];
    else if (l == "cd") ++out["cd"];
    else ++out["other"];
  }
  return out;
}

std::vector<std::vector<bool>> sample_operands(const DatapathBundle& b, SamplerKind k, std::size_t n,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto s = make_sampler(b, k);
  std::vector<std::vector<bool>> ops;
  ops.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ops.push_back(s(rng));
  return ops;
}

BenchReport make_bench_report(const DatapathBundle& bundle, const HandshakeResult& run,
                              const std::vector<std::vector<bool>>& operands, std::size_t n, std::uint64_t seed,
                              HandshakeMode mode, SamplerKind sampler, Time bin_width) {
  const LatencyDistribution d = summarize(run, bin_width);
  BenchReport r;
  r.n = n;
  r.seed = seed;
  r.mode = mode;
  r.sampler = sampler;
  r.mean_latency = d.mean;
  r.max_latency = d.max;
  r.min_latency = d.t_spcw.empty() ? 0 : *std::min_element(d.t_spcw.begin(), d.t_spcw.end());
  r.baseline_period = bundle.timing.max_t_spcw;
  if (d.max > 0) r.mean_over_max = d.mean / static_cast<double>(d.max);
  if (r.baseline_period > 0) r.mean_over_sta_max = d.mean / static_cast<double>(r.baseline_period);
  if (d.mean > 0) r.speedup = static_cast<double>(r.baseline_period) / d.mean;
  r.mean_cwsp = d.mean_cwsp;
  r.max_cwsp = d.max_cwsp;
  r.period_as_written = 2 * d.mean;
  r.period_intended = d.mean + d.mean_cwsp;
  if (d.mean + static_cast<double>(d.max_cwsp) > 0)
    r.inferences_per_second = 1e12 / (d.mean + static_cast<double>(d.max_cwsp));
  r.histogram = d.histogram;
  r.gate_counts = grouped_gate_counts(bundle.circuit);
  for (const auto& v : run.violations) ++r.violations[std::string(to_string(v.kind))];
  r.violation_count = run.violations.size();
  for (std::size_t i = 0; i < run.operands.size() && i < operands.size(); ++i) {
    const auto& o = run.operands[i];
    r.outcomes[o.outcome ? std::string(tm::to_string(*o.outcome)) : "NONE"]++;
    if (!o.outcome || *o.outcome != bundle.golden(operands[i])) ++r.decision_mismatches;
  }
  return r;
}

nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [bin, count] : r.histogram) hist.push_back({{"bin_start_ps", bin}, {"count", count}});
  return {{"n", r.n},
          {"seed", r.seed},
          {"mode", r.mode == HandshakeMode::DoneSignalled ? "done" : "oracle"},
          {"sampler", to_string(r.sampler)},
          {"mean_latency_ps", r.mean_latency},
          {"max_latency_ps", r.max_latency},
          {"min_latency_ps", r.min_latency},
          {"mean_over_max", r.mean_over_max},
          {"mean_over_sta_max", r.mean_over_sta_max},
          {"baseline_period_ps", r.baseline_period},
          {"speedup", r.speedup},
          {"reference_reduction", r.reference_reduction},
          {"mean_t_cwsp_ps", r.mean_cwsp},
          {"max_t_cwsp_ps", r.max_cwsp},
          {"throughput_period_as_written_ps", r.period_as_written},
          {"throughput_period_intended_ps", r.period_intended},
          {"inferences_per_second", r.inferences_per_second},
          {"histogram", hist},
          {"gate_counts", r.gate_counts},
          {"violations", r.violations},
          {"violation_count", r.violation_count},
          {"decision_mismatches", r.decision_mismatches},
          {"outcomes", r.outcomes}};
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(p.string() + ": " + e.what());
  }
}

}  // namespace

void write_bundle(const DatapathBundle& b, const std::string& dir) {
  fs::create_directories(dir);
  write_text(fs::path(dir) / "bundle.json", to_json(b).dump(1));
  write_text(fs::path(dir) / "config.json", tm::to_json(b.config).dump(2));
  write_text(fs::path(dir) / "timing.json", to_json(b.timing).dump(2));
  std::ostringstream csv;
  csv << "block,gates\n";
  for (const auto& [label, count] : b.circuit.block_gate_counts()) csv << label << ',' << count << '\n';
  write_text(fs::path(dir) / "gate_counts.csv", csv.str());
}

DatapathBundle read_bundle(const std::string& dir) { return bundle_from_json(read_json(fs::path(dir) / "bundle.json")); }

namespace {

VerifyResult check_one(const DatapathBundle& b, const std::vector<bool>& op, VerifyResult& r) {
  const tm::Compare want = b.golden(op);
  std::optional<tm::Compare> got;
  try {
    got = eval_outcome(b.circuit, op);
  } catch (const std::runtime_error&) {
  }
  ++r.checked;
  if (!got || *got != want) {
    r.pass = false;
    r.counterexample = op;
    r.expected = want;
    r.got = got;
  }
  return r;
}

}  // namespace

VerifyResult verify_exhaustive(const DatapathBundle& b) {
  const std::size_t F = b.config.features, bits = F + b.config.clauses * b.config.literals();
  if (bits > 26) throw std::invalid_argument(fmt::format("exhaustive verify over {} input bits is not feasible", bits));
  VerifyResult r;
  std::vector<bool> op(bits);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits); ++v) {
    for (std::size_t i = 0; i < bits; ++i) op[i] = (v >> i) & 1;
    check_one(b, op, r);
    if (!r.pass) break;
  }
  return r;
}

VerifyResult verify_random(const DatapathBundle& b, std::size_t n, std::uint64_t seed) {
  VerifyResult r;
  for (const auto& op : sample_operands(b, SamplerKind::Full, n, seed)) {
    check_one(b, op, r);
    if (!r.pass) break;
  }
  return r;
}

std::vector<SweepRow> sweep_vdd(const DatapathBundle& b, const DelayModel& base, const VddTable& table,
                                const SweepOptions& o) {
  const auto ops = sample_operands(b, o.sampler, o.n, o.seed);
  std::vector<SweepRow> rows;
  for (double vdd : o.vdds) {
    const DelayModel m = scale_delay_model(base, vdd, table);
    const auto run = run_handshake(b, ops, m, HandshakeMode::DoneSignalled);
    const auto rep = make_bench_report(b, run, ops, o.n, o.seed, HandshakeMode::DoneSignalled, o.sampler);
    rows.push_back({vdd, table.multiplier(vdd), rep.mean_latency, rep.max_latency, rep.violation_count,
                    rep.decision_mismatches});
  }
  return rows;
}

namespace {

std::string bits_string(const std::vector<bool>& v) {
  std::string s;
  for (bool b : v) s.push_back(b ? '1' : '0');
  return s;
}

void print_counts(const DatapathBundle& b, std::ostream& log) {
  log << fmt::format("{:<12} {:>6}\n", "block", "gates");
  for (const auto& [group, count] : grouped_gate_counts(b.circuit)) log << fmt::format("{:<12} {:>6}\n", group, count);
  log << fmt::format("{:<12} {:>6}\n", "total", b.circuit.netlist.num_gates());
  for (const char* tree : {"pos.", "neg."})
    log << fmt::format("{}popcount: {} HA, {} FA, {} OR, {} spacer inverters\n", tree,
                       b.circuit.count_blocks(std::string(tree) + "ha_"), b.circuit.count_blocks(std::string(tree) + "fa_"),
                       b.circuit.count_blocks(std::string(tree) + "or_"),
                       b.circuit.count_blocks(std::string(tree) + "spinv_"));
}

}  // namespace

int cmd_build(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  try {
    const auto config = tm::load_config(config_path);
    const auto bundle = build_inference_datapath(config);
    write_bundle(bundle, out_dir);
    print_counts(bundle, log);
    log << fmt::format("t_io {} ps, t_int {} ps, t_d {} ps (applied {}), max t_spcw {} ps\n", bundle.timing.t_io,
                       bundle.timing.t_int, bundle.timing.t_d, bundle.timing.t_d_applied, bundle.timing.max_t_spcw);
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_verify(const std::string& bundle_dir, bool exhaustive, std::size_t random_n, std::uint64_t seed,
               std::ostream& log) {
  try {
    const auto b = read_bundle(bundle_dir);
    const auto r = exhaustive ? verify_exhaustive(b) : verify_random(b, random_n, seed);
    if (r.pass) {
      log << fmt::format("PASS: {} operands match the reference model\n", r.checked);
      return 0;
    }
    const auto [f, ex] = b.split(*r.counterexample);
    log << fmt::format("FAIL after {} operands\n  features {}\n", r.checked, tm::bits_to_hex(f));
    for (std::size_t j = 0; j < ex.size(); ++j) log << fmt::format("  exclude[{}] {}\n", j, tm::bits_to_hex(ex[j]));
    log << fmt::format("  expected {}, circuit {}\n", tm::to_string(r.expected),
                       r.got ? tm::to_string(*r.got) : std::string_view("invalid codeword"));
    log << "  operand " << bits_string(*r.counterexample) << '\n';
    return 1;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_bench(const std::string& bundle_dir, const BenchOptions& o, const std::string& out_dir, std::ostream& log) {
  try {
    const auto b = read_bundle(bundle_dir);
    const DelayModel m = o.delays_path ? load_delay_model(*o.delays_path) : DelayModel::nominal();
    const auto ops = sample_operands(b, o.sampler, o.n, o.seed);
    const auto run = run_handshake(b, ops, m, o.mode);
    const auto rep = make_bench_report(b, run, ops, o.n, o.seed, o.mode, o.sampler, o.bin_width);
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "report.json", to_json(rep).dump(2));
    std::ostringstream meas;
    write_measurements_csv(meas, run.operands);
    write_text(fs::path(out_dir) / "measurements.csv", meas.str());
    std::ostringstream hist;
    hist << "bin_start_ps,count\n";
    for (const auto& [bin, count] : rep.histogram) hist << bin << ',' << count << '\n';
    write_text(fs::path(out_dir) / "histogram.csv", hist.str());
    log << fmt::format("mean {:.2f} ps, max {} ps, baseline {} ps, speedup {:.3f}, mean/max {:.3f}, "
                       "violations {}, mismatches {}\n",
                       rep.mean_latency, rep.max_latency, rep.baseline_period, rep.speedup, rep.mean_over_max,
                       rep.violation_count, rep.decision_mismatches);
    return rep.violation_count == 0 && rep.decision_mismatches == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_sweep_vdd(const std::string& bundle_dir, const SweepOptions& o, const std::string& out_dir,
                  std::ostream& log) {
  try {
    const auto b = read_bundle(bundle_dir);
    const VddTable table = o.table_path ? load_vdd_table(*o.table_path) : VddTable::default_table();
    const auto rows = sweep_vdd(b, DelayModel::nominal(), table, o);
    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "vdd,multiplier,mean_latency_ps,max_latency_ps,violations,decision_mismatches\n";
    bool ok = true;
    for (const auto& r : rows) {
      csv << fmt::format("{},{},{:.4f},{},{},{}\n", r.vdd, r.multiplier, r.mean_latency, r.max_latency, r.violations,
                         r.decision_mismatches);
      ok = ok && r.violations == 0 && r.decision_mismatches == 0;
    }
    write_text(fs::path(out_dir) / "sweep.csv", csv.str());
    log << csv.str();
    return ok ? 0 : 1;
  } catch (const OutOfRange& e) {
    log << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace selftimed
