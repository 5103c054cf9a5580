#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selftimed/datapath.hpp"
#include "selftimed/sim.hpp"
#include "selftimed/timing.hpp"

namespace selftimed {

enum class SamplerKind {
  Features,  // random features, exclude matrix from the configuration
  Full,      // random features and random exclude bits
  Equal,     // every clause excluded: both counts equal
  MsbSkew,   // positive clauses all 1, negative clauses all 0
};
std::string_view to_string(SamplerKind k);
std::optional<SamplerKind> sampler_from_name(std::string_view s);
OperandSampler make_sampler(const DatapathBundle& b, SamplerKind k);

struct BenchReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  HandshakeMode mode = HandshakeMode::DoneSignalled;
  SamplerKind sampler = SamplerKind::Features;
  double mean_latency = 0;
  Time max_latency = 0;
  Time min_latency = 0;
  double mean_over_max = 0;      // against the measured maximum
  double mean_over_sta_max = 0;  // against the topological maximum
  Time baseline_period = 0;      // topological max t_spcw
  double speedup = 0;
  double reference_reduction = 10.0;  // silicon average-latency reduction, for comparison only
  double mean_cwsp = 0;
  Time max_cwsp = 0;
  double period_as_written = 0;  // t_spcw + t_spcw
  double period_intended = 0;    // t_spcw + t_cwsp
  double inferences_per_second = 0;
  std::map<Time, std::size_t> histogram;
  std::map<std::string, std::size_t> gate_counts;  // clause / popcount / comparator / cd
  std::map<std::string, std::size_t> violations;
  std::size_t violation_count = 0;
  std::size_t decision_mismatches = 0;
  std::map<std::string, std::size_t> outcomes;
};

/// Gate counts grouped into clause, popcount, comparator and cd.
std::map<std::string, std::size_t> grouped_gate_counts(const DrBlock& b);

BenchReport make_bench_report(const DatapathBundle& bundle, const HandshakeResult& run,
                              const std::vector<std::vector<bool>>& operands, std::size_t n, std::uint64_t seed,
                              HandshakeMode mode, SamplerKind sampler, Time bin_width = 10);
nlohmann::json to_json(const BenchReport& r);

std::vector<std::vector<bool>> sample_operands(const DatapathBundle& b, SamplerKind k, std::size_t n,
                                               std::uint64_t seed);

void write_bundle(const DatapathBundle& b, const std::string& dir);
DatapathBundle read_bundle(const std::string& dir);

struct VerifyResult {
  bool pass = true;
  std::size_t checked = 0;
  std::optional<std::vector<bool>> counterexample;
  tm::Compare expected = tm::Compare::Equal;
  std::optional<tm::Compare> got;
};
/// Exhaustive over every feature vector and exclude matrix.
VerifyResult verify_exhaustive(const DatapathBundle& b);
VerifyResult verify_random(const DatapathBundle& b, std::size_t n, std::uint64_t seed);

struct BenchOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::optional<std::string> delays_path;
  HandshakeMode mode = HandshakeMode::DoneSignalled;
  SamplerKind sampler = SamplerKind::Features;
  Time bin_width = 10;
};

struct SweepOptions {
  std::vector<double> vdds{1.2, 0.6, 0.25};
  std::optional<std::string> table_path;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  SamplerKind sampler = SamplerKind::Features;
};

struct SweepRow {
  double vdd;
  double multiplier;
  double mean_latency;
  Time max_latency;
  std::size_t violations;
  std::size_t decision_mismatches;
};
std::vector<SweepRow> sweep_vdd(const DatapathBundle& b, const DelayModel& base, const VddTable& table,
                                const SweepOptions& o);

/// Command entry points; each returns a process exit code and logs to `log`.
int cmd_build(const std::string& config_path, const std::string& out_dir, std::ostream& log);
int cmd_verify(const std::string& bundle_dir, bool exhaustive, std::size_t random_n, std::uint64_t seed,
               std::ostream& log);
int cmd_bench(const std::string& bundle_dir, const BenchOptions& o, const std::string& out_dir, std::ostream& log);
int cmd_sweep_vdd(const std::string& bundle_dir, const SweepOptions& o, const std::string& out_dir,
                  std::ostream& log);

}  // namespace selftimed
