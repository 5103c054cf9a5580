#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "selftimed/bench.hpp"

using namespace selftimed;

namespace {

std::vector<double> parse_vdds(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw CLI::ValidationError("--vdds", "empty voltage list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-rail self-timed inference datapath: build, verify, benchmark"};
  app.require_subcommand(1);

  std::string config, out, bundle, delays, mode = "done", sampler = "features", vdds = "1.2,0.6,0.25", table;
  std::size_t n = 1000, random_n = 0;
  std::uint64_t seed = 1;
  bool exhaustive = false;

  auto* build = app.add_subcommand("build", "Generate the datapath bundle from a TmConfig JSON");
  build->add_option("--config", config, "TmConfig JSON")->required();
  build->add_option("--out", out, "Output directory")->required();

  auto* verify = app.add_subcommand("verify", "Zero-delay equivalence against the reference model");
  verify->add_option("--bundle", bundle, "Bundle directory")->required();
  auto* ex_flag = verify->add_flag("--exhaustive", exhaustive, "Every feature vector and exclude matrix");
  verify->add_option("--random", random_n, "Number of random operands")->excludes(ex_flag);
  verify->add_option("--seed", seed);

  auto* bench = app.add_subcommand("bench", "Timed handshake benchmark");
  bench->add_option("--bundle", bundle)->required();
  bench->add_option("-n", n)->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed);
  bench->add_option("--delays", delays, "Delay-model JSON");
  bench->add_option("--mode", mode)->check(CLI::IsMember({"done", "oracle"}));
  bench->add_option("--sampler", sampler)->check(CLI::IsMember({"features", "full", "equal", "msb-skew"}));
  bench->add_option("--out", out)->required();

  auto* sweep = app.add_subcommand("sweep-vdd", "Benchmark across supply voltages");
  sweep->add_option("--bundle", bundle)->required();
  sweep->add_option("--vdds", vdds, "Comma-separated voltages");
  sweep->add_option("--table", table, "Voltage table (JSON or CSV)");
  sweep->add_option("-n", n)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed);
  sweep->add_option("--sampler", sampler)->check(CLI::IsMember({"features", "full", "equal", "msb-skew"}));
  sweep->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  if (build->parsed()) return cmd_build(config, out, std::cout);
  if (verify->parsed()) {
    if (!exhaustive && random_n == 0) {
      std::cerr << "verify: pass --exhaustive or --random N\n";
      return 2;
    }
    return cmd_verify(bundle, exhaustive, random_n, seed, std::cout);
  }
  if (bench->parsed()) {
    BenchOptions o;
    o.n = n;
    o.seed = seed;
    if (!delays.empty()) o.delays_path = delays;
    o.mode = mode == "oracle" ? HandshakeMode::OracleTimed : HandshakeMode::DoneSignalled;
    o.sampler = *sampler_from_name(sampler);
    return cmd_bench(bundle, o, out, std::cout);
  }
  SweepOptions o;
  try {
    o.vdds = parse_vdds(vdds);
  } catch (const std::exception& e) {
    std::cerr << "sweep-vdd: bad --vdds: " << e.what() << '\n';
    return 2;
  }
  if (!table.empty()) o.table_path = table;
  o.n = n;
  o.seed = seed;
  o.sampler = *sampler_from_name(sampler);
  return cmd_sweep_vdd(bundle, o, out, std::cout);
}
