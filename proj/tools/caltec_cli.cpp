// Command-line front end: sweeps, single-tensor repair, channel traces,
// synthetic corpora and result summaries.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "caltec/baselines.hpp"
#include "caltec/caltec.hpp"
#include "caltec/channel.hpp"
#include "caltec/harness.hpp"
#include "caltec/npy.hpp"
#include "caltec/packetizer.hpp"
#include "caltec/rng.hpp"
#include "caltec/synthetic.hpp"

namespace fs = std::filesystem;
using namespace caltec;

namespace {

constexpr int exit_failure = 1;
constexpr int exit_partial = 3; // sweep finished but some row groups failed

npy::DType parse_dtype(const std::string& name)
{
  if (name == "f32" || name == "float32")
    return npy::DType::f32;
  if (name == "f64" || name == "float64")
    return npy::DType::f64;
  throw std::invalid_argument("unknown element type '" + name + "' (expected f32 or f64)");
}

struct SimulateArgs {
  std::string config;
  std::vector<std::string> inputs;
  std::size_t r = 0;
  std::vector<double> pb, lb;
  std::size_t realizations = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;
  std::string output, order, padding;
  int bits = 8;
  std::size_t threads = 1;
  bool print_config = false;
};

int run_simulate(const SimulateArgs& a, const CLI::App& cmd)
{
  ExperimentConfig config;
  if (!a.config.empty())
    config = load_config(a.config);
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--input")) {
    config.inputs.clear();
    for (const auto& p : a.inputs)
      config.inputs.emplace_back(p);
  }
  if (given("--r"))
    config.rows_per_packet = a.r;
  if (given("--pb"))
    config.burst_loss_probs = a.pb;
  if (given("--lb"))
    config.burst_lengths = a.lb;
  if (given("--realizations"))
    config.realizations = a.realizations;
  if (given("--seed"))
    config.seed = a.seed;
  if (given("--methods")) {
    config.methods.clear();
    for (const auto& m : a.methods)
      config.methods.push_back(parse_method(m));
  }
  if (given("--output"))
    config.output = a.output;
  if (given("--order"))
    config.order = parse_order(a.order);
  if (given("--padding"))
    config.padding = parse_padding(a.padding);
  if (given("--bits"))
    config.bits = a.bits;
  if (given("--threads"))
    config.threads = a.threads;

  if (a.print_config) {
    std::cout << config_to_json(config) << '\n';
    return EXIT_SUCCESS;
  }

  const SweepResult result = run_sweep_to_file(config);
  std::cerr << "wrote " << result.rows.size() << " rows to " << config.output.string() << '\n';
  if (!result.errors.empty()) {
    std::cerr << result.errors.size() << " row group(s) failed; see " << config.output.string()
              << ".errors.csv\n";
    for (const auto& e : result.errors)
      std::cerr << "  " << e.tensor_id << " pb=" << e.pb << " lb=" << e.lb << ": " << e.message
                << '\n';
    return exit_partial;
  }
  return EXIT_SUCCESS;
}

struct RepairArgs {
  std::string input, mask, output, report, method = "caltec", padding = "include";
  std::size_t r = 8;
};

int run_repair(const RepairArgs& a)
{
  const TensorFile file = read_tensor_file(a.input);
  const LossMask mask = load_mask(a.mask);
  const PacketGrid grid = make_grid(file.tensor.height(), file.tensor.width(), a.r);
  RepairOptions options;
  options.padding = parse_padding(a.padding);
  const RepairResult result = complete(parse_method(a.method), file.tensor, mask, grid, options);
  save_tensor(result.tensor, a.output, file.element_type);

  const std::string report = to_json(result.report);
  if (a.report.empty()) {
    std::cout << report << '\n';
  } else {
    std::ofstream out(a.report);
    if (!out)
      throw std::runtime_error("cannot write " + a.report);
    out << report << '\n';
  }
  return EXIT_SUCCESS;
}

struct CorruptArgs {
  std::string input, output, mask, trace, order = "channel_major";
  std::size_t r = 8;
  double pb = 0.1, lb = 1.0;
  std::uint64_t seed = 1;
  int bits = 8;
};

int run_corrupt(const CorruptArgs& a)
{
  const TensorFile file = read_tensor_file(a.input);
  const QuantizedTensor q = quantize(file.tensor, a.bits);
  const Packetization packets = packetize(q, a.r, parse_order(a.order));
  const ChannelTrace trace = gen_trace(ge_convert(a.pb, a.lb), packets.packets.size(), a.seed);
  const Reassembly received = reassemble(packets, trace);

  save_tensor(received.tensor, a.output, file.element_type);
  save_mask(received.mask, a.mask);
  if (!a.trace.empty())
    save_trace(trace, a.trace);

  nlohmann::ordered_json j;
  j["packets"] = packets.packets.size();
  j["packets_lost"] = received.mask.lost_count();
  j["mask_digest"] = mask_digest(received.mask);
  std::cout << j.dump() << '\n';
  return EXIT_SUCCESS;
}

struct TraceArgs {
  double pb = 0.1, lb = 1.0;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string output;
};

int run_trace(const TraceArgs& a)
{
  const GEParams params = ge_convert(a.pb, a.lb);
  const ChannelTrace trace = gen_trace(params, a.n, a.seed);
  if (!a.output.empty())
    save_trace(trace, a.output);
  const TraceStats s = trace_stats(trace.received);

  nlohmann::ordered_json j;
  j["pb"] = a.pb;
  j["lb"] = a.lb;
  j["p_bg"] = params.bad_to_good;
  j["p_gb"] = params.good_to_bad;
  j["p_bb"] = params.bad_to_bad;
  j["p_gg"] = params.good_to_good;
  j["n"] = a.n;
  j["seed"] = a.seed;
  j["lost"] = s.lost;
  j["loss_fraction"] = s.loss_fraction;
  j["mean_burst_length"] = s.mean_burst_length;
  j["burst_count"] = s.burst_count;
  std::cout << j.dump(2) << '\n';
  return EXIT_SUCCESS;
}

struct GenArgs {
  std::size_t h = 56, w = 56, c = 64, base = 16, count = 1;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string out_dir = ".", dtype = "f64", prefix = "synth";
};

int run_gen(const GenArgs& a)
{
  const npy::DType dtype = parse_dtype(a.dtype);
  fs::create_directories(a.out_dir);
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < a.count; ++n) {
    const std::uint64_t seed = derive_seed(a.seed, {n});
    const SyntheticTensor s = gen_synthetic(a.h, a.w, a.c, a.base, a.noise, seed);
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu", a.prefix.c_str(), n);
    const fs::path path = fs::path(a.out_dir) / (std::string(name) + ".npy");
    save_tensor(s.tensor, path, dtype);

    nlohmann::ordered_json entry;
    entry["tensor_id"] = name;
    entry["file"] = path.filename().string();
    entry["seed"] = seed;
    entry["channels"] = nlohmann::ordered_json::array();
    for (const auto& o : s.origins) {
      nlohmann::ordered_json ch;
      ch["derived"] = o.derived;
      ch["source"] = o.source;
      ch["scale"] = o.scale;
      ch["offset"] = o.offset;
      entry["channels"].push_back(ch);
    }
    manifest.push_back(entry);
  }
  std::ofstream out(fs::path(a.out_dir) / (a.prefix + "_manifest.json"));
  out << manifest.dump(2) << '\n';
  std::cerr << "wrote " << a.count << " tensor(s) to " << a.out_dir << '\n';
  return EXIT_SUCCESS;
}

int run_summarize(const std::string& input, const std::string& output)
{
  std::ifstream in(input);
  if (!in)
    throw std::runtime_error("cannot open " + input);
  const auto rows = summarize(in);
  if (output.empty()) {
    write_summary(std::cout, rows);
  } else {
    std::ofstream out(output);
    if (!out)
      throw std::runtime_error("cannot write " + output);
    write_summary(out, rows);
  }
  return EXIT_SUCCESS;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Feature-tensor packet loss simulation and content-adaptive completion"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweep over the (P_B, L_B) grid");
  simulate->add_option("--config", sim.config, "JSON experiment config")->check(CLI::ExistingFile);
  simulate->add_option("--input", sim.inputs, "tensor .npy files or directories");
  simulate->add_option("--r", sim.r, "rows per packet")->check(CLI::PositiveNumber);
  simulate->add_option("--pb", sim.pb, "burst loss probabilities");
  simulate->add_option("--lb", sim.lb, "average burst lengths");
  simulate->add_option("--realizations", sim.realizations, "channel realizations per pair");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--methods", sim.methods, "caltec, zero_fill, neighbor_copy, linear_interp");
  simulate->add_option("--output", sim.output, "results CSV");
  simulate->add_option("--order", sim.order, "channel_major or row_major");
  simulate->add_option("--padding", sim.padding, "include or exclude pad rows in CALTeC vectors");
  simulate->add_option("--bits", sim.bits, "quantizer bit depth")->check(CLI::Range(1, 16));
  simulate->add_option("--threads", sim.threads, "worker threads");
  simulate->add_flag("--print-config", sim.print_config, "print the effective config and exit");

  RepairArgs rep;
  auto* repair = app.add_subcommand("repair", "complete one corrupted tensor given its loss mask");
  repair->add_option("--input", rep.input, "corrupted tensor .npy")->required()->check(CLI::ExistingFile);
  repair->add_option("--mask", rep.mask, "loss mask .npy (channels, packets)")->required()->check(CLI::ExistingFile);
  repair->add_option("--output", rep.output, "repaired tensor .npy")->required();
  repair->add_option("--r", rep.r, "rows per packet")->check(CLI::PositiveNumber);
  repair->add_option("--method", rep.method, "completion method");
  repair->add_option("--padding", rep.padding, "include or exclude");
  repair->add_option("--report", rep.report, "write the repair report JSON here instead of stdout");

  CorruptArgs cor;
  auto* corrupt = app.add_subcommand("corrupt", "quantize, packetize and pass one tensor through the channel");
  corrupt->add_option("--input", cor.input, "tensor .npy")->required()->check(CLI::ExistingFile);
  corrupt->add_option("--output", cor.output, "corrupted tensor .npy")->required();
  corrupt->add_option("--mask", cor.mask, "loss mask output .npy")->required();
  corrupt->add_option("--trace", cor.trace, "channel trace output .npy");
  corrupt->add_option("--r", cor.r, "rows per packet")->check(CLI::PositiveNumber);
  corrupt->add_option("--pb", cor.pb, "burst loss probability");
  corrupt->add_option("--lb", cor.lb, "average burst length");
  corrupt->add_option("--seed", cor.seed, "trace seed");
  corrupt->add_option("--order", cor.order, "channel_major or row_major");
  corrupt->add_option("--bits", cor.bits, "quantizer bit depth")->check(CLI::Range(1, 16));

  TraceArgs tr;
  auto* trace = app.add_subcommand("trace", "generate a Gilbert-Elliott trace and report its statistics");
  trace->add_option("--pb", tr.pb, "burst loss probability")->required();
  trace->add_option("--lb", tr.lb, "average burst length")->required();
  trace->add_option("--n", tr.n, "packet count")->check(CLI::PositiveNumber);
  trace->add_option("--seed", tr.seed, "seed");
  trace->add_option("--output", tr.output, "write the trace as uint8 .npy");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic correlated-channel corpus");
  gen_cmd->add_option("--height", gen.h, "rows")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--width", gen.w, "columns")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--channels", gen.c, "channels")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--base", gen.base, "independent base channels")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--noise", gen.noise, "noise sigma on derived channels");
  gen_cmd->add_option("--seed", gen.seed, "master seed");
  gen_cmd->add_option("--count", gen.count, "number of tensors");
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory");
  gen_cmd->add_option("--prefix", gen.prefix, "file name prefix");
  gen_cmd->add_option("--dtype", gen.dtype, "f32 or f64");

  std::string sum_in, sum_out;
  auto* summ = app.add_subcommand("summarize", "per-(P_B, method) means of a results CSV");
  summ->add_option("--input", sum_in, "results CSV")->required()->check(CLI::ExistingFile);
  summ->add_option("--output", sum_out, "summary CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate)
      return run_simulate(sim, *simulate);
    if (*repair)
      return run_repair(rep);
    if (*corrupt)
      return run_corrupt(cor);
    if (*trace)
      return run_trace(tr);
    if (*gen_cmd)
      return run_gen(gen);
    if (*summ)
      return run_summarize(sum_in, sum_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_failure;
}
