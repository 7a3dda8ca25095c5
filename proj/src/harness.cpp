#include "caltec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "caltec/channel.hpp"
#include "caltec/npy.hpp"
#include "caltec/rng.hpp"

namespace caltec {

using nlohmann::json;

std::string_view order_name(TransmissionOrder order) noexcept
{
  return order == TransmissionOrder::channel_major ? "channel_major" : "row_major";
}

TransmissionOrder parse_order(std::string_view name)
{
  if (name == "channel_major")
    return TransmissionOrder::channel_major;
  if (name == "row_major")
    return TransmissionOrder::row_major;
  throw std::invalid_argument("unknown transmission order '" + std::string(name) +
                              "' (expected channel_major or row_major)");
}

std::string_view padding_name(PaddingMode mode) noexcept
{
  return mode == PaddingMode::include ? "include" : "exclude";
}

PaddingMode parse_padding(std::string_view name)
{
  if (name == "include")
    return PaddingMode::include;
  if (name == "exclude")
    return PaddingMode::exclude;
  throw std::invalid_argument("unknown padding mode '" + std::string(name) +
                              "' (expected include or exclude)");
}

void apply_config_json(ExperimentConfig& config, std::string_view json_text)
{
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");

  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "inputs") {
        config.inputs.clear();
        for (const auto& p : value)
          config.inputs.emplace_back(p.get<std::string>());
      } else if (key == "r") {
        config.rows_per_packet = value.get<std::size_t>();
      } else if (key == "pb") {
        config.burst_loss_probs = value.get<std::vector<double>>();
      } else if (key == "lb") {
        config.burst_lengths = value.get<std::vector<double>>();
      } else if (key == "realizations") {
        config.realizations = value.get<std::size_t>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "methods") {
        config.methods.clear();
        for (const auto& m : value)
          config.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "output") {
        config.output = value.get<std::string>();
      } else if (key == "order") {
        config.order = parse_order(value.get<std::string>());
      } else if (key == "padding") {
        config.padding = parse_padding(value.get<std::string>());
      } else if (key == "bits") {
        config.bits = value.get<int>();
      } else if (key == "threads") {
        config.threads = value.get<std::size_t>();
      } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig config;
  apply_config_json(config, buf.str());
  return config;
}

std::string config_to_json(const ExperimentConfig& config)
{
  nlohmann::ordered_json j;
  j["inputs"] = json::array();
  for (const auto& p : config.inputs)
    j["inputs"].push_back(p.string());
  j["r"] = config.rows_per_packet;
  j["pb"] = config.burst_loss_probs;
  j["lb"] = config.burst_lengths;
  j["realizations"] = config.realizations;
  j["seed"] = config.seed;
  j["methods"] = json::array();
  for (Method m : config.methods)
    j["methods"].push_back(std::string(method_name(m)));
  j["output"] = config.output.string();
  j["order"] = std::string(order_name(config.order));
  j["padding"] = std::string(padding_name(config.padding));
  j["bits"] = config.bits;
  j["threads"] = config.threads;
  return j.dump(2);
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs)
{
  std::vector<std::filesystem::path> files;
  for (const auto& p : inputs) {
    if (std::filesystem::is_directory(p)) {
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".npy")
          files.push_back(entry.path());
      }
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) noexcept
{
  return fnv1a64(std::as_bytes(std::span<const char>(text.data(), text.size())));
}

namespace {

std::string hex16(std::uint64_t v)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4)
    s[static_cast<std::size_t>(k)] = digits[v & 0xf];
  return s;
}

std::string digest_bytes(std::span<const std::byte> bytes)
{
  return hex16(fnv1a64(bytes));
}

} // namespace

std::string mask_digest(const LossMask& mask)
{
  return digest_bytes(serialize_mask(mask));
}

std::uint64_t trace_seed(std::uint64_t master, std::string_view tensor_id, double burst_loss_prob,
                         double mean_burst_length, std::size_t realization)
{
  return derive_seed(master, {fnv1a64(tensor_id), double_bits(burst_loss_prob),
                              double_bits(mean_burst_length),
                              static_cast<std::uint64_t>(realization)});
}

std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_fixed(double v, int precision)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

struct CorpusEntry {
  std::string id;
  std::optional<FeatureTensor> tensor;
  std::string load_error;
};

struct GroupTask {
  std::size_t tensor;
  std::size_t pb;
  std::size_t lb;
  std::size_t realization;
};

struct GroupOutput {
  std::vector<ResultRow> rows;
  std::optional<SweepError> error;
};

GroupOutput run_group(const ExperimentConfig& config, const CorpusEntry& entry,
                      const GroupTask& task)
{
  GroupOutput out;
  const double pb = config.burst_loss_probs[task.pb];
  const double lb = config.burst_lengths[task.lb];
  try {
    const GEParams params = ge_convert(pb, lb);
    const FeatureTensor& original = *entry.tensor;
    const QuantizedTensor q = quantize(original, config.bits);
    const FeatureTensor reference = dequantize(q);
    const double peak = q.vmax - q.vmin;

    const Packetization packets = packetize(q, config.rows_per_packet, config.order);
    const ChannelTrace trace = gen_trace(
        params, packets.packets.size(), trace_seed(config.seed, entry.id, pb, lb, task.realization));
    const Reassembly received = reassemble(packets, trace);
    const std::vector<std::byte> mask_image = serialize_mask(received.mask);

    for (Method method : config.methods) {
      // Every method re-reads the same serialized mask.
      const LossMask mask = parse_mask(mask_image);
      RepairOptions options;
      options.padding = config.padding;
      const RepairResult repaired = complete(method, received.tensor, mask, packets.grid, options);

      ResultRow row;
      row.tensor_id = entry.id;
      row.pb = pb;
      row.lb = lb;
      row.realization = task.realization;
      row.method = std::string(method_name(method));
      row.packets_lost = mask.lost_count();
      row.mask_digest = mask_digest(mask);
      row.mse = mse(repaired.tensor, reference);
      row.psnr = psnr(row.mse, peak);
      row.repair_ms = repaired.report.repair_ms;
      row.fallback_zero_channels = repaired.report.zero_filled_channels;
      row.fallback_neighbor_copy = repaired.report.neighbor_copy_fallbacks;
      row.fallback_singular = repaired.report.singular_fits;
      out.rows.push_back(std::move(row));
    }
  } catch (const std::exception& e) {
    out.rows.clear();
    out.error = SweepError{entry.id, format_double(pb), format_double(lb),
                           std::to_string(task.realization), e.what()};
  }
  return out;
}

} // namespace

SweepResult run_sweep(const ExperimentConfig& config)
{
  if (config.methods.empty())
    throw std::invalid_argument("no completion methods selected");
  if (config.rows_per_packet == 0)
    throw std::invalid_argument("rows per packet must be >= 1");
  const auto files = expand_inputs(config.inputs);
  if (files.empty())
    throw std::invalid_argument("input corpus is empty");

  SweepResult result;
  std::vector<CorpusEntry> corpus;
  std::map<std::string, std::size_t> seen;
  for (const auto& f : files) {
    CorpusEntry entry;
    entry.id = f.stem().string();
    if (entry.id.find_first_of(",\n\"") != std::string::npos)
      throw std::invalid_argument("tensor id '" + entry.id + "' contains a CSV delimiter");
    if (seen[entry.id]++ > 0)
      throw std::invalid_argument("duplicate tensor id '" + entry.id + "'");
    try {
      entry.tensor = load_tensor(f);
    } catch (const std::exception& e) {
      entry.load_error = e.what();
    }
    corpus.push_back(std::move(entry));
  }

  std::vector<GroupTask> tasks;
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    if (!corpus[t].tensor) {
      result.errors.push_back({corpus[t].id, "", "", "", corpus[t].load_error});
      continue;
    }
    for (std::size_t p = 0; p < config.burst_loss_probs.size(); ++p)
      for (std::size_t l = 0; l < config.burst_lengths.size(); ++l)
        for (std::size_t m = 0; m < config.realizations; ++m)
          tasks.push_back({t, p, l, m});
  }

  std::vector<GroupOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++)
      outputs[k] = run_group(config, corpus[tasks[k].tensor], tasks[k]);
  };
  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, 256);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k)
      pool.emplace_back(worker);
  }

  for (auto& o : outputs) {
    if (o.error)
      result.errors.push_back(std::move(*o.error));
    for (auto& row : o.rows)
      result.rows.push_back(std::move(row));
  }
  return result;
}

void write_csv(std::ostream& out, std::span<const ResultRow> rows)
{
  out << csv_header << '\n';
  for (const auto& r : rows) {
    out << r.tensor_id << ',' << format_double(r.pb) << ',' << format_double(r.lb) << ','
        << r.realization << ',' << r.method << ',' << r.packets_lost << ',' << r.mask_digest << ','
        << format_double(r.mse) << ',' << format_double(r.psnr) << ','
        << format_fixed(r.repair_ms, 4) << ',' << r.fallback_zero_channels << ','
        << r.fallback_neighbor_copy << ',' << r.fallback_singular << '\n';
  }
}

void write_errors_csv(std::ostream& out, std::span<const SweepError> errors)
{
  out << "tensor_id,pb,lb,realization,error\n";
  for (const auto& e : errors) {
    std::string msg = e.message;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::string quoted;
    for (char ch : msg) {
      if (ch == '"')
        quoted += '"';
      quoted += ch;
    }
    out << e.tensor_id << ',' << e.pb << ',' << e.lb << ',' << e.realization << ",\"" << quoted
        << "\"\n";
  }
}

SweepResult run_sweep_to_file(const ExperimentConfig& config)
{
  SweepResult result = run_sweep(config);
  {
    std::ofstream out(config.output, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + config.output.string());
    write_csv(out, result.rows);
  }
  auto error_path = config.output;
  error_path += ".errors.csv";
  if (!result.errors.empty()) {
    std::ofstream out(error_path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + error_path.string());
    write_errors_csv(out, result.errors);
  } else {
    std::filesystem::remove(error_path);
  }
  return result;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep)
{
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& field, std::size_t line_no)
{
  if (field == "inf")
    return std::numeric_limits<double>::infinity();
  if (field == "-inf")
    return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw std::invalid_argument("line " + std::to_string(line_no) + ": '" + field +
                                "' is not a number");
  return v;
}

} // namespace

std::vector<SummaryRow> summarize(std::istream& csv)
{
  std::string line;
  if (!std::getline(csv, line))
    throw std::invalid_argument("empty results file");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != csv_header)
    throw std::invalid_argument("results header does not match the sweep schema");

  const std::size_t columns = split(std::string(csv_header), ',').size();
  struct Acc {
    std::size_t rows = 0;
    std::size_t lossless = 0;
    double lost = 0, mse = 0, psnr = 0, ms = 0;
  };
  std::map<std::pair<double, std::string>, Acc> groups;
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    const auto f = split(line, ',');
    if (f.size() != columns)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(columns) + " fields, found " +
                                  std::to_string(f.size()));
    Acc& acc = groups[{parse_number(f[1], line_no), f[4]}];
    ++acc.rows;
    acc.lost += parse_number(f[5], line_no);
    acc.mse += parse_number(f[7], line_no);
    const double p = parse_number(f[8], line_no);
    if (std::isfinite(p))
      acc.psnr += p;
    else
      ++acc.lossless;
    acc.ms += parse_number(f[9], line_no);
  }

  std::vector<SummaryRow> out;
  for (const auto& [key, acc] : groups) {
    const double n = static_cast<double>(acc.rows);
    const std::size_t lossy = acc.rows - acc.lossless;
    const double mean_psnr = lossy == 0 ? std::numeric_limits<double>::infinity()
                                        : acc.psnr / static_cast<double>(lossy);
    out.push_back({key.first, key.second, acc.rows, acc.lossless, acc.lost / n, acc.mse / n,
                   mean_psnr, acc.ms / n});
  }
  return out;
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows)
{
  out << "pb,method,rows,lossless_rows,mean_packets_lost,mean_mse,mean_psnr,mean_repair_ms\n";
  for (const auto& r : rows) {
    out << format_double(r.pb) << ',' << r.method << ',' << r.rows << ',' << r.lossless_rows << ','
        << format_double(r.mean_packets_lost) << ',' << format_double(r.mean_mse) << ','
        << format_double(r.mean_psnr) << ',' << format_fixed(r.mean_repair_ms, 4) << '\n';
  }
}

} // namespace caltec
