#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caltec/baselines.hpp"
#include "caltec/packetizer.hpp"

namespace caltec {

/// Monte Carlo sweep settings. Defaults are the full (P_B, L_B) grid with ten
/// channel realizations per pair.
struct ExperimentConfig {
  std::vector<std::filesystem::path> inputs; ///< .npy files or directories of them
  std::size_t rows_per_packet = 8;
  std::vector<double> burst_loss_probs{0.01, 0.10, 0.20, 0.30};
  std::vector<double> burst_lengths{1, 2, 3, 4, 5, 6, 7};
  std::size_t realizations = 10;
  std::uint64_t seed = 1;
  std::vector<Method> methods{all_methods()};
  std::filesystem::path output{"results.csv"};
  TransmissionOrder order = TransmissionOrder::channel_major;
  PaddingMode padding = PaddingMode::include;
  int bits = 8;
  std::size_t threads = 1;
};

/// Overlay the keys of a JSON object onto `config`. Unknown keys are rejected.
/// Keys: inputs, r, pb, lb, realizations, seed, methods, output, order,
/// padding, bits, threads.
void apply_config_json(ExperimentConfig& config, std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

std::string_view order_name(TransmissionOrder order) noexcept;
TransmissionOrder parse_order(std::string_view name);
std::string_view padding_name(PaddingMode mode) noexcept;
PaddingMode parse_padding(std::string_view name);

/// Directories expand to their *.npy files; the result is sorted by path.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs);

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::span<const std::byte> bytes) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// 16 lowercase hex digits of fnv1a64 over the serialized mask.
std::string mask_digest(const LossMask& mask);

/// Seed of the channel trace for one row group:
/// derive_seed(master, {fnv1a64(tensor_id), bits(P_B), bits(L_B), realization}).
std::uint64_t trace_seed(std::uint64_t master, std::string_view tensor_id, double burst_loss_prob,
                         double mean_burst_length, std::size_t realization);

struct ResultRow {
  std::string tensor_id;
  double pb = 0.0;
  double lb = 0.0;
  std::size_t realization = 0;
  std::string method;
  std::size_t packets_lost = 0;
  std::string mask_digest;
  double mse = 0.0;
  double psnr = 0.0;
  double repair_ms = 0.0;
  std::size_t fallback_zero_channels = 0;
  std::size_t fallback_neighbor_copy = 0;
  std::size_t fallback_singular = 0;
};

/// A row group (or a whole tensor) that could not be run.
struct SweepError {
  std::string tensor_id;
  std::string pb;
  std::string lb;
  std::string realization;
  std::string message;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<SweepError> errors;
};

inline constexpr std::string_view csv_header =
    "tensor_id,pb,lb,realization,method,packets_lost,mask_digest,mse,psnr,repair_ms,"
    "fallback_zero_channels,fallback_neighbor_copy,fallback_singular";

/// Run every (tensor, P_B, L_B, realization) row group. Each group quantizes
/// the tensor, packetizes it, draws one channel trace, reassembles, and hands
/// the same serialized loss mask to every method. MSE and PSNR compare
/// against the dequantized, loss-free tensor; PSNR peak is vmax - vmin.
/// Rows come out in canonical order (tensor, P_B, L_B, realization, method)
/// whatever the thread count.
SweepResult run_sweep(const ExperimentConfig& config);

void write_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_errors_csv(std::ostream& out, std::span<const SweepError> errors);

/// Runs the sweep and writes config.output; errors, if any, go to
/// `<output>.errors.csv`.
SweepResult run_sweep_to_file(const ExperimentConfig& config);

struct SummaryRow {
  double pb = 0.0;
  std::string method;
  std::size_t rows = 0;
  std::size_t lossless_rows = 0; ///< rows with zero MSE (infinite PSNR)
  double mean_packets_lost = 0.0;
  double mean_mse = 0.0;
  double mean_psnr = 0.0; ///< over rows with finite PSNR; inf if there are none
  double mean_repair_ms = 0.0;
};

/// Pool all L_B values and realizations per (P_B, method), sorted by P_B then
/// method. Throws std::invalid_argument when the header or a row does not
/// match the sweep schema.
std::vector<SummaryRow> summarize(std::istream& csv);
void write_summary(std::ostream& out, std::span<const SummaryRow> rows);

/// Shortest decimal that round-trips.
std::string format_double(double v);

} // namespace caltec
