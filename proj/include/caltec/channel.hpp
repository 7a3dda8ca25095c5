#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace caltec {

/// Gilbert-Elliott burst-loss parameters.
///
/// The Good state always delivers and the Bad state always loses, so the
/// stationary loss rate is burst_loss_prob and the mean Bad run length is
/// mean_burst_length.
struct GEParams {
  double burst_loss_prob = 0.0;   // P_B
  double mean_burst_length = 1.0; // L_B
  double bad_to_good = 1.0;
  double good_to_bad = 0.0;
  double bad_to_bad = 0.0;
  double good_to_good = 1.0;

  /// Stationary probability of the Bad state.
  double stationary_bad() const noexcept { return good_to_bad / (good_to_bad + bad_to_good); }
};

/// p_BG = 1/L_B, p_GB = P_B / (L_B (1 - P_B)), p_BB = 1 - p_BG, p_GG = 1 - p_GB.
///
/// Throws std::invalid_argument unless 0 <= P_B < 1, L_B >= 1 and p_GB <= 1.
GEParams ge_convert(double burst_loss_prob, double mean_burst_length);

/// A realized loss sequence. received[n] is 1 when packet n got through.
struct ChannelTrace {
  std::vector<std::uint8_t> received;
  std::uint64_t seed = 0;
  GEParams params{};

  std::size_t size() const noexcept { return received.size(); }
};

/// Run the two-state chain for n packets. The first state is drawn from the
/// stationary distribution. Deterministic in (params, n, seed).
ChannelTrace gen_trace(const GEParams& params, std::size_t n, std::uint64_t seed);

struct TraceStats {
  double loss_fraction = 0.0;
  double mean_burst_length = 0.0; ///< 0 when there are no bursts
  std::size_t burst_count = 0;
  std::size_t lost = 0;
};

/// A burst is a maximal run of lost packets.
TraceStats trace_stats(const std::vector<std::uint8_t>& received);

/// Trace as an NPY uint8 vector (n,), 1 = received.
void save_trace(const ChannelTrace& trace, const std::filesystem::path& path);
std::vector<std::uint8_t> load_trace(const std::filesystem::path& path);

} // namespace caltec
