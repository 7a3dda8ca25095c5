#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caltec/packetizer.hpp"
#include "caltec/tensor.hpp"

namespace caltec {

/// Whether the zero rows that pad the last packet of a channel take part in
/// correlation and fitting. With `include` every packet vector has r * w
/// entries; with `exclude` the last packet's vector stops at the tensor edge.
enum class PaddingMode { include, exclude };

struct RepairOptions {
  PaddingMode padding = PaddingMode::include;
};

/// Per-tensor outcome of a completion method.
struct RepairReport {
  std::string method;
  std::size_t repaired = 0;                ///< lost packets filled (excluding zero-filled channels)
  std::size_t zero_filled_channels = 0;    ///< channels with every packet lost
  std::size_t neighbor_copy_fallbacks = 0; ///< no candidate channel; neighbor packet copied
  std::size_t singular_fits = 0;           ///< degenerate normal equations; offset-only fit
  std::size_t constant_neighbor_fills = 0; ///< neighbor packet constant; filled with that constant
  double repair_ms = 0.0;
};

/// One JSON object per tensor.
std::string to_json(const RepairReport& report);

struct RepairResult {
  FeatureTensor tensor;
  RepairReport report;
};

struct NeighborChoice {
  std::size_t packet = 0;
  std::size_t channel = 0;
  std::optional<std::size_t> neighbor; ///< empty when the whole channel is lost
  std::size_t distance = 0;
};

/// Closest received packet in the same channel. On a tie the packet below
/// (larger index) wins.
NeighborChoice select_neighbor(const LossMask& mask, std::size_t packet, std::size_t channel);

/// Ordering value returned by pearson() when either input has zero variance.
inline constexpr double no_correlation = -std::numeric_limits<double>::infinity();

/// True when every element equals the first.
bool is_constant(std::span<const double> v) noexcept;

/// Pearson correlation with population statistics, clamped to [-1, 1].
/// Returns no_correlation if either vector is constant. Throws
/// std::invalid_argument on unequal lengths or fewer than two elements.
double pearson(std::span<const double> u, std::span<const double> v);

/// Vectorized packets of a tensor, laid out contiguously for fast search.
class PacketStore {
public:
  PacketStore(const FeatureTensor& tensor, const PacketGrid& grid,
              PaddingMode padding = PaddingMode::include);

  const PacketGrid& grid() const noexcept { return grid_; }
  std::size_t channels() const noexcept { return channels_; }
  PaddingMode padding() const noexcept { return padding_; }

  /// Row-major r x w vector of packet `packet` in `channel`.
  std::span<const double> packet(std::size_t packet, std::size_t channel) const noexcept;
  bool constant(std::size_t packet, std::size_t channel) const noexcept
  {
    return constant_[channel * grid_.packets_per_channel + packet] != 0;
  }

private:
  PacketGrid grid_;
  std::size_t channels_ = 0;
  PaddingMode padding_ = PaddingMode::include;
  std::vector<double> data_;
  std::vector<std::uint8_t> constant_;
};

/// Channel whose packet `neighbor` correlates best with packet `neighbor` of
/// `channel`, among channels other than `channel` where both `packet` and
/// `neighbor` were received and the neighbor packet is not constant. Ties go
/// to the lowest channel index. Empty if no channel qualifies.
std::optional<std::size_t> find_best_channel(const PacketStore& store, const LossMask& mask,
                                             std::size_t packet, std::size_t neighbor,
                                             std::size_t channel);

struct AffineCoefficients {
  double scale = 0.0;  ///< a*
  double offset = 0.0; ///< b*
  std::optional<std::size_t> source_channel;
  double residual = 0.0; ///< ||target - (a* source + b*)||^2
  bool singular = false;
};

/// ||target - (a source + b)||^2
double affine_objective(std::span<const double> target, std::span<const double> source,
                        double scale, double offset);

/// Least-squares (a, b) for target ~ a * source + b.
///
/// Solves the 2x2 normal equations with design [source | 1] through their
/// explicit inverse. When the determinant n * sum((s - mean s)^2) falls below
/// 1e-12 * n * sum(s^2) the fit degrades to a = 0, b = mean(target) and is
/// flagged singular.
AffineCoefficients fit_affine(std::span<const double> target, std::span<const double> source);

/// a * source + b, element-wise.
std::vector<double> recover_packet(const AffineCoefficients& coeffs,
                                   std::span<const double> source);

/// Fill every lost packet from a locally similar channel.
///
/// For each lost packet: take its nearest received neighbor packet in the
/// same channel, find the channel whose collocated neighbor correlates best,
/// fit an affine map on the neighbor pair and apply it to that channel's
/// collocated packet. Channels with no received packet are zero-filled.
/// Only received data is ever used as a source, so output does not depend on
/// the order in which packets are processed. Received elements are copied
/// through unchanged.
RepairResult repair_tensor(const FeatureTensor& tensor, const LossMask& mask,
                           const PacketGrid& grid, const RepairOptions& options = {});

} // namespace caltec
