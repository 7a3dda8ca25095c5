#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "caltec/tensor.hpp"

namespace caltec {

/// How one channel of a synthetic tensor was produced.
struct ChannelOrigin {
  bool derived = false;   ///< false for the independent base channels
  std::size_t source = 0; ///< base channel index (self for base channels)
  double scale = 1.0;     ///< derived = scale * base + offset + noise
  double offset = 0.0;
};

struct SyntheticTensor {
  FeatureTensor tensor;
  std::vector<ChannelOrigin> origins;
};

/// Tensor with strong inter-channel redundancy, for exercising completion.
///
/// Channels [0, base_channels) are independent smooth fields (a sum of four
/// random low-frequency plane waves plus an offset). Every other channel is
/// scale * base + offset + N(0, noise_sigma^2) for a randomly chosen base,
/// with scale in [0.5, 2] and offset in [-1, 1]. Deterministic in seed.
SyntheticTensor gen_synthetic(std::size_t height, std::size_t width, std::size_t channels,
                              std::size_t base_channels, double noise_sigma, std::uint64_t seed);

} // namespace caltec
