#include "caltec/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "caltec/rng.hpp"

namespace caltec {

namespace {

constexpr int waves_per_field = 4;

struct PlaneWave {
  double amplitude;
  double freq_rows; // cycles over the full height
  double freq_cols; // cycles over the full width
  double phase;
};

} // namespace

SyntheticTensor gen_synthetic(std::size_t height, std::size_t width, std::size_t channels,
                              std::size_t base_channels, double noise_sigma, std::uint64_t seed)
{
  if (height == 0 || width == 0 || channels == 0)
    throw std::invalid_argument("gen_synthetic: dimensions must be positive");
  if (base_channels < 1 || base_channels > channels)
    throw std::invalid_argument("gen_synthetic: base_channels must be in [1, channels]");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw std::invalid_argument("gen_synthetic: noise_sigma must be finite and >= 0");

  Rng rng(seed);
  SyntheticTensor out{FeatureTensor(Shape{height, width, channels}), {}};
  FeatureTensor& t = out.tensor;
  out.origins.resize(channels);

  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < base_channels; ++k) {
    PlaneWave waves[waves_per_field];
    for (auto& wv : waves) {
      wv.amplitude = rng.uniform(0.3, 1.0);
      wv.freq_rows = rng.uniform(0.2, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      wv.freq_cols = rng.uniform(0.2, 1.5);
      wv.phase = rng.uniform(0.0, two_pi);
    }
    const double level = rng.uniform(-1.0, 1.0);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        double v = level;
        for (const auto& wv : waves) {
          v += wv.amplitude *
               std::sin(two_pi * (wv.freq_rows * static_cast<double>(y) / static_cast<double>(height) +
                                  wv.freq_cols * static_cast<double>(x) / static_cast<double>(width)) +
                        wv.phase);
        }
        t(y, x, k) = v;
      }
    }
    out.origins[k] = ChannelOrigin{false, k, 1.0, 0.0};
  }

  for (std::size_t k = base_channels; k < channels; ++k) {
    ChannelOrigin origin;
    origin.derived = true;
    origin.source = static_cast<std::size_t>(rng.below(base_channels));
    origin.scale = rng.uniform(0.5, 2.0);
    origin.offset = rng.uniform(-1.0, 1.0);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        double v = origin.scale * t(y, x, origin.source) + origin.offset;
        if (noise_sigma > 0.0)
          v += noise_sigma * rng.normal();
        t(y, x, k) = v;
      }
    }
    out.origins[k] = origin;
  }
  return out;
}

} // namespace caltec
