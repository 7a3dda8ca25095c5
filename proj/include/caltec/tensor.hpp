#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace caltec {

/// Dimensions of an h x w x c feature tensor.
struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const noexcept { return height * width * channels; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Real-valued feature tensor stored row-major as (row, column, channel).
///
/// All values are finite; construction rejects NaN and infinities. Element
/// (y, x, k) lives at offset (y * width + x) * channels + k.
class FeatureTensor {
public:
  FeatureTensor() = default;

  /// Zero-filled tensor.
  explicit FeatureTensor(Shape shape);

  /// Throws std::invalid_argument on a size mismatch, a zero dimension, or a
  /// non-finite value.
  FeatureTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t channels() const noexcept { return shape_.channels; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t offset(std::size_t row, std::size_t col, std::size_t ch) const noexcept
  {
    return (row * shape_.width + col) * shape_.channels + ch;
  }

  double operator()(std::size_t row, std::size_t col, std::size_t ch) const noexcept
  {
    return data_[offset(row, col, ch)];
  }
  double& operator()(std::size_t row, std::size_t col, std::size_t ch) noexcept
  {
    return data_[offset(row, col, ch)];
  }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  double min() const;
  double max() const;

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

private:
  Shape shape_{};
  std::vector<double> data_;
};

/// Min-max quantized tensor: integer levels plus the range needed to invert.
struct QuantizedTensor {
  Shape shape{};
  int bits = 8;
  std::vector<std::uint16_t> levels; ///< same layout as FeatureTensor
  double vmin = 0.0;
  double vmax = 0.0;

  std::uint32_t max_level() const noexcept { return (1u << bits) - 1u; }
};

/// Uniform min-max quantization over the whole tensor.
///
/// q = round((x - vmin) / (vmax - vmin) * (2^bits - 1)), ties away from zero.
/// A constant tensor maps to all zeros with vmin == vmax.
QuantizedTensor quantize(const FeatureTensor& tensor, int bits = 8);

/// x = vmin + q / (2^bits - 1) * (vmax - vmin).
FeatureTensor dequantize(const QuantizedTensor& q);

/// Mean squared difference; shapes must match.
double mse(const FeatureTensor& a, const FeatureTensor& b);

/// 10 log10(peak^2 / mse). Infinite when mse is zero.
double psnr(double mse, double peak);

} // namespace caltec
