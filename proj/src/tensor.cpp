#include "caltec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace caltec {

namespace {

void check_shape(const Shape& shape)
{
  if (shape.height == 0 || shape.width == 0 || shape.channels == 0)
    throw std::invalid_argument("tensor dimensions must be positive");
}

} // namespace

FeatureTensor::FeatureTensor(Shape shape) : shape_(shape), data_(shape.size(), 0.0)
{
  check_shape(shape);
}

FeatureTensor::FeatureTensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data))
{
  check_shape(shape);
  if (data_.size() != shape.size())
    throw std::invalid_argument("tensor data has " + std::to_string(data_.size()) +
                                " elements, shape needs " + std::to_string(shape.size()));
  for (std::size_t n = 0; n < data_.size(); ++n) {
    if (!std::isfinite(data_[n]))
      throw std::invalid_argument("non-finite tensor value at flat index " + std::to_string(n));
  }
}

double FeatureTensor::min() const
{
  if (data_.empty())
    throw std::logic_error("min of empty tensor");
  return *std::min_element(data_.begin(), data_.end());
}

double FeatureTensor::max() const
{
  if (data_.empty())
    throw std::logic_error("max of empty tensor");
  return *std::max_element(data_.begin(), data_.end());
}

QuantizedTensor quantize(const FeatureTensor& tensor, int bits)
{
  if (bits < 1 || bits > 16)
    throw std::invalid_argument("quantizer bit depth must be in [1, 16]");
  for (double v : tensor.values()) {
    if (!std::isfinite(v))
      throw std::invalid_argument("cannot quantize a non-finite value");
  }

  QuantizedTensor q;
  q.shape = tensor.shape();
  q.bits = bits;
  q.vmin = tensor.min();
  q.vmax = tensor.max();
  q.levels.assign(tensor.size(), 0);
  if (q.vmin == q.vmax)
    return q;

  const double range = q.vmax - q.vmin;
  const double top = static_cast<double>(q.max_level());
  const auto values = tensor.values();
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double level = std::round((values[n] - q.vmin) / range * top);
    q.levels[n] = static_cast<std::uint16_t>(std::clamp(level, 0.0, top));
  }
  return q;
}

FeatureTensor dequantize(const QuantizedTensor& q)
{
  if (q.levels.size() != q.shape.size())
    throw std::invalid_argument("quantized level count does not match shape");
  if (!(q.vmin <= q.vmax))
    throw std::invalid_argument("quantizer range has vmin > vmax");

  std::vector<double> data(q.levels.size(), q.vmin);
  if (q.vmin != q.vmax) {
    const double range = q.vmax - q.vmin;
    const double top = static_cast<double>(q.max_level());
    for (std::size_t n = 0; n < data.size(); ++n) {
      if (q.levels[n] > q.max_level())
        throw std::invalid_argument("quantized level exceeds bit depth");
      data[n] = q.vmin + static_cast<double>(q.levels[n]) / top * range;
    }
  }
  return FeatureTensor(q.shape, std::move(data));
}

double mse(const FeatureTensor& a, const FeatureTensor& b)
{
  if (a.shape() != b.shape())
    throw std::invalid_argument("mse: shape mismatch");
  const auto va = a.values();
  const auto vb = b.values();
  double sum = 0.0;
  for (std::size_t n = 0; n < va.size(); ++n) {
    const double d = va[n] - vb[n];
    sum += d * d;
  }
  return va.empty() ? 0.0 : sum / static_cast<double>(va.size());
}

double psnr(double mse_value, double peak)
{
  if (mse_value <= 0.0)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse_value);
}

} // namespace caltec
