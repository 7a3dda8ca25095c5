#include "caltec/caltec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fill.hpp"

namespace caltec {

std::string to_json(const RepairReport& report)
{
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["repaired"] = report.repaired;
  j["zero_filled_channels"] = report.zero_filled_channels;
  j["neighbor_copy_fallbacks"] = report.neighbor_copy_fallbacks;
  j["singular_fits"] = report.singular_fits;
  j["constant_neighbor_fills"] = report.constant_neighbor_fills;
  j["repair_ms"] = report.repair_ms;
  return j.dump();
}

NeighborChoice select_neighbor(const LossMask& mask, std::size_t packet, std::size_t channel)
{
  NeighborChoice choice;
  choice.packet = packet;
  choice.channel = channel;
  const std::size_t n = mask.packets();
  for (std::size_t d = 1; d < n; ++d) {
    if (packet + d < n && mask.received(channel, packet + d)) {
      choice.neighbor = packet + d;
      choice.distance = d;
      return choice;
    }
    if (d <= packet && mask.received(channel, packet - d)) {
      choice.neighbor = packet - d;
      choice.distance = d;
      return choice;
    }
  }
  return choice;
}

bool is_constant(std::span<const double> v) noexcept
{
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double pearson(std::span<const double> u, std::span<const double> v)
{
  if (u.size() != v.size())
    throw std::invalid_argument("pearson: vectors differ in length");
  if (u.size() < 2)
    throw std::invalid_argument("pearson: need at least two elements");
  if (is_constant(u) || is_constant(v))
    return no_correlation;

  const double n = static_cast<double>(u.size());
  double mean_u = 0.0;
  double mean_v = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    mean_u += u[k];
    mean_v += v[k];
  }
  mean_u /= n;
  mean_v /= n;

  double cross = 0.0;
  double ss_u = 0.0;
  double ss_v = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double du = u[k] - mean_u;
    const double dv = v[k] - mean_v;
    cross += du * dv;
    ss_u += du * du;
    ss_v += dv * dv;
  }
  if (ss_u <= 0.0 || ss_v <= 0.0)
    return no_correlation;
  return std::clamp(cross / std::sqrt(ss_u * ss_v), -1.0, 1.0);
}

PacketStore::PacketStore(const FeatureTensor& tensor, const PacketGrid& grid, PaddingMode padding)
    : grid_(grid), channels_(tensor.channels()), padding_(padding)
{
  if (grid.height != tensor.height() || grid.width != tensor.width())
    throw std::invalid_argument("packet grid does not match tensor height/width");
  const std::size_t len = grid.packet_length();
  const std::size_t count = channels_ * grid.packets_per_channel;
  data_.assign(count * len, 0.0);
  constant_.assign(count, 0);

  for (std::size_t row = 0; row < grid.height; ++row) {
    const std::size_t p = grid.packet_of_row(row);
    const std::size_t within = (row - grid.row_begin(p)) * grid.width;
    for (std::size_t col = 0; col < grid.width; ++col) {
      for (std::size_t ch = 0; ch < channels_; ++ch)
        data_[(ch * grid.packets_per_channel + p) * len + within + col] = tensor(row, col, ch);
    }
  }
  for (std::size_t ch = 0; ch < channels_; ++ch) {
    for (std::size_t p = 0; p < grid.packets_per_channel; ++p)
      constant_[ch * grid.packets_per_channel + p] = is_constant(packet(p, ch)) ? 1 : 0;
  }
}

std::span<const double> PacketStore::packet(std::size_t packet, std::size_t channel) const noexcept
{
  const std::size_t len = grid_.packet_length();
  const std::size_t used =
      padding_ == PaddingMode::include ? len : grid_.valid_rows(packet) * grid_.width;
  return std::span<const double>(data_).subspan((channel * grid_.packets_per_channel + packet) * len,
                                                used);
}

std::optional<std::size_t> find_best_channel(const PacketStore& store, const LossMask& mask,
                                             std::size_t packet, std::size_t neighbor,
                                             std::size_t channel)
{
  const auto target = store.packet(neighbor, channel);
  std::optional<std::size_t> best;
  double best_score = no_correlation;
  for (std::size_t k = 0; k < store.channels(); ++k) {
    if (k == channel || !mask.received(k, packet) || !mask.received(k, neighbor))
      continue;
    if (store.constant(neighbor, k))
      continue;
    const double score = pearson(target, store.packet(neighbor, k));
    if (score == no_correlation)
      continue;
    if (!best || score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

double affine_objective(std::span<const double> target, std::span<const double> source,
                        double scale, double offset)
{
  double sum = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double r = target[k] - (scale * source[k] + offset);
    sum += r * r;
  }
  return sum;
}

AffineCoefficients fit_affine(std::span<const double> target, std::span<const double> source)
{
  if (target.size() != source.size())
    throw std::invalid_argument("fit_affine: vectors differ in length");
  if (target.size() < 2)
    throw std::invalid_argument("fit_affine: need at least two elements");

  const double n = static_cast<double>(target.size());
  double sum_s = 0.0;
  double sum_t = 0.0;
  double sum_ss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    sum_s += source[k];
    sum_t += target[k];
    sum_ss += source[k] * source[k];
  }
  const double mean_s = sum_s / n;
  const double mean_t = sum_t / n;

  // Y^T Y = [[sum s^2, sum s], [sum s, n]]. Its determinant and the first row
  // of (Y^T Y)^-1 Y^T x are evaluated on centered data to avoid cancellation.
  double centered_ss = 0.0;
  double centered_st = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double ds = source[k] - mean_s;
    centered_ss += ds * ds;
    centered_st += ds * (target[k] - mean_t);
  }
  const double det = n * centered_ss;

  AffineCoefficients c;
  if (is_constant(source) || det <= 1e-12 * n * sum_ss) {
    c.singular = true;
    c.scale = 0.0;
    c.offset = mean_t;
  } else {
    c.scale = n * centered_st / det;
    c.offset = mean_t - c.scale * mean_s;
  }
  c.residual = affine_objective(target, source, c.scale, c.offset);
  return c;
}

std::vector<double> recover_packet(const AffineCoefficients& coeffs,
                                   std::span<const double> source)
{
  std::vector<double> out(source.size());
  for (std::size_t k = 0; k < source.size(); ++k)
    out[k] = coeffs.scale * source[k] + coeffs.offset;
  return out;
}

RepairResult repair_tensor(const FeatureTensor& tensor, const LossMask& mask,
                           const PacketGrid& grid, const RepairOptions& options)
{
  check_mask(tensor, grid, mask);
  detail::Stopwatch clock;

  RepairResult result{tensor, {}};
  RepairReport& report = result.report;
  report.method = "caltec";
  if (mask.lost_count() == 0) {
    report.repair_ms = clock.elapsed_ms();
    return result;
  }

  const PacketStore store(tensor, grid, options.padding);
  FeatureTensor& out = result.tensor;
  for (std::size_t ch = 0; ch < tensor.channels(); ++ch) {
    if (mask.channel_lost(ch)) {
      detail::zero_channel(out, ch);
      ++report.zero_filled_channels;
      continue;
    }
    for (std::size_t p = 0; p < grid.packets_per_channel; ++p) {
      if (mask.received(ch, p))
        continue;
      const std::size_t neighbor = *select_neighbor(mask, p, ch).neighbor;
      const auto target = store.packet(neighbor, ch);
      ++report.repaired;

      if (store.constant(neighbor, ch)) {
        detail::fill_packet(out, grid, p, ch, target.front());
        ++report.constant_neighbor_fills;
        continue;
      }
      const auto best = find_best_channel(store, mask, p, neighbor, ch);
      if (!best) {
        detail::copy_packet(tensor, out, grid, neighbor, p, ch);
        ++report.neighbor_copy_fallbacks;
        continue;
      }
      AffineCoefficients coeffs = fit_affine(target, store.packet(neighbor, *best));
      coeffs.source_channel = best;
      if (coeffs.singular)
        ++report.singular_fits;
      detail::write_packet(out, grid, p, ch, recover_packet(coeffs, store.packet(p, *best)));
    }
  }
  report.repair_ms = clock.elapsed_ms();
  return result;
}

} // namespace caltec
