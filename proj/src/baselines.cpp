#include "caltec/baselines.hpp"

#include <optional>
#include <stdexcept>

#include "fill.hpp"

namespace caltec {

RepairResult zero_fill(const FeatureTensor& tensor, const LossMask& mask, const PacketGrid& grid)
{
  check_mask(tensor, grid, mask);
  detail::Stopwatch clock;
  RepairResult result{tensor, {}};
  result.report.method = "zero_fill";
  for (std::size_t ch = 0; ch < tensor.channels(); ++ch) {
    if (mask.channel_lost(ch))
      ++result.report.zero_filled_channels;
    for (std::size_t p = 0; p < grid.packets_per_channel; ++p) {
      if (!mask.received(ch, p))
        detail::fill_packet(result.tensor, grid, p, ch, 0.0);
    }
  }
  result.report.repair_ms = clock.elapsed_ms();
  return result;
}

RepairResult neighbor_copy(const FeatureTensor& tensor, const LossMask& mask,
                           const PacketGrid& grid)
{
  check_mask(tensor, grid, mask);
  detail::Stopwatch clock;
  RepairResult result{tensor, {}};
  result.report.method = "neighbor_copy";
  for (std::size_t ch = 0; ch < tensor.channels(); ++ch) {
    if (mask.channel_lost(ch)) {
      detail::zero_channel(result.tensor, ch);
      ++result.report.zero_filled_channels;
      continue;
    }
    for (std::size_t p = 0; p < grid.packets_per_channel; ++p) {
      if (mask.received(ch, p))
        continue;
      const auto choice = select_neighbor(mask, p, ch);
      detail::copy_packet(tensor, result.tensor, grid, *choice.neighbor, p, ch);
      ++result.report.repaired;
    }
  }
  result.report.repair_ms = clock.elapsed_ms();
  return result;
}

RepairResult linear_interp(const FeatureTensor& tensor, const LossMask& mask,
                           const PacketGrid& grid)
{
  check_mask(tensor, grid, mask);
  detail::Stopwatch clock;
  RepairResult result{tensor, {}};
  result.report.method = "linear_interp";
  FeatureTensor& out = result.tensor;

  std::vector<std::optional<std::size_t>> above(grid.height);
  std::vector<std::optional<std::size_t>> below(grid.height);
  for (std::size_t ch = 0; ch < tensor.channels(); ++ch) {
    if (mask.channel_lost(ch)) {
      detail::zero_channel(out, ch);
      ++result.report.zero_filled_channels;
      continue;
    }
    auto row_ok = [&](std::size_t row) { return mask.received(ch, grid.packet_of_row(row)); };

    std::optional<std::size_t> last;
    for (std::size_t row = 0; row < grid.height; ++row) {
      if (row_ok(row))
        last = row;
      above[row] = last;
    }
    last.reset();
    for (std::size_t row = grid.height; row-- > 0;) {
      if (row_ok(row))
        last = row;
      below[row] = last;
    }

    for (std::size_t row = 0; row < grid.height; ++row) {
      if (row_ok(row))
        continue;
      const auto up = above[row];
      const auto down = below[row];
      for (std::size_t col = 0; col < grid.width; ++col) {
        double v;
        if (up && down) {
          const double t = static_cast<double>(row - *up) / static_cast<double>(*down - *up);
          const double a = tensor(*up, col, ch);
          const double b = tensor(*down, col, ch);
          v = a + (b - a) * t;
        } else {
          v = tensor(up ? *up : *down, col, ch);
        }
        out(row, col, ch) = v;
      }
    }
    for (std::size_t p = 0; p < grid.packets_per_channel; ++p) {
      if (!mask.received(ch, p))
        ++result.report.repaired;
    }
  }
  result.report.repair_ms = clock.elapsed_ms();
  return result;
}

std::string_view method_name(Method method) noexcept
{
  switch (method) {
  case Method::caltec:
    return "caltec";
  case Method::zero_fill:
    return "zero_fill";
  case Method::neighbor_copy:
    return "neighbor_copy";
  case Method::linear_interp:
    return "linear_interp";
  }
  return "unknown";
}

Method parse_method(std::string_view name)
{
  for (Method m : all_methods()) {
    if (method_name(m) == name)
      return m;
  }
  throw std::invalid_argument("unknown completion method '" + std::string(name) +
                              "' (expected caltec, zero_fill, neighbor_copy or linear_interp)");
}

const std::vector<Method>& all_methods()
{
  static const std::vector<Method> methods = {Method::caltec, Method::zero_fill,
                                              Method::neighbor_copy, Method::linear_interp};
  return methods;
}

RepairResult complete(Method method, const FeatureTensor& tensor, const LossMask& mask,
                      const PacketGrid& grid, const RepairOptions& options)
{
  switch (method) {
  case Method::caltec:
    return repair_tensor(tensor, mask, grid, options);
  case Method::zero_fill:
    return zero_fill(tensor, mask, grid);
  case Method::neighbor_copy:
    return neighbor_copy(tensor, mask, grid);
  case Method::linear_interp:
    return linear_interp(tensor, mask, grid);
  }
  throw std::invalid_argument("unknown completion method");
}

} // namespace caltec
