#pragma once

// Packet-level writes shared by the completion methods.

#include <chrono>
#include <span>

#include "caltec/packetizer.hpp"
#include "caltec/tensor.hpp"

namespace caltec::detail {

inline void fill_packet(FeatureTensor& t, const PacketGrid& g, std::size_t packet,
                        std::size_t channel, double value)
{
  for (std::size_t row = g.row_begin(packet); row < g.row_end(packet); ++row) {
    for (std::size_t col = 0; col < g.width; ++col)
      t(row, col, channel) = value;
  }
}

/// values holds the packet row-major from its first row; entries for padding rows are ignored.
inline void write_packet(FeatureTensor& t, const PacketGrid& g, std::size_t packet,
                         std::size_t channel, std::span<const double> values)
{
  const std::size_t begin = g.row_begin(packet);
  for (std::size_t row = begin; row < g.row_end(packet); ++row) {
    for (std::size_t col = 0; col < g.width; ++col)
      t(row, col, channel) = values[(row - begin) * g.width + col];
  }
}

/// Row k of packet `to` takes row k of packet `from`; rows past the end of
/// `from` read as its zero padding.
inline void copy_packet(const FeatureTensor& src, FeatureTensor& dst, const PacketGrid& g,
                        std::size_t from, std::size_t to, std::size_t channel)
{
  const std::size_t to_begin = g.row_begin(to);
  const std::size_t from_begin = g.row_begin(from);
  const std::size_t from_rows = g.valid_rows(from);
  for (std::size_t row = to_begin; row < g.row_end(to); ++row) {
    const std::size_t k = row - to_begin;
    for (std::size_t col = 0; col < g.width; ++col)
      dst(row, col, channel) = k < from_rows ? src(from_begin + k, col, channel) : 0.0;
  }
}

inline void zero_channel(FeatureTensor& t, std::size_t channel)
{
  for (std::size_t row = 0; row < t.height(); ++row) {
    for (std::size_t col = 0; col < t.width(); ++col)
      t(row, col, channel) = 0.0;
  }
}

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const
  {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

} // namespace caltec::detail
