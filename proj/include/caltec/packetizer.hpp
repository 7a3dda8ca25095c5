#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "caltec/channel.hpp"
#include "caltec/tensor.hpp"

namespace caltec {

/// Partition of each channel into packets of r consecutive rows.
struct PacketGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t rows_per_packet = 1;
  std::size_t packets_per_channel = 0; ///< ceil(height / rows_per_packet)
  std::size_t pad_rows = 0;            ///< zero rows appended to the last packet

  std::size_t row_begin(std::size_t packet) const noexcept { return packet * rows_per_packet; }
  std::size_t row_end(std::size_t packet) const noexcept
  {
    const std::size_t end = (packet + 1) * rows_per_packet;
    return end < height ? end : height;
  }
  /// Real (non-padding) rows in a packet.
  std::size_t valid_rows(std::size_t packet) const noexcept
  {
    return row_end(packet) - row_begin(packet);
  }
  std::size_t packet_of_row(std::size_t row) const noexcept { return row / rows_per_packet; }
  std::size_t packet_length() const noexcept { return rows_per_packet * width; }

  friend bool operator==(const PacketGrid&, const PacketGrid&) = default;
};

PacketGrid make_grid(std::size_t height, std::size_t width, std::size_t rows_per_packet);

/// Per-packet delivery flags, shape (channels, packets_per_channel).
class LossMask {
public:
  LossMask() = default;
  LossMask(std::size_t channels, std::size_t packets, bool received = true);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t packets() const noexcept { return packets_; }

  bool received(std::size_t channel, std::size_t packet) const noexcept
  {
    return flags_[channel * packets_ + packet] != 0;
  }
  void set(std::size_t channel, std::size_t packet, bool received) noexcept
  {
    flags_[channel * packets_ + packet] = received ? 1 : 0;
  }

  std::size_t lost_count() const noexcept;
  bool channel_lost(std::size_t channel) const noexcept;

  /// Row-major (channel, packet) flags, 1 = received.
  std::span<const std::uint8_t> flags() const noexcept { return flags_; }

  friend bool operator==(const LossMask&, const LossMask&) = default;

private:
  std::size_t channels_ = 0;
  std::size_t packets_ = 0;
  std::vector<std::uint8_t> flags_;
};

/// Mask as an NPY uint8 matrix (channels, packets).
std::vector<std::byte> serialize_mask(const LossMask& mask);
LossMask parse_mask(std::span<const std::byte> image);
void save_mask(const LossMask& mask, const std::filesystem::path& path);
LossMask load_mask(const std::filesystem::path& path);

/// Throws std::invalid_argument unless the mask matches the tensor and grid.
void check_mask(const FeatureTensor& tensor, const PacketGrid& grid, const LossMask& mask);

/// Dense row-major 2-D block.
template <typename T>
struct Block {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  Block() = default;
  Block(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, T{}) {}
  Block(std::initializer_list<std::initializer_list<T>> init)
      : rows(init.size()), cols(init.size() ? init.begin()->size() : 0)
  {
    values.reserve(rows * cols);
    for (const auto& row : init) {
      if (row.size() != cols)
        throw std::invalid_argument("ragged block initializer");
      values.insert(values.end(), row.begin(), row.end());
    }
  }

  T& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  friend bool operator==(const Block&, const Block&) = default;
};

/// Row-major flattening of an r x w packet.
template <typename T>
std::vector<T> vectorize(const Block<T>& block)
{
  return block.values;
}

template <typename T>
Block<T> reshape(std::span<const T> vec, std::size_t rows, std::size_t cols)
{
  if (vec.size() != rows * cols)
    throw std::invalid_argument("reshape: length does not match rows * cols");
  Block<T> b(rows, cols);
  b.values.assign(vec.begin(), vec.end());
  return b;
}

/// Packet `packet` of channel `channel` as an r x w block, zero-padded past the last row.
Block<double> extract_block(const FeatureTensor& tensor, const PacketGrid& grid,
                            std::size_t packet, std::size_t channel);

/// Order in which packets enter the channel.
enum class TransmissionOrder {
  channel_major, ///< position = channel * packets_per_channel + packet
  row_major,     ///< position = packet * channels + channel
};

struct PacketId {
  std::size_t channel = 0;
  std::size_t index = 0;
  friend bool operator==(const PacketId&, const PacketId&) = default;
};

std::size_t transmission_position(const PacketGrid& grid, std::size_t channels, PacketId id,
                                  TransmissionOrder order);
PacketId packet_at(const PacketGrid& grid, std::size_t channels, std::size_t position,
                   TransmissionOrder order);

struct Packet {
  PacketId id;
  Block<std::uint16_t> payload; ///< r x w quantized levels
};

/// Everything the receiver needs: the packets in transmission order plus
/// tensor geometry and dequantization side information.
struct Packetization {
  PacketGrid grid;
  Shape shape;
  TransmissionOrder order = TransmissionOrder::channel_major;
  int bits = 8;
  double vmin = 0.0;
  double vmax = 0.0;
  std::vector<Packet> packets;
};

Packetization packetize(const QuantizedTensor& q, std::size_t rows_per_packet,
                        TransmissionOrder order = TransmissionOrder::channel_major);

struct Reassembly {
  FeatureTensor tensor; ///< dequantized received data, zeros where lost
  LossMask mask;
};

/// received[n] applies to packets[n]. Throws std::invalid_argument on a length mismatch.
Reassembly reassemble(const Packetization& packets, std::span<const std::uint8_t> received);
Reassembly reassemble(const Packetization& packets, const ChannelTrace& trace);

} // namespace caltec
