#include "caltec/packetizer.hpp"

#include <algorithm>
#include <string>

#include "caltec/npy.hpp"

namespace caltec {

PacketGrid make_grid(std::size_t height, std::size_t width, std::size_t rows_per_packet)
{
  if (rows_per_packet == 0)
    throw std::invalid_argument("rows per packet must be >= 1");
  if (height == 0 || width == 0)
    throw std::invalid_argument("packet grid needs positive height and width");
  PacketGrid g;
  g.height = height;
  g.width = width;
  g.rows_per_packet = rows_per_packet;
  g.packets_per_channel = (height + rows_per_packet - 1) / rows_per_packet;
  g.pad_rows = height % rows_per_packet == 0 ? 0 : rows_per_packet - height % rows_per_packet;
  return g;
}

LossMask::LossMask(std::size_t channels, std::size_t packets, bool received)
    : channels_(channels), packets_(packets), flags_(channels * packets, received ? 1 : 0)
{
}

std::size_t LossMask::lost_count() const noexcept
{
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{0}));
}

bool LossMask::channel_lost(std::size_t channel) const noexcept
{
  const auto row = flags_.begin() + static_cast<std::ptrdiff_t>(channel * packets_);
  return std::all_of(row, row + static_cast<std::ptrdiff_t>(packets_),
                     [](std::uint8_t f) { return f == 0; });
}

std::vector<std::byte> serialize_mask(const LossMask& mask)
{
  npy::Array a;
  a.shape = {mask.channels(), mask.packets()};
  a.dtype = npy::DType::u8;
  a.bytes.reserve(mask.flags().size());
  for (auto f : mask.flags())
    a.bytes.push_back(std::byte{f});
  return npy::serialize(a);
}

LossMask parse_mask(std::span<const std::byte> image)
{
  const npy::Array a = npy::parse(image);
  if (a.shape.size() != 2)
    throw npy::Error(npy::ErrorKind::wrong_rank, "loss mask must be 2-D (channels, packets)");
  if (a.dtype != npy::DType::u8)
    throw npy::Error(npy::ErrorKind::unsupported_dtype, "loss mask must be uint8");
  LossMask mask(a.shape[0], a.shape[1]);
  for (std::size_t ch = 0; ch < a.shape[0]; ++ch) {
    for (std::size_t p = 0; p < a.shape[1]; ++p)
      mask.set(ch, p, a.bytes[ch * a.shape[1] + p] != std::byte{0});
  }
  return mask;
}

void save_mask(const LossMask& mask, const std::filesystem::path& path)
{
  npy::write_bytes(path, serialize_mask(mask));
}

LossMask load_mask(const std::filesystem::path& path)
{
  return parse_mask(npy::read_bytes(path));
}

void check_mask(const FeatureTensor& tensor, const PacketGrid& grid, const LossMask& mask)
{
  if (grid.height != tensor.height() || grid.width != tensor.width())
    throw std::invalid_argument("packet grid does not match tensor height/width");
  if (mask.channels() != tensor.channels() || mask.packets() != grid.packets_per_channel)
    throw std::invalid_argument("loss mask shape (" + std::to_string(mask.channels()) + ", " +
                                std::to_string(mask.packets()) + ") does not match tensor (" +
                                std::to_string(tensor.channels()) + ", " +
                                std::to_string(grid.packets_per_channel) + ")");
}

Block<double> extract_block(const FeatureTensor& tensor, const PacketGrid& grid,
                            std::size_t packet, std::size_t channel)
{
  Block<double> b(grid.rows_per_packet, grid.width);
  const std::size_t begin = grid.row_begin(packet);
  for (std::size_t row = begin; row < grid.row_end(packet); ++row) {
    for (std::size_t col = 0; col < grid.width; ++col)
      b.at(row - begin, col) = tensor(row, col, channel);
  }
  return b;
}

std::size_t transmission_position(const PacketGrid& grid, std::size_t channels, PacketId id,
                                  TransmissionOrder order)
{
  if (order == TransmissionOrder::channel_major)
    return id.channel * grid.packets_per_channel + id.index;
  return id.index * channels + id.channel;
}

PacketId packet_at(const PacketGrid& grid, std::size_t channels, std::size_t position,
                   TransmissionOrder order)
{
  if (order == TransmissionOrder::channel_major)
    return {position / grid.packets_per_channel, position % grid.packets_per_channel};
  return {position % channels, position / channels};
}

Packetization packetize(const QuantizedTensor& q, std::size_t rows_per_packet,
                        TransmissionOrder order)
{
  if (q.levels.size() != q.shape.size())
    throw std::invalid_argument("packetize: quantized level count does not match shape");

  Packetization out;
  out.grid = make_grid(q.shape.height, q.shape.width, rows_per_packet);
  out.shape = q.shape;
  out.order = order;
  out.bits = q.bits;
  out.vmin = q.vmin;
  out.vmax = q.vmax;

  const auto& g = out.grid;
  const std::size_t total = q.shape.channels * g.packets_per_channel;
  out.packets.reserve(total);
  for (std::size_t pos = 0; pos < total; ++pos) {
    Packet pk;
    pk.id = packet_at(g, q.shape.channels, pos, order);
    pk.payload = Block<std::uint16_t>(g.rows_per_packet, g.width);
    const std::size_t begin = g.row_begin(pk.id.index);
    for (std::size_t row = begin; row < g.row_end(pk.id.index); ++row) {
      for (std::size_t col = 0; col < g.width; ++col)
        pk.payload.at(row - begin, col) =
            q.levels[(row * g.width + col) * q.shape.channels + pk.id.channel];
    }
    out.packets.push_back(std::move(pk));
  }
  return out;
}

Reassembly reassemble(const Packetization& packets, std::span<const std::uint8_t> received)
{
  if (received.size() != packets.packets.size())
    throw std::invalid_argument("trace length " + std::to_string(received.size()) +
                                " does not match packet count " +
                                std::to_string(packets.packets.size()));

  const auto& g = packets.grid;
  const Shape& s = packets.shape;
  QuantizedTensor q;
  q.shape = s;
  q.bits = packets.bits;
  q.vmin = packets.vmin;
  q.vmax = packets.vmax;
  q.levels.assign(s.size(), 0);

  LossMask mask(s.channels, g.packets_per_channel, false);
  for (std::size_t pos = 0; pos < packets.packets.size(); ++pos) {
    if (!received[pos])
      continue;
    const Packet& pk = packets.packets[pos];
    mask.set(pk.id.channel, pk.id.index, true);
    const std::size_t begin = g.row_begin(pk.id.index);
    for (std::size_t row = begin; row < g.row_end(pk.id.index); ++row) {
      for (std::size_t col = 0; col < g.width; ++col)
        q.levels[(row * g.width + col) * s.channels + pk.id.channel] =
            pk.payload.at(row - begin, col);
    }
  }

  FeatureTensor tensor = dequantize(q);
  // Lost elements start at zero, not at the dequantized value of level 0.
  for (std::size_t ch = 0; ch < s.channels; ++ch) {
    for (std::size_t p = 0; p < g.packets_per_channel; ++p) {
      if (mask.received(ch, p))
        continue;
      for (std::size_t row = g.row_begin(p); row < g.row_end(p); ++row) {
        for (std::size_t col = 0; col < g.width; ++col)
          tensor(row, col, ch) = 0.0;
      }
    }
  }
  return {std::move(tensor), std::move(mask)};
}

Reassembly reassemble(const Packetization& packets, const ChannelTrace& trace)
{
  return reassemble(packets, std::span<const std::uint8_t>(trace.received));
}

} // namespace caltec
