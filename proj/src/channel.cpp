#include "caltec/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "caltec/npy.hpp"
#include "caltec/rng.hpp"

namespace caltec {

GEParams ge_convert(double burst_loss_prob, double mean_burst_length)
{
  if (!std::isfinite(burst_loss_prob) || burst_loss_prob < 0.0 || burst_loss_prob >= 1.0)
    throw std::invalid_argument("burst loss probability must be in [0, 1), got " +
                                std::to_string(burst_loss_prob));
  if (!std::isfinite(mean_burst_length) || mean_burst_length < 1.0)
    throw std::invalid_argument("average burst length must be >= 1, got " +
                                std::to_string(mean_burst_length));

  GEParams p;
  p.burst_loss_prob = burst_loss_prob;
  p.mean_burst_length = mean_burst_length;
  p.bad_to_good = 1.0 / mean_burst_length;
  p.good_to_bad = burst_loss_prob / (mean_burst_length * (1.0 - burst_loss_prob));
  if (p.good_to_bad > 1.0)
    throw std::invalid_argument("inadmissible (P_B, L_B): Good->Bad probability " +
                                std::to_string(p.good_to_bad) + " exceeds 1");
  p.bad_to_bad = 1.0 - p.bad_to_good;
  p.good_to_good = 1.0 - p.good_to_bad;
  return p;
}

ChannelTrace gen_trace(const GEParams& params, std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw std::invalid_argument("gen_trace: packet count must be >= 1");

  ChannelTrace trace;
  trace.seed = seed;
  trace.params = params;
  trace.received.resize(n);

  Rng rng(seed);
  bool bad = rng.uniform() < params.stationary_bad();
  for (std::size_t k = 0; k < n; ++k) {
    trace.received[k] = bad ? 0 : 1;
    const double u = rng.uniform();
    bad = bad ? (u >= params.bad_to_good) : (u < params.good_to_bad);
  }
  return trace;
}

TraceStats trace_stats(const std::vector<std::uint8_t>& received)
{
  if (received.empty())
    throw std::invalid_argument("trace_stats: empty trace");

  TraceStats s;
  bool in_burst = false;
  for (auto r : received) {
    if (r == 0) {
      ++s.lost;
      if (!in_burst)
        ++s.burst_count;
      in_burst = true;
    } else {
      in_burst = false;
    }
  }
  s.loss_fraction = static_cast<double>(s.lost) / static_cast<double>(received.size());
  s.mean_burst_length =
      s.burst_count == 0 ? 0.0 : static_cast<double>(s.lost) / static_cast<double>(s.burst_count);
  return s;
}

void save_trace(const ChannelTrace& trace, const std::filesystem::path& path)
{
  npy::Array a;
  a.shape = {trace.received.size()};
  a.dtype = npy::DType::u8;
  a.bytes.reserve(trace.received.size());
  for (auto r : trace.received)
    a.bytes.push_back(std::byte{static_cast<unsigned char>(r ? 1 : 0)});
  npy::write_file(path, a);
}

std::vector<std::uint8_t> load_trace(const std::filesystem::path& path)
{
  const npy::Array a = npy::read_file(path);
  if (a.shape.size() != 1)
    throw npy::Error(npy::ErrorKind::wrong_rank, "trace must be 1-D");
  if (a.dtype != npy::DType::u8)
    throw npy::Error(npy::ErrorKind::unsupported_dtype, "trace must be uint8");
  std::vector<std::uint8_t> out(a.bytes.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = a.bytes[n] != std::byte{0} ? 1 : 0;
  return out;
}

} // namespace caltec
