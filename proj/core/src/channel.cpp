#include "zxm/channel.hpp"

#include <cmath>

namespace zxm::channel {

std::vector<cplx> awgn_grid(std::size_t len, const ChainConfig& cfg,
                            std::mt19937_64& rng) {
  std::vector<cplx> n(len);
  if (cfg.n0 <= 0.0) return n;
  const double sigma = std::sqrt(cfg.n0 / (2.0 * cfg.dt()));
  std::normal_distribution<double> g(0.0, sigma);
  for (auto& v : n) {
    const double re = g(rng);
    const double im = g(rng);
    v = cplx(re, im);
  }
  return n;
}

std::vector<cplx> awgn_samples(std::size_t len, double n0,
                               std::mt19937_64& rng) {
  std::vector<cplx> n(len);
  if (n0 <= 0.0) return n;
  const double sigma = std::sqrt(n0 / 2.0);
  std::normal_distribution<double> g(0.0, sigma);
  for (auto& v : n) {
    const double re = g(rng);
    const double im = g(rng);
    v = cplx(re, im);
  }
  return n;
}

FrameResult transmit_frame(std::span<const cplx> symbols,
                           const ChainConfig& cfg, std::mt19937_64& rng) {
  GridSignal sig = waveform::modulate(symbols, cfg);
  if (cfg.n0 > 0.0) {
    const auto noise = awgn_grid(sig.samples.size(), cfg, rng);
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
      sig.samples[i] += noise[i];
  }
  FrameResult res;
  res.r = waveform::rx_filter_and_sample(sig, cfg, symbols.size());
  res.frame = waveform::quantize_1bit(res.r, cfg.m);

  // Blocks whose contributing symbols are not all inside the frame: the
  // effective pulse h (x) h_Rx spans pulse_support + delta, so block n
  // depends on symbols n-L..n with L below.
  const double delta = cfg.delta();
  const auto L = static_cast<std::size_t>(
      std::ceil((cfg.pulse_support() + delta) / delta)) - 1;
  res.valid_from = L;
  return res;
}

}  // namespace zxm::channel
