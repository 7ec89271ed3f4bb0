#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "zxm/waveform.hpp"

namespace zxm::channel {

using waveform::ChainConfig;
using waveform::cplx;
using waveform::GridSignal;
using waveform::QuantizedFrame;

enum class NoiseKind { kGridWhiteThenFiltered, kSampleIid };

/// Noise injection model. Grid mode draws white noise on the simulation
/// grid before receive filtering (filtered samples are correlated for
/// M > 1); sample-iid mode draws i.i.d. complex Gaussian samples with
/// per-real-dimension variance N0/2, as used by the estimation module.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kGridWhiteThenFiltered;
  double n0 = 0.0;
};

/// Discrete white grid noise: i.i.d. complex Gaussian cells with variance
/// N0/dt per complex cell, so a unit-energy receive filter yields sample
/// variance N0.
std::vector<cplx> awgn_grid(std::size_t len, const ChainConfig& cfg,
                            std::mt19937_64& rng);

/// i.i.d. complex Gaussian samples with per-real-dimension variance n0/2.
std::vector<cplx> awgn_samples(std::size_t len, double n0,
                               std::mt19937_64& rng);

struct FrameResult {
  std::vector<cplx> r;      // pre-quantization samples (oracles/tests only)
  QuantizedFrame frame;     // csign outputs
  std::size_t valid_from;   // first block with full symbol context
};

/// Full chain modulate -> grid noise -> rx filter -> sample -> quantize.
/// valid_from is the number of leading blocks whose sample windows include
/// the zero-padded lead-in, i.e. those to exclude from statistics.
FrameResult transmit_frame(std::span<const cplx> symbols,
                           const ChainConfig& cfg, std::mt19937_64& rng);

}  // namespace zxm::channel
