#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zxm/trellis.hpp"
#include "zxm/waveform.hpp"

namespace zxm::rate {

/// Mismatched block likelihood of one complex sample block: product over the
/// M samples and both rails of Phi(y * mu / sigma), sigma^2 = N0/2 per real
/// dimension. Sample correlation (M > 1) is deliberately ignored; the
/// auxiliary-channel bound stays valid.
double aux_block_likelihood(std::span<const waveform::cplx> mean,
                            std::span<const waveform::cplx> y, double n0);

struct RateEstimate {
  double rate_bpcu = 0.0;    // both rails, bits per channel use (per T/M_Tx)
  double std_error = 0.0;    // block-bootstrap standard error
  double rail_rate = 0.0;    // single-rail rate
  std::size_t symbols = 0;   // measured blocks
  bool ok = true;            // false on normalization failure
};

struct RateOptions {
  std::size_t segment_symbols = std::size_t{1} << 15;
  int bootstrap_blocks = 20;
  int bootstrap_resamples = 200;
};

/// Auxiliary-channel lower bound on the achievable rate, evaluated on
/// simulated realizations: (1/N)(-log2 W(y^N) + log2 W(y^N | x^N)) with the
/// forward recursion over the RLL-pruned ISI trellis. Rails are factorized
/// (real pulses decouple I and Q); the total is twice the rail rate.
RateEstimate rate_lower_bound(const waveform::ChainConfig& cfg,
                              const waveform::SourceLaw& source,
                              std::size_t n_symbols, std::uint64_t seed,
                              const RateOptions& opts = {});

/// SE = rate * M_Tx / (T * B90) in bits/s/Hz.
double spectral_efficiency(double rate_bpcu, const waveform::ChainConfig& cfg,
                           double b90);

}  // namespace zxm::rate
