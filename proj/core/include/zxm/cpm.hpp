#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "zxm/mathutil.hpp"
#include "zxm/rate.hpp"

namespace zxm::cpm {

using cplx = std::complex<double>;

/// CPFSK configuration: h = 1/M_cpm, memory 1, initial phase pi/M_cpm,
/// even alphabet {+-1, +-3, ..., +-(M_cpm-1)}.
struct CpmConfig {
  int m_cpm = 4;   // even alphabet size
  int m = 1;       // receiver oversampling factor
  int n_if_c = 0;  // n_IF = c * h_cpm with integer c (time-invariant tilt)
  double T = 1.0;
  double es = 1.0;

  double h() const { return 1.0 / m_cpm; }
  double phi0() const { return kPi / m_cpm; }
  double amplitude() const { return std::sqrt(2.0 * es / T); }
  double n_if() const { return n_if_c * h(); }
  /// Rimoldi tilt Delta f = h (M_cpm - 1) / (2T).
  double delta_f() const { return h() * (m_cpm - 1) / (2.0 * T); }
  double f_if() const { return delta_f() + n_if() / T; }
};

/// CPFSK phase smoothing response (memory 1): ramp 0 -> 1/2 over (0, T].
double phase_smoothing(double t, double T);

/// Phase phi(t) = 2 pi h sum_n alpha_n q(t - nT, T) + phi0.
double cpfsk_phase(std::span<const int> alphas, double t, const CpmConfig& cfg);

/// f_IF = Delta f + n_IF / T.
double tilted_if(const CpmConfig& cfg);

/// Minimum IF index for full symbol resolution: ceil(1/(4h) - 1) * h.
double n_if_min(double h_cpm);
int n_if_min_c(double h_cpm);  // same, in units of h

struct NdResult {
  double nd = 0.0;       // average distinguishable paths per T
  double log2_nd = 0.0;
  int states = 0;        // reachable tilted phase states
};

/// Distinguishable-path count in the noise- and distortion-free setting:
/// half-offset samples of c(t) e^{j 2 pi f_IF t} at t = (k+1/2) T/M within
/// one slot, csign-quantized; counts distinct sign vectors over the input
/// alphabet, averaged uniformly over reachable start states.
NdResult count_distinguishable_paths(const CpmConfig& cfg);

struct NdSweepRow {
  int m_cpm = 0;
  int m = 0;
  double n_if = 0.0;
  double f_if = 0.0;
  double log2_nd = 0.0;
};

std::vector<NdSweepRow> nd_sweep(const CpmConfig& cfg,
                                 std::span<const int> m_values,
                                 std::span<const int> c_values);

enum class CpmRxFilter {
  kDelta,  // ideal sampling of the tilted signal, i.i.d. noise
  kRect,   // sqrt(2/T) rect window of length T/2 modulated to f_IF
};

struct CpmRateOptions {
  CpmRxFilter filter = CpmRxFilter::kRect;
  std::size_t segment_symbols = std::size_t{1} << 14;
  int bootstrap_blocks = 20;
  int bootstrap_resamples = 200;
  int grid_cells_per_t = 256;  // branch-mean integration grid (rect filter)
};

/// Auxiliary-channel lower bound on the CPM achievable rate with i.u.d.
/// symbols on the tilted trellis (state: phase state, plus previous symbol
/// when the receive window reaches into the previous slot).
rate::RateEstimate cpm_rate(const CpmConfig& cfg, double n0,
                            std::size_t n_symbols, std::uint64_t seed,
                            const CpmRateOptions& opts = {});

}  // namespace zxm::cpm
