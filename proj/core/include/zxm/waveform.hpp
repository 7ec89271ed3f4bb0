#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace zxm::waveform {

using cplx = std::complex<double>;

enum class PulseShape { kCosine, kRootRaisedCosine, kDelta };
enum class RxFilter { kIntegrateAndDump };

enum class SourceKind { kIud, kRll };

/// Symbol-sequence law for spectrum/rate experiments: i.u.d. QPSK rails or
/// max-entropy RLL(d) rails.
struct SourceLaw {
  SourceKind kind = SourceKind::kIud;
  int d = 1;  // used for kRll

  static SourceLaw iud() { return {SourceKind::kIud, 0}; }
  static SourceLaw rll(int d) { return {SourceKind::kRll, d}; }
};

/// All waveform/channel parameters pinning one experiment.
///
/// The simulation grid divides each sampling interval T_s = T/(m_tx*m) into
/// k_sim cells; continuous signals are represented by their values at cell
/// midpoints and integrals by midpoint sums, so an integrate-and-dump window
/// always covers a whole number of cells. k_sim must be even so that the
/// half-offset sampling phase (see sample_times) stays on cell boundaries.
struct ChainConfig {
  double T = 1.0;
  int m_tx = 1;   // FTN signaling factor
  int m = 1;      // receiver oversampling factor
  int k_sim = 16; // grid cells per T_s
  PulseShape pulse = PulseShape::kCosine;
  double rolloff = 0.2;    // RRC only
  double rrc_span = 8.0;   // RRC truncation, in units of T each side
  RxFilter rx_filter = RxFilter::kIntegrateAndDump;
  double n0 = 0.0;
  std::uint64_t seed = 1;

  double delta() const { return T / m_tx; }              // symbol spacing
  double ts() const { return T / (m_tx * m); }           // sampling interval
  double dt() const { return ts() / k_sim; }             // grid cell
  int cells_per_ts() const { return k_sim; }
  int cells_per_symbol() const { return m * k_sim; }
  /// Pulse support in T units, [0, support_t) after causal shift.
  double pulse_support() const;
};

/// Length-(m*N) vector of 1-bit outputs aligned to N transmit symbols.
/// Sample j of symbol n was taken at n*T/m_tx + (j+1/2)*T_s; alignment is
/// the flat index of the first sample of symbol 0.
struct QuantizedFrame {
  std::vector<cplx> y;
  std::ptrdiff_t alignment = 0;
  int m = 1;
};

/// Continuous-time signal on the simulation grid. samples[i] is the value
/// at the midpoint of cell [t0 + i*dt, t0 + (i+1)*dt).
struct GridSignal {
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<cplx> samples;
};

/// QPSK symbols (a_n + j b_n)/sqrt(2) from two +/-1 rails.
std::vector<cplx> build_symbols(std::span<const std::int8_t> a,
                                std::span<const std::int8_t> b);

/// Cosine transmit pulse sqrt(1/(3T))*(1 - cos(pi t/T)) on [0, 2T).
double cosine_pulse(double t, double T);

/// Root-raised-cosine pulse (unit continuous energy), centered at t = 0.
double rrc_pulse(double t, double T, double rolloff);

/// Transmit pulse of `cfg`, causally shifted so its support starts at 0,
/// evaluated at t. The RRC pulse is shifted by rrc_span*T.
double tx_pulse(const ChainConfig& cfg, double t);

/// Pulse train x(t) = sum_n x_n h(t - n T/m_tx) on the grid. The grid spans
/// one receive window before the first pulse through the end of the last
/// pulse, so every sample window of blocks 0..N-1 is covered.
GridSignal modulate(std::span<const cplx> symbols, const ChainConfig& cfg);

/// Integrate-and-dump receive filtering and sampling: sample (n,j), taken at
/// t = n*T/m_tx + (j+1/2)*T_s, is sqrt(m_tx/T) times the signal integral
/// over the trailing window of length T/m_tx. Returns m*num_symbols samples.
std::vector<cplx> rx_filter_and_sample(const GridSignal& sig,
                                       const ChainConfig& cfg,
                                       std::size_t num_symbols);

/// Element-wise csign: sign(Re) + j sign(Im), with sign(0) = -1.
QuantizedFrame quantize_1bit(std::span<const cplx> r, int m);
cplx csign(cplx v);

struct B90Options {
  int realizations = 128;
  std::size_t symbols = std::size_t{1} << 14;
  int cells_per_delta = 16;  // PSD grid resolution per symbol spacing
};

struct B90Result {
  double b90 = 0.0;        // two-sided 90% power containment bandwidth
  double avg_power = 0.0;  // time-averaged |x(t)|^2 over the realizations
  std::vector<double> psd_freq;  // exportable PSD estimate (optional use)
  std::vector<double> psd;
};

/// 90% power containment bandwidth of the transmit signal by averaged
/// periodogram over independent realizations of the source law.
B90Result b90_bandwidth(const ChainConfig& cfg, const SourceLaw& source,
                        const B90Options& opts, std::uint64_t seed);

/// SNR = avg transmit power / (N0 * B90).
double snr(double avg_power, double n0, double b90);

/// Time-averaged transmit power from the source autocorrelation and the
/// pulse autocorrelation: (1/Delta) * sum_m R[m] rho_h(m Delta).
double analytic_avg_power(const ChainConfig& cfg, const SourceLaw& source);

/// Draws one pair of +/-1 rail sequences from the source law.
void draw_rails(const SourceLaw& source, std::size_t n, std::mt19937_64& rng,
                std::vector<std::int8_t>& a, std::vector<std::int8_t>& b);

}  // namespace zxm::waveform
