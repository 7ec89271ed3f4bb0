#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "zxm/waveform.hpp"

namespace zxm::estimation {

using waveform::cplx;

enum class DitherKind { kNone, kUniform };

/// Unsynchronized pilot scenario: known i.i.d. QPSK pilots at spacing T
/// (no FTN), sample-iid noise (brickwall receive filter matched to the
/// sampling rate), offsets (eps, phi, Omega) and optional phase dither.
///
/// Samples run at rate M/T over the pilot span plus the pulse tails; sample
/// amplitudes carry a sqrt(T_s) factor so the discrete per-pilot energy
/// equals Es for every oversampling factor (the bandlimited pulse train
/// then satisfies sum |u_k|^2 ~ N*Es, making the unquantized FI independent
/// of M as it must be).
struct EstimationScenario {
  std::size_t n_pilots = 100;
  int m = 1;  // oversampling factor
  waveform::PulseShape pulse = waveform::PulseShape::kRootRaisedCosine;
  double rolloff = 0.2;
  double span = 8.0;  // pulse truncation in T units each side
  double T = 1.0;
  double eps = 0.0;    // timing offset, fraction of T (known)
  double phi = 0.0;    // phase offset
  double omega = 0.0;  // frequency offset, rad/s
  DitherKind dither = DitherKind::kNone;
  double es = 1.0;
  double n0 = 1.0;

  double ts() const { return T / m; }
  /// Total sample count (pilot span plus one pulse span of margin).
  std::size_t num_samples() const;
};

/// Noiseless pulse-train samples u_k for known pilots, before rotation.
std::vector<cplx> pilot_train(const EstimationScenario& sc,
                              std::span<const cplx> pilots);

/// Rotation phase of sample k: Omega*tau_k + phi + dither_k, with tau_k
/// centered on the observation window.
double rotation_phase(const EstimationScenario& sc, std::size_t k,
                      double dither_k);

struct UnsyncFrame {
  std::vector<cplx> pilots;
  std::vector<cplx> u;       // noiseless, unrotated
  std::vector<cplx> r;       // rotated + noise
  waveform::QuantizedFrame y;
  std::vector<double> dither;
};

/// Draws pilots, dither and noise; returns the full unsynchronized frame.
UnsyncFrame unsync_frame(const EstimationScenario& sc, std::mt19937_64& rng);

struct FisherInfo {
  std::array<std::array<double, 2>, 2> f{};  // [phi, omega] x [phi, omega]
  std::size_t underflow_clamps = 0;
  double phi_phi() const { return f[0][0]; }
};

struct FisherOptions {
  int dither_draws = 10000;        // Monte Carlo draws per sample (stratified)
  std::uint64_t dither_seed = 11;  // matched-seed averaging
};

/// Fisher information of the 1-bit outputs for (phi, Omega) at the given
/// point, with known pilots and timing. Dither-averaged when the scenario
/// dithers.
FisherInfo fisher_info_1bit(const EstimationScenario& sc,
                            std::span<const cplx> pilots, double phi,
                            double omega, const FisherOptions& opts = {});

/// Fisher information of the unquantized received signal (complex Gaussian).
FisherInfo fisher_info_unquantized(const EstimationScenario& sc,
                                   std::span<const cplx> pilots, double phi,
                                   double omega);

/// Per-outcome probabilities and their phi/Omega derivatives for sample k;
/// exposed for the derivative self-check. outcome = (sr>0) | (si>0)<<1.
struct OutcomeDerivs {
  std::array<double, 4> p{};
  std::array<double, 4> dp_dphi{};
  std::array<double, 4> dp_domega{};
};
OutcomeDerivs outcome_derivatives(const EstimationScenario& sc, cplx u_k,
                                  double tau_k, double phi, double omega,
                                  double dither_k);

/// chi(phi) = F_y,phiphi / F_r,phiphi (the CRLB ratio for Omega known).
double chi_loss(const EstimationScenario& sc, std::span<const cplx> pilots,
                double phi, const FisherOptions& opts = {});

enum class CrlbRegime { kLow, kHigh };

/// Closed-form lower bounds on the phase CRLB:
///   low SNR:  ((4/pi) Es/N0)^-1 / N
///   high SNR: ((2 c1 / sqrt(2 pi^3 c2)) sqrt(Es/N0))^-1 / (N sqrt(M))
/// c1, c2 are calibration constants (defaults 1,1 are placeholders; see
/// README).
double crlb_phase_bound(double es_over_n0, std::size_t n, int m,
                        CrlbRegime regime, double c1 = 1.0, double c2 = 1.0);

struct LsEstimate {
  double phi_hat = 0.0;
  bool erasure = false;
};

/// Least-squares phase estimate arg(sum conj(u_k) e^{-j dither_k} y_k).
LsEstimate ls_phase_estimate(std::span<const cplx> y, std::span<const cplx> u,
                             std::span<const double> dither);

struct MseResult {
  double mse = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t trials = 0;
};

/// Monte Carlo MSE of the LS estimator: wrapped phase-error second moment
/// with a percentile-bootstrap confidence interval. Trials draw fresh
/// pilots, dither and noise from per-trial streams.
MseResult mc_mse(const EstimationScenario& sc, std::size_t trials,
                 std::uint64_t seed, double ci_level = 0.95);

/// Numeric CRLB 1/F_y,phiphi with pilots averaged over `pilot_draws` draws.
double crlb_numeric(const EstimationScenario& sc, std::size_t pilot_draws,
                    std::uint64_t seed, const FisherOptions& opts = {});

/// i.i.d. QPSK pilots.
std::vector<cplx> draw_pilots(std::size_t n, std::mt19937_64& rng);

}  // namespace zxm::estimation
