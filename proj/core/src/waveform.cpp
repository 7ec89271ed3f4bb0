#include "zxm/waveform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zxm/mathutil.hpp"
#include "zxm/rll.hpp"
#include "zxm/rng.hpp"

namespace zxm::waveform {

double ChainConfig::pulse_support() const {
  switch (pulse) {
    case PulseShape::kCosine: return 2.0 * T;
    case PulseShape::kRootRaisedCosine: return 2.0 * rrc_span * T;
    case PulseShape::kDelta: return dt();
  }
  return 0.0;
}

std::vector<cplx> build_symbols(std::span<const std::int8_t> a,
                                std::span<const std::int8_t> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("build_symbols: rail length mismatch");
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<cplx> x(a.size());
  for (std::size_t n = 0; n < a.size(); ++n)
    x[n] = cplx(a[n] * s, b[n] * s);
  return x;
}

double cosine_pulse(double t, double T) {
  if (t < 0.0 || t >= 2.0 * T) return 0.0;
  return std::sqrt(1.0 / (3.0 * T)) * (1.0 - std::cos(kPi * t / T));
}

double rrc_pulse(double t, double T, double rolloff) {
  const double b = rolloff;
  if (b <= 0.0) {  // plain sinc
    if (t == 0.0) return 1.0 / std::sqrt(T);
    const double x = kPi * t / T;
    return std::sin(x) / (x * std::sqrt(T));
  }
  const double eps = 1e-9 * T;
  if (std::abs(t) < eps) {
    return (1.0 + b * (4.0 / kPi - 1.0)) / std::sqrt(T);
  }
  const double tb = T / (4.0 * b);
  if (std::abs(std::abs(t) - tb) < eps) {
    const double c = b / std::sqrt(2.0 * T);
    return c * ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) +
                (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
  }
  const double u = t / T;
  const double num = std::sin(kPi * u * (1.0 - b)) +
                     4.0 * b * u * std::cos(kPi * u * (1.0 + b));
  const double den = kPi * u * (1.0 - 16.0 * b * b * u * u);
  return num / (den * std::sqrt(T));
}

double tx_pulse(const ChainConfig& cfg, double t) {
  switch (cfg.pulse) {
    case PulseShape::kCosine:
      return cosine_pulse(t, cfg.T);
    case PulseShape::kRootRaisedCosine:
      return rrc_pulse(t - cfg.rrc_span * cfg.T, cfg.T, cfg.rolloff);
    case PulseShape::kDelta:
      return (t >= 0.0 && t < cfg.dt()) ? 1.0 / std::sqrt(cfg.dt()) : 0.0;
  }
  return 0.0;
}

GridSignal modulate(std::span<const cplx> symbols, const ChainConfig& cfg) {
  if (cfg.k_sim % 2 != 0)
    throw std::invalid_argument("modulate: k_sim must be even");
  const double dt = cfg.dt();
  const double delta = cfg.delta();
  const std::size_t n_sym = symbols.size();

  // Pulse values at cell midpoints, shared by all symbol positions (symbol
  // spacing is a whole number of cells).
  const std::size_t pulse_cells =
      static_cast<std::size_t>(std::llround(cfg.pulse_support() / dt));
  std::vector<double> taps(pulse_cells);
  for (std::size_t i = 0; i < pulse_cells; ++i)
    taps[i] = tx_pulse(cfg, (static_cast<double>(i) + 0.5) * dt);

  GridSignal sig;
  sig.dt = dt;
  sig.t0 = -delta;  // one receive window of lead-in before the first pulse
  const std::size_t lead_cells = static_cast<std::size_t>(cfg.cells_per_symbol());
  const std::size_t delta_cells = lead_cells;
  // The tail must cover the last block's sample windows even when the pulse
  // is shorter than one symbol spacing (delta pulse).
  const std::size_t tail_cells = std::max(pulse_cells, delta_cells);
  sig.samples.assign(lead_cells + (n_sym > 0 ? (n_sym - 1) * delta_cells : 0) +
                         tail_cells,
                     cplx(0.0, 0.0));
  for (std::size_t n = 0; n < n_sym; ++n) {
    const std::size_t base = lead_cells + n * delta_cells;
    const cplx xn = symbols[n];
    for (std::size_t i = 0; i < pulse_cells; ++i)
      sig.samples[base + i] += xn * taps[i];
  }
  return sig;
}

std::vector<cplx> rx_filter_and_sample(const GridSignal& sig,
                                       const ChainConfig& cfg,
                                       std::size_t num_symbols) {
  if (cfg.rx_filter != RxFilter::kIntegrateAndDump)
    throw std::invalid_argument("rx_filter_and_sample: unsupported filter");
  const double dt = cfg.dt();
  const std::size_t win = static_cast<std::size_t>(cfg.cells_per_symbol());
  const double gain = std::sqrt(cfg.m_tx / cfg.T) * dt;
  std::vector<cplx> r(num_symbols * static_cast<std::size_t>(cfg.m));

  // Sample (n, j) at t = n*Delta + (j+1/2)*T_s; its window covers the `win`
  // cells ending on that boundary. Cell index of time t is (t - t0)/dt.
  const std::ptrdiff_t origin =
      static_cast<std::ptrdiff_t>(std::llround(-sig.t0 / dt));
  for (std::size_t n = 0; n < num_symbols; ++n) {
    for (int j = 0; j < cfg.m; ++j) {
      const std::ptrdiff_t end =
          origin + static_cast<std::ptrdiff_t>(n * win) +
          static_cast<std::ptrdiff_t>(j) * cfg.k_sim + cfg.k_sim / 2;
      const std::ptrdiff_t begin = end - static_cast<std::ptrdiff_t>(win);
      if (begin < 0 || end > static_cast<std::ptrdiff_t>(sig.samples.size()))
        throw std::invalid_argument("rx_filter_and_sample: window outside grid");
      cplx acc(0.0, 0.0);
      for (std::ptrdiff_t i = begin; i < end; ++i) acc += sig.samples[static_cast<std::size_t>(i)];
      r[n * static_cast<std::size_t>(cfg.m) + static_cast<std::size_t>(j)] = gain * acc;
    }
  }
  return r;
}

cplx csign(cplx v) {
  return cplx(v.real() > 0.0 ? 1.0 : -1.0, v.imag() > 0.0 ? 1.0 : -1.0);
}

QuantizedFrame quantize_1bit(std::span<const cplx> r, int m) {
  QuantizedFrame f;
  f.m = m;
  f.alignment = 0;
  f.y.resize(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) f.y[k] = csign(r[k]);
  return f;
}

void draw_rails(const SourceLaw& source, std::size_t n, std::mt19937_64& rng,
                std::vector<std::int8_t>& a, std::vector<std::int8_t>& b) {
  if (source.kind == SourceKind::kIud) {
    a.resize(n);
    b.resize(n);
    std::uniform_int_distribution<int> bit(0, 1);
    for (std::size_t k = 0; k < n; ++k) a[k] = bit(rng) ? 1 : -1;
    for (std::size_t k = 0; k < n; ++k) b[k] = bit(rng) ? 1 : -1;
    return;
  }
  const auto fsm = rll::build_fsm(source.d);
  a = rll::nrzi_encode(rll::sample_dk_sequence(fsm, n, rng));
  b = rll::nrzi_encode(rll::sample_dk_sequence(fsm, n, rng));
}

B90Result b90_bandwidth(const ChainConfig& cfg, const SourceLaw& source,
                        const B90Options& opts, std::uint64_t seed) {
  // PSD grid independent of the receiver config.
  const double delta = cfg.delta();
  const double dt = delta / opts.cells_per_delta;
  ChainConfig psd_cfg = cfg;
  psd_cfg.m = 1;
  psd_cfg.k_sim = opts.cells_per_delta;

  // FFT length: signal cells rounded up to a power of two.
  const std::size_t sig_cells =
      static_cast<std::size_t>(opts.cells_per_delta) * (opts.symbols + 1) +
      static_cast<std::size_t>(std::llround(cfg.pulse_support() / dt));
  std::size_t nfft = 1;
  while (nfft < sig_cells) nfft <<= 1;

  std::vector<cplx> buf(nfft);
  std::vector<double> psd(nfft, 0.0);
  fftw_plan plan = fftw_plan_dft_1d(
      static_cast<int>(nfft), reinterpret_cast<fftw_complex*>(buf.data()),
      reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);

  double power_acc = 0.0;
  std::vector<std::int8_t> a, b;
  for (int real = 0; real < opts.realizations; ++real) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(real));
    draw_rails(source, opts.symbols, rng, a, b);
    const auto x = build_symbols(a, b);
    const auto sig = modulate(x, psd_cfg);
    std::fill(buf.begin(), buf.end(), cplx(0.0, 0.0));
    std::copy(sig.samples.begin(), sig.samples.end(), buf.begin());
    double p = 0.0;
    for (const auto& v : sig.samples) p += std::norm(v);
    power_acc += p * dt / (static_cast<double>(opts.symbols) * delta);
    fftw_execute(plan);
    for (std::size_t k = 0; k < nfft; ++k) psd[k] += std::norm(buf[k]);
  }
  fftw_destroy_plan(plan);

  double total = 0.0;
  for (double v : psd) total += v;

  // Smallest symmetric interval [-B/2, B/2] holding 90% of the power.
  const double df = 1.0 / (static_cast<double>(nfft) * dt);
  const double target = 0.9 * total;
  double cum = psd[0];
  double b90 = 0.0;
  for (std::size_t j = 1; j <= nfft / 2; ++j) {
    double pair = psd[j];
    if (j < nfft - j) pair += psd[nfft - j];
    const double prev = cum;
    cum += pair;
    if (cum >= target) {
      const double frac = (target - prev) / (cum - prev);
      b90 = 2.0 * df * (static_cast<double>(j - 1) + frac);
      break;
    }
  }
  if (b90 == 0.0) b90 = df * static_cast<double>(nfft);  // degenerate

  B90Result res;
  res.b90 = b90;
  res.avg_power = power_acc / opts.realizations;
  res.psd_freq.resize(nfft / 2);
  res.psd.resize(nfft / 2);
  const double norm = 1.0 / (total * df);
  for (std::size_t j = 0; j < nfft / 2; ++j) {
    res.psd_freq[j] = df * static_cast<double>(j);
    double pair = psd[j];
    if (j > 0 && j < nfft - j) pair += psd[nfft - j];
    res.psd[j] = pair * norm;  // normalized two-sided density folded onto f>=0
  }
  return res;
}

double snr(double avg_power, double n0, double b90) {
  if (b90 <= 0.0) throw std::invalid_argument("snr: B90 must be positive");
  return avg_power / (n0 * b90);
}

double analytic_avg_power(const ChainConfig& cfg, const SourceLaw& source) {
  const double delta = cfg.delta();
  const double dt = cfg.T / 1024.0;
  const std::size_t pulse_cells =
      static_cast<std::size_t>(std::ceil(cfg.pulse_support() / dt));
  std::vector<double> h(pulse_cells);
  for (std::size_t i = 0; i < pulse_cells; ++i)
    h[i] = tx_pulse(cfg, (static_cast<double>(i) + 0.5) * dt);

  const int max_lag = static_cast<int>(std::ceil(cfg.pulse_support() / delta));
  std::vector<double> corr;  // level autocorrelation per symbol lag
  if (source.kind == SourceKind::kIud) {
    corr.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
    corr[0] = 1.0;
  } else {
    corr = rll::level_autocorrelation(rll::build_fsm(source.d), max_lag);
  }

  const std::ptrdiff_t lag_cells = static_cast<std::ptrdiff_t>(std::llround(delta / dt));
  double p = 0.0;
  for (int m = -max_lag; m <= max_lag; ++m) {
    const double r = corr[static_cast<std::size_t>(std::abs(m))];
    if (r == 0.0) continue;
    double rho = 0.0;
    const std::ptrdiff_t off = lag_cells * m;
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pulse_cells); ++i) {
      const std::ptrdiff_t j = i + off;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(pulse_cells)) continue;
      rho += h[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(j)];
    }
    p += r * rho * dt;
  }
  return p / delta;
}

}  // namespace zxm::waveform
