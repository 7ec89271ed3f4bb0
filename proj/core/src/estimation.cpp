#include "zxm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zxm/channel.hpp"
#include "zxm/mathutil.hpp"
#include "zxm/rng.hpp"

namespace zxm::estimation {

std::size_t EstimationScenario::num_samples() const {
  const double extent = static_cast<double>(n_pilots - 1) + 2.0 * span;
  return static_cast<std::size_t>(std::llround(extent * m)) + 1;
}

namespace {

double sample_pulse(const EstimationScenario& sc, double tau) {
  switch (sc.pulse) {
    case waveform::PulseShape::kRootRaisedCosine:
      return std::sqrt(sc.ts()) * waveform::rrc_pulse(tau, sc.T, sc.rolloff);
    case waveform::PulseShape::kCosine:
      return std::sqrt(sc.ts()) * waveform::cosine_pulse(tau + sc.T, sc.T);
    case waveform::PulseShape::kDelta:
      // One unit tap exactly at the pilot instant.
      return std::abs(tau) < 0.5 * sc.ts() ? 1.0 : 0.0;
  }
  return 0.0;
}

double sample_time(const EstimationScenario& sc, std::size_t k) {
  return -sc.span * sc.T + static_cast<double>(k) * sc.ts();
}

}  // namespace

std::vector<cplx> pilot_train(const EstimationScenario& sc,
                              std::span<const cplx> pilots) {
  const std::size_t ns = sc.num_samples();
  std::vector<cplx> u(ns, cplx(0.0, 0.0));
  const double reach = sc.span * sc.T + std::abs(sc.eps) * sc.T + sc.ts();
  for (std::size_t k = 0; k < ns; ++k) {
    const double t = sample_time(sc, k);
    const auto n_lo = static_cast<std::ptrdiff_t>(std::floor((t - reach) / sc.T));
    const auto n_hi = static_cast<std::ptrdiff_t>(std::ceil((t + reach) / sc.T));
    cplx acc(0.0, 0.0);
    for (std::ptrdiff_t n = std::max<std::ptrdiff_t>(0, n_lo);
         n <= n_hi && n < static_cast<std::ptrdiff_t>(pilots.size()); ++n) {
      const double tau = t - static_cast<double>(n) * sc.T - sc.eps * sc.T;
      const double h = sample_pulse(sc, tau);
      if (h != 0.0) acc += pilots[static_cast<std::size_t>(n)] * h;
    }
    u[k] = acc;
  }
  return u;
}

double rotation_phase(const EstimationScenario& sc, std::size_t k,
                      double dither_k) {
  const double mid = 0.5 * static_cast<double>(sc.num_samples() - 1);
  const double tau = (static_cast<double>(k) - mid) * sc.ts();
  return sc.omega * tau + sc.phi + dither_k;
}

std::vector<cplx> draw_pilots(std::size_t n, std::mt19937_64& rng) {
  std::vector<cplx> x(n);
  std::uniform_int_distribution<int> quad(0, 3);
  const double s = 1.0 / std::sqrt(2.0);
  for (auto& v : x) {
    const int q = quad(rng);
    v = cplx(q & 1 ? s : -s, q & 2 ? s : -s);
  }
  return x;
}

UnsyncFrame unsync_frame(const EstimationScenario& sc, std::mt19937_64& rng) {
  UnsyncFrame f;
  f.pilots = draw_pilots(sc.n_pilots, rng);
  f.u = pilot_train(sc, f.pilots);
  f.dither.assign(f.u.size(), 0.0);
  if (sc.dither == DitherKind::kUniform) {
    std::uniform_real_distribution<double> unif(0.0, kTwoPi);
    for (auto& d : f.dither) d = unif(rng);
  }
  const auto noise = channel::awgn_samples(f.u.size(), sc.n0, rng);
  f.r.resize(f.u.size());
  for (std::size_t k = 0; k < f.u.size(); ++k) {
    const double theta = rotation_phase(sc, k, f.dither[k]);
    f.r[k] = f.u[k] * std::polar(1.0, theta) + noise[k];
  }
  f.y = waveform::quantize_1bit(f.r, sc.m);
  return f;
}

OutcomeDerivs outcome_derivatives(const EstimationScenario& sc, cplx u_k,
                                  double tau_k, double phi, double omega,
                                  double dither_k) {
  OutcomeDerivs out;
  const double theta = omega * tau_k + phi + dither_k;
  const cplx mk = u_k * std::polar(1.0, theta);
  const double c = std::sqrt(2.0 / sc.n0);
  const double mr = mk.real(), mi = mk.imag();
  // d m / d phi = j m ; d m / d omega = j tau m
  const double dr_dphi = -mi, di_dphi = mr;
  const double dr_dom = -tau_k * mi, di_dom = tau_k * mr;
  for (int sr = 0; sr < 2; ++sr) {
    for (int si = 0; si < 2; ++si) {
      const double gr = (sr ? 1.0 : -1.0) * c;
      const double gi = (si ? 1.0 : -1.0) * c;
      const double ar = gr * mr;
      const double ai = gi * mi;
      const double Pr = normal_cdf(ar), Pi = normal_cdf(ai);
      const double pr = normal_pdf(ar), pi_ = normal_pdf(ai);
      const int idx = sr | (si << 1);
      out.p[static_cast<std::size_t>(idx)] = Pr * Pi;
      out.dp_dphi[static_cast<std::size_t>(idx)] =
          pr * gr * dr_dphi * Pi + Pr * pi_ * gi * di_dphi;
      out.dp_domega[static_cast<std::size_t>(idx)] =
          pr * gr * dr_dom * Pi + Pr * pi_ * gi * di_dom;
    }
  }
  return out;
}

FisherInfo fisher_info_1bit(const EstimationScenario& sc,
                            std::span<const cplx> pilots, double phi,
                            double omega, const FisherOptions& opts) {
  if (sc.n0 <= 0.0) throw std::invalid_argument("fisher_info_1bit: N0 <= 0");
  const auto u = pilot_train(sc, pilots);
  const double mid = 0.5 * static_cast<double>(u.size() - 1);

  // Stratified dither draws, shared across samples for matched-seed runs.
  std::vector<double> draws;
  if (sc.dither == DitherKind::kUniform) {
    auto rng = make_stream(opts.dither_seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    draws.resize(static_cast<std::size_t>(opts.dither_draws));
    for (std::size_t s = 0; s < draws.size(); ++s)
      draws[s] = kTwoPi * (static_cast<double>(s) + unif(rng)) /
                 static_cast<double>(draws.size());
  } else {
    draws = {0.0};
  }

  FisherInfo fi;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (std::norm(u[k]) == 0.0) continue;
    const double tau = (static_cast<double>(k) - mid) * sc.ts();
    double acc[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (const double d : draws) {
      const auto od = outcome_derivatives(sc, u[k], tau, phi, omega, d);
      for (int o = 0; o < 4; ++o) {
        double p = od.p[static_cast<std::size_t>(o)];
        if (p < 1e-300) {
          p = 1e-300;
          ++fi.underflow_clamps;
        }
        const double dphi = od.dp_dphi[static_cast<std::size_t>(o)];
        const double dom = od.dp_domega[static_cast<std::size_t>(o)];
        acc[0][0] += dphi * dphi / p;
        acc[0][1] += dphi * dom / p;
        acc[1][1] += dom * dom / p;
      }
    }
    const double inv = 1.0 / static_cast<double>(draws.size());
    fi.f[0][0] += acc[0][0] * inv;
    fi.f[0][1] += acc[0][1] * inv;
    fi.f[1][1] += acc[1][1] * inv;
  }
  fi.f[1][0] = fi.f[0][1];
  return fi;
}

FisherInfo fisher_info_unquantized(const EstimationScenario& sc,
                                   std::span<const cplx> pilots, double /*phi*/,
                                   double /*omega*/) {
  if (sc.n0 <= 0.0)
    throw std::invalid_argument("fisher_info_unquantized: N0 <= 0");
  const auto u = pilot_train(sc, pilots);
  const double mid = 0.5 * static_cast<double>(u.size() - 1);
  FisherInfo fi;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double tau = (static_cast<double>(k) - mid) * sc.ts();
    const double e = std::norm(u[k]);
    fi.f[0][0] += e;
    fi.f[0][1] += tau * e;
    fi.f[1][1] += tau * tau * e;
  }
  const double scale = 2.0 / sc.n0;
  fi.f[0][0] *= scale;
  fi.f[0][1] *= scale;
  fi.f[1][1] *= scale;
  fi.f[1][0] = fi.f[0][1];
  return fi;
}

double chi_loss(const EstimationScenario& sc, std::span<const cplx> pilots,
                double phi, const FisherOptions& opts) {
  const auto fy = fisher_info_1bit(sc, pilots, phi, 0.0, opts);
  const auto fr = fisher_info_unquantized(sc, pilots, phi, 0.0);
  if (fr.phi_phi() <= 0.0 || fy.phi_phi() <= 0.0)
    throw std::runtime_error("chi_loss: singular Fisher information");
  return fy.phi_phi() / fr.phi_phi();
}

double crlb_phase_bound(double es_over_n0, std::size_t n, int m,
                        CrlbRegime regime, double c1, double c2) {
  if (es_over_n0 <= 0.0 || n == 0 || m <= 0)
    throw std::invalid_argument("crlb_phase_bound: non-positive input");
  if (regime == CrlbRegime::kLow) {
    return 1.0 / ((4.0 / kPi) * es_over_n0 * static_cast<double>(n));
  }
  const double fi = 2.0 * c1 / std::sqrt(2.0 * kPi * kPi * kPi * c2) *
                    std::sqrt(es_over_n0);
  return 1.0 / (fi * static_cast<double>(n) * std::sqrt(static_cast<double>(m)));
}

LsEstimate ls_phase_estimate(std::span<const cplx> y, std::span<const cplx> u,
                             std::span<const double> dither) {
  if (y.size() != u.size() || y.size() != dither.size())
    throw std::invalid_argument("ls_phase_estimate: length mismatch");
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < y.size(); ++k)
    acc += std::conj(u[k]) * std::polar(1.0, -dither[k]) * y[k];
  LsEstimate est;
  if (acc == cplx(0.0, 0.0)) {
    est.erasure = true;
    return est;
  }
  est.phi_hat = std::arg(acc);
  return est;
}

MseResult mc_mse(const EstimationScenario& sc, std::size_t trials,
                 std::uint64_t seed, double ci_level) {
  if (trials < 2) throw std::invalid_argument("mc_mse: need at least 2 trials");
  std::vector<double> sq(trials, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = make_stream(seed, t);
    const auto f = unsync_frame(sc, rng);
    const auto est = ls_phase_estimate(f.y.y, f.u, f.dither);
    const double err = est.erasure ? kPi : wrap_angle(est.phi_hat - sc.phi);
    sq[t] = err * err;
  }
  MseResult res;
  res.trials = trials;
  res.mse = mean_of(sq);

  auto rng = make_stream(seed, 0xC1C1ULL);
  std::uniform_int_distribution<std::size_t> pick(0, trials - 1);
  std::vector<double> means(200);
  for (auto& mv : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < trials; ++i) s += sq[pick(rng)];
    mv = s / static_cast<double>(trials);
  }
  std::sort(means.begin(), means.end());
  const double a = 0.5 * (1.0 - ci_level);
  res.ci_lo = means[static_cast<std::size_t>(a * 199)];
  res.ci_hi = means[static_cast<std::size_t>((1.0 - a) * 199)];
  return res;
}

double crlb_numeric(const EstimationScenario& sc, std::size_t pilot_draws,
                    std::uint64_t seed, const FisherOptions& opts) {
  double f_acc = 0.0;
  for (std::size_t d = 0; d < pilot_draws; ++d) {
    auto rng = make_stream(seed, d);
    const auto pilots = draw_pilots(sc.n_pilots, rng);
    f_acc += fisher_info_1bit(sc, pilots, sc.phi, sc.omega, opts).phi_phi();
  }
  return static_cast<double>(pilot_draws) / f_acc;
}

}  // namespace zxm::estimation
