#include "zxm/cpm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "zxm/channel.hpp"
#include "zxm/rng.hpp"

namespace zxm::cpm {

namespace {
constexpr double kLog2e = 1.4426950408889634;

int check_cfg(const CpmConfig& cfg) {
  if (cfg.m_cpm < 2 || cfg.m_cpm % 2 != 0)
    throw std::invalid_argument("cpm: alphabet size must be even and >= 2");
  if (cfg.m < 1) throw std::invalid_argument("cpm: oversampling must be >= 1");
  return cfg.m_cpm;
}

/// Tilted phase-state step in units of 2*pi*h: alpha odd and M_cpm-1 odd
/// make the per-symbol increment pi*h*(alpha + M_cpm - 1 + 2c) an even
/// multiple of pi*h, so states stay on the 2*pi*h lattice offset by phi0.
int state_step(const CpmConfig& cfg, int alpha) {
  const int num = alpha + cfg.m_cpm - 1 + 2 * cfg.n_if_c;
  int s = (num / 2) % cfg.m_cpm;
  if (s < 0) s += cfg.m_cpm;
  return s;
}

int alpha_of_index(const CpmConfig& cfg, int idx) {
  return 2 * idx - (cfg.m_cpm - 1);  // idx 0..M-1 -> {-(M-1), ..., +(M-1)}
}

/// Quantized sign pattern of the M half-offset samples within one slot for
/// tilted start state s and symbol alpha.
std::uint64_t sample_pattern(const CpmConfig& cfg, int s, int alpha) {
  const double h = cfg.h();
  const double fif_t = cfg.f_if() * cfg.T;
  std::uint64_t bits = 0;
  for (int j = 0; j < cfg.m; ++j) {
    const double frac = (static_cast<double>(j) + 0.5) / cfg.m;
    const double chi = cfg.phi0() + kTwoPi * h * s + kPi * h * alpha * frac +
                       kTwoPi * fif_t * frac;
    const double re = std::cos(chi);
    const double im = std::sin(chi);
    bits |= static_cast<std::uint64_t>(re > 0.0 ? 1 : 0) << (2 * j);
    bits |= static_cast<std::uint64_t>(im > 0.0 ? 1 : 0) << (2 * j + 1);
  }
  return bits;
}

std::vector<int> reachable_states(const CpmConfig& cfg) {
  std::vector<bool> seen(static_cast<std::size_t>(cfg.m_cpm), false);
  std::vector<int> todo{0};
  seen[0] = true;
  while (!todo.empty()) {
    const int s = todo.back();
    todo.pop_back();
    for (int i = 0; i < cfg.m_cpm; ++i) {
      const int t = (s + state_step(cfg, alpha_of_index(cfg, i))) % cfg.m_cpm;
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = true;
        todo.push_back(t);
      }
    }
  }
  std::vector<int> states;
  for (int s = 0; s < cfg.m_cpm; ++s)
    if (seen[static_cast<std::size_t>(s)]) states.push_back(s);
  return states;
}

}  // namespace

double phase_smoothing(double t, double T) {
  if (t <= 0.0) return 0.0;
  if (t >= T) return 0.5;
  return t / (2.0 * T);
}

double cpfsk_phase(std::span<const int> alphas, double t, const CpmConfig& cfg) {
  double acc = cfg.phi0();
  for (std::size_t n = 0; n < alphas.size(); ++n)
    acc += kTwoPi * cfg.h() *
           alphas[n] * phase_smoothing(t - static_cast<double>(n) * cfg.T, cfg.T);
  return acc;
}

double tilted_if(const CpmConfig& cfg) { return cfg.f_if(); }

double n_if_min(double h_cpm) {
  return std::ceil(1.0 / (4.0 * h_cpm) - 1.0 - 1e-12) * h_cpm;
}

int n_if_min_c(double h_cpm) {
  return static_cast<int>(std::ceil(1.0 / (4.0 * h_cpm) - 1.0 - 1e-12));
}

NdResult count_distinguishable_paths(const CpmConfig& cfg) {
  check_cfg(cfg);
  const auto states = reachable_states(cfg);
  double acc = 0.0;
  for (const int s : states) {
    std::set<std::uint64_t> pats;
    for (int i = 0; i < cfg.m_cpm; ++i)
      pats.insert(sample_pattern(cfg, s, alpha_of_index(cfg, i)));
    acc += static_cast<double>(pats.size());
  }
  NdResult res;
  res.states = static_cast<int>(states.size());
  res.nd = acc / static_cast<double>(states.size());
  res.log2_nd = std::log2(res.nd);
  return res;
}

std::vector<NdSweepRow> nd_sweep(const CpmConfig& cfg,
                                 std::span<const int> m_values,
                                 std::span<const int> c_values) {
  std::vector<NdSweepRow> rows;
  for (const int m : m_values) {
    for (const int c : c_values) {
      CpmConfig p = cfg;
      p.m = m;
      p.n_if_c = c;
      const auto nd = count_distinguishable_paths(p);
      rows.push_back({p.m_cpm, m, p.n_if(), p.f_if(), nd.log2_nd});
    }
  }
  return rows;
}

namespace {

struct CpmTrellis {
  int m_cpm = 0;
  int m = 1;
  bool with_prev = false;  // state includes the previous symbol
  int num_states = 0;
  // branch index = state * m_cpm + alpha_idx; next state per branch.
  std::vector<int> next_state;
  std::vector<cplx> means;  // [branch * m + j]
};

/// Branch means for the modulated-rect receive filter by midpoint
/// integration over the previous and current slot.
std::vector<cplx> rect_branch_means(const CpmConfig& cfg, int s, int a_prev,
                                    int alpha, int cells_per_t) {
  const double T = cfg.T;
  const double dt = T / cells_per_t;
  const double h = cfg.h();
  const double fif = cfg.f_if();
  const double theta_tilt = cfg.phi0() + kTwoPi * h * s;
  // Untilted phase at the current slot start (absolute slot time T).
  const double th1 = theta_tilt - kTwoPi * fif * T;
  const double th0 = th1 - kPi * h * a_prev;

  const int total = 2 * cells_per_t;  // tau in [0, 2T)
  std::vector<cplx> cell(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    const double tau = (i + 0.5) * dt;
    double phase;
    if (tau < T)
      phase = th0 + kPi * h * a_prev * (tau / T);
    else
      phase = th1 + kPi * h * alpha * ((tau - T) / T);
    cell[static_cast<std::size_t>(i)] = std::polar(cfg.amplitude(), phase);
  }
  const int win = cells_per_t / 2;
  const double gain = std::sqrt(2.0 / T) * dt;
  std::vector<cplx> mu(static_cast<std::size_t>(cfg.m));
  for (int j = 0; j < cfg.m; ++j) {
    const double tj = T + (j + 0.5) * T / cfg.m;
    const int end = static_cast<int>(std::llround(tj / dt));
    cplx acc(0.0, 0.0);
    for (int i = end - win; i < end; ++i) acc += cell[static_cast<std::size_t>(i)];
    mu[static_cast<std::size_t>(j)] = gain * acc * std::polar(1.0, kTwoPi * fif * tj);
  }
  return mu;
}

CpmTrellis build_cpm_trellis(const CpmConfig& cfg, const CpmRateOptions& opts) {
  CpmTrellis t;
  t.m_cpm = cfg.m_cpm;
  t.m = cfg.m;
  t.with_prev = opts.filter == CpmRxFilter::kRect;
  const int nphase = cfg.m_cpm;
  t.num_states = t.with_prev ? nphase * cfg.m_cpm : nphase;
  t.next_state.assign(static_cast<std::size_t>(t.num_states) * cfg.m_cpm, 0);
  t.means.assign(static_cast<std::size_t>(t.num_states) * cfg.m_cpm *
                     static_cast<std::size_t>(cfg.m),
                 cplx(0.0, 0.0));

  int cells = opts.grid_cells_per_t;
  while (cells % (2 * cfg.m) != 0) ++cells;

  for (int st = 0; st < t.num_states; ++st) {
    const int s = t.with_prev ? st / cfg.m_cpm : st;
    const int ap_idx = t.with_prev ? st % cfg.m_cpm : 0;
    const int a_prev = alpha_of_index(cfg, ap_idx);
    for (int ai = 0; ai < cfg.m_cpm; ++ai) {
      const int alpha = alpha_of_index(cfg, ai);
      const int s_next = (s + state_step(cfg, alpha)) % cfg.m_cpm;
      const int st_next = t.with_prev ? s_next * cfg.m_cpm + ai : s_next;
      const std::size_t b = static_cast<std::size_t>(st) * cfg.m_cpm + ai;
      t.next_state[b] = st_next;
      std::vector<cplx> mu;
      if (opts.filter == CpmRxFilter::kDelta) {
        mu.resize(static_cast<std::size_t>(cfg.m));
        const double fif_t = cfg.f_if() * cfg.T;
        for (int j = 0; j < cfg.m; ++j) {
          const double frac = (j + 0.5) / cfg.m;
          const double chi = cfg.phi0() + kTwoPi * cfg.h() * s +
                             kPi * cfg.h() * alpha * frac + kTwoPi * fif_t * frac;
          mu[static_cast<std::size_t>(j)] = std::polar(cfg.amplitude(), chi);
        }
      } else {
        mu = rect_branch_means(cfg, s, a_prev, alpha, cells);
      }
      for (int j = 0; j < cfg.m; ++j)
        t.means[b * static_cast<std::size_t>(cfg.m) + static_cast<std::size_t>(j)] =
            mu[static_cast<std::size_t>(j)];
    }
  }
  return t;
}

struct CpmTables {
  int m = 1;
  std::vector<double> log_re_pos, log_re_neg, log_im_pos, log_im_neg;
  double loglik(std::size_t branch, std::uint32_t re_bits,
                std::uint32_t im_bits) const {
    double s = 0.0;
    const std::size_t base = branch * static_cast<std::size_t>(m);
    for (int j = 0; j < m; ++j) {
      s += ((re_bits >> j) & 1u) ? log_re_pos[base + j] : log_re_neg[base + j];
      s += ((im_bits >> j) & 1u) ? log_im_pos[base + j] : log_im_neg[base + j];
    }
    return s;
  }
};

CpmTables build_cpm_tables(const CpmTrellis& t, double n0) {
  CpmTables bt;
  bt.m = t.m;
  const double sigma = std::sqrt(n0 / 2.0);
  const std::size_t n = t.means.size();
  bt.log_re_pos.resize(n);
  bt.log_re_neg.resize(n);
  bt.log_im_pos.resize(n);
  bt.log_im_neg.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = t.means[i].real() / sigma;
    const double ai = t.means[i].imag() / sigma;
    bt.log_re_pos[i] = log_normal_cdf(ar);
    bt.log_re_neg[i] = log_normal_cdf(-ar);
    bt.log_im_pos[i] = log_normal_cdf(ai);
    bt.log_im_neg[i] = log_normal_cdf(-ai);
  }
  return bt;
}

}  // namespace

rate::RateEstimate cpm_rate(const CpmConfig& cfg, double n0,
                            std::size_t n_symbols, std::uint64_t seed,
                            const CpmRateOptions& opts) {
  check_cfg(cfg);
  if (n0 <= 0.0) throw std::invalid_argument("cpm_rate: N0 must be > 0");
  const auto t = build_cpm_trellis(cfg, opts);
  const auto bt = build_cpm_tables(t, n0);
  const int mc = cfg.m_cpm;
  const std::size_t seg = opts.segment_symbols;
  const std::size_t n_frames = (n_symbols + seg - 1) / seg;

  int cells = opts.grid_cells_per_t;
  while (cells % (2 * cfg.m) != 0) ++cells;
  const double dt = cfg.T / cells;
  const int win = cells / 2;
  const double gain = std::sqrt(2.0 / cfg.T) * dt;

  std::vector<double> increments;
  increments.reserve(n_symbols);
  std::vector<double> alpha_vec(static_cast<std::size_t>(t.num_states));
  std::vector<double> next_vec(static_cast<std::size_t>(t.num_states));

  rate::RateEstimate est;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t count = std::min(seg, n_symbols - f * seg);
    auto rng = make_stream(seed, f);
    std::uniform_int_distribution<int> pick(0, mc - 1);

    // Stationary start: uniform phase state, uniform previous symbol.
    int state = t.with_prev ? pick(rng) * mc + pick(rng) : pick(rng);
    std::vector<std::uint32_t> branch_path(count);
    std::vector<std::uint32_t> out_re(count), out_im(count);

    // Noise: i.i.d. for the delta filter, windowed grid noise for rect.
    std::vector<cplx> grid_noise;
    if (opts.filter == CpmRxFilter::kRect && n0 > 0.0) {
      waveform::ChainConfig gc;
      gc.T = cfg.T;
      gc.m_tx = 1;
      gc.m = 1;
      gc.k_sim = cells;
      gc.n0 = n0;
      grid_noise = channel::awgn_grid((count + 1) * static_cast<std::size_t>(cells),
                                      gc, rng);
    }

    for (std::size_t n = 0; n < count; ++n) {
      const int ai = pick(rng);
      const std::size_t b = static_cast<std::size_t>(state) * mc + ai;
      branch_path[n] = static_cast<std::uint32_t>(b);
      std::uint32_t rb = 0, ib = 0;
      for (int j = 0; j < cfg.m; ++j) {
        cplx r = t.means[b * static_cast<std::size_t>(cfg.m) + j];
        if (opts.filter == CpmRxFilter::kDelta) {
          if (n0 > 0.0) {
            const double sig = std::sqrt(n0 / 2.0);
            std::normal_distribution<double> g(0.0, sig);
            r += cplx(g(rng), g(rng));
          }
        } else {
          // Window ending at (n+1)*T + (j+1/2)*T/m, offset one slot for the
          // lead-in cells.
          const std::size_t end =
              (n + 1) * static_cast<std::size_t>(cells) +
              static_cast<std::size_t>(std::llround((j + 0.5) / cfg.m * cells));
          cplx acc(0.0, 0.0);
          for (std::size_t i = end - static_cast<std::size_t>(win); i < end; ++i)
            acc += grid_noise[i];
          r += gain * acc;
        }
        if (r.real() > 0.0) rb |= 1u << j;
        if (r.imag() > 0.0) ib |= 1u << j;
      }
      out_re[n] = rb;
      out_im[n] = ib;
      state = t.next_state[b];
    }

    // Forward recursion.
    std::fill(alpha_vec.begin(), alpha_vec.end(),
              1.0 / static_cast<double>(t.num_states));
    const double prior = 1.0 / static_cast<double>(mc);
    for (std::size_t n = 0; n < count; ++n) {
      std::fill(next_vec.begin(), next_vec.end(), 0.0);
      for (int st = 0; st < t.num_states; ++st) {
        const double a = alpha_vec[static_cast<std::size_t>(st)];
        if (a == 0.0) continue;
        for (int ai = 0; ai < mc; ++ai) {
          const std::size_t b = static_cast<std::size_t>(st) * mc + ai;
          const double lik = std::exp(bt.loglik(b, out_re[n], out_im[n]));
          if (lik == 0.0) continue;
          next_vec[static_cast<std::size_t>(t.next_state[b])] += a * prior * lik;
        }
      }
      double c = 0.0;
      for (double v : next_vec) c += v;
      if (!(c > 0.0)) {
        est.ok = false;
        return est;
      }
      const double inv = 1.0 / c;
      for (std::size_t s2 = 0; s2 < alpha_vec.size(); ++s2)
        alpha_vec[s2] = next_vec[s2] * inv;
      const double inc = (bt.loglik(branch_path[n], out_re[n], out_im[n]) -
                          std::log(c)) * kLog2e;
      increments.push_back(inc);
    }
  }

  est.symbols = increments.size();
  est.rate_bpcu = mean_of(increments);
  est.rail_rate = est.rate_bpcu;

  const int nb = opts.bootstrap_blocks;
  const std::size_t per = increments.size() / static_cast<std::size_t>(nb);
  if (per > 0) {
    std::vector<double> block_means(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < per; ++i)
        s += increments[static_cast<std::size_t>(b) * per + i];
      block_means[static_cast<std::size_t>(b)] = s / static_cast<double>(per);
    }
    auto rng = make_stream(seed, 0xB005ULL);
    std::uniform_int_distribution<int> pick(0, nb - 1);
    RunningStats stats;
    for (int r = 0; r < opts.bootstrap_resamples; ++r) {
      double s = 0.0;
      for (int b = 0; b < nb; ++b)
        s += block_means[static_cast<std::size_t>(pick(rng))];
      stats.add(s / nb);
    }
    est.std_error = stats.stddev();
  }
  return est;
}

}  // namespace zxm::cpm
