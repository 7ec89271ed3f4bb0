#include "zxm/rate.hpp"

#include <cmath>
#include <stdexcept>

#include "zxm/channel.hpp"
#include "zxm/mathutil.hpp"
#include "zxm/rng.hpp"

namespace zxm::rate {

namespace {
constexpr double kLog2e = 1.4426950408889634;
}

double aux_block_likelihood(std::span<const waveform::cplx> mean,
                            std::span<const waveform::cplx> y, double n0) {
  if (mean.size() != y.size())
    throw std::invalid_argument("aux_block_likelihood: size mismatch");
  if (n0 <= 0.0) throw std::invalid_argument("aux_block_likelihood: N0 <= 0");
  const double sigma = std::sqrt(n0 / 2.0);
  double p = 1.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double sr = y[j].real() > 0.0 ? 1.0 : -1.0;
    const double si = y[j].imag() > 0.0 ? 1.0 : -1.0;
    p *= normal_cdf(sr * mean[j].real() / sigma);
    p *= normal_cdf(si * mean[j].imag() / sigma);
  }
  return p;
}

namespace {

// One forward-recursion pass over a rail segment. Appends the per-block
// information increments log2 W(y_n|edge_n) - log2 c_n and returns false on
// a normalization failure.
bool rail_increments(const trellis::RailTrellis& t,
                     const trellis::BranchTables& bt,
                     std::span<const std::uint32_t> outcomes,
                     std::span<const std::uint32_t> true_edges,
                     std::vector<double>& increments) {
  const std::size_t ns = t.num_states();
  std::vector<double> alpha(t.init);
  std::vector<double> next(ns);
  for (std::size_t n = 0; n < outcomes.size(); ++n) {
    std::fill(next.begin(), next.end(), 0.0);
    const std::uint32_t o = outcomes[n];
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
      const auto& ed = t.edges[e];
      const double a = alpha[ed.from];
      if (a == 0.0) continue;
      next[ed.to] += a * ed.prior * bt.lik(e, o);
    }
    double c = 0.0;
    for (double v : next) c += v;
    if (!(c > 0.0)) return false;
    const double inv = 1.0 / c;
    for (std::size_t s = 0; s < ns; ++s) alpha[s] = next[s] * inv;
    const double log2_c = std::log(c) * kLog2e;
    const double log2_lik = bt.loglik(true_edges[n], o) * kLog2e;
    increments.push_back(log2_lik - log2_c);
  }
  return true;
}

}  // namespace

RateEstimate rate_lower_bound(const waveform::ChainConfig& cfg,
                              const waveform::SourceLaw& source,
                              std::size_t n_symbols, std::uint64_t seed,
                              const RateOptions& opts) {
  const auto t = trellis::build_rail_trellis(cfg, source);
  const auto bt = trellis::build_branch_tables(t, cfg.n0);
  const std::size_t seg = opts.segment_symbols;
  const std::size_t n_frames = (n_symbols + seg - 1) / seg;
  const auto L = static_cast<std::size_t>(t.L);

  RateEstimate est;
  std::vector<double> increments;  // per-symbol, rails summed
  increments.reserve(n_symbols);
  std::vector<double> inc_i, inc_q;
  std::vector<std::uint32_t> out_i, out_q;

  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t count = std::min(seg, n_symbols - f * seg);
    auto rng = make_stream(seed, f);
    const auto walk_i = trellis::walk(t, count + L, rng);
    const auto walk_q = trellis::walk(t, count + L, rng);
    const auto x = waveform::build_symbols(walk_i.levels, walk_q.levels);
    waveform::ChainConfig ch = cfg;
    auto res = channel::transmit_frame(x, ch, rng);

    out_i.clear();
    out_q.clear();
    const auto m = static_cast<std::size_t>(cfg.m);
    for (std::size_t n = L; n < count + L; ++n) {
      std::span<const waveform::cplx> block(&res.frame.y[n * m], m);
      out_i.push_back(trellis::outcome_bits(block, false));
      out_q.push_back(trellis::outcome_bits(block, true));
    }
    inc_i.clear();
    inc_q.clear();
    const std::span<const std::uint32_t> te_i(&walk_i.edge_path[L], count);
    const std::span<const std::uint32_t> te_q(&walk_q.edge_path[L], count);
    if (!rail_increments(t, bt, out_i, te_i, inc_i) ||
        !rail_increments(t, bt, out_q, te_q, inc_q)) {
      est.ok = false;
      return est;
    }
    for (std::size_t n = 0; n < count; ++n)
      increments.push_back(inc_i[n] + inc_q[n]);
  }

  est.symbols = increments.size();
  est.rate_bpcu = mean_of(increments);
  est.rail_rate = 0.5 * est.rate_bpcu;

  // Block bootstrap over contiguous blocks of the increment sequence.
  const int nb = opts.bootstrap_blocks;
  std::vector<double> block_means(static_cast<std::size_t>(nb), 0.0);
  const std::size_t per = increments.size() / static_cast<std::size_t>(nb);
  if (per > 0) {
    for (int b = 0; b < nb; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < per; ++i)
        s += increments[static_cast<std::size_t>(b) * per + i];
      block_means[static_cast<std::size_t>(b)] = s / static_cast<double>(per);
    }
    auto rng = make_stream(seed, 0xB005ull);
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

double spectral_efficiency(double rate_bpcu, const waveform::ChainConfig& cfg,
                           double b90) {
  if (b90 <= 0.0) throw std::invalid_argument("spectral_efficiency: B90 <= 0");
  return rate_bpcu * cfg.m_tx / (cfg.T * b90);
}

}  // namespace zxm::rate
