#include "zxm/trellis.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "zxm/mathutil.hpp"
#include "zxm/rll.hpp"

namespace zxm::trellis {

EffectiveTaps effective_taps(const waveform::ChainConfig& cfg) {
  // Response of a single unit symbol observed across successive blocks,
  // computed by the pipeline itself so that trellis means and simulated
  // samples agree to rounding.
  const double delta = cfg.delta();
  const int l_max = static_cast<int>(
      std::ceil((cfg.pulse_support() + delta) / delta));
  std::vector<waveform::cplx> probe(static_cast<std::size_t>(l_max) + 1,
                                    waveform::cplx(0.0, 0.0));
  probe[0] = waveform::cplx(1.0, 0.0);
  waveform::ChainConfig clean = cfg;
  clean.n0 = 0.0;
  const auto sig = waveform::modulate(probe, clean);
  const auto r = waveform::rx_filter_and_sample(sig, clean, probe.size());

  EffectiveTaps taps;
  taps.m = cfg.m;
  int L = 0;
  for (int i = 0; i <= l_max; ++i) {
    for (int j = 0; j < cfg.m; ++j) {
      const double v = r[static_cast<std::size_t>(i * cfg.m + j)].real();
      if (std::abs(v) > 1e-12) L = std::max(L, i);
    }
  }
  taps.L = L;
  taps.g.assign(static_cast<std::size_t>(cfg.m) * (L + 1), 0.0);
  for (int j = 0; j < cfg.m; ++j)
    for (int i = 0; i <= L; ++i)
      taps.g[static_cast<std::size_t>(j) * (L + 1) + i] =
          r[static_cast<std::size_t>(i * cfg.m + j)].real();
  return taps;
}

std::int32_t RailTrellis::find_state(std::uint32_t window, int q) const {
  for (std::size_t s = 0; s < num_states(); ++s)
    if (state_window[s] == window && state_q[s] == q)
      return static_cast<std::int32_t>(s);
  return -1;
}

RailTrellis build_rail_trellis(const waveform::ChainConfig& cfg,
                               const waveform::SourceLaw& source) {
  RailTrellis t;
  const auto taps = effective_taps(cfg);
  t.L = taps.L;
  t.m = cfg.m;
  t.source = source;
  const bool rll_mode = source.kind == waveform::SourceKind::kRll;
  t.d = rll_mode ? source.d : 0;
  if (t.L > 24) throw std::invalid_argument("trellis: memory too large");

  rll::RllFsm fsm;
  if (rll_mode) fsm = rll::build_fsm(source.d);

  const std::uint32_t mask = (t.L >= 32) ? ~0u : ((1u << t.L) - 1u);

  // BFS over (q, window) from the two all-equal long-run states.
  std::map<std::pair<int, std::uint32_t>, std::uint32_t> index;
  std::vector<std::pair<int, std::uint32_t>> todo;
  auto intern = [&](int q, std::uint32_t w) {
    const auto key = std::make_pair(q, w);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(index.size());
    index.emplace(key, id);
    t.state_q.push_back(static_cast<std::uint8_t>(q));
    t.state_window.push_back(w);
    todo.emplace_back(key);
    return id;
  };
  if (rll_mode) {
    intern(t.d, 0u);          // long run of -1
    intern(t.d, mask);        // long run of +1
  } else {
    for (std::uint32_t w = 0; w <= mask; ++w) intern(0, w);
  }

  struct PendingEdge {
    std::uint32_t from, to;
    std::int8_t level;
    double prior;
  };
  std::vector<PendingEdge> pend;
  for (std::size_t head = 0; head < todo.size(); ++head) {
    const auto [q, w] = todo[head];
    const auto from = index.at({q, w});
    const int last = (w & 1u) ? 1 : -1;
    // hold
    {
      double prior;
      int nq;
      if (!rll_mode) {
        prior = 0.5;
        nq = 0;
      } else if (q < t.d) {
        prior = fsm.transitions[q][q + 1];
        nq = q + 1;
      } else {
        prior = fsm.transitions[t.d][t.d];
        nq = t.d;
      }
      const std::uint32_t nw = ((w << 1) | (last > 0 ? 1u : 0u)) & mask;
      pend.push_back({from, intern(nq, nw), static_cast<std::int8_t>(last), prior});
    }
    // toggle (allowed only from q == d in RLL mode)
    if (!rll_mode || q == t.d) {
      const double prior = rll_mode ? fsm.transitions[t.d][0] : 0.5;
      const int lv = -last;
      const std::uint32_t nw = ((w << 1) | (lv > 0 ? 1u : 0u)) & mask;
      pend.push_back({from, intern(0, nw), static_cast<std::int8_t>(lv), prior});
    }
  }

  t.edges.reserve(pend.size());
  t.out_edges.assign(t.num_states(), {-1, -1});
  for (const auto& e : pend) {
    const auto id = static_cast<std::uint32_t>(t.edges.size());
    t.edges.push_back({e.from, e.to, e.level, e.prior});
    t.out_edges[e.from][e.level > 0 ? 1 : 0] = static_cast<std::int32_t>(id);
  }

  // Branch means: level history is (input, window bits oldest-ward).
  const double scale = 1.0 / std::sqrt(2.0);
  t.means.assign(t.edges.size() * static_cast<std::size_t>(t.m), 0.0);
  for (std::size_t e = 0; e < t.edges.size(); ++e) {
    const auto& ed = t.edges[e];
    const std::uint32_t w = t.state_window[ed.from];
    for (int j = 0; j < t.m; ++j) {
      double mu = ed.level * taps.g[static_cast<std::size_t>(j) * (t.L + 1)];
      for (int i = 1; i <= t.L; ++i) {
        const int lvl = ((w >> (i - 1)) & 1u) ? 1 : -1;
        mu += lvl * taps.g[static_cast<std::size_t>(j) * (t.L + 1) + i];
      }
      t.means[e * static_cast<std::size_t>(t.m) + static_cast<std::size_t>(j)] =
          mu * scale;
    }
  }

  // Stationary distribution over states.
  t.init.assign(t.num_states(), 1.0 / static_cast<double>(t.num_states()));
  for (int iter = 0; iter < 20000; ++iter) {
    std::vector<double> next(t.num_states(), 0.0);
    for (const auto& ed : t.edges) next[ed.to] += t.init[ed.from] * ed.prior;
    double diff = 0.0, sum = 0.0;
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      diff += std::abs(next[s] - t.init[s]);
      sum += next[s];
    }
    for (double& x : next) x /= sum;
    t.init = std::move(next);
    if (diff < 1e-15 && iter > 8) break;
  }
  return t;
}

TrellisWalk walk(const RailTrellis& t, std::size_t n, std::mt19937_64& rng) {
  TrellisWalk out;
  out.levels.resize(n);
  out.edge_path.resize(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uint32_t state = 0;
  {
    double r = unif(rng), acc = 0.0;
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      acc += t.init[s];
      state = static_cast<std::uint32_t>(s);
      if (r < acc) break;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto e_hold = t.out_edges[state][(t.state_window[state] & 1u) ? 1 : 0];
    const auto e_tog = t.out_edges[state][(t.state_window[state] & 1u) ? 0 : 1];
    std::int32_t chosen;
    if (e_tog < 0) {
      chosen = e_hold;
    } else if (e_hold < 0) {
      chosen = e_tog;
    } else {
      const double p_hold = t.edges[static_cast<std::size_t>(e_hold)].prior;
      chosen = unif(rng) < p_hold ? e_hold : e_tog;
    }
    const auto& ed = t.edges[static_cast<std::size_t>(chosen)];
    out.levels[k] = ed.level;
    out.edge_path[k] = static_cast<std::uint32_t>(chosen);
    state = ed.to;
  }
  return out;
}

double BranchTables::loglik(std::size_t edge, std::uint32_t bits) const {
  if (packed) return log_table[(edge << m) | bits];
  double s = 0.0;
  for (int j = 0; j < m; ++j)
    s += ((bits >> j) & 1u) ? log_pos[edge * static_cast<std::size_t>(m) + j]
                            : log_neg[edge * static_cast<std::size_t>(m) + j];
  return s;
}

double BranchTables::lik(std::size_t edge, std::uint32_t bits) const {
  if (packed) return lin_table[(edge << m) | bits];
  return std::exp(loglik(edge, bits));
}

BranchTables build_branch_tables(const RailTrellis& t, double n0,
                                 int packed_limit) {
  if (n0 <= 0.0) throw std::invalid_argument("branch tables: N0 must be > 0");
  BranchTables bt;
  bt.m = t.m;
  const double sigma = std::sqrt(n0 / 2.0);
  const std::size_t ne = t.edges.size();
  bt.log_pos.resize(ne * static_cast<std::size_t>(t.m));
  bt.log_neg.resize(ne * static_cast<std::size_t>(t.m));
  for (std::size_t i = 0; i < bt.log_pos.size(); ++i) {
    const double a = t.means[i] / sigma;
    bt.log_pos[i] = log_normal_cdf(a);
    bt.log_neg[i] = log_normal_cdf(-a);
  }
  bt.packed = t.m <= packed_limit;
  if (bt.packed) {
    const std::size_t width = std::size_t{1} << t.m;
    bt.log_table.resize(ne * width);
    bt.lin_table.resize(ne * width);
    for (std::size_t e = 0; e < ne; ++e) {
      for (std::uint32_t bits = 0; bits < width; ++bits) {
        double s = 0.0;
        for (int j = 0; j < t.m; ++j)
          s += ((bits >> j) & 1u)
                   ? bt.log_pos[e * static_cast<std::size_t>(t.m) + j]
                   : bt.log_neg[e * static_cast<std::size_t>(t.m) + j];
        bt.log_table[(e << t.m) | bits] = s;
        bt.lin_table[(e << t.m) | bits] = std::exp(s);
      }
    }
  }
  return bt;
}

std::uint32_t outcome_bits(std::span<const waveform::cplx> block, bool imag) {
  std::uint32_t bits = 0;
  for (std::size_t j = 0; j < block.size(); ++j) {
    const double v = imag ? block[j].imag() : block[j].real();
    if (v > 0.0) bits |= (1u << j);
  }
  return bits;
}

}  // namespace zxm::trellis
