#include "zxm/rll.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace zxm::rll {

namespace {

// Perron eigenpair of a small nonnegative primitive matrix by power
// iteration with Rayleigh-quotient refinement.
void perron(const std::vector<std::vector<int>>& a, double& lambda,
            std::vector<double>& u) {
  const std::size_t n = a.size();
  u.assign(n, 1.0);
  lambda = 1.0;
  for (int iter = 0; iter < 20000; ++iter) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v[i] += a[i][j] * u[j];
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double av = 0.0;
      for (std::size_t j = 0; j < n; ++j) av += a[i][j] * v[j];
      num += v[i] * av;
      den += v[i] * v[i];
    }
    const double next = num / den;
    const bool done = std::abs(next - lambda) < 1e-15 * next && iter > 4;
    lambda = next;
    u = std::move(v);
    if (done) break;
  }
}

std::vector<double> stationary_of(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 20000; ++iter) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * p[i][j];
    double diff = 0.0, sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      diff += std::abs(next[j] - pi[j]);
      sum += next[j];
    }
    for (double& x : next) x /= sum;
    pi = std::move(next);
    if (diff < 1e-15 && iter > 4) break;
  }
  return pi;
}

}  // namespace

RllFsm build_fsm(int d) {
  if (d < 0) throw std::invalid_argument("rll: d must be >= 0");
  RllFsm fsm;
  fsm.d = d;
  const int n = d + 1;
  fsm.adjacency.assign(n, std::vector<int>(n, 0));
  if (d == 0) {
    // Unconstrained: one state, parallel edges for 0 and 1.
    fsm.adjacency[0][0] = 2;
    fsm.lambda = 2.0;
    fsm.transitions = {{1.0}};
    fsm.stationary = {1.0};
    return fsm;
  }
  for (int i = 0; i < d; ++i) fsm.adjacency[i][i + 1] = 1;
  fsm.adjacency[d][d] = 1;
  fsm.adjacency[d][0] = 1;

  std::vector<double> u;
  perron(fsm.adjacency, fsm.lambda, u);

  fsm.transitions.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (fsm.adjacency[i][j])
        fsm.transitions[i][j] = u[j] / u[i] * fsm.adjacency[i][j] / fsm.lambda;
  fsm.stationary = stationary_of(fsm.transitions);
  return fsm;
}

double max_entropy_rate(const RllFsm& fsm) { return std::log2(fsm.lambda); }

std::vector<std::uint8_t> sample_dk_sequence(const RllFsm& fsm, std::size_t n,
                                             std::mt19937_64& rng) {
  std::vector<std::uint8_t> bits(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (fsm.d == 0) {
    for (std::size_t k = 0; k < n; ++k) bits[k] = unif(rng) < 0.5 ? 1 : 0;
    return bits;
  }
  // Start from the stationary distribution.
  int state = 0;
  {
    double r = unif(rng), acc = 0.0;
    for (int s = 0; s < fsm.num_states(); ++s) {
      acc += fsm.stationary[s];
      if (r < acc) {
        state = s;
        break;
      }
      state = s;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (state < fsm.d) {
      bits[k] = 0;
      ++state;
    } else {
      // From state d: 1 moves to state 0, 0 stays.
      const double p_one = fsm.transitions[fsm.d][0];
      if (unif(rng) < p_one) {
        bits[k] = 1;
        state = 0;
      } else {
        bits[k] = 0;
      }
    }
  }
  return bits;
}

std::vector<std::int8_t> nrzi_encode(std::span<const std::uint8_t> dk_bits) {
  std::vector<std::int8_t> levels(dk_bits.size());
  std::int8_t level = -1;
  for (std::size_t k = 0; k < dk_bits.size(); ++k) {
    if (dk_bits[k]) level = static_cast<std::int8_t>(-level);
    levels[k] = level;
  }
  return levels;
}

std::vector<std::size_t> runlengths(std::span<const std::int8_t> levels) {
  std::vector<std::size_t> runs;
  if (levels.empty()) return runs;
  std::size_t len = 1;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (levels[k] == levels[k - 1]) {
      ++len;
    } else {
      runs.push_back(len);
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

std::vector<double> level_autocorrelation(const RllFsm& fsm, int max_lag) {
  // Lifted chain on (fsm state, level); level flips exactly on the d->0 edge.
  const int ns = fsm.num_states();
  const int n = 2 * ns;  // index = state*2 + (level>0)
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < ns; ++s) {
    for (int lv = 0; lv < 2; ++lv) {
      const int from = s * 2 + lv;
      if (fsm.d == 0) {
        p[from][0 * 2 + lv] += 0.5;        // hold
        p[from][0 * 2 + (1 - lv)] += 0.5;  // toggle
        continue;
      }
      for (int t = 0; t < ns; ++t) {
        const double pr = fsm.transitions[s][t];
        if (pr <= 0.0) continue;
        const bool toggle = (s == fsm.d && t == 0);
        p[from][t * 2 + (toggle ? 1 - lv : lv)] += pr;
      }
    }
  }
  // Stationary of the lifted chain is (pi x 1/2) by symmetry.
  std::vector<double> dist(n);
  for (int s = 0; s < ns; ++s)
    for (int lv = 0; lv < 2; ++lv) dist[s * 2 + lv] = fsm.stationary[s] * 0.5;

  auto level_of = [](int idx) { return idx % 2 == 1 ? 1.0 : -1.0; };
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
  // weighted[i] = pi(i) * level(i), propagated through the chain.
  std::vector<double> weighted(n);
  for (int i = 0; i < n; ++i) weighted[i] = dist[i] * level_of(i);
  r[0] = 1.0;
  for (int m = 1; m <= max_lag; ++m) {
    std::vector<double> next(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (weighted[i] == 0.0) continue;
      for (int j = 0; j < n; ++j) next[j] += weighted[i] * p[i][j];
    }
    weighted = std::move(next);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += weighted[j] * level_of(j);
    r[static_cast<std::size_t>(m)] = acc;
  }
  return r;
}

RllBlockCode build_block_code() {
  RllBlockCode code;
  int idx = 0;
  for (int w = 0; w < 32 && idx < 8; ++w) {
    // w enumerated MSB-first gives lexicographic order of the words.
    std::array<std::uint8_t, 5> word{};
    for (int b = 0; b < 5; ++b) word[static_cast<std::size_t>(b)] = (w >> (4 - b)) & 1;
    if (word[0] != 0) continue;
    bool ok = true;
    for (int b = 0; b + 1 < 5; ++b)
      if (word[static_cast<std::size_t>(b)] && word[static_cast<std::size_t>(b + 1)]) ok = false;
    if (!ok) continue;
    code.codebook[static_cast<std::size_t>(idx++)] = word;
  }
  return code;
}

SoftDecodeResult rll_soft_decode(const RllBlockCode& code,
                                 std::span<const double> p_one) {
  if (p_one.size() != 5) throw std::invalid_argument("rll_soft_decode: need 5 APPs");
  SoftDecodeResult res;
  std::array<double, 8> score{};
  double total = 0.0;
  for (int c = 0; c < 8; ++c) {
    double s = 1.0;
    for (int b = 0; b < 5; ++b) {
      const double p = p_one[static_cast<std::size_t>(b)];
      s *= code.codebook[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)] ? p : 1.0 - p;
    }
    score[static_cast<std::size_t>(c)] = s;
    total += s;
  }
  if (total <= 0.0) {
    res.erasure = true;
    return res;
  }
  int best = 0;
  for (int c = 1; c < 8; ++c)
    if (score[static_cast<std::size_t>(c)] > score[static_cast<std::size_t>(best)]) best = c;
  res.best_index = best;
  for (int b = 0; b < 3; ++b) {
    double p0 = 0.0, p1 = 0.0;
    for (int c = 0; c < 8; ++c) {
      if ((c >> (2 - b)) & 1)
        p1 += score[static_cast<std::size_t>(c)];
      else
        p0 += score[static_cast<std::size_t>(c)];
    }
    res.llrs[static_cast<std::size_t>(b)] = std::log(p0) - std::log(p1);
    res.hard_bits[static_cast<std::size_t>(b)] = (best >> (2 - b)) & 1;
  }
  return res;
}

std::string codebook_to_json(const RllBlockCode& code) {
  std::string out = "[";
  for (int c = 0; c < 8; ++c) {
    out += '"';
    for (int b = 0; b < 5; ++b)
      out += code.codebook[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)] ? '1' : '0';
    out += '"';
    if (c != 7) out += ',';
  }
  out += ']';
  return out;
}

std::string bits_to_text(std::span<const std::uint8_t> bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out += b ? '1' : '0';
  return out;
}

std::string levels_to_text(std::span<const std::int8_t> levels) {
  std::string out;
  out.reserve(levels.size());
  for (auto l : levels) out += l > 0 ? '+' : '-';
  return out;
}

}  // namespace zxm::rll
