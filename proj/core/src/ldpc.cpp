#include "zxm/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "zxm/rng.hpp"

namespace zxm::ldpc {

namespace {

// Bit-matrix rows for the GF(2) elimination.
struct BitRow {
  std::vector<std::uint64_t> w;
  explicit BitRow(int n) : w((n + 63) / 64, 0) {}
  bool get(int j) const { return (w[j >> 6] >> (j & 63)) & 1ULL; }
  void set(int j) { w[j >> 6] |= 1ULL << (j & 63); }
  void operator^=(const BitRow& o) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] ^= o.w[i];
  }
};

bool try_build(int n, std::uint64_t seed, LdpcCode& code) {
  const int m = n / 2;
  auto rng = make_stream(seed, 0);

  // Configuration model: 3 sockets per variable, 6 per check.
  std::vector<std::int32_t> sockets(static_cast<std::size_t>(3 * n));
  for (int i = 0; i < 3 * n; ++i) sockets[static_cast<std::size_t>(i)] = i % n;
  std::shuffle(sockets.begin(), sockets.end(), rng);

  auto var_of = [&](int s) { return sockets[static_cast<std::size_t>(s)]; };
  // Remove parallel edges by swapping sockets.
  for (int pass = 0; pass < 64; ++pass) {
    bool clean = true;
    for (int c = 0; c < m && clean; ++c) {
      for (int i = 0; i < 6 && clean; ++i) {
        for (int j = i + 1; j < 6; ++j) {
          if (var_of(6 * c + i) == var_of(6 * c + j)) {
            std::uniform_int_distribution<int> any(0, 3 * n - 1);
            std::swap(sockets[static_cast<std::size_t>(6 * c + j)],
                      sockets[static_cast<std::size_t>(any(rng))]);
            clean = false;
            break;
          }
        }
      }
    }
    if (clean) break;
    if (pass == 63) return false;
  }

  code.n = n;
  code.k = n - m;
  code.check_vars.assign(static_cast<std::size_t>(m), {});
  code.var_checks.assign(static_cast<std::size_t>(n), {});
  for (int c = 0; c < m; ++c) {
    for (int i = 0; i < 6; ++i) {
      const int v = var_of(6 * c + i);
      code.check_vars[static_cast<std::size_t>(c)].push_back(v);
      code.var_checks[static_cast<std::size_t>(v)].push_back(c);
    }
  }

  // GF(2) elimination for the systematic encoder.
  std::vector<BitRow> rows(static_cast<std::size_t>(m), BitRow(n));
  for (int c = 0; c < m; ++c)
    for (int v : code.check_vars[static_cast<std::size_t>(c)])
      rows[static_cast<std::size_t>(c)].set(v);

  std::vector<std::int32_t> pivot_of_row(static_cast<std::size_t>(m), -1);
  std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
  for (int r = 0; r < m; ++r) {
    int pc = -1;
    for (int j = 0; j < n; ++j) {
      if (!is_pivot[static_cast<std::size_t>(j)] && rows[static_cast<std::size_t>(r)].get(j)) {
        pc = j;
        break;
      }
    }
    if (pc < 0) {
      // Dependent row: swap with a later row that has a usable pivot.
      bool fixed = false;
      for (int r2 = r + 1; r2 < m && !fixed; ++r2) {
        for (int j = 0; j < n; ++j) {
          if (!is_pivot[static_cast<std::size_t>(j)] && rows[static_cast<std::size_t>(r2)].get(j)) {
            std::swap(rows[static_cast<std::size_t>(r)], rows[static_cast<std::size_t>(r2)]);
            fixed = true;
            break;
          }
        }
      }
      if (!fixed) return false;  // rank deficient
      --r;
      continue;
    }
    pivot_of_row[static_cast<std::size_t>(r)] = pc;
    is_pivot[static_cast<std::size_t>(pc)] = true;
    for (int r2 = 0; r2 < m; ++r2) {
      if (r2 != r && rows[static_cast<std::size_t>(r2)].get(pc))
        rows[static_cast<std::size_t>(r2)] ^= rows[static_cast<std::size_t>(r)];
    }
  }

  code.parity_cols.assign(pivot_of_row.begin(), pivot_of_row.end());
  code.info_cols.clear();
  for (int j = 0; j < n; ++j)
    if (!is_pivot[static_cast<std::size_t>(j)]) code.info_cols.push_back(j);
  code.parity_gen.assign(static_cast<std::size_t>(m), {});
  for (int r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < code.info_cols.size(); ++i) {
      if (rows[static_cast<std::size_t>(r)].get(code.info_cols[i]))
        code.parity_gen[static_cast<std::size_t>(r)].push_back(
            static_cast<std::int32_t>(i));
    }
  }
  return true;
}

}  // namespace

LdpcCode build_ldpc_3_6(int n, std::uint64_t seed) {
  if (n % 2 != 0 || n < 12)
    throw std::invalid_argument("ldpc: block length must be even and >= 12");
  LdpcCode code;
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (try_build(n, seed + static_cast<std::uint64_t>(attempt), code))
      return code;
  }
  throw std::runtime_error("ldpc: construction failed");
}

std::vector<std::uint8_t> encode(const LdpcCode& code,
                                 std::span<const std::uint8_t> info) {
  if (info.size() != static_cast<std::size_t>(code.k))
    throw std::invalid_argument("ldpc encode: wrong info length");
  std::vector<std::uint8_t> cw(static_cast<std::size_t>(code.n), 0);
  for (std::size_t i = 0; i < info.size(); ++i)
    cw[static_cast<std::size_t>(code.info_cols[i])] = info[i] & 1;
  for (std::size_t r = 0; r < code.parity_gen.size(); ++r) {
    std::uint8_t p = 0;
    for (int i : code.parity_gen[r]) p ^= info[static_cast<std::size_t>(i)] & 1;
    cw[static_cast<std::size_t>(code.parity_cols[r])] = p;
  }
  return cw;
}

bool syndrome_ok(const LdpcCode& code, std::span<const std::uint8_t> cw) {
  for (const auto& vars : code.check_vars) {
    std::uint8_t s = 0;
    for (int v : vars) s ^= cw[static_cast<std::size_t>(v)] & 1;
    if (s) return false;
  }
  return true;
}

DecodeResult decode(const LdpcCode& code, std::span<const double> llrs,
                    int max_iters) {
  if (llrs.size() != static_cast<std::size_t>(code.n))
    throw std::invalid_argument("ldpc decode: wrong LLR length");
  const int m = code.n / 2;

  // Edge storage per check.
  std::vector<std::vector<double>> v2c(static_cast<std::size_t>(m));
  std::vector<std::vector<double>> c2v(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    v2c[static_cast<std::size_t>(c)].assign(code.check_vars[static_cast<std::size_t>(c)].size(), 0.0);
    c2v[static_cast<std::size_t>(c)].assign(code.check_vars[static_cast<std::size_t>(c)].size(), 0.0);
  }
  // Initialize variable-to-check with channel LLRs.
  for (int c = 0; c < m; ++c)
    for (std::size_t i = 0; i < code.check_vars[static_cast<std::size_t>(c)].size(); ++i)
      v2c[static_cast<std::size_t>(c)][i] =
          llrs[static_cast<std::size_t>(code.check_vars[static_cast<std::size_t>(c)][i])];

  std::vector<double> posterior(static_cast<std::size_t>(code.n));
  std::vector<std::uint8_t> hard(static_cast<std::size_t>(code.n));
  DecodeResult res;

  auto clamp_t = [](double x) { return std::clamp(x, -0.9999999999, 0.9999999999); };

  for (int iter = 1; iter <= max_iters; ++iter) {
    // Check update (tanh rule), leave-one-out via prefix/suffix products.
    for (int c = 0; c < m; ++c) {
      auto& in = v2c[static_cast<std::size_t>(c)];
      auto& out = c2v[static_cast<std::size_t>(c)];
      const std::size_t deg = in.size();
      double pre[8], suf[8];
      double acc = 1.0;
      for (std::size_t i = 0; i < deg; ++i) {
        pre[i] = acc;
        acc *= clamp_t(std::tanh(0.5 * in[i]));
      }
      acc = 1.0;
      for (std::size_t i = deg; i-- > 0;) {
        suf[i] = acc;
        acc *= clamp_t(std::tanh(0.5 * in[i]));
      }
      for (std::size_t i = 0; i < deg; ++i)
        out[i] = 2.0 * std::atanh(clamp_t(pre[i] * suf[i]));
    }
    // Variable update and posterior.
    for (int v = 0; v < code.n; ++v)
      posterior[static_cast<std::size_t>(v)] = llrs[static_cast<std::size_t>(v)];
    for (int c = 0; c < m; ++c)
      for (std::size_t i = 0; i < code.check_vars[static_cast<std::size_t>(c)].size(); ++i)
        posterior[static_cast<std::size_t>(code.check_vars[static_cast<std::size_t>(c)][i])] +=
            c2v[static_cast<std::size_t>(c)][i];
    for (int v = 0; v < code.n; ++v)
      hard[static_cast<std::size_t>(v)] = posterior[static_cast<std::size_t>(v)] >= 0.0 ? 0 : 1;

    res.iterations = iter;
    if (syndrome_ok(code, hard)) {
      res.success = true;
      break;
    }
    if (iter == max_iters) break;

    // New variable-to-check messages (posterior minus own contribution).
    for (int c = 0; c < m; ++c)
      for (std::size_t i = 0; i < code.check_vars[static_cast<std::size_t>(c)].size(); ++i)
        v2c[static_cast<std::size_t>(c)][i] =
            posterior[static_cast<std::size_t>(code.check_vars[static_cast<std::size_t>(c)][i])] -
            c2v[static_cast<std::size_t>(c)][i];
  }

  res.codeword = hard;
  res.info_bits.resize(static_cast<std::size_t>(code.k));
  for (std::size_t i = 0; i < res.info_bits.size(); ++i)
    res.info_bits[i] = hard[static_cast<std::size_t>(code.info_cols[i])];
  return res;
}

}  // namespace zxm::ldpc
