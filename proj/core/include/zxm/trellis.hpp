#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "zxm/waveform.hpp"

namespace zxm::trellis {

/// Effective channel taps of the transmit pulse through the integrate-and-
/// dump receive filter, on the sampling lattice. taps[j*(L+1)+i] is the
/// contribution of symbol x_{n-i} to sample j of block n, computed with the
/// same grid arithmetic as the waveform pipeline. L is the symbol memory
/// (largest lag with a nonvanishing tap).
struct EffectiveTaps {
  int L = 0;
  int m = 1;
  std::vector<double> g;  // (L+1)*m entries, [j*(L+1)+i]
};

EffectiveTaps effective_taps(const waveform::ChainConfig& cfg);

/// Per-rail trellis over (RLL FSM state, last L rail levels). States and
/// transitions violating the d constraint are omitted. Branch means are the
/// noiseless values of the M samples of one block for the rail symbols
/// +/-1/sqrt(2).
struct RailTrellis {
  int L = 0;
  int m = 1;
  int d = 0;  // 0 for the unconstrained i.u.d. source
  waveform::SourceLaw source;

  struct Edge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    std::int8_t level = 0;  // input rail level
    double prior = 0.0;     // source probability of the transition
  };
  std::vector<Edge> edges;
  std::vector<double> means;                 // edges * m
  std::vector<std::uint32_t> state_window;   // bit i = level of x_{n-1-i} > 0
  std::vector<std::uint8_t> state_q;         // zeros since last 1, capped at d
  std::vector<double> init;                  // stationary distribution
  /// Outgoing edge per (state, level sign): index or -1 if pruned.
  std::vector<std::array<std::int32_t, 2>> out_edges;

  std::size_t num_states() const { return state_q.size(); }
  std::int32_t edge_for(std::uint32_t state, int level) const {
    return out_edges[state][level > 0 ? 1 : 0];
  }
  /// State index for a level history (window bits) assuming a long
  /// constant run before it where needed; -1 if not a trellis state.
  std::int32_t find_state(std::uint32_t window, int q) const;
};

RailTrellis build_rail_trellis(const waveform::ChainConfig& cfg,
                               const waveform::SourceLaw& source);

/// Walks the trellis chain from the stationary law; returns level sequence
/// and the state path (path[i] = state before consuming levels[i]).
struct TrellisWalk {
  std::vector<std::int8_t> levels;
  std::vector<std::uint32_t> edge_path;
};
TrellisWalk walk(const RailTrellis& t, std::size_t n, std::mt19937_64& rng);

/// Branch log-likelihood tables at a given N0 under the factorized
/// auxiliary channel: per sample, P(y|mu) = Phi(y*mu/sigma) with
/// sigma^2 = N0/2 per real dimension. For m <= packed_limit a table over
/// all 2^m sign outcomes is precomputed per edge.
struct BranchTables {
  int m = 1;
  bool packed = false;
  std::vector<double> log_pos;    // [edge*m + j] log Phi(+mu/sigma)
  std::vector<double> log_neg;    // [edge*m + j] log Phi(-mu/sigma)
  std::vector<double> log_table;  // [edge<<m | bits]
  std::vector<double> lin_table;  // exp(log_table), may flush to zero

  /// Outcome bits: bit j set iff sample j is positive.
  double loglik(std::size_t edge, std::uint32_t bits) const;
  double lik(std::size_t edge, std::uint32_t bits) const;
};

BranchTables build_branch_tables(const RailTrellis& t, double n0,
                                 int packed_limit = 10);

/// Sign bits of one rail of a sample block: bit j = component > 0.
std::uint32_t outcome_bits(std::span<const waveform::cplx> block, bool imag);

}  // namespace zxm::trellis
