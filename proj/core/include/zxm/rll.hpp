#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace zxm::rll {

/// Finite-state machine generating (d,k=inf) sequences: a 1 is followed by
/// at least d 0s. States 0..d count the 0s emitted since the last 1 (capped
/// at d); state i<d forces a 0 towards i+1, state d emits 0 (stay) or 1
/// (back to 0).
struct RllFsm {
  int d = 1;
  /// Edge counts between states; 0/1 entries for d >= 1. The degenerate
  /// unconstrained case d = 0 has the single state 0 with two self-loops.
  std::vector<std::vector<int>> adjacency;
  /// Largest (Perron) eigenvalue of the adjacency matrix.
  double lambda = 0.0;
  /// Max-entropy transition probabilities P[i][j] = (u_j/u_i) D[i][j]/lambda.
  std::vector<std::vector<double>> transitions;
  /// Stationary distribution of `transitions`.
  std::vector<double> stationary;

  int num_states() const { return static_cast<int>(adjacency.size()); }
};

/// Builds the (d,inf) FSM with adjacency, Perron eigenvalue and max-entropy
/// transition law. Throws std::invalid_argument for d < 0.
RllFsm build_fsm(int d);

/// Maximum entropy rate log2(lambda) in bits per (d,k)-symbol.
double max_entropy_rate(const RllFsm& fsm);

/// Draws n (d,inf) bits from the max-entropy chain started from the
/// stationary distribution.
std::vector<std::uint8_t> sample_dk_sequence(const RllFsm& fsm, std::size_t n,
                                             std::mt19937_64& rng);

/// NRZI: the level before the first bit is -1; a 1 toggles, a 0 holds.
std::vector<std::int8_t> nrzi_encode(std::span<const std::uint8_t> dk_bits);

/// Maximal constant runs of a +/-1 level sequence, in order.
std::vector<std::size_t> runlengths(std::span<const std::int8_t> levels);

/// Autocorrelation E[l_0 l_m] of the stationary NRZI level process, for
/// m = 0..max_lag. Computed from the lifted (state, level) Markov chain.
std::vector<double> level_autocorrelation(const RllFsm& fsm, int max_lag);

/// Rate-0.6 block code: 3 information bits onto a d=1 word of length 5.
/// Codewords start with 0 and contain no adjacent 1s, so concatenations
/// keep the constraint without coder state.
struct RllBlockCode {
  static constexpr int k_bits = 3;
  static constexpr int n = 5;
  std::array<std::array<std::uint8_t, 5>, 8> codebook{};

  /// Codeword for a 3-bit input index (bits read MSB-first).
  const std::array<std::uint8_t, 5>& encode(int index) const {
    return codebook[static_cast<std::size_t>(index)];
  }
};

/// All length-5 binary words with leading 0 and no "11", lexicographic.
RllBlockCode build_block_code();

struct SoftDecodeResult {
  /// log P(bit=0|y) - log P(bit=1|y) per input bit, MSB first.
  std::array<double, 3> llrs{};
  /// Input bits of the maximum-score codeword (ties: lower index).
  std::array<std::uint8_t, 3> hard_bits{};
  int best_index = 0;
  bool erasure = false;
};

/// Soft demapping from per-position probabilities of the (d,k)-bit being 1.
/// Codeword scores are products of the per-position probabilities
/// (positions treated as independent); bit LLRs marginalize the scores.
SoftDecodeResult rll_soft_decode(const RllBlockCode& code,
                                 std::span<const double> p_one);

/// Codebook as a JSON array of 5-character 0/1 strings.
std::string codebook_to_json(const RllBlockCode& code);

/// (d,k)-bits as a newline-free 0/1 string.
std::string bits_to_text(std::span<const std::uint8_t> bits);

/// Levels as a newline-free +/- string.
std::string levels_to_text(std::span<const std::int8_t> levels);

}  // namespace zxm::rll
