#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zxm/ldpc.hpp"
#include "zxm/rll.hpp"
#include "zxm/trellis.hpp"
#include "zxm/waveform.hpp"

namespace zxm::equalizer {

/// Per-symbol posteriors of one rail: p[n][0] = P(level -1 | y),
/// p[n][1] = P(level +1 | y). Rows sum to 1.
struct AppMatrix {
  std::vector<std::array<double, 2>> p;
  std::size_t size() const { return p.size(); }
};

struct RailBcjr {
  AppMatrix apps;
  /// Posterior probability that the level toggled at step n (the (d,k)-bit).
  std::vector<double> p_toggle;
  double log_fwd_mass = 0.0;  // forward terminal log-likelihood
  double log_bwd_mass = 0.0;  // backward terminal log-likelihood
  bool ok = true;
};

/// Exact forward-backward posteriors on one rail under the factorized
/// branch likelihoods. `init`: distribution over trellis states before the
/// first observed block (pass the trellis stationary law, or a one-hot for
/// a known boundary state). The backward pass starts uniform (open end).
RailBcjr bcjr_rail(std::span<const std::uint32_t> outcomes,
                   const trellis::RailTrellis& t,
                   const trellis::BranchTables& bt,
                   std::span<const double> init);

/// Convenience wrapper: equalizes both rails of a quantized frame with
/// stationary boundary conditions. Blocks before `valid_from` are skipped.
std::array<RailBcjr, 2> bcjr_equalize(const waveform::QuantizedFrame& frame,
                                      const trellis::RailTrellis& t,
                                      double n0, std::size_t valid_from = 0);

/// MAP symbol decisions: argmax per position, ties toward -1.
std::vector<std::int8_t> map_detect(const AppMatrix& apps);

/// FEC encode -> interleave -> RLL block encode -> NRZI -> transmit ->
/// BCJR -> soft RLL demap -> deinterleave -> FEC decode.
struct CodedChainParams {
  waveform::ChainConfig chain;  // n0 is set per Eb/N0 point
  int d = 1;
  std::uint64_t interleaver_seed = 0x1EAFULL;
};

struct FrameOutcome {
  std::vector<std::uint8_t> decoded;
  bool fec_success = false;
  bool block_error = false;
  std::size_t bit_errors = 0;
  std::size_t demap_erasures = 0;
};

class CodedChain {
 public:
  CodedChain(const CodedChainParams& params, const ldpc::LdpcCode& fec);

  /// Eb accounts for the FEC rate, the RLL rate 0.6 (with 2 pad bits), and
  /// the average symbol energy of the RLL/FTN waveform.
  double ebn0_to_n0(double ebn0_db) const;
  void set_n0(double n0);

  /// Runs one frame of k info bits through the full chain.
  FrameOutcome run_frame(std::span<const std::uint8_t> info,
                         std::mt19937_64& rng) const;

  std::size_t info_bits_per_frame() const { return static_cast<std::size_t>(fec_->k); }
  std::size_t symbols_per_frame() const { return payload_per_rail_; }
  const trellis::RailTrellis& rail_trellis() const { return trellis_; }

 private:
  /// Rail level sequences (lead-in + payload + tail) for one frame of
  /// already interleaved coded bits.
  std::array<std::vector<std::int8_t>, 2> frame_levels(
      std::span<const std::uint8_t> coded_bits_interleaved) const;

  CodedChainParams params_;
  const ldpc::LdpcCode* fec_;
  trellis::RailTrellis trellis_;
  std::optional<trellis::BranchTables> tables_;
  std::vector<std::uint32_t> interleaver_;  // coded-bit permutation
  rll::RllBlockCode block_code_;
  std::size_t codewords_ = 0;          // RLL codewords per frame
  std::size_t pad_bits_ = 0;           // zero bits appended before mapping
  std::size_t payload_per_rail_ = 0;   // rail symbols carrying data
  double es_per_symbol_ = 0.0;
};

struct BlerPoint {
  double ebn0_db = 0.0;
  std::size_t frames = 0;
  std::size_t errors = 0;
  double bler = 0.0;
};

/// Batched Monte Carlo BLER at one Eb/N0 point; stops after min_errors
/// block errors or max_frames, whichever is first (whole batches, so the
/// result does not depend on the worker count).
BlerPoint bler_point(const CodedChain& chain_proto, double ebn0_db,
                     std::size_t max_frames, std::size_t min_errors,
                     std::uint64_t seed, int workers, std::size_t batch = 64);

}  // namespace zxm::equalizer
