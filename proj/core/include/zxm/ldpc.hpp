#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace zxm::ldpc {

/// Regular (3,6) LDPC code behind the uniform FEC interface of the coded
/// chain: encode(bits) -> bits, decode(LLRs) -> (bits, success). Belief
/// propagation, LLR convention log(P0/P1) (positive = bit 0).
struct LdpcCode {
  int n = 1024;  // block length
  int k = 512;   // information bits
  std::vector<std::vector<std::int32_t>> check_vars;  // per check: var indices
  std::vector<std::vector<std::int32_t>> var_checks;  // per var: check indices
  std::vector<std::int32_t> info_cols;    // systematic information positions
  std::vector<std::int32_t> parity_cols;  // parity positions (one per check)
  /// parity_gen[r] lists info positions whose XOR gives parity bit r.
  std::vector<std::vector<std::int32_t>> parity_gen;

  double rate() const { return static_cast<double>(k) / n; }
};

/// Deterministic construction: random (3,6) edge assignment (no parallel
/// edges), regenerated until H has full rank.
LdpcCode build_ldpc_3_6(int n = 1024, std::uint64_t seed = 0x3655ULL);

std::vector<std::uint8_t> encode(const LdpcCode& code,
                                 std::span<const std::uint8_t> info);

struct DecodeResult {
  std::vector<std::uint8_t> info_bits;
  std::vector<std::uint8_t> codeword;
  bool success = false;  // parity checks satisfied
  int iterations = 0;
};

DecodeResult decode(const LdpcCode& code, std::span<const double> llrs,
                    int max_iters = 50);

/// Parity check of a full codeword.
bool syndrome_ok(const LdpcCode& code, std::span<const std::uint8_t> cw);

}  // namespace zxm::ldpc
