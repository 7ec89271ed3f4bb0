#include "zxm/equalizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "zxm/channel.hpp"
#include "zxm/mathutil.hpp"
#include "zxm/parallel.hpp"
#include "zxm/rll.hpp"
#include "zxm/rng.hpp"

namespace zxm::equalizer {

RailBcjr bcjr_rail(std::span<const std::uint32_t> outcomes,
                   const trellis::RailTrellis& t,
                   const trellis::BranchTables& bt,
                   std::span<const double> init) {
  const std::size_t ns = t.num_states();
  const std::size_t n = outcomes.size();
  RailBcjr res;
  res.apps.p.assign(n, {0.0, 0.0});
  res.p_toggle.assign(n, 0.0);

  // Scaled forward pass; alphas stored per step for the combine pass.
  std::vector<std::vector<double>> alpha(n + 1, std::vector<double>(ns, 0.0));
  alpha[0].assign(init.begin(), init.end());
  double log_fwd = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    auto& prev = alpha[k];
    auto& next = alpha[k + 1];
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
      const auto& ed = t.edges[e];
      const double a = prev[ed.from];
      if (a == 0.0) continue;
      next[ed.to] += a * ed.prior * bt.lik(e, outcomes[k]);
    }
    double c = 0.0;
    for (double v : next) c += v;
    if (!(c > 0.0)) {
      res.ok = false;
      return res;
    }
    const double inv = 1.0 / c;
    for (double& v : next) v *= inv;
    log_fwd += std::log(c);
  }
  res.log_fwd_mass = log_fwd;

  // Scaled backward pass, open right end.
  std::vector<double> beta(ns, 1.0), prev_beta(ns);
  double log_bwd = 0.0;
  std::vector<double> beta_mass_log(n + 1, 0.0);
  std::vector<std::vector<double>> betas(n + 1, std::vector<double>(ns, 0.0));
  betas[n] = beta;
  for (std::size_t k = n; k-- > 0;) {
    std::fill(prev_beta.begin(), prev_beta.end(), 0.0);
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
      const auto& ed = t.edges[e];
      const double b = beta[ed.to];
      if (b == 0.0) continue;
      prev_beta[ed.from] += ed.prior * bt.lik(e, outcomes[k]) * b;
    }
    double c = 0.0;
    for (double v : prev_beta) c += v;
    if (!(c > 0.0)) {
      res.ok = false;
      return res;
    }
    const double inv = 1.0 / c;
    for (double& v : prev_beta) v *= inv;
    log_bwd += std::log(c);
    beta = prev_beta;
    betas[k] = beta;
    beta_mass_log[k] = log_bwd;
  }
  {
    double mass = 0.0;
    for (std::size_t s = 0; s < ns; ++s) mass += init[s] * betas[0][s];
    res.log_bwd_mass = std::log(mass) + beta_mass_log[0];
  }

  // Edge posteriors per step.
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    std::array<double, 2> level_mass{0.0, 0.0};
    double toggle_mass = 0.0;
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
      const auto& ed = t.edges[e];
      const double a = alpha[k][ed.from];
      if (a == 0.0) continue;
      const double xi =
          a * ed.prior * bt.lik(e, outcomes[k]) * betas[k + 1][ed.to];
      if (xi == 0.0) continue;
      norm += xi;
      level_mass[ed.level > 0 ? 1 : 0] += xi;
      const int last = (t.state_window[ed.from] & 1u) ? 1 : -1;
      if (ed.level != last) toggle_mass += xi;
    }
    if (!(norm > 0.0)) {
      res.ok = false;
      return res;
    }
    res.apps.p[k][0] = level_mass[0] / norm;
    res.apps.p[k][1] = level_mass[1] / norm;
    res.p_toggle[k] = toggle_mass / norm;
  }
  return res;
}

std::array<RailBcjr, 2> bcjr_equalize(const waveform::QuantizedFrame& frame,
                                      const trellis::RailTrellis& t,
                                      double n0, std::size_t valid_from) {
  const auto bt = trellis::build_branch_tables(t, n0);
  const auto m = static_cast<std::size_t>(frame.m);
  const std::size_t blocks = frame.y.size() / m;
  std::vector<std::uint32_t> out_i, out_q;
  for (std::size_t n = valid_from; n < blocks; ++n) {
    std::span<const waveform::cplx> block(&frame.y[n * m], m);
    out_i.push_back(trellis::outcome_bits(block, false));
    out_q.push_back(trellis::outcome_bits(block, true));
  }
  return {bcjr_rail(out_i, t, bt, t.init), bcjr_rail(out_q, t, bt, t.init)};
}

std::vector<std::int8_t> map_detect(const AppMatrix& apps) {
  std::vector<std::int8_t> dec(apps.size());
  for (std::size_t n = 0; n < apps.size(); ++n)
    dec[n] = apps.p[n][1] > apps.p[n][0] ? 1 : -1;
  return dec;
}

CodedChain::CodedChain(const CodedChainParams& params,
                       const ldpc::LdpcCode& fec)
    : params_(params), fec_(&fec) {
  waveform::ChainConfig cfg = params_.chain;
  cfg.n0 = 0.0;
  trellis_ = trellis::build_rail_trellis(
      cfg, waveform::SourceLaw::rll(params_.d));
  block_code_ = rll::build_block_code();

  const std::size_t coded = static_cast<std::size_t>(fec.n);
  std::size_t padded = coded;
  while (padded % 6 != 0) ++padded;  // 3-bit groups split evenly on 2 rails
  pad_bits_ = padded - coded;
  codewords_ = padded / 3;
  payload_per_rail_ = (codewords_ / 2) * 5;

  interleaver_.resize(coded);
  std::iota(interleaver_.begin(), interleaver_.end(), 0u);
  auto rng = make_stream(params_.interleaver_seed, 0);
  std::shuffle(interleaver_.begin(), interleaver_.end(), rng);

  // Average symbol energy of the coded waveform, measured once on seeded
  // random frames (edge cells excluded via the symbol core).
  double p_acc = 0.0;
  int reps = 8;
  for (int rep = 0; rep < reps; ++rep) {
    auto prng = make_stream(0x9EA5ULL, static_cast<std::uint64_t>(rep));
    std::vector<std::uint8_t> coded_bits(static_cast<std::size_t>(fec.n));
    std::uniform_int_distribution<int> bit(0, 1);
    for (auto& b : coded_bits) b = static_cast<std::uint8_t>(bit(prng));
    const auto levels = frame_levels(coded_bits);
    const auto x = waveform::build_symbols(levels[0], levels[1]);
    const auto sig = waveform::modulate(x, cfg);
    double p = 0.0;
    for (const auto& v : sig.samples) p += std::norm(v);
    p_acc += p * sig.dt / (static_cast<double>(x.size()) * cfg.delta());
  }
  es_per_symbol_ = (p_acc / reps) * cfg.delta();
}

std::array<std::vector<std::int8_t>, 2> CodedChain::frame_levels(
    std::span<const std::uint8_t> codeword_bits_interleaved) const {
  // codeword_bits_interleaved are the FEC-coded bits already permuted;
  // append the pad, map 3-bit groups to RLL codewords, split on rails.
  std::vector<std::uint8_t> padded(codeword_bits_interleaved.begin(),
                                   codeword_bits_interleaved.end());
  padded.resize(padded.size() + pad_bits_, 0);

  std::array<std::vector<std::uint8_t>, 2> dk;
  const std::size_t half = codewords_ / 2;
  for (std::size_t c = 0; c < codewords_; ++c) {
    const int idx = (padded[3 * c] << 2) | (padded[3 * c + 1] << 1) |
                    padded[3 * c + 2];
    const auto& word = block_code_.encode(idx);
    auto& rail = dk[c < half ? 0 : 1];
    rail.insert(rail.end(), word.begin(), word.end());
  }

  const auto L = static_cast<std::size_t>(trellis_.L);
  std::array<std::vector<std::int8_t>, 2> levels;
  for (int r = 0; r < 2; ++r) {
    auto payload = rll::nrzi_encode(dk[static_cast<std::size_t>(r)]);
    auto& lv = levels[static_cast<std::size_t>(r)];
    lv.assign(L, -1);  // lead-in: known all-(-1), FSM state d
    lv.insert(lv.end(), payload.begin(), payload.end());
    const std::int8_t tail = lv.back();
    lv.insert(lv.end(), L, tail);  // tail holds flush the ISI
  }
  return levels;
}

double CodedChain::ebn0_to_n0(double ebn0_db) const {
  const double info_per_frame = static_cast<double>(fec_->k);
  const double symbols = static_cast<double>(payload_per_rail_);
  const double eb = es_per_symbol_ * symbols / info_per_frame;
  return eb / std::pow(10.0, ebn0_db / 10.0);
}

void CodedChain::set_n0(double n0) {
  params_.chain.n0 = n0;
  tables_.emplace(trellis::build_branch_tables(trellis_, n0));
}

FrameOutcome CodedChain::run_frame(std::span<const std::uint8_t> info,
                                   std::mt19937_64& rng) const {
  if (!tables_) throw std::logic_error("CodedChain: set_n0 first");
  const auto coded = ldpc::encode(*fec_, info);
  std::vector<std::uint8_t> inter(coded.size());
  for (std::size_t i = 0; i < coded.size(); ++i)
    inter[i] = coded[interleaver_[i]];

  const auto levels = frame_levels(inter);
  const auto x = waveform::build_symbols(levels[0], levels[1]);
  auto res = channel::transmit_frame(x, params_.chain, rng);

  const auto L = static_cast<std::size_t>(trellis_.L);
  const auto m = static_cast<std::size_t>(params_.chain.m);
  const std::size_t blocks = x.size();
  std::vector<std::uint32_t> out[2];
  for (std::size_t n = L; n < blocks; ++n) {
    std::span<const waveform::cplx> block(&res.frame.y[n * m], m);
    out[0].push_back(trellis::outcome_bits(block, false));
    out[1].push_back(trellis::outcome_bits(block, true));
  }

  // Known boundary: all-(-1) window in FSM state d.
  std::vector<double> init(trellis_.num_states(), 0.0);
  const auto start = trellis_.find_state(0u, trellis_.d);
  init[static_cast<std::size_t>(start)] = 1.0;

  FrameOutcome outc;
  std::vector<double> llr_inter(coded.size(), 0.0);
  const std::size_t half = codewords_ / 2;
  for (int r = 0; r < 2; ++r) {
    const auto bc = bcjr_rail(out[static_cast<std::size_t>(r)], trellis_,
                              *tables_, init);
    if (!bc.ok) throw std::runtime_error("bcjr: normalization failure");
    // Payload toggles start at measured index 0 (block L).
    const std::size_t cw0 = r == 0 ? 0 : half;
    for (std::size_t c = 0; c < half; ++c) {
      std::array<double, 5> p_one{};
      for (int b = 0; b < 5; ++b)
        p_one[static_cast<std::size_t>(b)] =
            bc.p_toggle[c * 5 + static_cast<std::size_t>(b)];
      const auto dec = rll::rll_soft_decode(block_code_, p_one);
      if (dec.erasure) ++outc.demap_erasures;
      for (int b = 0; b < 3; ++b) {
        const std::size_t pos = (cw0 + c) * 3 + static_cast<std::size_t>(b);
        if (pos < llr_inter.size())
          llr_inter[pos] = dec.erasure ? 0.0 : dec.llrs[static_cast<std::size_t>(b)];
      }
    }
  }

  std::vector<double> llrs(coded.size(), 0.0);
  for (std::size_t i = 0; i < coded.size(); ++i)
    llrs[interleaver_[i]] = llr_inter[i];

  const auto dec = ldpc::decode(*fec_, llrs, 50);
  outc.decoded = dec.info_bits;
  outc.fec_success = dec.success;
  for (std::size_t i = 0; i < info.size(); ++i)
    if (dec.info_bits[i] != info[i]) ++outc.bit_errors;
  outc.block_error = outc.bit_errors > 0;
  return outc;
}

BlerPoint bler_point(const CodedChain& chain_proto, double ebn0_db,
                     std::size_t max_frames, std::size_t min_errors,
                     std::uint64_t seed, int workers, std::size_t batch) {
  CodedChain chain = chain_proto;
  chain.set_n0(chain.ebn0_to_n0(ebn0_db));

  BlerPoint pt;
  pt.ebn0_db = ebn0_db;
  std::vector<std::uint8_t> errs(batch);
  while (pt.frames < max_frames && pt.errors < min_errors) {
    const std::size_t count = std::min(batch, max_frames - pt.frames);
    std::fill(errs.begin(), errs.end(), 0);
    parallel_for(count, workers, [&](std::size_t i) {
      auto rng = make_stream(seed, pt.frames + i);
      std::vector<std::uint8_t> info(chain.info_bits_per_frame());
      std::uniform_int_distribution<int> bit(0, 1);
      for (auto& b : info) b = static_cast<std::uint8_t>(bit(rng));
      const auto out = chain.run_frame(info, rng);
      errs[i] = out.block_error ? 1 : 0;
    });
    for (std::size_t i = 0; i < count; ++i) pt.errors += errs[i];
    pt.frames += count;
  }
  pt.bler = pt.frames ? static_cast<double>(pt.errors) / pt.frames : 0.0;
  return pt;
}

}  // namespace zxm::equalizer
