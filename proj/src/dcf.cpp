#include "bondsim/dcf.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "bondsim/rng.hpp"

namespace bondsim {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

bool multiple_of(Microseconds d, Microseconds slot) {
  return d.count() > 0 && d.count() % slot.count() == 0;
}

}  // namespace

void PhyMacConfig::validate() const {
  cca.validate();
  if (slot.count() <= 0) throw std::invalid_argument("slot must be positive");
  for (const auto d : {sifs, difs, pifs, t_rts, t_cts, t_back, txop_limit})
    if (!multiple_of(d, slot))
      throw std::invalid_argument("all durations must be positive multiples of the slot");
  if (cw_min < 2 || !std::has_single_bit(static_cast<unsigned>(cw_min)))
    throw std::invalid_argument("cw_min must be a power of two >= 2");
  if (backoff_stages < 0) throw std::invalid_argument("backoff stages must be >= 0");
  if (per_channel_rate_bps == 0) throw std::invalid_argument("per-channel rate must be > 0");
  if (packet_length_bits <= 0) throw std::invalid_argument("packet length must be > 0");
  if (max_aggregation < 1) throw std::invalid_argument("max aggregation must be >= 1");
  if (channel_bandwidth_mhz <= 0) throw std::invalid_argument("channel bandwidth must be > 0");
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::SingleChannel: return "sc";
    case PolicyKind::Contiguous: return "co";
    case PolicyKind::NonContiguous: return "nc";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "sc") return PolicyKind::SingleChannel;
  if (name == "co") return PolicyKind::Contiguous;
  if (name == "nc") return PolicyKind::NonContiguous;
  throw std::invalid_argument("unknown policy '" + name + "' (expected sc, co or nc)");
}

int draw_backoff(std::mt19937_64& rng, int stage, const PhyMacConfig& cfg) {
  if (stage < 0) throw std::invalid_argument("backoff stage must be >= 0");
  const int capped = std::min(stage, cfg.backoff_stages);
  // cw is a power of two, so masking gives an unbiased uniform draw.
  const std::uint64_t cw = static_cast<std::uint64_t>(cfg.cw_min) << capped;
  return static_cast<int>(rng() & (cw - 1));
}

FrameTiming frame_duration(int n_channels, const PhyMacConfig& cfg) {
  if (n_channels < 1) throw std::invalid_argument("frame_duration: need at least one channel");

  const std::uint64_t overhead_us =
      static_cast<std::uint64_t>((cfg.t_rts + cfg.sifs + cfg.t_cts + cfg.sifs + cfg.sifs + cfg.t_back).count());
  const std::uint64_t txop_us = static_cast<std::uint64_t>(cfg.txop_limit.count());
  const std::uint64_t slot_us = static_cast<std::uint64_t>(cfg.slot.count());
  const std::uint64_t rate_bps = cfg.per_channel_rate_bps * static_cast<std::uint64_t>(n_channels);
  const std::uint64_t packet_bits = static_cast<std::uint64_t>(cfg.packet_length_bits);

  std::uint64_t by_budget = 0;
  if (txop_us > overhead_us) {
    const std::uint64_t budget_us = txop_us - overhead_us;
    by_budget = budget_us * rate_bps / (packet_bits * 1'000'000ULL);
  }
  const std::uint64_t n_packets =
      std::clamp<std::uint64_t>(by_budget, 1, static_cast<std::uint64_t>(cfg.max_aggregation));

  const std::uint64_t data_samples =
      ceil_div(n_packets * packet_bits * 1'000'000ULL, rate_bps * slot_us);
  const std::uint64_t total_samples = overhead_us / slot_us + data_samples;

  if (by_budget < 1 && total_samples * slot_us > txop_us)
    throw std::runtime_error("frame_duration: config infeasible, a single packet exceeds the TXOP limit");

  FrameTiming timing;
  timing.n_packets = static_cast<int>(n_packets);
  timing.data_samples = static_cast<int>(data_samples);
  timing.total_samples = static_cast<int>(total_samples);
  return timing;
}

namespace {

bool secondary_available(const Epoch& epoch, int channel, int t_expiry, SecondaryCheck check,
                         int pifs_samples) {
  if (check == SecondaryCheck::InstantAtExpiry)
    return epoch.bits(static_cast<std::size_t>(t_expiry), static_cast<std::size_t>(channel)) == 0;
  const int from = std::max(0, t_expiry - pifs_samples);
  for (int t = from; t < t_expiry; ++t)
    if (epoch.bits(static_cast<std::size_t>(t), static_cast<std::size_t>(channel)) != 0) return false;
  return true;
}

// Widest 802.11-aligned block (1/2/4/8... channels) containing the primary
// that fits inside [lo, hi].
std::pair<int, int> align_ieee_block(int lo, int hi, int primary) {
  int best_lo = primary, best_hi = primary;
  for (int width = 2;; width *= 2) {
    const int block_lo = (primary / width) * width;
    const int block_hi = block_lo + width - 1;
    if (block_lo < lo || block_hi > hi) break;
    best_lo = block_lo;
    best_hi = block_hi;
  }
  return {best_lo, best_hi};
}

}  // namespace

std::vector<int> select_channels(const BondingPolicy& policy, const Epoch& epoch, int t_expiry,
                                 int primary, const PhyMacConfig& cfg) {
  const int width = static_cast<int>(epoch.n_channels());
  if (primary < 0 || primary >= width)
    throw std::invalid_argument("select_channels: primary outside band");
  if (t_expiry < 0 || static_cast<std::size_t>(t_expiry) >= epoch.n_samples())
    throw std::invalid_argument("select_channels: expiry outside epoch");

  if (policy.kind == PolicyKind::SingleChannel) return {primary};

  const int pifs_samples = cfg.slots(cfg.pifs);
  std::vector<bool> available(static_cast<std::size_t>(width), false);
  available[static_cast<std::size_t>(primary)] = true;
  for (int c = 0; c < width; ++c) {
    if (c == primary) continue;
    available[static_cast<std::size_t>(c)] =
        secondary_available(epoch, c, t_expiry, policy.secondary_check, pifs_samples);
  }

  std::vector<int> selected;
  if (policy.kind == PolicyKind::NonContiguous) {
    for (int c = 0; c < width; ++c)
      if (available[static_cast<std::size_t>(c)]) selected.push_back(c);
    return selected;
  }

  // Contiguous: maximal run of available channels containing the primary.
  int lo = primary, hi = primary;
  while (lo > 0 && available[static_cast<std::size_t>(lo - 1)]) --lo;
  while (hi + 1 < width && available[static_cast<std::size_t>(hi + 1)]) ++hi;
  if (policy.ieee_channelization) std::tie(lo, hi) = align_ieee_block(lo, hi, primary);
  for (int c = lo; c <= hi; ++c) selected.push_back(c);
  return selected;
}

double throughput_bps(std::uint64_t packets, int packet_length_bits,
                      std::chrono::nanoseconds duration) {
  const std::uint64_t bits = packets * static_cast<std::uint64_t>(packet_length_bits);
  return static_cast<double>(bits) * 1e9 / static_cast<double>(duration.count());
}

EpochSimResult run_epoch_scored(const Epoch& epoch, int primary, const BondingPolicy& policy,
                                const PhyMacConfig& cfg, const BackoffDraw& draw,
                                const FrameScorer& scorer, bool escalate_on_loss) {
  const int width = static_cast<int>(epoch.n_channels());
  if (primary < 0 || primary >= width)
    throw std::invalid_argument("run_epoch: primary outside band");
  if (epoch.n_samples() == 0) throw std::invalid_argument("run_epoch: empty epoch");
  if (epoch.sample_period != std::chrono::duration_cast<std::chrono::nanoseconds>(cfg.slot))
    throw std::invalid_argument("run_epoch: slot must equal the epoch sample period");
  cfg.validate();

  const int n = static_cast<int>(epoch.n_samples());
  const int difs_samples = cfg.slots(cfg.difs);

  EpochSimResult result;
  result.primary = primary;
  result.policy = policy;

  MachineState st;
  st.current = DcfState::Busy;
  st.backoff_counter = draw(0);

  const auto primary_idle = [&](int t) {
    return epoch.bits(static_cast<std::size_t>(t), static_cast<std::size_t>(primary)) == 0;
  };

  int t = 0;
  while (t < n) {
    switch (st.current) {
      case DcfState::Busy:
        if (primary_idle(t)) {
          st.current = DcfState::Difs;
          st.difs_progress = 1;
          if (st.difs_progress == difs_samples) st.current = DcfState::Backoff;
        }
        ++t;
        break;

      case DcfState::Difs:
        if (primary_idle(t)) {
          if (++st.difs_progress == difs_samples) st.current = DcfState::Backoff;
        } else {
          st.current = DcfState::Busy;
          st.difs_progress = 0;
        }
        ++t;
        break;

      case DcfState::Backoff:
        if (!primary_idle(t)) {
          // Freeze the counter; contention resumes after a fresh DIFS.
          st.current = DcfState::Busy;
          st.difs_progress = 0;
          ++t;
        } else if (st.backoff_counter > 0) {
          --st.backoff_counter;
          ++t;
        } else {
          // Counter expired on an idle sample: transmit from here.
          const std::vector<int> channels = select_channels(policy, epoch, t, primary, cfg);
          const FrameTiming timing = frame_duration(static_cast<int>(channels.size()), cfg);
          if (t + timing.total_samples > n) {
            // Frame would cross the epoch boundary; idle until the end.
            t = n;
            break;
          }
          TxRecord rec;
          rec.start_sample = t;
          rec.end_sample = t + timing.total_samples;
          rec.channels = channels;
          rec.n_packets = timing.n_packets;
          rec.lost = scorer(rec);
          if (rec.lost) {
            st.backoff_stage =
                escalate_on_loss ? std::min(st.backoff_stage + 1, cfg.backoff_stages) : st.backoff_stage;
          } else {
            result.packets_sent += static_cast<std::uint64_t>(rec.n_packets);
            st.backoff_stage = 0;
          }
          result.records.push_back(std::move(rec));
          t += timing.total_samples;
          st.current = DcfState::Difs;
          st.difs_progress = 0;
          st.backoff_counter = draw(st.backoff_stage);
        }
        break;

      case DcfState::TxRx:
        // Transmissions are applied as whole spans above.
        ++t;
        break;
    }
  }

  result.throughput_bps = throughput_bps(result.packets_sent, cfg.packet_length_bits, epoch.duration());
  return result;
}

std::uint64_t epoch_stream_seed(std::uint64_t seed, const Epoch& epoch) {
  return derive_seed(seed, static_cast<std::uint64_t>(epoch.source_offset));
}

EpochSimResult run_epoch(const Epoch& epoch, int primary, const BondingPolicy& policy,
                         const PhyMacConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(epoch_stream_seed(seed, epoch));
  auto draw = [&rng, &cfg](int stage) { return draw_backoff(rng, stage, cfg); };
  EpochSimResult result = run_epoch_scored(epoch, primary, policy, cfg, draw,
                                           [](const TxRecord&) { return false; }, false);
  result.seed = seed;
  return result;
}

EpochSimResult run_epoch_with_draws(const Epoch& epoch, int primary, const BondingPolicy& policy,
                                    const PhyMacConfig& cfg, const BackoffDraw& draw) {
  return run_epoch_scored(epoch, primary, policy, cfg, draw,
                          [](const TxRecord&) { return false; }, false);
}

void to_json(nlohmann::json& j, const EpochSimResult& r) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"start", rec.start_sample},
                       {"end", rec.end_sample},
                       {"channels", rec.channels},
                       {"packets", rec.n_packets},
                       {"lost", rec.lost}});
  }
  j = nlohmann::json{{"primary", r.primary},
                     {"policy", policy_name(r.policy.kind)},
                     {"seed", r.seed},
                     {"packets", r.packets_sent},
                     {"throughput_bps", r.throughput_bps},
                     {"records", std::move(records)}};
}

}  // namespace bondsim
