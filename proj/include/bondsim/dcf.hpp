#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bondsim/trace.hpp"

#include <json.hpp>

namespace bondsim {

using Microseconds = std::chrono::microseconds;

/// MAC/PHY timing and rate parameters of the simulated channel-bonding BSS.
/// All durations must be integer multiples of the slot, which equals the
/// trace sample period (one backoff slot == one temporal sample).
struct PhyMacConfig {
  CcaThreshold cca{};

  // Rate model: MCS 9 (256-QAM, coding rate 5/6) on every bonded channel.
  // The per-channel default is the 20 MHz 802.11ax single-stream MCS 9 rate
  // (234 data subcarriers * 8 bits * 5/6 per 13.6 us symbol), rounded.
  int mcs_bits_per_symbol = 8;
  double mcs_coding_rate = 5.0 / 6.0;
  std::uint64_t per_channel_rate_bps = 114'700'000;  // r_20

  int channel_bandwidth_mhz = 20;   // b
  int packet_length_bits = 12000;   // L_d
  int max_aggregation = 64;         // N_a

  Microseconds slot{10};            // T_e, also the sample period
  Microseconds sifs{20};
  Microseconds difs{30};
  Microseconds pifs{30};
  Microseconds t_rts{50};
  Microseconds t_cts{40};
  Microseconds t_back{50};
  Microseconds txop_limit{5000};

  int cw_min = 16;
  int backoff_stages = 5;           // m

  void validate() const;
  int slots(Microseconds d) const { return static_cast<int>(d.count() / slot.count()); }
};

enum class PolicyKind { SingleChannel, Contiguous, NonContiguous };

enum class SecondaryCheck {
  PifsWindow,       // secondary idle for every sample in [t - pifs, t)
  InstantAtExpiry,  // secondary idle at sample t
};

struct BondingPolicy {
  PolicyKind kind = PolicyKind::Contiguous;
  SecondaryCheck secondary_check = SecondaryCheck::PifsWindow;
  // Restrict contiguous sets to 802.11-aligned 20/40/80/160 blocks.
  bool ieee_channelization = false;

  static BondingPolicy single_channel(SecondaryCheck check = SecondaryCheck::PifsWindow) {
    return BondingPolicy{PolicyKind::SingleChannel, check, false};
  }
  static BondingPolicy contiguous(SecondaryCheck check = SecondaryCheck::PifsWindow) {
    return BondingPolicy{PolicyKind::Contiguous, check, false};
  }
  static BondingPolicy non_contiguous(SecondaryCheck check = SecondaryCheck::PifsWindow) {
    return BondingPolicy{PolicyKind::NonContiguous, check, false};
  }
};

std::string policy_name(PolicyKind kind);  // "sc", "co", "nc"
PolicyKind parse_policy(const std::string& name);

enum class DcfState { Busy, Difs, Backoff, TxRx };

struct MachineState {
  DcfState current = DcfState::Busy;
  int difs_progress = 0;
  int backoff_counter = 0;
  int backoff_stage = 0;
};

/// Aggregation and duration of one frame exchange (RTS/CTS/DATA/BACK plus
/// the SIFS periods in between), in whole samples.
struct FrameTiming {
  int n_packets = 0;
  int total_samples = 0;
  int data_samples = 0;
};

/// One transmission: half-open sample span and the band-relative channels
/// used. `lost` is set by the hidden-terminal scenario.
struct TxRecord {
  int start_sample = 0;
  int end_sample = 0;
  std::vector<int> channels;
  int n_packets = 0;
  bool lost = false;

  int span() const { return end_sample - start_sample; }
};

struct EpochSimResult {
  std::vector<TxRecord> records;
  std::uint64_t packets_sent = 0;  // over non-lost records
  double throughput_bps = 0.0;
  int primary = 0;
  BondingPolicy policy{};
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const EpochSimResult& r);

/// Uniform backoff in [0, cw_min * 2^stage - 1]; stages above the maximum
/// saturate at cw_min * 2^m.
int draw_backoff(std::mt19937_64& rng, int stage, const PhyMacConfig& cfg);

/// Packet aggregation and frame duration for a transmission over n_channels
/// bonded channels. Data time is rounded up to whole samples and the total
/// never exceeds the TXOP limit (a config where a single packet cannot fit
/// is rejected).
FrameTiming frame_duration(int n_channels, const PhyMacConfig& cfg);

/// Channels selected for a frame starting at sample t_expiry, given the
/// policy and the configured secondary availability check. The primary is
/// always included; the result is sorted ascending.
std::vector<int> select_channels(const BondingPolicy& policy, const Epoch& epoch, int t_expiry,
                                 int primary, const PhyMacConfig& cfg);

using BackoffDraw = std::function<int(int stage)>;
/// Scores a completed frame; returning true marks it lost (0 packets).
using FrameScorer = std::function<bool(const TxRecord&)>;

/// Core per-sample DCF walk over one epoch. Frames are scored by `scorer`
/// as they complete; a lost frame escalates the backoff stage when
/// `escalate_on_loss` is set, a successful one resets it to 0.
EpochSimResult run_epoch_scored(const Epoch& epoch, int primary, const BondingPolicy& policy,
                                const PhyMacConfig& cfg, const BackoffDraw& draw,
                                const FrameScorer& scorer, bool escalate_on_loss);

/// Deferral scenario: neighbors sense the bonded transmission and defer, so
/// no frame is ever lost. The backoff stream is seeded from (seed, epoch) so
/// that runs over the same epoch share draws across policies and primaries.
EpochSimResult run_epoch(const Epoch& epoch, int primary, const BondingPolicy& policy,
                         const PhyMacConfig& cfg, std::uint64_t seed);

/// run_epoch with injected backoff draws (test hook).
EpochSimResult run_epoch_with_draws(const Epoch& epoch, int primary, const BondingPolicy& policy,
                                    const PhyMacConfig& cfg, const BackoffDraw& draw);

/// Stream seed used by run_epoch for a given epoch.
std::uint64_t epoch_stream_seed(std::uint64_t seed, const Epoch& epoch);

/// Throughput for `packets` data packets delivered over `duration`.
double throughput_bps(std::uint64_t packets, int packet_length_bits,
                      std::chrono::nanoseconds duration);

}  // namespace bondsim
