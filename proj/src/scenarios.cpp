#include "bondsim/scenarios.hpp"

#include <stdexcept>

#include "bondsim/rng.hpp"

namespace bondsim {

void HiddenConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0, 1]");
}

bool frame_lost(const TxRecord& record, const Epoch& epoch, const HiddenConfig& cfg) {
  cfg.validate();
  if (record.channels.empty()) throw std::invalid_argument("frame_lost: empty channel set");
  if (record.start_sample < 0 || record.end_sample > static_cast<int>(epoch.n_samples()) ||
      record.start_sample >= record.end_sample)
    throw std::invalid_argument("frame_lost: record span outside epoch");
  for (const int c : record.channels)
    if (c < 0 || static_cast<std::size_t>(c) >= epoch.n_channels())
      throw std::invalid_argument("frame_lost: channel outside epoch");

  int active = 0;
  for (int t = record.start_sample; t < record.end_sample; ++t) {
    for (const int c : record.channels) {
      if (epoch.bits(static_cast<std::size_t>(t), static_cast<std::size_t>(c)) != 0) {
        ++active;
        break;
      }
    }
  }
  return static_cast<double>(active) >= cfg.alpha * static_cast<double>(record.span());
}

EpochSimResult apply_hidden_scenario(const Epoch& epoch, int primary, const BondingPolicy& policy,
                                     const PhyMacConfig& cfg, const HiddenConfig& hidden,
                                     std::uint64_t seed) {
  hidden.validate();
  std::mt19937_64 rng(epoch_stream_seed(seed, epoch));
  auto draw = [&rng, &cfg](int stage) { return draw_backoff(rng, stage, cfg); };
  auto scorer = [&epoch, &hidden](const TxRecord& rec) { return frame_lost(rec, epoch, hidden); };
  EpochSimResult result =
      run_epoch_scored(epoch, primary, policy, cfg, draw, scorer, hidden.escalate_cw);
  result.seed = seed;
  return result;
}

DeprivationReport bandwidth_deprivation(const EpochSimResult& result, const Epoch& epoch,
                                        const PhyMacConfig& cfg) {
  const std::uint64_t period_ns = static_cast<std::uint64_t>(epoch.sample_period.count());
  const std::uint64_t epoch_ns = static_cast<std::uint64_t>(epoch.duration().count());
  const std::uint64_t b_mhz = static_cast<std::uint64_t>(cfg.channel_bandwidth_mhz);

  DeprivationReport report;
  report.per_record_mhz.reserve(result.records.size());
  std::uint64_t total_cells = 0;
  for (const auto& rec : result.records) {
    if (rec.start_sample < 0 || rec.end_sample > static_cast<int>(epoch.n_samples()))
      throw std::invalid_argument("bandwidth_deprivation: record span outside epoch");
    std::uint64_t cells = 0;
    for (int t = rec.start_sample; t < rec.end_sample; ++t)
      for (const int c : rec.channels)
        cells += epoch.bits(static_cast<std::size_t>(t), static_cast<std::size_t>(c));
    total_cells += cells;
    report.per_record_mhz.push_back(static_cast<double>(cells * b_mhz * period_ns) /
                                    static_cast<double>(epoch_ns));
  }
  report.omega_mhz =
      static_cast<double>(total_cells * b_mhz * period_ns) / static_cast<double>(epoch_ns);
  // Each occupied 20 MHz sample valued as data at the per-channel MCS 9 rate.
  report.omega_mbps = report.omega_mhz * (static_cast<double>(cfg.per_channel_rate_bps) / 1e6) /
                      static_cast<double>(cfg.channel_bandwidth_mhz);
  return report;
}

std::optional<double> zero_sum_ratio(double gamma_policy, double gamma_sc, double omega_policy,
                                     double omega_sc) {
  const double denom = omega_policy - omega_sc;
  if (denom == 0.0) return std::nullopt;
  return (gamma_policy - gamma_sc) / denom;
}

}  // namespace bondsim
