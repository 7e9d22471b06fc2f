#pragma once

#include <optional>
#include <vector>

#include "bondsim/dcf.hpp"
#include "bondsim/trace.hpp"

namespace bondsim {

/// Hidden-terminal scoring parameters. A frame is lost when at least
/// alpha * |span| of its samples see external activity on any used channel;
/// alpha filters spurious single-sample noise.
struct HiddenConfig {
  double alpha = 0.01;
  bool escalate_cw = true;  // double CW (up to m stages) after each loss

  void validate() const;
};

/// Aggregate external bandwidth overlapped by the bonder's transmissions.
struct DeprivationReport {
  double omega_mhz = 0.0;
  double omega_mbps = 0.0;  // occupied 20 MHz samples valued at the MCS 9 rate
  std::vector<double> per_record_mhz;
};

/// True when external activity covers at least alpha * |span| samples of the
/// frame on any of its channels (inclusive bound).
bool frame_lost(const TxRecord& record, const Epoch& epoch, const HiddenConfig& cfg);

/// Hidden-terminal scenario: neighbors do not defer, so completed frames are
/// scored against the trace and lost ones contribute nothing. Uses the same
/// backoff stream as run_epoch for the same (seed, epoch).
EpochSimResult apply_hidden_scenario(const Epoch& epoch, int primary, const BondingPolicy& policy,
                                     const PhyMacConfig& cfg, const HiddenConfig& hidden,
                                     std::uint64_t seed);

/// omega: occupied (sample, channel) cells inside the result's transmissions,
/// scaled to MHz of deprived bandwidth over the epoch duration.
DeprivationReport bandwidth_deprivation(const EpochSimResult& result, const Epoch& epoch,
                                        const PhyMacConfig& cfg);

/// kappa = (gamma_policy - gamma_sc) / (omega_policy - omega_sc). All inputs
/// must share one rate unit; a zero denominator yields nullopt (never +-inf).
std::optional<double> zero_sum_ratio(double gamma_policy, double gamma_sc, double omega_policy,
                                     double omega_sc);

}  // namespace bondsim
