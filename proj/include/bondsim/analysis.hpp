#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bondsim/dcf.hpp"
#include "bondsim/scenarios.hpp"
#include "bondsim/trace.hpp"

namespace bondsim {

enum class LoadClass { Low, Medium, High };
enum class CorrClass { Low, Medium, High, Unclassified };

std::string load_class_name(LoadClass c);
std::string corr_class_name(CorrClass c);

/// Load regimes: low (<= 0.1), medium (0.1, 0.2], high (> 0.2).
LoadClass classify_load(double mean_occupancy);

/// Correlation levels: low (xi <= 0.1), medium (0.2 <= xi < 0.4),
/// high (xi >= 0.5); the gaps map to Unclassified.
CorrClass classify_correlation(double xi);

/// Sample Pearson correlation of two equal-length series. A constant series
/// (zero variance) yields 0 by convention.
double pearson(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct CorrelationReport {
  int best_primary = 0;
  double xi = 0.0;
  std::vector<double> pairwise_rho;        // one per non-primary channel, by index
  CorrClass correlation_class = CorrClass::Low;
  std::vector<int> zero_variance_channels;  // channels where rho defaulted to 0
};

/// Correlation of the best primary channel with every other channel in the
/// band. The best primary maximizes the supplied per-primary throughputs
/// (ties to the lowest index); xi is the mean of the pairwise coefficients.
CorrelationReport best_primary_xi(const Epoch& epoch, std::span<const double> ref_gamma_by_primary);

enum class Scenario { Deferral, Hidden };

std::string scenario_name(Scenario s);

/// Per-epoch sweep over every primary and every requested policy.
struct SweepReport {
  LoadClass load_class = LoadClass::Low;
  std::vector<BondingPolicy> policies;
  std::vector<std::vector<EpochSimResult>> results;  // [policy][primary]
  std::vector<std::vector<double>> gamma_bps;        // [policy][primary]
  std::vector<int> best_primary;                     // per policy, ties to lowest index
  std::vector<std::optional<double>> normalized_best;  // best gamma / single-channel best gamma
  std::vector<std::optional<double>> co_nc_ratio;      // per primary, needs both policies

  std::optional<std::size_t> policy_index(PolicyKind kind) const;
};

SweepReport sweep(const Epoch& epoch, std::span<const BondingPolicy> policies,
                  const PhyMacConfig& cfg, std::uint64_t seed,
                  Scenario scenario = Scenario::Deferral, const HiddenConfig& hidden = {});

struct MreResult {
  double mre = 0.0;
  int n_used = 0;
  int n_excluded = 0;  // pairs dropped for a zero reference value
};

/// Mean over pairs of |model - reference| / reference; zero-reference pairs
/// are excluded and tallied.
MreResult mean_relative_error(std::span<const double> reference, std::span<const double> model);

// Plot-ready per-(epoch, primary, policy) CSV surface.
struct EpochCsvRow {
  long epoch_id = 0;
  double mean_occupancy = 0.0;
  LoadClass load_class = LoadClass::Low;
  int primary = 0;
  std::string policy;
  double throughput_bps = 0.0;
  std::optional<double> normalized;  // gamma / best single-channel gamma of the epoch
  double xi = 0.0;
  CorrClass corr_class = CorrClass::Low;
  double omega_mhz = 0.0;
};

std::string epoch_csv_header();
std::string format_epoch_csv_row(const EpochCsvRow& row);

}  // namespace bondsim
