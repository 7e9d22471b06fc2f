#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "bondsim/analysis.hpp"
#include "bondsim/trace.hpp"

namespace bondsim {

/// Two-state on/off channel model with geometric holding times at the sample
/// grid (the discrete analogue of exponential holding times).
struct MarkovChannelParams {
  double mean_busy_samples = 1.0;
  double mean_idle_samples = 1.0;

  double p_busy_to_idle() const { return 1.0 / mean_busy_samples; }
  double p_idle_to_busy() const { return 1.0 / mean_idle_samples; }
  double stationary_occupancy() const {
    return mean_busy_samples / (mean_busy_samples + mean_idle_samples);
  }
  void validate() const;
};

struct IidChannelParams {
  double occupancy_probability = 0.0;

  void validate() const;
};

/// Thrown when a constant series cannot support a two-state fit.
class degenerate_fit_error : public std::runtime_error {
 public:
  explicit degenerate_fit_error(int constant_value)
      : std::runtime_error("degenerate fit: series is constant " + std::to_string(constant_value)),
        constant_value(constant_value) {}

  int constant_value;
};

/// Mean lengths of the maximal busy and idle runs (runs truncated by the
/// series boundaries are included as observed).
MarkovChannelParams fit_markov(std::span<const std::uint8_t> series);

IidChannelParams fit_iid(std::span<const std::uint8_t> series);

/// Independent per-channel chains; the initial state is drawn from the
/// stationary distribution.
OccupancyTrace generate_markov(std::span<const MarkovChannelParams> params, std::size_t n_samples,
                               std::uint64_t seed, SamplePeriod sample_period = kDefaultSamplePeriod);

OccupancyTrace generate_iid(std::span<const IidChannelParams> params, std::size_t n_samples,
                            std::uint64_t seed, SamplePeriod sample_period = kDefaultSamplePeriod);

enum class SynthModel { Markov, Iid };

std::string synth_model_name(SynthModel m);

/// Per-epoch model fidelity: fit both models to each source epoch, generate a
/// same-length synthetic epoch, and compare contiguous-bonding throughput over
/// every primary. Errors aggregate by the source epoch's load regime and
/// correlation class.
struct ModelComparisonReport {
  struct Cell {
    MreResult mre;
    std::vector<double> reference;  // per (epoch, primary) pair, in group order
    std::vector<double> model;
  };

  // Indexed [model][class]; models ordered Markov, Iid.
  std::array<std::array<Cell, 3>, 2> by_load;  // Low, Medium, High
  std::array<std::array<Cell, 4>, 2> by_corr;  // Low, Medium, High, Unclassified
  std::vector<double> source_xi;               // per epoch
  std::array<std::vector<double>, 2> model_xi;  // per epoch, per model
  int degenerate_fallbacks = 0;                 // channels fit as iid inside the Markov model
};

ModelComparisonReport model_comparison(std::span<const Epoch> epochs, const PhyMacConfig& cfg,
                                       std::uint64_t seed, bool allow_iid_fallback = true);

}  // namespace bondsim
