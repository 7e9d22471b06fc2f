#include "bondsim/synth.hpp"

#include <cmath>

#include "bondsim/rng.hpp"
#include "bondsim/trace_io.hpp"

namespace bondsim {

void MarkovChannelParams::validate() const {
  if (!(mean_busy_samples >= 1.0) || !std::isfinite(mean_busy_samples))
    throw std::invalid_argument("mean busy duration must be a finite value >= 1 sample");
  if (!(mean_idle_samples >= 1.0) || !std::isfinite(mean_idle_samples))
    throw std::invalid_argument("mean idle duration must be a finite value >= 1 sample");
}

void IidChannelParams::validate() const {
  if (!(occupancy_probability >= 0.0 && occupancy_probability <= 1.0))
    throw std::invalid_argument("occupancy probability outside [0, 1]");
}

MarkovChannelParams fit_markov(std::span<const std::uint8_t> series) {
  if (series.empty()) throw std::invalid_argument("fit_markov: empty series");

  std::uint64_t busy_total = 0, idle_total = 0;
  std::uint64_t busy_runs = 0, idle_runs = 0;
  std::size_t i = 0;
  while (i < series.size()) {
    const std::uint8_t value = series[i];
    std::size_t j = i;
    while (j < series.size() && series[j] == value) ++j;
    if (value) {
      busy_total += j - i;
      ++busy_runs;
    } else {
      idle_total += j - i;
      ++idle_runs;
    }
    i = j;
  }
  if (busy_runs == 0) throw degenerate_fit_error(0);
  if (idle_runs == 0) throw degenerate_fit_error(1);

  MarkovChannelParams params;
  params.mean_busy_samples = static_cast<double>(busy_total) / static_cast<double>(busy_runs);
  params.mean_idle_samples = static_cast<double>(idle_total) / static_cast<double>(idle_runs);
  params.validate();
  return params;
}

IidChannelParams fit_iid(std::span<const std::uint8_t> series) {
  if (series.empty()) throw std::invalid_argument("fit_iid: empty series");
  std::uint64_t busy = 0;
  for (const auto v : series) busy += v;
  return IidChannelParams{static_cast<double>(busy) / static_cast<double>(series.size())};
}

namespace {

void generate_markov_channel(const MarkovChannelParams& params, Matrix<std::uint8_t>& bits,
                             std::size_t channel, std::mt19937_64& rng) {
  const double p_leave_busy = params.p_busy_to_idle();
  const double p_leave_idle = params.p_idle_to_busy();
  bool busy = uniform01(rng) < params.stationary_occupancy();
  for (std::size_t t = 0; t < bits.rows(); ++t) {
    bits(t, channel) = busy ? 1 : 0;
    const double p_leave = busy ? p_leave_busy : p_leave_idle;
    if (uniform01(rng) < p_leave) busy = !busy;
  }
}

void generate_iid_channel(const IidChannelParams& params, Matrix<std::uint8_t>& bits,
                          std::size_t channel, std::mt19937_64& rng) {
  for (std::size_t t = 0; t < bits.rows(); ++t)
    bits(t, channel) = uniform01(rng) < params.occupancy_probability ? 1 : 0;
}

}  // namespace

OccupancyTrace generate_markov(std::span<const MarkovChannelParams> params, std::size_t n_samples,
                               std::uint64_t seed, SamplePeriod sample_period) {
  if (params.empty()) throw std::invalid_argument("generate_markov: no channel parameters");
  if (n_samples == 0) throw std::invalid_argument("generate_markov: need at least one sample");
  for (const auto& p : params) p.validate();

  OccupancyTrace trace;
  trace.bits = Matrix<std::uint8_t>(n_samples, params.size());
  trace.sample_period = sample_period;
  trace.channel_labels = default_channel_labels(params.size());
  for (std::size_t c = 0; c < params.size(); ++c) {
    std::mt19937_64 rng(derive_seed(seed, c, 0x6d61726bULL));
    generate_markov_channel(params[c], trace.bits, c, rng);
  }
  return trace;
}

OccupancyTrace generate_iid(std::span<const IidChannelParams> params, std::size_t n_samples,
                            std::uint64_t seed, SamplePeriod sample_period) {
  if (params.empty()) throw std::invalid_argument("generate_iid: no channel parameters");
  if (n_samples == 0) throw std::invalid_argument("generate_iid: need at least one sample");
  for (const auto& p : params) p.validate();

  OccupancyTrace trace;
  trace.bits = Matrix<std::uint8_t>(n_samples, params.size());
  trace.sample_period = sample_period;
  trace.channel_labels = default_channel_labels(params.size());
  for (std::size_t c = 0; c < params.size(); ++c) {
    std::mt19937_64 rng(derive_seed(seed, c, 0x696964ULL));
    generate_iid_channel(params[c], trace.bits, c, rng);
  }
  return trace;
}

std::string synth_model_name(SynthModel m) { return m == SynthModel::Markov ? "markov" : "iid"; }

namespace {

/// One source epoch regenerated under a model; degenerate Markov fits fall
/// back to the iid channel mean when allowed.
Epoch generate_model_epoch(const Epoch& source, SynthModel model, std::uint64_t seed,
                           bool allow_iid_fallback, int& fallbacks) {
  const std::size_t width = source.n_channels();
  Epoch synth;
  synth.bits = Matrix<std::uint8_t>(source.n_samples(), width);
  synth.sample_period = source.sample_period;
  synth.source_offset = source.source_offset;

  for (std::size_t c = 0; c < width; ++c) {
    const std::vector<std::uint8_t> series = source.bits.column(c);
    std::mt19937_64 rng(derive_seed(derive_seed(seed, source.source_offset), c,
                                    model == SynthModel::Markov ? 0x6d61726bULL : 0x696964ULL));
    if (model == SynthModel::Iid) {
      generate_iid_channel(fit_iid(series), synth.bits, c, rng);
      continue;
    }
    try {
      generate_markov_channel(fit_markov(series), synth.bits, c, rng);
    } catch (const degenerate_fit_error&) {
      if (!allow_iid_fallback) throw;
      ++fallbacks;
      generate_iid_channel(fit_iid(series), synth.bits, c, rng);
    }
  }

  std::uint64_t busy = 0;
  for (const auto v : synth.bits.data()) busy += v;
  synth.mean_occupancy = static_cast<double>(busy) / static_cast<double>(synth.bits.data().size());
  return synth;
}

}  // namespace

ModelComparisonReport model_comparison(std::span<const Epoch> epochs, const PhyMacConfig& cfg,
                                       std::uint64_t seed, bool allow_iid_fallback) {
  if (epochs.empty()) throw std::invalid_argument("model_comparison: no epochs");

  const std::array<BondingPolicy, 1> contiguous = {BondingPolicy::contiguous()};
  constexpr std::array<SynthModel, 2> kModels = {SynthModel::Markov, SynthModel::Iid};

  ModelComparisonReport report;
  for (const Epoch& source : epochs) {
    const SweepReport source_sweep = sweep(source, contiguous, cfg, seed);
    const CorrelationReport source_corr = best_primary_xi(source, source_sweep.gamma_bps[0]);
    report.source_xi.push_back(source_corr.xi);
    const std::size_t load_idx = static_cast<std::size_t>(classify_load(source.mean_occupancy));
    const std::size_t corr_idx = static_cast<std::size_t>(source_corr.correlation_class);

    for (std::size_t mi = 0; mi < kModels.size(); ++mi) {
      const Epoch synth = generate_model_epoch(source, kModels[mi], seed, allow_iid_fallback,
                                               report.degenerate_fallbacks);
      const SweepReport synth_sweep = sweep(synth, contiguous, cfg, seed);
      report.model_xi[mi].push_back(best_primary_xi(synth, synth_sweep.gamma_bps[0]).xi);

      auto& load_cell = report.by_load[mi][load_idx];
      auto& corr_cell = report.by_corr[mi][corr_idx];
      for (std::size_t p = 0; p < source.n_channels(); ++p) {
        load_cell.reference.push_back(source_sweep.gamma_bps[0][p]);
        load_cell.model.push_back(synth_sweep.gamma_bps[0][p]);
        corr_cell.reference.push_back(source_sweep.gamma_bps[0][p]);
        corr_cell.model.push_back(synth_sweep.gamma_bps[0][p]);
      }
    }
  }

  for (std::size_t mi = 0; mi < kModels.size(); ++mi) {
    for (auto& cell : report.by_load[mi]) cell.mre = mean_relative_error(cell.reference, cell.model);
    for (auto& cell : report.by_corr[mi]) cell.mre = mean_relative_error(cell.reference, cell.model);
  }
  return report;
}

}  // namespace bondsim
