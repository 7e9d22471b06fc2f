#include <iostream>
#include <string>

#include "bondsim/cli.hpp"
#include "bondsim/trace_io.hpp"

#include <CLI11.hpp>

namespace {

void add_band_options(CLI::App* cmd, std::string& band, std::vector<int>& custom) {
  cmd->add_option("--band", band, "Band: unii12, unii2c, all or custom")
      ->check(CLI::IsMember({"unii12", "unii2c", "all", "custom"}));
  cmd->add_option("--band-channels", custom,
                  "0-based trace columns for --band custom (comma separated)")
      ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bondsim - trace-driven 802.11 channel bonding simulator and analysis toolkit"};
  app.require_subcommand(1);

  // binarize
  bondsim::BinarizeOptions bin;
  auto* binarize = app.add_subcommand("binarize", "Threshold a power trace into busy/idle bits");
  binarize->add_option("--in", bin.input_path, "Input power trace (.csv or WACT binary)")->required();
  binarize->add_option("--out", bin.output_path, "Output occupancy trace (.csv or binary)")->required();
  auto* cca_opt = binarize->add_option("--cca", bin.cca_units, "CCA threshold in 10-bit RSSI units");
  binarize->add_option("--downsample", bin.downsample_factor, "Keep 1 sample per block of N");
  binarize->add_option("--downsample-mode", bin.downsample_mode, "first or max")
      ->check(CLI::IsMember({"first", "max"}));
  binarize->add_option("--sample-period-ns", bin.csv_sample_period_ns,
                       "Sample period of CSV inputs, in ns");
  add_band_options(binarize, bin.band, bin.custom_band_channels);

  // simulate
  bondsim::RunConfig run;
  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "Replay the DCF over trace epochs and report metrics");
  simulate->add_option("--in", run.input_path, "Occupancy (or power) trace")->required();
  simulate->add_option("--out-dir", run.out_dir, "Output directory");
  simulate->add_option("--seed", run.seed, "Global seed");
  add_band_options(simulate, run.band, run.custom_band_channels);
  simulate->add_option("--epoch-ms", run.epoch_ms, "Epoch duration in ms");
  simulate->add_option("--min-occupancy", run.min_occupancy, "Epoch retention threshold");
  simulate->add_option("--policies", run.policies, "Subset of sc,co,nc")->delimiter(',');
  simulate->add_option("--scenario", run.scenarios, "deferral, hidden or both (comma separated)")
      ->delimiter(',');
  simulate->add_option("--secondary-check", run.secondary_check, "pifs or instant")
      ->check(CLI::IsMember({"pifs", "instant"}));
  simulate->add_option("--xi-reference", run.xi_reference, "Policy defining the best primary for xi")
      ->check(CLI::IsMember({"sc", "co", "nc"}));
  simulate->add_flag("--ieee-channelization", run.ieee_channelization,
                     "Restrict contiguous bonds to 20/40/80/160 MHz blocks");
  simulate->add_option("--sample-period-ns", run.csv_sample_period_ns,
                       "Sample period of CSV inputs, in ns");
  simulate->add_option("--config", config_path, "MAC/PHY key=value config file");

  // synth
  auto* synth = app.add_subcommand("synth", "Fit, generate and evaluate synthetic occupancy models");
  synth->require_subcommand(1);

  bondsim::SynthFitOptions fit;
  auto* synth_fit = synth->add_subcommand("fit", "Fit per-channel model parameters to a trace");
  synth_fit->add_option("--in", fit.input_path, "Occupancy (or power) trace")->required();
  synth_fit->add_option("--out", fit.output_path, "Output params JSON")->required();
  synth_fit->add_option("--model", fit.model, "markov or iid")
      ->check(CLI::IsMember({"markov", "iid"}));
  synth_fit->add_flag("--fallback-iid", fit.fallback_iid,
                      "Fit constant channels as iid instead of failing");
  synth_fit->add_option("--cca", fit.cca_units, "CCA units if the input is a power trace");
  synth_fit->add_option("--sample-period-ns", fit.csv_sample_period_ns,
                        "Sample period of CSV inputs, in ns");

  bondsim::SynthGenerateOptions gen;
  auto* synth_gen = synth->add_subcommand("generate", "Generate a synthetic occupancy trace");
  synth_gen->add_option("--out", gen.output_path, "Output trace (.csv or binary)")->required();
  synth_gen->add_option("--model", gen.model, "markov or iid")
      ->check(CLI::IsMember({"markov", "iid"}));
  synth_gen->add_option("--params", gen.params_path, "Fitted params JSON");
  synth_gen->add_option("--p", gen.p, "iid occupancy probability (uniform across channels)");
  synth_gen->add_option("--mean-busy", gen.mean_busy, "Markov mean busy duration, samples");
  synth_gen->add_option("--mean-idle", gen.mean_idle, "Markov mean idle duration, samples");
  synth_gen->add_option("--channels", gen.n_channels, "Channel count for scalar parameters");
  synth_gen->add_option("--samples", gen.n_samples, "Samples to generate");
  synth_gen->add_option("--seed", gen.seed, "Generation seed");
  synth_gen->add_option("--sample-period-ns", gen.sample_period_ns, "Sample period, ns");

  bondsim::SynthCompareOptions cmp;
  std::string cmp_config_path;
  auto* synth_cmp = synth->add_subcommand(
      "compare", "Per-epoch model error (MRE) against trace-driven throughput");
  synth_cmp->add_option("--in", cmp.input_path, "Occupancy (or power) trace")->required();
  synth_cmp->add_option("--out", cmp.output_path, "Output MRE table JSON")->required();
  add_band_options(synth_cmp, cmp.band, cmp.custom_band_channels);
  synth_cmp->add_option("--epoch-ms", cmp.epoch_ms, "Epoch duration in ms");
  synth_cmp->add_option("--min-occupancy", cmp.min_occupancy, "Epoch retention threshold");
  synth_cmp->add_option("--seed", cmp.seed, "Global seed");
  synth_cmp->add_flag("--fallback-iid", cmp.fallback_iid,
                      "Fit constant channels as iid instead of failing");
  synth_cmp->add_option("--cca", cmp.cca_units, "CCA units if the input is a power trace");
  synth_cmp->add_option("--sample-period-ns", cmp.csv_sample_period_ns,
                        "Sample period of CSV inputs, in ns");
  synth_cmp->add_option("--config", cmp_config_path, "MAC/PHY key=value config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? bondsim::kExitOk : bondsim::kExitUsage;
  }

  try {
    if (*binarize) {
      bin.cca_given = cca_opt->count() > 0;
      return bondsim::cmd_binarize(bin, std::cout);
    }
    if (*simulate) {
      if (!config_path.empty()) bondsim::apply_config_file(config_path, run.phy, run.hidden);
      return bondsim::cmd_simulate(run, std::cout);
    }
    if (*synth_fit) return bondsim::cmd_synth_fit(fit, std::cout);
    if (*synth_gen) return bondsim::cmd_synth_generate(gen, std::cout);
    if (*synth_cmp) {
      if (!cmp_config_path.empty()) {
        bondsim::HiddenConfig unused;
        bondsim::apply_config_file(cmp_config_path, cmp.phy, unused);
      }
      return bondsim::cmd_synth_compare(cmp, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bondsim::kExitDataError;
  }
  return bondsim::kExitUsage;
}
