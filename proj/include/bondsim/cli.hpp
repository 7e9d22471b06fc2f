#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bondsim/analysis.hpp"
#include "bondsim/dcf.hpp"
#include "bondsim/scenarios.hpp"
#include "bondsim/trace.hpp"

namespace bondsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitEmptyResult = 3;

/// Flat key=value config file mirroring the MAC/PHY setup table; every entry
/// is optional and defaults to the built-in value.
void apply_config_file(const std::filesystem::path& path, PhyMacConfig& phy, HiddenConfig& hidden);

/// Stable (key, value) listing of the effective configuration, embedded in
/// every report header.
std::vector<std::pair<std::string, std::string>> config_entries(const PhyMacConfig& phy,
                                                                const HiddenConfig& hidden);

struct BinarizeOptions {
  std::string input_path;
  std::string output_path;
  int cca_units = 150;
  bool cca_given = false;
  std::size_t downsample_factor = 1;
  std::string downsample_mode = "first";  // first | max
  std::uint32_t csv_sample_period_ns = 10'000;
  std::string band = "all";
  std::vector<int> custom_band_channels;
};

struct RunConfig {
  std::string input_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::string band = "unii12";  // unii12 | unii2c | all | custom
  std::vector<int> custom_band_channels;
  int epoch_ms = 100;
  double min_occupancy = 0.05;
  std::vector<std::string> policies = {"sc", "co", "nc"};
  std::vector<std::string> scenarios = {"deferral"};
  std::string secondary_check = "pifs";  // pifs | instant
  std::string xi_reference = "co";       // policy whose best primary defines xi
  bool ieee_channelization = false;
  std::uint32_t csv_sample_period_ns = 10'000;
  PhyMacConfig phy{};
  HiddenConfig hidden{};

  void validate() const;
};

struct SynthFitOptions {
  std::string input_path;
  std::string output_path;
  std::string model = "markov";  // markov | iid
  bool fallback_iid = false;
  int cca_units = 150;
  std::uint32_t csv_sample_period_ns = 10'000;
};

struct SynthGenerateOptions {
  std::string output_path;
  std::string model = "iid";
  std::string params_path;  // fitted params JSON; or use the scalar knobs below
  double p = -1.0;
  double mean_busy = -1.0;
  double mean_idle = -1.0;
  std::size_t n_channels = 8;
  std::size_t n_samples = 10'000;
  std::uint64_t seed = 1;
  std::uint32_t sample_period_ns = 10'000;
};

struct SynthCompareOptions {
  std::string input_path;
  std::string output_path;
  std::string band = "unii12";
  std::vector<int> custom_band_channels;
  int epoch_ms = 100;
  double min_occupancy = 0.05;
  std::uint64_t seed = 1;
  bool fallback_iid = false;
  int cca_units = 150;
  std::uint32_t csv_sample_period_ns = 10'000;
  PhyMacConfig phy{};
};

BandSpec resolve_band(const std::string& name, const std::vector<int>& custom,
                      std::size_t trace_channels);
SecondaryCheck parse_secondary_check(const std::string& name);

int cmd_binarize(const BinarizeOptions& opt, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_synth_fit(const SynthFitOptions& opt, std::ostream& log);
int cmd_synth_generate(const SynthGenerateOptions& opt, std::ostream& log);
int cmd_synth_compare(const SynthCompareOptions& opt, std::ostream& log);

}  // namespace bondsim
