#include "bondsim/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "bondsim/rng.hpp"
#include "bondsim/synth.hpp"
#include "bondsim/trace_io.hpp"

#include <json.hpp>

namespace bondsim {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad integer '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
  }
}

}  // namespace

void apply_config_file(const std::filesystem::path& path, PhyMacConfig& phy, HiddenConfig& hidden) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "cca_units") phy.cca.raw_units = static_cast<int>(parse_long(key, value));
    else if (key == "cca_dbm") phy.cca.dbm_equivalent = parse_double(key, value);
    else if (key == "mcs_bits_per_symbol") phy.mcs_bits_per_symbol = static_cast<int>(parse_long(key, value));
    else if (key == "mcs_coding_rate") phy.mcs_coding_rate = parse_double(key, value);
    else if (key == "r20_bps") phy.per_channel_rate_bps = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "b_mhz") phy.channel_bandwidth_mhz = static_cast<int>(parse_long(key, value));
    else if (key == "l_d_bits") phy.packet_length_bits = static_cast<int>(parse_long(key, value));
    else if (key == "n_a") phy.max_aggregation = static_cast<int>(parse_long(key, value));
    else if (key == "t_e_us") phy.slot = Microseconds(parse_long(key, value));
    else if (key == "t_sifs_us") phy.sifs = Microseconds(parse_long(key, value));
    else if (key == "t_difs_us") phy.difs = Microseconds(parse_long(key, value));
    else if (key == "t_pifs_us") phy.pifs = Microseconds(parse_long(key, value));
    else if (key == "t_rts_us") phy.t_rts = Microseconds(parse_long(key, value));
    else if (key == "t_cts_us") phy.t_cts = Microseconds(parse_long(key, value));
    else if (key == "t_back_us") phy.t_back = Microseconds(parse_long(key, value));
    else if (key == "txop_us") phy.txop_limit = Microseconds(parse_long(key, value));
    else if (key == "cw_min") phy.cw_min = static_cast<int>(parse_long(key, value));
    else if (key == "m") phy.backoff_stages = static_cast<int>(parse_long(key, value));
    else if (key == "alpha") hidden.alpha = parse_double(key, value);
    else if (key == "escalate_cw") hidden.escalate_cw = parse_long(key, value) != 0;
    else
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": unknown key '" +
                               key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const PhyMacConfig& phy,
                                                                const HiddenConfig& hidden) {
  return {
      {"cca_units", std::to_string(phy.cca.raw_units)},
      {"cca_dbm", fmt(phy.cca.dbm_equivalent)},
      {"mcs_bits_per_symbol", std::to_string(phy.mcs_bits_per_symbol)},
      {"mcs_coding_rate", fmt(phy.mcs_coding_rate)},
      {"r20_bps", std::to_string(phy.per_channel_rate_bps)},
      {"b_mhz", std::to_string(phy.channel_bandwidth_mhz)},
      {"l_d_bits", std::to_string(phy.packet_length_bits)},
      {"n_a", std::to_string(phy.max_aggregation)},
      {"t_e_us", std::to_string(phy.slot.count())},
      {"t_sifs_us", std::to_string(phy.sifs.count())},
      {"t_difs_us", std::to_string(phy.difs.count())},
      {"t_pifs_us", std::to_string(phy.pifs.count())},
      {"t_rts_us", std::to_string(phy.t_rts.count())},
      {"t_cts_us", std::to_string(phy.t_cts.count())},
      {"t_back_us", std::to_string(phy.t_back.count())},
      {"txop_us", std::to_string(phy.txop_limit.count())},
      {"cw_min", std::to_string(phy.cw_min)},
      {"m", std::to_string(phy.backoff_stages)},
      {"alpha", fmt(hidden.alpha)},
      {"escalate_cw", hidden.escalate_cw ? "1" : "0"},
  };
}

BandSpec resolve_band(const std::string& name, const std::vector<int>& custom,
                      std::size_t trace_channels) {
  BandSpec band;
  if (name == "unii12") band = BandSpec::unii_1_2();
  else if (name == "unii2c") band = BandSpec::unii_2c();
  else if (name == "all") band = BandSpec::all(trace_channels);
  else if (name == "custom") band = BandSpec::custom(custom);
  else throw std::invalid_argument("unknown band '" + name + "'");
  band.validate(trace_channels);
  return band;
}

SecondaryCheck parse_secondary_check(const std::string& name) {
  if (name == "pifs") return SecondaryCheck::PifsWindow;
  if (name == "instant") return SecondaryCheck::InstantAtExpiry;
  throw std::invalid_argument("unknown secondary check '" + name + "' (expected pifs or instant)");
}

void RunConfig::validate() const {
  phy.validate();
  hidden.validate();
  if (input_path.empty()) throw std::invalid_argument("no input trace");
  if (epoch_ms <= 0) throw std::invalid_argument("epoch duration must be positive");
  if (min_occupancy < 0.0 || min_occupancy > 1.0)
    throw std::invalid_argument("min occupancy outside [0, 1]");
  if (policies.empty()) throw std::invalid_argument("no policies selected");
  for (const auto& p : policies) parse_policy(p);
  if (scenarios.empty()) throw std::invalid_argument("no scenario selected");
  for (const auto& s : scenarios)
    if (s != "deferral" && s != "hidden")
      throw std::invalid_argument("unknown scenario '" + s + "' (expected deferral or hidden)");
  parse_secondary_check(secondary_check);
  parse_policy(xi_reference);
  if (std::find(policies.begin(), policies.end(), xi_reference) == policies.end())
    throw std::invalid_argument("xi reference policy '" + xi_reference +
                                "' is not among the selected policies");
}

namespace {

OccupancyTrace load_occupancy(const std::string& path, std::uint32_t csv_period_ns,
                              const CcaThreshold& cca, std::ostream& log) {
  LoadedTrace loaded = read_trace(path, SamplePeriod(csv_period_ns));
  if (loaded.kind == TraceKind::Occupancy) return std::move(loaded.occupancy);
  log << "power trace input: binarizing with cca = " << cca.raw_units << " units\n";
  return binarize(loaded.power, cca);
}

struct Accumulator {
  double sum = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    sum += v;
    ++n;
  }
  json mean() const { return n > 0 ? json(sum / static_cast<double>(n)) : json(); }
};

struct PolicyAggregate {
  Accumulator gamma_bps;
  Accumulator omega_mhz;
  Accumulator omega_mbps;
  Accumulator normalized_best;  // per epoch
};

void write_report_header(std::ostream& os, const std::string& tool, const RunConfig& cfg,
                         const std::string& scenario) {
  os << "# " << tool << "\n";
  os << "# seed = " << cfg.seed << "\n";
  os << "# input = " << cfg.input_path << "\n";
  os << "# band = " << cfg.band << "\n";
  os << "# scenario = " << scenario << "\n";
  os << "# epoch_ms = " << cfg.epoch_ms << "\n";
  os << "# min_occupancy = " << fmt(cfg.min_occupancy) << "\n";
  os << "# secondary_check = " << cfg.secondary_check << "\n";
  os << "# xi_reference = " << cfg.xi_reference << "\n";
  std::string policy_list;
  for (const auto& p : cfg.policies) policy_list += (policy_list.empty() ? "" : ",") + p;
  os << "# policies = " << policy_list << "\n";
  for (const auto& [key, value] : config_entries(cfg.phy, cfg.hidden))
    os << "# " << key << " = " << value << "\n";
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();

  const OccupancyTrace trace =
      load_occupancy(cfg.input_path, cfg.csv_sample_period_ns, cfg.phy.cca, log);
  if (trace.sample_period != std::chrono::duration_cast<SamplePeriod>(cfg.phy.slot))
    throw std::runtime_error("trace sample period (" + std::to_string(trace.sample_period.count()) +
                             " ns) must equal the configured slot");

  const BandSpec band = resolve_band(cfg.band, cfg.custom_band_channels, trace.n_channels());
  const std::vector<Epoch> epochs =
      segment_epochs(trace, band, std::chrono::milliseconds(cfg.epoch_ms), cfg.min_occupancy);
  if (epochs.empty()) {
    log << "0 epochs retained\n";
    return kExitEmptyResult;
  }
  log << epochs.size() << " epochs retained\n";

  const SecondaryCheck check = parse_secondary_check(cfg.secondary_check);
  std::vector<BondingPolicy> policies;
  for (const auto& name : cfg.policies) {
    BondingPolicy p{parse_policy(name), check, cfg.ieee_channelization};
    policies.push_back(p);
  }
  std::size_t xi_ref_index = 0;
  for (std::size_t i = 0; i < cfg.policies.size(); ++i)
    if (cfg.policies[i] == cfg.xi_reference) xi_ref_index = i;

  std::filesystem::create_directories(cfg.out_dir);

  json summary;
  summary["tool"] = "bondsim simulate";
  summary["seed"] = cfg.seed;
  summary["input"] = cfg.input_path;
  summary["band"] = cfg.band;
  summary["epoch_ms"] = cfg.epoch_ms;
  summary["min_occupancy"] = cfg.min_occupancy;
  summary["secondary_check"] = cfg.secondary_check;
  summary["xi_reference"] = cfg.xi_reference;
  summary["epochs_retained"] = epochs.size();
  for (const auto& [key, value] : config_entries(cfg.phy, cfg.hidden))
    summary["config"][key] = value;

  for (const auto& scenario_name_str : cfg.scenarios) {
    const Scenario scenario =
        scenario_name_str == "deferral" ? Scenario::Deferral : Scenario::Hidden;

    const std::filesystem::path csv_path =
        std::filesystem::path(cfg.out_dir) / (scenario_name_str + ".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    write_report_header(csv, "bondsim simulate", cfg, scenario_name_str);
    csv << epoch_csv_header() << "\n";

    // regime -> policy -> running means over (epoch, primary) pairs
    std::array<std::vector<PolicyAggregate>, 3> aggregates;
    std::array<int, 3> regime_epochs = {0, 0, 0};
    for (auto& v : aggregates) v.resize(policies.size());

    for (const Epoch& epoch : epochs) {
      const SweepReport sw = sweep(epoch, policies, cfg.phy, cfg.seed, scenario, cfg.hidden);
      const CorrelationReport corr = best_primary_xi(epoch, sw.gamma_bps[xi_ref_index]);
      const auto sc_index = sw.policy_index(PolicyKind::SingleChannel);
      std::optional<double> sc_best;
      if (sc_index) {
        const double v = sw.gamma_bps[*sc_index][static_cast<std::size_t>(sw.best_primary[*sc_index])];
        if (v > 0.0) sc_best = v;
      }

      const std::size_t regime = static_cast<std::size_t>(sw.load_class);
      ++regime_epochs[regime];
      const long epoch_id = static_cast<long>(epoch.source_offset / epoch.n_samples());

      for (std::size_t pi = 0; pi < policies.size(); ++pi) {
        if (sw.normalized_best[pi]) aggregates[regime][pi].normalized_best.add(*sw.normalized_best[pi]);
        for (std::size_t p = 0; p < epoch.n_channels(); ++p) {
          const EpochSimResult& res = sw.results[pi][p];
          const DeprivationReport dep = bandwidth_deprivation(res, epoch, cfg.phy);

          EpochCsvRow row;
          row.epoch_id = epoch_id;
          row.mean_occupancy = epoch.mean_occupancy;
          row.load_class = sw.load_class;
          row.primary = static_cast<int>(p);
          row.policy = cfg.policies[pi];
          row.throughput_bps = res.throughput_bps;
          if (sc_best) row.normalized = res.throughput_bps / *sc_best;
          row.xi = corr.xi;
          row.corr_class = corr.correlation_class;
          row.omega_mhz = dep.omega_mhz;
          csv << format_epoch_csv_row(row) << "\n";

          aggregates[regime][pi].gamma_bps.add(res.throughput_bps);
          aggregates[regime][pi].omega_mhz.add(dep.omega_mhz);
          aggregates[regime][pi].omega_mbps.add(dep.omega_mbps);
        }
      }
    }
    if (!csv) throw std::runtime_error("write failed for " + csv_path.string());

    json regimes;
    for (std::size_t r = 0; r < 3; ++r) {
      const std::string rname = load_class_name(static_cast<LoadClass>(r));
      json rjson;
      rjson["epochs"] = regime_epochs[r];
      std::optional<std::size_t> sc_pi;
      for (std::size_t pi = 0; pi < policies.size(); ++pi)
        if (policies[pi].kind == PolicyKind::SingleChannel) sc_pi = pi;
      for (std::size_t pi = 0; pi < policies.size(); ++pi) {
        const PolicyAggregate& agg = aggregates[r][pi];
        json pjson;
        pjson["mean_throughput_bps"] = agg.gamma_bps.mean();
        pjson["mean_omega_mhz"] = agg.omega_mhz.mean();
        pjson["mean_omega_mbps"] = agg.omega_mbps.mean();
        pjson["mean_normalized_best"] = agg.normalized_best.mean();
        json kappa;  // null unless both policy and single-channel means exist
        if (sc_pi && agg.gamma_bps.n > 0 && aggregates[r][*sc_pi].gamma_bps.n > 0) {
          const PolicyAggregate& sc_agg = aggregates[r][*sc_pi];
          const auto k = zero_sum_ratio(agg.gamma_bps.sum / agg.gamma_bps.n / 1e6,
                                        sc_agg.gamma_bps.sum / sc_agg.gamma_bps.n / 1e6,
                                        agg.omega_mbps.sum / agg.omega_mbps.n,
                                        sc_agg.omega_mbps.sum / sc_agg.omega_mbps.n);
          if (k) kappa = *k;
        }
        pjson["kappa"] = kappa;
        rjson["policies"][cfg.policies[pi]] = pjson;
      }
      regimes[rname] = rjson;
    }
    summary["scenarios"][scenario_name_str]["regimes"] = regimes;
    log << "wrote " << csv_path.string() << "\n";
  }

  const std::filesystem::path summary_path = std::filesystem::path(cfg.out_dir) / "summary.json";
  std::ofstream js(summary_path);
  if (!js) throw std::runtime_error("cannot write " + summary_path.string());
  js << summary.dump(2) << "\n";
  if (!js) throw std::runtime_error("write failed for " + summary_path.string());
  log << "wrote " << summary_path.string() << "\n";
  return kExitOk;
}

int cmd_binarize(const BinarizeOptions& opt, std::ostream& log) {
  CcaThreshold cca;
  cca.raw_units = opt.cca_units;
  cca.validate();
  log << "cca = " << cca.raw_units << " units" << (opt.cca_given ? "" : " (default)") << "\n";

  LoadedTrace loaded = read_trace(opt.input_path, SamplePeriod(opt.csv_sample_period_ns));
  if (loaded.kind != TraceKind::Power)
    throw std::runtime_error(opt.input_path + ": input is already an occupancy trace");

  if (opt.downsample_mode != "max" && opt.downsample_mode != "first")
    throw std::invalid_argument("unknown downsample mode '" + opt.downsample_mode + "'");

  PowerTrace power = std::move(loaded.power);
  if (opt.downsample_factor > 1) {
    const DownsampleMode mode =
        opt.downsample_mode == "max" ? DownsampleMode::KeepMax : DownsampleMode::KeepFirst;
    power = downsample(power, opt.downsample_factor, mode);
    log << "downsampled " << opt.downsample_factor << "x (" << opt.downsample_mode
        << "), period now " << power.sample_period.count() << " ns\n";
  }

  const OccupancyTrace occ = binarize(power, cca);
  write_occupancy_trace(occ, opt.output_path);

  const BandSpec band = resolve_band(opt.band, opt.custom_band_channels, occ.n_channels());
  const double mean = mean_occupancy(occ, band);
  std::size_t n_epochs = 0;
  const std::chrono::nanoseconds epoch_duration = std::chrono::milliseconds(100);
  if (epoch_duration >= occ.sample_period &&
      epoch_duration.count() % occ.sample_period.count() == 0)
    n_epochs = segment_epochs(occ, band, epoch_duration, 0.05).size();
  char line[160];
  std::snprintf(line, sizeof(line),
                "wrote %zu samples x %zu channels; band %s mean occupancy %.6f; "
                "epochs retained (100 ms, >= 5%%): %zu",
                occ.n_samples(), occ.n_channels(), band.name.c_str(), mean, n_epochs);
  log << line << "\n";
  return kExitOk;
}

namespace {

json fit_channels_json(const OccupancyTrace& trace, const std::string& model, bool fallback_iid,
                       int& n_fallbacks) {
  json channels = json::array();
  for (std::size_t c = 0; c < trace.n_channels(); ++c) {
    const std::vector<std::uint8_t> series = trace.bits.column(c);
    if (model == "iid") {
      channels.push_back({{"p_occupied", fit_iid(series).occupancy_probability}});
      continue;
    }
    try {
      const MarkovChannelParams params = fit_markov(series);
      channels.push_back({{"mean_busy_samples", params.mean_busy_samples},
                          {"mean_idle_samples", params.mean_idle_samples}});
    } catch (const degenerate_fit_error& e) {
      if (!fallback_iid)
        throw std::runtime_error("channel " + std::to_string(c) + ": " + e.what() +
                                 " (rerun with --fallback-iid)");
      ++n_fallbacks;
      channels.push_back({{"p_occupied", fit_iid(series).occupancy_probability}});
    }
  }
  return channels;
}

}  // namespace

int cmd_synth_fit(const SynthFitOptions& opt, std::ostream& log) {
  if (opt.model != "markov" && opt.model != "iid")
    throw std::invalid_argument("unknown model '" + opt.model + "'");
  CcaThreshold cca;
  cca.raw_units = opt.cca_units;
  const OccupancyTrace trace =
      load_occupancy(opt.input_path, opt.csv_sample_period_ns, cca, log);

  int n_fallbacks = 0;
  json out;
  out["tool"] = "bondsim synth fit";
  out["model"] = opt.model;
  out["input"] = opt.input_path;
  out["n_channels"] = trace.n_channels();
  out["n_samples"] = trace.n_samples();
  out["sample_period_ns"] = trace.sample_period.count();
  out["channels"] = fit_channels_json(trace, opt.model, opt.fallback_iid, n_fallbacks);
  out["iid_fallbacks"] = n_fallbacks;

  std::ofstream js(opt.output_path);
  if (!js) throw std::runtime_error("cannot write " + opt.output_path);
  js << out.dump(2) << "\n";
  if (!js) throw std::runtime_error("write failed for " + opt.output_path);
  log << "fit " << trace.n_channels() << " channels (" << n_fallbacks << " iid fallbacks), wrote "
      << opt.output_path << "\n";
  return kExitOk;
}

int cmd_synth_generate(const SynthGenerateOptions& opt, std::ostream& log) {
  if (opt.model != "markov" && opt.model != "iid")
    throw std::invalid_argument("unknown model '" + opt.model + "'");

  OccupancyTrace trace;
  const SamplePeriod period{opt.sample_period_ns};

  if (!opt.params_path.empty()) {
    std::ifstream in(opt.params_path);
    if (!in) throw std::runtime_error("cannot open " + opt.params_path);
    json params = json::parse(in, nullptr, true, true);
    const std::string model = params.value("model", opt.model);
    std::vector<MarkovChannelParams> markov;
    std::vector<IidChannelParams> iid;
    for (const auto& ch : params.at("channels")) {
      if (ch.contains("p_occupied")) {
        iid.push_back({ch.at("p_occupied").get<double>()});
        markov.push_back({});  // placeholder, mixed files handled below
      } else {
        markov.push_back({ch.at("mean_busy_samples").get<double>(),
                          ch.at("mean_idle_samples").get<double>()});
        iid.push_back({});
      }
    }
    if (model == "iid") {
      trace = generate_iid(iid, opt.n_samples, opt.seed, period);
    } else {
      // Mixed markov/iid (fallback) channel files are generated per channel.
      trace.bits = Matrix<std::uint8_t>(opt.n_samples, markov.size());
      trace.sample_period = period;
      trace.channel_labels = default_channel_labels(markov.size());
      std::size_t c = 0;
      for (const auto& ch : params.at("channels")) {
        OccupancyTrace one;
        if (ch.contains("p_occupied")) {
          const std::array<IidChannelParams, 1> p = {iid[c]};
          one = generate_iid(p, opt.n_samples, derive_seed(opt.seed, c), period);
        } else {
          const std::array<MarkovChannelParams, 1> p = {markov[c]};
          one = generate_markov(p, opt.n_samples, derive_seed(opt.seed, c), period);
        }
        for (std::size_t t = 0; t < opt.n_samples; ++t) trace.bits(t, c) = one.bits(t, 0);
        ++c;
      }
    }
  } else if (opt.model == "iid") {
    if (opt.p < 0.0) throw std::invalid_argument("generate --model iid needs --p or --params");
    std::vector<IidChannelParams> params(opt.n_channels, IidChannelParams{opt.p});
    trace = generate_iid(params, opt.n_samples, opt.seed, period);
  } else {
    if (opt.mean_busy < 0.0 || opt.mean_idle < 0.0)
      throw std::invalid_argument("generate --model markov needs --mean-busy/--mean-idle or --params");
    std::vector<MarkovChannelParams> params(opt.n_channels,
                                            MarkovChannelParams{opt.mean_busy, opt.mean_idle});
    trace = generate_markov(params, opt.n_samples, opt.seed, period);
  }

  write_occupancy_trace(trace, opt.output_path);
  log << "wrote " << trace.n_samples() << " samples x " << trace.n_channels() << " channels to "
      << opt.output_path << "\n";
  return kExitOk;
}

int cmd_synth_compare(const SynthCompareOptions& opt, std::ostream& log) {
  opt.phy.validate();
  CcaThreshold cca;
  cca.raw_units = opt.cca_units;
  const OccupancyTrace trace =
      load_occupancy(opt.input_path, opt.csv_sample_period_ns, cca, log);
  const BandSpec band = resolve_band(opt.band, opt.custom_band_channels, trace.n_channels());
  const std::vector<Epoch> epochs =
      segment_epochs(trace, band, std::chrono::milliseconds(opt.epoch_ms), opt.min_occupancy);
  if (epochs.empty()) {
    log << "0 epochs retained\n";
    return kExitEmptyResult;
  }

  ModelComparisonReport report;
  try {
    report = model_comparison(epochs, opt.phy, opt.seed, opt.fallback_iid);
  } catch (const degenerate_fit_error& e) {
    throw std::runtime_error(std::string(e.what()) + " (rerun with --fallback-iid)");
  }

  const auto cell_json = [](const ModelComparisonReport::Cell& cell) {
    json j;
    j["mre"] = cell.mre.n_used > 0 ? json(cell.mre.mre) : json();
    j["n_pairs"] = cell.mre.n_used;
    j["n_excluded"] = cell.mre.n_excluded;
    return j;
  };

  json out;
  out["tool"] = "bondsim synth compare";
  out["seed"] = opt.seed;
  out["input"] = opt.input_path;
  out["band"] = opt.band;
  out["epoch_ms"] = opt.epoch_ms;
  out["min_occupancy"] = opt.min_occupancy;
  out["epochs"] = epochs.size();
  out["degenerate_fallbacks"] = report.degenerate_fallbacks;
  for (const auto& [key, value] : config_entries(opt.phy, HiddenConfig{}))
    out["config"][key] = value;

  constexpr std::array<SynthModel, 2> kModels = {SynthModel::Markov, SynthModel::Iid};
  for (std::size_t mi = 0; mi < kModels.size(); ++mi) {
    const std::string mname = synth_model_name(kModels[mi]);
    for (std::size_t r = 0; r < 3; ++r)
      out["models"][mname]["by_load"][load_class_name(static_cast<LoadClass>(r))] =
          cell_json(report.by_load[mi][r]);
    for (std::size_t r = 0; r < 4; ++r)
      out["models"][mname]["by_corr"][corr_class_name(static_cast<CorrClass>(r))] =
          cell_json(report.by_corr[mi][r]);
    double abs_xi = 0.0;
    for (const double xi : report.model_xi[mi]) abs_xi += std::abs(xi);
    out["models"][mname]["mean_abs_xi"] =
        report.model_xi[mi].empty() ? json()
                                    : json(abs_xi / static_cast<double>(report.model_xi[mi].size()));
  }
  double src_xi = 0.0;
  for (const double xi : report.source_xi) src_xi += std::abs(xi);
  out["source_mean_abs_xi"] =
      report.source_xi.empty() ? json() : json(src_xi / static_cast<double>(report.source_xi.size()));

  std::ofstream js(opt.output_path);
  if (!js) throw std::runtime_error("cannot write " + opt.output_path);
  js << out.dump(2) << "\n";
  if (!js) throw std::runtime_error("write failed for " + opt.output_path);
  log << "compared " << epochs.size() << " epochs, wrote " << opt.output_path << "\n";
  return kExitOk;
}

}  // namespace bondsim
