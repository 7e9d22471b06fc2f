#include "bondsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bondsim {

std::string load_class_name(LoadClass c) {
  switch (c) {
    case LoadClass::Low: return "low";
    case LoadClass::Medium: return "medium";
    case LoadClass::High: return "high";
  }
  return "?";
}

std::string corr_class_name(CorrClass c) {
  switch (c) {
    case CorrClass::Low: return "low";
    case CorrClass::Medium: return "medium";
    case CorrClass::High: return "high";
    case CorrClass::Unclassified: return "unclassified";
  }
  return "?";
}

LoadClass classify_load(double mean_occupancy) {
  if (mean_occupancy <= 0.1) return LoadClass::Low;
  if (mean_occupancy <= 0.2) return LoadClass::Medium;
  return LoadClass::High;
}

CorrClass classify_correlation(double xi) {
  if (xi <= 0.1) return CorrClass::Low;
  if (xi >= 0.2 && xi < 0.4) return CorrClass::Medium;
  if (xi >= 0.5) return CorrClass::High;
  return CorrClass::Unclassified;
}

double pearson(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson: need at least two samples");

  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;

  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return cov / (std::sqrt(var_a) * std::sqrt(var_b));
}

CorrelationReport best_primary_xi(const Epoch& epoch, std::span<const double> ref_gamma_by_primary) {
  const std::size_t width = epoch.n_channels();
  if (width < 2) throw std::invalid_argument("best_primary_xi: band needs at least two channels");
  if (ref_gamma_by_primary.size() != width)
    throw std::invalid_argument("best_primary_xi: one throughput per primary required");

  CorrelationReport report;
  report.best_primary = 0;
  for (std::size_t p = 1; p < width; ++p)
    if (ref_gamma_by_primary[p] > ref_gamma_by_primary[static_cast<std::size_t>(report.best_primary)])
      report.best_primary = static_cast<int>(p);

  const auto is_constant = [](const std::vector<std::uint8_t>& v) {
    return std::all_of(v.begin(), v.end(), [&](std::uint8_t x) { return x == v.front(); });
  };

  const std::vector<std::uint8_t> best =
      epoch.bits.column(static_cast<std::size_t>(report.best_primary));
  if (is_constant(best)) report.zero_variance_channels.push_back(report.best_primary);

  double sum = 0.0;
  for (std::size_t c = 0; c < width; ++c) {
    if (static_cast<int>(c) == report.best_primary) continue;
    const std::vector<std::uint8_t> other = epoch.bits.column(c);
    report.pairwise_rho.push_back(pearson(best, other));
    sum += report.pairwise_rho.back();
    if (is_constant(other)) report.zero_variance_channels.push_back(static_cast<int>(c));
  }
  report.xi = sum / static_cast<double>(width - 1);
  report.correlation_class = classify_correlation(report.xi);
  return report;
}

std::string scenario_name(Scenario s) {
  return s == Scenario::Deferral ? "deferral" : "hidden";
}

std::optional<std::size_t> SweepReport::policy_index(PolicyKind kind) const {
  for (std::size_t i = 0; i < policies.size(); ++i)
    if (policies[i].kind == kind) return i;
  return std::nullopt;
}

SweepReport sweep(const Epoch& epoch, std::span<const BondingPolicy> policies,
                  const PhyMacConfig& cfg, std::uint64_t seed, Scenario scenario,
                  const HiddenConfig& hidden) {
  if (policies.empty()) throw std::invalid_argument("sweep: no policies");
  const std::size_t width = epoch.n_channels();

  SweepReport report;
  report.load_class = classify_load(epoch.mean_occupancy);
  report.policies.assign(policies.begin(), policies.end());
  report.results.resize(policies.size());
  report.gamma_bps.resize(policies.size());

  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    report.results[pi].reserve(width);
    for (std::size_t p = 0; p < width; ++p) {
      EpochSimResult res =
          scenario == Scenario::Deferral
              ? run_epoch(epoch, static_cast<int>(p), policies[pi], cfg, seed)
              : apply_hidden_scenario(epoch, static_cast<int>(p), policies[pi], cfg, hidden, seed);
      report.gamma_bps[pi].push_back(res.throughput_bps);
      report.results[pi].push_back(std::move(res));
    }
    int best = 0;
    for (std::size_t p = 1; p < width; ++p)
      if (report.gamma_bps[pi][p] > report.gamma_bps[pi][static_cast<std::size_t>(best)])
        best = static_cast<int>(p);
    report.best_primary.push_back(best);
  }

  const auto sc = report.policy_index(PolicyKind::SingleChannel);
  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    std::optional<double> normalized;
    if (sc) {
      const double sc_best =
          report.gamma_bps[*sc][static_cast<std::size_t>(report.best_primary[*sc])];
      if (sc_best > 0.0)
        normalized = report.gamma_bps[pi][static_cast<std::size_t>(report.best_primary[pi])] / sc_best;
    }
    report.normalized_best.push_back(normalized);
  }

  const auto co = report.policy_index(PolicyKind::Contiguous);
  const auto nc = report.policy_index(PolicyKind::NonContiguous);
  report.co_nc_ratio.assign(width, std::nullopt);
  if (co && nc) {
    for (std::size_t p = 0; p < width; ++p)
      if (report.gamma_bps[*nc][p] > 0.0)
        report.co_nc_ratio[p] = report.gamma_bps[*co][p] / report.gamma_bps[*nc][p];
  }
  return report;
}

MreResult mean_relative_error(std::span<const double> reference, std::span<const double> model) {
  if (reference.size() != model.size())
    throw std::invalid_argument("mean_relative_error: length mismatch");

  MreResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (reference[i] == 0.0) {
      ++result.n_excluded;
      continue;
    }
    sum += std::abs(model[i] - reference[i]) / reference[i];
    ++result.n_used;
  }
  result.mre = result.n_used > 0 ? sum / result.n_used : std::nan("");
  return result;
}

std::string epoch_csv_header() {
  return "epoch_id,mean_occupancy,load_class,primary,policy,throughput_bps,normalized,xi,"
         "corr_class,omega_mhz";
}

std::string format_epoch_csv_row(const EpochCsvRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%ld,%.6f,%s,%d,%s,%.3f,", row.epoch_id, row.mean_occupancy,
                load_class_name(row.load_class).c_str(), row.primary, row.policy.c_str(),
                row.throughput_bps);
  std::string out(buf);
  if (row.normalized) {
    std::snprintf(buf, sizeof(buf), "%.6f", *row.normalized);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), ",%.6f,%s,%.6f", row.xi, corr_class_name(row.corr_class).c_str(),
                row.omega_mhz);
  out += buf;
  return out;
}

}  // namespace bondsim
