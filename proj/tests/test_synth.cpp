#include <doctest.h>

#include <cmath>
#include <random>

#include "bondsim/rng.hpp"
#include "bondsim/synth.hpp"

using namespace bondsim;

namespace {

Epoch epoch_from_trace(const OccupancyTrace& trace, std::size_t offset, std::size_t rows) {
  Epoch e;
  e.bits = Matrix<std::uint8_t>(rows, trace.n_channels());
  e.sample_period = trace.sample_period;
  e.source_offset = offset;
  std::uint64_t busy = 0;
  for (std::size_t t = 0; t < rows; ++t)
    for (std::size_t c = 0; c < trace.n_channels(); ++c) {
      e.bits(t, c) = trace.bits(offset + t, c);
      busy += e.bits(t, c);
    }
  e.mean_occupancy = static_cast<double>(busy) / static_cast<double>(rows * trace.n_channels());
  return e;
}

}  // namespace

TEST_CASE("fit_markov on hand-checked series") {
  SUBCASE("alternating bits have unit holding times") {
    std::vector<std::uint8_t> s(100);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = i % 2;
    const MarkovChannelParams p = fit_markov(s);
    CHECK(p.mean_busy_samples == 1.0);
    CHECK(p.mean_idle_samples == 1.0);
    CHECK(p.p_busy_to_idle() == 1.0);
    CHECK(p.p_idle_to_busy() == 1.0);
    CHECK(p.stationary_occupancy() == 0.5);
  }
  SUBCASE("run-length bookkeeping includes truncated runs") {
    const std::vector<std::uint8_t> s = {0, 0, 1, 1, 1, 0, 0, 0, 1};
    const MarkovChannelParams p = fit_markov(s);
    CHECK(p.mean_idle_samples == doctest::Approx(2.5));  // runs 2 and 3
    CHECK(p.mean_busy_samples == doctest::Approx(2.0));  // runs 3 and 1
  }
  SUBCASE("constant series cannot be fit") {
    const std::vector<std::uint8_t> busy(50, 1);
    const std::vector<std::uint8_t> idle(50, 0);
    CHECK_THROWS_AS(fit_markov(busy), degenerate_fit_error);
    CHECK_THROWS_AS(fit_markov(idle), degenerate_fit_error);
    try {
      fit_markov(busy);
    } catch (const degenerate_fit_error& e) {
      CHECK(e.constant_value == 1);
    }
  }
}

TEST_CASE("markov params validation") {
  CHECK_THROWS_AS((MarkovChannelParams{0.5, 10.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(
      (MarkovChannelParams{10.0, std::numeric_limits<double>::infinity()}.validate()),
      std::invalid_argument);
  CHECK_NOTHROW(MarkovChannelParams{1.0, 1.0}.validate());
  const std::vector<MarkovChannelParams> bad = {{10.0, 0.0}};
  CHECK_THROWS_AS(generate_markov(bad, 100, 1), std::invalid_argument);
}

TEST_CASE("generate_markov is deterministic and respects stationarity") {
  const std::vector<MarkovChannelParams> params = {{12.0, 12.0}};
  const OccupancyTrace a = generate_markov(params, 1'000'000, 99);
  const OccupancyTrace b = generate_markov(params, 1'000'000, 99);
  CHECK(a.bits == b.bits);

  std::uint64_t busy = 0;
  for (const auto v : a.bits.data()) busy += v;
  const double occupancy = static_cast<double>(busy) / 1e6;
  CHECK(occupancy == doctest::Approx(0.5).epsilon(0.04));  // +-0.02 absolute
  CHECK(std::abs(occupancy - 0.5) <= 0.02);
}

TEST_CASE("fit_markov round-trips the generator parameters") {
  const std::vector<MarkovChannelParams> params = {{5.0, 45.0}};
  const OccupancyTrace t = generate_markov(params, 1'000'000, 4242);
  const MarkovChannelParams fit = fit_markov(t.bits.column(0));
  CHECK(std::abs(fit.mean_busy_samples - 5.0) / 5.0 <= 0.05);
  CHECK(std::abs(fit.mean_idle_samples - 45.0) / 45.0 <= 0.05);
}

TEST_CASE("iid fit and generation") {
  SUBCASE("p 0 and p 1 are constant traces") {
    const std::vector<IidChannelParams> zero = {{0.0}};
    const std::vector<IidChannelParams> one = {{1.0}};
    const OccupancyTrace z = generate_iid(zero, 1000, 3);
    const OccupancyTrace o = generate_iid(one, 1000, 3);
    for (const auto v : z.bits.data()) CHECK(v == 0);
    for (const auto v : o.bits.data()) CHECK(v == 1);
  }
  SUBCASE("empirical mean matches p") {
    const std::vector<IidChannelParams> params = {{0.3}};
    const OccupancyTrace t = generate_iid(params, 1'000'000, 7);
    CHECK(fit_iid(t.bits.column(0)).occupancy_probability == doctest::Approx(0.3).epsilon(0.007));
  }
  SUBCASE("refit stays within 3 binomial sigmas") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      const double p = 0.05 + 0.9 * uniform01(rng);
      const std::size_t n = 100'000;
      const std::vector<IidChannelParams> params = {{p}};
      const OccupancyTrace t = generate_iid(params, n, 100 + trial);
      const double fit = fit_iid(t.bits.column(0)).occupancy_probability;
      const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
      CHECK(std::abs(fit - p) <= 3 * sigma + 1e-12);
    }
  }
  SUBCASE("probabilities outside [0,1] are rejected") {
    CHECK_THROWS_AS((IidChannelParams{1.5}.validate()), std::invalid_argument);
  }
}

TEST_CASE("generated channels are mutually uncorrelated") {
  const std::vector<MarkovChannelParams> params(8, MarkovChannelParams{8.0, 40.0});
  double total_abs_xi = 0.0;
  const int n_epochs = 20;
  for (int i = 0; i < n_epochs; ++i) {
    const OccupancyTrace t = generate_markov(params, 10'000, 500 + i);
    const Epoch e = epoch_from_trace(t, 0, 10'000);
    const std::vector<double> gammas(8, 1.0);
    total_abs_xi += std::abs(best_primary_xi(e, gammas).xi);
  }
  CHECK(total_abs_xi / n_epochs <= 0.05);
}

TEST_CASE("model comparison on a correlated corpus destroys correlation") {
  // Sources replicate one series across all 8 channels (xi = 1); both
  // refitted models generate independent channels (xi ~ 0).
  const PhyMacConfig cfg;
  std::vector<Epoch> epochs;
  for (int i = 0; i < 10; ++i) {
    const std::vector<MarkovChannelParams> one = {{6.0, 30.0}};
    const OccupancyTrace t = generate_markov(one, 10'000, 900 + i);
    Epoch e;
    e.bits = Matrix<std::uint8_t>(10'000, 8);
    e.source_offset = static_cast<std::size_t>(i) * 10'000;
    std::uint64_t busy = 0;
    for (std::size_t s = 0; s < 10'000; ++s)
      for (std::size_t c = 0; c < 8; ++c) {
        e.bits(s, c) = t.bits(s, 0);
        busy += t.bits(s, 0);
      }
    e.mean_occupancy = static_cast<double>(busy) / (10'000.0 * 8.0);
    epochs.push_back(std::move(e));
  }

  const ModelComparisonReport rep = model_comparison(epochs, cfg, 17);
  REQUIRE(rep.source_xi.size() == epochs.size());
  for (const double xi : rep.source_xi) CHECK(xi == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& model_xi : rep.model_xi) {
    double mean_abs = 0.0;
    for (const double xi : model_xi) mean_abs += std::abs(xi);
    CHECK(mean_abs / static_cast<double>(model_xi.size()) <= 0.05);
  }
}

TEST_CASE("model comparison groups by the source regime") {
  const PhyMacConfig cfg;
  std::vector<Epoch> epochs;
  // one low-load epoch (p=0.05) and one high-load epoch (p=0.3)
  int idx = 0;
  for (const double p : {0.05, 0.3}) {
    const std::vector<IidChannelParams> params(8, IidChannelParams{p});
    const OccupancyTrace t = generate_iid(params, 10'000, 40 + idx);
    Epoch e = epoch_from_trace(t, 0, 10'000);
    e.source_offset = static_cast<std::size_t>(idx++) * 10'000;
    epochs.push_back(std::move(e));
  }
  const ModelComparisonReport rep = model_comparison(epochs, cfg, 5);
  // 8 pairs per epoch land in the matching load bucket for each model
  CHECK(rep.by_load[0][0].reference.size() == 8);  // markov, low
  CHECK(rep.by_load[0][2].reference.size() == 8);  // markov, high
  CHECK(rep.by_load[1][0].reference.size() == 8);  // iid, low
  const int corr_pairs = static_cast<int>(rep.by_corr[0][0].reference.size() +
                                          rep.by_corr[0][1].reference.size() +
                                          rep.by_corr[0][2].reference.size() +
                                          rep.by_corr[0][3].reference.size());
  CHECK(corr_pairs == 16);
}

TEST_CASE("degenerate channels fall back to iid when allowed") {
  const PhyMacConfig cfg;
  const std::vector<IidChannelParams> params(8, IidChannelParams{0.1});
  const OccupancyTrace t = generate_iid(params, 10'000, 3);
  Epoch e = epoch_from_trace(t, 0, 10'000);
  for (std::size_t s = 0; s < 10'000; ++s) e.bits(s, 7) = 0;  // constant channel

  const std::vector<Epoch> epochs = {e};
  CHECK_THROWS_AS(model_comparison(epochs, cfg, 1, /*allow_iid_fallback=*/false),
                  degenerate_fit_error);
  const ModelComparisonReport rep = model_comparison(epochs, cfg, 1);
  CHECK(rep.degenerate_fallbacks == 1);
}

TEST_CASE("identical series give zero relative error") {
  // The MRE plumbing itself: a model that reproduces the reference exactly.
  const std::vector<double> gammas = {1e8, 2e8, 3e8};
  CHECK(mean_relative_error(gammas, gammas).mre == 0.0);
}

TEST_CASE("iid corpus is self-consistent under the iid model") {
  // Refitting and regenerating an iid corpus leaves only realization noise
  // in the throughput statistic (empirically ~0.1), far below the errors a
  // structured trace produces.
  const PhyMacConfig cfg;
  std::vector<Epoch> epochs;
  for (int i = 0; i < 10; ++i) {
    const std::vector<IidChannelParams> params(8, IidChannelParams{0.15});
    const OccupancyTrace t = generate_iid(params, 10'000, 700 + i);
    Epoch e = epoch_from_trace(t, 0, 10'000);
    e.source_offset = static_cast<std::size_t>(i) * 10'000;
    epochs.push_back(std::move(e));
  }
  const ModelComparisonReport rep = model_comparison(epochs, cfg, 9);
  for (const auto& cell : rep.by_load[1])  // iid model
    if (cell.mre.n_used > 0) CHECK(cell.mre.mre < 0.2);
  double mean_abs_xi = 0.0;
  for (const double xi : rep.model_xi[1]) mean_abs_xi += std::abs(xi);
  CHECK(mean_abs_xi / static_cast<double>(rep.model_xi[1].size()) <= 0.05);
}
