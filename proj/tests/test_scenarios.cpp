#include <doctest.h>

#include <random>

#include "bondsim/rng.hpp"
#include "bondsim/scenarios.hpp"
#include "bondsim/synth.hpp"

using namespace bondsim;

namespace {

Epoch make_epoch(std::size_t rows, std::size_t cols, std::uint8_t fill = 0) {
  Epoch e;
  e.bits = Matrix<std::uint8_t>(rows, cols, fill);
  return e;
}

TxRecord make_record(int start, int end, std::vector<int> channels) {
  TxRecord r;
  r.start_sample = start;
  r.end_sample = end;
  r.channels = std::move(channels);
  r.n_packets = 1;
  return r;
}

Epoch markov_epoch(double occupancy, std::uint64_t seed, std::size_t rows = 10000) {
  const double mean_busy = 5.0;
  const double mean_idle = mean_busy * (1.0 - occupancy) / occupancy;
  std::vector<MarkovChannelParams> params(8, MarkovChannelParams{mean_busy, mean_idle});
  const OccupancyTrace trace = generate_markov(params, rows, seed);
  Epoch e;
  e.bits = trace.bits;
  e.sample_period = trace.sample_period;
  e.source_offset = seed * rows;  // distinct stream per generated epoch
  std::uint64_t busy = 0;
  for (const auto b : e.bits.data()) busy += b;
  e.mean_occupancy = static_cast<double>(busy) / static_cast<double>(e.bits.data().size());
  return e;
}

}  // namespace

TEST_CASE("frame_lost thresholds") {
  Epoch e = make_epoch(400, 2);
  const TxRecord rec = make_record(50, 350, {0, 1});  // |span| = 300

  SUBCASE("no activity, no loss") { CHECK_FALSE(frame_lost(rec, e, HiddenConfig{})); }

  SUBCASE("the alpha bound is inclusive") {
    // alpha 0.01 over 300 samples -> threshold 3 active samples
    e.bits(100, 0) = 1;
    e.bits(200, 1) = 1;
    CHECK_FALSE(frame_lost(rec, e, HiddenConfig{}));
    e.bits(300, 0) = 1;
    CHECK(frame_lost(rec, e, HiddenConfig{}));
  }

  SUBCASE("several busy channels in one sample count once") {
    e.bits(100, 0) = 1;
    e.bits(100, 1) = 1;
    e.bits(101, 0) = 1;
    CHECK_FALSE(frame_lost(rec, e, HiddenConfig{}));  // 2 active samples < 3
  }

  SUBCASE("alpha zero loses every frame") {
    CHECK(frame_lost(rec, e, HiddenConfig{0.0, true}));
  }

  SUBCASE("activity outside the span or channels does not count") {
    e.bits(10, 0) = 1;   // before the span
    e.bits(360, 1) = 1;  // after the span
    CHECK_FALSE(frame_lost(rec, e, HiddenConfig{}));
  }

  SUBCASE("empty channel set is rejected") {
    CHECK_THROWS_AS(frame_lost(make_record(0, 10, {}), e, HiddenConfig{}), std::invalid_argument);
  }

  SUBCASE("span outside the epoch is rejected") {
    CHECK_THROWS_AS(frame_lost(make_record(390, 410, {0}), e, HiddenConfig{}),
                    std::invalid_argument);
  }
}

TEST_CASE("frame_lost matches a brute-force recount") {
  std::mt19937_64 rng(808);
  Epoch e = make_epoch(600, 8);
  for (auto& b : e.bits.data()) b = uniform01(rng) < 0.02 ? 1 : 0;
  const HiddenConfig cfg{};
  for (int trial = 0; trial < 300; ++trial) {
    const int start = static_cast<int>(uniform_below(rng, 450));
    const int len = 50 + static_cast<int>(uniform_below(rng, 100));
    std::vector<int> channels;
    for (int c = 0; c < 8; ++c)
      if (rng() & 1u) channels.push_back(c);
    if (channels.empty()) channels.push_back(0);
    const TxRecord rec = make_record(start, start + len, channels);

    int active = 0;
    for (int t = start; t < start + len; ++t) {
      int busy = 0;
      for (const int c : channels)
        busy += e.bits(static_cast<std::size_t>(t), static_cast<std::size_t>(c));
      if (busy >= 1) ++active;
    }
    const bool expected = static_cast<double>(active) >= cfg.alpha * len;
    CHECK(frame_lost(rec, e, cfg) == expected);
  }
}

TEST_CASE("hidden scenario equals deferral when the trace is silent") {
  const PhyMacConfig cfg;
  Epoch e = make_epoch(10000, 8);
  e.source_offset = 12345;
  const EpochSimResult deferral = run_epoch(e, 0, BondingPolicy::contiguous(), cfg, 5);
  const EpochSimResult hidden =
      apply_hidden_scenario(e, 0, BondingPolicy::contiguous(), cfg, HiddenConfig{}, 5);
  CHECK(hidden.packets_sent == deferral.packets_sent);
  CHECK(hidden.throughput_bps == deferral.throughput_bps);
  REQUIRE(hidden.records.size() == deferral.records.size());
  for (const auto& rec : hidden.records) CHECK_FALSE(rec.lost);
}

TEST_CASE("persistent interference loses every frame") {
  // Primary: 4 idle samples then 1 busy, repeating. Contention always
  // completes inside the idle runs, but any frame span is ~20% busy.
  const PhyMacConfig cfg;
  Epoch e = make_epoch(10000, 8);
  for (std::size_t t = 0; t < e.n_samples(); ++t) {
    const bool busy = (t % 5) == 4;
    e.bits(t, 0) = busy ? 1 : 0;
    for (std::size_t c = 1; c < 8; ++c) e.bits(t, c) = 1;  // secondaries never bond
  }
  for (const auto policy : {BondingPolicy::single_channel(), BondingPolicy::contiguous(),
                            BondingPolicy::non_contiguous()}) {
    const EpochSimResult r = apply_hidden_scenario(e, 0, policy, cfg, HiddenConfig{}, 21);
    CHECK(!r.records.empty());
    CHECK(r.packets_sent == 0);
    CHECK(r.throughput_bps == 0.0);
    for (const auto& rec : r.records) CHECK(rec.lost);
  }
}

TEST_CASE("hidden throughput never exceeds deferral on paired runs") {
  const PhyMacConfig cfg;
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    const double occupancy = 0.05 + 0.005 * trial;
    const Epoch e = markov_epoch(occupancy, 1000 + trial);
    const int primary = static_cast<int>(uniform_below(rng, 8));
    for (const auto policy :
         {BondingPolicy::contiguous(), BondingPolicy::non_contiguous()}) {
      const EpochSimResult deferral = run_epoch(e, primary, policy, cfg, trial);
      const EpochSimResult hidden =
          apply_hidden_scenario(e, primary, policy, cfg, HiddenConfig{}, trial);
      CHECK(hidden.packets_sent <= deferral.packets_sent);
    }
  }
}

TEST_CASE("bandwidth deprivation") {
  const PhyMacConfig cfg;

  SUBCASE("no transmissions, no deprivation") {
    const Epoch e = make_epoch(10000, 8);
    EpochSimResult r;
    const DeprivationReport rep = bandwidth_deprivation(r, e, cfg);
    CHECK(rep.omega_mhz == 0.0);
    CHECK(rep.omega_mbps == 0.0);
    CHECK(rep.per_record_mhz.empty());
  }

  SUBCASE("worked example: 100 active samples on one of two channels") {
    Epoch e = make_epoch(10000, 2);
    for (std::size_t t = 500; t < 600; ++t) e.bits(t, 0) = 1;
    EpochSimResult r;
    r.records.push_back(make_record(400, 891, {0, 1}));
    const DeprivationReport rep = bandwidth_deprivation(r, e, cfg);
    // 100 cells * 20 MHz * 10 us / 100 ms
    CHECK(rep.omega_mhz == 0.2);
    CHECK(rep.omega_mbps == doctest::Approx(0.2 * 114.7 / 20.0));
    REQUIRE(rep.per_record_mhz.size() == 1);
    CHECK(rep.per_record_mhz[0] == 0.2);
  }

  SUBCASE("single-channel records only count the primary column") {
    Epoch e = make_epoch(10000, 2, 1);  // everything busy
    EpochSimResult r;
    r.records.push_back(make_record(0, 100, {1}));
    const DeprivationReport rep = bandwidth_deprivation(r, e, cfg);
    CHECK(rep.omega_mhz == doctest::Approx(100.0 * 20.0 * 1e4 / 1e8));
  }

  SUBCASE("adding activity inside a span never decreases omega") {
    std::mt19937_64 rng(55);
    Epoch e = make_epoch(1000, 4);
    for (auto& b : e.bits.data()) b = uniform01(rng) < 0.1 ? 1 : 0;
    EpochSimResult r;
    r.records.push_back(make_record(100, 400, {0, 2}));
    const double before = bandwidth_deprivation(r, e, cfg).omega_mhz;
    for (std::size_t t = 100; t < 400; ++t) {
      if (e.bits(t, 2) == 0) {
        e.bits(t, 2) = 1;
        break;
      }
    }
    CHECK(bandwidth_deprivation(r, e, cfg).omega_mhz >= before);
  }
}

TEST_CASE("zero-sum ratio") {
  CHECK(zero_sum_ratio(5.0, 5.0, 2.0, 1.0) == 0.0);
  CHECK(zero_sum_ratio(3.0, 2.0, 2.0, 1.0) == 1.0);  // zero-sum boundary
  CHECK(zero_sum_ratio(2.0, 1.0, 0.5, 0.25) == 4.0);
  CHECK_FALSE(zero_sum_ratio(2.0, 1.0, 3.0, 3.0).has_value());
}
