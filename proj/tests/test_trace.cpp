#include <doctest.h>

#include <numeric>
#include <random>

#include "bondsim/rng.hpp"
#include "bondsim/trace.hpp"

using namespace bondsim;

namespace {

PowerTrace make_power(std::size_t rows, std::size_t cols, std::uint16_t fill = 0) {
  PowerTrace t;
  t.samples = Matrix<std::uint16_t>(rows, cols, fill);
  t.channel_labels = std::vector<int>(cols);
  std::iota(t.channel_labels.begin(), t.channel_labels.end(), 36);
  return t;
}

OccupancyTrace make_occupancy(std::size_t rows, std::size_t cols, std::uint8_t fill = 0) {
  OccupancyTrace t;
  t.bits = Matrix<std::uint8_t>(rows, cols, fill);
  return t;
}

}  // namespace

TEST_CASE("binarize uses a strict threshold") {
  PowerTrace t = make_power(3, 1);
  t.samples(0, 0) = 149;
  t.samples(1, 0) = 150;
  t.samples(2, 0) = 151;
  const OccupancyTrace occ = binarize(t, CcaThreshold{150, -83.5});
  CHECK(occ.bits(0, 0) == 0);
  CHECK(occ.bits(1, 0) == 0);  // exactly at threshold is idle
  CHECK(occ.bits(2, 0) == 1);
  CHECK(occ.sample_period == t.sample_period);
}

TEST_CASE("binarize of an all-zero trace is all zero") {
  const OccupancyTrace occ = binarize(make_power(16, 4), CcaThreshold{});
  for (const auto b : occ.bits.data()) CHECK(b == 0);
}

TEST_CASE("binarize matches an elementwise scan") {
  std::mt19937_64 rng(42);
  PowerTrace t = make_power(37, 5);
  for (auto& v : t.samples.data()) v = static_cast<std::uint16_t>(uniform_below(rng, 1024));
  const CcaThreshold cca{300, -70.0};
  const OccupancyTrace occ = binarize(t, cca);
  for (std::size_t r = 0; r < t.n_samples(); ++r)
    for (std::size_t c = 0; c < t.n_channels(); ++c)
      CHECK(occ.bits(r, c) == (t.samples(r, c) > cca.raw_units ? 1 : 0));
}

TEST_CASE("binarize is idempotent in effect") {
  std::mt19937_64 rng(7);
  PowerTrace t = make_power(50, 3);
  for (auto& v : t.samples.data()) v = static_cast<std::uint16_t>(uniform_below(rng, 1024));
  const OccupancyTrace occ = binarize(t, CcaThreshold{150, -83.5});

  PowerTrace as_power = make_power(50, 3);
  for (std::size_t i = 0; i < occ.bits.data().size(); ++i)
    as_power.samples.data()[i] = occ.bits.data()[i];
  const OccupancyTrace again = binarize(as_power, CcaThreshold{0, 0.0});
  CHECK(again.bits == occ.bits);
}

TEST_CASE("binarize rejects empty traces") {
  PowerTrace t;
  CHECK_THROWS_AS(binarize(t, CcaThreshold{}), std::invalid_argument);
}

TEST_CASE("downsample keeps the first sample of each block") {
  PowerTrace t = make_power(200, 1);
  for (std::size_t i = 0; i < 200; ++i) t.samples(i, 0) = static_cast<std::uint16_t>(i);

  SUBCASE("factor 1 is the identity") {
    const PowerTrace d = downsample(t, 1);
    CHECK(d.samples == t.samples);
    CHECK(d.sample_period == t.sample_period);
  }
  SUBCASE("factor 100 keeps block heads") {
    const PowerTrace d = downsample(t, 100);
    REQUIRE(d.n_samples() == 2);
    CHECK(d.samples(0, 0) == 0);
    CHECK(d.samples(1, 0) == 100);
    CHECK(d.sample_period == t.sample_period * 100);
  }
  SUBCASE("trailing partial block is dropped") {
    PowerTrace longer = make_power(250, 1);
    const PowerTrace d = downsample(longer, 100);
    CHECK(d.n_samples() == 2);
  }
  SUBCASE("factor 0 is rejected") {
    CHECK_THROWS_AS(downsample(t, 0), std::invalid_argument);
  }
}

TEST_CASE("downsample composes multiplicatively") {
  std::mt19937_64 rng(3);
  PowerTrace t = make_power(600, 2);
  for (auto& v : t.samples.data()) v = static_cast<std::uint16_t>(uniform_below(rng, 1024));
  const PowerTrace once = downsample(downsample(t, 3), 4);
  const PowerTrace direct = downsample(t, 12);
  CHECK(once.samples == direct.samples);
  CHECK(once.sample_period == direct.sample_period);
}

TEST_CASE("downsample keep-max takes the block maximum") {
  PowerTrace t = make_power(4, 1);
  t.samples(0, 0) = 5;
  t.samples(1, 0) = 900;
  t.samples(2, 0) = 7;
  t.samples(3, 0) = 8;
  const PowerTrace d = downsample(t, 2, DownsampleMode::KeepMax);
  CHECK(d.samples(0, 0) == 900);
  CHECK(d.samples(1, 0) == 8);
}

TEST_CASE("mean occupancy basics") {
  SUBCASE("all idle") {
    const OccupancyTrace t = make_occupancy(100, 8);
    CHECK(mean_occupancy(t, BandSpec::unii_1_2()) == 0.0);
  }
  SUBCASE("one channel always busy out of eight") {
    OccupancyTrace t = make_occupancy(100, 8);
    for (std::size_t r = 0; r < 100; ++r) t.bits(r, 2) = 1;
    CHECK(mean_occupancy(t, BandSpec::unii_1_2()) == doctest::Approx(0.125));
  }
  SUBCASE("random matrix matches a popcount") {
    std::mt19937_64 rng(11);
    OccupancyTrace t = make_occupancy(100, 8);
    std::uint64_t ones = 0;
    for (auto& b : t.bits.data()) {
      b = static_cast<std::uint8_t>(rng() & 1u);
      ones += b;
    }
    CHECK(mean_occupancy(t, BandSpec::unii_1_2()) ==
          doctest::Approx(static_cast<double>(ones) / 800.0).epsilon(1e-12));
  }
  SUBCASE("empty range is rejected") {
    const OccupancyTrace t = make_occupancy(10, 8);
    CHECK_THROWS_AS(mean_occupancy(t, BandSpec::unii_1_2(), SampleRange{5, 5}),
                    std::invalid_argument);
  }
}

TEST_CASE("mean occupancy of a concatenation is the weighted mean of the parts") {
  std::mt19937_64 rng(19);
  OccupancyTrace t = make_occupancy(130, 4);
  for (auto& b : t.bits.data()) b = static_cast<std::uint8_t>(rng() & 1u);
  const BandSpec band = BandSpec::all(4);
  const double whole = mean_occupancy(t, band, SampleRange{0, 130});
  const double head = mean_occupancy(t, band, SampleRange{0, 50});
  const double tail = mean_occupancy(t, band, SampleRange{50, 130});
  CHECK(whole == doctest::Approx((head * 50 + tail * 80) / 130).epsilon(1e-12));
}

TEST_CASE("segment_epochs partitions from sample zero") {
  // 30 samples at 10 us, 10-sample (100 us) epochs -> 3 full windows.
  OccupancyTrace t = make_occupancy(30, 2, 1);
  const auto epochs = segment_epochs(t, BandSpec::all(2), std::chrono::microseconds(100), 0.0);
  REQUIRE(epochs.size() == 3);
  CHECK(epochs[0].source_offset == 0);
  CHECK(epochs[1].source_offset == 10);
  CHECK(epochs[2].source_offset == 20);
  CHECK(epochs[0].n_samples() == 10);
  CHECK(epochs[0].duration() == std::chrono::microseconds(100));
}

TEST_CASE("segment_epochs drops quiet windows, boundary included") {
  // Three 100-sample windows over one channel with means 0.04, 0.05, 0.30.
  OccupancyTrace t = make_occupancy(300, 1);
  for (std::size_t i = 0; i < 4; ++i) t.bits(i, 0) = 1;
  for (std::size_t i = 100; i < 105; ++i) t.bits(i, 0) = 1;
  for (std::size_t i = 200; i < 230; ++i) t.bits(i, 0) = 1;
  const auto epochs = segment_epochs(t, BandSpec::all(1), t.sample_period * 100, 0.05);
  REQUIRE(epochs.size() == 2);
  CHECK(epochs[0].mean_occupancy == doctest::Approx(0.05));
  CHECK(epochs[0].source_offset == 100);
  CHECK(epochs[1].mean_occupancy == doctest::Approx(0.30));
}

TEST_CASE("segment_epochs on an all-idle trace retains nothing at the default threshold") {
  const OccupancyTrace t = make_occupancy(40000, 8);
  CHECK(segment_epochs(t, BandSpec::unii_1_2()).empty());
}

TEST_CASE("segment_epochs validates the epoch duration") {
  const OccupancyTrace t = make_occupancy(100, 1);
  CHECK_THROWS_AS(segment_epochs(t, BandSpec::all(1), std::chrono::microseconds(5), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(segment_epochs(t, BandSpec::all(1), std::chrono::microseconds(15), 0.0),
                  std::invalid_argument);
}

TEST_CASE("retained and discarded epochs split exactly at the threshold") {
  std::mt19937_64 rng(23);
  OccupancyTrace t = make_occupancy(1000, 3);
  for (auto& b : t.bits.data()) b = uniform01(rng) < 0.06 ? 1 : 0;
  const BandSpec band = BandSpec::all(3);
  const double threshold = 0.05;
  const auto kept = segment_epochs(t, band, t.sample_period * 100, threshold);
  std::size_t kept_count = 0;
  for (std::size_t w = 0; w < 10; ++w) {
    const double mean = mean_occupancy(t, band, SampleRange{w * 100, (w + 1) * 100});
    if (mean >= threshold) {
      REQUIRE(kept_count < kept.size());
      CHECK(kept[kept_count].source_offset == w * 100);
      CHECK(kept[kept_count].mean_occupancy == doctest::Approx(mean).epsilon(1e-12));
      ++kept_count;
    }
  }
  CHECK(kept_count == kept.size());
}

TEST_CASE("rssi calibration") {
  CHECK(rssi_units_to_dbm(150) == doctest::Approx(-83.5));
  const RssiCalibration cal = RssiCalibration::with_anchor(0.25, 150, -83.5);
  CHECK(rssi_units_to_dbm(150, cal) == doctest::Approx(-83.5));
  CHECK(rssi_units_to_dbm(151, cal) == doctest::Approx(-83.5 + 0.25));
  SUBCASE("round trip stays within one quantization step") {
    for (int units = 0; units <= 1023; units += 13) {
      const double dbm = rssi_units_to_dbm(units, cal);
      CHECK(std::abs(dbm_to_rssi_units(dbm, cal) - units) <= 1);
    }
  }
}

TEST_CASE("validation of domain invariants") {
  CHECK_THROWS_AS((CcaThreshold{2000, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(BandSpec::custom({}).validate(8), std::invalid_argument);
  CHECK_THROWS_AS(BandSpec::custom({3, 3}).validate(8), std::invalid_argument);
  CHECK_THROWS_AS(BandSpec::custom({5, 2}).validate(8), std::invalid_argument);
  CHECK_THROWS_AS(BandSpec::custom({0, 9}).validate(8), std::invalid_argument);
  CHECK_NOTHROW(BandSpec::unii_2c().validate(16));

  PowerTrace bad = make_power(2, 2);
  bad.samples(0, 0) = 1024;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
