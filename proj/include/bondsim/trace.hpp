#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "bondsim/matrix.hpp"

namespace bondsim {

using SamplePeriod = std::chrono::nanoseconds;

inline constexpr SamplePeriod kDefaultSamplePeriod = std::chrono::microseconds(10);
inline constexpr int kRssiMax = 1023;  // 10-bit ADC

/// Clear channel assessment threshold in raw 10-bit RSSI units. A sample is
/// busy iff its power value strictly exceeds raw_units.
struct CcaThreshold {
  int raw_units = 150;
  double dbm_equivalent = -83.5;

  void validate() const;
};

/// Affine raw-units <-> dBm map. Only the (150, -83.5) anchor is calibrated;
/// the slope is configurable. Simulation never depends on this (busy/idle
/// decisions are made in raw units).
struct RssiCalibration {
  double slope = 0.1;  // dB per RSSI unit
  double intercept = -83.5 - 0.1 * 150.0;

  static RssiCalibration with_anchor(double slope, int anchor_units, double anchor_dbm) {
    return RssiCalibration{slope, anchor_dbm - slope * anchor_units};
  }
};

double rssi_units_to_dbm(int units, const RssiCalibration& cal = {});
int dbm_to_rssi_units(double dbm, const RssiCalibration& cal = {});

/// Raw power samples, one row per temporal sample, one column per 20 MHz
/// channel. Values are 10-bit RSSI units in [0, 1023].
struct PowerTrace {
  Matrix<std::uint16_t> samples;
  SamplePeriod sample_period = kDefaultSamplePeriod;
  std::vector<int> channel_labels;  // 802.11 channel numbers, e.g. 36, 40, ...
  std::string meta;

  std::size_t n_samples() const { return samples.rows(); }
  std::size_t n_channels() const { return samples.cols(); }
  void validate() const;
};

/// Busy/idle indicator matrix with the same shape contract as its source
/// power trace (1 = busy, 0 = idle).
struct OccupancyTrace {
  Matrix<std::uint8_t> bits;
  SamplePeriod sample_period = kDefaultSamplePeriod;
  std::vector<int> channel_labels;
  std::string meta;

  std::size_t n_samples() const { return bits.rows(); }
  std::size_t n_channels() const { return bits.cols(); }
  void validate() const;
};

/// An ordered set of trace column indices forming one band. Indices are
/// 0-based into the trace matrix; the two built-in 160 MHz bands cover the
/// first and second group of eight columns.
struct BandSpec {
  std::string name;
  std::vector<int> channels;  // strictly increasing, non-empty

  std::size_t size() const { return channels.size(); }
  void validate(std::size_t trace_channels) const;

  static BandSpec unii_1_2();              // columns 0..7
  static BandSpec unii_2c();               // columns 8..15
  static BandSpec all(std::size_t n);      // columns 0..n-1
  static BandSpec custom(std::vector<int> channels);
};

/// One fixed-duration occupancy window restricted to a band; the unit of
/// simulation. mean_occupancy always equals the arithmetic mean of bits.
struct Epoch {
  Matrix<std::uint8_t> bits;  // n_epoch_samples x band size
  SamplePeriod sample_period = kDefaultSamplePeriod;
  std::size_t source_offset = 0;  // sample index into the parent trace
  double mean_occupancy = 0.0;

  std::size_t n_samples() const { return bits.rows(); }
  std::size_t n_channels() const { return bits.cols(); }
  std::chrono::nanoseconds duration() const { return sample_period * static_cast<long>(n_samples()); }
};

/// Half-open sample interval [begin, end).
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
};

/// Busy iff power strictly exceeds the CCA threshold; shape preserved.
OccupancyTrace binarize(const PowerTrace& trace, const CcaThreshold& cca = {});

enum class DownsampleMode {
  KeepFirst,  // first sample of each block
  KeepMax,    // block maximum, for conservative occupancy
};

/// Keeps one sample per consecutive block of `factor`; trailing partial block
/// is dropped and the sample period is multiplied by `factor`.
PowerTrace downsample(const PowerTrace& trace, std::size_t factor,
                      DownsampleMode mode = DownsampleMode::KeepFirst);

/// Fraction of busy (sample, channel) cells over the band and range.
double mean_occupancy(const OccupancyTrace& trace, const BandSpec& band, SampleRange range);
double mean_occupancy(const OccupancyTrace& trace, const BandSpec& band);

/// Cuts the trace into non-overlapping windows of `epoch_duration` starting
/// at sample 0 and keeps those with mean occupancy >= min_occupancy (boundary
/// included). The trailing partial window is discarded.
std::vector<Epoch> segment_epochs(const OccupancyTrace& trace, const BandSpec& band,
                                  std::chrono::nanoseconds epoch_duration = std::chrono::milliseconds(100),
                                  double min_occupancy = 0.05);

}  // namespace bondsim
