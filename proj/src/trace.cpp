#include "bondsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bondsim {

void CcaThreshold::validate() const {
  if (raw_units < 0 || raw_units > kRssiMax)
    throw std::invalid_argument("cca raw_units outside [0, 1023]");
}

double rssi_units_to_dbm(int units, const RssiCalibration& cal) {
  return cal.intercept + cal.slope * units;
}

int dbm_to_rssi_units(double dbm, const RssiCalibration& cal) {
  const double units = (dbm - cal.intercept) / cal.slope;
  const long rounded = std::lround(units);
  return static_cast<int>(std::clamp(rounded, 0L, static_cast<long>(kRssiMax)));
}

void PowerTrace::validate() const {
  if (samples.rows() == 0 || samples.cols() == 0)
    throw std::invalid_argument("power trace is empty");
  if (sample_period.count() <= 0)
    throw std::invalid_argument("sample period must be positive");
  if (!channel_labels.empty() && channel_labels.size() != samples.cols())
    throw std::invalid_argument("channel label count does not match trace width");
  for (const auto v : samples.data())
    if (v > kRssiMax) throw std::invalid_argument("power sample outside [0, 1023]");
}

void OccupancyTrace::validate() const {
  if (bits.rows() == 0 || bits.cols() == 0)
    throw std::invalid_argument("occupancy trace is empty");
  if (sample_period.count() <= 0)
    throw std::invalid_argument("sample period must be positive");
  if (!channel_labels.empty() && channel_labels.size() != bits.cols())
    throw std::invalid_argument("channel label count does not match trace width");
  for (const auto v : bits.data())
    if (v > 1) throw std::invalid_argument("occupancy bit outside {0, 1}");
}

void BandSpec::validate(std::size_t trace_channels) const {
  if (channels.empty()) throw std::invalid_argument("band has no channels");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] < 0 || static_cast<std::size_t>(channels[i]) >= trace_channels)
      throw std::invalid_argument("band channel index outside trace width");
    if (i > 0 && channels[i] <= channels[i - 1])
      throw std::invalid_argument("band channels must be strictly increasing");
  }
}

BandSpec BandSpec::unii_1_2() { return BandSpec{"unii12", {0, 1, 2, 3, 4, 5, 6, 7}}; }

BandSpec BandSpec::unii_2c() { return BandSpec{"unii2c", {8, 9, 10, 11, 12, 13, 14, 15}}; }

BandSpec BandSpec::all(std::size_t n) {
  BandSpec band{"all", {}};
  band.channels.resize(n);
  std::iota(band.channels.begin(), band.channels.end(), 0);
  return band;
}

BandSpec BandSpec::custom(std::vector<int> channels) {
  return BandSpec{"custom", std::move(channels)};
}

OccupancyTrace binarize(const PowerTrace& trace, const CcaThreshold& cca) {
  if (trace.samples.empty()) throw std::invalid_argument("binarize: empty trace");
  cca.validate();

  OccupancyTrace out;
  out.bits = Matrix<std::uint8_t>(trace.n_samples(), trace.n_channels());
  out.sample_period = trace.sample_period;
  out.channel_labels = trace.channel_labels;
  out.meta = trace.meta;
  const auto& src = trace.samples.data();
  auto& dst = out.bits.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = static_cast<int>(src[i]) > cca.raw_units ? 1 : 0;
  return out;
}

PowerTrace downsample(const PowerTrace& trace, std::size_t factor, DownsampleMode mode) {
  if (factor == 0) throw std::invalid_argument("downsample: factor must be >= 1");
  if (trace.n_samples() < factor)
    throw std::invalid_argument("downsample: trace shorter than one block");

  const std::size_t out_rows = trace.n_samples() / factor;
  PowerTrace out;
  out.samples = Matrix<std::uint16_t>(out_rows, trace.n_channels());
  out.sample_period = trace.sample_period * static_cast<long>(factor);
  out.channel_labels = trace.channel_labels;
  out.meta = trace.meta;
  for (std::size_t r = 0; r < out_rows; ++r) {
    for (std::size_t c = 0; c < trace.n_channels(); ++c) {
      if (mode == DownsampleMode::KeepFirst) {
        out.samples(r, c) = trace.samples(r * factor, c);
      } else {
        std::uint16_t best = 0;
        for (std::size_t k = 0; k < factor; ++k)
          best = std::max(best, trace.samples(r * factor + k, c));
        out.samples(r, c) = best;
      }
    }
  }
  return out;
}

double mean_occupancy(const OccupancyTrace& trace, const BandSpec& band, SampleRange range) {
  band.validate(trace.n_channels());
  if (range.begin >= range.end) throw std::invalid_argument("mean_occupancy: empty range");
  if (range.end > trace.n_samples())
    throw std::invalid_argument("mean_occupancy: range outside trace");

  std::uint64_t busy = 0;
  for (std::size_t t = range.begin; t < range.end; ++t)
    for (const int c : band.channels) busy += trace.bits(t, static_cast<std::size_t>(c));
  return static_cast<double>(busy) /
         (static_cast<double>(range.length()) * static_cast<double>(band.size()));
}

double mean_occupancy(const OccupancyTrace& trace, const BandSpec& band) {
  return mean_occupancy(trace, band, SampleRange{0, trace.n_samples()});
}

std::vector<Epoch> segment_epochs(const OccupancyTrace& trace, const BandSpec& band,
                                  std::chrono::nanoseconds epoch_duration, double min_occupancy) {
  band.validate(trace.n_channels());
  if (trace.sample_period.count() <= 0)
    throw std::invalid_argument("segment_epochs: sample period must be positive");
  if (epoch_duration < trace.sample_period)
    throw std::invalid_argument("segment_epochs: epoch shorter than one sample");
  if (epoch_duration.count() % trace.sample_period.count() != 0)
    throw std::invalid_argument("segment_epochs: epoch duration not a multiple of sample period");

  const std::size_t epoch_samples =
      static_cast<std::size_t>(epoch_duration.count() / trace.sample_period.count());
  const std::size_t n_epochs = trace.n_samples() / epoch_samples;

  std::vector<Epoch> epochs;
  for (std::size_t e = 0; e < n_epochs; ++e) {
    const std::size_t offset = e * epoch_samples;
    Epoch epoch;
    epoch.bits = Matrix<std::uint8_t>(epoch_samples, band.size());
    epoch.sample_period = trace.sample_period;
    epoch.source_offset = offset;
    std::uint64_t busy = 0;
    for (std::size_t t = 0; t < epoch_samples; ++t) {
      for (std::size_t b = 0; b < band.size(); ++b) {
        const std::uint8_t bit = trace.bits(offset + t, static_cast<std::size_t>(band.channels[b]));
        epoch.bits(t, b) = bit;
        busy += bit;
      }
    }
    epoch.mean_occupancy = static_cast<double>(busy) /
                           (static_cast<double>(epoch_samples) * static_cast<double>(band.size()));
    if (epoch.mean_occupancy >= min_occupancy) epochs.push_back(std::move(epoch));
  }
  return epochs;
}

}  // namespace bondsim
