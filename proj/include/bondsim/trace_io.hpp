#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "bondsim/trace.hpp"

namespace bondsim {

class trace_io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TraceKind { Power, Occupancy };

/// Either a power or an occupancy trace, depending on `kind`.
struct LoadedTrace {
  TraceKind kind = TraceKind::Power;
  PowerTrace power;
  OccupancyTrace occupancy;
};

// CSV format: header "t,ch36,ch40,...", one row per sample, integer cells
// (RSSI units for power traces, 0/1 for occupancy traces). The sample period
// is not stored in CSV and must be supplied on load.
void write_power_csv(const PowerTrace& trace, const std::filesystem::path& path);
void write_occupancy_csv(const OccupancyTrace& trace, const std::filesystem::path& path);
PowerTrace read_power_csv(const std::filesystem::path& path,
                          SamplePeriod sample_period = kDefaultSamplePeriod);
OccupancyTrace read_occupancy_csv(const std::filesystem::path& path,
                                  SamplePeriod sample_period = kDefaultSamplePeriod);

// Binary format ("WACT"): magic, u8 version=1, u8 kind (0 = power u16 LE,
// 1 = occupancy bit-packed row-major), u16 n_channels, u64 n_samples,
// u32 sample_period_ns, payload. Occupancy bit i = row*(n_channels)+col,
// LSB-first within each byte. Channel labels are not stored; defaults are
// synthesized on load.
void write_power_binary(const PowerTrace& trace, const std::filesystem::path& path);
void write_occupancy_binary(const OccupancyTrace& trace, const std::filesystem::path& path);
LoadedTrace read_trace_binary(const std::filesystem::path& path);

/// Sniffs the format: WACT magic selects binary; otherwise the file is parsed
/// as CSV and the kind is inferred (any cell > 1 means power).
LoadedTrace read_trace(const std::filesystem::path& path,
                       SamplePeriod csv_sample_period = kDefaultSamplePeriod);

/// Writes by extension: ".csv" selects the CSV format, anything else binary.
void write_power_trace(const PowerTrace& trace, const std::filesystem::path& path);
void write_occupancy_trace(const OccupancyTrace& trace, const std::filesystem::path& path);

/// Default labels when a format does not store them: 36, 40, 44, ...
std::vector<int> default_channel_labels(std::size_t n_channels);

}  // namespace bondsim
