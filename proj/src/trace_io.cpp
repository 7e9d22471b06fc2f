#include "bondsim/trace_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace bondsim {

namespace {

constexpr std::array<char, 4> kMagic = {'W', 'A', 'C', 'T'};
constexpr std::uint8_t kVersion = 1;

std::string loc(const std::filesystem::path& path, std::size_t detail) {
  return path.string() + " (byte offset " + std::to_string(detail) + ")";
}

void put_u16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

class Reader {
 public:
  Reader(std::ifstream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw trace_io_error("truncated trace file: wanted " + std::to_string(n) +
                           " bytes at " + loc(path_, offset_));
    offset_ += n;
  }

  std::uint8_t u8() {
    std::uint8_t v;
    read(&v, 1);
    return v;
  }
  std::uint16_t u16() {
    std::uint8_t b[2];
    read(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    std::uint8_t b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint8_t b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::size_t offset() const { return offset_; }

 private:
  std::ifstream& in_;
  const std::filesystem::path& path_;
  std::size_t offset_ = 0;
};

std::vector<int> parse_csv_header(const std::string& line, const std::filesystem::path& path) {
  std::vector<int> labels;
  std::stringstream ss(line);
  std::string field;
  bool first = true;
  while (std::getline(ss, field, ',')) {
    if (first) {
      if (field != "t")
        throw trace_io_error(path.string() + ": CSV header must start with 't', got '" + field + "'");
      first = false;
      continue;
    }
    std::string digits = field;
    if (digits.rfind("ch", 0) == 0) digits = digits.substr(2);
    int value = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size())
      throw trace_io_error(path.string() + ": bad channel column '" + field + "'");
    labels.push_back(value);
  }
  if (first) throw trace_io_error(path.string() + ": empty CSV header");
  return labels;
}

struct CsvData {
  std::vector<int> labels;
  std::vector<long> values;  // row-major, labels.size() per row
  std::size_t n_rows = 0;
};

CsvData read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw trace_io_error("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw trace_io_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvData data;
  data.labels = parse_csv_header(line, path);
  if (data.labels.empty()) throw trace_io_error(path.string() + ": no channel columns");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(ss, field, ',')) {
      long value = 0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
      if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw trace_io_error(path.string() + ":" + std::to_string(lineno) +
                             ": bad integer '" + field + "'");
      if (col > 0) data.values.push_back(value);
      ++col;
    }
    if (col != data.labels.size() + 1)
      throw trace_io_error(path.string() + ":" + std::to_string(lineno) +
                           ": expected " + std::to_string(data.labels.size() + 1) + " fields, got " +
                           std::to_string(col));
    ++data.n_rows;
  }
  if (data.n_rows == 0) throw trace_io_error(path.string() + ": no sample rows");
  return data;
}

void write_csv_header(std::ostream& os, const std::vector<int>& labels, std::size_t n_channels) {
  os << "t";
  for (std::size_t c = 0; c < n_channels; ++c) {
    const int label = c < labels.size() ? labels[c] : 36 + 4 * static_cast<int>(c);
    os << ",ch" << label;
  }
  os << "\n";
}

}  // namespace

std::vector<int> default_channel_labels(std::size_t n_channels) {
  std::vector<int> labels(n_channels);
  for (std::size_t i = 0; i < n_channels; ++i) labels[i] = 36 + 4 * static_cast<int>(i);
  return labels;
}

void write_power_csv(const PowerTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw trace_io_error("cannot write " + path.string());
  write_csv_header(out, trace.channel_labels, trace.n_channels());
  for (std::size_t t = 0; t < trace.n_samples(); ++t) {
    out << t;
    for (std::size_t c = 0; c < trace.n_channels(); ++c) out << ',' << trace.samples(t, c);
    out << '\n';
  }
  if (!out) throw trace_io_error("write failed for " + path.string());
}

void write_occupancy_csv(const OccupancyTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw trace_io_error("cannot write " + path.string());
  write_csv_header(out, trace.channel_labels, trace.n_channels());
  for (std::size_t t = 0; t < trace.n_samples(); ++t) {
    out << t;
    for (std::size_t c = 0; c < trace.n_channels(); ++c)
      out << ',' << static_cast<int>(trace.bits(t, c));
    out << '\n';
  }
  if (!out) throw trace_io_error("write failed for " + path.string());
}

PowerTrace read_power_csv(const std::filesystem::path& path, SamplePeriod sample_period) {
  const CsvData data = read_csv(path);
  PowerTrace trace;
  trace.samples = Matrix<std::uint16_t>(data.n_rows, data.labels.size());
  trace.sample_period = sample_period;
  trace.channel_labels = data.labels;
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    const long v = data.values[i];
    if (v < 0 || v > kRssiMax)
      throw trace_io_error(path.string() + ": power value " + std::to_string(v) +
                           " outside [0, 1023]");
    trace.samples.data()[i] = static_cast<std::uint16_t>(v);
  }
  return trace;
}

OccupancyTrace read_occupancy_csv(const std::filesystem::path& path, SamplePeriod sample_period) {
  const CsvData data = read_csv(path);
  OccupancyTrace trace;
  trace.bits = Matrix<std::uint8_t>(data.n_rows, data.labels.size());
  trace.sample_period = sample_period;
  trace.channel_labels = data.labels;
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    const long v = data.values[i];
    if (v != 0 && v != 1)
      throw trace_io_error(path.string() + ": occupancy value " + std::to_string(v) +
                           " outside {0, 1}");
    trace.bits.data()[i] = static_cast<std::uint8_t>(v);
  }
  return trace;
}

void write_power_binary(const PowerTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw trace_io_error("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kVersion));
  out.put(0);  // kind: power
  put_u16(out, static_cast<std::uint16_t>(trace.n_channels()));
  put_u64(out, trace.n_samples());
  put_u32(out, static_cast<std::uint32_t>(trace.sample_period.count()));
  for (const auto v : trace.samples.data()) put_u16(out, v);
  if (!out) throw trace_io_error("write failed for " + path.string());
}

void write_occupancy_binary(const OccupancyTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw trace_io_error("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kVersion));
  out.put(1);  // kind: occupancy
  put_u16(out, static_cast<std::uint16_t>(trace.n_channels()));
  put_u64(out, trace.n_samples());
  put_u32(out, static_cast<std::uint32_t>(trace.sample_period.count()));
  const auto& bits = trace.bits.data();
  std::vector<std::uint8_t> packed((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  out.write(reinterpret_cast<const char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));
  if (!out) throw trace_io_error("write failed for " + path.string());
}

LoadedTrace read_trace_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw trace_io_error("cannot open " + path.string());
  Reader r(in, path);

  std::array<char, 4> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) throw trace_io_error(path.string() + ": bad magic, not a WACT trace");
  const std::uint8_t version = r.u8();
  if (version != kVersion)
    throw trace_io_error(path.string() + ": unsupported version " + std::to_string(version));
  const std::uint8_t kind = r.u8();
  if (kind > 1)
    throw trace_io_error(path.string() + ": unknown trace kind " + std::to_string(kind));
  const std::uint16_t n_channels = r.u16();
  const std::uint64_t n_samples = r.u64();
  const std::uint32_t period_ns = r.u32();
  if (n_channels == 0) throw trace_io_error(path.string() + ": zero channels");
  if (n_samples == 0) throw trace_io_error(path.string() + ": zero samples");
  if (period_ns == 0) throw trace_io_error(path.string() + ": zero sample period");

  LoadedTrace loaded;
  if (kind == 0) {
    loaded.kind = TraceKind::Power;
    loaded.power.samples = Matrix<std::uint16_t>(n_samples, n_channels);
    loaded.power.sample_period = SamplePeriod(period_ns);
    loaded.power.channel_labels = default_channel_labels(n_channels);
    for (auto& v : loaded.power.samples.data()) {
      v = r.u16();
      if (v > kRssiMax)
        throw trace_io_error(path.string() + ": power value " + std::to_string(v) +
                             " outside [0, 1023] near " + loc(path, r.offset()));
    }
  } else {
    loaded.kind = TraceKind::Occupancy;
    loaded.occupancy.bits = Matrix<std::uint8_t>(n_samples, n_channels);
    loaded.occupancy.sample_period = SamplePeriod(period_ns);
    loaded.occupancy.channel_labels = default_channel_labels(n_channels);
    auto& bits = loaded.occupancy.bits.data();
    std::vector<std::uint8_t> packed((bits.size() + 7) / 8);
    r.read(packed.data(), packed.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
  }
  return loaded;
}

LoadedTrace read_trace(const std::filesystem::path& path, SamplePeriod csv_sample_period) {
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw trace_io_error("cannot open " + path.string());
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() == 4 && magic == kMagic) return read_trace_binary(path);
  }
  const CsvData data = read_csv(path);
  const bool is_occupancy =
      std::all_of(data.values.begin(), data.values.end(), [](long v) { return v == 0 || v == 1; });
  LoadedTrace loaded;
  if (is_occupancy) {
    loaded.kind = TraceKind::Occupancy;
    loaded.occupancy = read_occupancy_csv(path, csv_sample_period);
  } else {
    loaded.kind = TraceKind::Power;
    loaded.power = read_power_csv(path, csv_sample_period);
  }
  return loaded;
}

void write_power_trace(const PowerTrace& trace, const std::filesystem::path& path) {
  if (path.extension() == ".csv")
    write_power_csv(trace, path);
  else
    write_power_binary(trace, path);
}

void write_occupancy_trace(const OccupancyTrace& trace, const std::filesystem::path& path) {
  if (path.extension() == ".csv")
    write_occupancy_csv(trace, path);
  else
    write_occupancy_binary(trace, path);
}

}  // namespace bondsim
