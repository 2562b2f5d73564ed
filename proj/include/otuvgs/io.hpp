#pragma once

// UVGT container, PGM occupancy heatmaps, JSON/CSV utilization reports.
//
// UVGT layout, all little-endian:
//   magic       4 bytes  "UVGT"
//   version     1 byte   = 1
//   flags       1 byte   reserved, = 0
//   H, W, K, C  4x uint32
//   strategy    1 byte   (0 spherical, 1 he, 2 ot)
//   n_input     uint64
//   counts      H*W uint32, row-major
//   raw_counts  H*W uint32
//   data        H*W*K*C float32, row-major [H][W][K][C]
//   retained_ids H*W*K uint64, all-ones sentinel for empty

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "otuvgs/metrics.hpp"
#include "otuvgs/packing.hpp"

#include <json.hpp>

namespace otuvgs {

inline constexpr char kUvgtMagic[4] = {'U', 'V', 'G', 'T'};
inline constexpr std::uint8_t kUvgtVersion = 1;

namespace io_detail {

// host is little-endian on every supported target; memcpy keeps it alias-safe
template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw SizeMismatch("file ends inside a field");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace io_detail

inline std::string serialize_tensor(const UVTensor& t) {
  std::string out;
  const std::uint64_t slots = t.config.slot_count();
  const std::uint64_t k = t.config.capacity;
  const std::uint64_t c = t.config.channels();
  out.reserve(27 + slots * 8 + slots * k * c * 4 + slots * k * 8);
  out.append(kUvgtMagic, 4);
  io_detail::put<std::uint8_t>(out, kUvgtVersion);
  io_detail::put<std::uint8_t>(out, 0);  // flags
  io_detail::put<std::uint32_t>(out, t.config.height);
  io_detail::put<std::uint32_t>(out, t.config.width);
  io_detail::put<std::uint32_t>(out, t.config.capacity);
  io_detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(c));
  io_detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(t.strategy));
  io_detail::put<std::uint64_t>(out, t.n_input);
  for (std::uint32_t v : t.counts) io_detail::put(out, v);
  for (std::uint32_t v : t.raw_counts) io_detail::put(out, v);
  out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
  for (std::uint64_t v : t.retained_ids) io_detail::put(out, v);
  return out;
}

inline void write_tensor(const UVTensor& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  const std::string bytes = serialize_tensor(t);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("write failed for " + path);
}

inline UVTensor parse_tensor(const std::string& bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kUvgtMagic, 4) != 0)
    throw BadMagic("not a UVGT file");
  pos = 4;
  const auto version = io_detail::get<std::uint8_t>(bytes, pos);
  if (version != kUvgtVersion)
    throw UnsupportedVersion("version " + std::to_string(version));
  const auto flags = io_detail::get<std::uint8_t>(bytes, pos);
  if (flags != 0) throw InvariantViolation("flags: reserved byte must be 0");

  UVTensor t;
  t.config.height = io_detail::get<std::uint32_t>(bytes, pos);
  t.config.width = io_detail::get<std::uint32_t>(bytes, pos);
  t.config.capacity = io_detail::get<std::uint32_t>(bytes, pos);
  const auto c = io_detail::get<std::uint32_t>(bytes, pos);
  if (t.config.height < 1) throw InvariantViolation("height: must be >= 1");
  if (t.config.width < 1) throw InvariantViolation("width: must be >= 1");
  if (t.config.capacity < 1) throw InvariantViolation("capacity: must be >= 1");
  if (c < 1) throw InvariantViolation("channels: must be >= 1");
  // C is fixed by the stored channel layout; only the default layout's width
  // is produced by this writer, but readers accept any declared C.
  if (c != t.config.channels()) {
    // synthesize an opaque layout of the declared width so channels() agrees
    t.config.channel_layout.assign(c, Channel::Opacity);
  }
  const auto tag = io_detail::get<std::uint8_t>(bytes, pos);
  if (tag > 2) throw InvariantViolation("strategy: unknown tag " + std::to_string(tag));
  t.strategy = static_cast<Strategy>(tag);
  t.n_input = io_detail::get<std::uint64_t>(bytes, pos);

  const std::uint64_t slots = t.config.slot_count();
  const std::uint64_t expected =
      pos + slots * 4 + slots * 4 + slots * t.config.capacity * c * 4 +
      slots * t.config.capacity * 8;
  if (bytes.size() != expected)
    throw SizeMismatch("file is " + std::to_string(bytes.size()) + " bytes, header promises " +
                       std::to_string(expected));

  t.counts.resize(slots);
  for (auto& v : t.counts) v = io_detail::get<std::uint32_t>(bytes, pos);
  t.raw_counts.resize(slots);
  for (auto& v : t.raw_counts) v = io_detail::get<std::uint32_t>(bytes, pos);
  t.data.resize(slots * t.config.capacity * c);
  std::memcpy(t.data.data(), bytes.data() + pos, t.data.size() * sizeof(float));
  pos += t.data.size() * sizeof(float);
  t.retained_ids.resize(slots * t.config.capacity);
  for (auto& v : t.retained_ids) v = io_detail::get<std::uint64_t>(bytes, pos);

  std::uint64_t total_retained = 0, total_raw = 0;
  for (std::uint64_t s = 0; s < slots; ++s) {
    if (t.counts[s] > t.config.capacity)
      throw InvariantViolation("counts: slot " + std::to_string(s) + " exceeds K");
    if (t.counts[s] > t.raw_counts[s])
      throw InvariantViolation("counts: slot " + std::to_string(s) + " exceeds raw_counts");
    if (t.counts[s] != std::min(t.raw_counts[s], t.config.capacity))
      throw InvariantViolation("counts: slot " + std::to_string(s) + " != min(raw, K)");
    total_retained += t.counts[s];
    total_raw += t.raw_counts[s];
    for (std::uint32_t j = 0; j < t.config.capacity; ++j) {
      const std::uint64_t id = t.retained_ids[s * t.config.capacity + j];
      if (j < t.counts[s]) {
        if (id == kEmptySlotId)
          throw InvariantViolation("retained_ids: sentinel inside occupied prefix of slot " +
                                   std::to_string(s));
        if (id >= t.n_input)
          throw InvariantViolation("retained_ids: id out of range in slot " + std::to_string(s));
      } else if (id != kEmptySlotId) {
        throw InvariantViolation("retained_ids: non-sentinel past occupied prefix of slot " +
                                 std::to_string(s));
      }
    }
  }
  if (total_raw != t.n_input)
    throw InvariantViolation("raw_counts: sum " + std::to_string(total_raw) + " != n_input " +
                             std::to_string(t.n_input));
  (void)total_retained;
  return t;
}

inline UVTensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_tensor(ss.str());
}

enum class HeatmapMode { Raw, Retained };

// Binary PGM; empty slots render as 0, occupied slots floor-scale to
// [1, 255] so occupancy never quantizes away.
inline void write_heatmap(const UVTensor& t, const std::string& path, HeatmapMode mode) {
  const auto& counts = mode == HeatmapMode::Raw ? t.raw_counts : t.counts;
  std::uint32_t max_count = 0;
  for (auto c : counts) max_count = std::max(max_count, c);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out << "P5\n" << t.config.width << " " << t.config.height << "\n255\n";
  std::vector<unsigned char> row(t.config.width);
  for (std::uint32_t r = 0; r < t.config.height; ++r) {
    for (std::uint32_t c = 0; c < t.config.width; ++c) {
      const std::uint32_t count = counts[static_cast<std::uint64_t>(r) * t.config.width + c];
      if (count == 0) {
        row[c] = 0;
      } else {
        const std::uint32_t px = count * 255u / max_count;
        row[c] = static_cast<unsigned char>(std::clamp<std::uint32_t>(px, 1, 255));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw IoFailure("write failed for " + path);
}

enum class ReportFormat { Json, Csv };

inline nlohmann::json report_to_json(const UtilizationReport& r) {
  return {{"mapping", strategy_name(r.mapping)},
          {"height", r.height},
          {"width", r.width},
          {"capacity", r.capacity},
          {"n_input", r.n_input},
          {"non_empty_ratio", r.non_empty_ratio},
          {"collision_rate", r.collision_rate},
          {"retention", r.retention},
          {"max_slot_arrivals", r.max_slot_arrivals},
          {"row_count_stddev", r.row_count_stddev},
          {"col_count_stddev", r.col_count_stddev}};
}

inline std::string format_reports(const std::vector<UtilizationReport>& reports,
                                  ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    return arr.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "mapping,height,width,capacity,n_input,non_empty_ratio,collision_rate,retention,"
         "max_slot_arrivals,row_count_stddev,col_count_stddev\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : reports) {
    out << strategy_name(r.mapping) << ',' << r.height << ',' << r.width << ',' << r.capacity
        << ',' << r.n_input << ',' << r.non_empty_ratio << ',' << r.collision_rate << ','
        << r.retention << ',' << r.max_slot_arrivals << ',' << r.row_count_stddev << ','
        << r.col_count_stddev << '\n';
  }
  return out.str();
}

inline void write_report(const std::vector<UtilizationReport>& reports, const std::string& path,
                         ReportFormat format) {
  if (reports.empty()) throw EmptyInput("no reports to write");
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out << format_reports(reports, format);
  if (!out) throw IoFailure("write failed for " + path);
}

}  // namespace otuvgs
