#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rieif::data {

/// Half-open interval [begin, end) of 0-based time indices.
struct TimeRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  bool empty() const noexcept { return end <= begin; }
  bool contains(std::size_t t) const noexcept { return t >= begin && t < end; }
  bool operator==(const TimeRange&) const = default;
};

/// N x T bit matrix, 1 = value unavailable to the model.
class MissingMask {
 public:
  MissingMask() = default;
  MissingMask(std::size_t nodes, std::size_t steps) : nodes_(nodes), steps_(steps), bits_(nodes * steps, 0) {}

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t steps() const noexcept { return steps_; }
  bool missing(std::size_t i, std::size_t t) const { return bits_[i * steps_ + t] != 0; }
  void set(std::size_t i, std::size_t t, bool v = true) { bits_[i * steps_ + t] = v ? 1 : 0; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  /// Elementwise OR; shapes must agree.
  MissingMask& merge(const MissingMask& other);
  bool operator==(const MissingMask&) const = default;

 private:
  std::size_t nodes_ = 0;
  std::size_t steps_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Raw measurements, one row per node. Cells absent in the source file are flagged
/// in `raw_missing` and hold 0.
struct RawPanel {
  std::vector<std::string> node_names;
  std::size_t steps = 0;
  std::vector<double> values;  // N x T, node-major
  MissingMask raw_missing;
  double sample_period = 1.0;

  std::size_t nodes() const noexcept { return node_names.size(); }
  double value(std::size_t i, std::size_t t) const { return values[i * steps + t]; }
  /// Throws ConfigError unless N >= 2, T >= 2 and all sizes agree.
  void validate() const;
};

/// z-scored panel. Statistics come from a fit range only.
struct StandardizedPanel {
  std::vector<std::string> node_names;
  std::size_t steps = 0;
  std::vector<double> y;  // N x T, node-major
  std::vector<double> mean;
  std::vector<double> stddev;
  MissingMask raw_missing;

  std::size_t nodes() const noexcept { return node_names.size(); }
  double at(std::size_t i, std::size_t t) const { return y[i * steps + t]; }
  double destandardize(std::size_t i, double z) const { return mean[i] + stddev[i] * z; }
  /// Index of a node name; throws ConfigError if absent.
  std::size_t node_index(const std::string& name) const;
};

/// Population statistics over `fit`; constant rows map to zeros with stddev 1.
StandardizedPanel zscore_standardize(const RawPanel& panel, TimeRange fit);

struct Split {
  TimeRange train;
  TimeRange test;
};

/// train = [0, floor(frac*T)), test = the rest. Either part shorter than `min_length` is an error.
Split chronological_split(std::size_t steps, double train_frac, std::size_t min_length = 1);

/// Component l = panel(i, t - l*tau) when in range and not masked, else 0.
std::vector<double> time_delay_embed(const StandardizedPanel& panel, const MissingMask& mask, std::size_t node,
                                     std::size_t t, std::size_t dims, std::size_t tau);

struct Segment {
  std::size_t start = 0;
  std::size_t length = 0;

  TimeRange range() const noexcept { return {start, start + length}; }
  bool operator==(const Segment&) const = default;
};

/// Windows of `length` starting at range.begin, range.begin + stride, ...; partial tail dropped.
std::vector<Segment> make_segments(TimeRange range, std::size_t length, std::size_t stride);

/// Phase-space snapshots of a segment laid out [T_seg][N][K]; masked or out-of-range lags are 0.
std::vector<double> phase_tensor(const StandardizedPanel& panel, const MissingMask& mask, const Segment& segment,
                                 std::size_t dims, std::size_t tau);

/// CSV with a header of node names and one row per time step. Empty cells are raw-missing.
RawPanel load_panel_csv(const std::filesystem::path& path);
RawPanel parse_panel_csv(const std::string& text);
void save_panel_csv(const RawPanel& panel, const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rieif::data
