#include "rieif/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rieif/error.hpp"

namespace rieif::data {

std::size_t MissingMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

MissingMask& MissingMask::merge(const MissingMask& other) {
  if (other.nodes_ != nodes_ || other.steps_ != steps_) {
    throw ShapeError("MissingMask::merge: shapes differ");
  }
  for (std::size_t k = 0; k < bits_.size(); ++k) bits_[k] |= other.bits_[k];
  return *this;
}

void RawPanel::validate() const {
  if (nodes() < 2 || steps < 2) {
    throw ConfigError("RawPanel: need N >= 2 and T >= 2, got N=" + std::to_string(nodes()) +
                      " T=" + std::to_string(steps));
  }
  if (values.size() != nodes() * steps) throw ConfigError("RawPanel: value count does not match N x T");
  if (raw_missing.nodes() != nodes() || raw_missing.steps() != steps) {
    throw ConfigError("RawPanel: raw-missing mask does not match N x T");
  }
}

std::size_t StandardizedPanel::node_index(const std::string& name) const {
  auto it = std::find(node_names.begin(), node_names.end(), name);
  if (it == node_names.end()) throw ConfigError("unknown node '" + name + "'");
  return static_cast<std::size_t>(it - node_names.begin());
}

StandardizedPanel zscore_standardize(const RawPanel& panel, TimeRange fit) {
  panel.validate();
  if (fit.empty() || fit.end > panel.steps) {
    throw ConfigError("zscore_standardize: fit range [" + std::to_string(fit.begin) + "," +
                      std::to_string(fit.end) + ") is empty or exceeds T=" + std::to_string(panel.steps));
  }
  constexpr double kStdFloor = 1e-12;
  StandardizedPanel out;
  out.node_names = panel.node_names;
  out.steps = panel.steps;
  out.raw_missing = panel.raw_missing;
  out.y.assign(panel.values.size(), 0.0);
  out.mean.assign(panel.nodes(), 0.0);
  out.stddev.assign(panel.nodes(), 1.0);
  for (std::size_t i = 0; i < panel.nodes(); ++i) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t t = fit.begin; t < fit.end; ++t) {
      if (panel.raw_missing.missing(i, t)) continue;
      s += panel.value(i, t);
      ++n;
    }
    if (n == 0) continue;  // no data: mean 0, std 1
    const double mu = s / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = fit.begin; t < fit.end; ++t) {
      if (panel.raw_missing.missing(i, t)) continue;
      const double d = panel.value(i, t) - mu;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    out.mean[i] = mu;
    if (sd <= kStdFloor) {
      out.stddev[i] = 1.0;
      continue;  // constant row -> zeros
    }
    out.stddev[i] = sd;
    for (std::size_t t = 0; t < panel.steps; ++t) {
      if (panel.raw_missing.missing(i, t)) continue;
      out.y[i * panel.steps + t] = (panel.value(i, t) - mu) / sd;
    }
  }
  return out;
}

Split chronological_split(std::size_t steps, double train_frac, std::size_t min_length) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("chronological_split: train fraction must lie in (0, 1)");
  }
  const auto cut = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(steps)));
  Split s{{0, cut}, {cut, steps}};
  if (s.train.size() < min_length || s.test.size() < min_length) {
    throw ConfigError("chronological_split: T=" + std::to_string(steps) + " at fraction " +
                      std::to_string(train_frac) + " leaves a part shorter than " + std::to_string(min_length));
  }
  return s;
}

std::vector<double> time_delay_embed(const StandardizedPanel& panel, const MissingMask& mask, std::size_t node,
                                     std::size_t t, std::size_t dims, std::size_t tau) {
  if (dims < 1 || tau < 1) throw ConfigError("time_delay_embed: need K >= 1 and tau >= 1");
  std::vector<double> v(dims, 0.0);
  for (std::size_t l = 0; l < dims; ++l) {
    if (l * tau > t) break;
    const std::size_t s = t - l * tau;
    if (mask.missing(node, s) || panel.raw_missing.missing(node, s)) continue;
    v[l] = panel.at(node, s);
  }
  return v;
}

std::vector<Segment> make_segments(TimeRange range, std::size_t length, std::size_t stride) {
  if (length < 1 || stride < 1) throw ConfigError("make_segments: length and stride must be >= 1");
  if (length > range.size()) {
    throw ConfigError("make_segments: segment length " + std::to_string(length) + " exceeds range length " +
                      std::to_string(range.size()));
  }
  std::vector<Segment> out;
  for (std::size_t s = range.begin; s + length <= range.end; s += stride) out.push_back({s, length});
  return out;
}

std::vector<double> phase_tensor(const StandardizedPanel& panel, const MissingMask& mask, const Segment& segment,
                                 std::size_t dims, std::size_t tau) {
  const std::size_t n = panel.nodes();
  std::vector<double> out(segment.length * n * dims, 0.0);
  for (std::size_t k = 0; k < segment.length; ++k) {
    const std::size_t t = segment.start + k;
    for (std::size_t i = 0; i < n; ++i) {
      double* dst = out.data() + (k * n + i) * dims;
      for (std::size_t l = 0; l < dims; ++l) {
        if (l * tau > t) break;
        const std::size_t s = t - l * tau;
        if (mask.missing(i, s) || panel.raw_missing.missing(i, s)) continue;
        dst[l] = panel.at(i, s);
      }
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

RawPanel parse_panel_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("panel CSV: empty file", 1, 0);
  RawPanel panel;
  std::set<std::string> seen;
  std::size_t col = 0;
  for (const std::string& raw : split_csv_line(line)) {
    ++col;
    std::string name = trim(raw);
    if (name.empty()) throw ParseError("panel CSV: empty node name", 1, col);
    if (!seen.insert(name).second) throw ParseError("panel CSV: duplicate node name '" + name + "'", 1, col);
    panel.node_names.push_back(std::move(name));
  }
  const std::size_t n = panel.node_names.size();
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::uint8_t>> gaps;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != n) {
      throw ParseError("panel CSV: expected " + std::to_string(n) + " cells, found " + std::to_string(cells.size()),
                       row, std::min(cells.size(), n) + 1);
    }
    std::vector<double> vals(n, 0.0);
    std::vector<std::uint8_t> gap(n, 0);
    for (std::size_t c = 0; c < n; ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty()) {
        gap[c] = 1;
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("panel CSV: non-numeric cell '" + cell + "'", row, c + 1);
      }
      vals[c] = v;
    }
    rows.push_back(std::move(vals));
    gaps.push_back(std::move(gap));
  }
  panel.steps = rows.size();
  panel.values.assign(n * panel.steps, 0.0);
  panel.raw_missing = MissingMask(n, panel.steps);
  for (std::size_t t = 0; t < panel.steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      panel.values[i * panel.steps + t] = rows[t][i];
      if (gaps[t][i]) panel.raw_missing.set(i, t);
    }
  }
  return panel;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

RawPanel load_panel_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("panel CSV '" + path.string() + "' does not exist");
  return parse_panel_csv(read_text_file(path));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void save_panel_csv(const RawPanel& panel, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < panel.nodes(); ++i) {
    if (i) out += ',';
    out += panel.node_names[i];
  }
  out += '\n';
  for (std::size_t t = 0; t < panel.steps; ++t) {
    for (std::size_t i = 0; i < panel.nodes(); ++i) {
      if (i) out += ',';
      if (!panel.raw_missing.missing(i, t)) out += format_double(panel.value(i, t));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace rieif::data
