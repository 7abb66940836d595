#include "rieif/maskproto.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "rieif/error.hpp"
#include "rieif/rng.hpp"

namespace rieif::mask {

double pearson_corr(std::span<const double> a, std::span<const double> b, std::span<const std::uint8_t> skip_a,
                    std::span<const std::uint8_t> skip_b) {
  if (a.size() != b.size()) throw ShapeError("pearson_corr: series lengths differ");
  if ((!skip_a.empty() && skip_a.size() != a.size()) || (!skip_b.empty() && skip_b.size() != b.size())) {
    throw ShapeError("pearson_corr: skip flags do not match series length");
  }
  auto keep = [&](std::size_t t) { return (skip_a.empty() || !skip_a[t]) && (skip_b.empty() || !skip_b[t]); };
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (!keep(t)) continue;
    sa += a[t];
    sb += b[t];
    ++n;
  }
  if (n < 2) throw ConfigError("pearson_corr: fewer than 2 retained pairs");
  const double ma = sa / static_cast<double>(n), mb = sb / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (!keep(t)) continue;
    const double da = a[t] - ma, db = b[t] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 1e-300 || sbb <= 1e-300) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> correlation_matrix(const StandardizedPanel& panel, TimeRange fit) {
  if (fit.empty() || fit.end > panel.steps) throw ConfigError("correlation_matrix: bad fit range");
  const std::size_t n = panel.nodes(), len = fit.size();
  std::vector<double> c(n * n, 0.0);
  std::vector<std::uint8_t> gap_i(len), gap_j(len);
  for (std::size_t i = 0; i < n; ++i) {
    c[i * n + i] = 1.0;
    std::span<const double> yi(panel.y.data() + i * panel.steps + fit.begin, len);
    for (std::size_t t = 0; t < len; ++t) gap_i[t] = panel.raw_missing.missing(i, fit.begin + t);
    for (std::size_t j = i + 1; j < n; ++j) {
      std::span<const double> yj(panel.y.data() + j * panel.steps + fit.begin, len);
      for (std::size_t t = 0; t < len; ++t) gap_j[t] = panel.raw_missing.missing(j, fit.begin + t);
      c[i * n + j] = c[j * n + i] = pearson_corr(yi, yj, gap_i, gap_j);
    }
  }
  return c;
}

std::vector<std::size_t> select_proxies(const StandardizedPanel& panel, TimeRange fit, std::size_t i_star,
                                        double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("select_proxies: rho must lie in (0, 1]");
  if (i_star >= panel.nodes()) throw ConfigError("select_proxies: target index out of range");
  if (fit.empty() || fit.end > panel.steps) throw ConfigError("select_proxies: bad fit range");
  const std::size_t len = fit.size();
  std::vector<std::uint8_t> gap_i(len), gap_j(len);
  for (std::size_t t = 0; t < len; ++t) gap_i[t] = panel.raw_missing.missing(i_star, fit.begin + t);
  std::span<const double> yi(panel.y.data() + i_star * panel.steps + fit.begin, len);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < panel.nodes(); ++j) {
    if (j == i_star) continue;
    for (std::size_t t = 0; t < len; ++t) gap_j[t] = panel.raw_missing.missing(j, fit.begin + t);
    std::span<const double> yj(panel.y.data() + j * panel.steps + fit.begin, len);
    if (std::abs(pearson_corr(yi, yj, gap_i, gap_j)) >= rho) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> MaskSet::masked_nodes() const {
  std::vector<std::size_t> v = proxies;
  v.push_back(target);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

MaskSet sample_blind_spot_mask(std::size_t nodes, std::size_t steps, std::size_t i_star,
                               const std::vector<std::size_t>& proxies, double rho, TimeRange range,
                               std::size_t block_len, std::uint64_t seed) {
  if (i_star >= nodes) throw ConfigError("sample_blind_spot_mask: target index out of range");
  if (range.end > steps) throw ConfigError("sample_blind_spot_mask: range exceeds panel length");
  if (block_len < 1 || block_len > range.size()) {
    throw ConfigError("sample_blind_spot_mask: block length " + std::to_string(block_len) + " does not fit range of " +
                      std::to_string(range.size()));
  }
  MaskSet ms;
  ms.m = MissingMask(nodes, steps);
  ms.target = i_star;
  ms.proxies = proxies;
  ms.rho = rho;
  ms.seed = seed;
  Rng rng = make_rng(seed, "block");
  const std::size_t slots = range.size() - block_len + 1;
  const std::size_t start = range.begin + static_cast<std::size_t>(rng() % slots);
  ms.block = {start, start + block_len};
  for (std::size_t j : ms.masked_nodes()) {
    if (j >= nodes) throw ConfigError("sample_blind_spot_mask: proxy index out of range");
    for (std::size_t t = ms.block.begin; t < ms.block.end; ++t) ms.m.set(j, t);
  }
  return ms;
}

MaskSet sample_blind_spot_mask(const StandardizedPanel& panel, TimeRange train, std::size_t i_star, double rho,
                               TimeRange range, std::size_t block_len, std::uint64_t seed) {
  return sample_blind_spot_mask(panel.nodes(), panel.steps, i_star, select_proxies(panel, train, i_star, rho), rho,
                                range, block_len, seed);
}

MaskedView::MaskedView(const StandardizedPanel& panel, const MissingMask& m) : panel_(&panel), m_(&m) {
  if (m.nodes() != panel.nodes() || m.steps() != panel.steps) throw ShapeError("apply_mask: mask shape differs from panel");
}

bool MaskedView::hidden(std::size_t i, std::size_t t) const {
  return m_->missing(i, t) || panel_->raw_missing.missing(i, t);
}

double MaskedView::model(std::size_t i, std::size_t t) const { return hidden(i, t) ? 0.0 : panel_->at(i, t); }

MaskedView apply_mask(const StandardizedPanel& panel, const MissingMask& m) { return MaskedView(panel, m); }

std::vector<Index> target_index_set(const MissingMask& m, const MissingMask* raw_missing, bool include_raw_missing) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < m.nodes(); ++i) {
    for (std::size_t t = 0; t < m.steps(); ++t) {
      if (!m.missing(i, t)) continue;
      if (raw_missing && !include_raw_missing && raw_missing->missing(i, t)) continue;
      out.emplace_back(i, t);
    }
  }
  return out;
}

void export_mask(const MaskSet& ms, const std::vector<std::string>& names, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path) {
  std::string csv = "node,t\n";
  for (const auto& [i, t] : target_index_set(ms.m)) csv += names.at(i) + "," + std::to_string(t) + "\n";
  data::write_text_file(csv_path, csv);
  nlohmann::ordered_json h;
  h["target"] = names.at(ms.target);
  h["proxies"] = nlohmann::ordered_json::array();
  for (std::size_t p : ms.proxies) h["proxies"].push_back(names.at(p));
  h["rho"] = ms.rho;
  h["block"] = {ms.block.begin, ms.block.end};
  h["seed"] = ms.seed;
  data::write_text_file(json_path, h.dump(2) + "\n");
}

MaskSet import_mask(const std::vector<std::string>& names, std::size_t steps, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path) {
  auto index_of = [&](const std::string& s) {
    auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end()) throw ConfigError("mask import: unknown node '" + s + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  MaskSet ms;
  ms.m = MissingMask(names.size(), steps);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(data::read_text_file(json_path));
    ms.target = index_of(h.at("target").get<std::string>());
    for (const auto& p : h.at("proxies")) ms.proxies.push_back(index_of(p.get<std::string>()));
    ms.rho = h.at("rho").get<double>();
    ms.block = {h.at("block").at(0).get<std::size_t>(), h.at("block").at(1).get<std::size_t>()};
    ms.seed = h.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mask header: ") + e.what(), 0, 0);
  }
  std::istringstream in(data::read_text_file(csv_path));
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 || line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("mask CSV: expected node,t", row, 1);
    const std::size_t i = index_of(line.substr(0, comma));
    std::size_t t = 0;
    const char* b = line.data() + comma + 1;
    const char* e = line.data() + line.size();
    if (e > b && e[-1] == '\r') --e;
    auto [ptr, ec] = std::from_chars(b, e, t);
    if (ec != std::errc() || ptr != e || t >= steps) throw ParseError("mask CSV: bad time index", row, 2);
    ms.m.set(i, t);
  }
  return ms;
}

}  // namespace rieif::mask
