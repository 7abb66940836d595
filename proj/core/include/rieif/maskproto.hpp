#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rieif/dataio.hpp"

namespace rieif::mask {

using data::MissingMask;
using data::StandardizedPanel;
using data::TimeRange;

/// Pearson correlation over pairs where neither value is flagged in `skip`.
/// Returns 0 when either retained series is constant; fewer than 2 pairs is an error.
double pearson_corr(std::span<const double> a, std::span<const double> b,
                    std::span<const std::uint8_t> skip_a = {}, std::span<const std::uint8_t> skip_b = {});

/// Nodes j != i_star with |corr(i_star, j)| >= rho over `fit`, ascending.
std::vector<std::size_t> select_proxies(const StandardizedPanel& panel, TimeRange fit, std::size_t i_star,
                                        double rho);

/// Row-major N x N Pearson correlations over `fit`, raw-missing cells dropped pairwise.
std::vector<double> correlation_matrix(const StandardizedPanel& panel, TimeRange fit);

struct MaskSet {
  MissingMask m;
  std::size_t target = 0;
  std::vector<std::size_t> proxies;
  TimeRange block;
  double rho = 0.0;
  std::uint64_t seed = 0;

  /// {target} U proxies, ascending.
  std::vector<std::size_t> masked_nodes() const;
  bool operator==(const MaskSet&) const = default;
};

/// Masks {i_star} U proxies over a block of `block_len` placed uniformly inside `range`.
MaskSet sample_blind_spot_mask(std::size_t nodes, std::size_t steps, std::size_t i_star,
                               const std::vector<std::size_t>& proxies, double rho, TimeRange range,
                               std::size_t block_len, std::uint64_t seed);

/// Convenience: proxies from the training split, then the block.
MaskSet sample_blind_spot_mask(const StandardizedPanel& panel, TimeRange train, std::size_t i_star, double rho,
                               TimeRange range, std::size_t block_len, std::uint64_t seed);

/// Model-facing values: 0 where `m` (or raw-missing) is set, ground truth elsewhere.
class MaskedView {
 public:
  MaskedView(const StandardizedPanel& panel, const MissingMask& m);
  double model(std::size_t i, std::size_t t) const;
  double truth(std::size_t i, std::size_t t) const { return panel_->at(i, t); }
  bool hidden(std::size_t i, std::size_t t) const;

 private:
  const StandardizedPanel* panel_;
  const MissingMask* m_;
};

MaskedView apply_mask(const StandardizedPanel& panel, const MissingMask& m);

using Index = std::pair<std::size_t, std::size_t>;  // (node, time)

/// Sorted (node, time) pairs with m = 1. Raw-missing cells are left out unless
/// `include_raw_missing`.
std::vector<Index> target_index_set(const MissingMask& m, const MissingMask* raw_missing = nullptr,
                                    bool include_raw_missing = false);

/// CSV of node,t rows plus a JSON header for exact reproduction.
void export_mask(const MaskSet& ms, const std::vector<std::string>& names, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path);
MaskSet import_mask(const std::vector<std::string>& names, std::size_t steps, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path);

}  // namespace rieif::mask
