#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "json.hpp"
#include "rdnet/equilibrium.hpp"
#include "rdnet/graph.hpp"
#include "rdnet/model.hpp"

namespace rdnet {

/// Absolute band on profit comparisons; differences within it count as indifference.
inline constexpr double kStabilityTol = 1e-10;

/// Profit change of both endpoints from having the link rather than not:
/// delta = pi(G + ij) - pi(G - ij).
struct DeviationDelta {
  Edge pair;
  bool present = false;  // link state in the source network
  double delta_i = 0.0;
  double delta_j = 0.0;
};

DeviationDelta link_deviation(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                              FirmIndex i, FirmIndex j);

enum class BlockReason { SeverGainI, SeverGainJ, MutualAddGain };
const char* to_string(BlockReason r) noexcept;

struct BlockingPair {
  Edge pair;
  BlockReason reason;
};

struct StabilityReport {
  Network network;
  bool stable = true;
  std::vector<BlockingPair> blocking;
  std::vector<DeviationDelta> deltas;  // every pair that was evaluated
};

struct StabilityOptions {
  double tol = kStabilityTol;
  /// Stop at the first blocking pair.
  bool stop_at_first = false;
  /// Evaluate one pair per class of firm labels when the network is invariant
  /// under label-preserving permutations (exact; falls back to all pairs otherwise).
  bool use_symmetry = false;
};

StabilityReport is_pairwise_stable(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                                   const StabilityOptions& opts = {});

/// Firms with bitwise-equal productivity share a label.
std::vector<int> productivity_labels(const ProductivityProfile& profile);

struct EnumeratedVerdict {
  std::uint64_t network_id = 0;
  std::uint32_t mask = 0;
  std::uint64_t orbit_size = 1;
  bool stable = false;
  std::size_t n_blocking = 0;  // a lower bound when short-circuiting
};

struct EnumerateOptions {
  bool dedup = false;
  bool stop_at_first = true;
  double tol = kStabilityTol;
  unsigned threads = 1;
};

/// Streams verdicts for every network in `space` to `sink` in index order.
void for_each_verdict(const NetworkEnumeration& space, const ProductivityProfile& profile,
                      const MarketParams& params, const EnumerateOptions& opts,
                      const std::function<void(const EnumeratedVerdict&)>& sink);

struct Enumeration {
  NetworkEnumeration space;
  std::vector<EnumeratedVerdict> verdicts;

  std::vector<EnumeratedVerdict> stable_set() const;
};

/// Throws TooLarge when n(n-1)/2 exceeds the enumeration guard.
Enumeration enumerate_stable(std::size_t n, const ProductivityProfile& profile, const MarketParams& params,
                             const EnumerateOptions& opts = {});

void write_enumeration_csv(std::ostream& os, const NetworkEnumeration& space,
                           const std::vector<EnumeratedVerdict>& verdicts);

enum class Structure { Complete, PositiveAssortative, Fixed };

struct RegionSpec {
  Structure structure = Structure::Complete;
  std::optional<Network> fixed;  // Structure::Fixed only
  std::size_t n = 4;
  double rho = 0.5;
  double alpha = 2.0;
  double c_bar = 1.0;
  std::vector<double> theta_grid;  // theta_low values
  std::vector<double> phi_grid;    // phi, or phi / n when phi_per_n
  bool phi_per_n = false;
  double tol = kStabilityTol;
  unsigned threads = 1;
};

struct StabilityRegion {
  std::vector<double> theta_grid;
  std::vector<double> phi_grid;
  bool phi_per_n = false;
  std::vector<std::uint8_t> mask;  // theta-major

  bool stable(std::size_t t, std::size_t p) const { return mask.at(t * phi_grid.size() + p) != 0; }
  /// Smallest / largest stable theta at phi column p, if any.
  std::optional<double> theta_min(std::size_t p) const;
  std::optional<double> theta_max(std::size_t p) const;
  bool empty() const;
};

Network structure_network(Structure s, const TwoTypeConfig& config, const std::optional<Network>& fixed = {});

/// Throws std::invalid_argument on empty or non-increasing grids.
StabilityRegion stability_region(const RegionSpec& spec);

void write_region_csv(std::ostream& os, const StabilityRegion& region);

/// R = pi_i(G^C - ij) / pi_i(G^C) from the closed forms. R > 1 means firm i
/// prefers to sever its link with j.
double complete_deviation_ratio(const ProductivityProfile& profile, const MarketParams& params, FirmIndex i,
                                FirmIndex j);

inline constexpr double kThresholdTol = 1e-8;
inline constexpr double kBracketEps = 1e-6;

/// theta_j at which R crosses 1, bisected on [eps, theta_i - eps] with all
/// other productivities held fixed. Throws BracketFailure when R - 1 has no
/// sign change there.
double severance_threshold(const ProductivityProfile& profile, const MarketParams& params, FirmIndex i, FirmIndex j,
                           double tol = kThresholdTol);

struct CompleteThresholds {
  double theta_star = 0.0;
  double theta_star_star = 0.0;
  /// theta*_j for firms in descending-productivity order, skipping the top firm.
  std::vector<double> per_firm;
  std::vector<FirmIndex> order;
};

CompleteThresholds complete_thresholds(const ProductivityProfile& profile, const MarketParams& params);

nlohmann::json to_json(const DeviationDelta& d);
nlohmann::json to_json(const StabilityReport& r);

}  // namespace rdnet
