#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rdnet/model.hpp"

namespace rdnet {

using Edge = std::pair<FirmIndex, FirmIndex>;

/// Undirected simple graph on n firms. Immutable value: link edits return a
/// new network.
class Network {
 public:
  Network() = default;
  /// Throws std::invalid_argument on self-loops or out-of-range endpoints.
  Network(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const noexcept { return n_; }
  bool linked(FirmIndex i, FirmIndex j) const { return adj_[check(i) * n_ + check(j)] != 0; }
  std::size_t degree(FirmIndex i) const { return degree_[check(i)]; }
  std::span<const std::size_t> degrees() const noexcept { return degree_; }
  std::size_t edge_count() const noexcept { return edges_; }

  /// Sorted (i < j) edge list.
  std::vector<Edge> edges() const;

  Network with_link(FirmIndex i, FirmIndex j) const { return toggled(i, j, true); }
  Network without_link(FirmIndex i, FirmIndex j) const { return toggled(i, j, false); }

  bool operator==(const Network& o) const { return n_ == o.n_ && adj_ == o.adj_; }

 private:
  std::size_t check(FirmIndex i) const;
  Network toggled(FirmIndex i, FirmIndex j, bool present) const;

  std::size_t n_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<std::size_t> degree_;
};

std::size_t degree(const Network& net, FirmIndex i);

/// eta_i = (n - d_i) / (n + 1), one entry per firm.
std::vector<double> sparsity(const Network& net);

/// G[i][k] == G[j][k] for every k outside {i, j}.
bool symmetric_position(const Network& net, FirmIndex i, FirmIndex j);

Network complete(std::size_t n);
Network empty(std::size_t n);

/// Same-type firms fully linked, no cross-type links.
Network positive_assortative(std::span<const FirmType> types);

/// Each unordered pair linked independently with probability ell.
/// ell == 0 and ell == 1 return the exact empty and complete networks.
Network erdos_renyi(std::size_t n, double ell, std::uint64_t seed);

/// Uniform over edge sets with exactly m edges. Throws std::out_of_range when
/// m exceeds n(n-1)/2.
Network random_with_m_links(std::size_t n, std::size_t m, std::uint64_t seed);

/// Disjoint cliques on [0, a) and [a, a + b).
Network two_clique(std::size_t a, std::size_t b);

/// Index-addressable sequence of every labeled network on n nodes (2^(n(n-1)/2)
/// of them), optionally restricted to one canonical representative per orbit
/// of the label-preserving permutation group. Network k corresponds to edge
/// mask `mask(k)`, bit e set iff pair e (lexicographic i < j order) is linked.
class NetworkEnumeration {
 public:
  static constexpr std::size_t kMaxPairs = 28;

  /// Throws TooLarge when n(n-1)/2 > kMaxPairs.
  NetworkEnumeration(std::size_t n, std::span<const int> labels, bool dedup);

  std::size_t n() const noexcept { return n_; }
  std::uint64_t size() const noexcept { return dedup_ ? reps_.size() : (std::uint64_t{1} << pairs_.size()); }
  std::uint32_t mask(std::uint64_t k) const { return dedup_ ? reps_.at(k) : static_cast<std::uint32_t>(k); }
  Network at(std::uint64_t k) const { return from_mask(mask(k)); }
  Network from_mask(std::uint32_t mask) const;
  std::uint32_t to_mask(const Network& net) const;

  /// Smallest mask in the orbit of `mask` under label-preserving permutations.
  std::uint32_t canonical(std::uint32_t mask) const;

  /// Orbit sizes, aligned with the representatives (dedup only).
  std::uint64_t orbit_size(std::uint64_t k) const;

 private:
  std::size_t n_;
  bool dedup_;
  std::vector<Edge> pairs_;
  std::vector<std::vector<std::uint8_t>> pair_perms_;  // image of each pair index
  std::vector<std::uint32_t> reps_;
  std::vector<std::uint64_t> orbit_sizes_;
};

/// Plain (non-dedup) enumeration with a single label class.
NetworkEnumeration enumerate_networks(std::size_t n, bool dedup = false);
NetworkEnumeration enumerate_networks(std::span<const FirmType> types, bool dedup);

/// Edge-list text: one "i j" per line, 0-indexed, sorted. Node count travels
/// separately (it is not recoverable from isolated nodes).
void write_edge_list(std::ostream& os, const Network& net);
Network read_edge_list(std::istream& is, std::size_t n);

nlohmann::json edges_to_json(const Network& net);
Network network_from_json(std::size_t n, const nlohmann::json& pairs);

/// Compact "0-1;2-3" form used inside CSV cells.
std::string edge_string(const Network& net);

}  // namespace rdnet
