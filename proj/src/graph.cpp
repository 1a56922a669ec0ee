#include "rdnet/graph.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rdnet/error.hpp"
#include "rdnet/rng.hpp"

namespace rdnet {

Network::Network(std::size_t n, std::span<const Edge> edges)
    : n_(n), adj_(n * n, 0), degree_(n, 0) {
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) throw std::invalid_argument("edge endpoint out of range");
    if (i == j) throw std::invalid_argument("self-loops are not allowed");
    if (adj_[i * n + j]) continue;
    adj_[i * n + j] = adj_[j * n + i] = 1;
    ++degree_[i];
    ++degree_[j];
    ++edges_;
  }
}

std::size_t Network::check(FirmIndex i) const {
  if (i >= n_) throw std::out_of_range("firm index " + std::to_string(i) + " >= n = " + std::to_string(n_));
  return i;
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (adj_[i * n_ + j]) out.emplace_back(i, j);
  return out;
}

Network Network::toggled(FirmIndex i, FirmIndex j, bool present) const {
  check(i);
  check(j);
  if (i == j) throw std::invalid_argument("link endpoints must differ");
  Network out = *this;
  const bool now = adj_[i * n_ + j] != 0;
  if (now == present) return out;
  const std::uint8_t v = present ? 1 : 0;
  out.adj_[i * n_ + j] = out.adj_[j * n_ + i] = v;
  if (present) {
    ++out.degree_[i];
    ++out.degree_[j];
    ++out.edges_;
  } else {
    --out.degree_[i];
    --out.degree_[j];
    --out.edges_;
  }
  return out;
}

std::size_t degree(const Network& net, FirmIndex i) { return net.degree(i); }

std::vector<double> sparsity(const Network& net) {
  const double n = static_cast<double>(net.size());
  std::vector<double> eta(net.size());
  for (std::size_t i = 0; i < net.size(); ++i)
    eta[i] = (n - static_cast<double>(net.degree(i))) / (n + 1.0);
  return eta;
}

bool symmetric_position(const Network& net, FirmIndex i, FirmIndex j) {
  if (i == j) throw std::invalid_argument("symmetric_position requires i != j");
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (k == i || k == j) continue;
    if (net.linked(i, k) != net.linked(j, k)) return false;
  }
  return true;
}

Network complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Network(n, e);
}

Network empty(std::size_t n) { return Network(n, {}); }

Network positive_assortative(std::span<const FirmType> types) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < types.size(); ++i)
    for (std::size_t j = i + 1; j < types.size(); ++j)
      if (types[i] == types[j]) e.emplace_back(i, j);
  return Network(types.size(), e);
}

Network erdos_renyi(std::size_t n, double ell, std::uint64_t seed) {
  if (!(ell >= 0.0 && ell <= 1.0)) throw std::invalid_argument("ell must lie in [0, 1]");
  if (ell == 0.0) return empty(n);
  if (ell == 1.0) return complete(n);
  CounterRng rng(seed);
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < ell) e.emplace_back(i, j);
  return Network(n, e);
}

Network random_with_m_links(std::size_t n, std::size_t m, std::uint64_t seed) {
  const std::size_t total = n * (n - 1) / 2;
  if (m > total) throw std::out_of_range("m exceeds n(n-1)/2");
  std::vector<Edge> pairs;
  pairs.reserve(total);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  // Partial Fisher-Yates: the first m slots are a uniform m-subset.
  CounterRng rng(seed);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t r = k + static_cast<std::size_t>(rng.below(total - k));
    std::swap(pairs[k], pairs[r]);
  }
  return Network(n, std::span<const Edge>(pairs.data(), m));
}

Network two_clique(std::size_t a, std::size_t b) {
  if (a < 1 || b < 1) throw std::invalid_argument("two_clique sizes must be positive");
  std::vector<FirmType> t(a + b, FirmType::Low);
  std::fill_n(t.begin(), a, FirmType::High);
  return positive_assortative(t);
}

namespace {

void label_preserving_perms(std::span<const int> labels, std::vector<std::vector<std::size_t>>& out) {
  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < labels.size(); ++i) classes[labels[i]].push_back(i);
  std::vector<std::vector<std::size_t>> blocks;
  for (auto& [_, members] : classes) blocks.push_back(members);

  std::vector<std::size_t> perm(labels.size());
  std::iota(perm.begin(), perm.end(), 0);
  // Cartesian product of within-block permutations.
  auto recurse = [&](auto&& self, std::size_t b) -> void {
    if (b == blocks.size()) {
      out.push_back(perm);
      return;
    }
    std::vector<std::size_t> images = blocks[b];
    do {
      for (std::size_t k = 0; k < blocks[b].size(); ++k) perm[blocks[b][k]] = images[k];
      self(self, b + 1);
    } while (std::next_permutation(images.begin(), images.end()));
  };
  recurse(recurse, 0);
}

}  // namespace

NetworkEnumeration::NetworkEnumeration(std::size_t n, std::span<const int> labels, bool dedup)
    : n_(n), dedup_(dedup) {
  if (n * (n - 1) / 2 > kMaxPairs)
    throw TooLarge("enumeration over " + std::to_string(n * (n - 1) / 2) + " pairs exceeds the limit of " +
                   std::to_string(kMaxPairs));
  if (labels.size() != n) throw std::invalid_argument("label vector length must equal n");
  std::vector<std::vector<std::size_t>> index(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      index[i][j] = index[j][i] = pairs_.size();
      pairs_.emplace_back(i, j);
    }
  if (!dedup) return;

  std::vector<std::vector<std::size_t>> perms;
  label_preserving_perms(labels, perms);
  for (const auto& p : perms) {
    std::vector<std::uint8_t> img(pairs_.size());
    for (std::size_t e = 0; e < pairs_.size(); ++e)
      img[e] = static_cast<std::uint8_t>(index[p[pairs_[e].first]][p[pairs_[e].second]]);
    pair_perms_.push_back(std::move(img));
  }

  const std::uint64_t total = std::uint64_t{1} << pairs_.size();
  for (std::uint64_t m = 0; m < total; ++m) {
    const auto mask = static_cast<std::uint32_t>(m);
    bool rep = true;
    std::uint64_t stabilizer = 0;
    for (const auto& img : pair_perms_) {
      std::uint32_t image = 0;
      for (std::uint32_t bits = mask; bits; bits &= bits - 1)
        image |= std::uint32_t{1} << img[static_cast<std::size_t>(std::countr_zero(bits))];
      if (image < mask) {
        rep = false;
        break;
      }
      if (image == mask) ++stabilizer;
    }
    if (rep) {
      reps_.push_back(mask);
      orbit_sizes_.push_back(pair_perms_.size() / stabilizer);
    }
  }
}

Network NetworkEnumeration::from_mask(std::uint32_t mask) const {
  std::vector<Edge> e;
  for (std::size_t k = 0; k < pairs_.size(); ++k)
    if (mask >> k & 1u) e.push_back(pairs_[k]);
  return Network(n_, e);
}

std::uint32_t NetworkEnumeration::to_mask(const Network& net) const {
  if (net.size() != n_) throw std::invalid_argument("network size mismatch");
  std::uint32_t mask = 0;
  for (std::size_t k = 0; k < pairs_.size(); ++k)
    if (net.linked(pairs_[k].first, pairs_[k].second)) mask |= std::uint32_t{1} << k;
  return mask;
}

std::uint32_t NetworkEnumeration::canonical(std::uint32_t mask) const {
  if (!dedup_) return mask;
  std::uint32_t best = mask;
  for (const auto& img : pair_perms_) {
    std::uint32_t image = 0;
    for (std::uint32_t bits = mask; bits; bits &= bits - 1)
      image |= std::uint32_t{1} << img[static_cast<std::size_t>(std::countr_zero(bits))];
    best = std::min(best, image);
  }
  return best;
}

std::uint64_t NetworkEnumeration::orbit_size(std::uint64_t k) const {
  return dedup_ ? orbit_sizes_.at(k) : 1;
}

NetworkEnumeration enumerate_networks(std::size_t n, bool dedup) {
  std::vector<int> labels(n, 0);
  return NetworkEnumeration(n, labels, dedup);
}

NetworkEnumeration enumerate_networks(std::span<const FirmType> types, bool dedup) {
  std::vector<int> labels;
  for (auto t : types) labels.push_back(t == FirmType::High ? 0 : 1);
  return NetworkEnumeration(types.size(), labels, dedup);
}

void write_edge_list(std::ostream& os, const Network& net) {
  for (auto [i, j] : net.edges()) os << i << ' ' << j << '\n';
}

Network read_edge_list(std::istream& is, std::size_t n) {
  std::vector<Edge> e;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
      continue;
    std::istringstream ls(line);
    long long i = -1, j = -1;
    if (!(ls >> i >> j) || i < 0 || j < 0)
      throw std::invalid_argument("bad edge on line " + std::to_string(lineno));
    e.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return Network(n, e);
}

nlohmann::json edges_to_json(const Network& net) {
  auto arr = nlohmann::json::array();
  for (auto [i, j] : net.edges()) arr.push_back({i, j});
  return arr;
}

Network network_from_json(std::size_t n, const nlohmann::json& pairs) {
  if (!pairs.is_array()) throw std::invalid_argument("edge list must be a JSON array");
  std::vector<Edge> e;
  for (const auto& p : pairs) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() || !p[1].is_number_unsigned())
      throw std::invalid_argument("edge must be a pair of non-negative integers");
    e.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
  }
  return Network(n, e);
}

std::string edge_string(const Network& net) {
  std::string s;
  for (auto [i, j] : net.edges()) {
    if (!s.empty()) s += ';';
    s += std::to_string(i) + '-' + std::to_string(j);
  }
  return s;
}

}  // namespace rdnet
