#include "rdnet/stability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rdnet/error.hpp"
#include "rdnet/parallel.hpp"

namespace rdnet {

namespace {

Eigen::VectorXd profits(const Network& net, const ProductivityProfile& profile, const MarketParams& params) {
  return equilibrium(net, profile, params).profits;
}

bool blocks(const DeviationDelta& d, double tol, BlockReason& why) {
  if (d.present) {
    if (d.delta_i < -tol) {
      why = BlockReason::SeverGainI;
      return true;
    }
    if (d.delta_j < -tol) {
      why = BlockReason::SeverGainJ;
      return true;
    }
    return false;
  }
  const bool gain = (d.delta_i > tol && d.delta_j >= -tol) || (d.delta_j > tol && d.delta_i >= -tol);
  if (gain) why = BlockReason::MutualAddGain;
  return gain;
}

// One pair per unordered label class, provided linked(i, j) depends only on
// the labels of i and j. Empty when the network lacks that symmetry.
std::vector<Edge> representative_pairs(const Network& net, std::span<const int> labels) {
  std::map<std::pair<int, int>, std::pair<Edge, bool>> classes;
  const std::size_t n = net.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto key = std::minmax(labels[i], labels[j]);
      const bool l = net.linked(i, j);
      auto [it, fresh] = classes.try_emplace(key, Edge{i, j}, l);
      if (!fresh && it->second.second != l) return {};
    }
  std::vector<Edge> out;
  for (auto& [_, v] : classes) out.push_back(v.first);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> all_pairs(std::size_t n) {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

void check_grid(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t k = 1; k < g.size(); ++k)
    if (!(g[k] > g[k - 1])) throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
}

// pi_i = (phi / (theta_i eta_i)^2 - 1) phi e_i^2
double profit_from_effort(double phi, double theta, double eta, double e) {
  const double te = theta * eta;
  return (phi / (te * te) - 1.0) * phi * e * e;
}

}  // namespace

const char* to_string(BlockReason r) noexcept {
  switch (r) {
    case BlockReason::SeverGainI: return "SeverGain_i";
    case BlockReason::SeverGainJ: return "SeverGain_j";
    case BlockReason::MutualAddGain: return "MutualAddGain";
  }
  return "Unknown";
}

DeviationDelta link_deviation(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                              FirmIndex i, FirmIndex j) {
  if (i == j) throw std::invalid_argument("link_deviation requires i != j");
  DeviationDelta d;
  d.pair = {i, j};
  d.present = net.linked(i, j);
  const Eigen::VectorXd with = profits(net.with_link(i, j), profile, params);
  const Eigen::VectorXd without = profits(net.without_link(i, j), profile, params);
  const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
  d.delta_i = with[ii] - without[ii];
  d.delta_j = with[jj] - without[jj];
  return d;
}

StabilityReport is_pairwise_stable(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                                   const StabilityOptions& opts) {
  StabilityReport report;
  report.network = net;
  const Eigen::VectorXd base = profits(net, profile, params);

  std::vector<Edge> pairs;
  if (opts.use_symmetry) pairs = representative_pairs(net, productivity_labels(profile));
  if (pairs.empty()) pairs = all_pairs(net.size());

  for (auto [i, j] : pairs) {
    DeviationDelta d;
    d.pair = {i, j};
    d.present = net.linked(i, j);
    const Network other = d.present ? net.without_link(i, j) : net.with_link(i, j);
    const Eigen::VectorXd alt = profits(other, profile, params);
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    const double sign = d.present ? 1.0 : -1.0;
    d.delta_i = sign * (base[ii] - alt[ii]);
    d.delta_j = sign * (base[jj] - alt[jj]);
    report.deltas.push_back(d);

    BlockReason why;
    if (blocks(d, opts.tol, why)) {
      report.blocking.push_back({d.pair, why});
      report.stable = false;
      if (opts.stop_at_first) break;
    }
  }
  return report;
}

std::vector<int> productivity_labels(const ProductivityProfile& profile) {
  std::vector<int> labels(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    labels[i] = static_cast<int>(i);
    for (std::size_t k = 0; k < i; ++k)
      if (profile[k] == profile[i]) {
        labels[i] = labels[k];
        break;
      }
  }
  return labels;
}

void for_each_verdict(const NetworkEnumeration& space, const ProductivityProfile& profile,
                      const MarketParams& params, const EnumerateOptions& opts,
                      const std::function<void(const EnumeratedVerdict&)>& sink) {
  if (space.n() != profile.size()) throw std::invalid_argument("profile size does not match the enumeration");
  constexpr std::uint64_t kChunk = 1 << 14;
  const std::uint64_t total = space.size();
  std::vector<EnumeratedVerdict> buf;
  StabilityOptions so;
  so.tol = opts.tol;
  so.stop_at_first = opts.stop_at_first;
  for (std::uint64_t start = 0; start < total; start += kChunk) {
    const std::uint64_t len = std::min(kChunk, total - start);
    buf.assign(len, {});
    parallel_for(len, opts.threads, [&](std::size_t k) {
      const std::uint64_t id = start + k;
      EnumeratedVerdict& v = buf[k];
      v.network_id = id;
      v.mask = space.mask(id);
      v.orbit_size = space.orbit_size(id);
      const StabilityReport r = is_pairwise_stable(space.from_mask(v.mask), profile, params, so);
      v.stable = r.stable;
      v.n_blocking = r.blocking.size();
    });
    for (const auto& v : buf) sink(v);
  }
}

std::vector<EnumeratedVerdict> Enumeration::stable_set() const {
  std::vector<EnumeratedVerdict> out;
  std::copy_if(verdicts.begin(), verdicts.end(), std::back_inserter(out), [](const auto& v) { return v.stable; });
  return out;
}

Enumeration enumerate_stable(std::size_t n, const ProductivityProfile& profile, const MarketParams& params,
                             const EnumerateOptions& opts) {
  if (n != profile.size()) throw std::invalid_argument("n does not match the profile size");
  const std::vector<int> labels = productivity_labels(profile);
  Enumeration out{NetworkEnumeration(n, labels, opts.dedup), {}};
  out.verdicts.reserve(out.space.size());
  for_each_verdict(out.space, profile, params, opts, [&](const EnumeratedVerdict& v) { out.verdicts.push_back(v); });
  return out;
}

void write_enumeration_csv(std::ostream& os, const NetworkEnumeration& space,
                           const std::vector<EnumeratedVerdict>& verdicts) {
  os << "network_id,edge_list,stable,n_blocking\n";
  for (const auto& v : verdicts)
    os << v.network_id << ',' << edge_string(space.from_mask(v.mask)) << ',' << (v.stable ? 1 : 0) << ','
       << v.n_blocking << '\n';
}

std::optional<double> StabilityRegion::theta_min(std::size_t p) const {
  for (std::size_t t = 0; t < theta_grid.size(); ++t)
    if (stable(t, p)) return theta_grid[t];
  return std::nullopt;
}

std::optional<double> StabilityRegion::theta_max(std::size_t p) const {
  for (std::size_t t = theta_grid.size(); t-- > 0;)
    if (stable(t, p)) return theta_grid[t];
  return std::nullopt;
}

bool StabilityRegion::empty() const {
  return std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
}

Network structure_network(Structure s, const TwoTypeConfig& config, const std::optional<Network>& fixed) {
  switch (s) {
    case Structure::Complete: return complete(config.n);
    case Structure::PositiveAssortative: return positive_assortative(config.types());
    case Structure::Fixed:
      if (!fixed || fixed->size() != config.n)
        throw std::invalid_argument("fixed structure missing or of the wrong size");
      return *fixed;
  }
  throw std::invalid_argument("unknown structure");
}

StabilityRegion stability_region(const RegionSpec& spec) {
  check_grid(spec.theta_grid, "theta");
  check_grid(spec.phi_grid, "phi");
  TwoTypeConfig base{spec.n, spec.rho, spec.theta_grid.front()};
  base.n_high();  // validates rho n
  const Network net = structure_network(spec.structure, base, spec.fixed);

  StabilityRegion region;
  region.theta_grid = spec.theta_grid;
  region.phi_grid = spec.phi_grid;
  region.phi_per_n = spec.phi_per_n;
  const std::size_t np = spec.phi_grid.size();
  region.mask.assign(spec.theta_grid.size() * np, 0);

  StabilityOptions so;
  so.tol = spec.tol;
  so.stop_at_first = true;
  so.use_symmetry = true;
  parallel_for(region.mask.size(), spec.threads, [&](std::size_t k) {
    const std::size_t t = k / np, p = k % np;
    TwoTypeConfig cfg = base;
    cfg.theta_low = spec.theta_grid[t];
    MarketParams params{spec.alpha, spec.c_bar, spec.phi_grid[p]};
    if (spec.phi_per_n) params.phi *= static_cast<double>(spec.n);
    region.mask[k] = is_pairwise_stable(net, cfg.profile(), params, so).stable ? 1 : 0;
  });
  return region;
}

void write_region_csv(std::ostream& os, const StabilityRegion& region) {
  os.precision(17);
  os << "theta,phi,stable\n";
  for (std::size_t t = 0; t < region.theta_grid.size(); ++t)
    for (std::size_t p = 0; p < region.phi_grid.size(); ++p)
      os << region.theta_grid[t] << ',' << region.phi_grid[p] << ',' << (region.stable(t, p) ? 1 : 0) << '\n';
}

double complete_deviation_ratio(const ProductivityProfile& profile, const MarketParams& params, FirmIndex i,
                                FirmIndex j) {
  const std::size_t n = profile.size();
  if (i >= n || j >= n) throw std::out_of_range("firm index out of range");
  if (i == j) throw std::invalid_argument("complete_deviation_ratio requires i != j");
  const double np1 = static_cast<double>(n + 1);
  const auto ii = static_cast<Eigen::Index>(i);
  const double e_c = closed_form_complete(profile, params)[ii];
  const double e_cut = closed_form_complete_minus_link(profile, params, i, j)[ii];
  const double ti = profile[i];
  return profit_from_effort(params.phi, ti, 2.0 / np1, e_cut) / profit_from_effort(params.phi, ti, 1.0 / np1, e_c);
}

double severance_threshold(const ProductivityProfile& profile, const MarketParams& params, FirmIndex i, FirmIndex j,
                           double tol) {
  const double ti = profile.at(i);
  profile.at(j);
  auto f = [&](double tj) { return complete_deviation_ratio(profile.with(j, tj), params, i, j) - 1.0; };
  double lo = kBracketEps, hi = ti - kBracketEps;
  if (!(hi > lo)) throw BracketFailure("theta_i too small to bracket a threshold");
  const double flo = f(lo), fhi = f(hi);
  if (!(flo > 0.0 && fhi < 0.0))
    throw BracketFailure("R - 1 has no sign change on [eps, theta_i - eps] (" + std::to_string(flo) + ", " +
                         std::to_string(fhi) + ")");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

CompleteThresholds complete_thresholds(const ProductivityProfile& profile, const MarketParams& params) {
  const std::size_t n = profile.size();
  CompleteThresholds out;
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), FirmIndex{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](FirmIndex a, FirmIndex b) { return profile[a] > profile[b]; });
  for (std::size_t pj = 1; pj < n; ++pj) {
    double best = -1.0;
    for (std::size_t pi = 0; pi < pj; ++pi)
      best = std::max(best, severance_threshold(profile, params, out.order[pi], out.order[pj]));
    out.per_firm.push_back(best);
  }
  if (out.per_firm.empty()) throw std::invalid_argument("complete_thresholds requires at least two firms");
  out.theta_star = *std::min_element(out.per_firm.begin(), out.per_firm.end());
  out.theta_star_star = *std::max_element(out.per_firm.begin(), out.per_firm.end());
  return out;
}

nlohmann::json to_json(const DeviationDelta& d) {
  return {{"pair", {d.pair.first, d.pair.second}},
          {"present", d.present},
          {"delta_i", d.delta_i},
          {"delta_j", d.delta_j}};
}

nlohmann::json to_json(const StabilityReport& r) {
  auto blocking = nlohmann::json::array();
  for (const auto& b : r.blocking)
    blocking.push_back({{"pair", {b.pair.first, b.pair.second}}, {"reason", to_string(b.reason)}});
  auto deltas = nlohmann::json::array();
  for (const auto& d : r.deltas) deltas.push_back(to_json(d));
  return {{"n", r.network.size()},
          {"edges", edges_to_json(r.network)},
          {"stable", r.stable},
          {"blocking", blocking},
          {"deltas", deltas}};
}

}  // namespace rdnet
