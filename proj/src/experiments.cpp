#include "rdnet/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "rdnet/equilibrium.hpp"
#include "rdnet/error.hpp"
#include "rdnet/graph.hpp"
#include "rdnet/parallel.hpp"
#include "rdnet/rng.hpp"
#include "rdnet/stability.hpp"

namespace rdnet {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Table::Table(std::string name, std::string experiment, std::uint64_t seed, std::vector<std::string> columns)
    : name_(std::move(name)), experiment_(std::move(experiment)), seed_(std::to_string(seed)) {
  columns_ = {"experiment", "seed"};
  columns_.insert(columns_.end(), columns.begin(), columns.end());
}

void Table::add(std::initializer_list<Cell> cells) {
  if (cells.size() + 2 != columns_.size())
    throw std::invalid_argument("table " + name_ + ": expected " + std::to_string(columns_.size() - 2) +
                                " cells, got " + std::to_string(cells.size()));
  std::vector<std::string> row{experiment_, seed_};
  for (const auto& c : cells) row.push_back(c.text);
  rows_.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
    os << '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns_.size(); ++k)
    if (columns_[k] == name) return k;
  throw std::out_of_range("no column " + name + " in table " + name_);
}

double Table::number(std::size_t row, const std::string& col) const {
  const std::string& s = rows_.at(row).at(column(col));
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

const Table& SweepResult::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name() == name) return t;
  throw std::out_of_range("no table " + name);
}

std::vector<double> percent_grid(int lo, int hi) {
  std::vector<double> g;
  for (int k = lo; k <= hi; ++k) g.push_back(k / 100.0);
  return g;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (points < 2) return {lo};
  std::vector<double> g(points);
  const double ratio = std::log(hi / lo);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace {

constexpr double kMarkupAlpha = 2.0;
constexpr double kMarkupCbar = 1.0;

MarketParams params_at(double phi) { return {kMarkupAlpha, kMarkupCbar, phi}; }

std::vector<double> grid_or(const std::vector<double>& given, std::vector<double> fallback, const char* name) {
  std::vector<double> g = given.empty() ? std::move(fallback) : given;
  if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t k = 1; k < g.size(); ++k)
    if (!(g[k] > g[k - 1])) throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
  return g;
}

int reps_or(const SweepSpec& spec, int fallback) {
  if (spec.replications < 0) throw std::invalid_argument("replications must be at least 1");
  return spec.replications > 0 ? spec.replications : fallback;
}

std::size_t n_or(const SweepSpec& spec, std::size_t fallback) {
  if (spec.n_grid.size() > 1) throw std::invalid_argument("this experiment takes a single n");
  const std::size_t n = spec.n_grid.empty() ? fallback : spec.n_grid.front();
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  return n;
}

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

// Unbiased (n - 1) standard deviation; two-pass for stability.
Stats summarize(const double* x, std::size_t count, std::size_t stride = 1) {
  Stats s;
  for (std::size_t k = 0; k < count; ++k) s.mean += x[k * stride];
  s.mean /= static_cast<double>(count);
  if (count < 2) {
    s.sd = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double d = x[k * stride] - s.mean;
    ss += d * d;
  }
  s.sd = std::sqrt(ss / static_cast<double>(count - 1));
  return s;
}

json base_manifest(const std::string& id, const std::string& title, const SweepSpec& spec, int reps) {
  json m;
  m["experiment"] = id;
  m["title"] = title;
  m["rng"] = std::string(kRngName);
  m["base_seed"] = spec.base_seed;
  m["replications"] = reps;
  m["seeding"] = "replication r of cell c draws from CounterRng(derive_seed(base_seed, c, r))";
  m["defaults"] = {{"alpha", kMarkupAlpha}, {"c_bar", kMarkupCbar}, {"markup", kMarkupAlpha - kMarkupCbar},
                   {"phi", "phi_lower_bound(n) unless a phi grid is given"}, {"default_seed", kDefaultSeed}};
  m["tolerances"] = {{"solve_residual_relative", kResidualTol}, {"effort_floor", kEffortFloor},
                     {"pivot_relative", kPivotTol}, {"profit_cross_check_relative", kProfitCrossCheckTol},
                     {"stability_absolute", kStabilityTol}, {"threshold_bisection", kThresholdTol}};
  m["tables"] = json::object();
  m["column_descriptions"] = {{"experiment", "experiment id"}, {"seed", "base seed of the run"}};
  return m;
}

std::string table_file(const std::string& id, const std::string& table, bool primary) {
  return primary ? id + ".csv" : id + "_" + table + ".csv";
}

// The first table described is the experiment's primary long-format output.
// Column descriptions are pooled per experiment, since tables share columns.
void describe(json& manifest, const Table& t, const json& descriptions) {
  const bool primary = manifest["tables"].empty();
  manifest["tables"][t.name()] = {{"file", table_file(manifest["experiment"].get<std::string>(), t.name(), primary)},
                                  {"primary", primary},
                                  {"columns", t.columns()}};
  for (const auto& [k, v] : descriptions.items()) manifest["column_descriptions"][k] = v;
}

bool stable_fast(const Network& net, const ProductivityProfile& th, const MarketParams& p) {
  StabilityOptions o;
  o.stop_at_first = true;
  o.use_symmetry = true;
  return is_pairwise_stable(net, th, p, o).stable;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

double draw_theta(CounterRng& rng, double a, double b) {
  // Beta(a, b) can land below the smallest admissible productivity; redraw.
  for (;;) {
    const double x = rng.beta(a, b);
    if (x >= kMinTheta) return x;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// fig1

SweepResult exp_link_sustainability(const SweepSpec& spec) {
  const std::string id = "fig1";
  const std::size_t n = n_or(spec, 20);
  const int reps = reps_or(spec, 200);
  const std::vector<std::pair<double, double>> dists{{0.5, 0.5}, {1.0, 1.0}, {2.0, 2.0}};
  const auto ells = grid_or(spec.ell_grid, {0.0, 0.25, 0.5, 0.75, 1.0}, "ell");
  const auto theta_is = grid_or(spec.theta_grid, {0.25, 0.5, 0.75}, "theta_i");
  const double phi = spec.phi_grid.empty() ? phi_lower_bound(n) : spec.phi_grid.front();
  const MarketParams params = params_at(phi);

  // theta_j runs over 0.01, 0.02, ... below theta_i, then theta_i itself.
  std::vector<std::vector<double>> tj_grid;
  std::size_t points = 0;
  for (double ti : theta_is) {
    std::vector<double> g;
    for (int k = 1; k / 100.0 < ti - 1e-12; ++k) g.push_back(k / 100.0);
    g.push_back(ti);
    points += g.size();
    tj_grid.push_back(std::move(g));
  }

  const std::size_t nd = dists.size(), nl = ells.size(), nr = static_cast<std::size_t>(reps);
  // slot layout: [dist][ell][rep][point][firm i/j]
  std::vector<double> out(nd * nl * nr * points * 2);
  parallel_for(nd * nl * nr, spec.threads, [&](std::size_t task) {
    const std::size_t d = task / (nl * nr), l = task / nr % nl, r = task % nr;
    CounterRng amb(derive_seed(spec.base_seed, 100 + d, r));
    std::vector<double> th(n);
    for (auto& t : th) t = draw_theta(amb, dists[d].first, dists[d].second);
    const Network net = erdos_renyi(n, ells[l], derive_seed(spec.base_seed, 200 + l, r));
    const Network plus = net.with_link(0, 1), minus = net.without_link(0, 1);
    double* slot = &out[task * points * 2];
    for (std::size_t a = 0; a < theta_is.size(); ++a)
      for (double tj : tj_grid[a]) {
        th[0] = theta_is[a];
        th[1] = tj;
        const ProductivityProfile prof(th);
        const auto pp = equilibrium(plus, prof, params).profits;
        const auto pm = equilibrium(minus, prof, params).profits;
        *slot++ = 100.0 * (pp[0] - pm[0]) / pm[0];
        *slot++ = 100.0 * (pp[1] - pm[1]) / pm[1];
      }
  });

  SweepResult res;
  Table agg("summary", id, spec.base_seed,
            {"beta_a", "beta_b", "ell", "theta_i", "theta_j", "n_reps", "pct_change_i", "pct_change_j", "sd_i",
             "sd_j"});
  Table raw("raw", id, spec.base_seed,
            {"beta_a", "beta_b", "ell", "theta_i", "theta_j", "rep", "pct_change_i", "pct_change_j"});
  for (std::size_t d = 0; d < nd; ++d)
    for (std::size_t l = 0; l < nl; ++l) {
      std::size_t pt = 0;
      for (std::size_t a = 0; a < theta_is.size(); ++a)
        for (double tj : tj_grid[a]) {
          const double* base = &out[((d * nl + l) * nr) * points * 2 + pt * 2];
          const std::size_t stride = points * 2;
          const Stats si = summarize(base, nr, stride), sj = summarize(base + 1, nr, stride);
          agg.add({dists[d].first, dists[d].second, ells[l], theta_is[a], tj, reps, si.mean, sj.mean, si.sd, sj.sd});
          if (spec.raw)
            for (std::size_t r = 0; r < nr; ++r)
              raw.add({dists[d].first, dists[d].second, ells[l], theta_is[a], tj, static_cast<int>(r),
                       base[r * stride], base[r * stride + 1]});
          ++pt;
        }
    }

  res.manifest = base_manifest(id, "Profit change from adding a link in Erdos-Renyi networks", spec, reps);
  res.manifest["parameters"] = {{"n", n},
                                {"phi", phi},
                                {"beta_params", dists},
                                {"ell", ells},
                                {"theta_i", theta_is},
                                {"theta_j_grid", "0.01 steps below theta_i, then theta_i"},
                                {"focal_pair", {0, 1}},
                                {"ambient_cell", "100 + beta index; one draw of all n thetas per replication"},
                                {"network_cell", "200 + ell index"},
                                {"theta_floor", "Beta draws below 1e-6 are redrawn"}};
  const json desc = {{"beta_a", "Beta shape a of the ambient productivity draw"},
                     {"beta_b", "Beta shape b"},
                     {"ell", "Erdos-Renyi link probability"},
                     {"theta_i", "productivity of focal firm i (firm 0)"},
                     {"theta_j", "productivity of partner j (firm 1)"},
                     {"n_reps", "replications averaged"},
                     {"rep", "replication index"},
                     {"pct_change_i", "100 * (pi_i(G+ij) - pi_i(G-ij)) / pi_i(G-ij)"},
                     {"pct_change_j", "same for firm j"},
                     {"sd_i", "sample sd of pct_change_i"},
                     {"sd_j", "sample sd of pct_change_j"}};
  describe(res.manifest, agg, desc);
  res.tables.push_back(std::move(agg));
  if (spec.raw) {
    describe(res.manifest, raw, desc);
    res.tables.push_back(std::move(raw));
  }
  return res;
}

// ---------------------------------------------------------------------------
// fig2

SweepResult exp_n4_stability_domains(const SweepSpec& spec) {
  const std::string id = "fig2";
  const std::size_t n = 4;
  const double rho = 0.5;
  const double lb = phi_lower_bound(n);
  const auto thetas = grid_or(spec.theta_grid, percent_grid(1, 99), "theta");
  const auto phis = grid_or(spec.phi_grid, log_grid(lb, 10.0 * lb, 101), "phi");
  const TwoTypeConfig cfg{n, rho, thetas.front()};
  const std::vector<int> labels{0, 0, 1, 1};
  const NetworkEnumeration space(n, labels, true);

  const auto c_mask = space.canonical(space.to_mask(complete(n)));
  const auto pa_mask = space.canonical(space.to_mask(positive_assortative(cfg.types())));
  const std::vector<Edge> one_h{{0, 1}, {2, 3}, {0, 2}, {0, 3}};
  const auto oh_mask = space.canonical(space.to_mask(Network(n, one_h)));
  auto label = [&](std::uint32_t m) -> std::string {
    if (m == c_mask) return "complete";
    if (m == pa_mask) return "pa";
    if (m == oh_mask) return "one_h_connected";
    return "other";
  };

  std::vector<StabilityRegion> regions;
  for (std::uint64_t k = 0; k < space.size(); ++k) {
    RegionSpec rs;
    rs.structure = Structure::Fixed;
    rs.fixed = space.at(k);
    rs.n = n;
    rs.rho = rho;
    rs.alpha = kMarkupAlpha;
    rs.c_bar = kMarkupCbar;
    rs.theta_grid = thetas;
    rs.phi_grid = phis;
    rs.threads = spec.threads;
    regions.push_back(stability_region(rs));
  }

  SweepResult res;
  Table cells("regions", id, spec.base_seed, {"class_id", "structure", "edge_list", "theta", "phi", "stable"});
  Table classes("classes", id, spec.base_seed,
                {"class_id", "structure", "edge_list", "orbit_size", "stable_cells", "nonempty"});
  Table bounds("thresholds", id, spec.base_seed, {"phi", "theta_lower_complete", "theta_upper_pa"});
  std::optional<std::size_t> ci, pi;
  for (std::uint64_t k = 0; k < space.size(); ++k) {
    const auto& r = regions[k];
    const std::string name = label(space.mask(k));
    const std::string edges = edge_string(space.at(k));
    if (name == "complete") ci = k;
    if (name == "pa") pi = k;
    const auto count = static_cast<unsigned long>(std::count(r.mask.begin(), r.mask.end(), 1));
    classes.add({static_cast<unsigned long>(k), name, edges, static_cast<unsigned long>(space.orbit_size(k)), count,
                 !r.empty()});
    for (std::size_t t = 0; t < thetas.size(); ++t)
      for (std::size_t p = 0; p < phis.size(); ++p)
        cells.add({static_cast<unsigned long>(k), name, edges, thetas[t], phis[p], r.stable(t, p)});
  }
  for (std::size_t p = 0; p < phis.size(); ++p)
    bounds.add({phis[p], opt_cell(regions[*ci].theta_min(p)), opt_cell(regions[*pi].theta_max(p))});

  res.manifest = base_manifest(id, "Pairwise stability domains, n = 4, two high and two low firms", spec, 1);
  res.manifest["parameters"] = {{"n", n},        {"rho", rho},   {"theta_grid", thetas}, {"phi_grid", phis},
                                {"dedup", true}, {"classes", space.size()}};
  describe(res.manifest, cells,
           {{"class_id", "index of the structure class (type-preserving isomorphism)"},
            {"structure", "complete, pa, one_h_connected, or other"},
            {"edge_list", "canonical representative, i-j pairs separated by ';'"},
            {"theta", "low-type productivity"},
            {"phi", "R&D cost coefficient"},
            {"stable", "1 if pairwise stable"}});
  describe(res.manifest, classes,
           {{"orbit_size", "labeled networks in the class"},
            {"stable_cells", "grid cells where the class is stable"},
            {"nonempty", "1 if stable somewhere on the grid"}});
  describe(res.manifest, bounds,
           {{"theta_lower_complete", "smallest theta where the complete network is stable"},
            {"theta_upper_pa", "largest theta where the PA network is stable"}});
  res.tables.push_back(std::move(cells));
  res.tables.push_back(std::move(classes));
  res.tables.push_back(std::move(bounds));
  return res;
}

// ---------------------------------------------------------------------------
// fig3

SweepResult exp_n6_welfare_effort_profit(const SweepSpec& spec) {
  const std::string id = "fig3";
  const std::size_t n = 6;
  const double rho = 0.5;
  const auto thetas = grid_or(spec.theta_grid, percent_grid(1, 99), "theta");
  const double phi = spec.phi_grid.empty() ? phi_lower_bound(n) : spec.phi_grid.front();
  const MarketParams params = params_at(phi);
  const TwoTypeConfig cfg{n, rho, thetas.front()};
  const std::size_t nh = cfg.n_high();

  struct Shape {
    std::string name;
    Network net;
    std::size_t h_connected;  // the first h_connected high firms link to everyone
  };
  auto with_hubs = [&](std::size_t hubs) {
    Network g = positive_assortative(cfg.types());
    for (std::size_t h = 0; h < hubs; ++h)
      for (std::size_t l = nh; l < n; ++l) g = g.with_link(h, l);
    return g;
  };
  const std::vector<Shape> shapes{{"pa", with_hubs(0), 0},
                                  {"one_h_connected", with_hubs(1), 1},
                                  {"two_h_connected", with_hubs(2), 2},
                                  {"complete", complete(n), 0}};

  struct Cellv {
    bool stable;
    Equilibrium eq;
  };
  std::vector<Cellv> out(shapes.size() * thetas.size());
  parallel_for(out.size(), spec.threads, [&](std::size_t k) {
    const Shape& s = shapes[k / thetas.size()];
    TwoTypeConfig c = cfg;
    c.theta_low = thetas[k % thetas.size()];
    const auto prof = c.profile();
    out[k] = {stable_fast(s.net, prof, params), equilibrium(s.net, prof, params)};
  });

  auto mean_over = [](const Eigen::VectorXd& v, std::size_t lo, std::size_t hi) -> std::string {
    if (lo >= hi) return {};
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[static_cast<Eigen::Index>(i)];
    return format_double(s / static_cast<double>(hi - lo));
  };

  SweepResult res;
  Table t("summary", id, spec.base_seed,
          {"structure", "theta", "stable", "welfare", "cs", "ps", "effort_high", "effort_low", "effort_hconn",
           "profit_high", "profit_low", "profit_hconn"});
  Table iv("stability_intervals", id, spec.base_seed, {"structure", "theta_min", "theta_max", "stable_points"});
  for (std::size_t si = 0; si < shapes.size(); ++si) {
    const Shape& s = shapes[si];
    std::optional<double> lo, hi;
    int count = 0;
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      const auto& c = out[si * thetas.size() + ti];
      const auto& e = c.eq;
      const std::size_t h0 = s.h_connected;
      t.add({s.name, thetas[ti], c.stable, e.welfare, e.consumer_surplus, e.producer_surplus,
             mean_over(e.efforts, h0, nh), mean_over(e.efforts, nh, n), mean_over(e.efforts, 0, h0),
             mean_over(e.profits, h0, nh), mean_over(e.profits, nh, n), mean_over(e.profits, 0, h0)});
      if (c.stable) {
        if (!lo) lo = thetas[ti];
        hi = thetas[ti];
        ++count;
      }
    }
    iv.add({s.name, opt_cell(lo), opt_cell(hi), count});
  }

  res.manifest = base_manifest(id, "Welfare, effort and profit of candidate stable structures, n = 6", spec, 1);
  res.manifest["parameters"] = {{"n", n}, {"rho", rho}, {"phi", phi}, {"theta_grid", thetas},
                                {"structures", {"pa", "one_h_connected", "two_h_connected", "complete"}}};
  describe(res.manifest, t,
           {{"structure", "pa; one_h_connected = pa plus firm 0 linked to every low firm; two_h_connected = "
                          "firms 0 and 1 likewise; complete"},
            {"theta", "low-type productivity"},
            {"stable", "1 if pairwise stable"},
            {"welfare", "cs + ps"},
            {"cs", "consumer surplus"},
            {"ps", "producer surplus"},
            {"effort_high", "mean effort of high firms that are not linked to everyone (blank if none)"},
            {"effort_low", "mean effort of low firms"},
            {"effort_hconn", "mean effort of high firms linked to every firm (intermediate structures only)"},
            {"profit_high", "as effort_high, for profit"},
            {"profit_low", "as effort_low, for profit"},
            {"profit_hconn", "as effort_hconn, for profit"}});
  describe(res.manifest, iv,
           {{"theta_min", "smallest stable theta on the grid (blank if never stable)"},
            {"theta_max", "largest stable theta on the grid"},
            {"stable_points", "number of stable grid points"}});
  res.tables.push_back(std::move(t));
  res.tables.push_back(std::move(iv));
  return res;
}

// ---------------------------------------------------------------------------
// fig4

SweepResult exp_crowding_out(const SweepSpec& spec) {
  const std::string id = "fig4";
  const std::size_t n = n_or(spec, 10);
  const auto thetas = grid_or(spec.theta_grid, percent_grid(1, 99), "theta");
  std::vector<double> rho_default;
  for (int k = 1; k <= 9; ++k) rho_default.push_back(k / 10.0);
  const auto rhos = grid_or(spec.rho_grid, rho_default, "rho");
  const double phi = spec.phi_grid.empty() ? phi_lower_bound(n) : spec.phi_grid.front();
  const MarketParams params = params_at(phi);
  const double slice_theta = 0.1;
  for (double r : rhos) TwoTypeConfig{n, r, slice_theta}.n_high();

  // Grid cells plus one slice cell per rho, for both structures.
  const std::size_t per_rho = thetas.size() + 1;
  struct Cellv {
    bool stable[2];
    double welfare[2];
  };
  std::vector<Cellv> out(rhos.size() * per_rho);
  parallel_for(out.size(), spec.threads, [&](std::size_t k) {
    const std::size_t ri = k / per_rho, ti = k % per_rho;
    const TwoTypeConfig c{n, rhos[ri], ti < thetas.size() ? thetas[ti] : slice_theta};
    const auto prof = c.profile();
    const Network nets[2] = {positive_assortative(c.types()), complete(n)};
    for (int s = 0; s < 2; ++s) {
      out[k].stable[s] = stable_fast(nets[s], prof, params);
      out[k].welfare[s] = equilibrium(nets[s], prof, params).welfare;
    }
  });

  SweepResult res;
  const char* names[2] = {"pa", "complete"};
  Table grid("grid", id, spec.base_seed, {"structure", "rho", "theta", "stable", "welfare"});
  Table slice("slice", id, spec.base_seed,
              {"rho", "theta", "welfare_pa", "welfare_complete", "stable_pa", "stable_complete"});
  Table bounds("thresholds", id, spec.base_seed, {"rho", "theta_upper_pa", "theta_lower_complete"});
  for (int s = 0; s < 2; ++s)
    for (std::size_t ri = 0; ri < rhos.size(); ++ri)
      for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        const auto& c = out[ri * per_rho + ti];
        grid.add({names[s], rhos[ri], thetas[ti], c.stable[s], c.welfare[s]});
      }
  for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
    const auto& c = out[ri * per_rho + thetas.size()];
    slice.add({rhos[ri], slice_theta, c.welfare[0], c.welfare[1], c.stable[0], c.stable[1]});
    std::optional<double> pa_hi, c_lo;
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      const auto& g = out[ri * per_rho + ti];
      if (g.stable[0]) pa_hi = thetas[ti];
      if (g.stable[1] && !c_lo) c_lo = thetas[ti];
    }
    bounds.add({rhos[ri], opt_cell(pa_hi), opt_cell(c_lo)});
  }

  res.manifest = base_manifest(id, "Welfare of PA and complete networks across the high-type share", spec, 1);
  res.manifest["parameters"] = {{"n", n}, {"phi", phi}, {"rho_grid", rhos}, {"theta_grid", thetas},
                                {"slice_theta", slice_theta}};
  describe(res.manifest, grid,
           {{"structure", "pa or complete"},
            {"rho", "share of high-type firms"},
            {"theta", "low-type productivity"},
            {"stable", "1 if pairwise stable"},
            {"welfare", "total welfare"}});
  describe(res.manifest, slice,
           {{"welfare_pa", "PA welfare at the slice theta"},
            {"welfare_complete", "complete-network welfare at the slice theta"},
            {"stable_pa", "1 if PA is pairwise stable there"},
            {"stable_complete", "1 if the complete network is pairwise stable there"}});
  describe(res.manifest, bounds,
           {{"theta_upper_pa", "largest stable theta for PA (blank if none)"},
            {"theta_lower_complete", "smallest stable theta for the complete network"}});
  res.tables.push_back(std::move(grid));
  res.tables.push_back(std::move(slice));
  res.tables.push_back(std::move(bounds));
  return res;
}

// ---------------------------------------------------------------------------
// fig5

SweepResult exp_welfare_vs_density(const SweepSpec& spec) {
  const std::string id = "fig5";
  const std::size_t n = n_or(spec, 10);
  const int reps = reps_or(spec, 1000);
  const auto rhos = grid_or(spec.rho_grid, {0.2, 0.5, 0.8}, "rho");
  const auto thetas = grid_or(spec.theta_grid, {0.1, 0.5, 1.0}, "theta");
  const double phi = spec.phi_grid.empty() ? phi_lower_bound(n) : spec.phi_grid.front();
  const MarketParams params = params_at(phi);
  const std::size_t max_m = n * (n - 1) / 2;

  std::vector<TwoTypeConfig> cells;
  for (double r : rhos)
    for (double t : thetas) {
      cells.push_back({n, r, t});
      cells.back().n_high();
    }
  std::vector<ProductivityProfile> profiles;
  for (const auto& c : cells) profiles.push_back(c.profile());

  const std::size_t nm = max_m + 1, nr = static_cast<std::size_t>(reps), nc = cells.size();
  std::vector<double> w(nm * nr * nc);  // [m][rep][cell]
  parallel_for(nm * nr, spec.threads, [&](std::size_t task) {
    const std::size_t m = task / nr, r = task % nr;
    const Network g = random_with_m_links(n, m, derive_seed(spec.base_seed, m, r));
    for (std::size_t c = 0; c < nc; ++c) w[task * nc + c] = equilibrium(g, profiles[c], params).welfare;
  });

  SweepResult res;
  Table summary("summary", id, spec.base_seed, {"rho", "theta", "m", "n_reps", "mean_welfare", "sd_welfare"});
  Table markers("markers", id, spec.base_seed, {"rho", "theta", "structure", "m", "welfare"});
  Table raw("raw", id, spec.base_seed, {"rho", "theta", "m", "rep", "welfare"});
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t m = 0; m < nm; ++m) {
      const double* base = &w[(m * nr) * nc + c];
      const Stats s = summarize(base, nr, nc);
      summary.add({cells[c].rho, cells[c].theta_low, static_cast<unsigned long>(m), reps, s.mean, s.sd});
      if (spec.raw)
        for (std::size_t r = 0; r < nr; ++r)
          raw.add({cells[c].rho, cells[c].theta_low, static_cast<unsigned long>(m), static_cast<int>(r),
                   base[r * nc]});
    }
    const Network pa = positive_assortative(cells[c].types());
    markers.add({cells[c].rho, cells[c].theta_low, "pa", static_cast<unsigned long>(pa.edge_count()),
                 equilibrium(pa, profiles[c], params).welfare});
    markers.add({cells[c].rho, cells[c].theta_low, "complete", static_cast<unsigned long>(max_m),
                 equilibrium(complete(n), profiles[c], params).welfare});
  }

  res.manifest = base_manifest(id, "Welfare against link count for random, PA and complete networks", spec, reps);
  res.manifest["parameters"] = {{"n", n},
                                {"phi", phi},
                                {"rho_grid", rhos},
                                {"theta_grid", thetas},
                                {"m_range", {0, max_m}},
                                {"network_cell", "m; the same draws serve every (rho, theta) pair"}};
  const json desc = {{"rho", "share of high-type firms"},
                     {"theta", "low-type productivity"},
                     {"m", "number of links"},
                     {"n_reps", "random networks averaged"},
                     {"rep", "replication index"},
                     {"mean_welfare", "mean welfare over uniformly random networks with m links"},
                     {"sd_welfare", "sample sd (n - 1 denominator)"},
                     {"structure", "pa or complete"},
                     {"welfare", "total welfare"}};
  describe(res.manifest, summary, desc);
  describe(res.manifest, markers, desc);
  res.tables.push_back(std::move(summary));
  res.tables.push_back(std::move(markers));
  if (spec.raw) {
    describe(res.manifest, raw, desc);
    res.tables.push_back(std::move(raw));
  }
  return res;
}

// ---------------------------------------------------------------------------
// fig6

SweepResult exp_pa_vs_random_same_links(const SweepSpec& spec) {
  const std::string id = "fig6";
  const std::size_t n = n_or(spec, 10);
  const int reps = reps_or(spec, 1000);
  const auto thetas = grid_or(spec.theta_grid, {0.1, 0.5, 1.0}, "theta");
  std::vector<double> rho_default;
  for (std::size_t k = 1; k < n; ++k) rho_default.push_back(static_cast<double>(k) / static_cast<double>(n));
  const auto rhos = grid_or(spec.rho_grid, rho_default, "rho");
  const double phi = spec.phi_grid.empty() ? phi_lower_bound(n) : spec.phi_grid.front();
  const MarketParams params = params_at(phi);

  std::vector<std::size_t> n_high, links;
  for (double r : rhos) {
    const TwoTypeConfig c{n, r, thetas.front()};
    n_high.push_back(c.n_high());
    links.push_back(positive_assortative(c.types()).edge_count());
  }
  const std::size_t nrho = rhos.size(), nt = thetas.size(), nr = static_cast<std::size_t>(reps);
  std::vector<double> w(nrho * nr * nt);  // [rho][rep][theta]
  parallel_for(nrho * nr, spec.threads, [&](std::size_t task) {
    const std::size_t ri = task / nr, r = task % nr;
    const Network g = random_with_m_links(n, links[ri], derive_seed(spec.base_seed, n_high[ri], r));
    for (std::size_t t = 0; t < nt; ++t)
      w[task * nt + t] = equilibrium(g, TwoTypeConfig{n, rhos[ri], thetas[t]}.profile(), params).welfare;
  });

  SweepResult res;
  Table summary("summary", id, spec.base_seed,
                {"theta", "rho", "m", "welfare_pa", "n_reps", "mean_random", "sd_random", "premium"});
  Table raw("raw", id, spec.base_seed, {"theta", "rho", "m", "rep", "welfare"});
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t ri = 0; ri < nrho; ++ri) {
      const TwoTypeConfig c{n, rhos[ri], thetas[t]};
      const double pa = equilibrium(positive_assortative(c.types()), c.profile(), params).welfare;
      const double* base = &w[(ri * nr) * nt + t];
      const Stats s = summarize(base, nr, nt);
      summary.add({thetas[t], rhos[ri], static_cast<unsigned long>(links[ri]), pa, reps, s.mean, s.sd, pa - s.mean});
      if (spec.raw)
        for (std::size_t r = 0; r < nr; ++r)
          raw.add({thetas[t], rhos[ri], static_cast<unsigned long>(links[ri]), static_cast<int>(r), base[r * nt]});
    }

  res.manifest = base_manifest(id, "PA welfare against random networks with the same link count", spec, reps);
  res.manifest["parameters"] = {{"n", n}, {"phi", phi}, {"rho_grid", rhos}, {"theta_grid", thetas},
                                {"network_cell", "n_high = rho n; the same draws serve every theta"}};
  const json desc = {{"theta", "low-type productivity"},
                     {"rho", "share of high-type firms"},
                     {"m", "links in the PA network, also used for the random draws"},
                     {"welfare_pa", "PA welfare"},
                     {"n_reps", "random networks averaged"},
                     {"mean_random", "mean welfare of random networks with m links"},
                     {"sd_random", "sample sd (n - 1 denominator)"},
                     {"premium", "welfare_pa - mean_random"},
                     {"rep", "replication index"},
                     {"welfare", "welfare of one random network"}};
  describe(res.manifest, summary, desc);
  res.tables.push_back(std::move(summary));
  if (spec.raw) {
    describe(res.manifest, raw, desc);
    res.tables.push_back(std::move(raw));
  }
  return res;
}

// ---------------------------------------------------------------------------
// figA1

SweepResult exp_transition_profit(const SweepSpec& spec) {
  const std::string id = "figA1";
  const std::size_t n = 10;
  const auto thetas = grid_or(spec.theta_grid, {0.1, 0.5, 0.9}, "theta");
  const double phi = spec.phi_grid.empty() ? phi_lower_bound(n) : spec.phi_grid.front();
  const MarketParams params = params_at(phi);
  const Network net = two_clique(5, 5);

  SweepResult res;
  Table t("summary", id, spec.base_seed,
          {"theta", "step", "rho", "firm", "profit_before", "profit_after", "profit_change"});
  for (double theta : thetas) {
    std::vector<double> th(n, theta);
    for (std::size_t k = 0; k < n; ++k) {
      const double before = equilibrium(net, ProductivityProfile(th), params).profits[static_cast<Eigen::Index>(k)];
      th[k] = 1.0;
      const double after = equilibrium(net, ProductivityProfile(th), params).profits[static_cast<Eigen::Index>(k)];
      t.add({theta, static_cast<unsigned long>(k + 1), static_cast<double>(k + 1) / static_cast<double>(n),
             static_cast<unsigned long>(k), before, after, after - before});
    }
  }
  res.manifest = base_manifest(id, "Profit change of the upgraded firm in a fixed two-clique network", spec, 1);
  res.manifest["parameters"] = {{"n", n}, {"phi", phi}, {"theta_grid", thetas}, {"network", edge_string(net)},
                                {"upgrade_order", "firms 0..9; firms 0-4 form the first clique"}};
  describe(res.manifest, t,
           {{"theta", "initial productivity of every firm"},
            {"step", "number of firms upgraded to theta = 1 after this step"},
            {"rho", "share of high-type firms after this step"},
            {"firm", "firm upgraded in this step"},
            {"profit_before", "its profit before the upgrade"},
            {"profit_after", "its profit after the upgrade"},
            {"profit_change", "profit_after - profit_before"}});
  res.tables.push_back(std::move(t));
  return res;
}

// ---------------------------------------------------------------------------
// figA2

SweepResult exp_large_n_stability(const SweepSpec& spec) {
  const std::string id = "figA2";
  std::vector<std::size_t> ns = spec.n_grid.empty() ? std::vector<std::size_t>{5, 10, 20, 50} : spec.n_grid;
  for (std::size_t k = 0; k < ns.size(); ++k)
    if (ns[k] < 2 || (k && ns[k] <= ns[k - 1])) throw std::invalid_argument("n grid must be increasing, n >= 2");
  std::vector<double> rho_default;
  for (int k = 1; k <= 9; ++k) rho_default.push_back(k / 10.0);
  const auto rhos = grid_or(spec.rho_grid, rho_default, "rho");
  const auto thetas = grid_or(spec.theta_grid, percent_grid(1, 99), "theta");
  const auto phin = grid_or(spec.phi_grid, log_grid(2.0, 10.0, 71), "phi/n");

  struct Job {
    std::size_t n;
    double rho;
  };
  std::vector<Job> jobs;
  std::vector<std::pair<std::size_t, double>> skipped;
  for (std::size_t n : ns)
    for (double r : rhos) {
      const double count = r * static_cast<double>(n);
      if (std::abs(count - std::round(count)) > 1e-9)
        skipped.emplace_back(n, r);
      else
        jobs.push_back({n, r});
    }
  const std::size_t cells = jobs.size() * 2 * thetas.size() * phin.size();
  if (cells > kMaxRegionCells)
    throw TooLarge("figA2 grid has " + std::to_string(cells) + " cells; limit is " +
                   std::to_string(kMaxRegionCells));

  SweepResult res;
  Table regions("regions", id, spec.base_seed, {"n", "rho", "structure", "theta", "phi_per_n", "stable"});
  Table bounds("thresholds", id, spec.base_seed, {"n", "rho", "phi_per_n", "theta_upper_pa", "theta_lower_complete"});
  for (const Job& j : jobs) {
    StabilityRegion reg[2];
    const Structure kinds[2] = {Structure::PositiveAssortative, Structure::Complete};
    const char* names[2] = {"pa", "complete"};
    for (int s = 0; s < 2; ++s) {
      RegionSpec rs;
      rs.structure = kinds[s];
      rs.n = j.n;
      rs.rho = j.rho;
      rs.alpha = kMarkupAlpha;
      rs.c_bar = kMarkupCbar;
      rs.theta_grid = thetas;
      rs.phi_grid = phin;
      rs.phi_per_n = true;
      rs.threads = spec.threads;
      reg[s] = stability_region(rs);
      for (std::size_t t = 0; t < thetas.size(); ++t)
        for (std::size_t p = 0; p < phin.size(); ++p)
          regions.add({static_cast<unsigned long>(j.n), j.rho, names[s], thetas[t], phin[p], reg[s].stable(t, p)});
    }
    for (std::size_t p = 0; p < phin.size(); ++p)
      bounds.add({static_cast<unsigned long>(j.n), j.rho, phin[p], opt_cell(reg[0].theta_max(p)),
                  opt_cell(reg[1].theta_min(p))});
  }

  res.manifest = base_manifest(id, "Stability regions of PA and complete networks for larger n", spec, 1);
  json skip = json::array();
  for (auto [n, r] : skipped) skip.push_back({{"n", n}, {"rho", r}});
  res.manifest["parameters"] = {{"n_grid", ns},         {"rho_grid", rhos},
                                {"theta_grid", thetas}, {"phi_per_n_grid", phin},
                                {"skipped_infeasible", skip},
                                {"check", "representative pair per type class (exact for PA and complete)"}};
  describe(res.manifest, regions,
           {{"n", "number of firms"},
            {"rho", "share of high-type firms"},
            {"structure", "pa or complete"},
            {"theta", "low-type productivity"},
            {"phi_per_n", "phi / n"},
            {"stable", "1 if pairwise stable"}});
  describe(res.manifest, bounds,
           {{"theta_upper_pa", "largest stable theta for PA (blank if none)"},
            {"theta_lower_complete", "smallest stable theta for the complete network (blank if none)"}});
  res.tables.push_back(std::move(regions));
  res.tables.push_back(std::move(bounds));
  return res;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "figA1", "figA2"};
  return ids;
}

SweepResult run_experiment(const SweepSpec& spec) {
  using Fn = SweepResult (*)(const SweepSpec&);
  static const std::map<std::string, Fn> table{{"fig1", exp_link_sustainability},
                                               {"fig2", exp_n4_stability_domains},
                                               {"fig3", exp_n6_welfare_effort_profit},
                                               {"fig4", exp_crowding_out},
                                               {"fig5", exp_welfare_vs_density},
                                               {"fig6", exp_pa_vs_random_same_links},
                                               {"figA1", exp_transition_profit},
                                               {"figA2", exp_large_n_stability}};
  const auto it = table.find(spec.experiment);
  if (it == table.end()) throw UnknownExperiment("unknown experiment '" + spec.experiment + "'");
  return it->second(spec);
}

void write_result(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string id = result.manifest.at("experiment").get<std::string>();
  for (std::size_t k = 0; k < result.tables.size(); ++k) {
    const Table& t = result.tables[k];
    std::ofstream os(dir / table_file(id, t.name(), k == 0), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write to " + dir.string());
    t.write_csv(os);
  }
  std::ofstream m(dir / (id + "_manifest.json"), std::ios::binary);
  if (!m) throw std::runtime_error("cannot write to " + dir.string());
  m << result.manifest.dump(2) << '\n';
}

}  // namespace rdnet
