// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "rdnet/equilibrium.hpp"
#include "rdnet/error.hpp"
#include "rdnet/experiments.hpp"
#include "rdnet/stability.hpp"

using namespace rdnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double m = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]) / std::abs(b[k]));
  return m;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Column of a table as doubles, in row order, for rows passing `keep`.
std::vector<double> column(const Table& t, const std::string& col,
                           const std::function<bool(std::size_t)>& keep = [](std::size_t) { return true; }) {
  std::vector<double> v;
  for (std::size_t r = 0; r < t.size(); ++r)
    if (keep(r)) v.push_back(t.number(r, col));
  return v;
}

std::string cell(const Table& t, std::size_t r, const std::string& col) { return t.row(r)[t.column(col)]; }

Outcome closed_forms() {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(1001);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = gen::size_in(rng, 3, 12);
    const auto th = gen::thetas(rng, n, 0.05, 1.0);
    const auto p = gen::params_above_bound(rng, n);
    worst = std::max(worst, max_rel(solve_efforts(build_foc_matrix(complete(n), th, p)), closed_form_complete(th, p)));
    const std::size_t a = gen::size_in(rng, 0, n - 1);
    std::size_t b = gen::size_in(rng, 0, n - 2);
    if (b >= a) ++b;
    const Network g = complete(n).without_link(a, b);
    worst = std::max(worst,
                     max_rel(solve_efforts(build_foc_matrix(g, th, p)), closed_form_complete_minus_link(th, p, a, b)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs <= 10.0,
          "max rel err " + fmt("%.2e", worst) + " (limit 1e-10), " + fmt("%.2f", secs) + " s (limit 10 s)"};
}

Outcome fixed_point() {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(1002);
  const double ells[3] = {0.25, 0.5, 0.75};
  double worst = 0.0;
  int er = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = gen::size_in(rng, 2, 12);
    Network g = gen::network(rng, n);
    if (k % 2 == 0) {
      g = erdos_renyi(n, ells[(k / 2) % 3], rng());
      ++er;
    }
    const auto th = gen::thetas(rng, n, 0.05, 1.0);
    const auto p = gen::params_above_bound(rng, n);
    const auto fp = best_response_fixed_point(g, th, p);
    worst = std::max(worst, max_rel(fp.efforts, solve_efforts(build_foc_matrix(g, th, p))));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs <= 60.0, "max rel diff " + fmt("%.2e", worst) + " over 1000 instances (" +
                                             std::to_string(er) + " Erdos-Renyi), " + fmt("%.2f", secs) + " s"};
}

Outcome bound_property() {
  CounterRng rng(1003);
  int violations = 0, total = 0;
  for (std::size_t n = 3; n <= 10; ++n) {
    const MarketParams p{2.0, 1.0, phi_lower_bound(n) * (1.0 + 1e-6)};
    for (int k = 0; k < 500; ++k, ++total) {
      const Network g = gen::network(rng, n);
      const auto th = gen::thetas(rng, n, 0.01, 1.0);
      const auto foc = build_foc_matrix(g, th, p);
      bool ok = foc.column_dominant();
      try {
        ok = ok && (solve_efforts(foc).array() > 0.0).all();
      } catch (const SolverError&) {
        ok = false;
      }
      violations += !ok;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(total) + " instances"};
}

Outcome symmetric_pairs() {
  CounterRng rng(1004);
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = gen::size_in(rng, 3, 12);
    const bool linked = k % 2 == 0;
    const auto sp = gen::symmetric_pair(rng, n, linked);
    const double hi = gen::real_in(rng, 0.1, 1.0), lo = gen::real_in(rng, 0.05, 0.99 * hi);
    const auto th = gen::thetas(rng, n, 0.05, 1.0).with(sp.i, hi).with(sp.j, lo);
    const auto p = gen::params_above_bound(rng, n);
    const PairRatios r = symmetric_pair_ratios(sp.net, th, p, sp.i, sp.j);
    const double err = std::max(std::abs(r.effort_direct / r.effort_closed_form - 1.0),
                                std::abs(r.profit_direct / r.profit_closed_form - 1.0));
    worst = std::max(worst, err);
    const Equilibrium eq = equilibrium(sp.net, th, p);
    const auto i = static_cast<Eigen::Index>(sp.i), j = static_cast<Eigen::Index>(sp.j);
    bool ok = err <= 1e-9;
    if (linked)
      ok = ok && eq.profits[i] < eq.profits[j] && std::abs(eq.quantities[i] / eq.quantities[j] - 1.0) <= 1e-9;
    else
      ok = ok && eq.profits[i] > eq.profits[j] && eq.quantities[i] > eq.quantities[j];
    violations += !ok;
  }
  return {violations == 0,
          std::to_string(violations) + " violations in 500 constructions, max ratio err " + fmt("%.2e", worst)};
}

Outcome deviation_ratio() {
  CounterRng rng(1005);
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = gen::size_in(rng, 3, 10);
    const auto base = gen::thetas(rng, n, 0.05, 1.0);
    const auto p = gen::params_above_bound(rng, n);
    const std::size_t i = gen::size_in(rng, 0, n - 1);
    std::size_t j = gen::size_in(rng, 0, n - 2);
    if (j >= i) ++j;
    const double ti = base[i];
    std::vector<double> r;
    for (int m = 1; m <= 200; ++m)
      r.push_back(complete_deviation_ratio(base.with(j, ti * m / 200.0), p, i, j));
    bool ok = r.front() > 1.0 && r.back() < 1.0;
    for (std::size_t m = 1; m < r.size(); ++m) ok = ok && r[m] < r[m - 1];
    violations += !ok;
  }
  // Verdict flip around the root for n = 3 and 4.
  int flips = 0, flip_fail = 0;
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 3 + static_cast<std::size_t>(k % 2);
    const auto th = gen::thetas(rng, n, 0.3, 1.0);
    const MarketParams p{2.0, 1.0, phi_lower_bound(n)};
    const double root = severance_threshold(th, p, 0, 1);
    const double d = 1e-5;
    if (root - d <= 0.0) continue;
    auto severs = [&](double tj) {
      const auto rep = is_pairwise_stable(complete(n), th.with(1, tj), p);
      return std::any_of(rep.blocking.begin(), rep.blocking.end(), [](const BlockingPair& b) {
        return b.pair == Edge{0, 1} && b.reason == BlockReason::SeverGainI;
      });
    };
    ++flips;
    flip_fail += !(severs(root - d) && !severs(std::min(root + d, th[0])));
  }
  return {violations == 0 && flip_fail == 0 && flips > 0,
          std::to_string(violations) + " monotonicity violations in 100 profiles; " + std::to_string(flip_fail) +
              " failed verdict flips in " + std::to_string(flips) + " root checks"};
}

Outcome fig2() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepSpec s;
  s.experiment = "fig2";
  for (int k = 1; k <= 99; k += 2) s.theta_grid.push_back(k / 100.0);
  s.phi_grid = log_grid(phi_lower_bound(4), 10 * phi_lower_bound(4), 50);
  const auto res = run_experiment(s);
  const auto& classes = res.table("classes");
  std::vector<std::string> nonempty;
  for (std::size_t r = 0; r < classes.size(); ++r)
    if (classes.number(r, "nonempty") == 1) nonempty.push_back(cell(classes, r, "structure"));
  std::sort(nonempty.begin(), nonempty.end());
  const bool classes_ok = nonempty == std::vector<std::string>{"complete", "one_h_connected", "pa"};

  const auto& th = res.table("thresholds");
  const auto lower = column(th, "theta_lower_complete"), upper = column(th, "theta_upper_pa");
  bool order = true, monotone = true;
  for (std::size_t k = 0; k < lower.size(); ++k) {
    order = order && !std::isnan(lower[k]) && !std::isnan(upper[k]) && lower[k] <= upper[k];
    if (k) monotone = monotone && lower[k] <= lower[k - 1] && upper[k] <= upper[k - 1];
  }
  // Overlap: some grid theta stable under both at every phi.
  const auto& reg = res.table("regions");
  std::map<std::pair<std::string, std::string>, int> both;
  for (std::size_t r = 0; r < reg.size(); ++r) {
    const auto st = cell(reg, r, "structure");
    if ((st == "pa" || st == "complete") && cell(reg, r, "stable") == "1")
      both[{cell(reg, r, "phi"), cell(reg, r, "theta")}] += 1;
  }
  std::set<std::string> phis_with_overlap;
  for (const auto& [key, c] : both)
    if (c == 2) phis_with_overlap.insert(key.first);
  const bool overlap = phis_with_overlap.size() == s.phi_grid.size();
  const double secs = seconds_since(t0);
  std::string names;
  for (const auto& x : nonempty) names += (names.empty() ? "" : ",") + x;
  return {classes_ok && order && monotone && overlap && secs <= 300.0,
          "nonempty {" + names + "} of " + std::to_string(classes.size()) + " classes; lower<=upper " +
              (order ? "yes" : "no") + ", overlap at " + std::to_string(phis_with_overlap.size()) + "/50 phi, " +
              "non-increasing " + (monotone ? "yes" : "no") + ", " + fmt("%.1f", secs) + " s"};
}

Outcome fig3() {
  SweepSpec s;
  s.experiment = "fig3";
  const auto res = run_experiment(s);
  const auto& t = res.table("summary");
  auto rows = [&](const std::string& st) {
    std::vector<std::size_t> v;
    for (std::size_t r = 0; r < t.size(); ++r)
      if (cell(t, r, "structure") == st) v.push_back(r);
    return v;
  };
  const auto pa = rows("pa"), c = rows("complete");
  bool ranking = true;
  int band = 0;
  for (std::size_t k = 0; k < pa.size(); ++k)
    if (t.number(pa[k], "stable") == 1 && t.number(c[k], "stable") == 1) {
      ++band;
      ranking = ranking && t.number(pa[k], "welfare") > t.number(c[k], "welfare");
    }
  bool increasing = true;
  for (const std::string st : {"pa", "one_h_connected", "two_h_connected", "complete"}) {
    const auto v = rows(st);
    for (std::size_t k = 1; k < v.size(); ++k) increasing = increasing && t.number(v[k], "welfare") > t.number(v[k - 1], "welfare");
  }
  // Handoff at the top of the PA region.
  std::size_t top = 0;
  for (std::size_t k = 0; k < pa.size(); ++k)
    if (t.number(pa[k], "stable") == 1) top = k;
  const bool drop = top + 1 < c.size() && t.number(c[top + 1], "stable") == 1 &&
                    t.number(c[top + 1], "welfare") < t.number(pa[top], "welfare");
  return {ranking && band > 0 && increasing && drop,
          "W(PA) > W(complete) on " + std::to_string(band) + " band points: " + (ranking ? "yes" : "no") +
              "; welfare increasing in theta: " + (increasing ? "yes" : "no") + "; drop at theta_bar = " +
              cell(t, pa[top], "theta") + ": " + fmt("%.6f", t.number(pa[top], "welfare")) + " -> " +
              fmt("%.6f", t.number(c[top + 1], "welfare"))};
}

Outcome fig4() {
  SweepSpec s;
  s.experiment = "fig4";
  const auto res = run_experiment(s);
  const auto pa = column(res.table("slice"), "welfare_pa"), co = column(res.table("slice"), "welfare_complete");
  const auto peak = static_cast<std::size_t>(std::max_element(pa.begin(), pa.end()) - pa.begin());
  bool inverted = peak > 0 && peak + 1 < pa.size();
  for (std::size_t k = 1; k < pa.size(); ++k) inverted = inverted && (k <= peak ? pa[k] > pa[k - 1] : pa[k] < pa[k - 1]);
  bool mono = true;
  for (std::size_t k = 1; k < co.size(); ++k) mono = mono && co[k] > co[k - 1];
  const auto bar = column(res.table("thresholds"), "theta_upper_pa");
  bool shrink = true;
  for (std::size_t k = 1; k < bar.size(); ++k) shrink = shrink && bar[k] <= bar[k - 1];
  // Complete-network mask identical across rho.
  const auto& g = res.table("grid");
  std::map<std::string, std::string> mask;
  for (std::size_t r = 0; r < g.size(); ++r)
    if (cell(g, r, "structure") == "complete") mask[cell(g, r, "rho")] += cell(g, r, "stable");
  bool invariant = true;
  for (const auto& [rho, m] : mask) invariant = invariant && m == mask.begin()->second;
  return {inverted && mono && shrink && invariant,
          std::string("PA inverted-U with peak at rho = ") + cell(res.table("slice"), peak, "rho") + ": " +
              (inverted ? "yes" : "no") + "; complete increasing: " + (mono ? "yes" : "no") +
              "; PA theta_bar non-increasing: " + (shrink ? "yes" : "no") +
              "; complete region rho-invariant: " + (invariant ? "yes" : "no")};
}

Outcome fig5() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepSpec s;
  s.experiment = "fig5";
  s.replications = 1000;
  s.threads = 8;
  const auto res = run_experiment(s);
  const auto& t = res.table("summary");
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> best;  // (max mean, argmax m)
  for (std::size_t r = 0; r < t.size(); ++r) {
    auto& b = best.try_emplace({cell(t, r, "rho"), cell(t, r, "theta")}, -1.0, -1.0).first->second;
    if (t.number(r, "mean_welfare") > b.first) b = {t.number(r, "mean_welfare"), t.number(r, "m")};
  }
  bool interior = best.size() == 9;
  std::string argmax;
  for (const auto& [key, b] : best) {
    interior = interior && b.second > 0 && b.second < 45;
    argmax += (argmax.empty() ? "" : ",") + std::to_string(static_cast<int>(b.second));
  }
  const auto& mk = res.table("markers");
  double pa = NAN;
  for (std::size_t r = 0; r < mk.size(); ++r)
    if (cell(mk, r, "rho") == "0.5" && cell(mk, r, "theta") == "0.1" && cell(mk, r, "structure") == "pa")
      pa = mk.number(r, "welfare");
  const double rival = best.at({"0.5", "0.5"}).first;
  const double secs = seconds_since(t0);
  return {interior && pa > rival && secs <= 1800.0,
          "argmax m per cell {" + argmax + "}; PA(0.5, 0.1) = " + fmt("%.7f", pa) + " vs max mean random(0.5, 0.5) = " +
              fmt("%.7f", rival) + " (margin " + fmt("%.1e", pa - rival) + "), 1000 reps, " + fmt("%.1f", secs) + " s"};
}

Outcome figA1() {
  SweepSpec s;
  s.experiment = "figA1";
  const auto res = run_experiment(s);
  const auto& t = res.table("summary");
  std::map<std::string, std::vector<double>> d;
  for (std::size_t r = 0; r < t.size(); ++r) d[cell(t, r, "theta")].push_back(t.number(r, "profit_change"));
  bool positive = true, dominate = true, kink = true;
  for (const auto& [theta, v] : d) {
    for (double x : v) positive = positive && x > 0;
    // Slope changes sign between rho = 0.5 and 0.6 and nowhere else.
    for (std::size_t k = 1; k < v.size(); ++k) kink = kink && ((k == 5) == (v[k] < v[k - 1]));
  }
  for (std::size_t k = 0; k < d["0.1"].size(); ++k) dominate = dominate && d["0.1"][k] > d["0.9"][k];
  return {positive && dominate && kink, std::string("all deltas positive: ") + (positive ? "yes" : "no") +
                                            "; theta 0.1 above 0.9 at every step: " + (dominate ? "yes" : "no") +
                                            "; slope turns only at rho = 0.5: " + (kink ? "yes" : "no")};
}

Outcome determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto root = fs::temp_directory_path() / "rdnet_acceptance_determinism";
  fs::remove_all(root);
  int files = 0, mismatches = 0;
  for (const auto& id : experiment_ids()) {
    for (unsigned threads : {1u, 8u}) {
      SweepSpec s;
      s.experiment = id;
      s.threads = threads;
      s.raw = true;
      write_result(run_experiment(s), root / std::to_string(threads));
    }
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  for (const auto& e : fs::directory_iterator(root / "1")) {
    ++files;
    mismatches += slurp(e.path()) != slurp(root / "8" / e.path().filename());
  }
  const bool same_count = std::distance(fs::directory_iterator(root / "8"), fs::directory_iterator{}) == files;
  fs::remove_all(root);
  return {mismatches == 0 && same_count && files > 0,
          std::to_string(mismatches) + " differing files of " + std::to_string(files) +
              " (all experiments, default grids, raw rows on), " + fmt("%.1f", seconds_since(t0)) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"closed-form oracle equivalence", closed_forms},
      {"fixed-point oracle equivalence", fixed_point},
      {"column dominance and positive efforts at the cost bound", bound_property},
      {"symmetric-pair ratio identities and orderings", symmetric_pairs},
      {"deviation ratio monotonicity and threshold verdict flip", deviation_ratio},
      {"n = 4 stability domains", fig2},
      {"n = 6 welfare ranking and handoff drop", fig3},
      {"crowding-out in rho", fig4},
      {"welfare against link density", fig5},
      {"transition profit under a fixed two-clique network", figA1},
      {"determinism across thread counts", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
