#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "rdnet/equilibrium.hpp"
#include "rdnet/error.hpp"

using namespace rdnet;

namespace {

ProductivityProfile ones(std::size_t n) { return ProductivityProfile(std::vector<double>(n, 1.0)); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) m = std::max(m, rel(a[i], b[i]));
  return m;
}

// Firm i's profit from first principles (cost reduction, Cournot quantity)
// at an arbitrary effort vector, used to check optimality without the FOC matrix.
double own_profit(const Network& net, const ProductivityProfile& th, const MarketParams& p, const Eigen::VectorXd& e,
                  std::size_t i) {
  const std::size_t n = net.size();
  std::vector<double> c(n);
  for (std::size_t a = 0; a < n; ++a) {
    c[a] = p.c_bar - th[a] * e[a];
    for (std::size_t b = 0; b < n; ++b)
      if (net.linked(a, b)) c[a] -= th[b] * e[b];
  }
  double others = 0.0;
  for (std::size_t b = 0; b < n; ++b)
    if (b != i) others += c[b];
  const double q = (p.alpha - static_cast<double>(n) * c[i] + others) / static_cast<double>(n + 1);
  return q * q - p.phi * e[i] * e[i];
}

}  // namespace

TEST_CASE("FOC matrix entries for complete and empty networks") {
  const MarketParams p{2.0, 1.0, 3.52};
  const FocMatrix c = build_foc_matrix(complete(4), ones(4), p);
  CHECK(c.entries(0, 0) == doctest::Approx(87.0).epsilon(1e-12));
  CHECK(c.entries(1, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(c.rhs_scale == 1.0);
  const FocMatrix e = build_foc_matrix(empty(4), ones(4), p);
  CHECK(e.entries(3, 3) == doctest::Approx(18.0).epsilon(1e-12));
  CHECK(e.entries(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.column_dominant());
  CHECK(e.column_dominant());
}

TEST_CASE("solve_efforts on homogeneous complete and empty networks") {
  const MarketParams p{2.0, 1.0, 3.52};
  const Eigen::VectorXd ec = solve_efforts(build_foc_matrix(complete(4), ones(4), p));
  const Eigen::VectorXd ee = solve_efforts(build_foc_matrix(empty(4), ones(4), p));
  for (int i = 0; i < 4; ++i) {
    CHECK(ec[i] == doctest::Approx(1.0 / 84.0).epsilon(1e-12));
    CHECK(ee[i] == doctest::Approx(1.0 / 21.0).epsilon(1e-12));
  }
  const MarketParams doubled{3.0, 1.0, 3.52};
  const Eigen::VectorXd e2 = solve_efforts(build_foc_matrix(complete(4), ones(4), doubled));
  CHECK(max_rel(e2, 2.0 * ec) < 1e-13);
}

TEST_CASE("equilibrium outcome for the homogeneous complete network") {
  const Equilibrium eq = equilibrium(complete(4), ones(4), MarketParams{2.0, 1.0, 3.52});
  CHECK(eq.efforts[0] == doctest::Approx(0.01190476).epsilon(1e-7));
  CHECK(eq.quantities[0] == doctest::Approx(0.20952381).epsilon(1e-7));
  CHECK(eq.profits[0] == doctest::Approx(0.04340136).epsilon(1e-7));
  CHECK(eq.welfare == doctest::Approx(0.52480726).epsilon(1e-7));
  CHECK(eq.welfare == eq.consumer_surplus + eq.producer_surplus);
  // q = phi / (theta eta) e
  CHECK(eq.quantities[2] == doctest::Approx(3.52 / 0.2 / 84.0).epsilon(1e-12));
  CHECK(eq.residual_norm < 1e-12);
}

TEST_CASE("closed forms agree with the linear solve") {
  CounterRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen::size_in(rng, 3, 12);
    const auto th = gen::thetas(rng, n);
    const auto p = gen::params_above_bound(rng, n);
    const Eigen::VectorXd c = solve_efforts(build_foc_matrix(complete(n), th, p));
    REQUIRE(max_rel(c, closed_form_complete(th, p)) < 1e-10);
    const std::size_t k = static_cast<std::size_t>(rng.below(n));
    std::size_t l = static_cast<std::size_t>(rng.below(n - 1));
    if (l >= k) ++l;
    const Eigen::VectorXd m = solve_efforts(build_foc_matrix(complete(n).without_link(k, l), th, p));
    const Eigen::VectorXd cf = closed_form_complete_minus_link(th, p, k, l);
    REQUIRE(max_rel(m, cf) < 1e-10);
    CHECK(cf[static_cast<Eigen::Index>(l)] ==
          doctest::Approx(cf[static_cast<Eigen::Index>(k)] *
                          ((th[l] / th[k]) * ((n + 1) * p.phi - 2 * th[k] * th[k]) /
                           ((n + 1) * p.phi - 2 * th[l] * th[l])))
              .epsilon(1e-14));
  }
}

TEST_CASE("closed-form complete efforts are proportional to theta") {
  const auto e = closed_form_complete(ProductivityProfile({1.0, 0.5, 0.5, 0.5}), MarketParams{2.0, 1.0, 3.52});
  CHECK(e[0] / e[1] == doctest::Approx(2.0).epsilon(1e-14));
  const auto s = closed_form_complete_minus_link(ones(4), MarketParams{2.0, 1.0, 3.52}, 0, 1);
  CHECK(s[0] == doctest::Approx(s[1]).epsilon(1e-14));
}

TEST_CASE("best-response iteration reaches the linear-solve solution") {
  const MarketParams p{2.0, 1.0, 3.52};
  const auto fp = best_response_fixed_point(complete(4), ones(4), p);
  CHECK(fp.efforts[0] == doctest::Approx(1.0 / 84.0).epsilon(1e-10));

  FixedPointOptions from_solution;
  from_solution.start = solve_efforts(build_foc_matrix(complete(4), ones(4), p));
  CHECK(best_response_fixed_point(complete(4), ones(4), p, from_solution).iterations == 1);

  CounterRng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen::size_in(rng, 2, 12);
    const auto net = gen::network(rng, n);
    const auto th = gen::thetas(rng, n);
    const auto pp = gen::params_above_bound(rng, n);
    const auto e = solve_efforts(build_foc_matrix(net, th, pp));
    const auto it = best_response_fixed_point(net, th, pp);
    REQUIRE((it.efforts - e).cwiseAbs().maxCoeff() <= 1e-11);
  }
}

TEST_CASE("equilibrium efforts maximize each firm's own profit") {
  CounterRng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = gen::size_in(rng, 2, 8);
    const auto net = gen::network(rng, n);
    const auto th = gen::thetas(rng, n);
    const auto p = gen::params_above_bound(rng, n);
    const Equilibrium eq = equilibrium(net, th, p);
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 1e-5;
      Eigen::VectorXd up = eq.efforts, dn = eq.efforts;
      up[static_cast<Eigen::Index>(i)] += h;
      dn[static_cast<Eigen::Index>(i)] -= h;
      const double f0 = own_profit(net, th, p, eq.efforts, i);
      const double fu = own_profit(net, th, p, up, i), fd = own_profit(net, th, p, dn, i);
      CHECK(std::abs(fu - fd) / (2 * h) < 1e-8);
      CHECK(fu < f0);
      CHECK(fd < f0);
      CHECK(f0 == doctest::Approx(eq.profits[static_cast<Eigen::Index>(i)]).epsilon(1e-10));
    }
  }
}

TEST_CASE("output responds to rivals' effort according to links") {
  CounterRng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen::size_in(rng, 3, 9);
    const auto net = gen::network(rng, n);
    const auto th = gen::thetas(rng, n);
    const auto p = gen::params_above_bound(rng, n);
    const Equilibrium eq = equilibrium(net, th, p);
    const std::size_t i = static_cast<std::size_t>(rng.below(n));
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      Eigen::VectorXd e = eq.efforts;
      e[static_cast<Eigen::Index>(k)] += 1e-6;
      const double q = cournot_quantities(marginal_costs(net, th, p, e), p.alpha)[static_cast<Eigen::Index>(i)];
      const double q0 = eq.quantities[static_cast<Eigen::Index>(i)];
      if (net.linked(i, k))
        CHECK(q > q0);
      else
        CHECK(q < q0);
    }
  }
}

TEST_CASE("quantity-effort identity and positivity above the cost bound") {
  CounterRng rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = gen::size_in(rng, 3, 10);
    const auto net = gen::network(rng, n);
    const auto th = gen::thetas(rng, n, 1e-3, 1.0);
    const MarketParams p{2.0, 1.0, phi_lower_bound(n) * (1 + 1e-6)};
    const FocMatrix foc = build_foc_matrix(net, th, p);
    REQUIRE(foc.column_dominant());
    const Equilibrium eq = equilibrium(net, th, p);
    const auto eta = sparsity(net);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      CHECK(eq.efforts[ii] > 0.0);
      CHECK(eq.quantities[ii] > 0.0);
      CHECK(rel(eq.quantities[ii], p.phi / (th[i] * eta[i]) * eq.efforts[ii]) < 1e-9);
    }
  }
}

TEST_CASE("symmetric pairs: ratios, orderings and output equality") {
  CounterRng rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen::size_in(rng, 3, 10);
    const bool linked = trial % 2 == 0;
    const auto sp = gen::symmetric_pair(rng, n, linked);
    auto th = gen::thetas(rng, n, 0.05, 1.0);
    const double hi = gen::real_in(rng, 0.1, 1.0), lo = gen::real_in(rng, 0.05, hi * 0.99);
    th = th.with(sp.i, hi).with(sp.j, lo);
    const auto p = gen::params_above_bound(rng, n);
    const PairRatios r = symmetric_pair_ratios(sp.net, th, p, sp.i, sp.j);
    REQUIRE(rel(r.effort_direct, r.effort_closed_form) < 1e-9);
    REQUIRE(rel(r.profit_direct, r.profit_closed_form) < 1e-9);
    const Equilibrium eq = equilibrium(sp.net, th, p);
    const auto ii = static_cast<Eigen::Index>(sp.i), jj = static_cast<Eigen::Index>(sp.j);
    if (linked) {
      CHECK(r.effort_closed_form == doctest::Approx(hi / lo).epsilon(1e-14));
      CHECK(eq.profits[ii] < eq.profits[jj]);
      CHECK(rel(eq.quantities[ii], eq.quantities[jj]) < 1e-9);
    } else {
      CHECK(eq.profits[ii] > eq.profits[jj]);
      CHECK(eq.quantities[ii] > eq.quantities[jj]);
    }
  }
}

TEST_CASE("symmetric_pair_ratios rejects asymmetric positions") {
  // Star centered at 0.
  const std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}};
  CHECK_THROWS_AS(symmetric_pair_ratios(Network(4, star), ones(4), MarketParams{2, 1, 3.52}, 0, 1), NotSymmetric);
  const auto r = symmetric_pair_ratios(Network(4, star), ones(4), MarketParams{2, 1, 3.52}, 1, 2);
  CHECK(r.effort_closed_form == 1.0);
  CHECK(r.profit_closed_form == 1.0);
}

TEST_CASE("homogeneous productivity on vertex-transitive networks gives equal efforts") {
  for (std::size_t n = 3; n <= 9; ++n) {
    std::vector<Edge> ring;
    for (std::size_t i = 0; i < n; ++i) ring.emplace_back(i, (i + 1) % n);
    const auto e = equilibrium(Network(n, ring), ones(n), MarketParams{2, 1, phi_lower_bound(n)}).efforts;
    CHECK((e.array() - e[0]).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("solver failures are structured") {
  try {
    equilibrium(complete(4), ones(4), MarketParams{2, 1, 0.01});
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.kind() == SolverFailure::NonPositiveEffort);
  }
  FocMatrix zero;
  zero.entries = Eigen::MatrixXd::Zero(3, 3);
  try {
    solve_efforts(zero);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.kind() == SolverFailure::SingularSystem);
  }
  FixedPointOptions short_run;
  short_run.max_iter = 3;
  try {
    best_response_fixed_point(complete(4), ones(4), MarketParams{2, 1, 3.52}, short_run);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.kind() == SolverFailure::NoConvergence);
  }
}

TEST_CASE("equilibrium JSON keys") {
  const auto j = to_json(equilibrium(complete(3), ones(3), MarketParams{2, 1, 2}));
  for (const char* k : {"efforts", "quantities", "marginal_costs", "profits", "cs", "ps", "welfare", "residual_norm"})
    CHECK(j.contains(k));
  CHECK(j["efforts"].size() == 3);
}
