#include "rdnet/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdnet/error.hpp"

namespace rdnet {

namespace {

void check_sizes(const Network& net, const ProductivityProfile& profile) {
  if (net.size() != profile.size())
    throw std::invalid_argument("network has " + std::to_string(net.size()) + " firms but profile has " +
                                std::to_string(profile.size()));
}

double inf_norm(const Eigen::MatrixXd& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

bool FocMatrix::column_dominant() const {
  const Eigen::Index n = entries.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double diag = std::abs(entries(j, j));
    const double off = entries.col(j).cwiseAbs().sum() - diag;
    if (!(diag > off)) return false;
  }
  return true;
}

bool FocMatrix::row_dominant() const {
  const Eigen::Index n = entries.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double diag = std::abs(entries(i, i));
    const double off = entries.row(i).cwiseAbs().sum() - diag;
    if (!(diag > off)) return false;
  }
  return true;
}

double FocMatrix::residual(const Eigen::VectorXd& efforts) const {
  return (entries * efforts - Eigen::VectorXd::Constant(entries.rows(), rhs_scale)).cwiseAbs().maxCoeff();
}

FocMatrix build_foc_matrix(const Network& net, const ProductivityProfile& profile, const MarketParams& params) {
  check_sizes(net, profile);
  const std::size_t n = net.size();
  const double np1 = static_cast<double>(n + 1);
  FocMatrix foc;
  foc.rhs_scale = params.markup();
  foc.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      if (i == j) {
        const double m = static_cast<double>(n - net.degree(i));
        foc.entries(r, c) = np1 * np1 * params.phi / (profile[i] * m) - profile[i] * m;
      } else {
        const double dj = static_cast<double>(net.degree(j));
        const double g = net.linked(i, j) ? 1.0 : 0.0;
        foc.entries(r, c) = (1.0 + dj) * profile[j] - np1 * g * profile[j];
      }
    }
  }
  return foc;
}

Eigen::VectorXd solve_efforts(const FocMatrix& foc) {
  const Eigen::MatrixXd& a = foc.entries;
  if (!a.allFinite()) throw SolverError(SolverFailure::SingularSystem, "matrix has non-finite entries");
  const double scale = inf_norm(a);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot >= kPivotTol * scale))
    throw SolverError(SolverFailure::SingularSystem, "pivot " + fmt(min_pivot) + " below tolerance");

  const Eigen::VectorXd b = Eigen::VectorXd::Constant(a.rows(), foc.rhs_scale);
  Eigen::VectorXd e = lu.solve(b);
  auto tol = [&] { return kResidualTol * std::max(1.0, scale * e.cwiseAbs().maxCoeff()); };
  double res = (a * e - b).cwiseAbs().maxCoeff();
  if (!(res <= tol())) {
    e += lu.solve(b - a * e);
    res = (a * e - b).cwiseAbs().maxCoeff();
    if (!(res <= tol()))
      throw SolverError(SolverFailure::SingularSystem, "residual " + fmt(res) + " after refinement");
  }
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (!std::isfinite(e[i]) || e[i] <= kEffortFloor)
      throw SolverError(SolverFailure::NonPositiveEffort,
                        "effort of firm " + std::to_string(i) + " is " + fmt(e[i]));
  return e;
}

Eigen::VectorXd closed_form_complete(const ProductivityProfile& profile, const MarketParams& params) {
  const std::size_t n = profile.size();
  const double np1 = static_cast<double>(n + 1);
  double sum_sq = 0.0;
  for (double t : profile.values()) sum_sq += t * t;
  const double denom = np1 * np1 * params.phi - sum_sq;
  Eigen::VectorXd e(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) e[static_cast<Eigen::Index>(i)] = params.markup() * profile[i] / denom;
  return e;
}

Eigen::VectorXd closed_form_complete_minus_link(const ProductivityProfile& profile, const MarketParams& params,
                                                FirmIndex k, FirmIndex l) {
  const std::size_t n = profile.size();
  if (k >= n || l >= n) throw std::out_of_range("firm index out of range");
  if (k == l) throw std::invalid_argument("k and l must differ");
  const double nd = static_cast<double>(n);
  const double np1 = nd + 1.0;
  const double phi = params.phi;
  const double tk = profile[k], tl = profile[l];
  const double big = np1 * np1 * phi;

  const double b_k = big / (2.0 * tk) - 2.0 * tk;
  const double lambda = (tl / tk) * (np1 * phi - 2.0 * tk * tk) / (np1 * phi - 2.0 * tl * tl);
  double q = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != k && j != l) q += profile[j] * profile[j];
  q /= big;

  const double denom = b_k * (1.0 - q) - 2.0 * tk * q + tl * lambda * (nd * (1.0 - q) - (1.0 + q));
  const double e_k = params.markup() / denom;
  const double others = (b_k + 2.0 * tk + np1 * tl * lambda) / big * e_k;

  Eigen::VectorXd e(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) e[static_cast<Eigen::Index>(i)] = profile[i] * others;
  e[static_cast<Eigen::Index>(k)] = e_k;
  e[static_cast<Eigen::Index>(l)] = lambda * e_k;
  return e;
}

FixedPointResult best_response_fixed_point(const Network& net, const ProductivityProfile& profile,
                                           const MarketParams& params, const FixedPointOptions& opts) {
  check_sizes(net, profile);
  const std::size_t n = net.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const double np1 = static_cast<double>(n + 1);
  const std::vector<double> eta = sparsity(net);

  std::vector<double> gain(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double te = profile[i] * eta[i];
    gain[i] = te / (params.phi - te * te);
  }
  const double base = params.markup() / np1;

  Eigen::VectorXd e = opts.start ? *opts.start : Eigen::VectorXd::Constant(ni, base / params.phi);
  if (e.size() != ni) throw std::invalid_argument("start vector has the wrong length");
  Eigen::VectorXd next(ni);
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = base;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double te = profile[j] * e[static_cast<Eigen::Index>(j)];
        s += net.linked(i, j) ? eta[j] * te : -(1.0 - eta[j]) * te;
      }
      next[static_cast<Eigen::Index>(i)] = gain[i] * s;
    }
    const double step = (next - e).cwiseAbs().maxCoeff();
    e.swap(next);
    if (!std::isfinite(step)) break;
    if (step <= opts.tol) return {e, it};
  }
  throw SolverError(SolverFailure::NoConvergence,
                    "best-response iteration did not converge in " + std::to_string(opts.max_iter) + " steps");
}

Eigen::VectorXd marginal_costs(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                               const Eigen::VectorXd& efforts) {
  check_sizes(net, profile);
  const std::size_t n = net.size();
  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double reduction = profile[i] * efforts[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && net.linked(i, j)) reduction += profile[j] * efforts[static_cast<Eigen::Index>(j)];
    c[static_cast<Eigen::Index>(i)] = params.c_bar - reduction;
  }
  return c;
}

Eigen::VectorXd cournot_quantities(const Eigen::VectorXd& mc, double alpha) {
  const double n = static_cast<double>(mc.size());
  const double total = mc.sum();
  Eigen::VectorXd q(mc.size());
  for (Eigen::Index i = 0; i < mc.size(); ++i) q[i] = (alpha - n * mc[i] + (total - mc[i])) / (n + 1.0);
  return q;
}

Equilibrium equilibrium(const Network& net, const ProductivityProfile& profile, const MarketParams& params) {
  const FocMatrix foc = build_foc_matrix(net, profile, params);
  Equilibrium eq;
  eq.efforts = solve_efforts(foc);
  eq.residual_norm = foc.residual(eq.efforts);
  eq.marginal_costs = marginal_costs(net, profile, params, eq.efforts);
  eq.quantities = cournot_quantities(eq.marginal_costs, params.alpha);

  const std::vector<double> eta = sparsity(net);
  const Eigen::Index n = eq.efforts.size();
  eq.profits.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = eq.efforts[i], q = eq.quantities[i];
    const double cost = params.phi * e * e;
    const double direct = q * q - cost;
    const double te = profile[static_cast<std::size_t>(i)] * eta[static_cast<std::size_t>(i)];
    const double via_effort = (params.phi / (te * te) - 1.0) * cost;
    const double scale = std::max({std::abs(direct), q * q, cost});
    if (std::abs(direct - via_effort) > kProfitCrossCheckTol * scale)
      throw SolverError(SolverFailure::ProfitCrossCheckFailed,
                        "firm " + std::to_string(i) + ": " + fmt(direct) + " vs " + fmt(via_effort));
    eq.profits[i] = direct;
  }
  const double total_q = eq.quantities.sum();
  eq.consumer_surplus = 0.5 * total_q * total_q;
  eq.producer_surplus = eq.profits.sum();
  eq.welfare = eq.consumer_surplus + eq.producer_surplus;
  return eq;
}

PairRatios symmetric_pair_ratios(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                                 FirmIndex i, FirmIndex j) {
  check_sizes(net, profile);
  if (i >= net.size() || j >= net.size()) throw std::out_of_range("firm index out of range");
  if (i == j || !symmetric_position(net, i, j))
    throw NotSymmetric("firms " + std::to_string(i) + " and " + std::to_string(j) +
                       " are not in a symmetric position");
  const double phi = params.phi;
  const double ti = profile[i], tj = profile[j];
  const double eta = sparsity(net)[i];
  const double open = net.linked(i, j) ? 0.0 : 1.0;
  const double bracket = (phi - tj * tj * eta * open) / (phi - ti * ti * eta * open);

  PairRatios r;
  r.effort_closed_form = ti / tj * bracket;
  r.profit_closed_form = (phi - ti * ti * eta * eta) / (phi - tj * tj * eta * eta) * bracket * bracket;
  const Equilibrium eq = equilibrium(net, profile, params);
  const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
  r.effort_direct = eq.efforts[ii] / eq.efforts[jj];
  r.profit_direct = eq.profits[ii] / eq.profits[jj];
  return r;
}

nlohmann::json to_json(const Equilibrium& eq) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"efforts", vec(eq.efforts)},
          {"quantities", vec(eq.quantities)},
          {"marginal_costs", vec(eq.marginal_costs)},
          {"profits", vec(eq.profits)},
          {"cs", eq.consumer_surplus},
          {"ps", eq.producer_surplus},
          {"welfare", eq.welfare},
          {"residual_norm", eq.residual_norm}};
}

}  // namespace rdnet
