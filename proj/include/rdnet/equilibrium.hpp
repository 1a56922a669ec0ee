#pragma once

#include <Eigen/Dense>
#include <optional>

#include "json.hpp"
#include "rdnet/graph.hpp"
#include "rdnet/model.hpp"

namespace rdnet {

/// Stacked first-order conditions A(G) e = (alpha - c_bar) 1 for the
/// second-stage effort game:
///   A_ii = (n+1)^2 phi / (theta_i (n - d_i)) - theta_i (n - d_i)
///   A_ij = (1 + d_j) theta_j - (n+1) G_ij theta_j          (j != i)
struct FocMatrix {
  Eigen::MatrixXd entries;
  double rhs_scale = 1.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  /// |A_jj| > sum_{i != j} |A_ij| for every column j.
  bool column_dominant() const;
  /// |A_ii| > sum_{j != i} |A_ij| for every row i.
  bool row_dominant() const;
  /// inf-norm of A e - rhs_scale * 1.
  double residual(const Eigen::VectorXd& efforts) const;
};

FocMatrix build_foc_matrix(const Network& net, const ProductivityProfile& profile, const MarketParams& params);

/// Relative tolerance on ||A e - b||_inf, scaled by max(1, ||A||_inf ||e||_inf).
inline constexpr double kResidualTol = 1e-9;
/// Efforts at or below this are reported as NonPositiveEffort.
inline constexpr double kEffortFloor = 1e-12;
/// Pivots below this multiple of ||A||_inf are reported as SingularSystem.
inline constexpr double kPivotTol = 1e-12;

/// Dense LU with partial pivoting. Throws SolverError (SingularSystem,
/// NonPositiveEffort).
Eigen::VectorXd solve_efforts(const FocMatrix& foc);

/// Complete-network efforts in closed form:
///   e_i = (alpha - c_bar) theta_i / ((n+1)^2 phi - sum_j theta_j^2).
Eigen::VectorXd closed_form_complete(const ProductivityProfile& profile, const MarketParams& params);

/// Closed-form efforts on the complete network with the single link (k, l) removed.
Eigen::VectorXd closed_form_complete_minus_link(const ProductivityProfile& profile, const MarketParams& params,
                                                FirmIndex k, FirmIndex l);

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iter = 100000;
  std::optional<Eigen::VectorXd> start;
};

struct FixedPointResult {
  Eigen::VectorXd efforts;
  int iterations = 0;
};

/// Simultaneous best-response iteration on the decomposed effort map
///   e_i <- theta_i eta_i / (phi - theta_i^2 eta_i^2) * { (alpha - c_bar)/(n+1)
///          + sum_{j in N_i} eta_j theta_j e_j - sum_{k notin N_i} (1 - eta_k) theta_k e_k }
/// until successive iterates differ by at most tol in the inf-norm. Built
/// without going through FocMatrix so it can serve as an oracle for it.
/// Throws SolverError(NoConvergence).
FixedPointResult best_response_fixed_point(const Network& net, const ProductivityProfile& profile,
                                           const MarketParams& params, const FixedPointOptions& opts = {});

struct Equilibrium {
  Eigen::VectorXd efforts;
  Eigen::VectorXd quantities;
  Eigen::VectorXd marginal_costs;
  Eigen::VectorXd profits;
  double consumer_surplus = 0.0;
  double producer_surplus = 0.0;
  double welfare = 0.0;
  double residual_norm = 0.0;
};

/// Relative tolerance between the two profit routes (q^2 - phi e^2 and the
/// effort-only form).
inline constexpr double kProfitCrossCheckTol = 1e-9;

/// Full subgame-perfect outcome for a fixed network. Throws SolverError.
Equilibrium equilibrium(const Network& net, const ProductivityProfile& profile, const MarketParams& params);

/// Quantities from marginal costs: q_i = (alpha - n c_i + sum_{j != i} c_j) / (n + 1).
Eigen::VectorXd cournot_quantities(const Eigen::VectorXd& marginal_costs, double alpha);

/// c_i = c_bar - theta_i e_i - sum_{j in N_i} theta_j e_j.
Eigen::VectorXd marginal_costs(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                               const Eigen::VectorXd& efforts);

struct PairRatios {
  double effort_closed_form = 0.0;
  double profit_closed_form = 0.0;
  double effort_direct = 0.0;
  double profit_direct = 0.0;
};

/// Effort and profit ratios of firm i over firm j for a symmetric-position
/// pair, in closed form and from a direct solve. Throws NotSymmetric.
PairRatios symmetric_pair_ratios(const Network& net, const ProductivityProfile& profile, const MarketParams& params,
                                 FirmIndex i, FirmIndex j);

nlohmann::json to_json(const Equilibrium& eq);

}  // namespace rdnet
