#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rdnet {

using FirmIndex = std::size_t;

/// Productivities below this are rejected: the FOC diagonal grows as 1/theta.
inline constexpr double kMinTheta = 1e-6;

/// Linear inverse demand p(q) = alpha - sum q, baseline marginal cost c_bar,
/// and the quadratic R&D cost coefficient phi of the most productive firm.
struct MarketParams {
  double alpha = 2.0;
  double c_bar = 1.0;
  double phi = 1.0;

  double markup() const noexcept { return alpha - c_bar; }

  /// Human-readable list of violated invariants; empty when valid.
  std::vector<std::string> violations() const;

  bool operator==(const MarketParams&) const = default;
};

/// Sufficient cost bound for a unique, strictly positive effort profile on
/// every network with n firms: n [2 (n-1)^2 + n] / (n+1)^2.
double phi_lower_bound(std::size_t n);

/// Relative R&D productivities theta_i in (0, 1].
class ProductivityProfile {
 public:
  /// Throws DomainError listing every out-of-range entry.
  explicit ProductivityProfile(std::vector<double> thetas);

  std::size_t size() const noexcept { return thetas_.size(); }
  double operator[](FirmIndex i) const { return thetas_[i]; }
  double at(FirmIndex i) const { return thetas_.at(i); }
  std::span<const double> values() const noexcept { return thetas_; }

  /// max theta == 1 exactly.
  bool normalized() const noexcept;

  /// Copy with firm i's productivity replaced.
  ProductivityProfile with(FirmIndex i, double theta) const;

  static std::vector<std::string> violations(std::span<const double> thetas);

  bool operator==(const ProductivityProfile&) const = default;

 private:
  std::vector<double> thetas_;
};

enum class FirmType { High, Low };

/// n_H = rho n firms at theta = 1 (indices [0, n_H)), the rest at theta_low.
struct TwoTypeConfig {
  std::size_t n = 2;
  double rho = 0.5;
  double theta_low = 0.5;

  /// Throws DomainError when rho n is not an integer or theta_low is out of range.
  std::size_t n_high() const;
  std::size_t n_low() const { return n - n_high(); }

  std::vector<FirmType> types() const;
  ProductivityProfile profile() const;

  bool operator==(const TwoTypeConfig&) const = default;
};

/// Result of validate_instance. Immutable once built.
class ValidatedInstance {
 public:
  const MarketParams& params() const noexcept { return params_; }
  const ProductivityProfile& profile() const noexcept { return profile_; }
  std::size_t n() const noexcept { return profile_.size(); }
  bool phi_bound_satisfied() const noexcept { return phi_bound_satisfied_; }

 private:
  friend ValidatedInstance validate_instance(const MarketParams&, std::span<const double>);
  ValidatedInstance(MarketParams params, ProductivityProfile profile, bool bound_ok)
      : params_(params), profile_(std::move(profile)), phi_bound_satisfied_(bound_ok) {}

  MarketParams params_;
  ProductivityProfile profile_;
  bool phi_bound_satisfied_;
};

/// Collects violations across both arguments and throws a single DomainError.
ValidatedInstance validate_instance(const MarketParams& params, std::span<const double> thetas);
ValidatedInstance validate_instance(const MarketParams& params, const ProductivityProfile& profile);

}  // namespace rdnet
