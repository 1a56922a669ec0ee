#include "rdnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdnet/error.hpp"

namespace rdnet {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) os << "; ";
    os << v[k];
  }
  return os.str();
}

}  // namespace

DomainError::DomainError(std::vector<std::string> violations)
    : std::invalid_argument(join_violations(violations)), violations_(std::move(violations)) {}

const char* to_string(SolverFailure kind) noexcept {
  switch (kind) {
    case SolverFailure::SingularSystem: return "SingularSystem";
    case SolverFailure::NonPositiveEffort: return "NonPositiveEffort";
    case SolverFailure::NoConvergence: return "NoConvergence";
    case SolverFailure::ProfitCrossCheckFailed: return "ProfitCrossCheckFailed";
  }
  return "Unknown";
}

SolverError::SolverError(SolverFailure kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

std::vector<std::string> MarketParams::violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(alpha)) out.push_back("alpha must be finite");
  if (!std::isfinite(c_bar)) out.push_back("c_bar must be finite");
  if (std::isfinite(alpha) && std::isfinite(c_bar) && !(alpha > c_bar))
    out.push_back("alpha must exceed c_bar");
  if (!std::isfinite(phi) || !(phi > 0.0)) out.push_back("phi must be positive and finite");
  return out;
}

double phi_lower_bound(std::size_t n) {
  const double nn = static_cast<double>(n);
  return nn * (2.0 * (nn - 1.0) * (nn - 1.0) + nn) / ((nn + 1.0) * (nn + 1.0));
}

std::vector<std::string> ProductivityProfile::violations(std::span<const double> thetas) {
  std::vector<std::string> out;
  if (thetas.empty()) out.push_back("thetas must be non-empty");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double t = thetas[i];
    if (!(t >= kMinTheta && t <= 1.0)) {
      std::ostringstream os;
      os << "theta[" << i << "] = " << t << " outside [" << kMinTheta << ", 1]";
      out.push_back(os.str());
    }
  }
  return out;
}

ProductivityProfile::ProductivityProfile(std::vector<double> thetas) : thetas_(std::move(thetas)) {
  if (auto v = violations(thetas_); !v.empty()) throw DomainError(std::move(v));
}

bool ProductivityProfile::normalized() const noexcept {
  return !thetas_.empty() && *std::max_element(thetas_.begin(), thetas_.end()) == 1.0;
}

ProductivityProfile ProductivityProfile::with(FirmIndex i, double theta) const {
  std::vector<double> t = thetas_;
  t.at(i) = theta;
  return ProductivityProfile(std::move(t));
}

std::size_t TwoTypeConfig::n_high() const {
  std::vector<std::string> v;
  if (n < 1) v.push_back("n must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) v.push_back("rho must lie in [0, 1]");
  if (!(theta_low >= kMinTheta && theta_low <= 1.0)) v.push_back("theta_low must lie in (0, 1]");
  const double count = rho * static_cast<double>(n);
  const double rounded = std::round(count);
  if (std::abs(count - rounded) > 1e-9) v.push_back("rho * n must be an integer");
  if (!v.empty()) throw DomainError(std::move(v));
  return static_cast<std::size_t>(rounded);
}

std::vector<FirmType> TwoTypeConfig::types() const {
  const std::size_t nh = n_high();
  std::vector<FirmType> out(n, FirmType::Low);
  std::fill_n(out.begin(), nh, FirmType::High);
  return out;
}

ProductivityProfile TwoTypeConfig::profile() const {
  const std::size_t nh = n_high();
  std::vector<double> t(n, theta_low);
  std::fill_n(t.begin(), nh, 1.0);
  return ProductivityProfile(std::move(t));
}

ValidatedInstance validate_instance(const MarketParams& params, std::span<const double> thetas) {
  auto v = params.violations();
  auto tv = ProductivityProfile::violations(thetas);
  v.insert(v.end(), tv.begin(), tv.end());
  if (!v.empty()) throw DomainError(std::move(v));
  ProductivityProfile profile(std::vector<double>(thetas.begin(), thetas.end()));
  const bool bound_ok = params.phi >= phi_lower_bound(profile.size());
  return ValidatedInstance(params, std::move(profile), bound_ok);
}

ValidatedInstance validate_instance(const MarketParams& params, const ProductivityProfile& profile) {
  return validate_instance(params, profile.values());
}

}  // namespace rdnet
