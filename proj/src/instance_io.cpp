#include "rdnet/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "rdnet/error.hpp"

namespace rdnet {

namespace {

double required_number(const nlohmann::json& j, const char* key, std::vector<std::string>& errs) {
  auto it = j.find(key);
  if (it == j.end()) {
    errs.push_back(std::string("missing key '") + key + "'");
    return 0.0;
  }
  if (!it->is_number()) {
    errs.push_back(std::string("key '") + key + "' must be a number");
    return 0.0;
  }
  return it->get<double>();
}

}  // namespace

InstanceFile instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError({"instance must be a JSON object"});
  std::vector<std::string> errs;
  MarketParams params;
  params.alpha = required_number(j, "alpha", errs);
  params.c_bar = required_number(j, "c_bar", errs);
  params.phi = required_number(j, "phi", errs);

  std::optional<TwoTypeConfig> two_type;
  if (auto it = j.find("two_type"); it != j.end()) {
    if (!it->is_object()) {
      errs.push_back("two_type must be an object");
    } else {
      TwoTypeConfig cfg;
      const double n = required_number(*it, "n", errs);
      cfg.rho = required_number(*it, "rho", errs);
      cfg.theta_low = required_number(*it, "theta_low", errs);
      if (!(n >= 1.0) || n != static_cast<double>(static_cast<std::size_t>(n)))
        errs.push_back("two_type.n must be a positive integer");
      else
        cfg.n = static_cast<std::size_t>(n);
      two_type = cfg;
    }
  }

  std::vector<double> thetas;
  if (auto it = j.find("thetas"); it != j.end()) {
    if (!it->is_array()) {
      errs.push_back("thetas must be an array");
    } else {
      for (const auto& v : *it) {
        if (!v.is_number()) {
          errs.push_back("thetas must contain only numbers");
          break;
        }
        thetas.push_back(v.get<double>());
      }
    }
  } else if (!two_type) {
    errs.push_back("one of 'thetas' or 'two_type' is required");
  }

  if (!errs.empty()) throw DomainError(std::move(errs));

  if (thetas.empty() && two_type) {
    auto p = two_type->profile();
    thetas.assign(p.values().begin(), p.values().end());
  } else if (two_type && thetas.size() != two_type->n) {
    throw DomainError({"thetas length does not match two_type.n"});
  }
  if (two_type) (void)two_type->n_high();

  return InstanceFile{validate_instance(params, thetas), two_type};
}

InstanceFile parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError({std::string("malformed JSON: ") + e.what()});
  }
  return instance_from_json(j);
}

InstanceFile load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError({"cannot open instance file " + path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

nlohmann::json to_json(const ValidatedInstance& inst, const std::optional<TwoTypeConfig>& two_type) {
  nlohmann::json j;
  j["alpha"] = inst.params().alpha;
  j["c_bar"] = inst.params().c_bar;
  j["phi"] = inst.params().phi;
  j["thetas"] = std::vector<double>(inst.profile().values().begin(), inst.profile().values().end());
  if (two_type) {
    j["two_type"] = {{"n", two_type->n}, {"rho", two_type->rho}, {"theta_low", two_type->theta_low}};
  }
  return j;
}

}  // namespace rdnet
