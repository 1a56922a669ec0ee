#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "rdnet/model.hpp"

namespace rdnet {

/// Parsed contents of an instance file: {alpha, c_bar, phi, thetas, two_type?}.
/// When `thetas` is absent it is derived from `two_type`.
struct InstanceFile {
  ValidatedInstance instance;
  std::optional<TwoTypeConfig> two_type;
};

/// Throws DomainError on schema or invariant violations (malformed JSON included).
InstanceFile instance_from_json(const nlohmann::json& j);
InstanceFile parse_instance(const std::string& text);
InstanceFile load_instance(const std::filesystem::path& path);

nlohmann::json to_json(const ValidatedInstance& inst,
                       const std::optional<TwoTypeConfig>& two_type = std::nullopt);

}  // namespace rdnet
