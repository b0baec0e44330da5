#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "arvote/models.hpp"

namespace arvote::detail {

/// Runs the adapter with the given arguments and returns its exit status.
int run_adapter(const std::string& adapter, const std::vector<std::string>& args);

/// Adapter path from the environment; throws EnvironmentError when unset or
/// not executable.
std::string resolve_adapter();

PredictionSet predict_external(const FittedModel& model, const Dataset& data);

}  // namespace arvote::detail
