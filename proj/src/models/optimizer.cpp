#include <cmath>

#include <fmt/format.h>

#include "arvote/error.hpp"
#include "arvote/models.hpp"

namespace arvote {

OptimizerState OptimizerState::zeros_like(const Parameters& params) {
  OptimizerState s;
  for (const auto& block : params) {
    s.m.emplace_back(block.values.size(), 0.0);
    s.v.emplace_back(block.values.size(), 0.0);
  }
  return s;
}

void adamw_step(Parameters& params, const Parameters& grads, OptimizerState& state, double learning_rate,
                const AdamWConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("adamw_step: parameter, gradient and state block counts differ");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto n = params[b].values.size();
    if (grads[b].values.size() != n || state.m[b].size() != n || state.v[b].size() != n) {
      throw ContractError(fmt::format("adamw_step: shape mismatch in block '{}'", params[b].name));
    }
    for (double g : grads[b].values) {
      if (!std::isfinite(g)) throw TrainingError(fmt::format("non-finite gradient in parameter block '{}'", params[b].name));
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& theta = params[b].values;
    const auto& g = grads[b].values;
    auto& m = state.m[b];
    auto& v = state.v[b];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) + cfg.weight_decay * theta[i]);
    }
  }
}

}  // namespace arvote
