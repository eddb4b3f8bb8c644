#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "topoalign/error.hpp"

namespace topoalign {

struct SchedulerConfig {
  double gamma = 0.95;
  double alpha = 0.5;
  double eps = 1e-6;
  std::int64_t warmup_steps = 10;

  void validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be in [0,1)");
    if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    if (warmup_steps < 0) throw Error(ErrorKind::InvalidArgument, "warmup_steps must be non-negative");
  }
};

struct SchedulerState {
  double ema_dpo = 0.0;
  double ema_tpo = 0.0;
  std::int64_t step = 0;
  double lambda_dyn = 0.0;

  bool operator==(const SchedulerState&) const = default;
};

// One EMA update. The first observation seeds both accumulators directly;
// lambda_dyn = alpha * tanh((|ema_dpo| + eps) / (|ema_tpo| + eps)) once the
// warmup is over, 0 before that.
inline SchedulerState scheduler_update(const SchedulerState& state, const SchedulerConfig& cfg,
                                       double loss_dpo, double loss_tpo) {
  if (!std::isfinite(loss_dpo) || !std::isfinite(loss_tpo))
    throw Error(ErrorKind::NonFiniteLoss, "scheduler received a non-finite loss");
  SchedulerState next = state;
  if (state.step == 0) {
    next.ema_dpo = loss_dpo;
    next.ema_tpo = loss_tpo;
  } else {
    next.ema_dpo = cfg.gamma * state.ema_dpo + (1.0 - cfg.gamma) * loss_dpo;
    next.ema_tpo = cfg.gamma * state.ema_tpo + (1.0 - cfg.gamma) * loss_tpo;
  }
  if (state.step >= cfg.warmup_steps) {
    const double ratio = (std::abs(next.ema_dpo) + cfg.eps) / (std::abs(next.ema_tpo) + cfg.eps);
    next.lambda_dyn = cfg.alpha * std::tanh(ratio);
    // tanh rounds to exactly 1 for large ratios; keep lambda strictly below alpha.
    if (next.lambda_dyn >= cfg.alpha) next.lambda_dyn = std::nextafter(cfg.alpha, 0.0);
  } else {
    next.lambda_dyn = 0.0;
  }
  next.step = state.step + 1;
  return next;
}

struct LossSample {
  std::int64_t step = 0;
  double dpo = 0.0;
  double tpo = 0.0;
};

// Replays a loss trace, returning the state after each sample.
inline std::vector<SchedulerState> simulate_schedule(const std::vector<LossSample>& trace,
                                                     const SchedulerConfig& cfg) {
  cfg.validate();
  std::vector<SchedulerState> out;
  out.reserve(trace.size());
  SchedulerState state;
  for (const auto& s : trace) {
    state = scheduler_update(state, cfg, s.dpo, s.tpo);
    out.push_back(state);
  }
  return out;
}

}  // namespace topoalign
