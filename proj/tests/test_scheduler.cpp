#include <gtest/gtest.h>

#include <cmath>

#include "topoalign/scheduler.hpp"

using namespace topoalign;

namespace {

SchedulerState run_constant(const SchedulerConfig& cfg, double dpo, double tpo, int steps) {
  SchedulerState s;
  for (int i = 0; i < steps; ++i) s = scheduler_update(s, cfg, dpo, tpo);
  return s;
}

}  // namespace

TEST(Scheduler, FirstObservationSeedsEma) {
  SchedulerConfig cfg;
  const auto s = scheduler_update({}, cfg, 0.8, 0.1);
  EXPECT_EQ(s.ema_dpo, 0.8);
  EXPECT_EQ(s.ema_tpo, 0.1);
  EXPECT_EQ(s.step, 1);
}

TEST(Scheduler, EmaRecurrence) {
  SchedulerConfig cfg;
  auto s = scheduler_update({}, cfg, 1.0, 2.0);
  s = scheduler_update(s, cfg, 3.0, 0.0);
  EXPECT_DOUBLE_EQ(s.ema_dpo, 0.95 * 1.0 + 0.05 * 3.0);
  EXPECT_DOUBLE_EQ(s.ema_tpo, 0.95 * 2.0);
}

TEST(Scheduler, WarmupGivesExactZeros) {
  SchedulerConfig cfg;
  cfg.warmup_steps = 10;
  SchedulerState s;
  for (int i = 0; i < 10; ++i) {
    s = scheduler_update(s, cfg, 0.6 + i, 0.3);
    EXPECT_EQ(s.lambda_dyn, 0.0) << "step " << i;
  }
  s = scheduler_update(s, cfg, 0.6, 0.3);
  EXPECT_GT(s.lambda_dyn, 0.0);
}

TEST(Scheduler, EqualLossesConvergeToTanhOne) {
  SchedulerConfig cfg;
  cfg.warmup_steps = 0;
  const auto s = run_constant(cfg, 0.4, 0.4, 500);
  EXPECT_NEAR(s.lambda_dyn, 0.5 * std::tanh(1.0), 1e-12);
}

TEST(Scheduler, FixedPointForUnequalLosses) {
  SchedulerConfig cfg;
  cfg.warmup_steps = 0;
  const auto s = run_constant(cfg, 0.6, 0.3, 500);
  EXPECT_NEAR(s.lambda_dyn, 0.5 * std::tanh((0.6 + 1e-6) / (0.3 + 1e-6)), 1e-9);
}

TEST(Scheduler, LambdaStaysBelowAlpha) {
  SchedulerConfig cfg;
  cfg.warmup_steps = 0;
  const auto s = run_constant(cfg, 1e6, 0.0, 3);
  EXPECT_LT(s.lambda_dyn, cfg.alpha);
  EXPECT_GE(s.lambda_dyn, 0.0);
  const auto z = run_constant(cfg, 0.0, 1e6, 3);
  EXPECT_GE(z.lambda_dyn, 0.0);
}

TEST(Scheduler, NonFiniteLossRejected) {
  SchedulerConfig cfg;
  try {
    scheduler_update({}, cfg, NAN, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteLoss);
  }
  EXPECT_THROW(scheduler_update({}, cfg, 0.1, INFINITY), Error);
}

TEST(Scheduler, ConfigValidation) {
  SchedulerConfig cfg;
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.alpha = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.warmup_steps = -1;
  EXPECT_THROW(simulate_schedule({}, cfg), Error);
}

TEST(Scheduler, SimulateMatchesStepping) {
  SchedulerConfig cfg;
  cfg.warmup_steps = 2;
  std::vector<LossSample> trace;
  for (int i = 0; i < 20; ++i) trace.push_back({i, 0.5 + 0.01 * i, 0.2 + 0.02 * i});
  const auto states = simulate_schedule(trace, cfg);
  ASSERT_EQ(states.size(), trace.size());
  SchedulerState s;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    s = scheduler_update(s, cfg, trace[i].dpo, trace[i].tpo);
    EXPECT_EQ(states[i], s);
  }
}
