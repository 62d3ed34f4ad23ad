#include <gtest/gtest.h>

#include "trafwarden/session.hpp"

using namespace trafwarden;

namespace {

ScenarioConfig short_config(std::uint64_t seed = 1) {
  ScenarioConfig cfg;
  cfg.duration = 120.0;
  cfg.seed = seed;
  cfg.arrival_rate = {0.15, 0.1, 0.1, 0.05};
  return cfg;
}

// A small operator session: gestures at fixed times, one of them unsafe.
Session operator_session(const ScenarioConfig& cfg) {
  Session s(cfg, ControlMode::WizardOfOz);
  while (!s.finished()) {
    const double t = s.state().clock;
    auto at = [&](double when) { return std::abs(t - when) < cfg.dt / 2.0; };
    if (at(1.0)) s.submit_operator(TrafficSignal::LeftRightStop);
    if (at(25.0)) s.submit_operator(TrafficSignal::ChangeSign);
    if (at(28.0)) s.submit_operator(TrafficSignal::StartLeft);
    if (at(40.0)) s.submit_operator(TrafficSignal::LeftRightStop);  // no clearance
    if (at(41.0)) s.submit_operator(TrafficSignal::AllStop);
    if (at(50.0)) s.submit_operator(TrafficSignal::FrontBehindStop);
    s.advance();
  }
  return s;
}

}  // namespace

TEST(OperatorCommand, PairStopsCarryOppositeGrant) {
  EXPECT_EQ(operator_command(TrafficSignal::LeftRightStop, 0.0).grant, ApproachPair::FrontBehind);
  EXPECT_EQ(operator_command(TrafficSignal::FrontBehindStop, 0.0).grant, ApproachPair::LeftRight);
  for (auto s : {TrafficSignal::FrontStop, TrafficSignal::BehindStop, TrafficSignal::AllStop,
                 TrafficSignal::StartLeft, TrafficSignal::StartRight, TrafficSignal::ChangeSign}) {
    EXPECT_FALSE(operator_command(s, 0.0).grant);
  }
}

TEST(Session, WizardOfOzWarnsButApplies) {
  auto cfg = short_config();
  Session s(cfg, ControlMode::WizardOfOz);
  EXPECT_EQ(s.submit_operator(TrafficSignal::LeftRightStop).verdict, Verdict::Accept);
  for (int i = 0; i < 100; ++i) s.advance();
  const auto v = s.submit_operator(TrafficSignal::StartLeft);
  EXPECT_EQ(v.verdict, Verdict::AcceptWithWarning);
  EXPECT_TRUE(is_conflicting(s.state().commanded));
  ASSERT_EQ(s.trace().size(), 2U);
  EXPECT_EQ(s.trace().back().verdict, Verdict::AcceptWithWarning);
  EXPECT_FALSE(s.active_warnings().empty());
}

TEST(Session, OperatorRejectedInAutonomousModeAndNotTraced) {
  Session s(short_config(), ControlMode::QueuePriority);
  s.advance();
  const auto before = s.trace().size();
  const auto v = s.submit_operator(TrafficSignal::StartRight);
  EXPECT_EQ(v.verdict, Verdict::Reject);
  EXPECT_EQ(s.trace().size(), before);
}

TEST(Session, SwitchingToAutonomousAfterTrafficStartsWithClearance) {
  Session s(short_config(), ControlMode::WizardOfOz);
  s.submit_operator(TrafficSignal::FrontBehindStop);
  for (int i = 0; i < 200; ++i) s.advance();
  s.set_mode(ControlMode::RoundRobin);
  const auto before = s.trace().size();
  for (int i = 0; i < 20 && s.trace().size() == before; ++i) s.advance();
  ASSERT_GT(s.trace().size(), before);
  EXPECT_EQ(s.trace().back().command.signal, TrafficSignal::ChangeSign);
  EXPECT_EQ(s.trace().back().command.source, CommandSource::Policy);
  s.run_to_end();
  EXPECT_EQ(s.state().conflicts, 0U);
  for (const auto& e : s.trace()) EXPECT_NE(e.verdict, Verdict::Reject);
}

TEST(Session, SnapshotsAreMonotoneAndFlagConflicts) {
  auto cfg = short_config();
  Session s(cfg, ControlMode::WizardOfOz);
  std::uint64_t seq = 0;
  double clock = -1.0;
  while (!s.finished()) {
    const double t = s.state().clock;
    if (std::abs(t - 2.0) < cfg.dt / 2) s.submit_operator(TrafficSignal::LeftRightStop);
    if (std::abs(t - 20.0) < cfg.dt / 2) s.submit_operator(TrafficSignal::StartRight);
    s.advance();
    const auto snap = s.snapshot();
    ASSERT_GT(snap.seq, seq);
    ASSERT_GE(snap.clock, clock);
    seq = snap.seq;
    clock = snap.clock;
    if (is_conflicting(snap.effective.value)) {
      bool flagged = false;
      for (const auto& w : snap.warnings) flagged |= w.starts_with("conflict");
      ASSERT_TRUE(flagged) << "t=" << snap.clock;
    }
  }
}

TEST(Session, SnapshotCarriesFkOfCurrentPose) {
  Session s(short_config(), ControlMode::WizardOfOz);
  s.submit_operator(TrafficSignal::StartLeft);
  for (int i = 0; i < 10; ++i) s.advance();
  const auto snap = s.snapshot();
  EXPECT_EQ(snap.current_signal, TrafficSignal::StartLeft);
  const auto fk = forward_kinematics(snap.robot_pose);
  EXPECT_EQ(snap.fk.left.fingertip, fk.left.fingertip);
  EXPECT_NE(snap.robot_pose, RobotPose::rest());
  EXPECT_NE(snap.robot_pose, signal_target_pose(TrafficSignal::StartLeft));
}

TEST(Session, HeadlessRunsAreDeterministic) {
  const auto cfg = short_config(9);
  for (auto mode : {ControlMode::RoundRobin, ControlMode::QueuePriority}) {
    const auto a = run_headless(cfg, mode);
    const auto b = run_headless(cfg, mode);
    EXPECT_EQ(a.csv, b.csv);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.metrics, b.metrics);
  }
}

TEST(Replay, ReproducesOperatorSession) {
  const auto cfg = short_config(3);
  const auto s = operator_session(cfg);
  const auto text = s.trace_text();
  const auto r = replay(cfg, text);
  EXPECT_EQ(r.csv, metrics_csv(s.metrics()));
  EXPECT_EQ(r.trace, text);
}

TEST(Replay, ReproducesPolicyRun) {
  const auto cfg = short_config(4);
  const auto run = run_headless(cfg, ControlMode::QueuePriority);
  const auto r = replay(cfg, run.trace);
  EXPECT_EQ(r.csv, run.csv);
}

TEST(Replay, SeedMismatchFailsBeforeRunning) {
  const auto cfg = short_config(3);
  const auto text = operator_session(cfg).trace_text();
  auto other = cfg;
  other.seed = 4;
  try {
    replay(other, text);
    FAIL() << "expected a mismatch";
  } catch (const TraceError& e) {
    EXPECT_NE(std::string(e.what()).find("scenario"), std::string::npos);
  }
  auto changed = cfg;
  changed.joint_speed = 2.0;
  EXPECT_THROW(replay(changed, text), TraceError);
}

TEST(Replay, TamperedMetricsDetected) {
  const auto cfg = short_config(3);
  auto text = operator_session(cfg).trace_text();
  const auto pos = text.find("metrics_hash=") + 13;
  text[pos] = text[pos] == '0' ? '1' : '0';
  EXPECT_THROW(replay(cfg, text), TraceError);
}

TEST(Replay, EmptyTraceIsAllStopRun) {
  const auto cfg = short_config(5);
  Session idle(cfg, ControlMode::WizardOfOz);
  idle.run_to_end();
  const auto text = idle.trace_text();
  const auto r = replay(cfg, text);
  EXPECT_EQ(r.csv, metrics_csv(idle.metrics()));
  EXPECT_EQ(r.metrics.total.crossed, 0U);
  EXPECT_EQ(r.metrics.conflicts, 0U);
}
