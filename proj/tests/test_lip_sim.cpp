#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dcm/lip_sim.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

std::vector<Footstep> straight(double length = 2.0)
{
  const UnicycleParams u;
  return plan_footsteps(sample_unicycle(StraightLine{length, 0.28}, u), u);
}

/// Lateral push at mid single support of stance 4 (left), toward the swing side.
SimSettings pushed_settings()
{
  SimSettings s;
  s.pushes.push_back({2.41, 0.05, PlanarVec(0.0, -150.0)});
  return s;
}

} // namespace

TEST_CASE("step_sim")
{
  const LipParams p = LipParams::with_time_constant(0.2325);
  const double b = p.time_constant();

  SUBCASE("open loop divergence doubles every b ln 2")
  {
    SimState s;
    s.dcm.xi = {0.01, 0.0};
    const double t2 = b * std::numbers::ln2;
    const int n = 1000;
    for (int i = 0; i < n; ++i)
      s = step_sim(s, PlanarVec::Zero(), {}, t2 / n, p);
    CHECK(s.dcm.xi.x() == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(t2 == doctest::Approx(0.161).epsilon(2e-3));
  }

  SUBCASE("fixed point")
  {
    SimState s;
    s.dcm.xi = s.dcm.com = {0.3, -0.1};
    for (int i = 0; i < 100; ++i)
      s = step_sim(s, PlanarVec(0.3, -0.1), {}, 0.01, p);
    CHECK((s.dcm.xi - PlanarVec(0.3, -0.1)).norm() == 0.0);
    CHECK((s.dcm.com - PlanarVec(0.3, -0.1)).norm() == 0.0);
    CHECK(s.time == doctest::Approx(1.0));
  }

  SUBCASE("push impulse")
  {
    const std::vector<PushEvent> push{{0.0, 0.05, PlanarVec(150.0, 0.0)}};
    SimState s;
    for (int i = 0; i < 5; ++i)
      s = step_sim(s, PlanarVec::Zero(), push, 0.01, p);
    const double expected = b / p.mass() * 150.0 * 0.05;
    CHECK(expected == doctest::Approx(0.053).epsilon(0.01));
    CHECK(s.dcm.xi.x() == doctest::Approx(expected).epsilon(0.1));
    // exact solution of the forced linear ODE
    const double exact = b / p.mass() * 150.0 * b * (std::exp(0.05 / b) - 1.0);
    CHECK(s.dcm.xi.x() == doctest::Approx(exact).epsilon(1e-8));
  }

  SUBCASE("fourth order convergence")
  {
    const PlanarVec vrp(0.02, 0.01);
    SimState s0;
    s0.dcm.xi = {0.05, -0.03};
    s0.dcm.com = {0.0, 0.0};
    auto exact = [&](double t) {
      // com obeys x' = (xi - x)/b with xi = vrp + e^{t/b}(xi0 - vrp)
      const PlanarVec c = s0.dcm.xi - vrp;
      const PlanarVec xi = vrp + std::exp(t / b) * c;
      const PlanarVec com = vrp + 0.5 * std::exp(t / b) * c + (s0.dcm.com - vrp - 0.5 * c) * std::exp(-t / b);
      return std::make_pair(xi, com);
    };
    auto error = [&](double dt) {
      SimState s = s0;
      const int n = static_cast<int>(std::lround(0.5 / dt));
      for (int i = 0; i < n; ++i)
        s = step_sim(s, vrp, {}, dt, p);
      const auto [xi, com] = exact(0.5);
      return (s.dcm.xi - xi).norm() + (s.dcm.com - com).norm();
    };
    const double ratio = error(0.02) / error(0.01);
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
  }

  SUBCASE("non-positive dt")
  {
    CHECK_THROWS_AS(step_sim(SimState{}, PlanarVec::Zero(), {}, 0.0, p), std::invalid_argument);
  }
}

TEST_CASE("push events")
{
  const PushEvent e{1.0, 0.05, PlanarVec(10.0, 0.0)};
  CHECK_FALSE(e.active_at(0.999));
  CHECK(e.active_at(1.0));
  CHECK(e.active_at(1.049));
  CHECK_FALSE(e.active_at(1.05));
  const std::vector<PushEvent> two{e, {1.02, 0.1, PlanarVec(0.0, 5.0)}};
  CHECK(total_push(two, 1.03) == PlanarVec(10.0, 5.0));
  CHECK(total_push(two, 2.0) == PlanarVec::Zero());
  CHECK_THROWS_AS((PushEvent{0.0, 0.0, PlanarVec::Zero()}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PushEvent{0.0, 0.1, PlanarVec(NAN, 0.0)}.validate()), std::invalid_argument);
}

TEST_CASE("phase_at")
{
  const auto steps = straight();
  const double d = 0.106;
  Phase ph = phase_at(steps, d, 0.0);
  CHECK(ph.kind == PhaseKind::DoubleSupport);
  CHECK(ph.stance == 1);

  ph = phase_at(steps, d, d + 0.01);
  CHECK(ph.kind == PhaseKind::SingleSupport);
  CHECK(ph.stance == 1);
  CHECK(ph.elapsed == doctest::Approx(0.01));
  CHECK(ph.duration == doctest::Approx(steps[2].impact_time - d));

  ph = phase_at(steps, d, steps[3].impact_time + 0.02);
  CHECK(ph.kind == PhaseKind::DoubleSupport);
  CHECK(ph.stance == 3);
  CHECK(ph.elapsed == doctest::Approx(0.02));

  ph = phase_at(steps, d, steps.back().impact_time + 5.0);
  CHECK(ph.kind == PhaseKind::DoubleSupport);
  CHECK(ph.stance == steps.size() - 1);
  CHECK(std::isinf(ph.duration));
}

TEST_CASE("detect_fall")
{
  SimState s;
  const FallCheck check;
  CHECK_FALSE(detect_fall(s, PlanarVec::Zero(), 0, check));
  s.dcm.xi = {1.0, 0.0};
  CHECK(detect_fall(s, PlanarVec::Zero(), 0, check));
  s.dcm.xi = {0.1, 0.0};
  CHECK_FALSE(detect_fall(s, PlanarVec::Zero(), 2, check));
  CHECK(detect_fall(s, PlanarVec::Zero(), 3, check));
  s.dcm.xi = {NAN, 0.0};
  CHECK(detect_fall(s, PlanarVec::Zero(), 0, check));
}

TEST_CASE("controlled error never grows toward a static reference")
{
  const LipParams p;
  const ControllerGains k;
  SimState s;
  s.dcm.xi = {0.04, -0.03};
  double last = s.dcm.xi.norm();
  for (int i = 0; i < 300; ++i) {
    s = step_sim(s, vrp_command<double>(s.dcm.xi, PlanarVec::Zero(), PlanarVec::Zero(), k, p), {}, 0.01, p);
    CHECK(s.dcm.xi.norm() <= last);
    last = s.dcm.xi.norm();
  }
}

TEST_CASE("standing still")
{
  const UnicycleParams u;
  const auto steps = plan_footsteps(sample_unicycle(StraightLine{0.0, 0.28}, u), u);
  const SimLog log = run_closed_loop(steps, SimSettings{});
  CHECK_FALSE(log.fell);
  for (const auto& s : log.samples)
    CHECK((s.xi - s.xi_ref).norm() < 1e-6);
  CHECK(log.adapter_cycles == 0);
}

TEST_CASE("unperturbed walk keeps the nominal footprints")
{
  const auto steps = straight();
  const SimSettings settings;
  const SimLog log = run_closed_loop(steps, settings);
  CHECK_FALSE(log.fell);
  CHECK(log.adapter_cycles > 0);
  CHECK(log.adapter_failures == 0);
  REQUIRE(log.footprints.size() == steps.size());
  for (const auto& f : log.footprints) {
    CHECK((f.adapted - f.nominal).norm() <= 1e-6);
    CHECK(std::abs(f.adapted_impact_t - f.nominal_impact_t) <= 1e-6);
    CHECK_FALSE(f.was_adapted);
  }
  double worst = 0.0;
  for (const auto& s : log.samples)
    worst = std::max(worst, (s.xi - s.xi_ref).norm());
  CHECK(worst <= 1e-6);
}

TEST_CASE("phase bookkeeping")
{
  const SimSettings settings = pushed_settings();
  const SimLog log = run_closed_loop(straight(), settings);
  REQUIRE_FALSE(log.fell);

  // samples tile the run at the control period
  for (std::size_t i = 0; i < log.samples.size(); ++i)
    CHECK(log.samples[i].t == doctest::Approx(i * settings.dt).epsilon(1e-12));
  double ss = 0.0, ds = 0.0;
  for (const auto& s : log.samples)
    (s.phase == 1 ? ss : ds) += settings.dt;
  CHECK(ss + ds == doctest::Approx(log.samples.size() * settings.dt).epsilon(1e-9));

  // each single-to-double switch lands within one period of an adapted touchdown
  for (std::size_t i = 1; i < log.samples.size(); ++i) {
    if (!(log.samples[i - 1].phase == 1 && log.samples[i].phase == 0))
      continue;
    double nearest = 1e9;
    for (const auto& f : log.footprints)
      nearest = std::min(nearest, std::abs(f.adapted_impact_t - log.samples[i].t));
    CHECK(nearest <= settings.dt + 1e-9);
  }

  // swing foot is on the ground outside single support and lands on the adapted target
  for (const auto& s : log.samples) {
    CHECK(s.swing_z >= 0.0);
    if (s.phase == 0)
      CHECK(s.swing_z == 0.0);
  }
}

TEST_CASE("lateral push")
{
  SimSettings settings = pushed_settings();
  const SimLog on = run_closed_loop(straight(), settings);
  CHECK_FALSE(on.fell);
  int adapted = 0;
  for (const auto& f : on.footprints)
    adapted += f.was_adapted;
  CHECK(adapted >= 1);

  settings.adapter_enabled = false;
  const SimLog off = run_closed_loop(straight(), settings);
  CHECK(off.fell);
  CHECK(off.fall_time > 2.41);
  CHECK(off.fall_time < 2.41 + 2.0);

  SUBCASE("frozen offset target also recovers")
  {
    SimSettings frozen = pushed_settings();
    frozen.adapter.refresh_gamma = false;
    CHECK_FALSE(run_closed_loop(straight(), frozen).fell);
  }
}

TEST_CASE("deterministic logs")
{
  const SimSettings settings = pushed_settings();
  const SimLog a = run_closed_loop(straight(), settings);
  const SimLog b = run_closed_loop(straight(), settings);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].xi == b.samples[i].xi);
    CHECK(a.samples[i].vrp_cmd == b.samples[i].vrp_cmd);
    CHECK(a.samples[i].swing == b.samples[i].swing);
  }
  for (std::size_t i = 0; i < a.footprints.size(); ++i) {
    CHECK(a.footprints[i].adapted == b.footprints[i].adapted);
    CHECK(a.footprints[i].adapted_impact_t == b.footprints[i].adapted_impact_t);
  }
}

TEST_CASE("settings validation")
{
  SimSettings s;
  s.dt = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = SimSettings{};
  s.pushes.push_back({0.0, -1.0, PlanarVec::Zero()});
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_closed_loop(std::vector<Footstep>(1), SimSettings{}), std::invalid_argument);
}
