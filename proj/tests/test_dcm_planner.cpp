#include <doctest.h>

#include <random>

#include "dcm/dcm_planner.hpp"
#include "dcm/footstep_planner.hpp"
#include "dcm/support_polygon.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

PlanarVec integrate_constant_zmp(const PlanarVec& xi0, const PlanarVec& zmp, double T, const LipParams& p)
{
  const double b = p.time_constant();
  return oracle::rk4([&](double, const PlanarVec& xi) { return PlanarVec((xi - zmp) / b); }, xi0, 0.0, T, 1e-4);
}

double distance_to_segment(const PlanarVec& a, const PlanarVec& b, const PlanarVec& p)
{
  const PlanarVec ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).norm();
}

std::vector<Footstep> straight_walk()
{
  const UnicycleParams u;
  return plan_footsteps(sample_unicycle(StraightLine{1.5, 0.28}, u), u);
}

} // namespace

TEST_CASE("backward_recursion")
{
  const LipParams p = LipParams::with_time_constant(0.2325);

  SUBCASE("last segment ends on the last zmp")
  {
    const std::vector<PlanarVec> zmp{{0.1, -0.1}, {0.3, 0.2}};
    const std::vector<double> T{0.5};
    const auto b = backward_recursion(zmp, T, p);
    REQUIRE(b.size() == 1);
    CHECK(b[0].xi_eos == zmp[1]);
  }

  SUBCASE("equilibrium propagates")
  {
    const PlanarVec q(0.4, -0.2);
    const std::vector<PlanarVec> zmp(5, q);
    const std::vector<double> T{0.3, 0.5, 0.7, 0.9};
    for (const auto& bp : backward_recursion(zmp, T, p)) {
      CHECK((bp.xi_ios - q).norm() < 1e-15);
      CHECK((bp.xi_eos - q).norm() < 1e-15);
    }
  }

  SUBCASE("worked two-point chain")
  {
    const std::vector<PlanarVec> zmp{{0.0, 0.0}, {0.2, 0.0}};
    const std::vector<double> T{0.53};
    const auto b = backward_recursion(zmp, T, p);
    CHECK(b[0].xi_ios.x() == doctest::Approx(0.02046).epsilon(1e-3));
    CHECK((integrate_constant_zmp(b[0].xi_ios, zmp[0], 0.53, p) - b[0].xi_eos).norm() < 1e-8);
  }

  SUBCASE("chain links and forward consistency")
  {
    std::mt19937_64 rng(41);
    std::vector<PlanarVec> zmp;
    std::vector<double> T;
    for (int i = 0; i < 8; ++i) {
      zmp.emplace_back(oracle::uniform(rng, -0.3, 0.3), oracle::uniform(rng, -0.3, 0.3));
      if (i < 7)
        T.push_back(oracle::uniform(rng, 0.3, 1.0));
    }
    const auto b = backward_recursion(zmp, T, p);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (i > 0)
        CHECK(b[i - 1].xi_eos == b[i].xi_ios);
      CHECK((integrate_constant_zmp(b[i].xi_ios, zmp[i], T[i], p) - b[i].xi_eos).norm() < 1e-8);
    }
  }

  SUBCASE("pinned segment")
  {
    const std::vector<PlanarVec> zmp{{0, 0}, {0.2, 0.1}, {0.4, 0}};
    const std::vector<double> T{0.5, 0.5};
    const PlanarVec pinned(0.25, 0.2);
    const auto b = backward_recursion(zmp, T, p, PinnedEos{0, pinned});
    CHECK(b[0].xi_eos == pinned);
    CHECK(b[1].xi_eos == zmp[2]);
  }

  SUBCASE("bad input")
  {
    const std::vector<PlanarVec> one{{0, 0}};
    const std::vector<double> none;
    CHECK_THROWS(backward_recursion(one, none, p));
    const std::vector<PlanarVec> two{{0, 0}, {1, 0}};
    const std::vector<double> wrong{0.5, 0.5};
    CHECK_THROWS(backward_recursion(two, wrong, p));
    const std::vector<double> negative{-0.5};
    CHECK_THROWS(backward_recursion(two, negative, p));
  }
}

TEST_CASE("eval_ss")
{
  const LipParams p = LipParams::with_time_constant(0.2325);
  const std::vector<PlanarVec> zmp{{0.0, 0.0}, {0.2, 0.0}};
  const std::vector<double> T{0.53};
  const auto b = backward_recursion(zmp, T, p);
  const SsSegment seg{zmp[0], b[0].xi_ios, b[0].xi_eos, 0.53};

  CHECK(eval_ss(seg, 0.0, p).first == seg.xi_ios);
  CHECK(eval_ss(seg, 0.53, p).first == seg.xi_eos);
  const auto [mid, mid_dot] = eval_ss(seg, 0.265, p);
  CHECK((mid - integrate_constant_zmp(seg.xi_ios, seg.zmp, 0.265, p)).norm() <= 1e-8);
  CHECK((mid_dot - (mid - seg.zmp) / 0.2325).norm() < 1e-12);
  CHECK_THROWS_AS(eval_ss(seg, -0.01, p), std::out_of_range);
  CHECK_THROWS_AS(eval_ss(seg, 0.54, p), std::out_of_range);

  // the stored end state agrees with the exponential law
  CHECK((seg.zmp + std::exp(seg.duration / 0.2325) * (seg.xi_ios - seg.zmp) - seg.xi_eos).norm() < 1e-12);
}

TEST_CASE("smooth_ds")
{
  const LipParams p;

  SUBCASE("equilibrium blend is constant")
  {
    const PlanarVec q(0.1, 0.1);
    const SsSegment rest{q, q, q, 0.5};
    const DsSegment ds = smooth_ds(rest, rest, 0.1, p);
    for (double s : {0.0, 0.03, 0.07, 0.1}) {
      CHECK((ds.position(s) - q).norm() < 1e-15);
      CHECK(ds.velocity(s).norm() < 1e-15);
    }
  }

  SUBCASE("boundary values")
  {
    const std::vector<PlanarVec> zmp{{0, 0.08}, {0.15, -0.08}, {0.3, 0.0}};
    const std::vector<double> T{0.53, 0.53};
    const auto bp = backward_recursion(zmp, T, p);
    const SsSegment a{zmp[0], bp[0].xi_ios, bp[0].xi_eos, 0.53};
    const SsSegment c{zmp[1], bp[1].xi_ios, bp[1].xi_eos, 0.53};
    const double d = 0.106;
    const DsSegment ds = smooth_ds(a, c, d, p);
    const auto [p0, v0] = eval_ss(a, 0.53 - d / 2, p);
    const auto [p1, v1] = eval_ss(c, d / 2, p);
    CHECK((ds.position(0) - p0).norm() <= 1e-12);
    CHECK((ds.velocity(0) - v0).norm() <= 1e-12);
    CHECK((ds.position(d) - p1).norm() <= 1e-12);
    CHECK((ds.velocity(d) - v1).norm() <= 1e-12);
  }

  SUBCASE("too long a blend")
  {
    const PlanarVec q(0, 0);
    const SsSegment shortseg{q, q, q, 0.1};
    const SsSegment longseg{q, q, q, 1.0};
    CHECK_THROWS(smooth_ds(shortseg, longseg, 0.2, p));
    CHECK_THROWS(smooth_ds(longseg, shortseg, 0.2, p));
    CHECK_THROWS(smooth_ds(longseg, longseg, 0.0, p));
  }
}

TEST_CASE("build_plan")
{
  const LipParams p;
  const double b = p.time_constant();
  const double d = 0.106;

  SUBCASE("standing pair")
  {
    const UnicycleParams u;
    const auto steps = plan_footsteps(sample_unicycle(StraightLine{0.0, 0.28}, u), u);
    const DcmPlan plan = build_plan(steps, d, p);
    for (double t : {-1.0, 0.0, 0.05, 0.5, 3.0}) {
      const PlanSample s = plan.sample(t);
      CHECK(s.xi.norm() < 1e-15);
      CHECK(s.xi_dot.norm() < 1e-15);
      CHECK(s.zmp.norm() < 1e-15);
    }
  }

  SUBCASE("straight walk")
  {
    const auto steps = straight_walk();
    const DcmPlan plan = build_plan(steps, d, p);
    const PlanarVec last_mid = 0.5 * (steps[steps.size() - 2].position + steps.back().position);
    CHECK((plan.final_zmp() - last_mid).norm() < 1e-15);
    CHECK((plan.sample(plan.total_duration()).xi - plan.final_zmp()).norm() <= 1e-12);
    CHECK((plan.sample(plan.total_duration() + 5.0).xi - plan.final_zmp()).norm() <= 1e-12);
    CHECK(plan.total_duration() == doctest::Approx(steps.back().impact_time + d));

    const auto jumps = fixture::junction_jumps(plan, p);
    CHECK(jumps.position <= 1e-9);
    CHECK(jumps.velocity <= 1e-9);
    CHECK(jumps.zmp <= 1e-9);
  }

  SUBCASE("reference zmp during single support is the stance center")
  {
    const auto steps = straight_walk();
    const DcmPlan plan = build_plan(steps, d, p);
    for (std::size_t k = 1; k + 1 < steps.size(); ++k) {
      for (int i = 1; i < 10; ++i) {
        const double t = steps[k].impact_time + d + 0.1 * i * (steps[k + 1].impact_time - steps[k].impact_time - d);
        const PlanSample s = plan.sample(t);
        CHECK((b * s.xi_dot + steps[k].position - s.xi).norm() <= 1e-10);
        CHECK((s.zmp - steps[k].position).norm() <= 1e-10);
      }
    }
  }

  SUBCASE("double support zmp stays between the adjacent anchors")
  {
    // the cubic only approximates the exponential, so containment holds to ~1e-5
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
      const auto steps = fixture::random_footsteps(rng, 8);
      const DcmPlan plan = build_plan(steps, d, p, std::nullopt, -0.5);
      for (std::size_t k = 2; k < steps.size(); ++k) {
        const PlanarVec a = plan.stance_segment(k - 1).zmp;
        const PlanarVec c = plan.stance_segment(k).zmp;
        for (int i = 0; i <= 50; ++i)
          CHECK(distance_to_segment(a, c, plan.sample(steps[k].impact_time + d * i / 50.0).zmp) <= 1e-4);
      }
    }
  }

  SUBCASE("weight shift zmp stays under the feet")
  {
    const auto steps = straight_walk();
    const DcmPlan plan = build_plan(steps, d, p, std::nullopt, -0.5);
    auto pts = foot_corners(steps[0], FootShape{});
    const auto other = foot_corners(steps[1], FootShape{});
    pts.insert(pts.end(), other.begin(), other.end());
    const auto hull = convex_hull(pts);
    for (int i = 0; i <= 100; ++i) {
      const double t = -0.5 + (0.5 + d) * i / 100.0;
      CHECK(polygon_contains(hull, plan.sample(t).zmp));
    }
    // a weight shift squeezed into one double support cannot stay under the feet
    const DcmPlan rushed = build_plan(steps, d, p);
    bool outside = false;
    for (int i = 0; i <= 100; ++i)
      outside = outside || !polygon_contains(hull, rushed.sample(d * i / 100.0).zmp);
    CHECK(outside);
  }

  SUBCASE("random sequences are continuous")
  {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 3 + trial % 8;
      const auto steps = fixture::random_footsteps(rng, n);
      const DcmPlan plan = build_plan(steps, d, p, std::nullopt, -0.5);
      const auto jumps = fixture::junction_jumps(plan, p);
      CHECK(jumps.position <= 1e-9);
      CHECK(jumps.velocity <= 1e-9);
      CHECK(jumps.zmp <= 1e-9);
      CHECK((plan.sample(plan.total_duration()).xi - plan.final_zmp()).norm() <= 1e-12);
      // weight shift starts at rest on the initial midpoint
      const PlanSample s0 = plan.sample(-0.5);
      CHECK((s0.xi - 0.5 * (steps[0].position + steps[1].position)).norm() <= 1e-12);
      CHECK(s0.xi_dot.norm() <= 1e-12);
    }
  }

  SUBCASE("idempotent")
  {
    const auto steps = straight_walk();
    const DcmPlan a = build_plan(steps, d, p);
    const DcmPlan c = build_plan(steps, d, p);
    for (double t = 0.0; t < a.total_duration() + 0.5; t += 0.01) {
      CHECK(a.sample(t).xi == c.sample(t).xi);
      CHECK(a.sample(t).xi_dot == c.sample(t).xi_dot);
    }
  }

  SUBCASE("pinned stance")
  {
    const auto steps = straight_walk();
    const PlanarVec target = build_plan(steps, d, p).stance_segment(3).xi_eos + PlanarVec(0.01, -0.02);
    const DcmPlan plan = build_plan(steps, d, p, PinnedEos{3, target});
    CHECK(plan.stance_segment(3).xi_eos == target);
    CHECK((plan.recursion_eos(3) - build_plan(steps, d, p).stance_segment(3).xi_eos).norm() < 1e-15);
    const auto jumps = fixture::junction_jumps(plan, p);
    CHECK(jumps.position <= 1e-9);
    CHECK(jumps.velocity <= 1e-9);
    CHECK_THROWS_AS(build_plan(steps, d, p, PinnedEos{0, target}), std::out_of_range);
  }

  SUBCASE("rejects bad input")
  {
    auto steps = straight_walk();
    CHECK_THROWS(build_plan(std::span(steps).first(1), d, p));
    CHECK_THROWS(build_plan(steps, 0.0, p));
    steps[4].impact_time = steps[3].impact_time;
    CHECK_THROWS(build_plan(steps, d, p));
  }
}
