#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "plap/oracle.hpp"
#include "plap/pruefer.hpp"
#include "plap/spectrum.hpp"

using namespace plap;

namespace {

IntegrationOptions precise() {
    IntegrationOptions opts;
    opts.tol = 1e-12;
    return opts;
}

SolutionProfile shoot(Family f, const Params& params, double a, double lambda, IntegrationOptions opts = precise()) {
    return reconstruct_profile(integrate_pruefer(f, params, a, lambda, opts));
}

// Phase rate from the first-order system at one sample.
double phase_rate(const Trajectory& traj, const PrueferState& s) {
    const GeneralizedTrig trig(traj.params.exponent());
    const ModelFamily model(traj.family, traj.params);
    const SinCosP sc = trig.sincos(s.phi);
    return traj.alpha - model.drift_unchecked(s.t) / (traj.params.p - 1.0) * sc.cos_pm1 * sc.sin;
}

double drift_of(const Params& params) { return drift(Family::exponential, params, 0.0); }

}  // namespace

TEST(Integrate, ZeroDriftIsLinearPhase) {
    for (double p : {1.5, 2.0, 3.0}) {
        const Params params = Params::make(p, 2.0, -1e-12);
        const double lambda = 2.0;
        const double a = -0.3;
        const Trajectory traj = integrate_pruefer(Family::exponential, params, a, lambda, precise());
        ASSERT_TRUE(traj.peak.has_value());
        const double half = 0.5 * pi_p(PExponent(p));
        // the residual drift |T| = 1e-6 moves phi and log e by at most |T| (t - a)/(p - 1)
        const double drift = std::abs(drift_of(params));
        for (const PrueferState& s : traj.samples) {
            const double tol = std::max(1e-6, drift * (s.t - a) / (p - 1.0));
            EXPECT_NEAR(s.phi, -half + traj.alpha * (s.t - a), tol) << "p = " << p;
            EXPECT_NEAR(s.log_e, std::log(traj.alpha), tol) << "p = " << p;
        }
    }
}

TEST(Integrate, ZeroDriftHalfPeriod) {
    for (double p : {1.5, 2.0, 3.0}) {
        const Params params = Params::make(p, 3.0, -1e-12);
        const SolutionProfile prof = shoot(Family::cosh, params, 0.7, 5.0);
        ASSERT_TRUE(prof.converged);
        EXPECT_NEAR(prof.delta, pi_p(PExponent(p)) / prof.alpha, 1e-6);
        EXPECT_NEAR(prof.m, 1.0, 1e-6);
    }
}

TEST(Integrate, InitialStateAndOrdering) {
    const Params params = Params::make(2.5, 2.0, -1.0);
    const Trajectory traj = integrate_pruefer(Family::cosh, params, -0.4, 3.0, precise());
    ASSERT_FALSE(traj.samples.empty());
    const PrueferState& first = traj.samples.front();
    EXPECT_EQ(first.t, -0.4);
    EXPECT_DOUBLE_EQ(first.phi, -0.5 * pi_p(PExponent(2.5)));
    EXPECT_DOUBLE_EQ(first.log_e, std::log(traj.alpha));
    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        EXPECT_GT(traj.samples[k].t, traj.samples[k - 1].t);
    }
    ASSERT_TRUE(traj.peak.has_value());
    EXPECT_NEAR(traj.end.phi, 0.5 * pi_p(PExponent(2.5)), 1e-10);
    EXPECT_EQ(traj.end.t, traj.peak->t);
}

TEST(Integrate, ProfileShape) {
    const Params params = Params::make(3.0, 2.0, -1.0);
    const SolutionProfile prof = shoot(Family::cosh, params, -0.6, 8.0);
    ASSERT_TRUE(prof.converged);
    EXPECT_NEAR(prof.w.front(), -1.0, 1e-14);
    EXPECT_NEAR(prof.w_prime.front(), 0.0, 1e-14);
    EXPECT_NEAR(prof.w_prime.back(), 0.0, 1e-9);
    EXPECT_NEAR(prof.w.back(), prof.m, 1e-10);
    EXPECT_GT(prof.m, 0.0);
    for (std::size_t k = 1; k + 1 < prof.t.size(); ++k) {
        EXPECT_GT(prof.w_prime[k], 0.0) << "t = " << prof.t[k];
    }
}

TEST(Integrate, RejectsNonPositiveLambda) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    EXPECT_THROW(static_cast<void>(integrate_pruefer(Family::cosh, params, 0.0, 0.0)), DomainError);
    EXPECT_THROW(static_cast<void>(integrate_pruefer(Family::cosh, params, 0.0, -1.0)), DomainError);
}

TEST(Integrate, RejectsStartOutsideDomain) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    EXPECT_THROW(static_cast<void>(integrate_pruefer(Family::sinh, params, -0.1, 1.0)), DomainError);
    EXPECT_THROW(static_cast<void>(integrate_pruefer(Family::cosine, Params::make(2.0, 2.0, 1.0), 2.0, 1.0)), DomainError);
}

TEST(Integrate, StepBudgetCarriesLastState) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    IntegrationOptions opts = precise();
    opts.max_steps = 5;
    try {
        static_cast<void>(integrate_pruefer(Family::cosh, params, -3.0, 50.0, opts));
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_GT(e.last_state().t, -3.0);
        EXPECT_TRUE(std::isfinite(e.last_state().phi));
    }
}

TEST(Integrate, ShortHorizonDoesNotConverge) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    const Trajectory traj = integrate_pruefer(Family::cosh, params, 0.0, 1.0, 0.1, 1e-10);
    EXPECT_FALSE(traj.peak.has_value());
    EXPECT_NEAR(traj.end.t, 0.1, 1e-15);
    const SolutionProfile prof = reconstruct_profile(traj);
    EXPECT_FALSE(prof.converged);
    EXPECT_TRUE(std::isinf(prof.delta));
    EXPECT_TRUE(std::isnan(prof.m));
}

TEST(Integrate, OutputTimesAreHit) {
    const Params params = Params::make(1.5, 2.0, -1.0);
    IntegrationOptions opts = precise();
    opts.record_only_outputs = true;
    opts.stop_at_peak = false;
    opts.t_max = 2.0;
    opts.output_times = {0.25, 0.5, 1.0, 1.5};
    const Trajectory traj = integrate_pruefer(Family::cosh, params, 0.0, 4.0, opts);
    std::vector<double> ts;
    for (const PrueferState& s : traj.samples) {
        ts.push_back(s.t);
    }
    for (double t : opts.output_times) {
        EXPECT_NE(std::find(ts.begin(), ts.end(), t), ts.end()) << t;
    }
}

TEST(Integrate, RegularizedStartIsInsensitive) {
    for (double p : {1.5, 2.0, 3.0}) {
        const Params params = Params::make(p, 3.0, -1.0);
        IntegrationOptions opts;
        opts.tol = 1e-10;
        const Trajectory traj = integrate_pruefer(Family::sinh, params, 0.0, 5.0, opts);
        ASSERT_TRUE(traj.peak.has_value());
        EXPECT_GT(traj.start_offset, 0.0);
        EXPECT_LE(traj.start_sensitivity_delta, 1e-10) << "p = " << p;
        EXPECT_LE(traj.start_sensitivity_m, 1e-10) << "p = " << p;
        EXPECT_EQ(traj.samples.front().t, 0.0);
    }
}

TEST(Integrate, RegularizedStartOnSphereModel) {
    const Params params = Params::make(2.0, 3.0, 1.0);
    const double edge = 0.5 * std::numbers::pi;
    IntegrationOptions opts;
    opts.tol = 1e-10;
    const Trajectory traj = integrate_pruefer(Family::cosine, params, -edge, 8.0, opts);
    ASSERT_TRUE(traj.peak.has_value());
    EXPECT_LT(traj.peak->t, edge);
    EXPECT_LE(traj.start_sensitivity_delta, 1e-9);
    EXPECT_LE(traj.start_sensitivity_m, 1e-9);
}

TEST(Integrate, ExponentialAmplitudeIndependentOfStart) {
    const Params params = Params::make(2.0, 3.0, -1.0);
    std::vector<double> ms;
    for (double a : {-7.0, 0.0, 3.0, 11.0}) {
        const SolutionProfile prof = shoot(Family::exponential, params, a, 6.0);
        ASSERT_TRUE(prof.converged);
        ms.push_back(prof.m);
    }
    for (double m : ms) {
        EXPECT_NEAR(m, ms.front(), 1e-10);
    }
}

TEST(Integrate, HalfPeriodExceedsFlatForMonotoneDrift) {
    for (double p : {1.5, 2.0, 3.0}) {
        const Params params = Params::make(p, 2.0, -1.0);
        const double lambda = lambda_from_alpha(2.0, p);
        const double flat = pi_p(PExponent(p)) / 2.0;
        for (double a : {0.0, 0.5, 3.0}) {
            EXPECT_GT(shoot(Family::sinh, params, a, lambda).delta, flat);
        }
        for (double a : {-2.0, 0.0, 2.0}) {
            EXPECT_GT(shoot(Family::exponential, params, a, lambda).delta, flat);
        }
    }
}

TEST(Integrate, OddStartPhaseNeverSlowerThanAlpha) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    const double alpha = 2.0;
    const double abar = odd_solution_radius(Family::cosh, params, alpha).a_bar;
    const Trajectory traj = integrate_pruefer(Family::cosh, params, -abar, lambda_from_alpha(alpha, 2.0), precise());
    double slowest = std::numeric_limits<double>::infinity();
    for (const PrueferState& s : traj.samples) {
        slowest = std::min(slowest, phase_rate(traj, s));
    }
    EXPECT_GE(slowest, alpha - 1e-9);

    // a start off the odd one has w = 0 away from t = 0, where the rate dips
    const Trajectory off = integrate_pruefer(Family::cosh, params, -abar + 0.5, lambda_from_alpha(alpha, 2.0), precise());
    double slowest_off = std::numeric_limits<double>::infinity();
    for (const PrueferState& s : off.samples) {
        slowest_off = std::min(slowest_off, phase_rate(off, s));
    }
    EXPECT_LT(slowest_off, alpha);
}

TEST(OdeResidual, SmallAtEigenvalue) {
    const Params params = Params::make(2.0, 2.0, -1.0, 1.0);
    const double lambda = fd_eigenvalue_p2(WeightedGrid::for_params(params, 2048));
    EXPECT_LT(ode_residual(Family::cosh, params, -0.5, lambda, -0.45, 0.45, 8000), 1e-6);
}

// Near the zero of w the term lambda w^(p-1) is only C^(p-1) when p is not an
// integer, which caps the centered-difference order at p - 1.
TEST(OdeResidual, OrderUnderRefinement) {
    for (double p : {1.5, 2.0, 2.5, 3.0, 4.0}) {
        const Params params = Params::make(p, 3.0, -1.0);
        const double coarse = ode_residual(Family::cosh, params, -0.8, 6.0, -0.7, 0.0, 200);
        const double fine = ode_residual(Family::cosh, params, -0.8, 6.0, -0.7, 0.0, 400);
        const double expected = p == 2.0 ? 2.0 : std::min(2.0, p - 1.0);
        EXPECT_GT(std::log2(coarse / fine), expected - 0.1) << "p = " << p;
    }
}

TEST(Envelope, ShapeForCoshProfiles) {
    for (double p : {1.5, 2.0, 3.0}) {
        const Params params = Params::make(p, 2.0, -1.0);
        IntegrationOptions opts = precise();
        opts.max_step = 1e-3;
        const SolutionProfile prof = shoot(Family::cosh, params, -0.5, 9.0, opts);
        ASSERT_TRUE(prof.converged);
        const EnvelopeDiagnostic env = e_function(prof, Family::cosh, params);
        EXPECT_LE(env.shape_violation(), 1e-6) << "p = " << p;
        ASSERT_GT(env.E.size(), 3u);
        for (double e : env.E) {
            EXPECT_GE(e, 0.0);
        }
        EXPECT_GT(env.t0, prof.a);
        EXPECT_LT(env.t0, prof.b);
        EXPECT_DOUBLE_EQ(env.s[env.t0_index], env.t0);
        // E vanishes at the start and peaks at the zero of w
        const double peak = *std::max_element(env.E.begin(), env.E.end());
        EXPECT_LT(env.E.front(), 1e-2 * peak);
        EXPECT_NEAR(env.E[env.t0_index], peak, 1e-12 * peak);
    }
}

TEST(Envelope, ApproachesZeroAtStart) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    IntegrationOptions opts = precise();
    opts.max_step = 1e-4;
    const SolutionProfile prof = shoot(Family::cosh, params, -0.5, 9.0, opts);
    const EnvelopeDiagnostic env = e_function(prof, Family::cosh, params);
    EXPECT_LT(env.E[1], env.E[20]);
    EXPECT_LT(env.E[1], 1e-2 * env.E[env.t0_index]);
}

TEST(Envelope, RequiresConvergedProfile) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    const SolutionProfile prof = reconstruct_profile(integrate_pruefer(Family::cosh, params, 0.0, 1.0, 0.1, 1e-10));
    EXPECT_THROW(static_cast<void>(e_function(prof, Family::cosh, params)), StateError);
}

TEST(Envelope, RequiresZeroOfW) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    SolutionProfile prof = shoot(Family::cosh, params, -0.5, 9.0);
    for (double& w : prof.w) {
        w = -std::abs(w) - 1.0;
    }
    EXPECT_THROW(static_cast<void>(e_function(prof, Family::cosh, params)), StateError);
}
