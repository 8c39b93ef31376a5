#pragma once

// Property suite run by `plap verify`. Each check reports the measured
// quantity next to its threshold.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "plap/model.hpp"
#include "plap/oracle.hpp"
#include "plap/pruefer.hpp"
#include "plap/ptrig.hpp"
#include "plap/spectrum.hpp"

namespace plap::verify {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// Deliberate faults for checking that the suite catches them.
struct FaultInjection {
    /// Evaluate the cosh-model drift with the wrong sign.
    bool flip_cosh_drift = false;
};

struct Check {
    std::string suite;
    std::string name;
    std::function<CheckResult(const FaultInjection&)> run;
};

namespace detail {

inline CheckResult at_most(std::string detail, double value, double threshold) {
    CheckResult r;
    r.passed = value <= threshold;
    r.value = value;
    r.threshold = threshold;
    r.detail = std::move(detail);
    return r;
}

inline double drift_with_faults(const ModelFamily& model, double t, const FaultInjection& faults) {
    const double T = model.drift(t);
    return (faults.flip_cosh_drift && model.family() == Family::cosh) ? -T : T;
}

inline CheckResult ptrig_identity(const FaultInjection&) {
    std::mt19937_64 gen(1234);
    std::uniform_real_distribution<double> p_dist(1.0 + 1e-3, 10.0);
    std::uniform_real_distribution<double> t_dist(-20.0, 20.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const GeneralizedTrig trig(PExponent(p_dist(gen)));
        const SinCosP sc = trig.sincos(t_dist(gen));
        worst = std::max(worst, std::abs(std::pow(std::abs(sc.sin), trig.p()) +
                                         std::pow(std::abs(sc.cos), trig.p()) - 1.0));
    }
    return at_most("max ||sin_p|^p + |cos_p|^p - 1| over 1000 draws", worst, 1e-10);
}

inline CheckResult ptrig_period_parity(const FaultInjection&) {
    double worst = 0.0;
    for (double p : {1.2, 1.5, 2.0, 3.0, 7.0}) {
        const GeneralizedTrig trig{PExponent(p)};
        for (double t = -7.0; t <= 7.0; t += 0.37) {
            worst = std::max(worst, std::abs(trig.sin(t + 2.0 * trig.pi_p()) - trig.sin(t)));
            worst = std::max(worst, std::abs(trig.sin(-t) + trig.sin(t)));
            worst = std::max(worst, std::abs(trig.cos(-t) - trig.cos(t)));
        }
    }
    return at_most("periodicity, oddness of sin_p, evenness of cos_p", worst, 1e-10);
}

inline CheckResult ptrig_derivative(const FaultInjection&) {
    double worst = 0.0;
    const double h = 1e-5;
    for (double p : {1.3, 2.0, 2.5, 4.0}) {
        const GeneralizedTrig trig{PExponent(p)};
        for (double t = -3.0; t <= 3.0; t += 0.113) {
            // skip a neighbourhood of the gluing points +-pi_p/2
            if (std::abs(std::remainder(t - trig.half_pi_p(), trig.pi_p())) < 0.05) {
                continue;
            }
            const double fd = (trig.sin(t + h) - trig.sin(t - h)) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - trig.cos(t)));
        }
    }
    return at_most("centered difference of sin_p vs cos_p", worst, 1e-6);
}

inline CheckResult ptrig_inverse(const FaultInjection&) {
    double worst = 0.0;
    for (double p : {1.1, 1.5, 2.0, 3.0, 9.0}) {
        const GeneralizedTrig trig{PExponent(p)};
        for (double s = -1.0; s <= 1.0; s += 0.01) {
            worst = std::max(worst, std::abs(trig.sin(trig.arcsin(s)) - s));
        }
        worst = std::max(worst, std::abs(pi_p_by_quadrature(PExponent(p)) - trig.pi_p()));
    }
    return at_most("arcsin_p round trip and quadrature pi_p", worst, 1e-10);
}

inline CheckResult model_riccati(const FaultInjection& faults) {
    double worst = 0.0;
    const double h = 1e-5;
    for (double n : {1.5, 2.0, 3.0}) {
        const Params neg = Params::make(2.0, n, -1.5);
        const Params pos = Params::make(2.0, n, 0.8);
        const std::vector<std::pair<Family, Params>> cases = {
            {Family::cosine, pos}, {Family::sinh, neg}, {Family::exponential, neg}, {Family::cosh, neg}};
        for (const auto& [family, params] : cases) {
            const ModelFamily model(family, params);
            const Interval dom = model.domain();
            for (double u : {-0.8, -0.3, 0.2, 0.6, 0.9}) {
                double t = u * 1.5;
                if (family == Family::cosine) {
                    t = u * dom.hi;
                } else if (family == Family::sinh) {
                    t = 0.2 + std::abs(u);
                }
                const double dT = (drift_with_faults(model, t + h, faults) -
                                   drift_with_faults(model, t - h, faults)) /
                                  (2.0 * h);
                const double T = drift_with_faults(model, t, faults);
                const double rhs = n == 1.0 ? 0.0 : T * T / (n - 1.0) + (n - 1.0) * params.kappa;
                worst = std::max(worst, std::abs(dT - rhs) / std::max(1.0, std::abs(rhs)));
            }
        }
    }
    return at_most("max |T' - T^2/(n-1) - (n-1) kappa| (relative)", worst, 1e-6);
}

inline CheckResult model_signed_pow(const FaultInjection&) {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> x_dist(-5.0, 5.0);
    std::uniform_real_distribution<double> q_dist(0.1, 4.0);
    int bad = 0;
    for (int k = 0; k < 2000; ++k) {
        const double x = x_dist(gen);
        const double y = x_dist(gen);
        const double q = q_dist(gen);
        if (signed_pow(-x, q) != -signed_pow(x, q)) {
            ++bad;
        }
        if ((x < y) != (signed_pow(x, q) < signed_pow(y, q)) && x != y) {
            ++bad;
        }
    }
    return at_most("oddness and monotonicity violations of signed_pow", bad, 0.0);
}

inline CheckResult pruefer_residual(const FaultInjection&) {
    // second-order decay of the centered-difference residual, family 0
    const Params params = Params::make(2.0, 3.0, 1.0);
    const double a = -0.7;
    const double lambda = 6.0;
    const double coarse = ode_residual(Family::cosine, params, a, lambda, -0.5, 0.5, 200);
    const double fine = ode_residual(Family::cosine, params, a, lambda, -0.5, 0.5, 400);
    CheckResult r = at_most("residual at h = 0.0025 (order " + std::to_string(std::log2(coarse / fine)) + ")",
                            fine, 1e-3);
    r.passed = r.passed && std::log2(coarse / fine) > 1.9;
    return r;
}

inline CheckResult pruefer_zero_drift(const FaultInjection&) {
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
        const Params params = Params::make(p, 2.0, -1e-14);
        const double lambda = 3.0;
        const SolutionProfile prof =
            reconstruct_profile(integrate_pruefer(Family::exponential, params, 0.3, lambda));
        const double expected = pi_p(PExponent(p)) / alpha_from_lambda(lambda, p);
        worst = std::max({worst, std::abs(prof.delta - expected), std::abs(prof.m - 1.0)});
    }
    return at_most("zero drift: |delta - pi_p/alpha|, |m - 1|", worst, 1e-6);
}

inline CheckResult pruefer_start(const FaultInjection&) {
    double worst = 0.0;
    const double tol = 1e-10;
    IntegrationOptions opts;
    opts.tol = tol;
    for (double p : {1.5, 2.0, 3.0}) {
        const Trajectory one = integrate_pruefer(Family::sinh, Params::make(p, 3.0, -1.0), 0.0, 4.0, opts);
        const Trajectory zero =
            integrate_pruefer(Family::cosine, Params::make(p, 3.0, 1.0), -0.5 * std::numbers::pi, 4.0, opts);
        worst = std::max({worst, one.start_sensitivity_delta, one.start_sensitivity_m,
                          zero.start_sensitivity_delta, zero.start_sensitivity_m});
    }
    return at_most("singular start: change of delta, m when eps is halved", worst, tol);
}

inline CheckResult pruefer_amplitude(const FaultInjection&) {
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
        const Trajectory traj = integrate_pruefer(Family::exponential, Params::make(p, 3.0, -1.0), 0.0, 5.0);
        for (std::size_t k = 1; k < traj.samples.size(); ++k) {
            worst = std::max(worst, traj.samples[k].log_e - traj.samples[k - 1].log_e);
        }
    }
    return at_most("largest increase of log e along the constant-drift model", worst, 1e-12);
}

inline CheckResult spectrum_g_monotone(const FaultInjection&) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> p_dist(1.3, 4.0);
    std::uniform_real_distribution<double> n_dist(1.0, 4.0);
    std::uniform_real_distribution<double> k_dist(0.2, 2.0);
    std::uniform_real_distribution<double> u_dist(0.0, 1.0);
    int bad = 0;
    for (int draw = 0; draw < 20; ++draw) {
        const double p = p_dist(gen);
        const double n = n_dist(gen);
        const double kappa = (draw % 2 == 0 ? 1.0 : -1.0) * k_dist(gen);
        const double D_max = kappa > 0.0 ? std::numbers::pi / std::sqrt(kappa) : 4.0;
        const double D = (0.2 + 0.75 * u_dist(gen)) * D_max;
        const Params params = Params::make(p, n, kappa, D);
        const Family family = comparison_family(params);
        double prev = -std::numeric_limits<double>::infinity();
        for (double lambda = 0.05; lambda < 400.0; lambda *= 3.0) {
            const double g = neumann_phase_residual(params, family, lambda, 1e-10);
            if (!(g > prev)) {
                ++bad;
            }
            prev = g;
        }
    }
    return at_most("non-increasing steps of g over 20 random problems", bad, 0.0);
}

inline CheckResult spectrum_oddness(const FaultInjection&) {
    const double defect = oddness_defect(Family::cosh, Params::make(2.0, 2.0, -1.0), 2.0);
    const double defect3 = oddness_defect(Family::cosh, Params::make(3.0, 3.0, -1.0), 2.5);
    return at_most("max |w(t) + w(-t)| of the odd solution", std::max(defect, defect3), 1e-8);
}

inline CheckResult spectrum_half_period(const FaultInjection&) {
    const Params params = Params::make(2.5, 3.0, -1.0);
    const double lambda = 6.0;
    const double half = pi_p(params.exponent()) / alpha_from_lambda(lambda, params.p);
    double margin = std::numeric_limits<double>::infinity();
    for (Family f : {Family::sinh, Family::exponential}) {
        const MaxMap map = max_map(f, params, lambda, {0.0, 0.5, 2.0, 8.0});
        for (double d : map.delta) {
            margin = std::min(margin, d - half);
        }
    }
    CheckResult r = at_most("min over families 1, 2 of delta - pi_p/alpha (must be > 0)", -margin, 0.0);
    r.value = margin;
    r.passed = margin > 0.0;
    return r;
}

inline CheckResult spectrum_odd_minimizer(const FaultInjection&) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    const double lambda = 5.0;
    const double alpha = alpha_from_lambda(lambda, params.p);
    const double abar = odd_solution_radius(Family::cosh, params, alpha).a_bar;
    std::vector<double> starts = {-abar};
    for (double a : {-3.0, -1.5, -1.0, -0.5, 0.0, 0.5, 2.0}) {
        starts.push_back(a);
    }
    const MaxMap map = max_map(Family::cosh, params, lambda, starts);
    const double at_odd = map.delta[0];
    double worst = std::abs(at_odd - 2.0 * abar);
    for (std::size_t k = 1; k < starts.size(); ++k) {
        worst = std::max(worst, 2.0 * abar - map.delta[k]);
    }
    CheckResult r = at_most("delta(3, a) >= 2 abar with equality at a = -abar", worst, 1e-8);
    r.passed = r.passed && at_odd < pi_p(params.exponent()) / alpha;
    return r;
}

inline CheckResult spectrum_diameter_ladder(const FaultInjection&) {
    const Params params = Params::make(2.0, 2.0, -1.0);
    const DiameterTable table = lambda_of_diameter_table(params, {0.5, 1.0, 2.0, 4.0});
    CheckResult r;
    r.passed = table.strictly_decreasing;
    r.value = table.strictly_decreasing ? 0.0 : 1.0;
    r.detail = "lambda_D strictly decreasing over D = 0.5, 1, 2, 4";
    return r;
}

inline CheckResult envelope_shape(const FaultInjection&) {
    double worst = 0.0;
    struct Case {
        Family family;
        double p;
        double a;
        double lambda;
    };
    for (const Case& c : {Case{Family::cosh, 2.0, -0.5, 9.4}, Case{Family::sinh, 2.0, 0.0, 4.0},
                          Case{Family::exponential, 3.0, 0.0, 30.0}}) {
        const Params params = Params::make(c.p, 2.0, -1.0);
        IntegrationOptions opts;
        opts.tol = 1e-12;
        const Trajectory first = integrate_pruefer(c.family, params, c.a, c.lambda, opts);
        opts.max_step = (first.end.t - c.a) / 1000.0;
        const SolutionProfile prof = reconstruct_profile(integrate_pruefer(c.family, params, c.a, c.lambda, opts));
        worst = std::max(worst, e_function(prof, c.family, params).shape_violation());
    }
    return at_most("E rises up to t0 and falls after it", worst, 1e-6);
}

inline CheckResult oracle_fd(const FaultInjection&) {
    const Params params = Params::make(2.0, 2.0, -1.0, 1.0);
    const double shoot = lambda_D(params).lambda;
    const double fd = fd_eigenvalue_p2(WeightedGrid::for_params(params, 1024));
    return at_most("|lambda_FD(J=1024) / lambda_shoot - 1|", std::abs(fd / shoot - 1.0), 1e-5);
}

inline CheckResult oracle_rayleigh(const FaultInjection&) {
    const Params params = Params::make(3.0, 2.0, -1.0, 1.0);
    const double shoot = lambda_D(params).lambda;
    const RayleighResult r = rayleigh_minimize_p(WeightedGrid::for_params(params, 128), params.p);
    CheckResult out = at_most("lambda_shoot - Rayleigh quotient, relative", (shoot - r.lambda0) / shoot, 1e-2);
    return out;
}

}  // namespace detail

inline std::vector<Check> all_checks() {
    using namespace detail;
    return {
        {"ptrig", "identity", ptrig_identity},
        {"ptrig", "period_parity", ptrig_period_parity},
        {"ptrig", "derivative", ptrig_derivative},
        {"ptrig", "inverse", ptrig_inverse},
        {"model", "riccati", model_riccati},
        {"model", "signed_pow", model_signed_pow},
        {"pruefer", "ode_residual", pruefer_residual},
        {"pruefer", "zero_drift", pruefer_zero_drift},
        {"pruefer", "singular_start", pruefer_start},
        {"pruefer", "amplitude_law", pruefer_amplitude},
        {"spectrum", "g_monotone", spectrum_g_monotone},
        {"spectrum", "oddness", spectrum_oddness},
        {"spectrum", "half_period_bound", spectrum_half_period},
        {"spectrum", "odd_start_minimizes_delta", spectrum_odd_minimizer},
        {"spectrum", "diameter_ladder", spectrum_diameter_ladder},
        {"envelope", "e_shape", envelope_shape},
        {"oracle", "fd_agreement", oracle_fd},
        {"oracle", "rayleigh_bound", oracle_rayleigh},
    };
}

inline std::vector<std::string> suite_names() {
    return {"ptrig", "model", "pruefer", "spectrum", "envelope", "oracle"};
}

/// Runs every check of `suite` ("all" for everything). Exceptions thrown by a
/// check count as failures.
inline std::vector<CheckResult> run_suite(const std::string& suite, const FaultInjection& faults = {}) {
    std::vector<CheckResult> out;
    for (const Check& check : all_checks()) {
        if (suite != "all" && suite != check.suite) {
            continue;
        }
        CheckResult r;
        try {
            r = check.run(faults);
        } catch (const std::exception& e) {
            r.passed = false;
            r.value = std::numeric_limits<double>::quiet_NaN();
            r.detail = std::string("exception: ") + e.what();
        }
        r.suite = check.suite;
        r.name = check.name;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace plap::verify
