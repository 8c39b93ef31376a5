#pragma once

// Eigenvalue-level solvers built on the Pruefer shot: the Neumann eigenvalue
// lambda_D of the comparison model, odd-solution radii, the oscillation
// threshold of the cosh model, maximum maps and diameter functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "plap/errors.hpp"
#include "plap/model.hpp"
#include "plap/parallel.hpp"
#include "plap/pruefer.hpp"
#include "plap/ptrig.hpp"

namespace plap {

/// Result of a Neumann eigenvalue solve.
struct EigenResult {
    double lambda = 0.0;
    double alpha = 0.0;
    /// |phase mismatch| at the returned lambda.
    double residual = 0.0;
    int iterations = 0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    Family family = Family::cosh;
    double D = 0.0;
};

struct ShootingOptions {
    /// Target on |phi(D/2) - pi_p/2|.
    double tol = 1e-10;
    /// Local error tolerance of the underlying integration; derived from tol
    /// when unset.
    std::optional<double> integration_tol;
    /// Overrides the comparison family chosen from the sign of kappa.
    std::optional<Family> family;
};

namespace detail {

inline double integration_tol_for(const ShootingOptions& opts) {
    return opts.integration_tol.value_or(std::clamp(1e-2 * opts.tol, 1e-13, 1e-8));
}

inline Family shooting_family(const Params& params, const ShootingOptions& opts) {
    const Family f = opts.family.value_or(comparison_family(params));
    if (f == Family::cosine && !(params.kappa > 0.0)) {
        throw DomainError("family 0 requires kappa > 0");
    }
    if (f != Family::cosine && !(params.kappa < 0.0)) {
        throw DomainError("families 1, 2, 3 require kappa < 0");
    }
    return f;
}

inline double require_diameter(const Params& params) {
    if (!params.D) {
        throw DomainError("a diameter D is required");
    }
    params.validate();
    return *params.D;
}

// At D = pi/sqrt(kappa) both ends are singular. The drift is odd, so the
// first Neumann eigenfunction is odd and the problem reduces to the half
// shot from the regularized singular start with target phi(0) = 0.
inline bool at_maximal_diameter(const Params& params, double D) {
    return params.kappa > 0.0 && D >= params.max_diameter() * (1.0 - 1e-12);
}

}  // namespace detail

/// g(lambda) = phi_lambda(D/2) - pi_p/2 for the shot phi(-D/2) = -pi_p/2.
/// Strictly increasing in lambda. At D = pi/sqrt(kappa) this is replaced by
/// the equivalent half-interval mismatch phi_lambda(0).
inline double neumann_phase_residual(const Params& params, Family family, double lambda,
                                     double integration_tol = 1e-12) {
    const double D = detail::require_diameter(params);
    if (!(lambda > 0.0)) {
        throw DomainError("lambda > 0 required");
    }
    ShootingOptions chosen;
    chosen.family = family;
    detail::shooting_family(params, chosen);

    IntegrationOptions opts;
    opts.tol = integration_tol;
    opts.stop_at_peak = false;
    opts.record = false;
    if (detail::at_maximal_diameter(params, D)) {
        const double edge = 0.5 * params.max_diameter();
        opts.t_max = 0.0;
        return integrate_pruefer(family, params, -edge, lambda, opts).end.phi;
    }
    const GeneralizedTrig trig(params.exponent());
    opts.t_max = 0.5 * D;
    const Trajectory traj = integrate_pruefer(family, params, -0.5 * D, lambda, opts);
    return traj.end.phi - trig.half_pi_p();
}

/// First nonzero Neumann eigenvalue of the comparison model on [-D/2, D/2]:
/// family 0 for kappa > 0, family 3 for kappa < 0.
///
/// Brackets the root of the phase mismatch starting from
/// lambda_lo = (p-1) (pi_p/(2D))^p / 4, shrinking lambda_lo and growing
/// lambda_hi geometrically, then refines with TOMS 748.
inline EigenResult lambda_D(const Params& params, const ShootingOptions& opts = {}) {
    const double D = detail::require_diameter(params);
    const Family family = detail::shooting_family(params, opts);
    const double itol = detail::integration_tol_for(opts);
    const double p = params.p;
    const double pi_p_value = pi_p(params.exponent());

    int evaluations = 0;
    auto g = [&](double lambda) {
        ++evaluations;
        return neumann_phase_residual(params, family, lambda, itol);
    };

    double lo = (p - 1.0) * std::pow(pi_p_value / (2.0 * D), p) / 4.0;
    double g_lo = g(lo);
    for (int k = 0; g_lo >= 0.0; ++k) {
        if (k == 60) {
            throw NumericalError("lambda_D: no lower bracket after 60 halvings");
        }
        lo *= 0.5;
        g_lo = g(lo);
    }
    double hi = 2.0 * lo;
    double g_hi = g(hi);
    for (int k = 0; g_hi <= 0.0; ++k) {
        if (k == 60) {
            throw NumericalError("lambda_D: no upper bracket after 60 doublings");
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = g(hi);
    }

    EigenResult out;
    out.family = family;
    out.D = D;
    out.bracket_lo = lo;
    out.bracket_hi = hi;

    boost::uintmax_t iters = 200;
    const std::pair<double, double> root = boost::math::tools::toms748_solve(
        g, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(48), iters);
    out.bracket_lo = root.first;
    out.bracket_hi = root.second;
    out.lambda = 0.5 * (root.first + root.second);
    out.residual = std::abs(g(out.lambda));
    out.iterations = evaluations;
    out.alpha = alpha_from_lambda(out.lambda, p);
    if (!(out.residual <= opts.tol)) {
        throw NumericalError("lambda_D: phase residual " + std::to_string(out.residual) +
                             " above tolerance");
    }
    return out;
}

inline EigenResult lambda_D(const Params& params, double tol) {
    ShootingOptions opts;
    opts.tol = tol;
    return lambda_D(params, opts);
}

/// Start radius of the odd solution: abar for family 3, ahat for family 0.
struct OddSolutionRadius {
    double a_bar = 0.0;
    Family family = Family::cosh;
    double alpha = 0.0;
};

/// Integrates phi from phi(0) = 0 until phi = pi_p/2 and returns that time.
/// For family 0 the phase stalls before the edge pi/(2 sqrt(kappa)) when
/// lambda is at or below the weighted threshold lambda_0.
inline OddSolutionRadius odd_solution_radius(Family family, const Params& params, double alpha,
                                             double tol = 1e-12) {
    if (family != Family::cosine && family != Family::cosh) {
        throw DomainError("odd solutions are defined for families 0 and 3");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw DomainError("alpha > 0 required");
    }
    const ModelFamily model(family, params);
    const GeneralizedTrig trig(params.exponent());
    const double lambda = lambda_from_alpha(alpha, params.p);

    IntegrationOptions opts;
    opts.tol = tol;
    opts.record = false;
    opts.initial_phase = 0.0;
    opts.initial_log_e = 0.0;
    // phi' >= alpha for family 3, so pi_p/(2 alpha) is an upper bound there
    opts.t_max = family == Family::cosh ? trig.pi_p() / alpha : model.domain().hi;
    const Trajectory traj = integrate_pruefer(family, params, 0.0, lambda, opts);
    if (!traj.peak) {
        if (family == Family::cosine) {
            throw DomainError("phase stalls before pi/(2 sqrt(kappa)): lambda is below lambda_0");
        }
        throw NumericalError("odd solution did not reach its critical point");
    }
    return {traj.peak->t, family, alpha};
}

/// max |w(t) + w(-t)| over a uniform grid on [0, abar] for the solution
/// started at -abar.
inline double oddness_defect(Family family, const Params& params, double alpha, std::size_t points = 201,
                             double tol = 1e-12) {
    const OddSolutionRadius r = odd_solution_radius(family, params, alpha, tol);
    const double lambda = lambda_from_alpha(alpha, params.p);
    IntegrationOptions opts;
    opts.tol = tol;
    opts.record_only_outputs = true;
    opts.stop_at_peak = false;
    opts.t_max = r.a_bar;
    const double h = 2.0 * r.a_bar / static_cast<double>(2 * (points - 1));
    for (std::size_t k = 1; k + 1 < 2 * points - 1; ++k) {
        opts.output_times.push_back(-r.a_bar + h * static_cast<double>(k));
    }
    const SolutionProfile prof = reconstruct_profile(integrate_pruefer(family, params, -r.a_bar, lambda, opts));
    // samples are symmetric: index k pairs with size-1-k
    double worst = 0.0;
    const std::size_t m = prof.w.size();
    for (std::size_t k = 0; k < m; ++k) {
        worst = std::max(worst, std::abs(prof.w[k] + prof.w[m - 1 - k]));
    }
    return worst;
}

/// m(i, a) = w_{i,a}(b(i,a)) over a list of starts.
struct MaxMap {
    Family family = Family::cosh;
    std::vector<double> a;
    std::vector<double> m;
    std::vector<double> delta;
    std::vector<bool> converged;
    /// Family-2 constant for the same lambda (kappa < 0 only; NaN otherwise).
    double m2 = std::numeric_limits<double>::quiet_NaN();
};

inline MaxMap max_map(Family family, const Params& params, double lambda, const std::vector<double>& a_samples,
                      double tol = 1e-12) {
    struct Point {
        double m = std::numeric_limits<double>::quiet_NaN();
        double delta = std::numeric_limits<double>::infinity();
        bool converged = false;
    };
    auto shoot = [&](Family f, double a) {
        IntegrationOptions opts;
        opts.tol = tol;
        opts.record = false;
        const SolutionProfile prof = reconstruct_profile(integrate_pruefer(f, params, a, lambda, opts));
        return Point{prof.m, prof.delta, prof.converged};
    };
    const std::vector<Point> points = ordered_map(a_samples, [&](double a) { return shoot(family, a); });

    MaxMap out;
    out.family = family;
    out.a = a_samples;
    for (const Point& pt : points) {
        out.m.push_back(pt.m);
        out.delta.push_back(pt.delta);
        out.converged.push_back(pt.converged);
    }
    if (params.kappa < 0.0) {
        const Point two = shoot(Family::exponential, 0.0);
        if (two.converged) {
            out.m2 = two.m;
        }
    }
    return out;
}

/// Closed-form threshold for the limiting constant drift -(n-1) sqrt(-kappa):
/// the phase stalls iff alpha < (n-1) sqrt(-kappa) / (p (p-1)^(1/p)).
inline double limiting_critical_alpha(const Params& params) {
    if (!(params.kappa < 0.0)) {
        throw DomainError("the oscillation threshold requires kappa < 0");
    }
    const double p = params.p;
    return (params.n - 1.0) * params.sqrt_abs_kappa() / (p * std::pow(p - 1.0, 1.0 / p));
}

enum class PhaseBehavior { finite, stalled, inconclusive };

inline const char* to_string(PhaseBehavior b) {
    switch (b) {
        case PhaseBehavior::finite:
            return "finite";
        case PhaseBehavior::stalled:
            return "stalled";
        case PhaseBehavior::inconclusive:
            return "inconclusive";
    }
    return "?";
}

struct CriticalAlpha {
    double alpha_bar = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double bracket_width = 0.0;
    double horizon = 0.0;
    int classifications = 0;
};

/// Horizon was too short for the detector to decide.
class InconclusiveError : public NumericalError {
  public:
    InconclusiveError(const std::string& what, double alpha, double a, double phi, double rate)
        : NumericalError(what), alpha_(alpha), a_(a), phi_(phi), rate_(rate) {}

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double start() const noexcept { return a_; }
    [[nodiscard]] double phase() const noexcept { return phi_; }
    [[nodiscard]] double phase_rate() const noexcept { return rate_; }

  private:
    double alpha_;
    double a_;
    double phi_;
    double rate_;
};

/// Start grid {0, 1, 2, 5, 10, 20}/sqrt(-kappa).
inline std::vector<double> default_start_grid(const Params& params) {
    const double s = 1.0 / params.sqrt_abs_kappa();
    return {0.0, s, 2.0 * s, 5.0 * s, 10.0 * s, 20.0 * s};
}

/// Default detector horizon 100/sqrt(-kappa).
inline double default_detection_horizon(const Params& params) { return 100.0 / params.sqrt_abs_kappa(); }

struct PhaseClassification {
    PhaseBehavior behavior = PhaseBehavior::inconclusive;
    /// Start and end state of the deciding run (for diagnostics).
    double a = 0.0;
    double phi = 0.0;
    double phase_rate = 0.0;
};

/// Oscillation detector for family 3: "finite" if every start of the grid
/// reaches pi_p/2 within the horizon or is certified to; "stalled" if some
/// start ends below 0 with a phase rate under 5% of alpha; "inconclusive"
/// otherwise.
///
/// With c = (n-1) sqrt(-kappa)/(p-1) and h(phi) = |cos_p|^(p-1) |sin_p|, the
/// phase obeys phi' >= alpha - c h(phi) for t >= 0. A run that ends past the
/// maximum of h (|sin_p|^p = 1/p) with alpha > c h(phi) keeps accelerating
/// and is certified finite.
inline PhaseClassification classify_phase(const Params& params, double alpha, double horizon,
                                          const std::vector<double>& starts, double tol = 1e-10) {
    const ModelFamily model(Family::cosh, params);
    const GeneralizedTrig trig(params.exponent());
    const double lambda = lambda_from_alpha(alpha, params.p);
    const double c = model.n_minus_1() * model.rate() / (params.p - 1.0);
    const double phi_ridge = -trig.arcsin(std::pow(params.p, -1.0 / params.p));
    PhaseClassification verdict;
    verdict.behavior = PhaseBehavior::finite;
    for (double a : starts) {
        IntegrationOptions opts;
        opts.tol = tol;
        opts.record = false;
        opts.t_max = a + horizon;
        const Trajectory traj = integrate_pruefer(Family::cosh, params, a, lambda, opts);
        if (traj.peak) {
            continue;
        }
        const SinCosP sc = trig.sincos(traj.end.phi);
        const double rate = alpha - model.drift_unchecked(traj.end.t) / (params.p - 1.0) * sc.cos_pm1 * sc.sin;
        const double bound = alpha - c * std::abs(sc.cos_pm1 * sc.sin);
        if (traj.end.t >= 0.0 && traj.end.phi >= phi_ridge && (traj.end.phi >= 0.0 || bound > 0.0)) {
            continue;
        }
        PhaseClassification here{PhaseBehavior::inconclusive, a, traj.end.phi, rate};
        if (traj.end.phi < 0.0 && std::abs(rate) <= 0.05 * alpha) {
            here.behavior = PhaseBehavior::stalled;
            return here;
        }
        verdict = here;
    }
    return verdict;
}

/// Bisection for the oscillation threshold of family 3. The detector sees
/// only a finite horizon, so slow passages just above the threshold read as
/// stalled; the result overestimates the asymptotic threshold by O(horizon^-2).
inline CriticalAlpha critical_alpha(const Params& params, double horizon, double tol,
                                    std::vector<double> starts = {}) {
    if (!(params.kappa < 0.0)) {
        throw DomainError("critical_alpha requires kappa < 0");
    }
    if (!(horizon > 0.0) || !(tol > 0.0)) {
        throw DomainError("horizon and tol must be positive");
    }
    if (starts.empty()) {
        starts = default_start_grid(params);
    }
    CriticalAlpha out;
    out.horizon = horizon;
    auto classify = [&](double alpha) {
        ++out.classifications;
        const PhaseClassification c = classify_phase(params, alpha, horizon, starts);
        if (c.behavior == PhaseBehavior::inconclusive) {
            throw InconclusiveError("oscillation detector inconclusive at alpha = " + std::to_string(alpha) +
                                        " (start " + std::to_string(c.a) + ", phase " + std::to_string(c.phi) +
                                        ", rate " + std::to_string(c.phase_rate) + "); increase the horizon",
                                    alpha, c.a, c.phi, c.phase_rate);
        }
        return c.behavior == PhaseBehavior::finite;
    };

    double lo = 0.0;
    double hi = params.sqrt_abs_kappa();
    if (classify(hi)) {
        lo = 0.5 * hi;
        int k = 0;
        while (classify(lo)) {
            hi = lo;
            lo *= 0.5;
            if (++k == 60) {
                // no stalling down to alpha ~ 1e-18 sqrt|kappa|: threshold is 0
                out.bracket_lo = 0.0;
                out.bracket_hi = hi;
                out.bracket_width = hi;
                out.alpha_bar = 0.0;
                return out;
            }
        }
    } else {
        lo = hi;
        hi *= 2.0;
        int k = 0;
        while (!classify(hi)) {
            lo = hi;
            hi *= 2.0;
            if (++k == 60) {
                throw NumericalError("critical_alpha: no oscillating alpha found");
            }
        }
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (classify(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    out.bracket_width = hi - lo;
    out.alpha_bar = 0.5 * (lo + hi);
    return out;
}

/// Minimum diameter of the one-dimensional model at lambda: 2 abar for
/// kappa < 0, 2 ahat for kappa > 0.
inline double min_diameter(const Params& params, double lambda, double tol = 1e-12) {
    if (!(lambda > 0.0)) {
        throw DomainError("lambda > 0 required");
    }
    const Family family = params.kappa > 0.0 ? Family::cosine : Family::cosh;
    return 2.0 * odd_solution_radius(family, params, alpha_from_lambda(lambda, params.p), tol).a_bar;
}

struct DiameterRow {
    double D = 0.0;
    EigenResult result;
};

struct DiameterTable {
    std::vector<DiameterRow> rows;
    bool strictly_decreasing = true;
    /// Index of the first row whose lambda does not drop below its
    /// predecessor's; empty when strictly decreasing.
    std::optional<std::size_t> first_violation;
};

/// lambda_D over an increasing diameter grid, solved concurrently and
/// reported in grid order.
inline DiameterTable lambda_of_diameter_table(const Params& params, const std::vector<double>& D_grid,
                                              const ShootingOptions& opts = {}) {
    if (D_grid.empty()) {
        throw DomainError("empty diameter grid");
    }
    for (std::size_t k = 0; k < D_grid.size(); ++k) {
        static_cast<void>(params.with_diameter(D_grid[k]));
        if (k > 0 && !(D_grid[k] > D_grid[k - 1])) {
            throw DomainError("diameter grid must be increasing");
        }
    }
    const std::vector<EigenResult> results =
        ordered_map(D_grid, [&](double d) { return lambda_D(params.with_diameter(d), opts); });
    DiameterTable table;
    for (std::size_t k = 0; k < D_grid.size(); ++k) {
        table.rows.push_back({D_grid[k], results[k]});
        if (k > 0 && !(results[k].lambda < results[k - 1].lambda) && table.strictly_decreasing) {
            table.strictly_decreasing = false;
            table.first_violation = k;
        }
    }
    return table;
}

}  // namespace plap
