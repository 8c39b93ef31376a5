#pragma once

// Discretized solvers that check the shooting results independently:
//
//   fd_eigenvalue_p2      weighted Neumann problem (rho w')' + lambda rho w = 0,
//                         three-point scheme, inverse iteration;
//   rayleigh_minimize_p   discrete Rayleigh p-quotient under the weighted
//                         p-mean constraint, preconditioned descent;
//   warped_p2_eigenvalue  Laplace-Beltrami operator on the warped cylinder
//                         dt^2 + f(t)^2 dtheta^2, five-point scheme.
//
// All three are finite-volume discretizations on a uniform t-grid: weights
// at cell midpoints in the stiffness, trapezoid weights in the mass. The
// Neumann condition is the natural boundary condition of that form, which is
// the same closure as a ghost node reflected across each end.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <boost/math/tools/toms748_solve.hpp>

#include "plap/errors.hpp"
#include "plap/model.hpp"
#include "plap/ptrig.hpp"

namespace plap {

/// Uniform grid on [-D/2, D/2] with J intervals and a positive weight.
struct WeightedGrid {
    double D = 0.0;
    std::size_t J = 0;
    double h = 0.0;
    std::vector<double> t;
    /// rho at the nodes and at the interval midpoints.
    std::vector<double> rho;
    std::vector<double> rho_mid;

    static WeightedGrid make(double D, std::size_t J, const std::function<double(double)>& weight) {
        if (!(D > 0.0) || !std::isfinite(D)) {
            throw DomainError("grid length D > 0 required");
        }
        if (J < 16) {
            throw DomainError("at least 16 grid intervals required");
        }
        WeightedGrid g;
        g.D = D;
        g.J = J;
        g.h = D / static_cast<double>(J);
        for (std::size_t j = 0; j <= J; ++j) {
            const double tj = -0.5 * D + g.h * static_cast<double>(j);
            g.t.push_back(tj);
            g.rho.push_back(weight(tj));
        }
        for (std::size_t j = 0; j < J; ++j) {
            g.rho_mid.push_back(weight(-0.5 * D + g.h * (static_cast<double>(j) + 0.5)));
        }
        for (std::size_t j = 1; j < J; ++j) {
            if (!(g.rho[j] > 0.0)) {
                throw DomainError("weight must be positive at interior nodes");
            }
        }
        return g;
    }

    /// rho = 1.
    static WeightedGrid uniform(double D, std::size_t J) {
        return make(D, J, [](double) { return 1.0; });
    }

    /// rho = cos^(n-1)(sqrt(kappa) t) for kappa > 0, cosh^(n-1)(sqrt(-kappa) t)
    /// for kappa < 0, on [-D/2, D/2] with D from params.
    static WeightedGrid for_params(const Params& params, std::size_t J) {
        if (!params.D) {
            throw DomainError("a diameter D is required");
        }
        const ModelFamily model(comparison_family(params), params);
        return make(*params.D, J, [&model](double tt) { return model.mu(tt); });
    }

    /// Trapezoid mass rho_j h_j.
    [[nodiscard]] std::vector<double> mass() const {
        std::vector<double> m(J + 1);
        for (std::size_t j = 0; j <= J; ++j) {
            m[j] = rho[j] * h * ((j == 0 || j == J) ? 0.5 : 1.0);
        }
        return m;
    }
};

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct InverseIterationResult {
    double lambda = 0.0;
    Vector x;
    int iterations = 0;
};

// Smallest eigenvalue of K x = lambda M x (M diagonal) on the M-orthogonal
// complement of the constants, by inverse iteration with a negative shift.
// Stops when the Rayleigh quotient changes by less than tol relative.
inline InverseIterationResult deflated_inverse_iteration(const SparseMatrix& K, const Vector& mass, double shift,
                                                         Vector x, double tol = 1e-12, int max_iter = 500) {
    SparseMatrix A = K;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        A.coeffRef(i, i) -= shift * mass[i];
    }
    Eigen::SimplicialLDLT<SparseMatrix> solver(A);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("factorization of the shifted operator failed");
    }
    const double total_mass = mass.sum();
    auto deflate = [&](Vector& v) {
        v.array() -= mass.dot(v) / total_mass;
        v /= std::sqrt(v.dot(mass.cwiseProduct(v)));
    };
    deflate(x);
    double lambda = x.dot(K * x);
    double last_change = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        Vector y = solver.solve(mass.cwiseProduct(x));
        deflate(y);
        const double next = y.dot(K * y);
        x = std::move(y);
        const double change = std::abs(next - lambda);
        if (change <= tol * std::abs(next)) {
            return {next, x, it};
        }
        // on fine grids rounding in K x can keep the change above tol; accept
        // once it is small and has stopped shrinking
        if (change <= 1e3 * tol * std::abs(next) && change >= 0.5 * last_change) {
            return {next, x, it};
        }
        last_change = change;
        lambda = next;
    }
    throw NumericalError("inverse iteration did not converge in " + std::to_string(max_iter) + " iterations");
}

// Weighted three-point stiffness sum_j rho_{j+1/2} (w_{j+1} - w_j)^2 / h.
inline SparseMatrix stiffness(const WeightedGrid& g) {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(4 * g.J);
    for (std::size_t j = 0; j < g.J; ++j) {
        const double k = g.rho_mid[j] / g.h;
        const auto a = static_cast<Eigen::Index>(j);
        entries.emplace_back(a, a, k);
        entries.emplace_back(a + 1, a + 1, k);
        entries.emplace_back(a, a + 1, -k);
        entries.emplace_back(a + 1, a, -k);
    }
    SparseMatrix K(static_cast<Eigen::Index>(g.J + 1), static_cast<Eigen::Index>(g.J + 1));
    K.setFromTriplets(entries.begin(), entries.end());
    return K;
}

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// First nonzero Neumann eigenvalue of (rho w')' + lambda rho w = 0 on the
/// grid. Second order in h.
inline double fd_eigenvalue_p2(const WeightedGrid& grid) {
    if (grid.J < 16) {
        throw DomainError("at least 16 grid intervals required");
    }
    const detail::SparseMatrix K = detail::stiffness(grid);
    const detail::Vector mass = detail::to_vector(grid.mass());
    detail::Vector x(static_cast<Eigen::Index>(grid.J + 1));
    for (std::size_t j = 0; j <= grid.J; ++j) {
        x[static_cast<Eigen::Index>(j)] = grid.t[j];
    }
    const double scale = std::pow(std::numbers::pi / grid.D, 2);
    return detail::deflated_inverse_iteration(K, mass, -1e-2 * scale, x).lambda;
}

struct RayleighResult {
    /// Smallest quotient found; an upper bound for the discrete eigenvalue.
    double lambda0 = 0.0;
    std::vector<double> w;
    /// |sum rho_j h_j w_j^(p-1)| at the minimizer (sup-norm of w is 1).
    double constraint_residual = 0.0;
    int iterations = 0;
    /// Index of the winning start: 0 odd linear, 1 sin_p profile, 2 fixed random.
    int start = 0;
    /// True when some start ran out of line-search progress before meeting
    /// the convergence test.
    bool stagnated = false;
    bool converged = false;
};

namespace detail {

struct QuotientParts {
    double numerator = 0.0;
    double denominator = 0.0;
    [[nodiscard]] double value() const { return numerator / denominator; }
};

inline QuotientParts p_quotient(const WeightedGrid& g, const std::vector<double>& mass, double p,
                                const std::vector<double>& w) {
    QuotientParts q;
    for (std::size_t j = 0; j < g.J; ++j) {
        q.numerator += g.rho_mid[j] * std::pow(std::abs(w[j + 1] - w[j]) / g.h, p) * g.h;
    }
    for (std::size_t j = 0; j <= g.J; ++j) {
        q.denominator += mass[j] * std::pow(std::abs(w[j]), p);
    }
    return q;
}

inline double p_mean(const std::vector<double>& mass, double p, const std::vector<double>& w, double shift) {
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        acc += mass[j] * signed_pow(w[j] + shift, p - 1.0);
    }
    return acc;
}

// Shifts w by the constant that zeroes the weighted p-mean (monotone in the
// shift) and rescales to sup-norm 1.
inline void restore_constraint(const std::vector<double>& mass, double p, std::vector<double>& w) {
    const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
    double lo = -*hi_it;
    double hi = -*lo_it;
    if (hi > lo) {
        auto f = [&](double c) { return p_mean(mass, p, w, c); };
        const double f_lo = f(lo);
        const double f_hi = f(hi);
        double c = 0.5 * (lo + hi);
        if (f_lo == 0.0) {
            c = lo;
        } else if (f_hi == 0.0) {
            c = hi;
        } else if (f_lo < 0.0 && f_hi > 0.0) {
            boost::uintmax_t iters = 200;
            const auto root = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                                boost::math::tools::eps_tolerance<double>(52), iters);
            c = 0.5 * (root.first + root.second);
        }
        for (double& v : w) {
            v += c;
        }
    }
    double sup = 0.0;
    for (double v : w) {
        sup = std::max(sup, std::abs(v));
    }
    if (sup > 0.0) {
        for (double& v : w) {
            v /= sup;
        }
    }
}

}  // namespace detail

/// Minimizes sum rho_{j+1/2} |dw/h|^p h / sum rho_j h_j |w_j|^p over grid
/// functions with sum rho_j h_j w_j^(p-1) = 0.
///
/// Each step moves along the gradient preconditioned by the weighted p = 2
/// operator, restores the constraint by a constant shift, normalizes to
/// sup-norm 1 and backtracks until the quotient decreases. Three
/// deterministic starts are tried and the smallest value is kept.
inline RayleighResult rayleigh_minimize_p(const WeightedGrid& grid, double p, int iters = 4000) {
    const PExponent exponent(p);
    const std::vector<double> mass = grid.mass();
    const std::size_t N = grid.J + 1;

    detail::SparseMatrix P = detail::stiffness(grid);
    const double scale = std::pow(std::numbers::pi / grid.D, 2);
    for (std::size_t j = 0; j < N; ++j) {
        P.coeffRef(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += 1e-2 * scale * mass[j];
    }
    Eigen::SimplicialLDLT<detail::SparseMatrix> precond(P);
    if (precond.info() != Eigen::Success) {
        throw NumericalError("preconditioner factorization failed");
    }

    std::vector<std::vector<double>> starts(3, std::vector<double>(N));
    {
        const GeneralizedTrig trig(exponent);
        std::mt19937 gen(20240917u);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (std::size_t j = 0; j < N; ++j) {
            const double x = grid.t[j] / grid.D;  // in [-1/2, 1/2]
            starts[0][j] = x;
            starts[1][j] = trig.sin(trig.pi_p() * x);
            starts[2][j] = unif(gen);
        }
    }

    auto gradient = [&](const std::vector<double>& w, const detail::QuotientParts& q) {
        const double R = q.value();
        std::vector<double> g(N, 0.0);
        const double coef = p * std::pow(grid.h, 1.0 - p);
        for (std::size_t j = 0; j < grid.J; ++j) {
            const double flux = coef * grid.rho_mid[j] * signed_pow(w[j + 1] - w[j], p - 1.0);
            g[j] -= flux;
            g[j + 1] += flux;
        }
        for (std::size_t j = 0; j < N; ++j) {
            g[j] = (g[j] - R * p * mass[j] * signed_pow(w[j], p - 1.0)) / q.denominator;
        }
        return g;
    };

    RayleighResult best;
    best.lambda0 = std::numeric_limits<double>::infinity();
    bool all_converged = true;
    for (int s = 0; s < 3; ++s) {
        std::vector<double> w = starts[static_cast<std::size_t>(s)];
        detail::restore_constraint(mass, p, w);
        detail::QuotientParts q = detail::p_quotient(grid, mass, p, w);
        double step = 1.0;
        int quiet = 0;
        bool converged = false;
        bool stagnated = false;
        int it = 0;
        for (; it < iters; ++it) {
            const std::vector<double> g = gradient(w, q);
            const detail::Vector dir = -precond.solve(detail::to_vector(g));
            double slope = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                slope += g[j] * dir[static_cast<Eigen::Index>(j)];
            }
            const double R = q.value();
            bool accepted = false;
            std::vector<double> trial(N);
            detail::QuotientParts q_trial;
            for (int back = 0; back < 60; ++back) {
                for (std::size_t j = 0; j < N; ++j) {
                    trial[j] = w[j] + step * dir[static_cast<Eigen::Index>(j)];
                }
                detail::restore_constraint(mass, p, trial);
                q_trial = detail::p_quotient(grid, mass, p, trial);
                if (q_trial.value() <= R + 1e-4 * step * slope) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                stagnated = true;
                break;
            }
            const double drop = R - q_trial.value();
            w.swap(trial);
            q = q_trial;
            step = std::min(2.0 * step, 1e6);
            quiet = drop <= 1e-14 * q.value() ? quiet + 1 : 0;
            if (quiet >= 5) {
                converged = true;
                break;
            }
        }
        all_converged = all_converged && converged;
        if (q.value() < best.lambda0) {
            best.lambda0 = q.value();
            best.w = w;
            best.iterations = it;
            best.start = s;
        }
        best.stagnated = best.stagnated || stagnated;
    }
    best.converged = all_converged;
    best.constraint_residual = std::abs(detail::p_mean(mass, p, best.w, 0.0));
    return best;
}

/// Cylinder [-D/2, D/2] x S^1 with metric dt^2 + f(t)^2 dtheta^2,
/// f(t) = c cosh(sqrt(-kappa) t).
struct WarpedMesh {
    double D = 1.0;
    double kappa = -1.0;
    /// Warp scale c.
    double scale = 1.0;
    std::size_t Jt = 256;
    std::size_t Ktheta = 64;
    /// Use f = c (product cylinder) instead of the cosh warp.
    bool flat = false;

    [[nodiscard]] double warp(double t) const {
        return flat ? scale : scale * std::cosh(std::sqrt(-kappa) * t);
    }

    void validate() const {
        if (!(D > 0.0) || !(scale > 0.0)) {
            throw DomainError("warped mesh needs D > 0 and c > 0");
        }
        if (!flat && !(kappa < 0.0)) {
            throw DomainError("the cosh warp requires kappa < 0");
        }
        if (Jt < 16 || Ktheta < 4) {
            throw DomainError("warped mesh needs at least 16 x 4 cells");
        }
    }
};

/// First nonzero eigenvalue of -Delta u = lambda u, Delta u = f^-1 (f u_t)_t +
/// f^-2 u_thetatheta, Neumann in t and periodic in theta.
inline double warped_p2_eigenvalue(const WarpedMesh& mesh) {
    mesh.validate();
    const std::size_t J = mesh.Jt;
    const std::size_t K = mesh.Ktheta;
    const double h = mesh.D / static_cast<double>(J);
    const double dth = 2.0 * std::numbers::pi / static_cast<double>(K);
    auto index = [K](std::size_t j, std::size_t k) { return static_cast<Eigen::Index>(j * K + k); };

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(8 * (J + 1) * K);
    detail::Vector mass(static_cast<Eigen::Index>((J + 1) * K));
    auto couple = [&](Eigen::Index a, Eigen::Index b, double k) {
        entries.emplace_back(a, a, k);
        entries.emplace_back(b, b, k);
        entries.emplace_back(a, b, -k);
        entries.emplace_back(b, a, -k);
    };
    for (std::size_t j = 0; j <= J; ++j) {
        const double t = -0.5 * mesh.D + h * static_cast<double>(j);
        const double hj = h * ((j == 0 || j == J) ? 0.5 : 1.0);
        const double f = mesh.warp(t);
        for (std::size_t k = 0; k < K; ++k) {
            mass[index(j, k)] = f * hj * dth;
            // angular flux: f^-2 weight times the area element f
            couple(index(j, k), index(j, (k + 1) % K), hj / (f * dth));
            if (j < J) {
                const double f_mid = mesh.warp(t + 0.5 * h);
                couple(index(j, k), index(j + 1, k), f_mid * dth / h);
            }
        }
    }
    detail::SparseMatrix S(mass.size(), mass.size());
    S.setFromTriplets(entries.begin(), entries.end());

    // mixed start so neither the radial nor the angular mode is excluded
    detail::Vector x(mass.size());
    for (std::size_t j = 0; j <= J; ++j) {
        const double t = -0.5 * mesh.D + h * static_cast<double>(j);
        for (std::size_t k = 0; k < K; ++k) {
            const double th = dth * static_cast<double>(k);
            x[index(j, k)] = t / mesh.D + 0.5 * std::cos(th) + 0.25 * std::sin(th) * std::cos(t);
        }
    }
    const double shift = -1e-2 * std::pow(std::numbers::pi / mesh.D, 2);
    return detail::deflated_inverse_iteration(S, mass, shift, x).lambda;
}

}  // namespace plap
