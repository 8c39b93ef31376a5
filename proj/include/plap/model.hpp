#pragma once

// Problem data and the four one-dimensional drift models.
//
// Every model is written as
//
//     d/dt (w')^(p-1) - T(t) (w')^(p-1) + lambda w^(p-1) = 0,
//
// i.e. (mu (w')^(p-1))' + lambda mu w^(p-1) = 0 with mu = exp(-int T). With
// s = sqrt|kappa| and m = n - 1:
//
//   family 0 (kappa > 0): T =  m s tan(s t),   mu = cos(s t)^m,  I = (-pi/2s, pi/2s)
//   family 1 (kappa < 0): T = -m s coth(s t),  mu = sinh(s t)^m, I = (0, inf)
//   family 2 (kappa < 0): T = -m s,            mu = exp(s t)^m,  I = R
//   family 3 (kappa < 0): T = -m s tanh(s t),  mu = cosh(s t)^m, I = R
//
// All four satisfy the Riccati identity T' = T^2/m + m kappa.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "plap/errors.hpp"
#include "plap/ptrig.hpp"

namespace plap {

/// Signed power |x|^(q-1) x; signed_pow(0, q) = 0.
inline double signed_pow(double x, double q) {
    if (!(q > 0.0)) {
        throw DomainError("signed_pow requires q > 0");
    }
    if (x == 0.0) {
        return 0.0;
    }
    return std::copysign(std::pow(std::abs(x), q), x);
}

/// p, n, kappa and the (optional) diameter D.
///
/// n is any real >= 1; it plays the role of the dimension bound and need not
/// be an integer.
struct Params {
    double p = 2.0;
    double n = 2.0;
    double kappa = -1.0;
    std::optional<double> D;

    static Params make(double p, double n, double kappa, std::optional<double> D = std::nullopt) {
        Params out{p, n, kappa, D};
        out.validate();
        return out;
    }

    [[nodiscard]] Params with_diameter(double d) const {
        Params out = *this;
        out.D = d;
        out.validate();
        return out;
    }

    /// Largest admissible diameter pi/sqrt(kappa) for kappa > 0, +inf otherwise.
    [[nodiscard]] double max_diameter() const {
        return kappa > 0.0 ? std::numbers::pi / std::sqrt(kappa)
                           : std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] double sqrt_abs_kappa() const { return std::sqrt(std::abs(kappa)); }
    [[nodiscard]] PExponent exponent() const { return PExponent(p); }

    void validate() const {
        if (!(p > 1.0) || !std::isfinite(p)) {
            throw DomainError("p > 1 required");
        }
        if (!(n >= 1.0) || !std::isfinite(n)) {
            throw DomainError("n >= 1 required");
        }
        if (kappa == 0.0 || !std::isfinite(kappa)) {
            throw DomainError("kappa must be finite and nonzero");
        }
        if (D) {
            if (!(*D > 0.0) || !std::isfinite(*D)) {
                throw DomainError("D > 0 required");
            }
            if (kappa > 0.0 && *D > max_diameter()) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "kappa > 0 requires D <= pi/sqrt(kappa) = " << max_diameter()
                    << " (got D = " << *D << ")";
                throw DomainError(msg.str());
            }
        }
    }
};

/// Drift model index.
enum class Family : int { cosine = 0, sinh = 1, exponential = 2, cosh = 3 };

inline int index_of(Family f) { return static_cast<int>(f); }

inline Family family_from_index(int i) {
    if (i < 0 || i > 3) {
        throw DomainError("family index must be 0, 1, 2 or 3");
    }
    return static_cast<Family>(i);
}

/// Default family of the Neumann comparison problem for the sign of kappa.
inline Family comparison_family(const Params& params) {
    return params.kappa > 0.0 ? Family::cosine : Family::cosh;
}

/// Open interval I_i; infinite ends are +-inf.
struct Interval {
    double lo;
    double hi;

    [[nodiscard]] bool contains(double t) const { return t > lo && t < hi; }
    [[nodiscard]] bool contains_closure(double t) const { return t >= lo && t <= hi; }
};

/// One drift family bound to its parameters.
class ModelFamily {
  public:
    ModelFamily(Family family, const Params& params)
        : family_(family), n_minus_1_(params.n - 1.0), kappa_(params.kappa),
          s_(params.sqrt_abs_kappa()) {
        params.validate();
        if (family == Family::cosine && !(params.kappa > 0.0)) {
            throw DomainError("family 0 requires kappa > 0");
        }
        if (family != Family::cosine && !(params.kappa < 0.0)) {
            throw DomainError("families 1, 2, 3 require kappa < 0");
        }
    }

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] int index() const noexcept { return index_of(family_); }
    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] double n_minus_1() const noexcept { return n_minus_1_; }
    /// sqrt|kappa|; the inverse length scale of the model.
    [[nodiscard]] double rate() const noexcept { return s_; }

    [[nodiscard]] Interval domain() const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        switch (family_) {
            case Family::cosine: {
                const double edge = 0.5 * std::numbers::pi / s_;
                return {-edge, edge};
            }
            case Family::sinh:
                return {0.0, inf};
            default:
                return {-inf, inf};
        }
    }

    /// True when t is an endpoint at which T blows up like -(n-1)/(t - a).
    [[nodiscard]] bool is_singular_start(double t) const {
        if (n_minus_1_ == 0.0) {
            return false;
        }
        switch (family_) {
            case Family::cosine:
                return t == domain().lo;
            case Family::sinh:
                return t == 0.0;
            default:
                return false;
        }
    }

    [[nodiscard]] bool is_singular_point(double t) const {
        if (family_ == Family::cosine) {
            const Interval d = domain();
            return t == d.lo || t == d.hi;
        }
        return family_ == Family::sinh && t == 0.0;
    }

    /// T(t), with domain checks.
    [[nodiscard]] double drift(double t) const {
        if (is_singular_point(t)) {
            throw SingularityError("drift is singular at t = " + std::to_string(t) +
                                   "; use the regularized start");
        }
        if (!domain().contains(t)) {
            throw DomainError("t = " + std::to_string(t) + " outside the family domain");
        }
        return drift_unchecked(t);
    }

    /// T(t) without domain checks; the integrator's hot path.
    [[nodiscard]] double drift_unchecked(double t) const noexcept {
        switch (family_) {
            case Family::cosine:
                return n_minus_1_ * s_ * std::tan(s_ * t);
            case Family::sinh:
                return -n_minus_1_ * s_ / std::tanh(s_ * t);
            case Family::exponential:
                return -n_minus_1_ * s_;
            case Family::cosh:
                return -n_minus_1_ * s_ * std::tanh(s_ * t);
        }
        return 0.0;
    }

    /// tau_i(t).
    [[nodiscard]] double tau(double t) const {
        switch (family_) {
            case Family::cosine:
                return std::cos(s_ * t);
            case Family::sinh:
                return std::sinh(s_ * t);
            case Family::exponential:
                return std::exp(s_ * t);
            case Family::cosh:
                return std::cosh(s_ * t);
        }
        return 0.0;
    }

    /// mu_i(t) = tau_i(t)^(n-1) on the closure of I_i.
    [[nodiscard]] double mu(double t) const {
        if (!domain().contains_closure(t)) {
            throw DomainError("t = " + std::to_string(t) + " outside the closure of the family domain");
        }
        if (family_ == Family::exponential) {
            return std::exp(n_minus_1_ * s_ * t);
        }
        return std::pow(std::max(tau(t), 0.0), n_minus_1_);
    }

  private:
    Family family_;
    double n_minus_1_;
    double kappa_;
    double s_;
};

inline double drift(Family family, const Params& params, double t) {
    return ModelFamily(family, params).drift(t);
}

inline double weight_mu(Family family, const Params& params, double t) {
    return ModelFamily(family, params).mu(t);
}

/// alpha = (lambda/(p-1))^(1/p) and its inverse lambda = (p-1) alpha^p.
inline double alpha_from_lambda(double lambda, double p) {
    return std::pow(lambda / (p - 1.0), 1.0 / p);
}

inline double lambda_from_alpha(double alpha, double p) {
    return (p - 1.0) * std::pow(alpha, p);
}

}  // namespace plap
