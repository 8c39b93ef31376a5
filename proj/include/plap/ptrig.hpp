#pragma once

// Generalized trigonometric functions pi_p, sin_p, cos_p, arcsin_p.
//
// On the core branch [-pi_p/2, pi_p/2], sin_p is the inverse of
//
//     F_p(s) = int_0^s (1 - sigma^p)^(-1/p) dsigma,
//
// extended by sin_p(t) = sin_p(pi_p - t) on [pi_p/2, 3 pi_p/2] and
// 2 pi_p-periodically elsewhere; cos_p = sin_p'.
//
// The integrand of F_p is unbounded at s = 1. We never evaluate F_p there.
// Writing c = cos_p(t) and q = p/(p-1) for the conjugate exponent, the
// substitution sigma = (1 - gamma^p)^(1/p) followed by u = gamma^(p-1) gives
//
//     (p - 1) (pi_p/2 - t) = F_q(|c|^(p-1)),
//
// so the quarter-period splits at the point |sin_p|^p = |cos_p|^p = 1/2:
// below it we invert F_p for s, above it we invert F_q for |c|^(p-1).
// Both inversions stay on [0, 2^(-1/r)] where the integrand is bounded by
// 2^(1/r) and the hypergeometric series
//
//     F_r(s) = s * sum_k (1/r)_k / k! * s^(rk) / (rk + 1)
//
// converges at least like 2^-k.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "plap/errors.hpp"

namespace plap {

/// Exponent p of the p-Laplacian; always p > 1.
class PExponent {
  public:
    explicit PExponent(double p) : p_(p) {
        if (!(p > 1.0) || !std::isfinite(p)) {
            throw DomainError("p > 1 required (got p = " + std::to_string(p) + ")");
        }
    }

    [[nodiscard]] double value() const noexcept { return p_; }
    /// Conjugate exponent q with 1/p + 1/q = 1.
    [[nodiscard]] double conjugate() const noexcept { return p_ / (p_ - 1.0); }

  private:
    double p_;
};

/// pi_p from its defining integral, by tanh-sinh quadrature. Independent of
/// the closed form and of the series used by GeneralizedTrig.
///
/// The substitution s = 1 - u^k with k = p/(p-1) turns the endpoint
/// singularity (1 - s)^(-1/p) into a bounded integrand; error target 1e-12.
inline double pi_p_by_quadrature(PExponent p) {
    const double pv = p.value();
    const double k = p.conjugate();
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto integrand = [pv, k](double u) {
        if (u <= 0.0) {
            return k * std::pow(pv, -1.0 / pv);
        }
        const double log_u = std::log(u);
        const double uk = std::exp(k * log_u);
        // log(1 - s^p) with s = 1 - u^k; 1 - s^p ~ p u^k for small u
        const double log_one_minus = uk < 1e-8
                                         ? std::log(pv) + k * log_u - 0.5 * (pv - 1.0) * uk
                                         : std::log(-std::expm1(pv * std::log1p(-uk)));
        // k u^(k-1) (1 - s^p)^(-1/p), grouped so the singular parts cancel
        return k * std::exp((k - 1.0) * log_u - log_one_minus / pv);
    };
    return 2.0 * integrator.integrate(integrand, 0.0, 1.0, 1e-13);
}

/// Closed form 2 pi / (p sin(pi/p)).
inline double pi_p(PExponent p) {
    const double pv = p.value();
    if (pv == 2.0) {
        return std::numbers::pi;
    }
    const double value = 2.0 * std::numbers::pi / (pv * std::sin(std::numbers::pi / pv));
#ifdef PLAP_DEBUG_PTRIG
    if (!(std::abs(pi_p_by_quadrature(p) - value) <= 1e-10 * value)) {
        throw NumericalError("pi_p closed form disagrees with quadrature");
    }
#endif
    return value;
}

/// Values of the p-trig pair at one argument. `cos_pm1` is the signed power
/// (cos_p)^(p-1) and `cos_abs_p` is |cos_p|^p, both computed without going
/// through cos_p itself so they keep full relative accuracy near the zeros
/// of cos_p.
struct SinCosP {
    double sin = 0.0;
    double cos = 0.0;
    double cos_pm1 = 0.0;
    double cos_abs_p = 0.0;
};

namespace detail {

// Series representation of F_r on [0, 2^(-1/r)] and its inverse.
class IncompleteIntegral {
  public:
    IncompleteIntegral() = default;

    explicit IncompleteIntegral(double r) : r_(r), inv_r_(1.0 / r) {
        split_s_ = std::exp2(-inv_r_);
        double rising = 1.0;  // (1/r)_k / k!
        for (int k = 0; k < 400; ++k) {
            const double c = rising / (r_ * k + 1.0);
            coeffs_.push_back(c);
            if (c * std::ldexp(1.0, -k) < 1e-19) {
                break;
            }
            rising *= (k + inv_r_) / (k + 1.0);
        }
        split_t_ = value(split_s_);
    }

    [[nodiscard]] double exponent() const noexcept { return r_; }
    [[nodiscard]] double split_s() const noexcept { return split_s_; }
    [[nodiscard]] double split_t() const noexcept { return split_t_; }

    /// F_r(s) for 0 <= s <= split_s.
    [[nodiscard]] double value(double s) const {
        const double x = std::pow(s, r_);
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * x + *it;
        }
        return s * acc;
    }

    /// s in [0, split_s] with F_r(s) = t, for 0 <= t <= split_t.
    ///
    /// F_r is convex and increasing with F_r(s) >= s, so Newton started at
    /// min(t, split_s) approaches the root monotonically from the right.
    [[nodiscard]] double inverse(double t) const {
        if (t <= 0.0) {
            return 0.0;
        }
        double s = std::min(t, split_s_);
        for (int iter = 0; iter < 60; ++iter) {
            const double x = std::pow(s, r_);
            double acc = 0.0;
            for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
                acc = acc * x + *it;
            }
            const double residual = s * acc - t;
            const double step = residual * std::pow(1.0 - x, inv_r_);
            s -= step;
            if (s <= 0.0) {
                s = 0.5 * (s + step);
            }
            if (std::abs(step) <= 2e-16 * s) {
                break;
            }
        }
        return s;
    }

  private:
    double r_ = 2.0;
    double inv_r_ = 0.5;
    double split_s_ = 0.0;
    double split_t_ = 0.0;
    std::vector<double> coeffs_;
};

}  // namespace detail

/// sin_p / cos_p evaluator for a fixed exponent. Immutable after
/// construction and safe to share between threads.
class GeneralizedTrig {
  public:
    explicit GeneralizedTrig(PExponent p)
        : p_(p.value()), q_(p.conjugate()), pi_p_(plap::pi_p(p)),
          is_two_(p.value() == 2.0) {
        if (!is_two_) {
            fp_ = detail::IncompleteIntegral(p_);
            fq_ = detail::IncompleteIntegral(q_);
        }
    }

    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] double q() const noexcept { return q_; }
    [[nodiscard]] double pi_p() const noexcept { return pi_p_; }
    [[nodiscard]] double half_pi_p() const noexcept { return 0.5 * pi_p_; }

    /// Argument in [0, pi_p/2] where |sin_p|^p = |cos_p|^p = 1/2.
    [[nodiscard]] double split_point() const noexcept {
        return is_two_ ? 0.25 * std::numbers::pi : fp_.split_t();
    }

    [[nodiscard]] SinCosP sincos(double t) const {
        SinCosP out;
        if (is_two_) {
            out.sin = std::sin(t);
            out.cos = std::cos(t);
            out.cos_pm1 = out.cos;
            out.cos_abs_p = out.cos * out.cos;
            return out;
        }
        const double period = 2.0 * pi_p_;
        const double half = 0.5 * pi_p_;
        double r = t;
        if (r < -half || r > 3.0 * half) {
            r -= period * std::floor((r + half) / period);
        }
        double cos_sign = 1.0;
        if (r > half) {
            r = pi_p_ - r;
            cos_sign = -1.0;
        }
        const double x = std::abs(r);
        double s = 0.0;
        double c = 0.0;
        double c_pm1 = 0.0;
        double c_abs_p = 0.0;
        if (x <= fp_.split_t()) {
            s = fp_.inverse(x);
            c_abs_p = 1.0 - std::pow(s, p_);
            c = std::pow(c_abs_p, 1.0 / p_);
            c_pm1 = std::pow(c_abs_p, 1.0 / q_);
        } else {
            const double y = (p_ - 1.0) * std::max(half - x, 0.0);
            c_pm1 = fq_.inverse(y);
            c = std::pow(c_pm1, 1.0 / (p_ - 1.0));
            c_abs_p = std::pow(c_pm1, q_);
            s = std::pow(1.0 - c_abs_p, 1.0 / p_);
        }
        out.sin = std::copysign(s, r);
        out.cos = cos_sign * c;
        out.cos_pm1 = cos_sign * c_pm1;
        out.cos_abs_p = c_abs_p;
        return out;
    }

    [[nodiscard]] double sin(double t) const { return sincos(t).sin; }
    [[nodiscard]] double cos(double t) const { return sincos(t).cos; }

    /// Inverse of sin_p on the core branch; result in [-pi_p/2, pi_p/2].
    [[nodiscard]] double arcsin(double s) const {
        if (!(std::abs(s) <= 1.0)) {
            throw DomainError("arcsin_p requires |s| <= 1");
        }
        if (is_two_) {
            return std::asin(s);
        }
        const double a = std::abs(s);
        double t = 0.0;
        if (a <= fp_.split_s()) {
            t = fp_.value(a);
        } else {
            const double c_abs_p = -std::expm1(p_ * std::log(a));
            const double c_pm1 = std::pow(c_abs_p, 1.0 / q_);
            t = 0.5 * pi_p_ - fq_.value(std::min(c_pm1, fq_.split_s())) / (p_ - 1.0);
        }
        return std::copysign(t, s);
    }

  private:
    double p_;
    double q_;
    double pi_p_;
    bool is_two_;
    detail::IncompleteIntegral fp_;
    detail::IncompleteIntegral fq_;
};

inline double sin_p(PExponent p, double t) { return GeneralizedTrig(p).sin(t); }
inline double cos_p(PExponent p, double t) { return GeneralizedTrig(p).cos(t); }
inline double arcsin_p(PExponent p, double s) { return GeneralizedTrig(p).arcsin(s); }

}  // namespace plap
