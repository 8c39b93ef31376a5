#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "plap/model.hpp"

using namespace plap;

namespace {

const Params kNeg = Params::make(2.0, 2.0, -1.0);
const Params kPos = Params::make(2.0, 2.0, 1.0);

double sample_point(Family f) {
    switch (f) {
        case Family::cosine:
            return 0.4;
        case Family::sinh:
            return 0.8;
        default:
            return -0.7;
    }
}

}  // namespace

TEST(Params, Validation) {
    EXPECT_NO_THROW(Params::make(2.0, 2.0, -1.0, 1.0));
    EXPECT_NO_THROW(Params::make(2.0, 1.0, -1.0));
    EXPECT_NO_THROW(Params::make(2.0, 2.5, -1.0));
    EXPECT_THROW(static_cast<void>(Params::make(1.0, 2.0, -1.0)), DomainError);
    EXPECT_THROW(static_cast<void>(Params::make(0.5, 2.0, -1.0)), DomainError);
    EXPECT_THROW(static_cast<void>(Params::make(2.0, 0.5, -1.0)), DomainError);
    EXPECT_THROW(static_cast<void>(Params::make(2.0, 2.0, 0.0)), DomainError);
    EXPECT_THROW(static_cast<void>(Params::make(2.0, 2.0, -1.0, 0.0)), DomainError);
    EXPECT_THROW(static_cast<void>(Params::make(2.0, 2.0, -1.0, -1.0)), DomainError);
}

TEST(Params, DiameterCapForPositiveCurvature) {
    EXPECT_NO_THROW(Params::make(2.0, 3.0, 1.0, std::numbers::pi));
    EXPECT_NO_THROW(Params::make(2.0, 3.0, 4.0, std::numbers::pi / 2.0));
    try {
        static_cast<void>(Params::make(2.0, 2.0, 1.0, 4.0));
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("D <= pi/sqrt(kappa)"), std::string::npos) << e.what();
    }
    EXPECT_DOUBLE_EQ(Params::make(2.0, 2.0, 4.0).max_diameter(), std::numbers::pi / 2.0);
    EXPECT_TRUE(std::isinf(kNeg.max_diameter()));
}

TEST(Params, WithDiameterValidates) {
    EXPECT_EQ(kNeg.with_diameter(3.0).D, 3.0);
    EXPECT_THROW(static_cast<void>(kPos.with_diameter(3.2)), DomainError);
}

TEST(FamilyIndex, RoundTrip) {
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(index_of(family_from_index(i)), i);
    }
    EXPECT_THROW(static_cast<void>(family_from_index(4)), DomainError);
    EXPECT_THROW(static_cast<void>(family_from_index(-1)), DomainError);
    EXPECT_EQ(comparison_family(kPos), Family::cosine);
    EXPECT_EQ(comparison_family(kNeg), Family::cosh);
}

TEST(Drift, KnownValues) {
    EXPECT_DOUBLE_EQ(drift(Family::cosine, kPos, 0.0), 0.0);
    EXPECT_NEAR(drift(Family::cosine, kPos, std::numbers::pi / 4.0), 1.0, 1e-15);
    const Params three = Params::make(2.0, 3.0, -1.0);
    for (double t : {-5.0, 0.0, 2.0, 40.0}) {
        EXPECT_DOUBLE_EQ(drift(Family::exponential, three, t), -2.0);
    }
    EXPECT_DOUBLE_EQ(drift(Family::cosh, kNeg, 0.0), 0.0);
    EXPECT_NEAR(drift(Family::cosh, kNeg, 50.0), -1.0, 1e-15);
    EXPECT_NEAR(drift(Family::sinh, kNeg, 50.0), -1.0, 1e-15);
}

TEST(Drift, ScalesWithCurvature) {
    const Params four = Params::make(2.0, 3.0, -4.0);
    EXPECT_DOUBLE_EQ(drift(Family::exponential, four, 1.0), -4.0);
    EXPECT_NEAR(drift(Family::cosh, four, 0.3), -4.0 * std::tanh(0.6), 1e-15);
}

TEST(Drift, SingularEndpoints) {
    const double edge = std::numbers::pi / 2.0;
    EXPECT_THROW(static_cast<void>(drift(Family::cosine, kPos, edge)), SingularityError);
    EXPECT_THROW(static_cast<void>(drift(Family::cosine, kPos, -edge)), SingularityError);
    EXPECT_THROW(static_cast<void>(drift(Family::sinh, kNeg, 0.0)), SingularityError);
}

TEST(Drift, OutsideDomain) {
    EXPECT_THROW(static_cast<void>(drift(Family::cosine, kPos, 2.0)), DomainError);
    EXPECT_THROW(static_cast<void>(drift(Family::sinh, kNeg, -1.0)), DomainError);
    try {
        static_cast<void>(drift(Family::sinh, kNeg, -1.0));
    } catch (const SingularityError&) {
        FAIL() << "an exterior point is not a singular endpoint";
    } catch (const DomainError&) {
    }
}

TEST(Drift, FamilyCurvatureMismatch) {
    EXPECT_THROW(static_cast<void>(ModelFamily(Family::cosine, kNeg)), DomainError);
    EXPECT_THROW(static_cast<void>(ModelFamily(Family::cosh, kPos)), DomainError);
    EXPECT_THROW(static_cast<void>(ModelFamily(Family::sinh, kPos)), DomainError);
}

TEST(WeightMu, KnownValues) {
    EXPECT_DOUBLE_EQ(weight_mu(Family::cosh, kNeg, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(weight_mu(Family::cosine, Params::make(2.0, 3.0, 1.0), 0.0), 1.0);
    EXPECT_DOUBLE_EQ(weight_mu(Family::sinh, kNeg, 0.0), 0.0);
    EXPECT_NEAR(weight_mu(Family::sinh, kNeg, 1e-9), 1e-9, 1e-20);
    EXPECT_NEAR(weight_mu(Family::cosine, Params::make(2.0, 3.0, 1.0), std::numbers::pi / 2.0), 0.0, 1e-30);
    EXPECT_NEAR(weight_mu(Family::exponential, Params::make(2.0, 3.0, -1.0), 1.0), std::exp(2.0), 1e-13);
    EXPECT_THROW(static_cast<void>(weight_mu(Family::sinh, kNeg, -0.1)), DomainError);
}

// T_i = -(log mu_i)' on every family and several dimensions.
TEST(Drift, IsMinusLogDerivativeOfWeight) {
    for (double n : {1.5, 2.0, 3.0, 7.0}) {
        for (Family f : {Family::cosine, Family::sinh, Family::exponential, Family::cosh}) {
            const Params params = Params::make(2.0, n, f == Family::cosine ? 1.0 : -1.0);
            const ModelFamily model(f, params);
            const double t = sample_point(f);
            const double h = 1e-6;
            const double dlog = (std::log(model.mu(t + h)) - std::log(model.mu(t - h))) / (2.0 * h);
            EXPECT_NEAR(model.drift(t), -dlog, 1e-8) << "family " << index_of(f) << ", n = " << n;
        }
    }
}

// T' = (n-1) kappa + T^2/(n-1) holds for all four families.
TEST(Drift, RiccatiIdentity) {
    for (double n : {1.5, 2.0, 3.0}) {
        for (double kappa_abs : {1.0, 2.5}) {
            for (Family f : {Family::cosine, Family::sinh, Family::exponential, Family::cosh}) {
                const double kappa = f == Family::cosine ? kappa_abs : -kappa_abs;
                const Params params = Params::make(2.0, n, kappa);
                const ModelFamily model(f, params);
                const double t = sample_point(f) / std::sqrt(kappa_abs);
                const double h = 1e-5;
                const double dT = (model.drift(t + h) - model.drift(t - h)) / (2.0 * h);
                const double T = model.drift(t);
                EXPECT_NEAR(dT, (n - 1.0) * kappa + T * T / (n - 1.0), 1e-7)
                    << "family " << index_of(f) << ", n = " << n << ", kappa = " << kappa;
            }
        }
    }
}

TEST(SignedPow, KnownValues) {
    EXPECT_DOUBLE_EQ(signed_pow(2.0, 2.0), 4.0);
    EXPECT_DOUBLE_EQ(signed_pow(-2.0, 2.0), -4.0);
    EXPECT_NEAR(signed_pow(-0.5, 0.5), -0.70710678118654752, 1e-15);
    EXPECT_DOUBLE_EQ(signed_pow(0.0, 0.3), 0.0);
    for (double x : {-3.5, -1.0, -1e-7, 0.0, 2e-9, 0.4, 12.0}) {
        EXPECT_DOUBLE_EQ(signed_pow(x, 1.0), x);
    }
}

TEST(SignedPow, OddAndInverse) {
    for (double x : {-3.0, -0.2, 0.7, 5.0}) {
        for (double q : {0.5, 1.5, 2.0, 3.3}) {
            EXPECT_DOUBLE_EQ(signed_pow(-x, q), -signed_pow(x, q));
            EXPECT_NEAR(signed_pow(signed_pow(x, q), 1.0 / q), x, 1e-13 * std::abs(x));
        }
    }
}

TEST(SignedPow, RejectsNonPositiveExponent) {
    EXPECT_THROW(static_cast<void>(signed_pow(1.0, 0.0)), DomainError);
    EXPECT_THROW(static_cast<void>(signed_pow(1.0, -1.0)), DomainError);
}

TEST(AlphaLambda, RoundTrip) {
    for (double p : {1.2, 2.0, 3.0, 6.0}) {
        for (double lambda : {0.01, 1.0, 9.3, 400.0}) {
            EXPECT_NEAR(lambda_from_alpha(alpha_from_lambda(lambda, p), p), lambda, 1e-12 * lambda);
        }
    }
    EXPECT_DOUBLE_EQ(alpha_from_lambda(4.0, 2.0), 2.0);
}
