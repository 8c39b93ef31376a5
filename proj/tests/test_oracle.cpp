#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "plap/oracle.hpp"
#include "plap/spectrum.hpp"

using namespace plap;

namespace {

constexpr double kPi = std::numbers::pi;

double warped(double scale, std::size_t Jt, std::size_t Kt, bool flat = false, double D = 1.0) {
    WarpedMesh mesh;
    mesh.scale = scale;
    mesh.Jt = Jt;
    mesh.Ktheta = Kt;
    mesh.flat = flat;
    mesh.D = D;
    return warped_p2_eigenvalue(mesh);
}

}  // namespace

TEST(WeightedGrid, Construction) {
    const WeightedGrid g = WeightedGrid::uniform(2.0, 16);
    EXPECT_EQ(g.t.size(), 17u);
    EXPECT_EQ(g.rho_mid.size(), 16u);
    EXPECT_DOUBLE_EQ(g.t.front(), -1.0);
    EXPECT_DOUBLE_EQ(g.t.back(), 1.0);
    double total = 0.0;
    for (double m : g.mass()) {
        total += m;
    }
    EXPECT_NEAR(total, 2.0, 1e-14);
}

TEST(WeightedGrid, Errors) {
    EXPECT_THROW(static_cast<void>(WeightedGrid::uniform(1.0, 8)), DomainError);
    EXPECT_THROW(static_cast<void>(WeightedGrid::uniform(0.0, 64)), DomainError);
    EXPECT_THROW(static_cast<void>(WeightedGrid::make(1.0, 64, [](double t) { return t; })), DomainError);
    EXPECT_THROW(static_cast<void>(WeightedGrid::for_params(Params::make(2.0, 2.0, -1.0), 64)), DomainError);
}

TEST(WeightedGrid, SphereWeightVanishesAtPoles) {
    const WeightedGrid g = WeightedGrid::for_params(Params::make(2.0, 3.0, 1.0, kPi), 64);
    EXPECT_NEAR(g.rho.front(), 0.0, 1e-30);
    EXPECT_NEAR(g.rho.back(), 0.0, 1e-30);
    EXPECT_DOUBLE_EQ(g.rho[32], 1.0);
}

TEST(FiniteDifference, ClassicalInterval) {
    double prev_err = 0.0;
    for (std::size_t J : {128u, 256u, 512u}) {
        const double err = std::abs(fd_eigenvalue_p2(WeightedGrid::uniform(kPi, J)) - 1.0);
        EXPECT_LT(err, 2.0 / static_cast<double>(J * J)) << "J = " << J;
        if (prev_err > 0.0) {
            EXPECT_NEAR(prev_err / err, 4.0, 0.1);
        }
        prev_err = err;
    }
}

TEST(FiniteDifference, ScalesWithLength) {
    const double one = fd_eigenvalue_p2(WeightedGrid::uniform(1.0, 256));
    const double two = fd_eigenvalue_p2(WeightedGrid::uniform(2.0, 256));
    EXPECT_NEAR(one / two, 4.0, 1e-12);
}

TEST(FiniteDifference, SphereLimitByRefinement) {
    const Params params = Params::make(2.0, 3.0, 1.0, kPi);
    const double l1 = fd_eigenvalue_p2(WeightedGrid::for_params(params, 256));
    const double l2 = fd_eigenvalue_p2(WeightedGrid::for_params(params, 512));
    const double extrap = l2 + (l2 - l1) / 3.0;
    EXPECT_NEAR(extrap, 3.0, 1e-5);
}

TEST(FiniteDifference, AgreesWithShootingAtSecondOrder) {
    for (double kappa : {-1.0, 1.0}) {
        for (double n : {2.0, 3.0}) {
            const Params params = Params::make(2.0, n, kappa, 2.0);
            const double shoot = lambda_D(params).lambda;
            std::vector<double> err;
            for (std::size_t J : {256u, 512u, 1024u, 2048u, 4096u}) {
                err.push_back(std::abs(fd_eigenvalue_p2(WeightedGrid::for_params(params, J)) - shoot) / shoot);
            }
            EXPECT_LT(err.back(), 1e-5);
            for (std::size_t k = 1; k < err.size(); ++k) {
                EXPECT_GE(std::log2(err[k - 1] / err[k]), 1.9) << "kappa = " << kappa << ", n = " << n;
            }
        }
    }
}

TEST(Rayleigh, ClassicalCase) {
    const RayleighResult r = rayleigh_minimize_p(WeightedGrid::uniform(kPi, 256), 2.0);
    EXPECT_NEAR(r.lambda0, 1.0, 1e-3);
    EXPECT_LT(r.constraint_residual, 1e-10);
    EXPECT_EQ(r.w.size(), 257u);
}

TEST(Rayleigh, FlatCubicCase) {
    const RayleighResult r = rayleigh_minimize_p(WeightedGrid::uniform(1.0, 256), 3.0);
    const double flat = 2.0 * std::pow(pi_p(PExponent(3.0)), 3.0);
    EXPECT_NEAR(r.lambda0 / flat, 1.0, 1e-2);
}

TEST(Rayleigh, MatchesFiniteDifferenceAtTwo) {
    const WeightedGrid grid = WeightedGrid::for_params(Params::make(2.0, 3.0, -1.0, 1.0), 200);
    EXPECT_NEAR(rayleigh_minimize_p(grid, 2.0).lambda0 / fd_eigenvalue_p2(grid), 1.0, 1e-3);
}

TEST(Rayleigh, NotBelowShootingForLargeP) {
    const Params params = Params::make(3.0, 2.0, -1.0, 1.0);
    const double shoot = lambda_D(params).lambda;
    const RayleighResult r = rayleigh_minimize_p(WeightedGrid::for_params(params, 200), 3.0);
    EXPECT_GE(r.lambda0, shoot - 1e-2 * shoot);
    EXPECT_LE(r.lambda0, shoot + 1e-2 * shoot);
}

TEST(Rayleigh, Deterministic) {
    const WeightedGrid grid = WeightedGrid::for_params(Params::make(2.5, 2.0, -1.0, 1.0), 96);
    const RayleighResult a = rayleigh_minimize_p(grid, 2.5, 500);
    const RayleighResult b = rayleigh_minimize_p(grid, 2.5, 500);
    EXPECT_EQ(a.lambda0, b.lambda0);
    EXPECT_EQ(a.w, b.w);
}

TEST(Rayleigh, MinimizerIsSupNormalized) {
    const RayleighResult r = rayleigh_minimize_p(WeightedGrid::uniform(1.0, 128), 1.5);
    double sup = 0.0;
    for (double w : r.w) {
        sup = std::max(sup, std::abs(w));
    }
    EXPECT_NEAR(sup, 1.0, 1e-14);
}

TEST(Warped, ProductCylinderSpectrum) {
    // angular mode 1/c^2 against the radial mode (pi/D)^2
    const double dth = 2.0 * kPi / 64.0;
    const double angular = std::pow(2.0 * std::sin(0.5 * dth) / dth, 2) / 0.25;
    EXPECT_NEAR(warped(0.5, 256, 64, true), angular, 1e-10 * angular);
    EXPECT_NEAR(warped(0.2, 256, 64, true) / (kPi * kPi), 1.0, 1e-4);
}

TEST(Warped, ThinWarpApproachesWeightedProblem) {
    const double target = lambda_D(Params::make(2.0, 2.0, -1.0, 1.0)).lambda;
    const double value = warped(1.0 / 20.0, 256, 64);
    EXPECT_LE(value, 1.05 * target);
    EXPECT_NEAR(value / target, 1.0, 1e-4);
}

TEST(Warped, SecondOrderRefinement) {
    const double a = warped(0.05, 64, 16);
    const double b = warped(0.05, 128, 32);
    const double c = warped(0.05, 256, 64);
    EXPECT_NEAR((a - b) / (b - c), 4.0, 0.1);
}

TEST(Warped, Validation) {
    WarpedMesh mesh;
    mesh.kappa = 1.0;
    EXPECT_THROW(static_cast<void>(warped_p2_eigenvalue(mesh)), DomainError);
    mesh.kappa = -1.0;
    mesh.scale = 0.0;
    EXPECT_THROW(static_cast<void>(warped_p2_eigenvalue(mesh)), DomainError);
    mesh.scale = 1.0;
    mesh.Jt = 8;
    EXPECT_THROW(static_cast<void>(warped_p2_eigenvalue(mesh)), DomainError);
}
