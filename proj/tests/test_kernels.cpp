#include <gtest/gtest.h>

#include <cmath>

#include "lightharvest/kernels.hpp"

using namespace lightharvest;

// Reference values computed to 30 digits with mpmath.
TEST(Kernels, AuxFunctionValues) {
    EXPECT_NEAR(f_aux(2.0), 0.278652479555518296, 1e-15);
    EXPECT_NEAR(f_aux(1.5), 0.104064153758168379, 1e-15);
    EXPECT_NEAR(f_aux_excess(1.0), f_aux(2.0), 1e-16);
}

TEST(Kernels, InverseValues) {
    EXPECT_EQ(f_inverse(0.0), 1.0);
    EXPECT_NEAR(f_inverse(1e-6), 1.00117833480850267664, 1e-13);
    EXPECT_NEAR(f_inverse(0.5), 2.62729152096463867651, 1e-13);
    EXPECT_NEAR(f_inverse(1.0), 4.31107040700100503505, 1e-12);
    EXPECT_NEAR(f_inverse(10.0) / 2782.52041262733288134, 1.0, 1e-13);
}

TEST(Kernels, RoundTrip) {
    for (double lam = 1e-6; lam < 1e3; lam *= 1.7) {
        const double w = f_inverse_excess(lam);
        EXPECT_NEAR(f_aux_excess(w), lam, 1e-10 * lam) << "lambda " << lam;
    }
}

TEST(Kernels, InverseRejectsNegative) {
    EXPECT_THROW(f_inverse(-1.0), std::domain_error);
    EXPECT_THROW(f_aux_excess(0.0), std::domain_error);
}

TEST(Kernels, RateTerm) {
    EXPECT_EQ(rate_term(0.0, 3.0), 0.0);
    EXPECT_EQ(rate_term(0.5, 0.0), 0.0);
    EXPECT_NEAR(rate_term(0.5, 1.0), 0.792481250360578091, 1e-15);
    EXPECT_NEAR(rate_term(1.0, 1.0), 1.0, 1e-15);
    EXPECT_THROW(rate_term(-0.1, 1.0), std::domain_error);
}

TEST(Kernels, RateTermDerivativeMatchesDifference) {
    for (double tau : {0.05, 0.3, 0.9})
        for (double y : {0.01, 1.0, 50.0}) {
            const double h = 1e-6 * tau;
            const double fd = (rate_term(tau + h, y) - rate_term(tau - h, y)) / (2.0 * h);
            EXPECT_NEAR(rate_term_dtau(tau, y), fd, 1e-7 * std::fmax(1.0, std::abs(fd)));
        }
}
