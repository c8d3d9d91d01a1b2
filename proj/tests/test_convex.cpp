#include <gtest/gtest.h>

#include <cmath>

#include "lightharvest/convex.hpp"

using namespace lightharvest::convex;

namespace {

// sum_i w_i log(x_i) over the simplex: optimum x_i = w_i / sum w.
SmoothConcave weighted_log(Vector w) {
    SmoothConcave f;
    f.value = [w](const Vector& x) {
        double v = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) v += w[i] * std::log(x[i]);
        return v;
    };
    f.derivatives = [w](const Vector& x, Vector& g, Matrix& h) {
        h.setZero();
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            g[i] = w[i] / x[i];
            h(i, i) = -w[i] / (x[i] * x[i]);
        }
    };
    return f;
}

Problem simplex(Eigen::Index n) {
    Problem p;
    p.eq_matrix = Matrix::Ones(1, n);
    p.eq_rhs = Vector::Ones(1);
    p.ineq_matrix = -Matrix::Identity(n, n);
    p.ineq_rhs = Vector::Zero(n);
    return p;
}

}  // namespace

TEST(Convex, WeightedLogOnSimplex) {
    Problem p = simplex(3);
    Vector w(3);
    w << 1.0, 2.0, 5.0;
    p.objective = weighted_log(w);
    const auto r = maximize(p, Vector::Constant(3, 1.0 / 3.0));
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.x[0], 0.125, 1e-8);
    EXPECT_NEAR(r.x[1], 0.25, 1e-8);
    EXPECT_NEAR(r.x[2], 0.625, 1e-8);
    EXPECT_NEAR(r.x.sum(), 1.0, 1e-12);
    EXPECT_NEAR(r.eq_duals[0], 8.0, 1e-5);
    EXPECT_LT(r.kkt_residual, 1e-6);
}

TEST(Convex, ConcaveQuadraticWithActiveBound) {
    // maximize -(x-2)^2 - (y-1)^2  s.t. x + y <= 1: optimum (1, 0), dual 2.
    Problem p;
    p.eq_matrix = Matrix::Zero(0, 2);
    p.eq_rhs = Vector::Zero(0);
    p.ineq_matrix = Matrix::Ones(1, 2);
    p.ineq_rhs = Vector::Ones(1);
    p.objective.value = [](const Vector& x) { return -(x[0] - 2) * (x[0] - 2) - (x[1] - 1) * (x[1] - 1); };
    p.objective.derivatives = [](const Vector& x, Vector& g, Matrix& h) {
        g << -2 * (x[0] - 2), -2 * (x[1] - 1);
        h.setZero();
        h(0, 0) = h(1, 1) = -2.0;
    };
    const auto r = maximize(p, Vector::Zero(2));
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.x[0], 1.0, 1e-7);
    EXPECT_NEAR(r.x[1], 0.0, 1e-7);
    EXPECT_NEAR(r.ineq_duals[0], 2.0, 1e-5);
}

TEST(Convex, ConcaveConstraintDisc) {
    // maximize x + y on the unit disc: optimum (1/sqrt2, 1/sqrt2).
    Problem p;
    p.eq_matrix = Matrix::Zero(0, 2);
    p.eq_rhs = Vector::Zero(0);
    p.ineq_matrix = Matrix::Zero(0, 2);
    p.ineq_rhs = Vector::Zero(0);
    p.objective = linear_function(Vector::Ones(2));
    SmoothConcave disc;
    disc.value = [](const Vector& x) { return 1.0 - x.squaredNorm(); };
    disc.derivatives = [](const Vector& x, Vector& g, Matrix& h) {
        g = -2.0 * x;
        h = -2.0 * Matrix::Identity(2, 2);
    };
    p.concave_constraints.push_back(disc);
    const auto r = maximize(p, Vector::Zero(2));
    EXPECT_NEAR(r.objective, std::sqrt(2.0), 1e-7);
    EXPECT_NEAR(r.concave_duals[0], 1.0 / std::sqrt(2.0), 1e-4);
}

TEST(Convex, RejectsInfeasibleStart) {
    Problem p = simplex(2);
    p.objective = linear_function(Vector::Ones(2));
    Vector x(2);
    x << 1.5, -0.5;
    EXPECT_THROW(maximize(p, x), std::invalid_argument);
}

TEST(Convex, PhaseOneFindsInterior) {
    Problem p = simplex(3);
    Vector guess(3);
    guess << 4.0, -2.0, -1.0;
    const auto x = strictly_feasible_point(p, guess);
    ASSERT_TRUE(x.has_value());
    EXPECT_NEAR(x->sum(), 1.0, 1e-12);
    EXPECT_GT(x->minCoeff(), 0.0);
}

TEST(Convex, PhaseOneDetectsEmptyInterior) {
    // x >= 0 and sum x = -1.
    Problem p = simplex(2);
    p.eq_rhs[0] = -1.0;
    EXPECT_FALSE(strictly_feasible_point(p, Vector::Zero(2)).has_value());
}
