// Small dense log-barrier interior-point method for
//
//     maximize f(x)  s.t.  A x = b,  G x <= h,  c_j(x) >= 0,
//
// with f and every c_j concave and twice differentiable on the strict
// interior. Equality constraints are handled in the Newton KKT system, so a
// start point satisfying A x = b keeps them satisfied to rounding error.
// Sized for the allocation problems here (tens of variables).
#ifndef LIGHTHARVEST_CONVEX_HPP
#define LIGHTHARVEST_CONVEX_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lightharvest::convex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Concave function with value, gradient and Hessian. `derivatives` must
/// overwrite grad and hess (both pre-sized).
struct SmoothConcave {
    std::function<double(const Vector&)> value;
    std::function<void(const Vector&, Vector&, Matrix&)> derivatives;
};

inline SmoothConcave linear_function(Vector coeffs, double offset = 0.0) {
    SmoothConcave f;
    f.value = [coeffs, offset](const Vector& x) { return coeffs.dot(x) + offset; };
    f.derivatives = [coeffs](const Vector&, Vector& g, Matrix& h) {
        g = coeffs;
        h.setZero();
    };
    return f;
}

struct Problem {
    SmoothConcave objective;
    Matrix eq_matrix;    // A
    Vector eq_rhs;       // b
    Matrix ineq_matrix;  // G
    Vector ineq_rhs;     // h
    std::vector<SmoothConcave> concave_constraints;

    Eigen::Index dimension() const { return ineq_matrix.cols(); }
    Eigen::Index constraint_count() const {
        return ineq_matrix.rows() + static_cast<Eigen::Index>(concave_constraints.size());
    }
};

struct Options {
    double gap_tolerance = 1e-8;  // stop when m / t falls below this
    double t_initial = 1.0;
    double t_growth = 20.0;
    double newton_tolerance = 1e-10;  // on half the squared Newton decrement
    int max_newton_per_centering = 50;
    int max_outer = 200;
};

enum class Status { Optimal, IterationLimit, NumericalFailure };

struct Result {
    Vector x;
    double objective = 0.0;
    Vector ineq_duals;     // one per row of G, >= 0
    Vector concave_duals;  // one per concave constraint, >= 0
    Vector eq_duals;       // one per row of A
    double duality_gap = std::numeric_limits<double>::infinity();
    double kkt_residual = std::numeric_limits<double>::infinity();
    int newton_iterations = 0;
    Status status = Status::NumericalFailure;
};

namespace detail {

/// Barrier objective phi_t(x) = -t f(x) - sum log(h - Gx) - sum log c(x).
/// Returns +inf outside the strict interior.
inline double barrier_value(const Problem& p, const Vector& x, double t) {
    const Vector slack = p.ineq_rhs - p.ineq_matrix * x;
    if (slack.size() > 0 && !(slack.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
    double v = 0.0;
    for (Eigen::Index i = 0; i < slack.size(); ++i) v -= std::log(slack[i]);
    for (const auto& c : p.concave_constraints) {
        const double cv = c.value(x);
        if (!(cv > 0.0) || !std::isfinite(cv)) return std::numeric_limits<double>::infinity();
        v -= std::log(cv);
    }
    const double f = p.objective.value(x);
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
    return v - t * f;
}

inline void barrier_derivatives(const Problem& p, const Vector& x, double t, Vector& grad,
                                Matrix& hess) {
    const Eigen::Index n = x.size();
    Vector g(n);
    Matrix h(n, n);
    p.objective.derivatives(x, g, h);
    grad = -t * g;
    hess = -t * h;
    if (p.ineq_matrix.rows() > 0) {
        const Vector inv_slack = (p.ineq_rhs - p.ineq_matrix * x).cwiseInverse();
        grad += p.ineq_matrix.transpose() * inv_slack;
        hess += p.ineq_matrix.transpose() * inv_slack.cwiseAbs2().asDiagonal() * p.ineq_matrix;
    }
    for (const auto& c : p.concave_constraints) {
        const double cv = c.value(x);
        c.derivatives(x, g, h);
        grad -= g / cv;
        hess += (g * g.transpose()) / (cv * cv) - h / cv;
    }
}

}  // namespace detail

/// Barrier method from a strictly feasible start with A x = b. `stop_early`
/// is consulted after each centering step.
inline Result maximize(const Problem& p, const Vector& start, const Options& opt = {},
                       const std::function<bool(const Vector&)>& stop_early = {}) {
    const Eigen::Index n = p.dimension();
    const Eigen::Index n_eq = p.eq_matrix.rows();
    const double m = static_cast<double>(p.constraint_count());
    if (start.size() != n) throw std::invalid_argument("convex::maximize: start has wrong size");

    Result res;
    Vector x = start;
    double t = opt.t_initial;
    if (!std::isfinite(detail::barrier_value(p, x, t)))
        throw std::invalid_argument("convex::maximize: start is not strictly feasible");

    Vector grad(n);
    Matrix hess(n, n);
    Matrix kkt(n + n_eq, n + n_eq);
    Vector rhs(n + n_eq);
    bool numerical_trouble = false;
    int outer = 0;
    for (; outer < opt.max_outer; ++outer) {
        // The last centering fixes the dual estimates: tighter and longer.
        const bool last = m / t < opt.gap_tolerance;
        const int budget = last ? 4 * opt.max_newton_per_centering : opt.max_newton_per_centering;
        const double newton_tol = last ? 1e-6 * opt.newton_tolerance : opt.newton_tolerance;
        for (int it = 0; it < budget; ++it) {
            detail::barrier_derivatives(p, x, t, grad, hess);
            // Symmetric Jacobi scaling: barrier terms of near-active rows
            // make the diagonal span many decades.
            Vector d(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double hii = hess(i, i);
                d[i] = hii > 0.0 && std::isfinite(hii) ? 1.0 / std::sqrt(hii) : 1.0;
            }
            kkt.setZero();
            kkt.topLeftCorner(n, n) = d.asDiagonal() * hess * d.asDiagonal();
            if (n_eq > 0) {
                kkt.topRightCorner(n, n_eq) = (p.eq_matrix * d.asDiagonal()).transpose();
                kkt.bottomLeftCorner(n_eq, n) = p.eq_matrix * d.asDiagonal();
            }
            rhs.head(n) = -grad.cwiseProduct(d);
            if (n_eq > 0) rhs.tail(n_eq) = p.eq_rhs - p.eq_matrix * x;
            const Vector sol = kkt.partialPivLu().solve(rhs);
            const Vector dx = sol.head(n).cwiseProduct(d);
            if (!dx.allFinite()) {
                numerical_trouble = true;
                break;
            }
            ++res.newton_iterations;
            const double decrement2 = dx.dot(hess * dx);
            if (0.5 * decrement2 <= newton_tol) break;

            const double f0 = detail::barrier_value(p, x, t);
            const double slope = grad.dot(dx);
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 80; ++ls) {
                const Vector xn = x + step * dx;
                const double fn = detail::barrier_value(p, xn, t);
                if (std::isfinite(fn) && fn <= f0 + 0.25 * step * slope) {
                    x = xn;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;  // no further progress at this t
        }
        if (numerical_trouble) break;
        if (stop_early && stop_early(x)) break;
        if (last) break;
        t *= opt.t_growth;
    }

    res.x = x;
    res.objective = p.objective.value(x);
    res.duality_gap = m / t;

    // Dual estimates from the central path.
    const Vector slack = p.ineq_rhs - p.ineq_matrix * x;
    res.ineq_duals = (slack.cwiseInverse() / t);
    res.concave_duals.resize(static_cast<Eigen::Index>(p.concave_constraints.size()));
    Vector g(n);
    Matrix h(n, n);
    p.objective.derivatives(x, g, h);
    Vector residual = g - p.ineq_matrix.transpose() * res.ineq_duals;
    for (std::size_t j = 0; j < p.concave_constraints.size(); ++j) {
        const auto& c = p.concave_constraints[j];
        const double lam = 1.0 / (t * c.value(x));
        res.concave_duals[static_cast<Eigen::Index>(j)] = lam;
        Vector gc(n);
        Matrix hc(n, n);
        c.derivatives(x, gc, hc);
        residual += lam * gc;
    }
    if (n_eq > 0) {
        // Least-squares equality multipliers for the remaining gradient.
        res.eq_duals = p.eq_matrix.transpose().colPivHouseholderQr().solve(residual);
        residual -= p.eq_matrix.transpose() * res.eq_duals;
    } else {
        res.eq_duals.resize(0);
    }
    res.kkt_residual = residual.size() > 0 ? residual.cwiseAbs().maxCoeff() : 0.0;
    if (numerical_trouble || !x.allFinite())
        res.status = Status::NumericalFailure;
    else if (outer >= opt.max_outer)
        res.status = Status::IterationLimit;
    else
        res.status = Status::Optimal;
    return res;
}

/// Projects `guess` onto {A x = b} in the Euclidean norm.
inline Vector project_affine(const Matrix& a, const Vector& b, const Vector& guess) {
    if (a.rows() == 0) return guess;
    const Vector r = a * guess - b;
    const Vector y = (a * a.transpose()).ldlt().solve(r);
    return guess - a.transpose() * y;
}

/// Phase I: a point with A x = b and G x < h (concave constraints are the
/// caller's business). Returns nullopt when the polytope has no strict
/// interior, up to `margin`.
inline std::optional<Vector> strictly_feasible_point(const Problem& p, const Vector& guess,
                                                     double margin = 1e-9) {
    const Eigen::Index n = p.dimension();
    const Eigen::Index rows = p.ineq_matrix.rows();
    Vector x0 = project_affine(p.eq_matrix, p.eq_rhs, guess);
    if (rows == 0) return x0;
    const double worst = (p.ineq_matrix * x0 - p.ineq_rhs).maxCoeff();
    if (worst < -1e-6) return x0;

    // Variables (x, s): maximize -s  s.t.  G x - s <= h,  -s <= 1.
    Problem ph;
    Vector obj = Vector::Zero(n + 1);
    obj[n] = -1.0;
    ph.objective = linear_function(obj);
    ph.eq_matrix = Matrix::Zero(p.eq_matrix.rows(), n + 1);
    ph.eq_matrix.leftCols(n) = p.eq_matrix;
    ph.eq_rhs = p.eq_rhs;
    ph.ineq_matrix = Matrix::Zero(rows + 1, n + 1);
    ph.ineq_matrix.topLeftCorner(rows, n) = p.ineq_matrix;
    ph.ineq_matrix.col(n).head(rows).setConstant(-1.0);
    ph.ineq_matrix(rows, n) = -1.0;
    ph.ineq_rhs.resize(rows + 1);
    ph.ineq_rhs.head(rows) = p.ineq_rhs;
    ph.ineq_rhs[rows] = 1.0;

    Vector start(n + 1);
    start.head(n) = x0;
    start[n] = std::max(worst, -0.5) + 1.0;

    const double target = -std::max(1e-6, 100.0 * margin);
    Options opt;
    opt.gap_tolerance = margin * 1e-2;
    const auto res = maximize(ph, start, opt, [n, target](const Vector& z) { return z[n] < target; });
    if (!(res.x[n] < -margin)) return std::nullopt;
    return Vector(res.x.head(n));
}

}  // namespace lightharvest::convex

#endif  // LIGHTHARVEST_CONVEX_HPP
