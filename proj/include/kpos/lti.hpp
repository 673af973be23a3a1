#pragma once

#include <string>
#include <vector>

#include "kpos/matrix.hpp"
#include "kpos/variation.hpp"

namespace kpos {

enum class TimeDomain { discrete, continuous };

/// SISO state-space realization (A, b, c) with a time-domain tag.
struct StateSpace {
    Matrix A;
    Vector b;
    RowVector c;
    TimeDomain time_domain = TimeDomain::discrete;

    int order() const { return static_cast<int>(A.rows()); }
    bool is_discrete() const { return time_domain == TimeDomain::discrete; }
};

inline StateSpace make_state_space(Matrix A, Vector b, RowVector c, TimeDomain domain) {
    if (A.rows() != A.cols()) throw std::invalid_argument("StateSpace: A must be square");
    if (A.rows() == 0) throw std::invalid_argument("StateSpace: empty system");
    if (b.size() != A.rows()) throw std::invalid_argument("StateSpace: b must have length n");
    if (c.size() != A.rows()) throw std::invalid_argument("StateSpace: c must have length n");
    if (!A.allFinite() || !b.allFinite() || !c.allFinite())
        throw std::invalid_argument("StateSpace: entries must be finite");
    return StateSpace{std::move(A), std::move(b), std::move(c), domain};
}

/// Schur (discrete) or Hurwitz (continuous) stability; advisory only, finite
/// horizon computations stay well defined for unstable systems.
inline bool is_stable(const StateSpace& sys) {
    const auto ev = sorted_eigenvalues(sys.A);
    if (sys.is_discrete()) return std::abs(ev.front()) < 1.0;
    for (const auto& p : ev)
        if (p.real() >= 0) return false;
    return true;
}

/// Simple-pole partial fraction data, poles paired with residues.
struct PartialFractions {
    std::vector<double> poles;
    std::vector<double> residues;
};

/// C^j(A,b) = (b  Ab  ...  A^{j-1}b), built by iterated multiplication.
inline Matrix controllability_matrix(const Matrix& A, const Vector& b, int j) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw std::invalid_argument("controllability_matrix: inconsistent dimensions");
    if (j < 1) throw std::invalid_argument("controllability_matrix: j must be positive");
    Matrix C(A.rows(), j);
    Vector v = b;
    for (int i = 0; i < j; ++i) {
        C.col(i) = v;
        if (i + 1 < j) v = A * v;
    }
    return C;
}

/// O^j(A,c) = C^j(A^T, c^T)^T, rows c, cA, ..., cA^{j-1}.
inline Matrix observability_matrix(const Matrix& A, const RowVector& c, int j) {
    if (A.rows() != A.cols() || A.cols() != c.size())
        throw std::invalid_argument("observability_matrix: inconsistent dimensions");
    if (j < 1) throw std::invalid_argument("observability_matrix: j must be positive");
    Matrix O(j, A.cols());
    RowVector v = c;
    for (int i = 0; i < j; ++i) {
        O.row(i) = v;
        if (i + 1 < j) v = v * A;
    }
    return O;
}

/// Markov parameters g(1..horizon), g(t) = c A^{t-1} b; grid is 1..horizon.
inline Signal impulse_response(const StateSpace& sys, int horizon) {
    if (!sys.is_discrete())
        throw std::invalid_argument("impulse_response: use the (h, steps) overload for CT");
    if (horizon < 1) throw std::invalid_argument("impulse_response: horizon must be >= 1");
    std::vector<double> g, grid;
    g.reserve(horizon);
    grid.reserve(horizon);
    Vector v = sys.b;
    for (int t = 1; t <= horizon; ++t) {
        g.push_back(sys.c.dot(v));
        grid.push_back(t);
        if (t < horizon) v = sys.A * v;
    }
    return Signal{std::move(g), std::move(grid)};
}

/// CT impulse response g(t) = c e^{At} b sampled exactly on t = 0, h, ...,
/// (steps-1)h via one matrix exponential.
inline Signal impulse_response(const StateSpace& sys, double h, int steps) {
    if (sys.is_discrete())
        throw std::invalid_argument("impulse_response: (h, steps) overload is for CT systems");
    if (!(h > 0)) throw std::invalid_argument("impulse_response: h must be positive");
    if (steps < 1) throw std::invalid_argument("impulse_response: steps must be >= 1");
    const Matrix E = matrix_exponential(sys.A * h);
    std::vector<double> g, grid;
    Vector v = sys.b;
    for (int i = 0; i < steps; ++i) {
        g.push_back(sys.c.dot(v));
        grid.push_back(i * h);
        if (i + 1 < steps) v = E * v;
    }
    return Signal{std::move(g), std::move(grid)};
}

/// Running integral of the impulse response: cumulative sum in discrete time.
inline Signal step_response(const StateSpace& sys, int horizon) {
    Signal g = impulse_response(sys, horizon);
    double acc = 0;
    for (double& x : g.values) {
        acc += x;
        x = acc;
    }
    return g;
}

/// CT step response by cumulative trapezoidal integration of the sampled
/// impulse response.
inline Signal step_response(const StateSpace& sys, double h, int steps) {
    Signal g = impulse_response(sys, h, steps);
    double acc = 0, prev = 0;
    bool have_prev = false;
    for (double& x : g.values) {
        if (have_prev) acc += 0.5 * h * (prev + x);
        prev = x;
        have_prev = true;
        x = acc;
    }
    return g;
}

/// j x j Hankel matrix H_g(t,j) through the realization, O^j(A,c) A^{t-1} C^j(A,b).
inline Matrix hankel_matrix(const StateSpace& sys, int t, int j) {
    if (t < 1 || j < 1) throw std::invalid_argument("hankel_matrix: t and j must be positive");
    Matrix M = controllability_matrix(sys.A, sys.b, j);
    for (int i = 1; i < t; ++i) M = sys.A * M;
    return observability_matrix(sys.A, sys.c, j) * M;
}

/// H_g(t,j) from impulse samples, entry (p,q) = g(t+p+q-2) with g[i] = g(i+1).
inline Matrix hankel_matrix(const std::vector<double>& g, int t, int j) {
    if (t < 1 || j < 1) throw std::invalid_argument("hankel_matrix: t and j must be positive");
    if (static_cast<int>(g.size()) < t + 2 * j - 2)
        throw std::invalid_argument("hankel_matrix: need impulse samples up to g(" +
                                    std::to_string(t + 2 * j - 2) + ")");
    Matrix H(j, j);
    for (int p = 1; p <= j; ++p)
        for (int q = 1; q <= j; ++q) H(p - 1, q - 1) = g[t + p + q - 3];
    return H;
}

/// Companion-form realization: monic characteristic polynomial
/// z^n + a_{n-1} z^{n-1} + ... + a_0 with coeffs = (a_0, ..., a_{n-1}),
/// last row of A = -(a_0, ..., a_{n-1}), b = e_n, c as given.
inline StateSpace canonical_controllable_form(const std::vector<double>& coeffs,
                                              const RowVector& c,
                                              TimeDomain domain = TimeDomain::discrete) {
    const int n = static_cast<int>(coeffs.size());
    if (n < 1) throw std::invalid_argument("canonical_controllable_form: empty polynomial");
    if (c.size() != n)
        throw std::invalid_argument("canonical_controllable_form: c must have length n");
    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) A(n - 1, i) = -coeffs[static_cast<std::size_t>(i)];
    Vector b = Vector::Zero(n);
    b(n - 1) = 1.0;
    return make_state_space(std::move(A), std::move(b), c, domain);
}

/// Autonomous output y(t) = c A^t x0 for t = 0..horizon-1.
inline Signal simulate_autonomous(const StateSpace& sys, const Vector& x0, int horizon) {
    if (!sys.is_discrete())
        throw std::invalid_argument("simulate_autonomous: use the (h, steps) overload for CT");
    if (x0.size() != sys.order())
        throw std::invalid_argument("simulate_autonomous: x0 must have length n");
    if (horizon < 1) throw std::invalid_argument("simulate_autonomous: horizon must be >= 1");
    std::vector<double> y, grid;
    Vector v = x0;
    for (int t = 0; t < horizon; ++t) {
        y.push_back(sys.c.dot(v));
        grid.push_back(t);
        if (t + 1 < horizon) v = sys.A * v;
    }
    return Signal{std::move(y), std::move(grid)};
}

/// CT autonomous output y(t) = c e^{At} x0 sampled on t = 0, h, ....
inline Signal simulate_autonomous(const StateSpace& sys, const Vector& x0, double h, int steps) {
    if (sys.is_discrete())
        throw std::invalid_argument("simulate_autonomous: (h, steps) overload is for CT");
    if (x0.size() != sys.order())
        throw std::invalid_argument("simulate_autonomous: x0 must have length n");
    if (!(h > 0) || steps < 1) throw std::invalid_argument("simulate_autonomous: bad grid");
    const Matrix E = matrix_exponential(sys.A * h);
    std::vector<double> y, grid;
    Vector v = x0;
    for (int i = 0; i < steps; ++i) {
        y.push_back(sys.c.dot(v));
        grid.push_back(i * h);
        if (i + 1 < steps) v = E * v;
    }
    return Signal{std::move(y), std::move(grid)};
}

/// Exact sampling of a CT system: (e^{Ah}, b, c) tagged discrete. b and c are
/// deliberately left unchanged, matching the sampled-operator construction.
inline StateSpace discretize(const StateSpace& sys, double h) {
    if (sys.is_discrete()) throw std::invalid_argument("discretize: system is already discrete");
    if (!(h > 0)) throw std::invalid_argument("discretize: h must be positive");
    return StateSpace{matrix_exponential(sys.A * h), sys.b, sys.c, TimeDomain::discrete};
}

}  // namespace kpos
