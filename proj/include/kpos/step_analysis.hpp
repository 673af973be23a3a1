#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpos/ct.hpp"
#include "kpos/hankel.hpp"
#include "kpos/kpos_check.hpp"
#include "kpos/lti.hpp"
#include "kpos/variation.hpp"

namespace kpos {

struct SignChangeReport {
    int count = 0;
    // grid times bracketing each change: (last sample of the old sign, first
    // sample of the new sign)
    std::vector<std::pair<int, int>> crossings;
};

/// Variation of the impulse response together with the sample indices that
/// bracket each sign change.
inline SignChangeReport impulse_sign_changes(const StateSpace& sys, int horizon,
                                             const ToleranceConfig& tol = {}) {
    if (horizon < 2) throw std::invalid_argument("impulse_sign_changes: horizon must be >= 2");
    const Signal g = sys.is_discrete() ? impulse_response(sys, horizon)
                                       : impulse_response(sys, 1.0, horizon);
    SignChangeReport report;
    double last = 0;
    int last_t = -1;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        const double x = g.values[i];
        if (std::abs(x) <= tol.zero_clamp) continue;
        if (last != 0 && x * last < 0) {
            ++report.count;
            report.crossings.emplace_back(last_t, static_cast<int>(g.grid[i]));
        }
        last = x;
        last_t = static_cast<int>(g.grid[i]);
    }
    return report;
}

/// Number of strict interior local extrema of the step response started from
/// rest; plateaus are compressed, which makes the count equal the variation
/// of the impulse response summands.
inline int step_extrema_count(const StateSpace& sys, int horizon,
                              const ToleranceConfig& tol = {}) {
    if (horizon < 3) throw std::invalid_argument("step_extrema_count: horizon must be >= 3");
    const Signal s = sys.is_discrete() ? step_response(sys, horizon)
                                       : step_response(sys, 1.0, horizon);
    std::vector<double> samples;
    samples.reserve(s.values.size() + 1);
    samples.push_back(0.0);  // at rest before the step is applied
    samples.insert(samples.end(), s.values.begin(), s.values.end());
    std::vector<double> diffs;
    for (std::size_t i = 1; i < samples.size(); ++i) diffs.push_back(samples[i] - samples[i - 1]);
    return variation(diffs, tol);
}

struct ConeMembership {
    bool member = false;
    Vector coefficients;  // nonnegative witness when member
    double residual = 0;
};

namespace detail {

// Lawson-Hanson active-set nonnegative least squares, iteration cap 10 * K.
inline Vector nnls(const Matrix& P, const Vector& v, double* residual_out) {
    const Eigen::Index m = P.rows(), K = P.cols();
    Vector x = Vector::Zero(K);
    std::vector<bool> passive(static_cast<std::size_t>(K), false);
    const double w_tol = 1e-12 * (1.0 + P.cwiseAbs().maxCoeff() * v.cwiseAbs().maxCoeff());
    const int max_iter = static_cast<int>(10 * K);

    const auto solve_passive = [&](const std::vector<bool>& mask) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < K; ++i)
            if (mask[static_cast<std::size_t>(i)]) idx.push_back(i);
        Matrix Psub(m, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) Psub.col(static_cast<Eigen::Index>(i)) = P.col(idx[i]);
        const Vector z = Psub.colPivHouseholderQr().solve(v);
        Vector full = Vector::Zero(K);
        for (std::size_t i = 0; i < idx.size(); ++i) full(idx[i]) = z(static_cast<Eigen::Index>(i));
        return full;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        const Vector w = P.transpose() * (v - P * x);
        Eigen::Index best = -1;
        double best_w = w_tol;
        for (Eigen::Index i = 0; i < K; ++i) {
            if (!passive[static_cast<std::size_t>(i)] && w(i) > best_w) {
                best_w = w(i);
                best = i;
            }
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;
        Vector z = solve_passive(passive);
        while (true) {
            bool feasible = true;
            double alpha = 1.0;
            for (Eigen::Index i = 0; i < K; ++i) {
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0) {
                    feasible = false;
                    alpha = std::min(alpha, x(i) / (x(i) - z(i)));
                }
            }
            if (feasible) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index i = 0; i < K; ++i)
                if (passive[static_cast<std::size_t>(i)] && x(i) <= w_tol) {
                    passive[static_cast<std::size_t>(i)] = false;
                    x(i) = 0;
                }
            z = solve_passive(passive);
        }
    }
    if (residual_out) *residual_out = (v - P * x).norm();
    return x;
}

}  // namespace detail

/// Membership of v in cone(P) = {Px : x >= 0}, decided by nonnegative least
/// squares: member iff the optimal residual is below max(1e-8, 1e-10 ||v||).
inline ConeMembership cone_membership(const Vector& v, const Matrix& P,
                                      const ToleranceConfig& = {}) {
    if (P.rows() != v.size()) throw std::invalid_argument("cone_membership: dimension mismatch");
    ConeMembership result;
    result.coefficients = detail::nnls(P, v, &result.residual);
    result.member = result.residual <= std::max(1e-8, 1e-10 * v.norm());
    return result;
}

struct DualConeMembership {
    bool member = false;
    double min_entry = 0;  // most negative entry of P^T y on failure
    int arg_min = -1;
};

/// Membership of y in the dual cone of cone(P); for finitely generated cones
/// the dual is {y : P^T y >= 0}, so the test is entrywise. (Proof of the
/// reduction: <y, Px> = <P^T y, x> ranges over nonnegative combinations of the
/// entries of P^T y as x ranges over the nonnegative orthant, so nonnegativity
/// of <y, .> on cone(P) is exactly entrywise nonnegativity of P^T y.)
inline DualConeMembership dual_cone_membership(const Vector& y, const Matrix& P,
                                               const ToleranceConfig& tol = {}) {
    if (P.rows() != y.size())
        throw std::invalid_argument("dual_cone_membership: dimension mismatch");
    DualConeMembership result;
    const Vector w = P.transpose() * y;
    Eigen::Index arg = 0;
    result.min_entry = w.minCoeff(&arg);
    result.arg_min = static_cast<int>(arg) + 1;
    const double threshold =
        tol.minor_tol * (1.0 + P.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff());
    result.member = result.min_entry >= -threshold;
    return result;
}

struct OvershootBoundResult {
    std::optional<int> bound;  // var(b) when certified
    int var_b = 0;
    int certified_order = 0;  // the k the observability operator was certified at
    std::vector<Condition> conditions;
    std::vector<double> eta_ladder;  // nonempty when the singular-A route was taken
};

/// Upper bound on impulse-response sign changes (equivalently step-response
/// over- and undershoots): certifies the observability operator as
/// variation-diminishing of order k-1 and returns var(b) when var(b) <= k-1.
/// For singular discrete-time A the shifted ladder A + eta I is used; for
/// continuous time the Metzler additive-compound conditions replace the
/// k-positivity of A.
inline OvershootBoundResult overshoot_upper_bound(const StateSpace& sys, int k,
                                                  const ToleranceConfig& tol = {}) {
    const int n = sys.order();
    if (k < 1 || k > n) throw std::invalid_argument("overshoot_upper_bound: need 1 <= k <= n");
    OvershootBoundResult result;
    result.var_b = variation(sys.b, tol);
    bool all = true;

    double prev_c = 1.0;
    for (int j = 1; j <= k; ++j) {
        const Matrix Oj = observability_matrix(sys.A, sys.c, j);
        const Matrix comp = multiplicative_compound(Oj, j);
        const double thr = detail::minor_threshold(tol, prev_c, sys.c.cwiseAbs().maxCoeff());
        Condition cond;
        cond.name = "O^" + std::to_string(j) + "(A,c)_[" + std::to_string(j) + "] >= 0";
        cond.pass = detail::entrywise_nonneg(comp, thr);
        if (!cond.pass) cond.witness = detail::entry_witness(comp, "entry ");
        all = all && cond.pass;
        result.conditions.push_back(std::move(cond));
        prev_c = comp.cwiseAbs().maxCoeff();
    }
    for (int j = 1; j <= k - 1; ++j) {
        const int r = numerical_rank(observability_matrix(sys.A, sys.c, j), tol);
        Condition cond;
        cond.name = "rank(O^" + std::to_string(j) + ") == " + std::to_string(j);
        cond.pass = r == j;
        if (!cond.pass) cond.witness = "rank is " + std::to_string(r);
        all = all && cond.pass;
        result.conditions.push_back(std::move(cond));
    }

    if (sys.is_discrete()) {
        if (numerical_rank(sys.A, tol) == n) {
            const auto cert = is_k_positive(sys.A, k, tol);
            Condition cond;
            cond.name = "A is " + std::to_string(k) + "-positive";
            cond.pass = cert.certified();
            if (!cond.pass && cert.failure_witness)
                cond.witness = "minor of order " + std::to_string(cert.failure_witness->order) +
                               " = " + detail::format_double(cert.failure_witness->value);
            all = all && cond.pass;
            result.conditions.push_back(std::move(cond));
        } else {
            // Poles at the origin: certify on the shifted ladder instead. The
            // shifted determinant scales like eta^(zero multiplicity), so
            // nonsingularity is decided by a cancellation-aware determinant
            // test rather than the pivot-counting rank.
            result.eta_ladder = {1e-4, 1e-3, 1e-2};
            for (const double eta : result.eta_ladder) {
                const Matrix shifted = sys.A + eta * Matrix::Identity(n, n);
                const bool kpos = is_k_positive(shifted, k, tol).certified();
                const bool full = reliably_nonsingular(shifted);
                Condition cond;
                cond.name = "A + " + detail::format_double(eta) + " I is " + std::to_string(k) +
                            "-positive and full rank";
                cond.pass = kpos && full;
                if (!cond.pass) cond.witness = kpos ? "rank deficient" : "negative minor";
                all = all && cond.pass;
                result.conditions.push_back(std::move(cond));
            }
        }
    } else {
        for (int j = 1; j <= k; ++j) {
            Condition cond;
            cond.name = "A^[" + std::to_string(j) + "] Metzler";
            cond.pass = is_metzler(additive_compound(sys.A, j), tol);
            all = all && cond.pass;
            result.conditions.push_back(std::move(cond));
        }
    }

    if (all) {
        result.certified_order = k;
        if (result.var_b <= k - 1) {
            result.bound = result.var_b;
        } else {
            Condition cond;
            cond.name = "var(b) <= k - 1";
            cond.pass = false;
            cond.witness = "var(b) = " + std::to_string(result.var_b) +
                           " exceeds k - 1 = " + std::to_string(k - 1);
            result.conditions.push_back(std::move(cond));
        }
    }
    return result;
}

struct TransformVerdict {
    bool pass = false;
    std::vector<Condition> conditions;
};

/// Verifies a similarity transform that exhibits an internally Hankel
/// k-positive realization: rank(P) = n, A P = P A_plus, k-positive A_plus,
/// controllability compounds inside cone(P_[j]) and observability compounds
/// inside its dual for every j <= k. The supplied plus-realization is also
/// cross-validated with the internal checker.
inline TransformVerdict verify_realization_transform(const StateSpace& sys,
                                                     const StateSpace& sys_plus, const Matrix& P,
                                                     int k, const ToleranceConfig& tol = {}) {
    const int n = sys.order();
    if (sys_plus.order() != n || P.rows() != n || P.cols() != n)
        throw std::invalid_argument("verify_realization_transform: dimension mismatch");
    if (k < 1 || k > n)
        throw std::invalid_argument("verify_realization_transform: need 1 <= k <= n");
    if (minimal_order(sys, tol) != n)
        throw PreconditionError("verify_realization_transform: system must be minimal");
    TransformVerdict verdict;
    bool all = true;
    const auto push = [&](Condition cond) {
        all = all && cond.pass;
        verdict.conditions.push_back(std::move(cond));
    };

    {
        Condition cond;
        cond.name = "rank(P) == n";
        const int r = numerical_rank(P, tol);
        cond.pass = r == n;
        if (!cond.pass) cond.witness = "rank is " + std::to_string(r);
        push(std::move(cond));
    }
    {
        Condition cond;
        cond.name = "A P == P A_plus";
        const double residual = (sys.A * P - P * sys_plus.A).cwiseAbs().maxCoeff();
        const double scale = 1.0 + sys.A.cwiseAbs().maxCoeff() * P.cwiseAbs().maxCoeff() +
                             P.cwiseAbs().maxCoeff() * sys_plus.A.cwiseAbs().maxCoeff();
        cond.pass = residual <= 1e-9 * scale;
        if (!cond.pass) cond.witness = "residual " + detail::format_double(residual);
        push(std::move(cond));
    }
    {
        Condition cond;
        cond.name = "A_plus is " + std::to_string(k) + "-positive";
        const auto cert = is_k_positive(sys_plus.A, k, tol);
        cond.pass = cert.certified();
        if (!cond.pass && cert.failure_witness)
            cond.witness = "minor of order " + std::to_string(cert.failure_witness->order) +
                           " = " + detail::format_double(cert.failure_witness->value);
        push(std::move(cond));
    }
    for (int j = 1; j <= k; ++j) {
        const Matrix Pj = multiplicative_compound(P, j);
        {
            const Matrix Cj = multiplicative_compound(controllability_matrix(sys.A, sys.b, j), j);
            const auto membership = cone_membership(Cj.col(0), Pj, tol);
            Condition cond;
            cond.name = "C^" + std::to_string(j) + "(A,b)_[" + std::to_string(j) +
                        "] in cone(P_[" + std::to_string(j) + "])";
            cond.pass = membership.member;
            if (!cond.pass)
                cond.witness = "NNLS residual " + detail::format_double(membership.residual);
            push(std::move(cond));
        }
        {
            const Matrix Oj = multiplicative_compound(observability_matrix(sys.A, sys.c, j), j);
            const auto membership = dual_cone_membership(Oj.row(0).transpose(), Pj, tol);
            Condition cond;
            cond.name = "O^" + std::to_string(j) + "(A,c)_[" + std::to_string(j) +
                        "]^T in cone(P_[" + std::to_string(j) + "])*";
            cond.pass = membership.member;
            if (!cond.pass)
                cond.witness = "entry " + std::to_string(membership.arg_min) + " of P_[j]^T y = " +
                               detail::format_double(membership.min_entry);
            push(std::move(cond));
        }
    }
    {
        const auto internal = internal_hankel_k_positivity(sys_plus, k, tol);
        Condition cond;
        cond.name = "cross-validation: plus realization internally Hankel " + std::to_string(k) +
                    "-positive";
        cond.pass = internal.certified();
        if (!cond.pass) cond.witness = "certified order " + std::to_string(internal.order_certified);
        push(std::move(cond));
    }
    verdict.pass = all;
    return verdict;
}

/// Observer-side transform check (K >= n allowed): A P = P A_plus,
/// c_plus = c P, dual-cone membership of the observability compounds, and
/// k-positivity of A_plus and of the plus observability compounds.
inline TransformVerdict verify_observer_transform(const Matrix& A, const RowVector& c,
                                                  const Matrix& A_plus, const RowVector& c_plus,
                                                  const Matrix& P, int k,
                                                  const ToleranceConfig& tol = {}) {
    const int n = static_cast<int>(A.rows());
    const int K = static_cast<int>(A_plus.rows());
    if (A.cols() != n || A_plus.cols() != K || c.size() != n || c_plus.size() != K ||
        P.rows() != n || P.cols() != K)
        throw std::invalid_argument("verify_observer_transform: dimension mismatch");
    if (k < 1 || k > n) throw std::invalid_argument("verify_observer_transform: need 1 <= k <= n");
    if (numerical_rank(observability_matrix(A, c, n), tol) != n)
        throw PreconditionError("verify_observer_transform: (A, c) must be observable");
    TransformVerdict verdict;
    bool all = true;
    const auto push = [&](Condition cond) {
        all = all && cond.pass;
        verdict.conditions.push_back(std::move(cond));
    };
    {
        Condition cond;
        cond.name = "A P == P A_plus";
        const double residual = (A * P - P * A_plus).cwiseAbs().maxCoeff();
        const double scale = 1.0 + A.cwiseAbs().maxCoeff() * P.cwiseAbs().maxCoeff() +
                             P.cwiseAbs().maxCoeff() * A_plus.cwiseAbs().maxCoeff();
        cond.pass = residual <= 1e-9 * scale;
        if (!cond.pass) cond.witness = "residual " + detail::format_double(residual);
        push(std::move(cond));
    }
    {
        Condition cond;
        cond.name = "c_plus == c P";
        const double residual = (c_plus - c * P).cwiseAbs().maxCoeff();
        cond.pass = residual <= 1e-9 * (1.0 + c.cwiseAbs().maxCoeff() * P.cwiseAbs().maxCoeff());
        if (!cond.pass) cond.witness = "residual " + detail::format_double(residual);
        push(std::move(cond));
    }
    {
        Condition cond;
        cond.name = "A_plus is " + std::to_string(k) + "-positive";
        cond.pass = is_k_positive(A_plus, k, tol).certified();
        push(std::move(cond));
    }
    for (int j = 1; j <= k; ++j) {
        const Matrix Pj = multiplicative_compound(P, j);
        {
            const Matrix Oj = multiplicative_compound(observability_matrix(A, c, j), j);
            const auto membership = dual_cone_membership(Oj.row(0).transpose(), Pj, tol);
            Condition cond;
            cond.name = "O^" + std::to_string(j) + "(A,c)_[" + std::to_string(j) +
                        "]^T in cone(P_[" + std::to_string(j) + "])*";
            cond.pass = membership.member;
            if (!cond.pass)
                cond.witness = "entry " + std::to_string(membership.arg_min) + " = " +
                               detail::format_double(membership.min_entry);
            push(std::move(cond));
        }
        {
            const Matrix Oj = multiplicative_compound(observability_matrix(A_plus, c_plus, j), j);
            Condition cond;
            cond.name = "O^" + std::to_string(j) + "(A_plus,c_plus)_[" + std::to_string(j) +
                        "] >= 0";
            const double thr = detail::minor_threshold(
                tol, 1.0, std::max(1.0, c_plus.cwiseAbs().maxCoeff()));
            cond.pass = detail::entrywise_nonneg(Oj, thr);
            if (!cond.pass) cond.witness = detail::entry_witness(Oj, "entry ");
            push(std::move(cond));
        }
    }
    verdict.pass = all;
    return verdict;
}

}  // namespace kpos
