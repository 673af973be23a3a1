#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "kpos/matrix.hpp"

namespace kpos {

enum class KposMethod {
    full_minors,
    consecutive,
    consecutive_smoothed,   // consecutive hypotheses established on F(sigma)X
    full_minors_fallback,   // consecutive hypotheses failed, full enumeration used
};

inline const char* to_string(KposMethod m) {
    switch (m) {
        case KposMethod::full_minors: return "full-minors";
        case KposMethod::consecutive: return "consecutive";
        case KposMethod::consecutive_smoothed: return "consecutive-smoothed";
        case KposMethod::full_minors_fallback: return "full-minors-fallback";
    }
    return "?";
}

struct MinorWitness {
    int order = 0;
    IndexTuple rows;
    IndexTuple cols;
    double value = 0;
};

struct KPositivityCertificate {
    int max_order = 0;
    int requested_order = 0;
    KposMethod method = KposMethod::full_minors;
    std::optional<MinorWitness> failure_witness;
    bool strict = false;

    bool certified() const { return max_order >= requested_order; }
};

namespace detail {

// Absolute threshold for r-minors of X: the base tolerance scaled by a
// cofactor-expansion bound, 1 + max|(r-1)-minor| * max|entry|.
inline double minor_threshold(const ToleranceConfig& tol, double max_abs_prev_minor,
                              double max_abs_entry) {
    return tol.minor_tol * (1.0 + max_abs_prev_minor * max_abs_entry);
}

}  // namespace detail

/// Certifies k-positivity through the full combinatorial minor test: every
/// entry of X_[j] must be >= -threshold for j = 1..k. The strict flag is set
/// when every tested minor clears +threshold. The first offending minor is
/// reported as witness.
inline KPositivityCertificate is_k_positive(const Matrix& X, int k,
                                            const ToleranceConfig& tol = {}) {
    const int n = static_cast<int>(X.rows());
    const int m = static_cast<int>(X.cols());
    if (k < 1 || k > std::min(n, m))
        throw std::invalid_argument("is_k_positive: need 1 <= k <= min(rows, cols)");
    KPositivityCertificate cert;
    cert.requested_order = k;
    cert.method = KposMethod::full_minors;
    cert.strict = true;
    const double max_entry = X.cwiseAbs().maxCoeff();
    double prev_max = 1.0;  // max |minor| of order j-1; order 0 minors are 1
    for (int j = 1; j <= k; ++j) {
        const Matrix comp = multiplicative_compound(X, j);
        const double threshold = detail::minor_threshold(tol, prev_max, max_entry);
        for (Eigen::Index a = 0; a < comp.rows(); ++a) {
            for (Eigen::Index b = 0; b < comp.cols(); ++b) {
                if (comp(a, b) < -threshold) {
                    cert.failure_witness =
                        MinorWitness{j, lex_tuples(n, j)[static_cast<std::size_t>(a)],
                                     lex_tuples(m, j)[static_cast<std::size_t>(b)], comp(a, b)};
                    cert.strict = false;
                    return cert;
                }
                if (comp(a, b) <= threshold) cert.strict = false;
            }
        }
        cert.max_order = j;
        prev_max = comp.cwiseAbs().maxCoeff();
    }
    return cert;
}

namespace detail {

// Consecutive r-minors (row and column index sets are intervals), with the
// top-left corner of the first failing block recorded on demand.
struct ConsecutiveScan {
    double min_value = 0;
    double max_abs = 0;
    int fail_row = -1, fail_col = -1;  // corner of the minimal minor
};

inline ConsecutiveScan consecutive_minors(const Matrix& X, int r) {
    ConsecutiveScan scan;
    bool first = true;
    for (Eigen::Index i = 0; i + r <= X.rows(); ++i) {
        for (Eigen::Index j = 0; j + r <= X.cols(); ++j) {
            const double d = det_small(X.block(i, j, r, r));
            scan.max_abs = std::max(scan.max_abs, std::abs(d));
            if (first || d < scan.min_value) {
                scan.min_value = d;
                scan.fail_row = static_cast<int>(i) + 1;
                scan.fail_col = static_cast<int>(j) + 1;
                first = false;
            }
        }
    }
    return scan;
}

inline IndexTuple interval_tuple(int start, int r) {
    IndexTuple t(r);
    for (int i = 0; i < r; ++i) t[i] = start + i;
    return t;
}

}  // namespace detail

/// Consecutive-minor shortcut: strictly positive consecutive r-minors for
/// r < k plus nonnegative consecutive k-minors certify k-positivity without
/// full enumeration. When the intermediate minors are only nonnegative but X
/// has full column rank, the Gaussian lifting is attempted instead: strict
/// consecutive positivity of F(sigma)X across sigma in {1, 10, 100} certifies
/// nonnegativity of the minors of X in the limit. If neither hypothesis can
/// be established the full minor test runs and the certificate is flagged.
inline KPositivityCertificate is_k_positive_consecutive(const Matrix& X, int k,
                                                        const ToleranceConfig& tol = {}) {
    const int n = static_cast<int>(X.rows());
    const int m = static_cast<int>(X.cols());
    if (n < m) throw std::invalid_argument("is_k_positive_consecutive: need rows >= cols");
    if (k < 1 || k > m)
        throw std::invalid_argument("is_k_positive_consecutive: need 1 <= k <= cols");

    const double max_entry = X.cwiseAbs().maxCoeff();
    double prev_max = 1.0;
    bool direct_ok = true;
    bool strict = true;
    std::optional<MinorWitness> first_violation;
    for (int r = 1; r <= k && direct_ok; ++r) {
        const auto scan = detail::consecutive_minors(X, r);
        const double threshold = detail::minor_threshold(tol, prev_max, max_entry);
        const bool need_strict = r < k;
        if (scan.min_value < -threshold) {
            first_violation = MinorWitness{r, detail::interval_tuple(scan.fail_row, r),
                                           detail::interval_tuple(scan.fail_col, r),
                                           scan.min_value};
            direct_ok = false;
        } else if (need_strict && scan.min_value <= threshold) {
            direct_ok = false;  // hypotheses of the shortcut not established
        } else if (scan.min_value <= threshold) {
            strict = false;
        }
        prev_max = scan.max_abs;
    }
    if (direct_ok) {
        KPositivityCertificate cert;
        cert.requested_order = k;
        cert.max_order = k;
        cert.method = KposMethod::consecutive;
        cert.strict = strict;
        return cert;
    }

    // Gaussian lifting, applicable under full column rank and only useful
    // when no consecutive minor is decisively negative.
    if (!first_violation && numerical_rank(X, tol) == m) {
        bool lifted = true;
        for (const double sigma : {1.0, 10.0, 100.0}) {
            const Matrix Y = smoothing_matrix(n, sigma) * X;
            // strictness judged against each block's own expansion mass; the
            // lifted minors are legitimately tiny at large sigma
            for (int r = 1; r <= k && lifted; ++r) {
                for (Eigen::Index i = 0; i + r <= Y.rows() && lifted; ++i) {
                    for (Eigen::Index j = 0; j + r <= Y.cols() && lifted; ++j) {
                        const Matrix block = Y.block(i, j, r, r);
                        if (!(detail::det_small(block) > tol.minor_tol * permanent_abs(block)))
                            lifted = false;
                    }
                }
            }
            if (!lifted) break;
        }
        if (lifted) {
            KPositivityCertificate cert;
            cert.requested_order = k;
            cert.max_order = k;
            cert.method = KposMethod::consecutive_smoothed;
            cert.strict = false;  // the limit argument only yields nonnegativity
            return cert;
        }
    }

    KPositivityCertificate cert = is_k_positive(X, k, tol);
    cert.method = KposMethod::full_minors_fallback;
    return cert;
}

/// True iff the directed graph of the nonzero pattern is strongly connected.
inline bool is_irreducible(const Matrix& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("is_irreducible: matrix must be square");
    const int n = static_cast<int>(M.rows());
    if (n == 1) return true;
    const auto reaches_all = [&](bool transpose) {
        std::vector<bool> seen(n, false);
        std::vector<int> stack{0};
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < n; ++w) {
                if (seen[w] || v == w) continue;
                const double entry = transpose ? M(w, v) : M(v, w);
                if (entry != 0.0) {
                    seen[w] = true;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == n;
    };
    return reaches_all(false) && reaches_all(true);
}

struct SpectralReport {
    bool applicable = false;  // requires irreducible compounds up to order k
    bool pass = false;
    std::vector<std::complex<double>> eigenvalues;  // sorted, descending magnitude
    std::string detail;
};

/// Necessary-condition diagnostic from the spectral theory of k-positive
/// matrices with irreducible compounds: the top k eigenvalues must be real,
/// positive and strictly ordered, and the Perron root of X_[j] must equal the
/// product of the leading j eigenvalues of X.
inline SpectralReport spectral_diagnostic(const Matrix& X, int k) {
    if (X.rows() != X.cols())
        throw std::invalid_argument("spectral_diagnostic: matrix must be square");
    const int n = static_cast<int>(X.rows());
    if (k < 1 || k > n) throw std::invalid_argument("spectral_diagnostic: need 1 <= k <= n");
    SpectralReport report;
    report.eigenvalues = sorted_eigenvalues(X);
    for (int j = 1; j <= k; ++j) {
        if (!is_irreducible(multiplicative_compound(X, j))) {
            report.detail = "compound of order " + std::to_string(j) + " is reducible";
            return report;
        }
    }
    report.applicable = true;
    const double scale = std::abs(report.eigenvalues.front()) + 1e-300;
    for (int i = 0; i < k; ++i) {
        const auto& ev = report.eigenvalues[static_cast<std::size_t>(i)];
        if (std::abs(ev.imag()) > 1e-8 * scale || ev.real() <= 0) {
            report.detail = "eigenvalue " + std::to_string(i + 1) + " is not real positive";
            return report;
        }
        if (i > 0 &&
            !(report.eigenvalues[static_cast<std::size_t>(i - 1)].real() > ev.real())) {
            report.detail = "eigenvalues " + std::to_string(i) + "," + std::to_string(i + 1) +
                            " are not strictly ordered";
            return report;
        }
    }
    double product = 1.0;
    for (int j = 1; j <= k; ++j) {
        product *= report.eigenvalues[static_cast<std::size_t>(j - 1)].real();
        const auto comp_ev = sorted_eigenvalues(multiplicative_compound(X, j));
        const double top = comp_ev.front().real();
        if (std::abs(top - product) > 1e-6 * std::max(1.0, std::abs(product))) {
            report.detail = "Perron root of compound " + std::to_string(j) +
                            " deviates from the eigenvalue product";
            return report;
        }
    }
    report.pass = true;
    return report;
}

}  // namespace kpos
