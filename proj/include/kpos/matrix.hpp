#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpos {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Strictly increasing 1-based index tuple {v_1 < ... < v_r} within [1, n].
using IndexTuple = std::vector<int>;

/// Shared numeric policy. minor_tol is an absolute base tolerance that gets
/// scaled by a magnitude bound of the minors under test; rank_tol_rel is a
/// relative pivot threshold; zero_clamp declares near-zero signal samples as
/// exact zeros before sign counting.
struct ToleranceConfig {
    double minor_tol = 1e-10;
    double rank_tol_rel = 1e-10;
    double zero_clamp = 1e-12;
};

/// Thrown when a compound dimension would exceed the capacity guard.
class CapacityError : public std::runtime_error {
  public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a constructive routine's mathematical precondition fails
/// (as opposed to a plain argument error).
class PreconditionError : public std::runtime_error {
  public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint64_t binomial(int n, int r) {
    if (r < 0 || n < 0 || r > n) return 0;
    r = std::min(r, n - r);
    std::uint64_t result = 1;
    for (int i = 1; i <= r; ++i) {
        // exact while it fits: numerator factors applied in increasing order
        result = result * static_cast<std::uint64_t>(n - r + i) / static_cast<std::uint64_t>(i);
        if (result > (std::uint64_t{1} << 62)) return std::uint64_t{1} << 62;
    }
    return result;
}

/// Capacity guard for compound dimensions, overridable via KPOS_MAX_COMPOUND.
inline std::uint64_t max_compound_size() {
    static const std::uint64_t cap = [] {
        if (const char* s = std::getenv("KPOS_MAX_COMPOUND")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(s, &end, 10);
            if (end != s && v > 0) return static_cast<std::uint64_t>(v);
        }
        return std::uint64_t{1000000};
    }();
    return cap;
}

/// All r-subsets of {1..n} in lexicographic order; position i in the result
/// is the i-th element of the index set I_{n,r}.
inline std::vector<IndexTuple> lex_tuples(int n, int r) {
    if (r < 1 || r > n)
        throw std::invalid_argument("lex_tuples: need 1 <= r <= n, got r=" + std::to_string(r) +
                                    ", n=" + std::to_string(n));
    std::vector<IndexTuple> out;
    out.reserve(static_cast<std::size_t>(binomial(n, r)));
    IndexTuple t(r);
    for (int i = 0; i < r; ++i) t[i] = i + 1;
    while (true) {
        out.push_back(t);
        int i = r - 1;
        while (i >= 0 && t[i] == n - r + i + 1) --i;
        if (i < 0) break;
        ++t[i];
        for (int j = i + 1; j < r; ++j) t[j] = t[j - 1] + 1;
    }
    return out;
}

namespace detail {

inline double det_small(const Matrix& m) {
    switch (m.rows()) {
        case 1:
            return m(0, 0);
        case 2:
            return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        case 3:
            return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                   m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                   m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        default:
            return Eigen::PartialPivLU<Matrix>(m).determinant();
    }
}

inline Matrix submatrix(const Matrix& X, const IndexTuple& I, const IndexTuple& J) {
    Matrix sub(static_cast<Eigen::Index>(I.size()), static_cast<Eigen::Index>(J.size()));
    for (std::size_t a = 0; a < I.size(); ++a)
        for (std::size_t b = 0; b < J.size(); ++b) sub(a, b) = X(I[a] - 1, J[b] - 1);
    return sub;
}

// Evaluates det(X_{I,J}) on a canonical orientation of the block (row-major
// content comparison against its transpose), so that minors of X and X^T
// agree bitwise.
inline double canonical_minor(const Matrix& X, const IndexTuple& I, const IndexTuple& J) {
    Matrix sub = submatrix(X, I, J);
    for (Eigen::Index i = 0; i < sub.rows(); ++i) {
        for (Eigen::Index j = 0; j < sub.cols(); ++j) {
            if (sub(i, j) < sub(j, i)) return det_small(sub);
            if (sub(j, i) < sub(i, j)) return det_small(sub.transpose());
        }
    }
    return det_small(sub);  // symmetric block
}

}  // namespace detail

/// det(X_{I,J}): closed form up to order 3, partially pivoted LU above.
inline double minor(const Matrix& X, const IndexTuple& I, const IndexTuple& J) {
    if (I.size() != J.size())
        throw std::invalid_argument("minor: row and column tuples must have equal size");
    if (I.empty()) return 1.0;
    for (int i : I)
        if (i < 1 || i > X.rows()) throw std::invalid_argument("minor: row index out of range");
    for (int j : J)
        if (j < 1 || j > X.cols()) throw std::invalid_argument("minor: column index out of range");
    return detail::canonical_minor(X, I, J);
}

/// r-th multiplicative compound: the C(n,r) x C(m,r) matrix of all r-minors,
/// rows and columns ordered by lex_tuples.
inline Matrix multiplicative_compound(const Matrix& X, int r) {
    const int n = static_cast<int>(X.rows());
    const int m = static_cast<int>(X.cols());
    if (r < 1 || r > std::min(n, m))
        throw std::invalid_argument("multiplicative_compound: need 1 <= r <= min(rows, cols)");
    if (binomial(std::max(n, m), r) > max_compound_size())
        throw CapacityError("multiplicative_compound: C(" + std::to_string(std::max(n, m)) + "," +
                            std::to_string(r) + ") exceeds capacity guard " +
                            std::to_string(max_compound_size()));
    const auto rows = lex_tuples(n, r);
    const auto cols = lex_tuples(m, r);
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b)
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                detail::canonical_minor(X, rows[a], cols[b]);
    return out;
}

/// j-th additive compound, the generator of the semigroup of j-compounds of
/// e^{Ah}. Closed combinatorial form: (I,I) entries sum the diagonal over I;
/// (I,J) entries with |I n J| = j-1 carry a signed single entry of A; all
/// other entries vanish.
inline Matrix additive_compound(const Matrix& A, int j) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw std::invalid_argument("additive_compound: matrix must be square");
    if (j < 1 || j > n) throw std::invalid_argument("additive_compound: need 1 <= j <= n");
    if (binomial(n, j) > max_compound_size())
        throw CapacityError("additive_compound: compound dimension exceeds capacity guard");
    const auto tuples = lex_tuples(n, j);
    const Eigen::Index N = static_cast<Eigen::Index>(tuples.size());
    std::vector<std::uint64_t> rank_of(static_cast<std::size_t>(1) << n, 0);
    for (std::size_t a = 0; a < tuples.size(); ++a) {
        std::uint64_t mask = 0;
        for (int v : tuples[a]) mask |= std::uint64_t{1} << (v - 1);
        rank_of[mask] = a;
    }
    Matrix out = Matrix::Zero(N, N);
    for (std::size_t a = 0; a < tuples.size(); ++a) {
        const IndexTuple& I = tuples[a];
        double diag = 0;
        for (int v : I) diag += A(v - 1, v - 1);
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = diag;
        std::uint64_t maskI = 0;
        for (int v : I) maskI |= std::uint64_t{1} << (v - 1);
        for (int p = 0; p < j; ++p) {
            const int vi = I[p];
            for (int w = 1; w <= n; ++w) {
                if (w == vi || (maskI & (std::uint64_t{1} << (w - 1)))) continue;
                IndexTuple J = I;
                J[p] = w;
                std::sort(J.begin(), J.end());
                const int q = static_cast<int>(std::lower_bound(J.begin(), J.end(), w) - J.begin());
                const std::uint64_t maskJ = (maskI & ~(std::uint64_t{1} << (vi - 1))) |
                                            (std::uint64_t{1} << (w - 1));
                const double sign = ((p + q) % 2 == 0) ? 1.0 : -1.0;
                out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(rank_of[maskJ])) =
                    sign * A(vi - 1, w - 1);
            }
        }
    }
    return out;
}

/// Strictly totally positive Gaussian smoothing matrix F(sigma)_{ij} = e^{-sigma (i-j)^2}.
inline Matrix smoothing_matrix(int n, double sigma) {
    if (n < 1) throw std::invalid_argument("smoothing_matrix: n must be positive");
    if (!(sigma > 0)) throw std::invalid_argument("smoothing_matrix: sigma must be positive");
    Matrix F(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) F(i, j) = std::exp(-sigma * (i - j) * (i - j));
    return F;
}

/// Permanent of |X|: an upper bound on the total mass of the determinant's
/// expansion, used to decide whether a computed minor's sign is numerically
/// trustworthy. Bitmask recursion, intended for small blocks.
inline double permanent_abs(const Matrix& X) {
    const int n = static_cast<int>(X.rows());
    if (X.cols() != n) throw std::invalid_argument("permanent_abs: matrix must be square");
    if (n > 20) throw CapacityError("permanent_abs: block too large");
    std::vector<double> dp(static_cast<std::size_t>(1) << n, 0.0);
    dp[0] = 1.0;
    for (std::uint32_t mask = 1; mask < dp.size(); ++mask) {
        const int row = __builtin_popcount(mask) - 1;
        double acc = 0;
        for (int col = 0; col < n; ++col)
            if (mask & (1u << col)) acc += dp[mask ^ (1u << col)] * std::abs(X(row, col));
        dp[mask] = acc;
    }
    return dp.back();
}

/// True when det(X) is nonzero beyond the cancellation noise of its own
/// expansion (threshold scales with the permanent of |X|).
inline bool reliably_nonsingular(const Matrix& X, double rel = 1e-12) {
    if (X.rows() != X.cols())
        throw std::invalid_argument("reliably_nonsingular: matrix must be square");
    const double det = Eigen::PartialPivLU<Matrix>(X).determinant();
    return std::abs(det) > rel * permanent_abs(X);
}

/// Rank by Gaussian elimination with complete pivoting; a pivot counts when
/// its magnitude exceeds rank_tol_rel times the largest entry of the input.
inline int numerical_rank(const Matrix& X, const ToleranceConfig& tol = {}) {
    if (X.size() == 0) return 0;
    Matrix W = X;
    const double threshold = tol.rank_tol_rel * X.cwiseAbs().maxCoeff();
    const Eigen::Index n = W.rows(), m = W.cols();
    int rank = 0;
    for (Eigen::Index step = 0; step < std::min(n, m); ++step) {
        Eigen::Index pi = step, pj = step;
        double best = 0;
        for (Eigen::Index i = step; i < n; ++i)
            for (Eigen::Index j = step; j < m; ++j)
                if (std::abs(W(i, j)) > best) {
                    best = std::abs(W(i, j));
                    pi = i;
                    pj = j;
                }
        if (!(best > threshold)) break;
        W.row(step).swap(W.row(pi));
        W.col(step).swap(W.col(pj));
        for (Eigen::Index i = step + 1; i < n; ++i) {
            const double f = W(i, step) / W(step, step);
            W.row(i).tail(m - step) -= f * W.row(step).tail(m - step);
        }
        ++rank;
    }
    return rank;
}

/// True iff all off-diagonal entries are >= -minor_tol.
inline bool is_metzler(const Matrix& A, const ToleranceConfig& tol = {}) {
    if (A.rows() != A.cols()) throw std::invalid_argument("is_metzler: matrix must be square");
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (i != j && A(i, j) < -tol.minor_tol) return false;
    return true;
}

/// e^A via scaling-and-squaring with a Pade approximant.
inline Matrix matrix_exponential(const Matrix& A) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("matrix_exponential: matrix must be square");
    return A.exp();
}

/// Eigenvalues sorted by descending magnitude, ties broken by descending real
/// part (the ordering used for poles throughout).
inline std::vector<std::complex<double>> sorted_eigenvalues(const Matrix& A) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("sorted_eigenvalues: matrix must be square");
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                         es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return ev;
}

}  // namespace kpos
