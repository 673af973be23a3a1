#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "kpos/matrix.hpp"

namespace kpos {

/// Finite real sequence on a strictly increasing sample grid.
struct Signal {
    std::vector<double> values;
    std::vector<double> grid;
};

inline Signal make_signal(std::vector<double> values, std::vector<double> grid) {
    if (values.size() != grid.size())
        throw std::invalid_argument("Signal: values and grid must have equal length");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("Signal: grid must be strictly increasing");
    return Signal{std::move(values), std::move(grid)};
}

/// Grid defaults to 1..N.
inline Signal make_signal(std::vector<double> values) {
    std::vector<double> grid(values.size());
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i + 1);
    return Signal{std::move(values), std::move(grid)};
}

namespace detail {

template <typename Seq>
inline int variation_impl(const Seq& u, double clamp) {
    int count = 0;
    double last = 0;
    for (const double x : u) {
        if (std::abs(x) <= clamp) continue;
        if (last != 0 && x * last < 0) ++count;
        last = x;
    }
    return count;
}

template <typename Seq>
inline int first_sign_impl(const Seq& u, double clamp) {
    for (const double x : u) {
        if (std::abs(x) > clamp) return x > 0 ? 1 : -1;
    }
    return 0;
}

}  // namespace detail

/// Number of sign changes after clamping near-zeros and deleting zeros; the
/// empty sequence counts as zero.
inline int variation(const std::vector<double>& u, const ToleranceConfig& tol = {}) {
    return detail::variation_impl(u, tol.zero_clamp);
}
inline int variation(const Vector& u, const ToleranceConfig& tol = {}) {
    return detail::variation_impl(u, tol.zero_clamp);
}
inline int variation(const Signal& u, const ToleranceConfig& tol = {}) {
    return detail::variation_impl(u.values, tol.zero_clamp);
}

/// Sign of the first entry exceeding the zero clamp; 0 if none.
inline int first_sign(const std::vector<double>& u, const ToleranceConfig& tol = {}) {
    return detail::first_sign_impl(u, tol.zero_clamp);
}
inline int first_sign(const Vector& u, const ToleranceConfig& tol = {}) {
    return detail::first_sign_impl(u, tol.zero_clamp);
}
inline int first_sign(const Signal& u, const ToleranceConfig& tol = {}) {
    return detail::first_sign_impl(u.values, tol.zero_clamp);
}

/// Variation of a sampled continuous-time function; the supremum over
/// sub-selections of the samples equals the variation of the full vector.
inline int continuous_variation(const Signal& u) { return variation(u); }

struct OvdReport {
    bool ok = true;
    std::optional<Vector> counterexample;
    long inputs_checked = 0;
};

namespace detail {

inline bool ovd_violates(const Matrix& X, const Vector& u, int k, const ToleranceConfig& tol) {
    const int vu = variation(u, tol);
    if (vu > k) return false;
    const Vector y = X * u;
    const int vy = variation(y, tol);
    if (vy > vu) return true;
    if (vy == vu) {
        const int su = first_sign(u, tol);
        const int sy = first_sign(y, tol);
        if (su != 0 && sy != 0 && su != sy) return true;
    }
    return false;
}

}  // namespace detail

/// Randomized falsifier for the order-preserving variation-diminishing
/// property of order k: samples inputs u with var(u) <= k (sign pattern with
/// uniformly placed changes, log-uniform magnitudes in [1e-3, 1e3]) plus an
/// exhaustive sweep over {-2,-1,0,1,2}^m when m <= 5. A false result carries
/// the witness input; a true result is probabilistic evidence only -- the
/// minor test in the k-positivity checker is the actual certificate.
inline OvdReport ovd_oracle(const Matrix& X, int k, long samples, std::uint64_t seed,
                            const ToleranceConfig& tol = {}) {
    const int m = static_cast<int>(X.cols());
    if (k < 0 || k > m - 1)
        throw std::invalid_argument("ovd_oracle: need 0 <= k <= cols - 1");
    OvdReport report;

    if (m <= 5) {
        Vector u = Vector::Zero(m);
        std::vector<int> digits(m, 0);
        const double levels[5] = {-2, -1, 0, 1, 2};
        const long total = static_cast<long>(std::pow(5.0, m));
        for (long it = 1; it < total; ++it) {
            int pos = 0;
            while (pos < m && digits[pos] == 4) digits[pos++] = 0;
            ++digits[pos];
            for (int i = 0; i < m; ++i) u[i] = levels[digits[i]];
            ++report.inputs_checked;
            if (detail::ovd_violates(X, u, k, tol)) {
                report.ok = false;
                report.counterexample = u;
                return report;
            }
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag_exp(-3.0, 3.0);
    std::uniform_int_distribution<int> change_count(0, k);
    std::uniform_int_distribution<int> coin(0, 1);
    Vector u(m);
    for (long s = 0; s < samples; ++s) {
        const int d = change_count(rng);
        std::vector<int> gaps(m - 1);
        for (int i = 0; i < m - 1; ++i) gaps[i] = i + 1;
        std::shuffle(gaps.begin(), gaps.end(), rng);
        std::vector<bool> flip(m, false);
        for (int i = 0; i < d; ++i) flip[gaps[i]] = true;
        double sign = coin(rng) ? 1.0 : -1.0;
        for (int i = 0; i < m; ++i) {
            if (flip[i]) sign = -sign;
            u[i] = sign * std::pow(10.0, mag_exp(rng));
        }
        ++report.inputs_checked;
        if (detail::ovd_violates(X, u, k, tol)) {
            report.ok = false;
            report.counterexample = u;
            return report;
        }
    }
    return report;
}

}  // namespace kpos
