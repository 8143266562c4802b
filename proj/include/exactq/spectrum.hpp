// spectrum.hpp: Eigenproblems of H^1: arrowhead secular-equation solver and dense Hermitian path
//
// For a reservoir without bath-bath couplings H^1 is an arrowhead matrix
//
//     [ w0   g1*  ...  gN* ]
//     [ g1   w1            ]
//     [ ...       ...      ]
//     [ gN             wN  ]
//
// whose eigenvalues are the N+1 roots of the secular function
// f0(x) = w0 - x + sum_i |g_i|^2 / (x - w_i). With the poles w_i sorted, f0 falls
// monotonically from +inf to -inf on each of the N+1 intervals (-inf, w_1),
// (w_1, w_2), ..., (w_N, +inf), so every interval holds exactly one root.
//
// Roots are tracked as (pole, offset) pairs: x = w_pole + tau. Distances
// x - w_i are then formed as (w_pole - w_i) + tau, which keeps full relative
// accuracy when a root sits extremely close to its pole (weakly coupled modes
// far from w0).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exactq/errors.hpp"
#include "exactq/model.hpp"

namespace exactq {

struct SpectralDecomposition {
    std::size_t sigma{1};
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXcd amplitudes;   // column j is the eigenvector of eigenvalue j
    Eigen::VectorXd probabilities; // p_j = |amplitudes(0, j)|^2

    std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

// --------------------------- Secular function ---------------------------------

struct SecularValue {
    double value;
    double derivative;
};

inline SecularValue secular_function(double x, double omega0, std::span<const double> freqs,
                                     std::span<const cplx> couplings) {
    detail::require(freqs.size() == couplings.size(), ErrorKind::DimensionMismatch,
                    "one coupling per frequency required");
    SecularValue out{omega0 - x, -1.0};
    const double tiny = 4.0 * std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double g2 = std::norm(couplings[i]);
        if (g2 == 0.0) continue;
        const double d = x - freqs[i];
        detail::require(std::abs(d) > tiny * std::max(1.0, std::abs(x)), ErrorKind::PoleHit,
                        "x coincides with pole " + std::to_string(freqs[i]));
        out.value += g2 / d;
        out.derivative -= g2 / (d * d);
    }
    return out;
}

// --------------------------- Arrowhead eigenvalues ----------------------------

/// Called for every accepted iterate: root index (0-based, ascending), bracket and iterate in x.
using IterateObserver = std::function<void(std::size_t root, double lo, double x, double hi)>;

struct ArrowheadOptions {
    int max_newton = 100;
    int max_bisection = 2000;
    /// Newton stops when |dx| <= step_tol * max(1, |x|) and |dx| <= sqrt(eps) |x - pole|, or when |dx| <= 8 eps |x - pole|.
    double step_tol = 1e-13;
    /// Initial guesses sit this fraction of the distance to the nearest other pole away from a pole.
    double start_offset = 1e-3;
    /// Relative far-root threshold: the one-pole approximation seeds roots with |w_i - w0| > far_ratio |g_i|.
    double far_ratio = 10.0;
    /// Tolerated |1 - <v, v'>| after one refinement sweep of the amplitude recursion.
    double sweep_tol = 1e-10;
    IterateObserver observer;
};

/// A root expressed relative to a pole: x = omega(pole) + tau. pole == npos marks an uncoupled
/// mode (or the system itself when every coupling vanishes) whose eigenvalue is exact.
struct SecularRoot {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::size_t pole{npos};   // index into the full frequency list
    double tau{0.0};
    double value{0.0};        // omega(pole) + tau
    std::size_t deflated{npos};  // full index of an uncoupled bath mode, npos otherwise
};

namespace detail {

struct ActivePoles {
    std::vector<std::size_t> index;  // positions in the caller's lists
    std::vector<double> omega;
    std::vector<double> g2;
};

/// f0 and f0' at x = omega[origin] + tau, using exact pole differences.
inline SecularValue shifted_secular(const ActivePoles& poles, double omega0, std::size_t origin, double tau) {
    const double base = poles.omega[origin];
    SecularValue out{(omega0 - base) - tau, -1.0};
    for (std::size_t i = 0; i < poles.omega.size(); ++i) {
        const double d = (base - poles.omega[i]) + tau;
        out.value += poles.g2[i] / d;
        out.derivative -= poles.g2[i] / (d * d);
    }
    return out;
}

/// Safeguarded Newton on tau in the open bracket (lo, hi) where f0 > 0 at lo and f0 < 0 at hi.
inline double solve_bracket(const ActivePoles& poles, double omega0, std::size_t origin, double lo, double hi,
                            double tau, std::size_t root_id, const ArrowheadOptions& opts) {
    const double base = poles.omega[origin];
    const double eps = std::numeric_limits<double>::epsilon();
    const double lo0 = lo;
    const double hi0 = hi;
    auto observe = [&](double t) {
        if (!(t > lo0 && t < hi0))
            throw Error(ErrorKind::NoConvergence, "iterate left its bracket for root " + std::to_string(root_id));
        if (opts.observer) opts.observer(root_id, base + lo0, base + t, base + hi0);
    };
    auto collapsed = [&] { return hi - lo <= 4.0 * eps * std::max(std::abs(lo), std::abs(hi)); };
    if (!(tau > lo && tau < hi)) tau = 0.5 * (lo + hi);
    observe(tau);

    for (int it = 0; it < opts.max_newton; ++it) {
        const auto f = shifted_secular(poles, omega0, origin, tau);
        if (f.value == 0.0) return tau;
        if (f.value > 0.0) lo = tau; else hi = tau;
        double next = tau - f.value / f.derivative;
        bool bisected = false;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
            bisected = true;
        }
        const double step = next - tau;
        tau = next;
        observe(tau);
        if (!bisected) {
            const double x = base + tau;
            // Near a pole the next Newton error is about step^2 / |tau|, so the absolute test in x
            // is only trusted once the step is also below sqrt(eps) |tau|.
            if (std::abs(step) <= 8.0 * eps * std::abs(tau)) return tau;
            const double abs_tol = opts.step_tol * std::max(1.0, std::abs(x));
            if (std::abs(step) <= abs_tol && std::abs(step) <= std::sqrt(eps) * std::abs(tau)) return tau;
        }
        if (collapsed()) return tau;
    }
    // Newton cap reached: bisect the remaining bracket down to machine resolution.
    for (int it = 0; it < opts.max_bisection; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi) || collapsed()) return tau;
        const auto f = shifted_secular(poles, omega0, origin, mid);
        tau = mid;
        observe(tau);
        if (f.value == 0.0) return tau;
        if (f.value > 0.0) lo = mid; else hi = mid;
    }
    throw Error(ErrorKind::NoConvergence, "bisection cap reached for root " + std::to_string(root_id));
}

inline void check_poles(std::span<const double> freqs, std::span<const cplx> couplings) {
    require(freqs.size() == couplings.size(), ErrorKind::DimensionMismatch, "one coupling per frequency required");
    require(!freqs.empty(), ErrorKind::NonPositiveCount, "arrowhead solver needs at least one bath mode");
    const double span = freqs.back() - freqs.front();
    for (std::size_t i = 1; i < freqs.size(); ++i) {
        require(freqs[i] > freqs[i - 1], ErrorKind::NotSorted, "frequencies must be strictly increasing");
        require(freqs[i] - freqs[i - 1] > 1e-9 * span, ErrorKind::DegenerateFrequencies,
                "frequencies " + std::to_string(i - 1) + " and " + std::to_string(i) + " closer than the gap floor");
    }
}

}  // namespace detail

/// All N+1 roots of the secular equation, ascending, each confined to its interlacing bracket.
inline std::vector<SecularRoot> arrowhead_roots(double omega0, std::span<const double> freqs,
                                                std::span<const cplx> couplings, const ArrowheadOptions& opts = {}) {
    detail::check_poles(freqs, couplings);

    detail::ActivePoles poles;
    std::vector<SecularRoot> roots;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double g2 = std::norm(couplings[i]);
        if (g2 == 0.0) {
            roots.push_back({SecularRoot::npos, 0.0, freqs[i], i});
        } else {
            poles.index.push_back(i);
            poles.omega.push_back(freqs[i]);
            poles.g2.push_back(g2);
        }
    }
    auto by_value = [](const SecularRoot& a, const SecularRoot& b) { return a.value < b.value; };
    const std::size_t m = poles.omega.size();
    if (m == 0) {
        roots.push_back({SecularRoot::npos, 0.0, omega0, SecularRoot::npos});
        std::stable_sort(roots.begin(), roots.end(), by_value);
        return roots;
    }

    double total_g2 = 0.0;
    for (double g2 : poles.g2) total_g2 += g2;
    const double reach = std::sqrt(total_g2);
    // Eigenvalues lie within [min diag - ||offdiag||, max diag + ||offdiag||]; widen a hair to keep f0 signed.
    const double pad = 1e-12 * (reach + std::max(std::abs(omega0), std::abs(poles.omega.back())));
    const double lower = std::min(omega0, poles.omega.front()) - reach - pad;
    const double upper = std::max(omega0, poles.omega.back()) + reach + pad;

    // Interval k spans (omega[k-1], omega[k]); the outer two end at lower and upper.
    // omega0 sits in interval i0 (on its right edge when it coincides with a pole).
    const auto i0 = static_cast<std::size_t>(
        std::lower_bound(poles.omega.begin(), poles.omega.end(), omega0) - poles.omega.begin());
    const bool omega0_is_pole = i0 < m && poles.omega[i0] == omega0;

    auto start_offset = [&](std::size_t pole) {
        double gap = std::numeric_limits<double>::infinity();
        if (pole > 0) gap = std::min(gap, poles.omega[pole] - poles.omega[pole - 1]);
        if (pole + 1 < m) gap = std::min(gap, poles.omega[pole + 1] - poles.omega[pole]);
        if (!std::isfinite(gap)) gap = std::max(std::abs(poles.omega[pole] - omega0), reach);
        return opts.start_offset * gap;
    };
    // One-pole estimate of a root far from omega0, as an offset from its pole.
    auto far_guess = [&](std::size_t pole) -> std::optional<double> {
        const double delta = poles.omega[pole] - omega0;
        if (!(std::abs(delta) > opts.far_ratio * std::sqrt(poles.g2[pole]))) return std::nullopt;
        return poles.g2[pole] / (delta * (1.0 + poles.g2[pole] / (delta * delta)));
    };

    for (std::size_t k = 0; k <= m; ++k) {
        const double left = (k == 0) ? lower : poles.omega[k - 1];
        const double right = (k == m) ? upper : poles.omega[k];
        std::size_t origin;
        double start;
        if (k < i0) {
            // Below omega0 a root trails its pole from the left.
            origin = k;
            start = -start_offset(origin);
            if (auto guess = far_guess(origin)) start = *guess;
        } else if (k > i0) {
            // Above omega0 a root leads its pole on the right.
            origin = k - 1;
            start = start_offset(origin);
            if (auto guess = far_guess(origin)) start = *guess;
        } else {
            double f_at_omega0 = -1.0;
            if (!omega0_is_pole) {
                f_at_omega0 = 0.0;
                for (std::size_t i = 0; i < m; ++i) f_at_omega0 += poles.g2[i] / (omega0 - poles.omega[i]);
            }
            if (f_at_omega0 == 0.0) {
                origin = (k < m) ? k : k - 1;
                roots.push_back({poles.index[origin], omega0 - poles.omega[origin], omega0, SecularRoot::npos});
                continue;
            }
            // f0(omega0) > 0 puts the root right of omega0: start just above the lower pole, else below the upper.
            if (f_at_omega0 > 0.0) {
                origin = k - 1;
                start = start_offset(origin);
            } else {
                origin = k;
                start = -start_offset(origin);
            }
        }
        double tau = detail::solve_bracket(poles, omega0, origin, left - poles.omega[origin],
                                           right - poles.omega[origin], start, k, opts);
        // A root that ended up nearer the opposite pole is polished again relative to that pole.
        if (k > 0 && k < m) {
            const std::size_t other = (origin == k) ? k - 1 : k;
            const double tau_other = (poles.omega[origin] - poles.omega[other]) + tau;
            if (std::abs(tau_other) < std::abs(tau)) {
                origin = other;
                tau = detail::solve_bracket(poles, omega0, origin, left - poles.omega[origin],
                                            right - poles.omega[origin], tau_other, k, opts);
            }
        }
        roots.push_back({poles.index[origin], tau, poles.omega[origin] + tau, SecularRoot::npos});
    }

    std::stable_sort(roots.begin(), roots.end(), by_value);
    return roots;
}

inline std::vector<double> arrowhead_eigenvalues(double omega0, std::span<const double> freqs,
                                                 std::span<const cplx> couplings, const ArrowheadOptions& opts = {}) {
    std::vector<double> values;
    for (const auto& r : arrowhead_roots(omega0, freqs, couplings, opts)) values.push_back(r.value);
    return values;
}

// --------------------------- Arrowhead eigenvectors ---------------------------

/// Eigenvectors from the roots: |beta_1|^2 = -1 / f0'(x), beta_{i+1} = g_i beta_1 / (x - w_i).
///
/// Each vector then gets one sweep of the amplitude recursion: beta_1 is rebuilt from the normalized
/// bath amplitudes, beta_1' = sum_i g_i* beta_{i+1} / (x - w0), and the scalar product of the old and
/// regenerated vectors (the latter before renormalizing) must be 1 within sweep_tol. That product
/// equals 1 + f0(x) / (x - w0), so it flags roots that are off. The check is skipped where
/// rounding in f0 alone, relative to |x - w0|, already exceeds a tenth of the tolerance.
inline SpectralDecomposition arrowhead_eigenvectors(double omega0, std::span<const double> freqs,
                                                    std::span<const cplx> couplings,
                                                    std::span<const SecularRoot> roots,
                                                    const ArrowheadOptions& opts = {}) {
    detail::check_poles(freqs, couplings);
    const std::size_t n = freqs.size();
    detail::require(roots.size() == n + 1, ErrorKind::DimensionMismatch, "need N+1 roots");
    const auto dim = static_cast<Eigen::Index>(n + 1);
    const double eps = std::numeric_limits<double>::epsilon();

    SpectralDecomposition out;
    out.sigma = 1;
    out.eigenvalues.resize(dim);
    out.amplitudes = Eigen::MatrixXcd::Zero(dim, dim);
    out.probabilities.resize(dim);

    Eigen::VectorXcd v(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const SecularRoot& r = roots[static_cast<std::size_t>(j)];
        out.eigenvalues(j) = r.value;
        if (r.deflated != SecularRoot::npos) {
            out.amplitudes(static_cast<Eigen::Index>(r.deflated + 1), j) = 1.0;
            out.probabilities(j) = 0.0;
            continue;
        }
        if (r.pole == SecularRoot::npos) {  // every coupling vanishes: the system itself
            out.amplitudes(0, j) = 1.0;
            out.probabilities(j) = 1.0;
            continue;
        }
        const double base = freqs[r.pole];
        auto distance = [&](std::size_t i) { return (base - freqs[i]) + r.tau; };  // x - w_i

        // rounding: every distance carries an absolute error of about eps (|w_pole - w_i| + |tau|)
        double norm_sq = 1.0;
        double rounding = std::abs(omega0 - base) + std::abs(r.tau);
        for (std::size_t i = 0; i < n; ++i) {
            const double g2 = std::norm(couplings[i]);
            if (g2 == 0.0) continue;
            const double d = distance(i);
            norm_sq += g2 / (d * d);
            rounding += g2 / (d * d) * (std::abs(base - freqs[i]) + 2.0 * std::abs(r.tau));
        }
        const double p = 1.0 / norm_sq;  // = -1 / f0'(x)
        const double beta1 = std::sqrt(p);
        v.setZero();
        v(0) = beta1;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::norm(couplings[i]) == 0.0) continue;
            v(static_cast<Eigen::Index>(i + 1)) = couplings[i] * (beta1 / distance(i));
        }

        const double shift = r.value - omega0;
        if (std::abs(shift) > 0.0 && 10.0 * eps * rounding / std::abs(shift) <= 0.1 * opts.sweep_tol) {
            cplx b1(0.0, 0.0);
            for (std::size_t i = 0; i < n; ++i) b1 += std::conj(couplings[i]) * v(static_cast<Eigen::Index>(i + 1));
            b1 /= shift;
            cplx overlap = std::conj(v(0)) * b1;
            for (std::size_t i = 0; i < n; ++i) {
                if (std::norm(couplings[i]) == 0.0) continue;
                const auto k = static_cast<Eigen::Index>(i + 1);
                overlap += std::conj(v(k)) * couplings[i] * (b1 / distance(i));
            }
            detail::require(std::abs(1.0 - overlap) <= opts.sweep_tol, ErrorKind::NoConvergence,
                            "amplitude sweep deviates for root " + std::to_string(j) +
                                " (|1 - <v, v'>| = " + std::to_string(std::abs(1.0 - overlap)) + ")");
        }
        out.amplitudes.col(j) = v;
        out.probabilities(j) = p;
    }
    return out;
}

/// Arrowhead path end to end.
inline SpectralDecomposition arrowhead_decomposition(double omega0, std::span<const double> freqs,
                                                     std::span<const cplx> couplings,
                                                     const ArrowheadOptions& opts = {}) {
    const auto roots = arrowhead_roots(omega0, freqs, couplings, opts);
    return arrowhead_eigenvectors(omega0, freqs, couplings, roots, opts);
}

// --------------------------- Dense Hermitian path -----------------------------

inline SpectralDecomposition dense_hermitian_eig(const Eigen::MatrixXcd& H, std::size_t sigma = 1) {
    detail::require(H.rows() == H.cols() && H.rows() > 0, ErrorKind::DimensionMismatch, "matrix must be square");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    detail::require((H - H.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorKind::NotHermitian,
                    "matrix is not Hermitian within 1e-12");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
    detail::require(solver.info() == Eigen::Success, ErrorKind::NoConvergence, "dense eigensolver failed");

    SpectralDecomposition out;
    out.sigma = sigma;
    out.eigenvalues = solver.eigenvalues();
    out.amplitudes = solver.eigenvectors();
    out.probabilities = out.amplitudes.row(0).cwiseAbs2().transpose();
    return out;
}

/// H^1 of an arbitrary coupling matrix: the transpose of G.
inline Eigen::MatrixXcd single_excitation_hamiltonian(const CouplingMatrix& G) { return G.entries.transpose(); }

/// Decomposition of H^1, via the arrowhead solver when G has no bath-bath couplings.
inline SpectralDecomposition decompose_single_excitation(const CouplingMatrix& G, const ArrowheadOptions& opts = {}) {
    if (G.n_total() >= 2 && G.is_arrowhead()) {
        const std::size_t n = G.bath_size();
        std::vector<double> freqs(n);
        std::vector<cplx> couplings(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i + 1);
            freqs[i] = G.entries(k, k).real();
            couplings[i] = G.entries(0, k);
        }
        if (std::is_sorted(freqs.begin(), freqs.end()) &&
            std::adjacent_find(freqs.begin(), freqs.end()) == freqs.end())
            return arrowhead_decomposition(G.entries(0, 0).real(), freqs, couplings, opts);
    }
    return dense_hermitian_eig(single_excitation_hamiltonian(G), 1);
}

}  // namespace exactq
