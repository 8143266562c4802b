// dynamics.hpp: Closed-form system dynamics: Gamma(t), rho(t), equilibrium, moments, entropy, Markov reference
//
// Everything in the single-excitation sector follows from the weighted phasor sum
//     Gamma(t) = sum_j p_j exp(-i w_j t),
// with p(t) = |beta|^2 |Gamma|^2 and rho_10(t) = conj(alpha) beta Gamma(t).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exactq/errors.hpp"
#include "exactq/model.hpp"
#include "exactq/spectrum.hpp"
#include "exactq/state.hpp"

namespace exactq {

struct GammaSeries {
    std::vector<double> probabilities;  // p_j
    std::vector<double> frequencies;    // w_{1,j}, ascending

    std::size_t size() const noexcept { return probabilities.size(); }
};

inline GammaSeries make_gamma_series(const SpectralDecomposition& eig) {
    GammaSeries series;
    series.probabilities.assign(eig.probabilities.data(), eig.probabilities.data() + eig.probabilities.size());
    series.frequencies.assign(eig.eigenvalues.data(), eig.eigenvalues.data() + eig.eigenvalues.size());
    return series;
}

inline cplx gamma(const GammaSeries& series, double t) {
    cplx sum(0.0, 0.0);
    for (std::size_t j = 0; j < series.size(); ++j)
        sum += series.probabilities[j] * std::polar(1.0, -series.frequencies[j] * t);
    return sum;
}

inline std::vector<cplx> gamma(const GammaSeries& series, std::span<const double> times) {
    std::vector<cplx> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = gamma(series, times[k]);
    return out;
}

inline QubitState density_matrix(const InitialCondition& ic, cplx gamma_t) {
    return QubitState{std::norm(ic.beta) * std::norm(gamma_t), std::conj(ic.alpha) * ic.beta * gamma_t};
}

inline QubitState density_matrix(const InitialCondition& ic, const GammaSeries& series, double t) {
    ic.validate();
    return density_matrix(ic, gamma(series, t));
}

// --------------------------- Equilibrium --------------------------------------

/// Weights at or below this are treated as absent when testing for degenerate frequencies.
inline constexpr double kNegligibleWeight = 1e-13;

/// Long-time average of |Gamma|^2: sum_j p_j^2, valid only for a non-degenerate spectrum.
inline double equilibrium_probability(const GammaSeries& series, double degeneracy_rel = 1e-9) {
    detail::require(series.probabilities.size() == series.frequencies.size(), ErrorKind::DimensionMismatch,
                    "weights and frequencies differ in length");
    if (series.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(series.frequencies.begin(), series.frequencies.end());
        const double tol = degeneracy_rel * (*hi - *lo);
        std::vector<double> weighted;
        for (std::size_t j = 0; j < series.size(); ++j)
            if (series.probabilities[j] > kNegligibleWeight) weighted.push_back(series.frequencies[j]);
        std::sort(weighted.begin(), weighted.end());
        for (std::size_t j = 1; j < weighted.size(); ++j)
            detail::require(weighted[j] - weighted[j - 1] > tol, ErrorKind::DegenerateSpectrum,
                            "eigenfrequencies " + std::to_string(weighted[j - 1]) + " and " +
                                std::to_string(weighted[j]) + " are degenerate");
    }
    double p = 0.0;
    for (double w : series.probabilities) p += w * w;
    return p;
}

/// Plain mean of |Gamma|^2 over `samples` equally spaced times spanning [t_start, t_start + window].
inline double time_average_abs_gamma_sq(const GammaSeries& series, double t_start, double window,
                                        std::size_t samples) {
    detail::require(samples >= 2, ErrorKind::InvalidParameter, "time average needs at least 2 samples");
    detail::require(window > 0.0, ErrorKind::InvalidParameter, "time-average window must be > 0");
    const double dt = window / static_cast<double>(samples - 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < samples; ++k) sum += std::norm(gamma(series, t_start + static_cast<double>(k) * dt));
    return sum / static_cast<double>(samples);
}

/// Long-time probability of finding the excitation on oscillator k (k = 0 is the system).
inline std::vector<double> transition_probabilities(const SpectralDecomposition& eig) {
    detail::require(eig.sigma == 1, ErrorKind::SigmaOutOfRange, "transition probabilities need the Sigma=1 sector");
    const Eigen::Index n = eig.amplitudes.rows();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index j = 0; j < eig.amplitudes.cols(); ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            out[static_cast<std::size_t>(k)] += eig.probabilities(j) * std::norm(eig.amplitudes(k, j));
    return out;
}

// --------------------------- Markov reference ---------------------------------

/// p(t) = p(0) exp(-J0 t), q(t) = q(0) exp(-J0 t / 2) exp(-i w0' t).
inline QubitState markov_state(const InitialCondition& ic, double J0, double omega0_prime, double t) {
    detail::require(J0 >= 0.0, ErrorKind::InvalidParameter, "Markov rate must be >= 0");
    const double p0 = std::norm(ic.beta);
    const cplx q0 = std::conj(ic.alpha) * ic.beta;
    return QubitState{p0 * std::exp(-J0 * t), q0 * std::exp(-0.5 * J0 * t) * std::polar(1.0, -omega0_prime * t)};
}

// --------------------------- Entropy ------------------------------------------

namespace detail {
/// Entropy in nats of a qubit whose density matrix has determinant det (eigenvalues x, 1 - x).
inline double entropy_from_det(double det) {
    if (det < -1e-12) throw Error(ErrorKind::NotAState, "density matrix has a negative eigenvalue");
    det = std::clamp(det, 0.0, 0.25);
    const double delta = 1.0 - 4.0 * det;
    const double small = 2.0 * det / (1.0 + std::sqrt(delta));  // (1 - sqrt(delta)) / 2 without cancellation
    if (small <= 0.0) return 0.0;
    const double large = 1.0 - small;
    return -small * std::log(small) - large * std::log1p(-small);
}
}  // namespace detail

inline double von_neumann_entropy(const QubitState& state) {
    return detail::entropy_from_det(state.positivity_residual());
}

/// S(t) for the exact solution; det rho = |beta|^4 (|Gamma|^2 - |Gamma|^4).
inline std::vector<double> entropy_series(const InitialCondition& ic, const GammaSeries& series,
                                          std::span<const double> times) {
    ic.validate();
    const double b4 = std::norm(ic.beta) * std::norm(ic.beta);
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double g2 = std::norm(gamma(series, times[k]));
        out[k] = detail::entropy_from_det(b4 * (g2 - g2 * g2));
    }
    return out;
}

// --------------------------- Spectral moments ---------------------------------

inline constexpr std::size_t kMaxMomentOrder = 30;

/// <w^n> = sum_j p_j w_j^n for n = 1..n_max.
inline std::vector<double> spectral_moments_from_eig(const GammaSeries& series, std::size_t n_max) {
    detail::require(n_max >= 1, ErrorKind::InvalidParameter, "n_max must be >= 1");
    std::vector<double> out(n_max, 0.0);
    for (std::size_t j = 0; j < series.size(); ++j) {
        double power = 1.0;
        for (std::size_t n = 0; n < n_max; ++n) {
            power *= series.frequencies[j];
            out[n] += series.probabilities[j] * power;
        }
    }
    return out;
}

/// (H^n)_{11} for n = 1..n_max from the vector recurrence h^{(n+1)} = H h^{(n)}, h^{(0)} = e_1.
inline std::vector<double> spectral_moments_from_matrix(const Eigen::MatrixXcd& H, std::size_t n_max) {
    detail::require(n_max >= 1, ErrorKind::InvalidParameter, "n_max must be >= 1");
    detail::require(n_max <= kMaxMomentOrder, ErrorKind::Overflow,
                    "moment order capped at " + std::to_string(kMaxMomentOrder));
    detail::require(H.rows() == H.cols() && H.rows() > 0, ErrorKind::DimensionMismatch, "matrix must be square");
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(H.rows());
    h(0) = 1.0;
    std::vector<double> out(n_max);
    for (std::size_t n = 0; n < n_max; ++n) {
        h = H * h;
        detail::require(h.allFinite(), ErrorKind::Overflow, "moment recurrence overflowed at n=" + std::to_string(n + 1));
        out[n] = h(0).real();
    }
    return out;
}

/// Arrowhead form of the same recurrence without forming H:
///     h0' = w0 h0 + sum_i conj(g_i) h_i,   h_i' = w_i h_i + g_i h0.
inline std::vector<double> spectral_moments_from_recurrence(double omega0, std::span<const double> freqs,
                                                            std::span<const cplx> couplings, std::size_t n_max) {
    detail::require(n_max >= 1, ErrorKind::InvalidParameter, "n_max must be >= 1");
    detail::require(n_max <= kMaxMomentOrder, ErrorKind::Overflow,
                    "moment order capped at " + std::to_string(kMaxMomentOrder));
    detail::require(freqs.size() == couplings.size(), ErrorKind::DimensionMismatch,
                    "one coupling per frequency required");
    const std::size_t n = freqs.size();
    cplx h0(1.0, 0.0);
    std::vector<cplx> h(n, cplx(0.0, 0.0)), next(n);
    std::vector<double> out(n_max);
    for (std::size_t order = 0; order < n_max; ++order) {
        cplx next0 = omega0 * h0;
        for (std::size_t i = 0; i < n; ++i) {
            next0 += std::conj(couplings[i]) * h[i];
            next[i] = freqs[i] * h[i] + couplings[i] * h0;
        }
        h0 = next0;
        h.swap(next);
        detail::require(std::isfinite(h0.real()) && std::isfinite(h0.imag()), ErrorKind::Overflow,
                        "moment recurrence overflowed at n=" + std::to_string(order + 1));
        out[order] = h0.real();
    }
    return out;
}

// --------------------------- Characteristic times -----------------------------

/// First time |Gamma|^2 falls to 1/2, linearly interpolated between samples.
inline std::optional<double> half_life(std::span<const double> times, std::span<const double> abs_gamma_sq) {
    detail::require(times.size() == abs_gamma_sq.size(), ErrorKind::DimensionMismatch, "series lengths differ");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (abs_gamma_sq[k] > 0.5) continue;
        if (k == 0) return times[0];
        const double a = abs_gamma_sq[k - 1];
        const double b = abs_gamma_sq[k];
        const double frac = (a - 0.5) / (a - b);
        return times[k - 1] + frac * (times[k] - times[k - 1]);
    }
    return std::nullopt;
}

struct DepartureOptions {
    double threshold = 0.02;
    std::size_t persistence = 3;
};

/// First sample from which |exact - markov| exceeds the threshold for `persistence` consecutive samples.
/// std::nullopt means the curves never depart within the sampled range.
inline std::optional<double> departure_time(std::span<const double> times, std::span<const double> exact,
                                            std::span<const double> markov, const DepartureOptions& opts = {}) {
    detail::require(times.size() == exact.size() && times.size() == markov.size(), ErrorKind::DimensionMismatch,
                    "series lengths differ");
    detail::require(opts.persistence >= 1, ErrorKind::InvalidParameter, "persistence must be >= 1");
    for (std::size_t k = 1; k < times.size(); ++k)
        detail::require(times[k] > times[k - 1], ErrorKind::NotSorted, "time grid must be increasing");
    std::size_t run = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        run = (std::abs(exact[k] - markov[k]) > opts.threshold) ? run + 1 : 0;
        if (run == opts.persistence) return times[k + 1 - opts.persistence];
    }
    return std::nullopt;
}

/// First local maximum of |Gamma|^2 after the half-life whose height reaches the equilibrium level.
inline std::optional<double> first_survival_time(std::span<const double> times, std::span<const double> abs_gamma_sq,
                                                 double p_eq) {
    const auto tau = half_life(times, abs_gamma_sq);
    if (!tau) return std::nullopt;
    for (std::size_t k = 1; k + 1 < times.size(); ++k) {
        if (times[k] <= *tau) continue;
        const double y = abs_gamma_sq[k];
        if (y >= abs_gamma_sq[k - 1] && y > abs_gamma_sq[k + 1] && y >= p_eq) return times[k];
    }
    return std::nullopt;
}

}  // namespace exactq
