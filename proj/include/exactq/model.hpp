// model.hpp: Spectral density, reservoir grids, couplings and the coupling matrix G

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "exactq/errors.hpp"
#include "exactq/rng.hpp"

namespace exactq {

using cplx = std::complex<double>;

// --------------------------- Spectral density ---------------------------------

/// J(w) = 2 pi eta w_c (w / w_c)^s exp(-w / w_c).
struct SpectralModel {
    double eta{0.001};     // dimensionless coupling strength
    double s{1.0};         // ohmic order: <1 sub-ohmic, 1 ohmic, >1 super-ohmic
    double omega_c{1.0};   // cutoff frequency

    void validate() const {
        detail::require(std::isfinite(eta) && eta >= 0.0, ErrorKind::InvalidParameter,
                        "eta must be finite and >= 0");
        detail::require(std::isfinite(s) && s > 0.0, ErrorKind::InvalidParameter, "s must be > 0");
        detail::require(std::isfinite(omega_c) && omega_c > 0.0, ErrorKind::InvalidParameter,
                        "omega_c must be > 0");
    }

    double J(double omega) const {
        detail::require(omega > 0.0, ErrorKind::NonPositiveFrequency,
                        "spectral density needs omega > 0, got " + std::to_string(omega));
        const double x = omega / omega_c;
        return 2.0 * std::numbers::pi * eta * omega_c * std::pow(x, s) * std::exp(-x);
    }
};

inline double eval_spectral_density(const SpectralModel& model, double omega) {
    model.validate();
    return model.J(omega);
}

/// Decay constant of the Markovian population e^{-J(w0) t}.
inline double markov_decay_rate(const SpectralModel& model, double omega0) {
    return eval_spectral_density(model, omega0);
}

// --------------------------- Frequency grids ----------------------------------

/// Where uniform grid points sit inside [omega_min, omega_max].
enum class GridLayout {
    Inclusive,   // omega_min + (i-1) h, h = span / (N-1); both edges are grid points
    RightEdge,   // omega_min + i h, h = span / N; cells of width h sampled at their right edge
};

struct UniformSampling {
    GridLayout layout{GridLayout::Inclusive};
};

/// omega_{i+1} = omega_i + r' h with r' uniform in [epsilon_floor, 1], rescaled onto the edges.
struct JitteredSampling {
    double epsilon_floor{0.1};
    std::uint64_t seed{0};
};

using SamplingMode = std::variant<UniformSampling, JitteredSampling>;

inline double gap_floor(double omega_min, double omega_max) { return 1e-9 * (omega_max - omega_min); }

namespace detail {
inline void check_range(double omega_min, double omega_max) {
    require(std::isfinite(omega_min) && std::isfinite(omega_max) && omega_min > 0.0 &&
                omega_min < omega_max,
            ErrorKind::InvalidRange, "need 0 < omega_min < omega_max");
}
}  // namespace detail

inline std::vector<double> sample_frequencies(std::size_t n, double omega_min, double omega_max,
                                              const SamplingMode& mode) {
    detail::require(n >= 1, ErrorKind::NonPositiveCount, "frequency count must be >= 1");
    detail::check_range(omega_min, omega_max);
    const double span = omega_max - omega_min;
    std::vector<double> freqs(n);

    if (const auto* uni = std::get_if<UniformSampling>(&mode)) {
        if (uni->layout == GridLayout::RightEdge) {
            const double h = span / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) freqs[i] = omega_min + static_cast<double>(i + 1) * h;
            freqs.back() = omega_max;
            return freqs;
        }
        if (n == 1) return {0.5 * (omega_min + omega_max)};
        const double h = span / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) freqs[i] = omega_min + static_cast<double>(i) * h;
        freqs.back() = omega_max;
        return freqs;
    }

    const auto& jit = std::get<JitteredSampling>(mode);
    detail::require(jit.epsilon_floor > 0.0 && jit.epsilon_floor <= 1.0, ErrorKind::InvalidParameter,
                    "jitter floor must lie in (0, 1]");
    if (n == 1) return {0.5 * (omega_min + omega_max)};

    // Mean step of r' is (1 + eps) / 2; h makes the expected span match before rescaling.
    const double h = span / (static_cast<double>(n - 1) * 0.5 * (1.0 + jit.epsilon_floor));
    Rng rng(jit.seed);
    freqs[0] = omega_min;
    for (std::size_t i = 1; i < n; ++i) {
        const double r = rng.uniform();
        const double r_prime = (1.0 - jit.epsilon_floor) * r + jit.epsilon_floor;
        freqs[i] = freqs[i - 1] + r_prime * h;
    }
    const double raw_span = freqs.back() - freqs.front();
    const double first = freqs.front();
    for (auto& f : freqs) f = omega_min + (f - first) * (span / raw_span);
    freqs.front() = omega_min;
    freqs.back() = omega_max;
    return freqs;
}

/// Cell widths: interior (w_{j+1} - w_{j-1}) / 2, boundary cells reach the domain edges.
inline std::vector<double> cell_widths(std::span<const double> freqs, double omega_min, double omega_max) {
    detail::check_range(omega_min, omega_max);
    detail::require(!freqs.empty(), ErrorKind::NonPositiveCount, "empty frequency list");
    for (std::size_t i = 1; i < freqs.size(); ++i)
        detail::require(freqs[i] > freqs[i - 1], ErrorKind::NotSorted,
                        "frequencies must be strictly increasing (index " + std::to_string(i) + ")");
    detail::require(freqs.front() >= omega_min && freqs.back() <= omega_max, ErrorKind::InvalidRange,
                    "frequencies must lie inside [omega_min, omega_max]");

    const std::size_t n = freqs.size();
    std::vector<double> edges(n + 1);
    edges[0] = omega_min;
    for (std::size_t i = 1; i < n; ++i) edges[i] = 0.5 * (freqs[i - 1] + freqs[i]);
    edges[n] = omega_max;

    std::vector<double> widths(n);
    for (std::size_t i = 0; i < n; ++i) widths[i] = edges[i + 1] - edges[i];
    return widths;
}

/// g_j = sqrt(J(w_j) eps_j / 2 pi) e^{i theta_j}. Empty phases means theta_j = 0.
inline std::vector<cplx> build_couplings(const SpectralModel& model, std::span<const double> freqs,
                                         std::span<const double> widths,
                                         std::span<const double> phases = {}) {
    model.validate();
    detail::require(freqs.size() == widths.size(), ErrorKind::DimensionMismatch,
                    "one width per frequency required");
    detail::require(phases.empty() || phases.size() == freqs.size(), ErrorKind::DimensionMismatch,
                    "phases must be empty or one per frequency");
    std::vector<cplx> g(freqs.size());
    for (std::size_t j = 0; j < freqs.size(); ++j) {
        detail::require(widths[j] >= 0.0, ErrorKind::NegativeWidth,
                        "cell width " + std::to_string(j) + " is negative");
        const double magnitude = std::sqrt(model.J(freqs[j]) * widths[j] / (2.0 * std::numbers::pi));
        g[j] = phases.empty() ? cplx(magnitude, 0.0) : std::polar(magnitude, phases[j]);
    }
    return g;
}

// --------------------------- Reservoir ----------------------------------------

struct BathGrid {
    double omega0{1.0};
    std::vector<double> freqs;
    double omega_min{0.0};
    double omega_max{0.0};
    std::vector<double> widths;
    std::vector<cplx> couplings;
    std::optional<std::uint64_t> seed;

    std::size_t size() const noexcept { return freqs.size(); }

    double coupling_norm_sq() const {
        double total = 0.0;
        for (const auto& g : couplings) total += std::norm(g);
        return total;
    }
};

inline void validate(const BathGrid& bath) {
    detail::require(std::isfinite(bath.omega0) && bath.omega0 > 0.0, ErrorKind::NonPositiveFrequency,
                    "omega0 must be > 0");
    detail::require(!bath.freqs.empty(), ErrorKind::NonPositiveCount, "bath has no oscillators");
    detail::require(bath.widths.size() == bath.freqs.size() && bath.couplings.size() == bath.freqs.size(),
                    ErrorKind::DimensionMismatch, "freqs, widths and couplings differ in length");
    detail::check_range(bath.omega_min, bath.omega_max);
    const double floor = gap_floor(bath.omega_min, bath.omega_max);
    for (std::size_t i = 1; i < bath.freqs.size(); ++i) {
        detail::require(bath.freqs[i] > bath.freqs[i - 1], ErrorKind::NotSorted,
                        "bath frequencies must be strictly increasing");
        detail::require(bath.freqs[i] - bath.freqs[i - 1] > floor, ErrorKind::DegenerateFrequencies,
                        "bath frequencies " + std::to_string(i - 1) + " and " + std::to_string(i) +
                            " closer than the gap floor");
    }
    for (double w : bath.widths) detail::require(w > 0.0, ErrorKind::NegativeWidth, "cell widths must be > 0");
    for (const auto& g : bath.couplings)
        detail::require(std::isfinite(g.real()) && std::isfinite(g.imag()), ErrorKind::InvalidParameter,
                        "non-finite coupling");
}

/// Reservoir with explicit couplings (e.g. a constant system coupling g_s).
inline BathGrid make_bath_grid(double omega0, std::vector<double> freqs, double omega_min, double omega_max,
                               std::vector<cplx> couplings) {
    BathGrid bath;
    bath.omega0 = omega0;
    bath.widths = cell_widths(freqs, omega_min, omega_max);
    bath.freqs = std::move(freqs);
    bath.omega_min = omega_min;
    bath.omega_max = omega_max;
    bath.couplings = std::move(couplings);
    validate(bath);
    return bath;
}

/// Reservoir sampled on a grid with couplings drawn from the spectral density.
inline BathGrid make_bath_grid(const SpectralModel& model, double omega0, std::size_t n, double omega_min,
                               double omega_max, const SamplingMode& mode,
                               std::span<const double> phases = {}) {
    auto freqs = sample_frequencies(n, omega_min, omega_max, mode);
    const auto widths = cell_widths(freqs, omega_min, omega_max);
    auto couplings = build_couplings(model, freqs, widths, phases);
    BathGrid bath = make_bath_grid(omega0, std::move(freqs), omega_min, omega_max, std::move(couplings));
    if (const auto* jit = std::get_if<JitteredSampling>(&mode)) bath.seed = jit->seed;
    return bath;
}

// --------------------------- Coupling matrix ----------------------------------

/// Hermitian (N+1)x(N+1) matrix: g_ii = w_i, row 0 holds g_j, interior holds bath-bath terms.
struct CouplingMatrix {
    Eigen::MatrixXcd entries;

    std::size_t n_total() const noexcept { return static_cast<std::size_t>(entries.rows()); }
    std::size_t bath_size() const noexcept { return n_total() - 1; }

    /// True when every bath-bath entry is exactly zero.
    bool is_arrowhead() const {
        const Eigen::Index n = entries.rows();
        for (Eigen::Index i = 1; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
                if (entries(i, j) != cplx(0.0, 0.0)) return false;
        return true;
    }
};

struct NoBathBath {};

/// Every bath pair i != j > 0 coupled by the same g_e.
struct ConstantBathBath {
    cplx g_e{0.0, 0.0};
};

/// Symmetrised bath-bath couplings from per-oscillator spectral densities L_i.
struct SpectralBathBath {
    std::vector<double> eta;                // one strength per bath oscillator
    double s{1.0};
    std::optional<Eigen::MatrixXd> phases;  // antisymmetric alpha_ij over bath indices; zero if absent
};

using BathBathMode = std::variant<NoBathBath, ConstantBathBath, SpectralBathBath>;

namespace detail {
/// L_i(w) = (1/2) eta_i w_i (w / w_i)^s exp(-w / w_i).
inline double bath_density(double eta_i, double omega_i, double s, double omega) {
    const double x = omega / omega_i;
    return 0.5 * eta_i * omega_i * std::pow(x, s) * std::exp(-x);
}
}  // namespace detail

inline CouplingMatrix build_coupling_matrix(const BathGrid& bath, const BathBathMode& bath_bath = NoBathBath{}) {
    validate(bath);
    const std::size_t n = bath.size();
    const auto dim = static_cast<Eigen::Index>(n + 1);
    CouplingMatrix G{Eigen::MatrixXcd::Zero(dim, dim)};

    G.entries(0, 0) = bath.omega0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto k = static_cast<Eigen::Index>(j + 1);
        G.entries(k, k) = bath.freqs[j];
        G.entries(0, k) = bath.couplings[j];
        G.entries(k, 0) = std::conj(bath.couplings[j]);
    }

    if (const auto* c = std::get_if<ConstantBathBath>(&bath_bath)) {
        for (Eigen::Index i = 1; i < dim; ++i)
            for (Eigen::Index j = i + 1; j < dim; ++j) {
                G.entries(i, j) = c->g_e;
                G.entries(j, i) = std::conj(c->g_e);
            }
    } else if (const auto* sp = std::get_if<SpectralBathBath>(&bath_bath)) {
        detail::require(sp->eta.size() == n, ErrorKind::DimensionMismatch,
                        "spectral bath-bath mode needs one eta per bath oscillator");
        detail::require(sp->s > 0.0, ErrorKind::InvalidParameter, "bath-bath s must be > 0");
        if (sp->phases) {
            detail::require(sp->phases->rows() == static_cast<Eigen::Index>(n) &&
                                sp->phases->cols() == static_cast<Eigen::Index>(n),
                            ErrorKind::DimensionMismatch, "bath-bath phase matrix must be N x N");
        }
        for (std::size_t i = 0; i < n; ++i) {
            detail::require(sp->eta[i] >= 0.0, ErrorKind::InvalidParameter, "bath-bath eta must be >= 0");
            for (std::size_t j = i + 1; j < n; ++j) {
                const double wi = bath.freqs[i];
                const double wj = bath.freqs[j];
                const double magnitude =
                    std::sqrt(detail::bath_density(sp->eta[i], wi, sp->s, wj) * bath.widths[j] +
                              detail::bath_density(sp->eta[j], wj, sp->s, wi) * bath.widths[i]);
                const double alpha = sp->phases ? (*sp->phases)(static_cast<Eigen::Index>(i),
                                                                static_cast<Eigen::Index>(j))
                                                : 0.0;
                const cplx g = std::polar(magnitude, alpha);
                const auto a = static_cast<Eigen::Index>(i + 1);
                const auto b = static_cast<Eigen::Index>(j + 1);
                G.entries(a, b) = g;
                G.entries(b, a) = std::conj(g);
            }
        }
    }
    return G;
}

}  // namespace exactq
