// support.hpp: Shared fixtures and independent reference computations for the test suite

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "exactq/model.hpp"

namespace exactq::testing {

/// Composite Simpson rule with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels = 20000) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int k = 1; k < panels; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return sum * h / 3.0;
}

/// Four bath modes at 0.5, 0.75, 1.25, 1.5 around w0 = 1, every system coupling 0.1.
inline BathGrid five_mode_bath() {
    return make_bath_grid(1.0, {0.5, 0.75, 1.25, 1.5}, 0.5, 1.5, std::vector<cplx>(4, cplx(0.1, 0.0)));
}

/// Single bath oscillator resonant with the system: eigenvalues w0 -+ g.
inline BathGrid resonant_pair(double omega0 = 1.0, double g = 0.1) {
    return make_bath_grid(omega0, {omega0}, 0.5 * omega0, 1.5 * omega0, {cplx(g, 0.0)});
}

struct RandomArrowhead {
    double omega0;
    std::vector<double> freqs;
    std::vector<cplx> couplings;
};

/// Sorted, well-separated poles in [0.2, 3], complex couplings up to `gmax`, w0 anywhere in [0.1, 3.2].
inline RandomArrowhead random_arrowhead(std::mt19937_64& rng, std::size_t n, double gmax = 0.2) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomArrowhead a;
    a.omega0 = 0.1 + 3.1 * unit(rng);
    double w = 0.2;
    const double mean_step = 2.8 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        w += mean_step * (0.2 + 0.8 * unit(rng));
        a.freqs.push_back(w);
        a.couplings.push_back(std::polar(gmax * unit(rng), 2.0 * std::numbers::pi * unit(rng)));
    }
    return a;
}

/// Dense single-excitation matrix of an arrowhead model, written out entry by entry.
inline Eigen::MatrixXcd arrowhead_matrix(double omega0, const std::vector<double>& freqs,
                                         const std::vector<cplx>& couplings) {
    const auto n = static_cast<Eigen::Index>(freqs.size());
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    H(0, 0) = omega0;
    for (Eigen::Index i = 0; i < n; ++i) {
        H(i + 1, i + 1) = freqs[static_cast<std::size_t>(i)];
        H(i + 1, 0) = couplings[static_cast<std::size_t>(i)];
        H(0, i + 1) = std::conj(couplings[static_cast<std::size_t>(i)]);
    }
    return H;
}

/// Random reservoir with jittered frequencies on [0.3, 2], w0 = 1, optional phases and bath-bath coupling.
inline CouplingMatrix random_model(std::mt19937_64& rng, std::size_t n, bool phases, double g_e) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SpectralModel model{0.05 + 0.2 * unit(rng), 0.5 + 1.5 * unit(rng), 1.0};
    std::vector<double> theta;
    if (phases)
        for (std::size_t i = 0; i < n; ++i) theta.push_back(2.0 * std::numbers::pi * unit(rng));
    const BathGrid bath = make_bath_grid(model, 0.8 + 0.4 * unit(rng), n, 0.3, 2.0, JitteredSampling{0.2, rng()}, theta);
    if (g_e != 0.0) return build_coupling_matrix(bath, ConstantBathBath{cplx(g_e, 0.0)});
    return build_coupling_matrix(bath);
}

}  // namespace exactq::testing
