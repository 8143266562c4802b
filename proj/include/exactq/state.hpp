// state.hpp: Initial conditions and 2x2 reduced density matrices of the system

#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "exactq/errors.hpp"
#include "exactq/model.hpp"

namespace exactq {

/// System prepared in alpha|0> + beta|1>, reservoir in its ground state.
struct InitialCondition {
    cplx alpha{0.0, 0.0};
    cplx beta{1.0, 0.0};

    void validate() const {
        const double norm = std::norm(alpha) + std::norm(beta);
        detail::require(std::abs(norm - 1.0) <= 1e-12, ErrorKind::NotNormalized,
                        "|alpha|^2 + |beta|^2 = " + std::to_string(norm) + ", expected 1");
    }
};

/// rho = [[1 - p, conj(q)], [q, p]]: p is the excited population, q = rho_10.
struct QubitState {
    double p{0.0};
    cplx q{0.0, 0.0};

    Eigen::Matrix2cd matrix() const {
        Eigen::Matrix2cd rho;
        rho << cplx(1.0 - p, 0.0), std::conj(q), q, cplx(p, 0.0);
        return rho;
    }

    /// det(rho) = p(1 - p) - |q|^2; negative values mean a negative eigenvalue.
    double positivity_residual() const { return p * (1.0 - p) - std::norm(q); }
};

}  // namespace exactq
