// oracle.hpp: Brute-force evolution over the full occupation space, traced down to the system
//
// Every excitation subspace touched by the initial state is diagonalized densely
// and propagated as psi(t) = V exp(-i lambda t) V^dagger psi(0). The system's
// density matrix is then summed over shared bath configurations with the paired
// index sets, independently of the closed forms in dynamics.hpp.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "exactq/errors.hpp"
#include "exactq/model.hpp"
#include "exactq/spectrum.hpp"
#include "exactq/state.hpp"
#include "exactq/subspace.hpp"

namespace exactq {

struct OracleOptions {
    std::size_t max_bath = 12;
    double normalization_tol = 1e-10;
    /// Eigenvalue pairs closer than this fraction of the subspace spectral span are rejected.
    double degeneracy_rel = 1e-9;
};

/// Full 2^(N+1) amplitude vector of (alpha|0> + beta|1>) (x) |0...0>, indexed by occupation code.
inline Eigen::VectorXcd product_state(const InitialCondition& ic, std::size_t n_bath) {
    detail::require(n_bath <= 20, ErrorKind::OracleTooLarge, "full state vector limited to N <= 20");
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << (n_bath + 1));
    psi(0) = ic.alpha;
    psi(1) = ic.beta;
    return psi;
}

class BruteForceOracle {
public:
    BruteForceOracle(const CouplingMatrix& G, const Eigen::VectorXcd& initial, const OracleOptions& opts = {})
        : n_bath_(G.bath_size()) {
        detail::require(G.n_total() >= 1 && n_bath_ <= opts.max_bath, ErrorKind::OracleTooLarge,
                        "oracle accepts N <= " + std::to_string(opts.max_bath) + ", got " + std::to_string(n_bath_));
        const Eigen::Index full = Eigen::Index{1} << (n_bath_ + 1);
        detail::require(initial.size() == full, ErrorKind::DimensionMismatch,
                        "initial state must have 2^(N+1) = " + std::to_string(full) + " amplitudes");
        detail::require(std::abs(initial.norm() - 1.0) <= opts.normalization_tol, ErrorKind::NotNormalized,
                        "initial state norm differs from 1");

        for (std::size_t sigma = 0; sigma <= n_bath_ + 1; ++sigma) {
            OccupationBasis basis = enumerate_basis(n_bath_, sigma);
            Eigen::VectorXcd local(static_cast<Eigen::Index>(basis.dim()));
            for (std::size_t k = 0; k < basis.dim(); ++k)
                local(static_cast<Eigen::Index>(k)) = initial(static_cast<Eigen::Index>(basis.codes[k]));
            if (local.squaredNorm() == 0.0) continue;

            const ReducedHamiltonian H = build_reduced_hamiltonian(G, basis);
            SpectralDecomposition eig = dense_hermitian_eig(H.entries, sigma);
            check_nondegenerate(eig, opts.degeneracy_rel);
            Block block;
            block.sigma = sigma;
            block.coeffs = eig.amplitudes.adjoint() * local;
            block.eigenvalues = std::move(eig.eigenvalues);
            block.vectors = std::move(eig.amplitudes);
            block.basis = std::move(basis);
            blocks_.push_back(std::move(block));
        }
        for (std::size_t a = 0; a < blocks_.size(); ++a)
            for (std::size_t b = 0; b < blocks_.size(); ++b) {
                for (unsigned s1 = 0; s1 <= 1; ++s1)
                    for (unsigned s2 = 0; s2 <= 1; ++s2) {
                        if (s1 < s2) continue;  // rho_01 is the conjugate of rho_10
                        auto pairs = paired_index_sets(s1, s2, blocks_[a].basis, blocks_[b].basis);
                        if (!pairs.empty()) pairings_.push_back({a, b, s1, s2, std::move(pairs)});
                    }
            }
    }

    std::size_t bath_size() const noexcept { return n_bath_; }

    /// Evolved amplitudes for every occupation code.
    Eigen::VectorXcd evolve(double t) const {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << (n_bath_ + 1));
        for (const auto& block : blocks_) {
            const Eigen::VectorXcd local = evolve_block(block, t);
            for (std::size_t k = 0; k < block.basis.dim(); ++k)
                psi(static_cast<Eigen::Index>(block.basis.codes[k])) = local(static_cast<Eigen::Index>(k));
        }
        return psi;
    }

    QubitState reduced_state(double t) const {
        std::vector<Eigen::VectorXcd> local;
        local.reserve(blocks_.size());
        for (const auto& block : blocks_) local.push_back(evolve_block(block, t));

        double rho00 = 0.0;
        double rho11 = 0.0;
        cplx rho10(0.0, 0.0);
        for (const auto& pairing : pairings_) {
            const auto& left = local[pairing.left];
            const auto& right = local[pairing.right];
            cplx sum(0.0, 0.0);
            for (const auto& [i1, i2] : pairing.pairs)
                sum += left(static_cast<Eigen::Index>(i1 - 1)) * std::conj(right(static_cast<Eigen::Index>(i2 - 1)));
            if (pairing.sigma == 1 && pairing.sigma_prime == 0) rho10 += sum;
            else if (pairing.sigma == 1) rho11 += sum.real();
            else rho00 += sum.real();
        }
        const double trace = rho00 + rho11;
        detail::require(std::abs(trace - 1.0) <= 1e-10, ErrorKind::NotNormalized,
                        "traced state has trace " + std::to_string(trace));
        return QubitState{rho11, rho10};
    }

private:
    struct Block {
        std::size_t sigma{0};
        OccupationBasis basis;
        Eigen::VectorXd eigenvalues;
        Eigen::MatrixXcd vectors;
        Eigen::VectorXcd coeffs;
    };
    struct Pairing {
        std::size_t left;
        std::size_t right;
        unsigned sigma;
        unsigned sigma_prime;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
    };

    static void check_nondegenerate(const SpectralDecomposition& eig, double rel) {
        const Eigen::Index n = eig.eigenvalues.size();
        if (n < 2) return;
        const double span = eig.eigenvalues(n - 1) - eig.eigenvalues(0);
        for (Eigen::Index j = 1; j < n; ++j)
            detail::require(eig.eigenvalues(j) - eig.eigenvalues(j - 1) > rel * span, ErrorKind::DegenerateSpectrum,
                            "subspace Sigma=" + std::to_string(eig.sigma) + " has a degenerate eigenvalue pair");
    }

    static Eigen::VectorXcd evolve_block(const Block& block, double t) {
        Eigen::VectorXcd phased(block.coeffs.size());
        for (Eigen::Index j = 0; j < phased.size(); ++j)
            phased(j) = block.coeffs(j) * std::polar(1.0, -block.eigenvalues(j) * t);
        return block.vectors * phased;
    }

    std::size_t n_bath_;
    std::vector<Block> blocks_;
    std::vector<Pairing> pairings_;
};

inline QubitState oracle_evolve_and_trace(const CouplingMatrix& G, const Eigen::VectorXcd& initial, double t,
                                          const OracleOptions& opts = {}) {
    return BruteForceOracle(G, initial, opts).reduced_state(t);
}

}  // namespace exactq
