// subspace.hpp: Fixed-excitation bases, reduced Hamiltonians H^Sigma and partial-trace index sets
//
// Occupation vectors are read left to right as binary numbers: position 0 (the
// system) is the least significant bit. Bases are ordered by ascending code and
// every index exposed by this header is 1-based.

#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "exactq/errors.hpp"
#include "exactq/model.hpp"

namespace exactq {

/// Codes are 64-bit, so a subspace can describe at most 63 oscillators (N <= 62).
inline constexpr std::size_t kMaxBathForCodes = 62;

struct OccupationVector {
    std::vector<std::uint8_t> bits;  // bits[0] is the system

    std::size_t excitation() const {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }

    /// Left-to-right string, e.g. "1100" for code 3 with N = 3.
    std::string to_string() const {
        std::string out;
        out.reserve(bits.size());
        for (auto b : bits) out.push_back(b ? '1' : '0');
        return out;
    }
};

inline std::uint64_t encode(const OccupationVector& vec) {
    detail::require(!vec.bits.empty() && vec.bits.size() <= kMaxBathForCodes + 1, ErrorKind::CodeOutOfRange,
                    "occupation vector length must be 1..63");
    std::uint64_t code = 0;
    for (std::size_t k = 0; k < vec.bits.size(); ++k) {
        detail::require(vec.bits[k] <= 1, ErrorKind::CodeOutOfRange, "occupations must be 0 or 1");
        if (vec.bits[k]) code |= std::uint64_t{1} << k;
    }
    return code;
}

inline OccupationVector decode(std::uint64_t code, std::size_t n_bath) {
    detail::require(n_bath <= kMaxBathForCodes, ErrorKind::CodeOutOfRange, "N too large for 64-bit codes");
    detail::require(code < (std::uint64_t{1} << (n_bath + 1)), ErrorKind::CodeOutOfRange,
                    "code " + std::to_string(code) + " outside 0..2^(N+1)-1");
    OccupationVector vec;
    vec.bits.resize(n_bath + 1);
    for (std::size_t k = 0; k <= n_bath; ++k) vec.bits[k] = static_cast<std::uint8_t>((code >> k) & 1u);
    return vec;
}

/// C(n, k), saturating at the uint64 maximum.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        const std::uint64_t g = std::gcd(result, i);
        const std::uint64_t r = result / g;
        const std::uint64_t d = i / g;
        if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        result = r * (num / d);  // d divides num after removing gcd(result, i)
    }
    return result;
}

struct OccupationBasis {
    std::size_t n_bath{0};
    std::size_t sigma{0};
    std::vector<std::uint64_t> codes;  // ascending

    std::size_t dim() const noexcept { return codes.size(); }
    OccupationVector vector(std::size_t index1) const { return decode(codes.at(index1 - 1), n_bath); }

    /// 1-based index of a code, or 0 when the code is not in this basis.
    std::size_t index_of(std::uint64_t code) const {
        const auto it = std::lower_bound(codes.begin(), codes.end(), code);
        if (it == codes.end() || *it != code) return 0;
        return static_cast<std::size_t>(it - codes.begin()) + 1;
    }
};

inline constexpr std::size_t kDefaultMaxBasis = std::size_t{1} << 24;

inline OccupationBasis enumerate_basis(std::size_t n_bath, std::size_t sigma,
                                       std::size_t max_dim = kDefaultMaxBasis) {
    detail::require(sigma <= n_bath + 1, ErrorKind::SigmaOutOfRange,
                    "Sigma=" + std::to_string(sigma) + " outside 0..N+1");
    detail::require(n_bath <= kMaxBathForCodes, ErrorKind::CodeOutOfRange, "N too large for 64-bit codes");
    const std::uint64_t count = binomial(n_bath + 1, sigma);
    detail::require(count <= max_dim, ErrorKind::TooLarge,
                    "subspace dimension C(N+1,Sigma) exceeds " + std::to_string(max_dim));

    OccupationBasis basis{n_bath, sigma, {}};
    basis.codes.reserve(static_cast<std::size_t>(count));
    if (sigma == 0) {
        basis.codes.push_back(0);
        return basis;
    }
    // Gosper's hack walks all (N+1)-bit words with popcount Sigma in ascending order.
    const std::uint64_t limit = std::uint64_t{1} << (n_bath + 1);
    std::uint64_t v = (std::uint64_t{1} << sigma) - 1;
    while (v < limit) {
        basis.codes.push_back(v);
        const std::uint64_t t = v | (v - 1);
        v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
    }
    return basis;
}

// --------------------------- Reduced Hamiltonian ------------------------------

struct Triplet {
    std::size_t row;  // 1-based
    std::size_t col;  // 1-based
    cplx value;
};

struct ReducedHamiltonian {
    std::size_t sigma{0};
    OccupationBasis basis;
    Eigen::MatrixXcd entries;

    std::size_t dim() const noexcept { return basis.dim(); }
};

/// An arrow of the action diagram: the coupling carries an excitation from basis state `from` to `to`.
struct InteractionEdge {
    std::size_t from;  // 1-based column
    std::size_t to;    // 1-based row, to > from
    cplx coupling;

    bool operator==(const InteractionEdge&) const = default;
};

namespace detail {
inline void check_dims(const CouplingMatrix& G, const OccupationBasis& basis) {
    require(G.n_total() == basis.n_bath + 1, ErrorKind::DimensionMismatch,
            "coupling matrix has dimension " + std::to_string(G.n_total()) + " but basis has N+1=" +
                std::to_string(basis.n_bath + 1));
}

inline double diagonal_energy(const CouplingMatrix& G, std::uint64_t code) {
    double energy = 0.0;
    for (std::uint64_t c = code; c != 0; c &= c - 1) {
        const auto k = static_cast<Eigen::Index>(std::countr_zero(c));
        energy += G.entries(k, k).real();
    }
    return energy;
}
}  // namespace detail

/// Lower-triangular arrows: for k' > k with n(k') - n(k) = Delta_ij, H[k'][k] = g_ij.
inline std::vector<InteractionEdge> list_interaction_edges(const CouplingMatrix& G, const OccupationBasis& basis) {
    detail::check_dims(G, basis);
    std::vector<InteractionEdge> edges;
    const std::size_t width = basis.n_bath + 1;
    for (std::size_t k = 0; k < basis.dim(); ++k) {
        const std::uint64_t code = basis.codes[k];
        for (std::size_t i = 0; i < width; ++i) {
            if (!((code >> i) & 1u)) continue;
            for (std::size_t j = 0; j < width; ++j) {
                if ((code >> j) & 1u) continue;
                const std::uint64_t target = (code & ~(std::uint64_t{1} << i)) | (std::uint64_t{1} << j);
                if (target < code) continue;  // upper triangle: the conjugate of an arrow already listed
                const cplx g = G.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (g == cplx(0.0, 0.0)) continue;
                edges.push_back({k + 1, basis.index_of(target), g});
            }
        }
    }
    std::sort(edges.begin(), edges.end(), [](const InteractionEdge& a, const InteractionEdge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    return edges;
}

/// All nonzeros of H^Sigma (diagonal always included) as 1-based triplets, row-major order.
inline std::vector<Triplet> reduced_hamiltonian_triplets(const CouplingMatrix& G, const OccupationBasis& basis) {
    const auto edges = list_interaction_edges(G, basis);
    std::vector<Triplet> triplets;
    triplets.reserve(basis.dim() + 2 * edges.size());
    for (std::size_t k = 0; k < basis.dim(); ++k)
        triplets.push_back({k + 1, k + 1, cplx(detail::diagonal_energy(G, basis.codes[k]), 0.0)});
    for (const auto& e : edges) {
        triplets.push_back({e.to, e.from, e.coupling});
        triplets.push_back({e.from, e.to, std::conj(e.coupling)});
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return triplets;
}

inline ReducedHamiltonian build_reduced_hamiltonian(const CouplingMatrix& G, const OccupationBasis& basis) {
    detail::check_dims(G, basis);
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    ReducedHamiltonian H{basis.sigma, basis, Eigen::MatrixXcd::Zero(dim, dim)};
    for (const auto& t : reduced_hamiltonian_triplets(G, basis))
        H.entries(static_cast<Eigen::Index>(t.row - 1), static_cast<Eigen::Index>(t.col - 1)) = t.value;
    return H;
}

// --------------------------- Partial-trace index sets -------------------------

struct TraceIndexSets {
    std::vector<std::size_t> i0;  // rows whose system bit is 0
    std::vector<std::size_t> i1;  // rows whose system bit is 1
};

inline TraceIndexSets trace_index_sets(const OccupationBasis& basis) {
    TraceIndexSets sets;
    for (std::size_t k = 0; k < basis.dim(); ++k) (basis.codes[k] & 1u ? sets.i1 : sets.i0).push_back(k + 1);
    return sets;
}

/// Pairs (i1, i2) whose codes are sigma + 2E in H(Sigma) and sigma' + 2E in H(Sigma') for a shared bath E.
inline std::vector<std::pair<std::size_t, std::size_t>> paired_index_sets(unsigned sigma, unsigned sigma_prime,
                                                                          const OccupationBasis& left,
                                                                          const OccupationBasis& right) {
    detail::require(sigma <= 1 && sigma_prime <= 1, ErrorKind::InvalidParameter, "system bits must be 0 or 1");
    detail::require(left.n_bath == right.n_bath, ErrorKind::DimensionMismatch, "bases differ in N");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < left.dim(); ++k) {
        const std::uint64_t code = left.codes[k];
        if ((code & 1u) != sigma) continue;
        const std::uint64_t partner = (code & ~std::uint64_t{1}) | sigma_prime;
        if (const std::size_t idx = right.index_of(partner); idx != 0) pairs.emplace_back(k + 1, idx);
    }
    return pairs;
}

inline std::vector<std::pair<std::size_t, std::size_t>> paired_index_sets(unsigned sigma, unsigned sigma_prime,
                                                                          std::size_t Sigma,
                                                                          std::size_t Sigma_prime,
                                                                          std::size_t n_bath) {
    return paired_index_sets(sigma, sigma_prime, enumerate_basis(n_bath, Sigma),
                             enumerate_basis(n_bath, Sigma_prime));
}

}  // namespace exactq
