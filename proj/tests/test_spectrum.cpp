#include <gtest/gtest.h>

#include <random>

#include "exactq/spectrum.hpp"
#include "support.hpp"

using namespace exactq;
using exactq::testing::arrowhead_matrix;
using exactq::testing::random_arrowhead;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no exactq::Error thrown";
    return ErrorKind::IoError;
}

void expect_decomposition_invariants(const Eigen::MatrixXcd& H, const SpectralDecomposition& d) {
    const double scale = H.norm();
    for (Eigen::Index j = 0; j < H.rows(); ++j) {
        const Eigen::VectorXcd v = d.amplitudes.col(j);
        EXPECT_LE((H * v - d.eigenvalues(j) * v).norm(), 1e-10 * scale) << "residual of pair " << j;
    }
    const Eigen::MatrixXcd gram = d.amplitudes.adjoint() * d.amplitudes;
    EXPECT_LE((gram - Eigen::MatrixXcd::Identity(H.rows(), H.cols())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(d.probabilities.sum(), 1.0, 1e-12);
    for (Eigen::Index j = 1; j < H.rows(); ++j) EXPECT_LE(d.eigenvalues(j - 1), d.eigenvalues(j));
}

}  // namespace

TEST(Secular, ValueAndDerivative) {
    const std::vector<double> f{0.5, 1.5};
    const std::vector<cplx> g{cplx(0.1, 0.0), cplx(0.0, 0.2)};
    const auto v = secular_function(1.2, 1.0, f, g);
    EXPECT_NEAR(v.value, 1.0 - 1.2 + 0.01 / 0.7 + 0.04 / (-0.3), 1e-15);
    EXPECT_NEAR(v.derivative, -1.0 - 0.01 / 0.49 - 0.04 / 0.09, 1e-14);
}

TEST(Secular, UncoupledRootAtSystemFrequency) {
    const std::vector<double> f{0.5, 1.5};
    const std::vector<cplx> g{cplx(0.0), cplx(0.0)};
    EXPECT_EQ(secular_function(1.0, 1.0, f, g).value, 0.0);
}

TEST(Secular, DerivativeBelowMinusOne) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_arrowhead(rng, 1 + trial % 20);
        for (int k = 0; k < 20; ++k) {
            const double x = 4.0 * u(rng) - 0.5;
            EXPECT_LE(secular_function(x, a.omega0, a.freqs, a.couplings).derivative, -1.0);
        }
    }
}

TEST(Secular, PoleHit) {
    const std::vector<double> f{0.5, 1.5};
    const std::vector<cplx> g{cplx(0.1), cplx(0.1)};
    EXPECT_EQ(kind_of([&] { secular_function(1.5, 1.0, f, g); }), ErrorKind::PoleHit);
}

TEST(Arrowhead, ResonantPair) {
    const std::vector<double> f{1.0};
    const std::vector<cplx> g{cplx(0.1)};
    const auto ev = arrowhead_eigenvalues(1.0, f, g);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_NEAR(ev[0], 0.9, 1e-14);
    EXPECT_NEAR(ev[1], 1.1, 1e-14);
    const auto d = arrowhead_decomposition(1.0, f, g);
    EXPECT_NEAR(d.probabilities(0), 0.5, 1e-14);
    EXPECT_NEAR(d.probabilities(1), 0.5, 1e-14);
}

TEST(Arrowhead, TwoByTwoAnalyticOffResonance) {
    const double w0 = 1.0, w1 = 1.4, g = 0.15;
    const double mean = 0.5 * (w0 + w1), half = std::hypot(0.5 * (w1 - w0), g);
    const std::vector<double> f{w1};
    const std::vector<cplx> c{std::polar(g, 0.4)};
    const auto d = arrowhead_decomposition(w0, f, c);
    EXPECT_NEAR(d.eigenvalues(0), mean - half, 1e-14);
    EXPECT_NEAR(d.eigenvalues(1), mean + half, 1e-14);
    // weight of the system in the lower state: cos^2 of the mixing angle
    const double cos2 = 0.5 * (1.0 + 0.5 * (w1 - w0) / half);
    EXPECT_NEAR(d.probabilities(0), cos2, 1e-13);
}

TEST(Arrowhead, ZeroCouplingsGiveDiagonal) {
    const std::vector<double> f{0.5, 0.9, 1.3};
    const std::vector<cplx> g(3, cplx(0.0));
    const auto d = arrowhead_decomposition(1.0, f, g);
    const std::vector<double> expected{0.5, 0.9, 1.0, 1.3};
    for (int j = 0; j < 4; ++j) EXPECT_EQ(d.eigenvalues(j), expected[j]);
    EXPECT_EQ(d.probabilities(2), 1.0);
    EXPECT_EQ(d.amplitudes(0, 2), cplx(1.0));
    EXPECT_EQ(d.amplitudes(1, 0), cplx(1.0));
}

TEST(Arrowhead, PartiallyZeroCouplings) {
    const std::vector<double> f{0.5, 0.9, 1.3, 1.6};
    const std::vector<cplx> g{cplx(0.1), cplx(0.0), cplx(0.05, 0.02), cplx(0.0)};
    const auto H = arrowhead_matrix(1.0, f, g);
    const auto d = arrowhead_decomposition(1.0, f, g);
    expect_decomposition_invariants(H, d);
    const auto dense = dense_hermitian_eig(H);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(d.eigenvalues(j), dense.eigenvalues(j), 1e-13);
}

TEST(Arrowhead, FourModesAgreeWithDense) {
    const auto bath = exactq::testing::five_mode_bath();
    const auto d = arrowhead_decomposition(bath.omega0, bath.freqs, bath.couplings);
    const auto dense = dense_hermitian_eig(arrowhead_matrix(bath.omega0, bath.freqs, bath.couplings));
    for (int j = 0; j < 5; ++j) {
        EXPECT_NEAR(d.eigenvalues(j), dense.eigenvalues(j), 1e-10);
        EXPECT_NEAR(d.probabilities(j), dense.probabilities(j), 1e-10);
    }
    // Symmetric placement around w0 makes w0 itself a root with no bath shift.
    EXPECT_NEAR(d.eigenvalues(2), 1.0, 1e-15);
}

TEST(Arrowhead, ProbabilitiesFromSecularDerivative) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_arrowhead(rng, 2 + trial);
        const auto d = arrowhead_decomposition(a.omega0, a.freqs, a.couplings);
        for (Eigen::Index j = 0; j < d.eigenvalues.size(); ++j) {
            const auto v = secular_function(d.eigenvalues(j), a.omega0, a.freqs, a.couplings);
            EXPECT_NEAR(d.probabilities(j), -1.0 / v.derivative, 1e-12);
        }
    }
}

TEST(Arrowhead, CrossSolverAgreementAndBrackets) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 50);
        const auto a = random_arrowhead(rng, n, trial % 3 == 0 ? 0.5 : 0.1);

        // Interlacing brackets: (-inf, w_1), (w_1, w_2), ..., (w_N, inf), one root each.
        std::vector<double> edges{-std::numeric_limits<double>::infinity()};
        edges.insert(edges.end(), a.freqs.begin(), a.freqs.end());
        edges.push_back(std::numeric_limits<double>::infinity());
        ArrowheadOptions opts;
        std::size_t iterates = 0;
        opts.observer = [&](std::size_t root, double, double x, double) {
            ++iterates;
            ASSERT_GT(x, edges[root]) << "root " << root;
            ASSERT_LT(x, edges[root + 1]) << "root " << root;
        };
        const auto d = arrowhead_decomposition(a.omega0, a.freqs, a.couplings, opts);
        EXPECT_GE(iterates, n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            EXPECT_GT(d.eigenvalues(static_cast<Eigen::Index>(k)), edges[k]);
            EXPECT_LT(d.eigenvalues(static_cast<Eigen::Index>(k)), edges[k + 1]);
        }

        const auto H = arrowhead_matrix(a.omega0, a.freqs, a.couplings);
        const auto dense = dense_hermitian_eig(H);
        const double span = dense.eigenvalues(dense.eigenvalues.size() - 1) - dense.eigenvalues(0);
        EXPECT_LE((d.eigenvalues - dense.eigenvalues).cwiseAbs().maxCoeff(), 1e-8 * span);
        EXPECT_LE((d.probabilities - dense.probabilities).cwiseAbs().maxCoeff(), 1e-8);
        expect_decomposition_invariants(H, d);
    }
}

TEST(Arrowhead, SignChangesAtBracketEdges) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_arrowhead(rng, 10);
        // Just inside each pole f0 is +inf on the right and -inf on the left.
        for (std::size_t i = 0; i < a.freqs.size(); ++i) {
            const double d = 1e-9;
            EXPECT_LT(secular_function(a.freqs[i] - d, a.omega0, a.freqs, a.couplings).value, 0.0);
            EXPECT_GT(secular_function(a.freqs[i] + d, a.omega0, a.freqs, a.couplings).value, 0.0);
        }
    }
}

TEST(Arrowhead, TraceIdentities) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_arrowhead(rng, 1 + trial * 3);
        const auto d = arrowhead_decomposition(a.omega0, a.freqs, a.couplings);
        double m1 = 0.0, m2 = 0.0, g2 = 0.0;
        for (Eigen::Index j = 0; j < d.eigenvalues.size(); ++j) {
            m1 += d.probabilities(j) * d.eigenvalues(j);
            m2 += d.probabilities(j) * d.eigenvalues(j) * d.eigenvalues(j);
        }
        for (const auto& g : a.couplings) g2 += std::norm(g);
        EXPECT_NEAR(m1, a.omega0, 1e-10 * a.omega0);
        EXPECT_NEAR(m2 - a.omega0 * a.omega0, g2, 1e-10 * g2);
    }
}

TEST(Arrowhead, WeakFarModesKeepRelativeAccuracy) {
    // Couplings of 1e-7 put roots within ~1e-14 of their poles; the offsets from the poles must still be
    // resolved to full relative accuracy.
    std::vector<double> f;
    std::vector<cplx> g;
    for (int i = 0; i < 40; ++i) {
        f.push_back(0.1 + 0.1 * i);
        g.push_back(cplx(i == 9 ? 0.05 : 1e-7, 0.0));
    }
    const double w0 = 1.0;
    const auto roots = arrowhead_roots(w0, f, g);
    const auto d = arrowhead_eigenvectors(w0, f, g, roots);
    EXPECT_NEAR(d.probabilities.sum(), 1.0, 1e-12);
    const auto dense = dense_hermitian_eig(arrowhead_matrix(w0, f, g));
    EXPECT_LE((d.probabilities - dense.probabilities).cwiseAbs().maxCoeff(), 1e-12);

    std::size_t checked = 0;
    for (const auto& r : roots) {
        if (r.pole == 9 || std::abs(r.tau) > 1e-10) continue;
        // Fixed point delta = g^2 / (w_j + delta - w0 - sum_{i != j} g_i^2 / (w_j + delta - w_i)).
        const std::size_t j = r.pole;
        double delta = 0.0;
        for (int it = 0; it < 50; ++it) {
            long double denom = static_cast<long double>(f[j]) - w0 + delta;
            for (std::size_t i = 0; i < f.size(); ++i)
                if (i != j) denom -= std::norm(g[i]) / (static_cast<long double>(f[j]) - f[i] + delta);
            delta = static_cast<double>(std::norm(g[j]) / denom);
        }
        EXPECT_NEAR(r.tau / delta, 1.0, 1e-12) << "pole " << j;
        ++checked;
    }
    EXPECT_GE(checked, 30u);
}

TEST(Arrowhead, SystemOutsidePoleRange) {
    for (double w0 : {0.05, 5.0}) {
        const std::vector<double> f{0.5, 0.8, 1.1, 1.4};
        const std::vector<cplx> g{cplx(0.2), cplx(0.1), cplx(0.3), cplx(0.05)};
        const auto d = arrowhead_decomposition(w0, f, g);
        const auto dense = dense_hermitian_eig(arrowhead_matrix(w0, f, g));
        EXPECT_LE((d.eigenvalues - dense.eigenvalues).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((d.probabilities - dense.probabilities).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Arrowhead, SystemOnAPole) {
    const std::vector<double> f{0.5, 1.0, 1.5};
    const std::vector<cplx> g{cplx(0.1), cplx(0.2), cplx(0.1)};
    const auto d = arrowhead_decomposition(1.0, f, g);
    const auto dense = dense_hermitian_eig(arrowhead_matrix(1.0, f, g));
    EXPECT_LE((d.eigenvalues - dense.eigenvalues).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Arrowhead, Errors) {
    const std::vector<double> close{1.0, 1.0 + 1e-12, 2.0};
    const std::vector<cplx> g(3, cplx(0.1));
    EXPECT_EQ(kind_of([&] { arrowhead_eigenvalues(1.0, close, g); }), ErrorKind::DegenerateFrequencies);
    const std::vector<double> unsorted{1.0, 0.5, 2.0};
    EXPECT_EQ(kind_of([&] { arrowhead_eigenvalues(1.0, unsorted, g); }), ErrorKind::NotSorted);
    ArrowheadOptions tight;
    tight.max_newton = 0;
    tight.max_bisection = 3;
    const std::vector<double> f{0.5, 1.5, 2.0};
    EXPECT_EQ(kind_of([&] { arrowhead_eigenvalues(1.0, f, g, tight); }), ErrorKind::NoConvergence);
}

TEST(Arrowhead, SweepFlagsPerturbedRoots) {
    const std::vector<double> f{0.5, 1.5};
    const std::vector<cplx> g{cplx(0.2), cplx(0.2)};
    auto roots = arrowhead_roots(1.2, f, g);
    EXPECT_NO_THROW(arrowhead_eigenvectors(1.2, f, g, roots));
    roots[0].tau *= 1.0 + 1e-6;
    roots[0].value = f[roots[0].pole] + roots[0].tau;
    EXPECT_EQ(kind_of([&] { arrowhead_eigenvectors(1.2, f, g, roots); }), ErrorKind::NoConvergence);
}

TEST(Dense, DiagonalMatrix) {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(3, 3);
    H(0, 0) = 2.0;
    H(1, 1) = -1.0;
    H(2, 2) = 0.5;
    const auto d = dense_hermitian_eig(H);
    EXPECT_EQ(d.eigenvalues(0), -1.0);
    EXPECT_EQ(d.eigenvalues(1), 0.5);
    EXPECT_EQ(d.eigenvalues(2), 2.0);
    EXPECT_NEAR(std::abs(d.amplitudes(1, 0)), 1.0, 1e-15);
    EXPECT_NEAR(d.probabilities(2), 1.0, 1e-15);
}

TEST(Dense, TwoByTwo) {
    Eigen::MatrixXcd H(2, 2);
    H << 1.0, 0.1, 0.1, 1.0;
    const auto d = dense_hermitian_eig(H);
    EXPECT_NEAR(d.eigenvalues(0), 0.9, 1e-15);
    EXPECT_NEAR(d.eigenvalues(1), 1.1, 1e-15);
}

TEST(Dense, BathBathMatrixInvariants) {
    const auto G = build_coupling_matrix(exactq::testing::five_mode_bath(), ConstantBathBath{cplx(0.1)});
    const Eigen::MatrixXcd H = single_excitation_hamiltonian(G);
    const auto d = decompose_single_excitation(G);
    expect_decomposition_invariants(H, d);
}

TEST(Dense, DispatchUsesArrowheadWhenPossible) {
    const auto G = build_coupling_matrix(exactq::testing::five_mode_bath());
    const auto a = decompose_single_excitation(G);
    const auto d = dense_hermitian_eig(single_excitation_hamiltonian(G));
    EXPECT_LE((a.eigenvalues - d.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Dense, NotHermitian) {
    Eigen::MatrixXcd H(2, 2);
    H << 1.0, 0.1, 0.2, 1.0;
    EXPECT_EQ(kind_of([&] { dense_hermitian_eig(H); }), ErrorKind::NotHermitian);
    Eigen::MatrixXcd R(2, 3);
    EXPECT_EQ(kind_of([&] { dense_hermitian_eig(R); }), ErrorKind::DimensionMismatch);
}
