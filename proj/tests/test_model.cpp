#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>
#include <random>

#include "exactq/model.hpp"
#include "support.hpp"

using namespace exactq;
using exactq::testing::simpson;

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

}  // namespace

TEST(SpectralDensity, OhmicAtCutoff) {
    // 2 pi eta / e at w = w_c.
    EXPECT_NEAR(eval_spectral_density({0.1, 1.0, 1.0}, 1.0), 0.2311454, 1e-7);
    EXPECT_NEAR(eval_spectral_density({0.001, 1.0, 1.0}, 2.0), 4.0 * std::numbers::pi * 0.001 * std::exp(-2.0), 1e-18);
}

TEST(SpectralDensity, MarkovRate) {
    EXPECT_NEAR(markov_decay_rate({1.0, 1.0, 1.0}, 1.0), 2.311454, 1e-6);
    EXPECT_NEAR(markov_decay_rate({0.01, 1.0, 1.0}, 1.0), 0.02311454, 1e-8);
    EXPECT_EQ(markov_decay_rate({0.0, 1.0, 1.0}, 1.0), 0.0);
}

TEST(SpectralDensity, VanishesAtZeroAndRejectsNonPositive) {
    for (double s : {0.5, 1.0, 2.0}) EXPECT_LT(eval_spectral_density({0.3, s, 1.0}, 1e-12), 1e-5);
    EXPECT_EQ(kind_of([] { eval_spectral_density({}, 0.0); }), ErrorKind::NonPositiveFrequency);
    EXPECT_EQ(kind_of([] { eval_spectral_density({}, -1.0); }), ErrorKind::NonPositiveFrequency);
    EXPECT_EQ(kind_of([] { eval_spectral_density({0.1, 0.0, 1.0}, 1.0); }), ErrorKind::InvalidParameter);
    EXPECT_EQ(kind_of([] { eval_spectral_density({0.1, 1.0, -1.0}, 1.0); }), ErrorKind::InvalidParameter);
}

TEST(SpectralDensity, FiniteAndNonNegative) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const SpectralModel m{u(rng), 0.1 + 3.0 * u(rng), 0.1 + 5.0 * u(rng)};
        const double j = m.J(1e-6 + 50.0 * u(rng));
        EXPECT_TRUE(std::isfinite(j));
        EXPECT_GE(j, 0.0);
    }
}

TEST(Grid, InclusiveUniform) {
    const auto f = sample_frequencies(3, 1.0, 3.0, UniformSampling{});
    ASSERT_EQ(f.size(), 3u);
    EXPECT_DOUBLE_EQ(f[0], 1.0);
    EXPECT_DOUBLE_EQ(f[1], 2.0);
    EXPECT_DOUBLE_EQ(f[2], 3.0);
    EXPECT_DOUBLE_EQ(sample_frequencies(1, 1.0, 3.0, UniformSampling{})[0], 2.0);
}

TEST(Grid, RightEdgeUniform) {
    const auto f = sample_frequencies(4, 1.0, 3.0, UniformSampling{GridLayout::RightEdge});
    const std::vector<double> expected{1.5, 2.0, 2.5, 3.0};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f[i], expected[i]);
}

TEST(Grid, TableSevenGridSpacing) {
    const auto f = sample_frequencies(1000, 0.05, 5.0, UniformSampling{});
    EXPECT_DOUBLE_EQ(f.front(), 0.05);
    EXPECT_DOUBLE_EQ(f.back(), 5.0);
    EXPECT_NEAR(f[1] - f[0], 4.95 / 999.0, 1e-15);
    const auto w = cell_widths(f, 0.05, 5.0);
    EXPECT_NEAR(w[500], 4.95 / 999.0, 1e-14);
}

TEST(Grid, JitteredMatchesIndependentRecurrence) {
    const auto f = sample_frequencies(5, 0.5, 1.5, JitteredSampling{0.1, 7});
    // Recurrence w_{i+1} = w_i + r' h with r' in [0.1, 1], drawn from a fresh mt19937_64(7).
    std::mt19937_64 engine(7);
    const double h = 1.0 / (4.0 * 0.55);
    std::vector<double> raw{0.5};
    for (int i = 0; i < 4; ++i) {
        const double r = std::ldexp(static_cast<double>(engine() >> 11), -53);
        raw.push_back(raw.back() + (0.9 * r + 0.1) * h);
    }
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(f.front(), 0.5);
    EXPECT_EQ(f.back(), 1.5);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(f[i], 0.5 + (raw[i] - 0.5) / (raw[4] - 0.5), 1e-14);
    for (int i = 1; i < 5; ++i) EXPECT_GT(f[i], f[i - 1]);
}

TEST(Grid, JitteredIsDeterministicPerSeed) {
    const SpectralModel m{0.1, 1.0, 1.0};
    const auto a = make_bath_grid(m, 1.0, 200, 0.1, 3.0, JitteredSampling{0.1, 42});
    const auto b = make_bath_grid(m, 1.0, 200, 0.1, 3.0, JitteredSampling{0.1, 42});
    const auto c = make_bath_grid(m, 1.0, 200, 0.1, 3.0, JitteredSampling{0.1, 43});
    ASSERT_EQ(a.freqs.size(), b.freqs.size());
    EXPECT_EQ(std::memcmp(a.freqs.data(), b.freqs.data(), a.freqs.size() * sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(a.couplings.data(), b.couplings.data(), a.couplings.size() * sizeof(cplx)), 0);
    EXPECT_NE(a.freqs[100], c.freqs[100]);
    ASSERT_TRUE(a.seed.has_value());
    EXPECT_EQ(*a.seed, 42u);
}

TEST(Grid, Errors) {
    EXPECT_EQ(kind_of([] { sample_frequencies(0, 1.0, 2.0, UniformSampling{}); }), ErrorKind::NonPositiveCount);
    EXPECT_EQ(kind_of([] { sample_frequencies(3, 2.0, 1.0, UniformSampling{}); }), ErrorKind::InvalidRange);
    EXPECT_EQ(kind_of([] { sample_frequencies(3, 0.0, 1.0, UniformSampling{}); }), ErrorKind::InvalidRange);
    EXPECT_EQ(kind_of([] { sample_frequencies(3, 1.0, 2.0, JitteredSampling{0.0, 1}); }), ErrorKind::InvalidParameter);
}

TEST(CellWidths, BoundaryCellsReachEdges) {
    const std::vector<double> f{1.0, 2.0, 4.0};
    const auto w = cell_widths(f, 0.5, 5.0);
    EXPECT_DOUBLE_EQ(w[0], 1.0);
    EXPECT_DOUBLE_EQ(w[1], 1.5);
    EXPECT_DOUBLE_EQ(w[2], 2.0);
}

TEST(CellWidths, InteriorEqualsSpacingOnUniformGrid) {
    const auto f = sample_frequencies(11, 1.0, 2.0, UniformSampling{});
    const auto w = cell_widths(f, 1.0, 2.0);
    for (std::size_t i = 1; i + 1 < w.size(); ++i) EXPECT_NEAR(w[i], 0.1, 1e-15);
}

TEST(CellWidths, SumToDomainForRandomGrids) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double lo = 0.01 + u(rng);
        const double hi = lo + 0.1 + 10.0 * u(rng);
        const auto n = 1 + static_cast<std::size_t>(u(rng) * 400);
        const auto f = sample_frequencies(n, lo, hi, JitteredSampling{0.05 + 0.9 * u(rng), rng()});
        const auto w = cell_widths(f, lo, hi);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        EXPECT_NEAR(total, hi - lo, 1e-12 * (hi - lo));
        for (double x : w) EXPECT_GT(x, 0.0);
    }
}

TEST(CellWidths, RejectsUnsorted) {
    const std::vector<double> f{1.0, 3.0, 2.0};
    EXPECT_EQ(kind_of([&] { cell_widths(f, 0.5, 5.0); }), ErrorKind::NotSorted);
}

TEST(Couplings, DirectEvaluation) {
    const std::vector<double> f{1.0};
    const std::vector<double> w{0.00495};
    const auto g = build_couplings({0.001, 1.0, 1.0}, f, w);
    EXPECT_NEAR(std::abs(g[0]), std::sqrt(0.001 * std::exp(-1.0) * 0.00495), 1e-16);
    EXPECT_NEAR(std::abs(g[0]), 0.001349, 5e-7);
    EXPECT_EQ(g[0].imag(), 0.0);
}

TEST(Couplings, ZeroStrengthAndPhases) {
    const std::vector<double> f{1.0, 2.0};
    const std::vector<double> w{0.5, 0.5};
    for (const auto& g : build_couplings({0.0, 1.0, 1.0}, f, w)) EXPECT_EQ(g, cplx(0.0, 0.0));
    const std::vector<double> theta{0.3, -1.2};
    const auto g = build_couplings({0.1, 1.0, 1.0}, f, w, theta);
    const auto g0 = build_couplings({0.1, 1.0, 1.0}, f, w);
    for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(std::abs(g[i]), std::abs(g0[i]), 1e-16);
        EXPECT_NEAR(std::arg(g[i]), theta[i], 1e-15);
    }
    const std::vector<double> bad{-0.1, 0.5};
    EXPECT_EQ(kind_of([&] { build_couplings({0.1, 1.0, 1.0}, f, bad); }), ErrorKind::NegativeWidth);
    const std::vector<double> short_theta{0.1};
    EXPECT_EQ(kind_of([&] { build_couplings({0.1, 1.0, 1.0}, f, w, short_theta); }), ErrorKind::DimensionMismatch);
}

class CouplingSum : public ::testing::TestWithParam<std::tuple<double, double, std::size_t>> {};

TEST_P(CouplingSum, MatchesQuadratureOfSpectralDensity) {
    const auto [eta, s, n] = GetParam();
    const SpectralModel m{eta, s, 1.0};
    const auto bath = make_bath_grid(m, 1.0, n, 0.05, 5.0, UniformSampling{});
    const double integral = simpson([&](double w) { return m.J(w); }, 0.05, 5.0) / (2.0 * std::numbers::pi);
    EXPECT_LE(std::abs(bath.coupling_norm_sq() - integral) / integral, 0.02);
}

INSTANTIATE_TEST_SUITE_P(Grids, CouplingSum,
                         ::testing::Values(std::make_tuple(0.001, 1.0, std::size_t{500}),
                                           std::make_tuple(0.1, 0.5, std::size_t{1000}),
                                           std::make_tuple(0.3, 2.0, std::size_t{800})));

TEST(BathGrid, ValidationErrors) {
    EXPECT_EQ(kind_of([] { make_bath_grid(1.0, {1.0, 1.0 + 1e-12}, 0.5, 1.5, {cplx(0.1), cplx(0.1)}); }),
              ErrorKind::DegenerateFrequencies);
    EXPECT_EQ(kind_of([] { make_bath_grid(1.0, {1.0, 1.2}, 0.5, 1.5, {cplx(0.1)}); }), ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([] { make_bath_grid(-1.0, {1.0, 1.2}, 0.5, 1.5, {cplx(0.1), cplx(0.1)}); }),
              ErrorKind::NonPositiveFrequency);
}

TEST(CouplingMatrix, ArrowheadLayout) {
    const auto bath = exactq::testing::five_mode_bath();
    const auto G = build_coupling_matrix(bath);
    ASSERT_EQ(G.n_total(), 5u);
    EXPECT_TRUE(G.is_arrowhead());
    EXPECT_EQ(G.entries(0, 0), cplx(1.0));
    for (int k = 1; k < 5; ++k) {
        EXPECT_EQ(G.entries(k, k), cplx(bath.freqs[k - 1]));
        EXPECT_EQ(G.entries(0, k), cplx(0.1));
        EXPECT_EQ(G.entries(k, 0), cplx(0.1));
    }
}

TEST(CouplingMatrix, ConstantBathBath) {
    const auto G = build_coupling_matrix(exactq::testing::five_mode_bath(), ConstantBathBath{cplx(0.1, 0.0)});
    EXPECT_FALSE(G.is_arrowhead());
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (i != j) {
                EXPECT_EQ(G.entries(i, j), cplx(0.1));
            }
}

TEST(CouplingMatrix, HermitianBitExact) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const bool spectral = trial % 2;
        const auto bath = make_bath_grid({0.1, 1.0, 1.0}, 1.0, 12, 0.2, 2.0, JitteredSampling{0.3, rng()},
                                         std::vector<double>(12, 0.7));
        BathBathMode mode = ConstantBathBath{cplx(0.02, -0.01)};
        if (spectral) {
            Eigen::MatrixXd alpha = Eigen::MatrixXd::Random(12, 12);
            alpha = (alpha - alpha.transpose()).eval();
            mode = SpectralBathBath{std::vector<double>(12, 0.05), 1.0, alpha};
        }
        const auto G = build_coupling_matrix(bath, mode);
        for (Eigen::Index i = 0; i < 13; ++i) {
            EXPECT_EQ(G.entries(i, i).imag(), 0.0);
            for (Eigen::Index j = 0; j < 13; ++j) {
                EXPECT_EQ(G.entries(i, j).real(), G.entries(j, i).real());
                EXPECT_EQ(G.entries(i, j).imag(), -G.entries(j, i).imag());
            }
        }
    }
}

TEST(CouplingMatrix, SpectralBathBathSymmetricCase) {
    // Two bath oscillators sharing eta, frequency and width would give sqrt(2 L(w) eps); here check the
    // general formula against a direct evaluation of L_i.
    const auto bath = make_bath_grid(1.0, {0.8, 1.3}, 0.5, 1.6, {cplx(0.05), cplx(0.05)});
    const auto G = build_coupling_matrix(bath, SpectralBathBath{{0.2, 0.2}, 1.0, std::nullopt});
    auto L = [](double eta, double wi, double w) { return 0.5 * eta * wi * (w / wi) * std::exp(-w / wi); };
    const double expected = std::sqrt(L(0.2, 0.8, 1.3) * bath.widths[1] + L(0.2, 1.3, 0.8) * bath.widths[0]);
    EXPECT_NEAR(G.entries(1, 2).real(), expected, 1e-15);
    EXPECT_EQ(G.entries(1, 2).imag(), 0.0);

    // Equal frequencies cannot coexist in one grid, so probe the symmetric limit through L directly.
    const double w = 1.1, eps = 0.05;
    EXPECT_NEAR(std::sqrt(L(0.2, w, w) * eps + L(0.2, w, w) * eps), std::sqrt(2.0 * L(0.2, w, w) * eps), 1e-16);
}

TEST(CouplingMatrix, SpectralModeDimensionCheck) {
    const auto bath = exactq::testing::five_mode_bath();
    EXPECT_EQ(kind_of([&] { build_coupling_matrix(bath, SpectralBathBath{{0.1, 0.1}, 1.0, std::nullopt}); }),
              ErrorKind::DimensionMismatch);
}
