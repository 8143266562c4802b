// pipeline.hpp: Batch pipelines behind the exactq command-line tool
//
// Needs nlohmann/json (vendor/json.hpp) on the include path in addition to the
// core library. All file contents are built as strings first, then written
// atomically, so a failed run leaves no partial outputs.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "exactq/config.hpp"
#include "exactq/dynamics.hpp"
#include "exactq/errors.hpp"
#include "exactq/io.hpp"
#include "exactq/model.hpp"
#include "exactq/oracle.hpp"
#include "exactq/spectrum.hpp"
#include "exactq/state.hpp"
#include "exactq/subspace.hpp"

#ifndef EXACTQ_VERSION
#define EXACTQ_VERSION "unknown"
#endif

namespace exactq {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = EXACTQ_VERSION;

// --------------------------- Simulation ----------------------------------------

struct Simulation {
    RunConfig config;
    BathGrid bath;
    CouplingMatrix G;
    SpectralDecomposition eig;
    GammaSeries series;
    double markov_rate{0.0};
    double omega0_prime{0.0};

    std::vector<double> times;
    std::vector<cplx> gamma;
    std::vector<double> abs_gamma_sq;
    std::vector<double> p_exact;
    std::vector<cplx> q;
    std::vector<double> p_markov;
    std::vector<double> entropy;

    double p_eq{0.0};
    std::optional<double> half_life;
    std::optional<double> departure_time;
    std::optional<double> first_survival_time;

    std::vector<double> moments_eig;
    std::vector<double> moments_reference;
    std::string moments_reference_method;
};

/// Runs model -> eigen -> dynamics for one configuration. The time series are always computed
/// because the characteristic times are read off them.
inline Simulation simulate(const RunConfig& config) {
    validate_config(config);
    Simulation sim;
    sim.config = config;
    sim.bath = make_bath(config);
    sim.G = make_coupling_matrix(config, sim.bath);
    sim.eig = decompose_single_excitation(sim.G);
    sim.series = make_gamma_series(sim.eig);
    sim.markov_rate = resolved_markov_rate(config, sim.bath);
    sim.omega0_prime = config.omega0_prime.value_or(config.omega0);

    const auto windows = resolved_windows(config, sim.markov_rate);
    sim.times = sample_times(windows);
    sim.gamma = gamma(sim.series, sim.times);

    const InitialCondition ic = initial_condition(config);
    const std::size_t n = sim.times.size();
    sim.abs_gamma_sq.resize(n);
    sim.p_exact.resize(n);
    sim.q.resize(n);
    sim.p_markov.resize(n);
    sim.entropy.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const QubitState rho = density_matrix(ic, sim.gamma[k]);
        sim.abs_gamma_sq[k] = std::norm(sim.gamma[k]);
        sim.p_exact[k] = rho.p;
        sim.q[k] = rho.q;
        sim.p_markov[k] = markov_state(ic, sim.markov_rate, sim.omega0_prime, sim.times[k]).p;
        sim.entropy[k] = von_neumann_entropy(rho);
    }

    sim.p_eq = equilibrium_probability(sim.series);
    sim.half_life = half_life(sim.times, sim.abs_gamma_sq);
    sim.departure_time = departure_time(sim.times, sim.p_exact, sim.p_markov,
                                        {config.departure_threshold, config.departure_persistence});
    sim.first_survival_time = first_survival_time(sim.times, sim.abs_gamma_sq, sim.p_eq);

    sim.moments_eig = spectral_moments_from_eig(sim.series, config.moments);
    if (sim.G.is_arrowhead()) {
        sim.moments_reference = spectral_moments_from_recurrence(config.omega0, sim.bath.freqs, sim.bath.couplings,
                                                                 config.moments);
        sim.moments_reference_method = "arrowhead_recurrence";
    } else {
        sim.moments_reference = spectral_moments_from_matrix(single_excitation_hamiltonian(sim.G), config.moments);
        sim.moments_reference_method = "matrix_recurrence";
    }
    return sim;
}

// --------------------------- Serialization --------------------------------------

namespace detail {
inline ordered_json optional_json(const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(); }

inline ordered_json double_list(const std::vector<double>& xs) {
    ordered_json out = ordered_json::array();
    for (double x : xs) out.push_back(x);
    return out;
}
}  // namespace detail

/// Every key of the configuration with the value actually used, defaults included.
inline ordered_json config_json(const RunConfig& c, double markov_rate, const std::vector<TimeWindow>& windows) {
    ordered_json j;
    j["eta"] = c.eta;
    j["s"] = c.s;
    j["omega_c"] = c.omega_c;
    j["omega0"] = c.omega0;
    j["N"] = c.n_bath;
    j["omega_min"] = c.omega_min;
    j["omega_max"] = c.omega_max;
    j["grid"] = c.grid;
    j["grid_layout"] = c.grid_layout;
    j["jitter_floor"] = c.jitter_floor;
    j["seed"] = c.seed;
    j["frequencies"] = detail::double_list(c.frequencies);
    j["couplings"] = c.couplings;
    j["g_s"] = c.g_s;
    j["phases"] = detail::double_list(c.phases);
    j["alpha_re"] = c.alpha.real();
    j["alpha_im"] = c.alpha.imag();
    j["beta_re"] = c.beta.real();
    j["beta_im"] = c.beta.imag();
    j["bath_bath"] = c.bath_bath;
    j["g_e"] = c.g_e.real();
    j["g_e_im"] = c.g_e.imag();
    j["bath_eta"] = c.bath_eta;
    j["bath_s"] = c.bath_s;
    ordered_json w = ordered_json::array();
    for (const auto& win : windows) w.push_back({{"t_start", win.t_start}, {"t_end", win.t_end}, {"samples", win.samples}});
    j["time_windows"] = w;
    j["markov_rate"] = markov_rate;
    j["omega0_prime"] = c.omega0_prime.value_or(c.omega0);
    j["departure_threshold"] = c.departure_threshold;
    j["departure_persistence"] = c.departure_persistence;
    j["moments"] = c.moments;
    j["sigma"] = c.sigma;
    j["outputs"] = c.outputs;
    return j;
}

inline std::string distribution_csv(const Simulation& sim) {
    CsvWriter csv{"j", "omega_j", "p_j"};
    for (std::size_t j = 0; j < sim.series.size(); ++j) {
        csv.field(j + 1).field(sim.series.frequencies[j]).field(sim.series.probabilities[j]);
        csv.end_row();
    }
    return csv.str();
}

inline std::string series_csv(const Simulation& sim) {
    CsvWriter csv{"t", "abs_gamma_sq", "re_gamma", "im_gamma", "p_exact", "re_q", "im_q", "p_markov", "entropy_nats"};
    for (std::size_t k = 0; k < sim.times.size(); ++k) {
        csv.field(sim.times[k])
            .field(sim.abs_gamma_sq[k])
            .field(sim.gamma[k].real())
            .field(sim.gamma[k].imag())
            .field(sim.p_exact[k])
            .field(sim.q[k].real())
            .field(sim.q[k].imag())
            .field(sim.p_markov[k])
            .field(sim.entropy[k]);
        csv.end_row();
    }
    return csv.str();
}

inline ordered_json summary_json(const Simulation& sim) {
    ordered_json j;
    j["tool"] = "exactq";
    j["version"] = kToolVersion;
    j["seed"] = sim.bath.seed ? ordered_json(*sim.bath.seed) : ordered_json();
    j["p_eq"] = sim.p_eq;
    j["half_life"] = detail::optional_json(sim.half_life);
    j["departure_time"] = detail::optional_json(sim.departure_time);
    j["first_survival_time"] = detail::optional_json(sim.first_survival_time);
    j["markov_rate"] = sim.markov_rate;
    j["coupling_norm_sq"] = sim.bath.coupling_norm_sq();
    j["solver"] = sim.G.is_arrowhead() ? "arrowhead" : "dense";
    ordered_json moments;
    moments["orders"] = ordered_json::array();
    for (std::size_t n = 1; n <= sim.moments_eig.size(); ++n) moments["orders"].push_back(n);
    moments["eigen_sum"] = detail::double_list(sim.moments_eig);
    moments[sim.moments_reference_method] = detail::double_list(sim.moments_reference);
    j["moments"] = moments;
    j["config"] = config_json(sim.config, sim.markov_rate, resolved_windows(sim.config, sim.markov_rate));
    return j;
}

inline std::string summary_text(const Simulation& sim) { return summary_json(sim).dump(2) + "\n"; }

inline std::string hamiltonian_csv(const std::vector<Triplet>& triplets) {
    CsvWriter csv{"row", "col", "re", "im"};
    for (const auto& t : triplets) {
        csv.field(t.row).field(t.col).field(t.value.real()).field(t.value.imag());
        csv.end_row();
    }
    return csv.str();
}

inline std::string edges_csv(const std::vector<InteractionEdge>& edges) {
    CsvWriter csv{"from", "to", "re", "im"};
    for (const auto& e : edges) {
        csv.field(e.from).field(e.to).field(e.coupling.real()).field(e.coupling.imag());
        csv.end_row();
    }
    return csv.str();
}

/// Edges of the Sigma = 1 block read straight off G: basis state k has oscillator k - 1 excited,
/// so no occupation codes are needed and N is not limited by their width.
inline std::vector<InteractionEdge> single_excitation_edges(const CouplingMatrix& G) {
    std::vector<InteractionEdge> edges;
    const auto n = static_cast<std::size_t>(G.entries.rows());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx g = G.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (g != cplx(0.0, 0.0)) edges.push_back({i + 1, j + 1, g});
        }
    return edges;
}

inline std::vector<Triplet> single_excitation_triplets(const CouplingMatrix& G) {
    std::vector<Triplet> triplets;
    const auto n = static_cast<std::size_t>(G.entries.rows());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            // H^1 = G^T
            const cplx h = G.entries(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
            if (r == c || h != cplx(0.0, 0.0)) triplets.push_back({r + 1, c + 1, r == c ? cplx(h.real(), 0.0) : h});
        }
    return triplets;
}

/// Occupation string with the system first: "10100" is system and oscillator 2 excited.
inline std::string bitstring(std::uint64_t code, std::size_t n_bath) {
    std::string out(n_bath + 1, '0');
    for (std::size_t k = 0; k <= n_bath; ++k)
        if ((code >> k) & 1u) out[k] = '1';
    return out;
}

inline std::string basis_csv(const OccupationBasis& basis) {
    CsvWriter csv{"index", "code", "bitstring"};
    for (std::size_t k = 0; k < basis.dim(); ++k) {
        csv.field(k + 1).field(std::to_string(basis.codes[k])).field(bitstring(basis.codes[k], basis.n_bath));
        csv.end_row();
    }
    return csv.str();
}

/// Output directory: --out, then the config's output_dir, then $EXACTQ_OUT, then "exactq_out".
inline std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag,
                                                const std::optional<std::string>& from_config) {
    if (flag && !flag->empty()) return *flag;
    if (from_config && !from_config->empty()) return *from_config;
    if (const char* env = std::getenv("EXACTQ_OUT"); env && *env) return env;
    return "exactq_out";
}

inline std::vector<std::filesystem::path> write_simulation(const Simulation& sim, const std::filesystem::path& dir) {
    ensure_directory(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& content) {
        write_file_atomic(dir / name, content);
        written.push_back(dir / name);
    };
    const auto& c = sim.config;
    if (c.wants("distribution")) emit("distribution.csv", distribution_csv(sim));
    if (c.wants("series")) emit("series.csv", series_csv(sim));
    if (c.wants("summary")) emit("summary.json", summary_text(sim));
    if (c.wants("hamiltonian")) emit("hamiltonian.csv", hamiltonian_csv(single_excitation_triplets(sim.G)));
    if (c.wants("edges")) emit("edges.csv", edges_csv(single_excitation_edges(sim.G)));
    return written;
}

// --------------------------- Sweep ----------------------------------------------

struct SweepRow {
    std::string value;
    double p_eq{0.0};
    std::optional<double> half_life;
    std::optional<double> departure_time;
    std::optional<double> first_survival_time;
};

inline const std::vector<std::string>& sweep_axes() {
    static const std::vector<std::string> axes{"eta", "s", "N", "g_e"};
    return axes;
}

/// Template with one axis value substituted. A g_e sweep on a template without bath-bath
/// coupling switches it to the constant mode.
inline RunConfig sweep_point(const RunConfig& base, const std::string& axis, const std::string& value) {
    if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end())
        throw detail::config_error("axis", "expected one of eta|s|N|g_e, got '" + axis + "'");
    if (axis == "N" && base.grid == "explicit")
        throw detail::config_error("axis", "cannot sweep N over an explicit frequency grid");
    RunConfig c = base;
    apply_config_value(c, axis, value);
    if (axis == "g_e" && c.bath_bath == "none") c.bath_bath = "constant";
    if (axis == "N" && !c.phases.empty() && c.phases.size() != c.n_bath)
        throw detail::config_error("phases", "phase list length does not match swept N=" + value);
    validate_config(c);
    return c;
}

/// Runs every point on up to `jobs` threads; rows come back in input order and the first
/// failing point (in input order) is rethrown.
inline std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& axis,
                                       const std::vector<std::string>& values, unsigned jobs = 1) {
    std::vector<RunConfig> points;
    points.reserve(values.size());
    for (const auto& v : values) points.push_back(sweep_point(base, axis, v));

    std::vector<SweepRow> rows(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < points.size(); k = next++) {
            try {
                const Simulation sim = simulate(points[k]);
                rows[k] = {values[k], sim.p_eq, sim.half_life, sim.departure_time, sim.first_survival_time};
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

inline std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows) {
    CsvWriter csv{axis, "p_eq", "half_life", "departure_time", "first_survival_time"};
    for (const auto& r : rows) {
        csv.field(r.value).field(r.p_eq).field(r.half_life).field(r.departure_time).field(r.first_survival_time);
        csv.end_row();
    }
    return csv.str();
}

// --------------------------- Subspace export -------------------------------------

inline constexpr std::size_t kDefaultExportCap = 100000;

/// Coupling matrix from CSV rows "i,j,re,im" (0-based, 0 = system, header required).
/// An entry given on one side only is mirrored as its conjugate; diagonal entries must be real.
inline CouplingMatrix parse_coupling_matrix_csv(std::string_view text, std::size_t n_bath) {
    const auto n = static_cast<Eigen::Index>(n_bath + 1);
    CouplingMatrix G;
    G.entries = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXi given = Eigen::MatrixXi::Zero(n, n);
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorKind::ConfigError, "coupling matrix line " + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || detail::trim(line).empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != 4) fail("expected i,j,re,im");
        const auto i = static_cast<Eigen::Index>(detail::parse_uint("i", fields[0]));
        const auto j = static_cast<Eigen::Index>(detail::parse_uint("j", fields[1]));
        if (i >= n || j >= n) fail("index exceeds N=" + std::to_string(n_bath));
        const cplx g(detail::parse_double("re", fields[2]), detail::parse_double("im", fields[3]));
        if (i == j && g.imag() != 0.0) fail("diagonal entries must be real");
        if (given(i, j)) fail("duplicate entry");
        given(i, j) = 1;
        G.entries(i, j) = g;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (given(i, j) && !given(j, i)) G.entries(j, i) = std::conj(G.entries(i, j));
            else if (given(j, i) && !given(i, j)) G.entries(i, j) = std::conj(G.entries(j, i));
            else if (given(i, j) && std::abs(G.entries(i, j) - std::conj(G.entries(j, i))) > 1e-12)
                throw Error(ErrorKind::NotHermitian, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                         ") and its transpose are not conjugate");
        }
    return G;
}

struct SubspaceExport {
    std::string basis;
    std::string hamiltonian;
    std::string edges;
};

inline SubspaceExport export_subspace(const CouplingMatrix& G, std::size_t sigma,
                                      std::size_t cap = kDefaultExportCap) {
    const std::size_t n_bath = G.bath_size();
    detail::require(sigma <= n_bath + 1, ErrorKind::SigmaOutOfRange,
                    "Sigma must lie in 0..N+1=" + std::to_string(n_bath + 1));
    const std::uint64_t dim = binomial(n_bath + 1, sigma);
    detail::require(dim <= cap, ErrorKind::TooLarge,
                    "C(N+1, Sigma) exceeds the export cap of " + std::to_string(cap) + " rows");
    detail::require(n_bath <= kMaxBathForCodes, ErrorKind::CodeOutOfRange, "N too large for 64-bit codes");
    const OccupationBasis basis = enumerate_basis(n_bath, sigma);
    return {basis_csv(basis), hamiltonian_csv(reduced_hamiltonian_triplets(G, basis)),
            edges_csv(list_interaction_edges(G, basis))};
}

inline void write_subspace(const SubspaceExport& ex, const std::filesystem::path& dir) {
    ensure_directory(dir);
    write_file_atomic(dir / "basis.csv", ex.basis);
    write_file_atomic(dir / "hamiltonian.csv", ex.hamiltonian);
    write_file_atomic(dir / "edges.csv", ex.edges);
}

// --------------------------- Self-test --------------------------------------------

enum class SelftestFault {
    None,
    /// Negates the system's diagonal entry of the matrix handed to the eigensolvers.
    SystemSign,
};

struct SelftestCheck {
    std::string name;
    bool pass{false};
    std::string detail;
};

namespace detail {

inline std::string sci(double x) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << x;
    return s.str();
}

inline CouplingMatrix apply_fault(CouplingMatrix G, SelftestFault fault) {
    if (fault == SelftestFault::SystemSign) G.entries(0, 0) = -G.entries(0, 0);
    return G;
}

inline BathGrid selftest_five_mode() {
    return make_bath_grid(1.0, {0.5, 0.75, 1.25, 1.5}, 0.5, 1.5, std::vector<cplx>(4, cplx(0.1, 0.0)));
}

inline CouplingMatrix selftest_random_model(std::mt19937_64& rng, std::size_t n, bool bath_bath) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const SpectralModel model{0.05 + 0.2 * unit(rng), 0.5 + 1.5 * unit(rng), 1.0};
    std::vector<double> theta;
    for (std::size_t i = 0; i < n; ++i) theta.push_back(2.0 * std::numbers::pi * unit(rng));
    const BathGrid bath = make_bath_grid(model, 0.8 + 0.4 * unit(rng), n, 0.3, 2.0, JitteredSampling{0.2, rng()}, theta);
    if (bath_bath) return build_coupling_matrix(bath, ConstantBathBath{cplx(0.02 * unit(rng), 0.0)});
    return build_coupling_matrix(bath);
}

}  // namespace detail

/// Invariant checks on fixed seeds. `fault` corrupts the eigensolver input to show the checks bite.
inline std::vector<SelftestCheck> run_selftest(SelftestFault fault = SelftestFault::None) {
    std::vector<SelftestCheck> checks;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto guarded = [&](const std::string& name, const std::function<SelftestCheck()>& body) {
        try {
            checks.push_back(body());
        } catch (const std::exception& e) {
            checks.push_back({name, false, e.what()});
        }
    };

    // Roots interlace the poles and every iterate stays inside its bracket.
    guarded("interlacing", [&] {
        bool ok = true;
        std::size_t iterates = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 2 + static_cast<std::size_t>(unit(rng) * 40);
            std::vector<double> freqs;
            std::vector<cplx> g;
            double w = 0.2;
            for (std::size_t i = 0; i < n; ++i) {
                w += (2.8 / static_cast<double>(n)) * (0.2 + 0.8 * unit(rng));
                freqs.push_back(w);
                g.push_back(std::polar(0.2 * unit(rng), 2.0 * std::numbers::pi * unit(rng)));
            }
            const double omega0 = 0.1 + 3.1 * unit(rng);
            ArrowheadOptions opts;
            opts.observer = [&](std::size_t, double lo, double x, double hi) {
                ++iterates;
                if (!(x >= lo && x <= hi)) ok = false;
            };
            const auto roots = arrowhead_eigenvalues(omega0, freqs, g, opts);
            for (std::size_t k = 0; k < roots.size(); ++k) {
                if (k > 0 && !(roots[k] >= freqs[k - 1])) ok = false;
                if (k < n && !(roots[k] <= freqs[k])) ok = false;
            }
        }
        return SelftestCheck{"interlacing", ok, std::to_string(iterates) + " iterates checked"};
    });

    // Arrowhead and dense routes agree on eigenvalues and weights.
    guarded("cross_solver", [&] {
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const CouplingMatrix G =
                detail::apply_fault(detail::selftest_random_model(rng, 5 + static_cast<std::size_t>(unit(rng) * 40), false), fault);
            const auto fast = decompose_single_excitation(G);
            const auto dense = dense_hermitian_eig(single_excitation_hamiltonian(G));
            const double scale = std::max(1.0, dense.eigenvalues.cwiseAbs().maxCoeff());
            worst = std::max(worst, (fast.eigenvalues - dense.eigenvalues).cwiseAbs().maxCoeff() / scale);
            worst = std::max(worst, (fast.probabilities - dense.probabilities).cwiseAbs().maxCoeff());
        }
        return SelftestCheck{"cross_solver", worst <= 1e-8, "max deviation " + detail::sci(worst)};
    });

    // sum_j p_j w_j = w0 and the variance equals sum |g_i|^2, with w0 and g read from the model.
    guarded("moments", [&] {
        double worst_mean = 0.0;
        double worst_var = 0.0;
        double worst_rec = 0.0;
        auto check_model = [&](const CouplingMatrix& G_model) {
            const double omega0 = G_model.entries(0, 0).real();
            double g2 = 0.0;
            for (Eigen::Index i = 1; i < G_model.entries.rows(); ++i) g2 += std::norm(G_model.entries(0, i));
            const auto series = make_gamma_series(decompose_single_excitation(detail::apply_fault(G_model, fault)));
            const auto m = spectral_moments_from_eig(series, 6);
            worst_mean = std::max(worst_mean, std::abs(m[0] - omega0) / std::abs(omega0));
            if (g2 > 0.0) worst_var = std::max(worst_var, std::abs(m[1] - m[0] * m[0] - g2) / g2);
            const auto ref = spectral_moments_from_matrix(single_excitation_hamiltonian(G_model), 6);
            for (std::size_t n = 0; n < 6; ++n)
                worst_rec = std::max(worst_rec, std::abs(m[n] - ref[n]) / std::max(1.0, std::abs(ref[n])));
        };
        check_model(build_coupling_matrix(detail::selftest_five_mode()));
        check_model(build_coupling_matrix(detail::selftest_five_mode(), ConstantBathBath{cplx(0.1, 0.0)}));
        for (int trial = 0; trial < 5; ++trial) check_model(detail::selftest_random_model(rng, 50, trial % 2 == 1));
        RunConfig table;
        table.grid_layout = "right_edge";
        check_model(build_coupling_matrix(make_bath(table)));
        const bool ok = worst_mean <= 1e-10 && worst_var <= 1e-10 && worst_rec <= 1e-8;
        return SelftestCheck{"moments", ok,
                             "mean " + detail::sci(worst_mean) + "; variance " + detail::sci(worst_var) +
                                 "; recurrence " + detail::sci(worst_rec)};
    });

    // Closed-form density matrix against brute-force evolution of the full state.
    guarded("oracle_equivalence", [&] {
        double worst = 0.0;
        for (int trial = 0; trial < 6; ++trial) {
            const std::size_t n = 1 + static_cast<std::size_t>(unit(rng) * 8);
            const CouplingMatrix G = detail::selftest_random_model(rng, n, trial % 2 == 1);
            const double theta = std::numbers::pi * unit(rng);
            const InitialCondition ic{std::polar(std::cos(theta / 2), 0.0),
                                      std::polar(std::sin(theta / 2), 2.0 * std::numbers::pi * unit(rng))};
            const BruteForceOracle oracle(G, product_state(ic, n));
            const auto series = make_gamma_series(decompose_single_excitation(detail::apply_fault(G, fault)));
            for (int k = 0; k < 10; ++k) {
                const double t = 200.0 * unit(rng);
                const QubitState a = density_matrix(ic, series, t);
                const QubitState b = oracle.reduced_state(t);
                worst = std::max({worst, std::abs(a.p - b.p), std::abs(a.q - b.q)});
            }
        }
        return SelftestCheck{"oracle_equivalence", worst <= 1e-10, "max deviation " + detail::sci(worst)};
    });

    // Four-mode reservoir around w0 = 1 with g = 0.1, without and with bath-bath coupling.
    guarded("golden_four_mode", [&] {
        const BathGrid bath = detail::selftest_five_mode();
        const double a = equilibrium_probability(make_gamma_series(
            decompose_single_excitation(detail::apply_fault(build_coupling_matrix(bath), fault))));
        const double b = equilibrium_probability(make_gamma_series(decompose_single_excitation(
            detail::apply_fault(build_coupling_matrix(bath, ConstantBathBath{cplx(0.1, 0.0)}), fault))));
        const bool ok = std::abs(a - 0.5335) <= 5e-4 && std::abs(b - 0.6185) <= 5e-4;
        return SelftestCheck{"golden_four_mode", ok,
                             "p_eq " + format_double(a) + " (g_e=0); " + format_double(b) + " (g_e=0.1)"};
    });

    // Equal superposition at |Gamma|^2 = 1/2.
    guarded("entropy_half_decay", [&] {
        const double amp = 1.0 / std::sqrt(2.0);
        const double S = von_neumann_entropy(density_matrix(InitialCondition{amp, amp}, cplx(amp, 0.0)));
        return SelftestCheck{"entropy_half_decay", std::abs(S - 0.2458) <= 1e-3, "S = " + format_double(S)};
    });

    return checks;
}

inline std::string selftest_table(const std::vector<SelftestCheck>& checks) {
    std::string out = "check,status,detail\n";
    for (const auto& c : checks) out += c.name + "," + (c.pass ? "PASS" : "FAIL") + "," + c.detail + "\n";
    return out;
}

}  // namespace exactq
