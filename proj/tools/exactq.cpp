// exactq: command-line front end: simulate, sweep, subspace, selftest
//
// Exit codes: 0 ok, 1 selftest failure, 2 configuration or usage error,
// 3 numerical failure, 4 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "exactq/pipeline.hpp"

namespace {

exactq::RunConfig load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed) {
    exactq::RunConfig config = exactq::load_config(path);
    if (seed) config.seed = *seed;
    return config;
}

std::optional<std::string> opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact reduced dynamics of a qubit coupled to a finite bosonic reservoir"};
    app.set_version_flag("--version", std::string(exactq::kToolVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;

    auto* simulate = app.add_subcommand("simulate", "Write distribution.csv, series.csv and summary.json");
    simulate->add_option("--config", config_path, "Run configuration (key = value)")->required();
    simulate->add_option("--out", out_dir, "Output directory (default: output_dir key, then $EXACTQ_OUT)");
    simulate->add_option("--seed", seed, "Override the configured seed");

    std::string axis;
    std::vector<std::string> values;
    auto* sweep = app.add_subcommand("sweep", "Write sweep.csv with one row per axis value");
    sweep->add_option("--config", config_path, "Template configuration")->required();
    sweep->add_option("--axis", axis, "Swept key")->required()->check(CLI::IsMember({"eta", "s", "N", "g_e"}));
    sweep->add_option("--values", values, "Axis values")->required()->delimiter(',');
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--jobs", jobs, "Points evaluated in parallel")->check(CLI::Range(1u, 256u));
    sweep->add_option("--seed", seed, "Override the configured seed");

    std::string matrix_path;
    std::optional<std::size_t> n_bath;
    std::optional<std::size_t> sigma;
    std::size_t cap = exactq::kDefaultExportCap;
    auto* subspace = app.add_subcommand("subspace", "Write basis.csv, hamiltonian.csv and edges.csv for one Sigma");
    auto* sub_config = subspace->add_option("--config", config_path, "Build the coupling matrix from a configuration");
    auto* sub_matrix = subspace->add_option("--matrix", matrix_path, "Coupling matrix CSV (i,j,re,im; 0 = system)");
    sub_config->excludes(sub_matrix);
    subspace->add_option("--n", n_bath, "Bath size N (required with --matrix)");
    subspace->add_option("--sigma", sigma, "Excitation number (default: sigma key, else 1)");
    subspace->add_option("--cap", cap, "Maximum number of basis rows");
    subspace->add_option("--out", out_dir, "Output directory");

    std::string fault = "none";
    auto* selftest = app.add_subcommand("selftest", "Run the invariant checks and print a pass/fail table");
    selftest->add_option("--inject-fault", fault, "Corrupt the eigensolver input")
        ->check(CLI::IsMember({"none", "system-sign"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            const auto config = load_with_overrides(config_path, seed);
            const auto sim = exactq::simulate(config);
            const auto dir = exactq::resolve_output_dir(opt(out_dir), config.output_dir);
            for (const auto& path : exactq::write_simulation(sim, dir)) std::cout << path.string() << '\n';
            std::cout << "p_eq " << exactq::format_double(sim.p_eq) << '\n';
        } else if (sweep->parsed()) {
            const auto config = load_with_overrides(config_path, seed);
            const auto rows = exactq::run_sweep(config, axis, values, jobs);
            const auto dir = exactq::resolve_output_dir(opt(out_dir), config.output_dir);
            exactq::ensure_directory(dir);
            exactq::write_file_atomic(dir / "sweep.csv", exactq::sweep_csv(axis, rows));
            std::cout << (dir / "sweep.csv").string() << '\n';
        } else if (subspace->parsed()) {
            exactq::CouplingMatrix G;
            std::optional<std::string> config_dir;
            std::size_t chosen_sigma = 1;
            if (!config_path.empty()) {
                const auto config = exactq::load_config(config_path);
                if (n_bath && *n_bath != config.n_bath)
                    throw exactq::Error(exactq::ErrorKind::ConfigError, "'--n' disagrees with the configured N");
                G = exactq::make_coupling_matrix(config, exactq::make_bath(config));
                config_dir = config.output_dir;
                chosen_sigma = config.sigma;
            } else if (!matrix_path.empty()) {
                if (!n_bath) throw exactq::Error(exactq::ErrorKind::ConfigError, "'--n' is required with --matrix");
                G = exactq::parse_coupling_matrix_csv(exactq::read_file(matrix_path), *n_bath);
            } else {
                throw exactq::Error(exactq::ErrorKind::ConfigError, "subspace needs --config or --matrix");
            }
            if (sigma) chosen_sigma = *sigma;
            const auto dir = exactq::resolve_output_dir(opt(out_dir), config_dir);
            exactq::write_subspace(exactq::export_subspace(G, chosen_sigma, cap), dir);
            for (const char* name : {"basis.csv", "hamiltonian.csv", "edges.csv"}) std::cout << (dir / name).string() << '\n';
        } else if (selftest->parsed()) {
            const auto checks = exactq::run_selftest(fault == "system-sign" ? exactq::SelftestFault::SystemSign
                                                                            : exactq::SelftestFault::None);
            std::cout << exactq::selftest_table(checks);
            for (const auto& c : checks)
                if (!c.pass) return 1;
        }
    } catch (const exactq::Error& e) {
        std::cerr << "exactq: " << e.what() << '\n';
        return exactq::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "exactq: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
