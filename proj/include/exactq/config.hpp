// config.hpp: Run configuration: flat "key = value" files with '#' comments
//
// Every key is optional; parse_config fills defaults and validate_config checks
// the physical preconditions with messages naming the offending key. The
// resolved configuration is echoed back by config_entries so that outputs record
// every value actually used.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exactq/errors.hpp"
#include "exactq/model.hpp"
#include "exactq/state.hpp"

namespace exactq {

struct TimeWindow {
    double t_start{0.0};
    double t_end{0.0};
    std::size_t samples{0};
};

struct RunConfig {
    // model
    double eta{0.001};
    double s{1.0};
    double omega_c{1.0};
    double omega0{1.0};
    // grid
    std::size_t n_bath{1000};
    double omega_min{0.05};
    double omega_max{5.0};
    std::string grid{"uniform"};          // uniform | jittered | explicit
    std::string grid_layout{"inclusive"};  // inclusive | right_edge
    double jitter_floor{0.1};
    std::uint64_t seed{0};
    std::vector<double> frequencies;  // explicit grid only
    // couplings
    std::string couplings{"spectral"};  // spectral | constant
    double g_s{0.1};
    std::vector<double> phases;  // empty: all zero
    // initial condition
    cplx alpha{0.0, 0.0};
    cplx beta{1.0, 0.0};
    // bath-bath
    std::string bath_bath{"none"};  // none | constant | spectral
    cplx g_e{0.0, 0.0};
    double bath_eta{0.0};
    double bath_s{1.0};
    // time grid; no windows means the default [0, 20 / J0] with 4001 samples
    std::vector<TimeWindow> windows;
    // Markov reference
    std::optional<double> markov_rate;    // nullopt: derived from the model
    std::optional<double> omega0_prime;   // nullopt: omega0
    double departure_threshold{0.02};
    std::size_t departure_persistence{3};
    std::size_t moments{6};
    // subspace export
    std::size_t sigma{1};
    // outputs
    std::optional<std::string> output_dir;
    std::vector<std::string> outputs{"series", "distribution", "summary"};

    bool wants(std::string_view name) const {
        return std::find(outputs.begin(), outputs.end(), name) != outputs.end();
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

inline Error config_error(const std::string& key, const std::string& msg) {
    return Error(ErrorKind::ConfigError, "'" + key + "': " + msg);
}

inline double parse_double(const std::string& key, const std::string& text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw config_error(key, "expected a finite number, got '" + text + "'");
    return value;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw config_error(key, "expected a non-negative integer, got '" + text + "'");
    return value;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
    return out;
}

inline std::string parse_choice(const std::string& key, const std::string& text,
                                std::initializer_list<std::string_view> allowed) {
    for (auto a : allowed)
        if (text == a) return text;
    std::string list;
    for (auto a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
    throw config_error(key, "expected one of " + list + ", got '" + text + "'");
}

inline std::vector<TimeWindow> parse_windows(const std::string& key, const std::string& text) {
    std::vector<TimeWindow> out;
    for (const auto& item : split(text, ';')) {
        const auto fields = split(item, ':');
        if (fields.size() != 3) throw config_error(key, "each window is t_start:t_end:samples, got '" + item + "'");
        out.push_back({parse_double(key, fields[0]), parse_double(key, fields[1]),
                       static_cast<std::size_t>(parse_uint(key, fields[2]))});
    }
    return out;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "eta", "s", "omega_c", "omega0", "N", "omega_min", "omega_max", "grid", "grid_layout", "jitter_floor",
        "seed", "frequencies", "couplings", "g_s", "phases", "alpha_re", "alpha_im", "beta_re", "beta_im",
        "bath_bath", "g_e", "g_e_im", "bath_eta", "bath_s", "t_start", "t_end", "samples", "time_windows",
        "markov_rate", "omega0_prime", "departure_threshold", "departure_persistence", "moments", "sigma",
        "output_dir", "outputs"};
    return keys;
}

inline void validate_config(const RunConfig& c) {
    auto check = [](bool ok, const std::string& key, const std::string& msg) {
        if (!ok) throw detail::config_error(key, msg);
    };
    check(c.eta >= 0.0, "eta", "must be >= 0");
    check(c.s > 0.0, "s", "must be > 0");
    check(c.omega_c > 0.0, "omega_c", "must be > 0");
    check(c.omega0 > 0.0, "omega0", "must be > 0");
    check(c.omega_min > 0.0, "omega_min", "must be > 0");
    check(c.omega_max > c.omega_min, "omega_max", "must exceed omega_min");
    if (c.grid == "explicit") {
        check(!c.frequencies.empty(), "frequencies", "explicit grid needs a frequency list");
        check(c.frequencies.size() == c.n_bath, "N", "must equal the number of explicit frequencies");
        for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
            check(c.frequencies[i] >= c.omega_min && c.frequencies[i] <= c.omega_max, "frequencies",
                  "entry " + std::to_string(i + 1) + " lies outside [omega_min, omega_max]");
            check(i == 0 || c.frequencies[i] > c.frequencies[i - 1], "frequencies", "must be strictly increasing");
        }
    } else {
        check(c.frequencies.empty(), "frequencies", "only used with grid = explicit");
    }
    check(c.n_bath >= 1, "N", "must be >= 1");
    check(c.jitter_floor > 0.0 && c.jitter_floor <= 1.0, "jitter_floor", "must lie in (0, 1]");
    check(c.phases.empty() || c.phases.size() == c.n_bath, "phases", "needs one angle per bath oscillator");
    check(c.g_s >= 0.0, "g_s", "must be >= 0");
    const double norm = std::norm(c.alpha) + std::norm(c.beta);
    check(std::abs(norm - 1.0) <= 1e-12, "beta_re",
          "|alpha|^2 + |beta|^2 must be 1 (got " + std::to_string(norm) + ")");
    check(c.bath_eta >= 0.0, "bath_eta", "must be >= 0");
    check(c.bath_s > 0.0, "bath_s", "must be > 0");
    for (const auto& w : c.windows) {
        check(w.samples >= 2, "samples", "each time window needs at least 2 samples");
        check(w.t_end > w.t_start, "t_end", "must exceed t_start");
    }
    for (std::size_t k = 1; k < c.windows.size(); ++k)
        check(c.windows[k].t_start > c.windows[k - 1].t_end, "time_windows", "windows must be increasing and disjoint");
    if (c.markov_rate) check(*c.markov_rate >= 0.0, "markov_rate", "must be >= 0");
    check(c.departure_threshold > 0.0, "departure_threshold", "must be > 0");
    check(c.departure_persistence >= 1, "departure_persistence", "must be >= 1");
    check(c.moments >= 1 && c.moments <= 30, "moments", "must lie in 1..30");
    check(c.sigma <= c.n_bath + 1, "sigma", "must lie in 0..N+1");
    for (const auto& o : c.outputs)
        check(o == "series" || o == "distribution" || o == "summary" || o == "hamiltonian" || o == "edges", "outputs",
              "unknown output '" + o + "'");
}

/// Applies one key to a configuration; throws ConfigError for unknown keys or bad values.
inline void apply_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    auto num = [&] { return parse_double(key, value); };
    auto count = [&] { return static_cast<std::size_t>(parse_uint(key, value)); };
    if (key == "eta") c.eta = num();
    else if (key == "s") c.s = num();
    else if (key == "omega_c") c.omega_c = num();
    else if (key == "omega0") c.omega0 = num();
    else if (key == "N") c.n_bath = count();
    else if (key == "omega_min") c.omega_min = num();
    else if (key == "omega_max") c.omega_max = num();
    else if (key == "grid") c.grid = parse_choice(key, value, {"uniform", "jittered", "explicit"});
    else if (key == "grid_layout") c.grid_layout = parse_choice(key, value, {"inclusive", "right_edge"});
    else if (key == "jitter_floor") c.jitter_floor = num();
    else if (key == "seed") c.seed = parse_uint(key, value);
    else if (key == "frequencies") c.frequencies = parse_list(key, value);
    else if (key == "couplings") c.couplings = parse_choice(key, value, {"spectral", "constant"});
    else if (key == "g_s") c.g_s = num();
    else if (key == "phases") c.phases = parse_list(key, value);
    else if (key == "alpha_re") c.alpha.real(num());
    else if (key == "alpha_im") c.alpha.imag(num());
    else if (key == "beta_re") c.beta.real(num());
    else if (key == "beta_im") c.beta.imag(num());
    else if (key == "bath_bath") c.bath_bath = parse_choice(key, value, {"none", "constant", "spectral"});
    else if (key == "g_e") c.g_e.real(num());
    else if (key == "g_e_im") c.g_e.imag(num());
    else if (key == "bath_eta") c.bath_eta = num();
    else if (key == "bath_s") c.bath_s = num();
    else if (key == "t_start" || key == "t_end" || key == "samples") {
        if (c.windows.size() > 1) throw config_error(key, "cannot be combined with time_windows");
        if (c.windows.empty()) c.windows.push_back({0.0, 0.0, 4001});
        if (key == "t_start") c.windows[0].t_start = num();
        else if (key == "t_end") c.windows[0].t_end = num();
        else c.windows[0].samples = count();
    } else if (key == "time_windows") c.windows = parse_windows(key, value);
    else if (key == "markov_rate") c.markov_rate = (value == "auto") ? std::nullopt : std::optional<double>(num());
    else if (key == "omega0_prime") c.omega0_prime = (value == "auto") ? std::nullopt : std::optional<double>(num());
    else if (key == "departure_threshold") c.departure_threshold = num();
    else if (key == "departure_persistence") c.departure_persistence = count();
    else if (key == "moments") c.moments = count();
    else if (key == "sigma") c.sigma = count();
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "outputs") {
        c.outputs.clear();
        for (const auto& o : split(value, ','))
            if (!o.empty()) c.outputs.push_back(o);
    } else throw config_error(key, "unknown key");
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (!seen.insert(key).second)
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        try {
            apply_config_value(c, key, value);
        } catch (const Error& e) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": " +
                                                    std::string(e.what()).substr(std::string("ConfigError: ").size()));
        }
    }
    if (c.grid == "explicit" && !seen.count("N")) c.n_bath = c.frequencies.size();
    validate_config(c);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// --------------------------- Derived quantities --------------------------------

inline SpectralModel spectral_model(const RunConfig& c) { return {c.eta, c.s, c.omega_c}; }

inline InitialCondition initial_condition(const RunConfig& c) { return {c.alpha, c.beta}; }

inline BathGrid make_bath(const RunConfig& c) {
    std::vector<double> freqs;
    if (c.grid == "explicit") {
        freqs = c.frequencies;
    } else if (c.grid == "jittered") {
        freqs = sample_frequencies(c.n_bath, c.omega_min, c.omega_max, JitteredSampling{c.jitter_floor, c.seed});
    } else {
        const auto layout = c.grid_layout == "right_edge" ? GridLayout::RightEdge : GridLayout::Inclusive;
        freqs = sample_frequencies(c.n_bath, c.omega_min, c.omega_max, UniformSampling{layout});
    }
    const auto widths = cell_widths(freqs, c.omega_min, c.omega_max);
    std::vector<cplx> g;
    if (c.couplings == "constant") {
        for (std::size_t i = 0; i < freqs.size(); ++i)
            g.push_back(c.phases.empty() ? cplx(c.g_s, 0.0) : std::polar(c.g_s, c.phases[i]));
    } else {
        g = build_couplings(spectral_model(c), freqs, widths, c.phases);
    }
    BathGrid bath = make_bath_grid(c.omega0, std::move(freqs), c.omega_min, c.omega_max, std::move(g));
    if (c.grid == "jittered") bath.seed = c.seed;
    return bath;
}

inline CouplingMatrix make_coupling_matrix(const RunConfig& c, const BathGrid& bath) {
    if (c.bath_bath == "constant") return build_coupling_matrix(bath, ConstantBathBath{c.g_e});
    if (c.bath_bath == "spectral")
        return build_coupling_matrix(bath, SpectralBathBath{std::vector<double>(bath.size(), c.bath_eta), c.bath_s, {}});
    return build_coupling_matrix(bath);
}

/// Markov decay rate: J(w0) for spectral couplings; for constant couplings the golden-rule
/// rate 2 pi g_s^2 / eps, with eps the width of the cell nearest w0.
inline double resolved_markov_rate(const RunConfig& c, const BathGrid& bath) {
    if (c.markov_rate) return *c.markov_rate;
    if (c.couplings == "spectral") return markov_decay_rate(spectral_model(c), c.omega0);
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < bath.size(); ++i)
        if (std::abs(bath.freqs[i] - c.omega0) < std::abs(bath.freqs[nearest] - c.omega0)) nearest = i;
    return 2.0 * std::numbers::pi * c.g_s * c.g_s / bath.widths[nearest];
}

/// Time windows actually sampled: the configured ones, or [0, 20 / J0] with 4001 points.
inline std::vector<TimeWindow> resolved_windows(const RunConfig& c, double markov_rate) {
    if (!c.windows.empty()) {
        for (const auto& w : c.windows)
            if (!(w.t_end > w.t_start))
                throw detail::config_error("t_end", "must exceed t_start");
        return c.windows;
    }
    if (!(markov_rate > 0.0))
        throw detail::config_error("t_end", "no default time grid when the Markov rate is 0; set t_end");
    return {{0.0, 20.0 / markov_rate, 4001}};
}

inline std::vector<double> sample_times(const std::vector<TimeWindow>& windows) {
    std::vector<double> t;
    for (const auto& w : windows) {
        const double dt = (w.t_end - w.t_start) / static_cast<double>(w.samples - 1);
        for (std::size_t k = 0; k < w.samples; ++k)
            t.push_back(k + 1 == w.samples ? w.t_end : w.t_start + static_cast<double>(k) * dt);
    }
    return t;
}

}  // namespace exactq
