#pragma once

// Run configuration shared by the CLI subcommands, with a flat key = value
// config-file format (# comments) and symbolic angle parsing ("pi/4",
// "-3pi/4", plain radians). CLI flags override file values.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "macrobell/asymptotic.hpp"
#include "macrobell/csv.hpp"
#include "macrobell/errors.hpp"
#include "macrobell/numerics.hpp"

namespace macrobell {

struct RunConfig {
    double r0 = 1.1;
    std::vector<double> alphas{};
    double theta = 0.0;
    double phi = -pi / 4.0;
    double theta_prime = pi / 2.0;
    double phi_prime = -3.0 * pi / 4.0;
    std::vector<int> n0_list{0};
    int k_points = 64;
    double sigma_factor = 8.0;
    double epsilon = 0.01;
    std::string output_dir = ".";
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::size_t samples = 100000;
    double grid_half_width = 8.0;
    double grid_step = 0.02;
    bool classical_mixture = false;

    bool operator==(const RunConfig&) const = default;

    AngleSet angle_set() const { return {theta, phi, theta_prime, phi_prime}; }
    GridSpec grid() const { return {grid_half_width, grid_step}; }
    FockCutoff fock_cutoff() const { return FockCutoff{sigma_factor, 15, 0}; }
};

namespace detail {

inline std::string strip_spaces(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError("trailing characters in number: '" + s + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'");
    }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

/// Accepts plain radians ("0.785"), multiples of pi ("pi", "-pi", "2pi",
/// "0.5pi") and fractions ("pi/4", "-3pi/4").
inline double parse_angle(const std::string& text) {
    const std::string s = detail::strip_spaces(text);
    if (s.empty()) throw ConfigError("empty angle");
    const std::size_t p = s.find("pi");
    if (p == std::string::npos) return detail::parse_double(s);
    const std::string prefix = s.substr(0, p);
    const std::string suffix = s.substr(p + 2);
    double coef = 1.0;
    if (prefix == "-") {
        coef = -1.0;
    } else if (prefix == "+" || prefix.empty()) {
        coef = 1.0;
    } else {
        coef = detail::parse_double(prefix);
    }
    double denom = 1.0;
    if (!suffix.empty()) {
        if (suffix[0] != '/') throw ConfigError("bad angle syntax: '" + text + "'");
        denom = detail::parse_double(suffix.substr(1));
        if (denom == 0.0) throw ConfigError("zero denominator in angle: '" + text + "'");
    }
    return coef * pi / denom;
}

/// Parses "th,ph,th',ph'" into the four measurement angles.
inline void parse_angle_list(const std::string& text, RunConfig& cfg) {
    const auto parts = detail::split(text, ',');
    if (parts.size() != 4) throw ConfigError("angles need exactly four comma-separated values");
    cfg.theta = parse_angle(parts[0]);
    cfg.phi = parse_angle(parts[1]);
    cfg.theta_prime = parse_angle(parts[2]);
    cfg.phi_prime = parse_angle(parts[3]);
}

inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto as_int = [&](const std::string& s) {
        const double v = detail::parse_double(s);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v) throw ConfigError(key + " must be an integer");
        return i;
    };
    if (key == "r0") {
        cfg.r0 = detail::parse_double(value);
    } else if (key == "alphas") {
        cfg.alphas.clear();
        if (!detail::strip_spaces(value).empty()) {
            for (const auto& part : detail::split(value, ',')) {
                cfg.alphas.push_back(detail::parse_double(detail::trim(part)));
            }
        }
    } else if (key == "angles") {
        parse_angle_list(detail::strip_spaces(value), cfg);
    } else if (key == "n0") {
        cfg.n0_list.clear();
        if (!detail::strip_spaces(value).empty()) {
            for (const auto& part : detail::split(value, ',')) {
                cfg.n0_list.push_back(as_int(detail::trim(part)));
            }
        }
    } else if (key == "k_points") {
        cfg.k_points = as_int(value);
    } else if (key == "sigma_factor") {
        cfg.sigma_factor = detail::parse_double(value);
    } else if (key == "epsilon") {
        cfg.epsilon = detail::parse_double(value);
    } else if (key == "out") {
        cfg.output_dir = value;
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::parse_double(value));
    } else if (key == "workers") {
        cfg.workers = static_cast<unsigned>(as_int(value));
    } else if (key == "samples") {
        cfg.samples = static_cast<std::size_t>(detail::parse_double(value));
    } else if (key == "grid_half_width") {
        cfg.grid_half_width = detail::parse_double(value);
    } else if (key == "grid_step") {
        cfg.grid_step = detail::parse_double(value);
    } else if (key == "classical_mixture") {
        const std::string v = detail::strip_spaces(value);
        if (v == "true" || v == "1") {
            cfg.classical_mixture = true;
        } else if (v == "false" || v == "0") {
            cfg.classical_mixture = false;
        } else {
            throw ConfigError("classical_mixture must be true/false");
        }
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

inline RunConfig parse_config_text(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
        }
        apply_config_key(base, detail::trim(line.substr(0, eq)),
                         detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline RunConfig parse_config_file(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), base);
}

inline std::string serialize(const RunConfig& cfg) {
    std::ostringstream os;
    const auto join_doubles = [](const std::vector<double>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += csv::fmt_compact(v[i]);
        }
        return out;
    };
    os << "r0 = " << csv::fmt_compact(cfg.r0) << '\n';
    os << "alphas = " << join_doubles(cfg.alphas) << '\n';
    os << "angles = " << csv::fmt_compact(cfg.theta) << ',' << csv::fmt_compact(cfg.phi) << ','
       << csv::fmt_compact(cfg.theta_prime) << ',' << csv::fmt_compact(cfg.phi_prime) << '\n';
    os << "n0 = ";
    for (std::size_t i = 0; i < cfg.n0_list.size(); ++i) {
        if (i) os << ',';
        os << cfg.n0_list[i];
    }
    os << '\n';
    os << "k_points = " << cfg.k_points << '\n';
    os << "sigma_factor = " << csv::fmt_compact(cfg.sigma_factor) << '\n';
    os << "epsilon = " << csv::fmt_compact(cfg.epsilon) << '\n';
    os << "out = " << cfg.output_dir << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "workers = " << cfg.workers << '\n';
    os << "samples = " << cfg.samples << '\n';
    os << "grid_half_width = " << csv::fmt_compact(cfg.grid_half_width) << '\n';
    os << "grid_step = " << csv::fmt_compact(cfg.grid_step) << '\n';
    os << "classical_mixture = " << (cfg.classical_mixture ? "true" : "false") << '\n';
    return os.str();
}

} // namespace macrobell
