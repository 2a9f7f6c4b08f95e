// macrobell: command-line front end for the macroscopic Bell-test simulator.
//
// Subcommands
//   scan-alpha   CHSH E versus drive amplitude, CSV per (alpha, N0)
//   asymptotic   homodyne-limit CHSH, dead zone solved for epsilon, outcome
//                probabilities per party
//   lhv          hidden-variable assignment table and seeded mixture extremes
//   convergence  total-variation distance of rescaled P(m,n) to the limit
//   pmn          dump one joint distribution P(m,n) with marginals
//
// Exit codes: 0 success, 2 config error, 3 numerical non-convergence or
// truncation failure.

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macrobell/asymptotic.hpp"
#include "macrobell/binning.hpp"
#include "macrobell/cat_state.hpp"
#include "macrobell/config.hpp"
#include "macrobell/csv.hpp"
#include "macrobell/joint_distribution.hpp"
#include "macrobell/lhv.hpp"
#include "macrobell/scan.hpp"

namespace mb = macrobell;
namespace fs = std::filesystem;

namespace {

struct CliState {
    mb::RunConfig cfg;
    std::string config_path;
    std::vector<std::string> alpha_args;
    std::string angles_arg;
    std::vector<int> n0_args;
    bool self_test = false;
};

void add_common_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "config file (key = value lines)");
    cmd->add_option("--alpha", st.alpha_args, "drive amplitude alpha = beta (repeatable)");
    cmd->add_option("--angles", st.angles_arg,
                    "theta,phi,theta',phi' (radians; pi expressions allowed)");
    cmd->add_option("--n0", st.n0_args, "bin threshold N0 (repeatable)");
    cmd->add_option("--r0", st.cfg.r0, "cat radius r0");
    cmd->add_option("--k-points", st.cfg.k_points, "quadrature nodes over [0,2pi)");
    cmd->add_option("--sigma-factor", st.cfg.sigma_factor, "Fock cutoff sigma factor");
    cmd->add_option("--epsilon", st.cfg.epsilon, "dead-zone target probability");
    cmd->add_option("--out", st.cfg.output_dir, "output directory");
    cmd->add_option("--seed", st.cfg.seed, "RNG seed for mixture sampling");
    cmd->add_option("--workers", st.cfg.workers, "worker threads (0 = auto)");
    cmd->add_option("--samples", st.cfg.samples, "mixture samples");
    cmd->add_option("--grid-half-width", st.cfg.grid_half_width, "quadrature grid half width");
    cmd->add_option("--grid-step", st.cfg.grid_step, "quadrature grid step");
    cmd->add_flag("--classical-mixture", st.cfg.classical_mixture,
                  "diagnostic mode: square branch amplitudes before summing");
}

/// File values load over the defaults, then explicitly passed flags win.
mb::RunConfig resolve_config(const CliState& st, const CLI::App* cmd) {
    mb::RunConfig cfg;
    if (!st.config_path.empty()) cfg = mb::parse_config_file(st.config_path, cfg);

    if (cmd->count("--r0")) cfg.r0 = st.cfg.r0;
    if (cmd->count("--k-points")) cfg.k_points = st.cfg.k_points;
    if (cmd->count("--sigma-factor")) cfg.sigma_factor = st.cfg.sigma_factor;
    if (cmd->count("--epsilon")) cfg.epsilon = st.cfg.epsilon;
    if (cmd->count("--out")) cfg.output_dir = st.cfg.output_dir;
    if (cmd->count("--seed")) cfg.seed = st.cfg.seed;
    if (cmd->count("--workers")) cfg.workers = st.cfg.workers;
    if (cmd->count("--samples")) cfg.samples = st.cfg.samples;
    if (cmd->count("--grid-half-width")) cfg.grid_half_width = st.cfg.grid_half_width;
    if (cmd->count("--grid-step")) cfg.grid_step = st.cfg.grid_step;
    if (cmd->count("--classical-mixture")) cfg.classical_mixture = st.cfg.classical_mixture;
    if (cmd->count("--alpha")) {
        cfg.alphas.clear();
        for (const auto& a : st.alpha_args) {
            cfg.alphas.push_back(mb::detail::parse_double(a));
        }
    }
    if (cmd->count("--n0")) cfg.n0_list = st.n0_args;
    if (cmd->count("--angles")) mb::parse_angle_list(st.angles_arg, cfg);
    if (cfg.r0 < 0.0) throw mb::ConfigError("r0 must be nonnegative");
    for (double a : cfg.alphas) {
        if (a < 0.0) throw mb::ConfigError("alpha must be nonnegative");
    }
    for (int n0 : cfg.n0_list) {
        if (n0 < 0) throw mb::ConfigError("N0 must be nonnegative");
    }
    return cfg;
}

std::ofstream open_output(const mb::RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / name;
    std::ofstream out(path);
    if (!out) throw mb::ConfigError("cannot write " + path.string());
    return out;
}

void dump_config(const mb::RunConfig& cfg) {
    auto out = open_output(cfg, "config_used.txt");
    out << mb::serialize(cfg);
}

int run_scan_alpha(const mb::RunConfig& cfg) {
    dump_config(cfg);
    const mb::ScanOutput scan = mb::scan_alpha(cfg);
    {
        auto out = open_output(cfg, "scan.csv");
        mb::write_scan_csv(scan, out);
    }
    for (const auto& row : scan.rows) {
        std::cout << "alpha=" << row.alpha << " n0=" << row.n0 << " e=" << row.e_value
                  << " status=" << row.status << "\n";
    }
    if (scan.any_failed) {
        std::cerr << "scan-alpha: some points failed a numeric gate (see status column)\n";
        return 3;
    }
    return 0;
}

int run_pmn(const mb::RunConfig& cfg) {
    if (cfg.alphas.empty()) throw mb::ConfigError("pmn needs at least one --alpha");
    dump_config(cfg);
    const double alpha = cfg.alphas.front();
    const mb::CatStateSpec spec = mb::CatStateSpec::uniform(cfg.r0, cfg.k_points);
    const mb::JointOptions opts{cfg.classical_mixture, cfg.workers};
    const mb::JointNumberDistribution dist = mb::joint_pmn(
        spec, mb::NetworkConfig(alpha, alpha, cfg.theta, cfg.phi), cfg.fock_cutoff(), opts);
    {
        auto out = open_output(cfg, "pmn.csv");
        mb::write_csv(dist, out);
    }
    for (auto party : {mb::Party::a, mb::Party::b}) {
        auto out = open_output(cfg, party == mb::Party::a ? "pmn_marginal_a.csv"
                                                          : "pmn_marginal_b.csv");
        out << (party == mb::Party::a ? "m,p\n" : "n,p\n");
        for (const auto& [value, p] : mb::party_marginal(dist, party)) {
            out << value << ',' << mb::csv::fmt(p) << '\n';
        }
    }
    std::cout << "pmn: alpha=" << alpha << " sum=" << dist.sum()
              << " declared_loss=" << dist.truncation_loss() << "\n";
    return 0;
}

int run_lhv(const mb::RunConfig& cfg) {
    dump_config(cfg);
    {
        auto out = open_output(cfg, "lhv_assignments.csv");
        mb::write_assignment_csv(out);
    }
    std::cout << "lhv: 16 assignments written, bound [-2, 2]\n";
    if (cfg.samples > 0) {
        const mb::MixtureExtremes ext = mb::mixture_bound(cfg.samples, cfg.seed);
        auto out = open_output(cfg, "lhv_mixtures.csv");
        out << "samples,seed,min,max\n";
        out << cfg.samples << ',' << cfg.seed << ',' << mb::csv::fmt(ext.min_value) << ','
            << mb::csv::fmt(ext.max_value) << '\n';
        std::cout << "lhv: " << cfg.samples << " mixtures (seed " << cfg.seed << ") in ["
                  << ext.min_value << ", " << ext.max_value << "]\n";
    }
    return 0;
}

int run_asymptotic(const mb::RunConfig& cfg) {
    dump_config(cfg);
    const mb::CatStateSpec spec = mb::CatStateSpec::uniform(cfg.r0, cfg.k_points);
    const mb::AngleSet ang = cfg.angle_set();
    const mb::GridSpec grid = cfg.grid();

    const mb::ChshResult sign_binned =
        mb::asymptotic_chsh(spec, ang, mb::DeadZone{0.0, 0.0}, grid, cfg.workers);
    {
        auto out = open_output(cfg, "asymptotic.csv");
        mb::write_csv(sign_binned, out);
    }

    const mb::QuadratureDensity density_bb =
        mb::quadrature_joint_density(spec, ang.theta, ang.phi, grid, cfg.workers);
    const mb::DeadZone dz = mb::solve_delta0(density_bb, cfg.epsilon);
    const mb::ChshResult dz_binned = mb::asymptotic_chsh(spec, ang, dz, grid, cfg.workers);
    {
        auto out = open_output(cfg, "asymptotic_deadzone.csv");
        mb::write_csv(dz_binned, out);
    }

    const mb::BinnedStatistics stats = mb::bin_density(density_bb, dz.delta0);
    {
        auto out = open_output(cfg, "inset.csv");
        out << "party,outcome,p\n";
        const auto pa = stats.outcome_probs_a();
        const auto pb = stats.outcome_probs_b();
        for (int i = 0; i < 3; ++i) out << "a," << (i - 1) << ',' << mb::csv::fmt(pa[i]) << '\n';
        for (int i = 0; i < 3; ++i) out << "b," << (i - 1) << ',' << mb::csv::fmt(pb[i]) << '\n';
    }
    {
        auto out = open_output(cfg, "deadzone.csv");
        out << "epsilon,delta0,p_zero,n0,required_alpha\n";
        for (int n0 : cfg.n0_list) {
            out << mb::csv::fmt_compact(cfg.epsilon) << ',' << mb::csv::fmt_compact(dz.delta0)
                << ',' << mb::csv::fmt(stats.p_zero_a) << ',' << n0 << ',';
            if (n0 == 0) {
                out << mb::csv::fmt(0.0);
            } else if (dz.delta0 <= 0.0) {
                out << "inf";
            } else {
                out << mb::csv::fmt(mb::required_alpha(mb::BinThreshold{n0}, dz));
            }
            out << '\n';
        }
    }
    {
        auto out = open_output(cfg, "asymptote_marginal_x.csv");
        mb::write_marginal_csv(density_bb.axis(), density_bb.marginal_x(), out);
    }
    std::cout << "asymptotic: e=" << sign_binned.e_value << " (sign binned), e="
              << dz_binned.e_value << " at delta0=" << dz.delta0 << " for epsilon=" << cfg.epsilon
              << ", P(0)=" << stats.p_zero_a << "\n";
    return 0;
}

int run_convergence(const mb::RunConfig& cfg, bool self_test) {
    dump_config(cfg);
    const mb::CatStateSpec spec = mb::CatStateSpec::uniform(cfg.r0, cfg.k_points);
    const mb::GridSpec grid = cfg.grid();
    const mb::QuadratureDensity density =
        mb::quadrature_joint_density(spec, cfg.theta, cfg.phi, grid, cfg.workers);
    {
        auto out = open_output(cfg, "asymptote_density.csv");
        mb::write_density_csv(density, out);
    }

    auto out = open_output(cfg, "convergence.csv");
    out << "alpha,tv_distance,status\n";

    if (self_test) {
        const double alpha = cfg.alphas.empty() ? 2.0 : cfg.alphas.front();
        const int span = static_cast<int>(std::ceil(alpha * grid.half_width)) + 1;
        const mb::JointNumberDistribution cells =
            mb::density_cells_as_distribution(density, alpha, alpha, span, span);
        const double tv = mb::convergence_to_asymptote(cells, density);
        out << mb::csv::fmt_compact(alpha) << ',' << mb::csv::fmt(tv) << ",self-test\n";
        std::cout << "convergence self-test: tv=" << tv << "\n";
        return 0;
    }

    if (cfg.alphas.empty()) throw mb::ConfigError("convergence needs at least one --alpha");
    bool any_failed = false;
    for (double alpha : cfg.alphas) {
        try {
            const mb::JointNumberDistribution dist = mb::joint_pmn(
                spec, mb::NetworkConfig(alpha, alpha, cfg.theta, cfg.phi), cfg.fock_cutoff(),
                mb::JointOptions{cfg.classical_mixture, cfg.workers});
            const double tv = mb::convergence_to_asymptote(dist, density);
            out << mb::csv::fmt_compact(alpha) << ',' << mb::csv::fmt(tv) << ",ok\n";
            auto resc = open_output(cfg, "rescaled_alpha_" + mb::csv::fmt_compact(alpha) + ".csv");
            mb::write_rescaled_csv(dist, resc);
            std::cout << "alpha=" << alpha << " tv=" << tv << "\n";
        } catch (const mb::NonConvergence&) {
            out << mb::csv::fmt_compact(alpha) << ",nan,non-convergence\n";
            any_failed = true;
        } catch (const mb::TruncationTooLossy&) {
            out << mb::csv::fmt_compact(alpha) << ",nan,truncation-too-lossy\n";
            any_failed = true;
        }
    }
    if (any_failed) {
        std::cerr << "convergence: some points failed a numeric gate\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"macroscopic Bell-test simulator"};
    app.require_subcommand(1);

    std::array<CliState, 5> states;
    std::array<CLI::App*, 5> cmds{};
    const std::array<std::string, 5> names{"scan-alpha", "asymptotic", "lhv", "convergence",
                                           "pmn"};
    const std::array<std::string, 5> descs{
        "CHSH E versus drive amplitude",
        "homodyne-limit CHSH, dead zone, outcome probabilities",
        "hidden-variable assignment table and mixture extremes",
        "rescaled P(m,n) distance to the homodyne limit",
        "dump one joint distribution P(m,n)"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        cmds[i] = app.add_subcommand(names[i], descs[i]);
        add_common_flags(cmds[i], states[i]);
    }
    cmds[3]->add_flag("--self-test", states[3].self_test,
                      "compare the discretized limit against itself");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!cmds[i]->parsed()) continue;
            const mb::RunConfig cfg = resolve_config(states[i], cmds[i]);
            switch (i) {
                case 0: return run_scan_alpha(cfg);
                case 1: return run_asymptotic(cfg);
                case 2: return run_lhv(cfg);
                case 3: return run_convergence(cfg, states[3].self_test);
                case 4: return run_pmn(cfg);
            }
        }
    } catch (const mb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mb::NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 3;
    } catch (const mb::TruncationTooLossy& e) {
        std::cerr << "truncation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
