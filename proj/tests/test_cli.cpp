#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "macrobell/cat_state.hpp"
#include "macrobell/joint_distribution.hpp"
#include "macrobell/numerics.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    fs::path dir;
};

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path p = fs::temp_directory_path()
                       / ("macrobell_test_" + tag + "_" + std::to_string(::getpid()) + "_"
                          + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunResult run_cli(const std::string& tag, const std::string& args) {
    RunResult r;
    r.dir = fresh_dir(tag);
    const std::string cmd = std::string(MACROBELL_CLI_PATH) + " " + args + " --out \""
                            + r.dir.string() + "\" > \"" + (r.dir / "stdout.txt").string()
                            + "\" 2> \"" + (r.dir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

TEST_CASE("lhv subcommand is deterministic") {
    const RunResult a = run_cli("lhv_a", "lhv --seed 11 --samples 20000");
    REQUIRE(a.exit_code == 0);
    const auto table = lines_of(a.dir / "lhv_assignments.csv");
    REQUIRE(table.size() == 17);
    CHECK(table[0] == "lambda_blue_a,lambda_green_a,lambda_blue_b,lambda_green_b,chsh");
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto cols = split_csv(table[i]);
        REQUIRE(cols.size() == 5);
        const int v = std::stoi(cols[4]);
        CHECK((v == 2 || v == -2));
    }
    const auto mix = lines_of(a.dir / "lhv_mixtures.csv");
    REQUIRE(mix.size() == 2);
    const auto cols = split_csv(mix[1]);
    CHECK(std::stod(cols[2]) >= -2.0 - 1e-12);
    CHECK(std::stod(cols[3]) <= 2.0 + 1e-12);

    const RunResult b = run_cli("lhv_b", "lhv --seed 11 --samples 20000");
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(a.dir / "lhv_mixtures.csv") == slurp(b.dir / "lhv_mixtures.csv"));
    CHECK(slurp(a.dir / "lhv_assignments.csv") == slurp(b.dir / "lhv_assignments.csv"));
}

TEST_CASE("lhv without samples omits the mixtures file") {
    const RunResult r = run_cli("lhv_zero", "lhv --samples 0");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(r.dir / "lhv_assignments.csv"));
    CHECK(!fs::exists(r.dir / "lhv_mixtures.csv"));
}

TEST_CASE("empty alpha list yields a header-only scan") {
    const RunResult r = run_cli("scan_empty", "scan-alpha");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(r.dir / "scan.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == "alpha,n0,e_bb,e_bg,e_gb,e_gg,e,p_zero_max,truncation_loss,status");
}

TEST_CASE("degenerate state scans to zero correlation") {
    const RunResult r = run_cli("scan_r0", "scan-alpha --r0 0 --alpha 2 --k-points 16");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(r.dir / "scan.csv");
    REQUIRE(rows.size() == 2);
    const auto cols = split_csv(rows[1]);
    CHECK(cols[0] == "2");
    CHECK(std::abs(std::stod(cols[6])) < 1e-8);
    CHECK(cols[9] == "ok");
}

TEST_CASE("scan output is identical across worker counts") {
    const std::string args = "scan-alpha --alpha 1.5 --n0 0 --n0 2 --k-points 32";
    const RunResult one = run_cli("scan_w1", args + " --workers 1");
    const RunResult three = run_cli("scan_w3", args + " --workers 3");
    REQUIRE(one.exit_code == 0);
    REQUIRE(three.exit_code == 0);
    const std::string a = slurp(one.dir / "scan.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(three.dir / "scan.csv"));
}

TEST_CASE("scan flags non-convergent points but flushes rows") {
    const RunResult r = run_cli("scan_bad", "scan-alpha --r0 3 --alpha 1 --k-points 16");
    CHECK(r.exit_code == 3);
    const auto rows = lines_of(r.dir / "scan.csv");
    REQUIRE(rows.size() == 2);
    const auto cols = split_csv(rows[1]);
    CHECK(cols[9] == "non-convergence");
    CHECK(cols[6] == "nan");
}

TEST_CASE("pmn dump matches a direct library evaluation") {
    const RunResult r = run_cli("pmn", "pmn --alpha 1.5 --k-points 32");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(r.dir / "pmn.csv");
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == "m,n,p");

    using namespace macrobell;
    const auto dist = joint_pmn(CatStateSpec::uniform(1.1, 32),
                                NetworkConfig(1.5, 1.5, 0.0, -pi / 4), FockCutoff{});
    REQUIRE(rows.size() == static_cast<std::size_t>(2 * dist.max_m() + 1)
                               * (2 * dist.max_n() + 1) + 1);
    NeumaierSum total;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cols = split_csv(rows[i]);
        REQUIRE(cols.size() == 3);
        const int m = std::stoi(cols[0]);
        const int n = std::stoi(cols[1]);
        const double p = std::stod(cols[2]);
        CHECK(p == dist.at(m, n)); // full-precision round trip, same algorithm
        total.add(p);
    }
    CHECK(total.value() > 1.0 - 1e-4);
    CHECK(fs::exists(r.dir / "pmn_marginal_a.csv"));
    CHECK(fs::exists(r.dir / "pmn_marginal_b.csv"));
}

TEST_CASE("asymptotic subcommand reports the violation and the dead zone") {
    const RunResult r =
        run_cli("asym", "asymptotic --grid-step 0.04 --k-points 64 --epsilon 0.02 --n0 5");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(r.dir / "asymptotic.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "setting,e");
    const auto chsh_row = split_csv(rows[5]);
    REQUIRE(chsh_row[0] == "chsh");
    const double e = std::stod(chsh_row[1]);
    CHECK(e > 2.0);
    CHECK(e < 2.1);

    const auto inset = lines_of(r.dir / "inset.csv");
    REQUIRE(inset.size() == 7);
    double p_zero_a = -1.0, p_plus = -1.0, p_minus = -1.0;
    for (std::size_t i = 1; i < inset.size(); ++i) {
        const auto cols = split_csv(inset[i]);
        if (cols[0] == "a" && cols[1] == "0") p_zero_a = std::stod(cols[2]);
        if (cols[0] == "a" && cols[1] == "1") p_plus = std::stod(cols[2]);
        if (cols[0] == "a" && cols[1] == "-1") p_minus = std::stod(cols[2]);
    }
    CHECK(p_zero_a > 0.0); // epsilon 0.02 admits one grid step of dead zone
    CHECK(p_zero_a <= 0.02 + 1e-12);
    CHECK(std::abs(p_plus - p_minus) < 1e-8);

    const auto dz = lines_of(r.dir / "deadzone.csv");
    REQUIRE(dz.size() == 2);
    CHECK(dz[0] == "epsilon,delta0,p_zero,n0,required_alpha");
    const auto dz_cols = split_csv(dz[1]);
    CHECK(std::stod(dz_cols[1]) == 0.04);
    CHECK(std::abs(std::stod(dz_cols[4]) - 5.0 / 0.04) < 1e-9);
}

TEST_CASE("convergence self test") {
    const RunResult r = run_cli("conv_self",
                                "convergence --self-test --alpha 2 --grid-step 0.04");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(r.dir / "convergence.csv");
    REQUIRE(rows.size() == 2);
    const auto cols = split_csv(rows[1]);
    CHECK(std::stod(cols[1]) < 1e-6);
    CHECK(cols[2] == "self-test");
}

TEST_CASE("convergence distances shrink with alpha") {
    const RunResult r = run_cli("conv", "convergence --alpha 2 --alpha 4 --grid-step 0.04");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(r.dir / "convergence.csv");
    REQUIRE(rows.size() == 3);
    const double tv2 = std::stod(split_csv(rows[1])[1]);
    const double tv4 = std::stod(split_csv(rows[2])[1]);
    CHECK(tv4 < tv2);
    CHECK(fs::exists(r.dir / "rescaled_alpha_2.csv"));
    CHECK(fs::exists(r.dir / "rescaled_alpha_4.csv"));
}

TEST_CASE("config file values load and flags override them") {
    const fs::path dir = fresh_dir("cfgfile");
    const fs::path cfg_path = dir / "run.cfg";
    {
        std::ofstream out(cfg_path);
        out << "r0 = 0\n"
            << "alphas = 1, 2\n"
            << "k_points = 16\n";
    }
    const RunResult r =
        run_cli("cfg_override", "scan-alpha --config \"" + cfg_path.string() + "\" --alpha 2");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(r.dir / "scan.csv");
    REQUIRE(rows.size() == 2); // flag replaced the two file alphas with one
    CHECK(split_csv(rows[1])[0] == "2");
    const std::string used = slurp(r.dir / "config_used.txt");
    CHECK(used.find("r0 = 0") != std::string::npos);
}

TEST_CASE("config errors exit with code 2") {
    CHECK(run_cli("bad_r0", "scan-alpha --r0 -1 --alpha 2").exit_code == 2);
    CHECK(run_cli("bad_sub", "pmn").exit_code == 2); // pmn requires an alpha
    const fs::path dir = fresh_dir("badcfg");
    {
        std::ofstream out(dir / "bad.cfg");
        out << "unknown_key = 1\n";
    }
    CHECK(run_cli("bad_key", "lhv --config \"" + (dir / "bad.cfg").string() + "\"").exit_code
          == 2);
}
