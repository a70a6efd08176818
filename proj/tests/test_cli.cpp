#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "nrqb/io.hpp"

using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

#ifndef NRQB_BIN_PATH
#define NRQB_BIN_PATH ""
#endif

namespace {

std::string binary_path() {
    std::string p = NRQB_BIN_PATH;
    if (p.empty())
        if (const char* env = std::getenv("NRQB_BIN")) p = env;
    REQUIRE(!p.empty());
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = "cli_tmp";
    fs::create_directories(dir);
    const std::string out = (dir / ("out" + std::to_string(counter))).string();
    const std::string err = (dir / ("err" + std::to_string(counter))).string();
    ++counter;
    const std::string cmd =
        "\"" + binary_path() + "\" " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) out.push_back(line);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string f;
    while (std::getline(is, f, ',')) out.push_back(f);
    return out;
}

const std::string fig2_args =
    "--set kappa_a=0.003 --set kappa_b=0.003 --set Gamma=0.04 "
    "--set J_im=0.02 --set drive_amplitude=0.1";

const std::string fig5_args =
    "--set kappa_a=0.05 --set kappa_b=0.01 --set Gamma=0.4 "
    "--set J_im=0.2 --set drive_amplitude=0.1";

}  // namespace

TEST_CASE("closed-form curves carry every applicable column") {
    const RunResult r = run_cli("closed-form " + fig2_args + " --t-end 400");
    REQUIRE(r.exit_code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 1u + 1001u);
    CHECK(ls[0] == "t,E_B_nr,E_A_nr,E_B_rec,eta_AB,eta_BB");

    // ratios are 0/0 at t = 0 and emitted as nan
    const auto first = fields(ls[1]);
    REQUIRE(first.size() == 6u);
    CHECK(first[0] == "0");
    CHECK(first[4] == "nan");
    CHECK(first[5] == "nan");

    const auto last = fields(ls.back());
    REQUIRE(last.size() == 6u);
    CHECK(std::strtod(last[0].c_str(), nullptr) == 400.0);
    CHECK_THAT(std::strtod(last[1].c_str(), nullptr),
               WithinRel(74.6155985344001, 1e-12));
}

TEST_CASE("detuning drops the resonance-only columns") {
    const RunResult r = run_cli("closed-form " + fig2_args +
                                " --set omega_L=1.01 --t-end 50 --dt-max 10");
    REQUIRE(r.exit_code == 0);
    const auto ls = lines(r.out);
    CHECK(ls[0] == "t,E_B_nr");
    CHECK(ls.size() == 1u + 6u);
}

TEST_CASE("simulate emits the full state trajectory deterministically") {
    const std::string args = "simulate " + fig2_args + " --t-end 50 --dt-max 0.05";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);  // byte-identical repeat run
    const auto ls = lines(a.out);
    CHECK(ls[0] == "t,re_a,im_a,re_b,im_b,n_a,n_b,re_ab,im_ab,E_A,E_B");
    CHECK(ls.size() == 1u + 1001u);
}

TEST_CASE("an unresolvable step limit exits with the step code") {
    const RunResult r =
        run_cli("simulate " + fig2_args + " --t-end 10 --dt-max 1e9");
    CHECK(r.exit_code == 3);
    CHECK(r.err.rfind("StepTooLarge: ", 0) == 0);
    CHECK(r.err.find('\n') == r.err.size() - 1);  // single line
}

TEST_CASE("bad inputs exit with the config code and a parsable prefix") {
    const RunResult neg =
        run_cli("simulate --set kappa_a=-1 --t-end 1 --dt-max 0.1");
    CHECK(neg.exit_code == 2);
    CHECK(neg.err.rfind("NegativeRate: ", 0) == 0);

    const RunResult unk =
        run_cli("simulate --set bogus=1 --t-end 1 --dt-max 0.1");
    CHECK(unk.exit_code == 2);
    CHECK(unk.err.rfind("Error: unknown config key: bogus", 0) == 0);

    const RunResult missing = run_cli("simulate");
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("ParseError: ") != std::string::npos);

    const RunResult nocmd = run_cli("frobnicate");
    CHECK(nocmd.exit_code == 2);

    const RunResult badfig = run_cli("figures nope --out cli_tmp");
    CHECK(badfig.exit_code == 2);
    CHECK(badfig.err.rfind("Error: unknown figure id: nope", 0) == 0);

    const RunResult nofile =
        run_cli("closed-form --config cli_tmp/absent.json --t-end 1");
    CHECK(nofile.exit_code == 2);
    CHECK(nofile.err.rfind("Error: cannot open config file", 0) == 0);
}

TEST_CASE("verify gates on closed-form versus integration equivalence") {
    const RunResult r = run_cli("verify " + fig2_args);
    REQUIRE(r.exit_code == 0);
    const nrqb::json j = nrqb::json::parse(r.out);
    CHECK(j["all_pass"].get<bool>());
    CHECK(j["grid_size"].get<int>() == 1000);
    for (const auto& kv : j["variants"].items()) {
        CHECK(kv.value()["status"].get<std::string>() == "pass");
        CHECK(kv.value()["max_relative_error"].get<double>() <= 1e-6);
    }

    const RunResult again = run_cli("verify " + fig2_args);
    CHECK(again.out == r.out);  // deterministic report
}

TEST_CASE("dump-config prints the validated configuration and stops") {
    const RunResult r = run_cli(
        "simulate --set kappa_a=0.25 --set p_a_re=2 --set p_b_re=2 "
        "--dump-config --t-end 1 --dt-max 0.1");
    REQUIRE(r.exit_code == 0);
    const nrqb::json j = nrqb::json::parse(r.out);
    CHECK(j["kappa_a"].get<double>() == 0.25);
    CHECK(j["omega"].get<double>() == 1.0);
    // validation moved the weight scale into Gamma
    CHECK_THAT(j["p_a_re"].get<double>() * j["p_b_re"].get<double>(),
               WithinRel(1.0, 1e-12));
}

TEST_CASE("config files feed the same pipeline as overrides") {
    fs::create_directories("cli_tmp");
    {
        std::ofstream f("cli_tmp/fig2.json");
        f << R"({"kappa_a":0.003,"kappa_b":0.003,"Gamma":0.04,)"
          << R"("J_im":0.02,"drive_amplitude":0.1})";
    }
    const RunResult file =
        run_cli("closed-form --config cli_tmp/fig2.json --t-end 400");
    const RunResult flags = run_cli("closed-form " + fig2_args + " --t-end 400");
    REQUIRE(file.exit_code == 0);
    CHECK(file.out == flags.out);
}

TEST_CASE("optimize reports the rebalanced weights") {
    const RunResult r = run_cli("optimize " + fig5_args + " --format json");
    REQUIRE(r.exit_code == 0);
    const nrqb::json j = nrqb::json::parse(r.out);
    CHECK_THAT(j["x_opt"].get<double>(), WithinRel(2.23606797749979, 1e-6));
    CHECK_THAT(j["energy_opt"].get<double>(), WithinRel(0.8044629450690515, 1e-6));
    CHECK_THAT(j["config"]["p_a_re"].get<double>(),
               WithinRel(1.4953487812212205, 1e-6));
    CHECK(j["x_grid"].size() == 101u);
    CHECK(j["energy_grid"].size() == 101u);

    const RunResult csv = run_cli("optimize " + fig5_args);
    const auto ls = lines(csv.out);
    CHECK(ls[0] == "x,energy");
    CHECK(ls.size() == 1u + 101u);
}

TEST_CASE("advantage scan: formats, grid syntax, summary") {
    const RunResult j = run_cli("advantage --grid r11:y5 --format json");
    REQUIRE(j.exit_code == 0);
    const nrqb::json s = nrqb::json::parse(j.out);
    CHECK(s["min_gap"].get<double>() > 0.0);
    CHECK(s["violations"].empty());

    const RunResult c = run_cli("advantage --grid r11:y5");
    const auto ls = lines(c.out);
    CHECK(ls[0] == "r,y,chi");
    CHECK(ls.size() == 1u + 55u);

    CHECK(run_cli("advantage --grid 11x5").exit_code == 2);
    CHECK(run_cli("advantage --grid r1:y5").exit_code == 2);
    CHECK(run_cli("advantage --grid r11:y5junk").exit_code == 2);
}

TEST_CASE("figures bundle emits every advertised file") {
    const std::string dir = "cli_tmp/figs";
    fs::create_directories(dir);
    const struct {
        const char* id;
        std::vector<const char*> files;
    } bundle[] = {
        {"fig2", {"fig2_energies.csv"}},
        {"fig3", {"fig3_curves.csv"}},
        {"fig4", {"fig4a.csv", "fig4b.csv", "fig4c.csv"}},
        {"fig5", {"fig5_energies.csv"}},
        {"chi", {"chi_grid.csv"}},
    };
    for (const auto& b : bundle) {
        const RunResult r =
            run_cli(std::string("figures ") + b.id + " --out " + dir);
        REQUIRE(r.exit_code == 0);
        for (const char* f : b.files) CHECK(fs::exists(fs::path(dir) / f));
        const fs::path manifest = fs::path(dir) / (std::string(b.id) + "_manifest.json");
        REQUIRE(fs::exists(manifest));
        const nrqb::json m = nrqb::json::parse(slurp(manifest.string()));
        CHECK(m["figure"].get<std::string>() == b.id);
        CHECK(m["files"].size() == b.files.size());
    }

    const nrqb::json chi = nrqb::json::parse(slurp(dir + std::string("/chi_manifest.json")));
    CHECK(chi["summary"]["min_gap"].get<double>() > 0.0);
    CHECK(chi["summary"]["violations"].empty());
    CHECK(lines(slurp(dir + std::string("/chi_grid.csv"))).size() == 1u + 101u * 22u);

    CHECK(run_cli("figures fig2 --out cli_tmp/does/not/exist").exit_code == 2);
}

TEST_CASE("repeat figure runs are byte-identical") {
    fs::create_directories("cli_tmp/figs_a");
    fs::create_directories("cli_tmp/figs_b");
    REQUIRE(run_cli("figures fig5 --out cli_tmp/figs_a").exit_code == 0);
    REQUIRE(run_cli("figures fig5 --out cli_tmp/figs_b").exit_code == 0);
    CHECK(slurp("cli_tmp/figs_a/fig5_energies.csv") ==
          slurp("cli_tmp/figs_b/fig5_energies.csv"));
    CHECK(slurp("cli_tmp/figs_a/fig5_manifest.json") ==
          slurp("cli_tmp/figs_b/fig5_manifest.json"));
}
