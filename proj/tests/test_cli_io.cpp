#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "dispflow/sweep.hpp"
#include "dispflow/verify.hpp"

using namespace dispflow;
namespace fs = std::filesystem;

namespace {

const char* kMinimal =
    "nx = 17\n"
    "ny = 9\n"
    "a = 1\n"
    "b = 2\n"
    "m = 0.5\n"
    "dt = 0.01\n"
    "t_end = 0.03\n"
    "ic = gaussian\n";

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dispflow_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string read_text(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(DISPFLOW_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Config, MinimalDefaults) {
    const RunConfig c = parse_config(kMinimal);
    EXPECT_EQ(c.grid.nx, 17);
    EXPECT_EQ(c.grid.ny, 9);
    EXPECT_EQ(c.grid.lx, 1.0);
    EXPECT_EQ(c.phys.b, 2.0);
    EXPECT_EQ(c.reg.eps, 1e-6);
    EXPECT_EQ(c.reg.moll_radius, 0.0);
    EXPECT_EQ(c.picard_tol, 1e-10);
    EXPECT_EQ(c.picard_max, 50);
    EXPECT_EQ(c.lin_tol, 1e-10);
    EXPECT_EQ(c.output_every, 10);
    EXPECT_EQ(c.ic, "gaussian");
    EXPECT_EQ(c.ic_params, "");
    EXPECT_EQ(c.outdir, "run");
}

TEST(Config, CommentsAndWhitespace) {
    const RunConfig c = parse_config(std::string("# header\n\n") + kMinimal + "  ic_params = width=0.2 amp=2  # trailing\n");
    EXPECT_EQ(c.ic_params, "width=0.2 amp=2");
}

TEST(Config, AutoStep) {
    std::string t = kMinimal;
    t.replace(t.find("dt = 0.01"), 9, "dt = auto");
    t.replace(t.find("t_end = 0.03"), 12, "t_end = 0.125");
    const RunConfig c = parse_config(t);
    EXPECT_EQ(c.dt, 0.0625);
}

TEST(Config, DispersionOrderError) {
    std::string t = kMinimal;
    t.replace(t.find("a = 1"), 5, "a = 1.0");
    t.replace(t.find("b = 2"), 5, "b = 0.5");
    const std::string msg = message_of(t);
    EXPECT_NE(msg.find("b > a"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    t.replace(t.find("b = 0.5"), 7, "b = 1.0");
    EXPECT_NE(message_of(t).find("b > a"), std::string::npos);
}

TEST(Config, LineNumberedErrors) {
    EXPECT_NE(message_of(std::string(kMinimal) + "colour = red\n").find("line 9: unknown key 'colour'"),
              std::string::npos);
    EXPECT_NE(message_of(std::string(kMinimal) + "a = 3\n").find("line 9: duplicate key 'a'"), std::string::npos);
    EXPECT_NE(message_of(std::string(kMinimal) + "just words\n").find("line 9"), std::string::npos);
    std::string t = kMinimal;
    t.replace(t.find("dt = 0.01"), 9, "dt = -0.1");
    EXPECT_NE(message_of(t).find("line 6: dt must be positive"), std::string::npos);
    t = kMinimal;
    t.replace(t.find("nx = 17"), 7, "nx = 1x");
    EXPECT_NE(message_of(t).find("line 1"), std::string::npos);
}

TEST(Config, MissingKeys) {
    for (const char* key : {"nx", "ny", "a", "b", "m", "dt", "t_end", "ic"}) {
        std::istringstream is(kMinimal);
        std::string line, text;
        while (std::getline(is, line))
            if (line.rfind(std::string(key) + " ", 0) != 0) text += line + "\n";
        EXPECT_NE(message_of(text).find(std::string("missing required key '") + key + "'"), std::string::npos)
            << key;
    }
}

TEST(Config, RoundTrip) {
    RunConfig c = parse_config(std::string(kMinimal) +
                               "eps = 1e-4\nmoll_radius = 0.05\nlx = 2.5\nic_params = width=0.3\noutdir = out/x\n");
    c.picard_tol = 1.0 / 3.0 * 1e-9;
    const RunConfig back = parse_config(serialize_config(c));
    EXPECT_TRUE(back == c);
    EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Sweep, SpecParsing) {
    const SweepSpec s = parse_sweep_spec("a=1.0, 0.5");
    EXPECT_EQ(s.name, "a");
    ASSERT_EQ(s.values.size(), 2u);
    EXPECT_EQ(s.values[1], 0.5);
    EXPECT_THROW(parse_sweep_spec("a"), ConfigError);
    EXPECT_THROW(parse_sweep_spec("nx=3"), ConfigError);
    EXPECT_THROW(parse_sweep_spec("m=1,x"), ConfigError);
    EXPECT_THROW(parse_sweep_spec("m="), ConfigError);
}

TEST(Sweep, DirectoryNamesRoundTrip) {
    EXPECT_EQ(sweep_dir_name("m", 0.1), "m_0.1");
    EXPECT_EQ(sweep_dir_name("a", 1.0), "a_1");
    EXPECT_EQ(sweep_dir_name("b", 2.5e-7), "b_2.5e-07");
    for (double x : {0.1, 1.0 / 3.0, 12345.678, 1e-300}) EXPECT_EQ(std::stod(format_shortest(x)), x);
}

TEST(Sweep, InstanceValidation) {
    const RunConfig c = parse_config(kMinimal);
    EXPECT_EQ(sweep_instance(c, "a", 0.5).phys.a, 0.5);
    EXPECT_THROW(sweep_instance(c, "a", 2.0), ConfigError);
    EXPECT_THROW(sweep_instance(c, "eps", 0.0), ConfigError);
    EXPECT_THROW(sweep_instance(c, "dt", 1.0), ConfigError);
}

TEST(Sweep, MatchesIndividualRuns) {
    const fs::path dir = scratch_dir("sweep_lib");
    const RunConfig c = parse_config(kMinimal);
    const auto entries = run_sweep(c, parse_sweep_spec("a=1.0,0.5,1.0"), dir);
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_EQ(entries[0].value, 0.5);
    for (const auto& e : entries) {
        RunConfig single = c;
        single.phys.a = e.value;
        const RunResult r = run_simulation(single);
        EXPECT_EQ(diagnostics_row(e.final_row), diagnostics_row(r.rows.back()));
        EXPECT_LE(e.max_mass_drift, 1e-11);
        EXPECT_TRUE(fs::exists(dir / sweep_dir_name("a", e.value) / "diagnostics.csv"));
    }
    EXPECT_EQ(read_csv(dir / "summary.csv").size(), 3u);
    fs::remove_all(dir);
}

TEST(Verify, AllRowsPassAndStable) {
    const auto a = run_verify("identities", 7);
    const auto b = run_verify("identities", 7);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(a[i].pass()) << a[i].name << " " << a[i].value;
        EXPECT_EQ(a[i].value, b[i].value);
    }
    EXPECT_THROW(run_verify("bogus", 1), ConfigError);
    std::ostringstream os;
    write_verify_csv(os, a, 7);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "suite,name,trials,value,relation,threshold,status,seed");
}

TEST(Cli, VerifyExitsZero) {
    const fs::path dir = scratch_dir("verify");
    EXPECT_EQ(run_cli("verify --suite all --csv " + (dir / "v.csv").string(), dir / "log.txt"), 0)
        << read_text(dir / "log.txt");
    const auto rows = read_csv(dir / "v.csv");
    ASSERT_GT(rows.size(), 30u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 8u);
        EXPECT_EQ(rows[i][6], "pass") << rows[i][1];
        EXPECT_EQ(rows[i][7], "20261015");
    }
    EXPECT_NE(read_text(dir / "log.txt").find("all rows pass"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, ConfigErrorsExitTwo) {
    const fs::path dir = scratch_dir("cfgerr");
    std::string t = kMinimal;
    t.replace(t.find("b = 2"), 5, "b = 0.5");
    write_text(dir / "bad.cfg", t);
    EXPECT_EQ(run_cli("run --config " + (dir / "bad.cfg").string(), dir / "log.txt"), 2);
    EXPECT_NE(read_text(dir / "log.txt").find("b > a"), std::string::npos);
    EXPECT_EQ(run_cli("run --config " + (dir / "missing.cfg").string(), dir / "log.txt"), 2);
    EXPECT_EQ(run_cli("frobnicate", dir / "log.txt"), 2);
    EXPECT_EQ(run_cli("mms --levels 1", dir / "log.txt"), 2);
    write_text(dir / "ok.cfg", kMinimal);
    EXPECT_EQ(run_cli("sweep --config " + (dir / "ok.cfg").string() + " --param a=3", dir / "log.txt"), 2);
    fs::remove_all(dir);
}

TEST(Cli, SolverFailureExitsThreeKeepsArtifacts) {
    const fs::path dir = scratch_dir("solverfail");
    write_text(dir / "hard.cfg", std::string(kMinimal) + "picard_max = 1\npicard_tol = 1e-15\n");
    EXPECT_EQ(run_cli("run --config " + (dir / "hard.cfg").string() + " --outdir " + (dir / "out").string(),
                      dir / "log.txt"),
              3);
    EXPECT_NE(read_text(dir / "log.txt").find("Picard"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "out" / "config.txt"));
    EXPECT_EQ(read_csv(dir / "out" / "diagnostics.csv").size(), 2u);
    fs::remove_all(dir);
}

TEST(Cli, RunWritesReproducibleDirectory) {
    const fs::path dir = scratch_dir("run");
    write_text(dir / "c.cfg", kMinimal);
    ASSERT_EQ(run_cli("run --config " + (dir / "c.cfg").string() + " --outdir " + (dir / "out").string(),
                      dir / "log.txt"),
              0)
        << read_text(dir / "log.txt");
    const auto diag = read_csv(dir / "out" / "diagnostics.csv");
    ASSERT_EQ(diag.size(), 5u);
    EXPECT_EQ(diag[0].size(), 13u);
    EXPECT_TRUE(fs::exists(dir / "out" / "u_000003.csv"));
    // rerun from the copied config
    ASSERT_EQ(run_cli("run --config " + (dir / "out" / "config.txt").string() + " --outdir " +
                          (dir / "again").string(),
                      dir / "log.txt"),
              0);
    EXPECT_EQ(read_text(dir / "out" / "diagnostics.csv"), read_text(dir / "again" / "diagnostics.csv"));
    fs::remove_all(dir);
}

TEST(Cli, SweepOverTransverseDispersivity) {
    const fs::path dir = scratch_dir("sweep");
    write_text(dir / "c.cfg", kMinimal);
    ASSERT_EQ(run_cli("sweep --config " + (dir / "c.cfg").string() + " --param a=0.5,1.0 --outdir " +
                          (dir / "out").string(),
                      dir / "log.txt"),
              0)
        << read_text(dir / "log.txt");
    EXPECT_TRUE(fs::exists(dir / "out" / "a_0.5" / "diagnostics.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "a_1" / "diagnostics.csv"));
    const auto rows = read_csv(dir / "out" / "summary.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].back(), "max_mass_drift");
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i].back()), 1e-11);
    fs::remove_all(dir);
}

TEST(Cli, PoissonStudyOrder) {
    const fs::path dir = scratch_dir("mms");
    ASSERT_EQ(run_cli("mms --case poisson --levels 4 --csv " + (dir / "m.csv").string(), dir / "log.txt"), 0);
    const auto rows = read_csv(dir / "m.csv");
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double order = std::stod(rows[i][3]);
        EXPECT_GE(order, 1.8);
        EXPECT_LE(order, 2.2);
    }
    EXPECT_NE(read_text(dir / "log.txt").find("least-squares order"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, CoupledStudyConverges) {
    const MmsResult r = coupled_mms(3);
    ASSERT_EQ(r.levels.size(), 3u);
    for (std::size_t i = 1; i < r.levels.size(); ++i) {
        EXPECT_LT(r.levels[i].error, r.levels[i - 1].error);
        EXPECT_LT(r.levels[i].error_v, r.levels[i - 1].error_v);
    }
    EXPECT_GE(r.slope, 0.9);
}
