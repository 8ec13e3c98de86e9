// dispflow: run, verify, mms and sweep commands.
// Exit codes: 0 success, 1 verification failure, 2 configuration error, 3 solver failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dispflow/dispflow.hpp"

namespace fs = std::filesystem;
using namespace dispflow;

namespace {

constexpr int kOk = 0, kVerifyFail = 1, kConfigError = 2, kSolverError = 3;

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

int cmd_run(const std::string& config, const std::string& outdir_opt) {
    RunConfig cfg = load_config(config);
    if (!outdir_opt.empty()) cfg.outdir = outdir_opt;
    const RunResult r = run_simulation(cfg, cfg.outdir);
    const Diagnostics& last = r.rows.back();
    double drift = 0.0, grad = 0.0;
    for (const auto& d : r.rows) {
        drift = std::max(drift, d.mass_drift);
        grad = std::max(grad, d.grad_sup);
    }
    std::printf("steps %d  t = %.6g  umax = %.6g  umin = %.6g\n", last.step, last.t, last.umax, last.umin);
    std::printf("max mass drift %.3e  max |grad u| %.6g\n", drift, grad);
    std::printf("wrote %s\n", cfg.outdir.c_str());
    return kOk;
}

int cmd_verify(const std::string& suite, unsigned seed, const std::string& csv) {
    const auto rows = run_verify(suite, seed);
    std::printf("seed %u\n", seed);
    print_verify_table(std::cout, rows);
    if (!csv.empty()) {
        std::ofstream os(csv);
        if (!os) throw ConfigError("cannot write '" + csv + "'");
        write_verify_csv(os, rows, seed);
    }
    const bool ok = all_pass(rows);
    std::printf("%s\n", ok ? "all rows pass" : "verification FAILED");
    return ok ? kOk : kVerifyFail;
}

int cmd_mms(const std::string& which, int levels, const std::string& csv) {
    MmsResult r;
    if (which == "poisson") r = poisson_mms(levels);
    else if (which == "coupled") r = coupled_mms(levels);
    else throw ConfigError("unknown case '" + which + "' (poisson, coupled)");
    std::printf("%6s %12s %14s %8s%s\n", "n", "h", "error", "order", which == "coupled" ? "     error_v  steps" : "");
    std::ostringstream table;
    table << "n,h,error,order,error_v,steps\n";
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        const MmsLevel& l = r.levels[i];
        const double order = i > 0 ? r.orders[i - 1] : 0.0;
        if (which == "coupled")
            std::printf("%6d %12.5e %14.6e %8.3f %12.4e %6d\n", l.n, l.h, l.error, order, l.error_v, l.steps);
        else
            std::printf("%6d %12.5e %14.6e %8.3f\n", l.n, l.h, l.error, order);
        table << l.n << ',' << format_g17(l.h) << ',' << format_g17(l.error) << ','
              << (i > 0 ? format_g17(order) : std::string()) << ',' << format_g17(l.error_v) << ',' << l.steps
              << '\n';
    }
    std::printf("least-squares order %.4f\n", r.slope);
    if (!csv.empty()) {
        std::ofstream os(csv);
        if (!os) throw ConfigError("cannot write '" + csv + "'");
        os << table.str();
    }
    return kOk;
}

int cmd_sweep(const std::string& config, const std::string& param, const std::string& outdir_opt) {
    const RunConfig cfg = load_config(config);
    const SweepSpec spec = parse_sweep_spec(param);
    const fs::path out = outdir_opt.empty() ? fs::path(cfg.outdir) : fs::path(outdir_opt);
    const auto entries = run_sweep(cfg, spec, out);
    std::printf("%14s %14s %14s %14s\n", spec.name.c_str(), "umax", "mass", "max drift");
    for (const auto& e : entries)
        std::printf("%14.6g %14.6g %14.8g %14.3e\n", e.value, e.final_row.umax, e.final_row.mass, e.max_mass_drift);
    std::printf("wrote %s\n", (out / "summary.csv").string().c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dispersion-driven transport solver and identity checks"};
    app.require_subcommand(1);

    std::string run_config, run_outdir;
    auto* run = app.add_subcommand("run", "integrate one configuration");
    run->add_option("--config", run_config, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--outdir", run_outdir, "output directory (overrides the config)");

    std::string suite = "all", verify_csv = "verify.csv";
    unsigned seed = 20261015;
    auto* verify = app.add_subcommand("verify", "identity and property checks");
    verify->add_option("--suite", suite, "identities, appendix, solver or all")
        ->check(CLI::IsMember({"identities", "appendix", "solver", "all"}));
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--csv", verify_csv, "machine-readable table (empty to skip)");

    std::string mms_case = "poisson", mms_csv;
    int levels = 4;
    auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
    mms->add_option("--case", mms_case, "poisson or coupled")->check(CLI::IsMember({"poisson", "coupled"}));
    mms->add_option("--levels", levels, "number of grids (>= 2)")->check(CLI::Range(2, 8));
    mms->add_option("--csv", mms_csv, "error table");

    std::string sweep_config, sweep_param, sweep_outdir;
    auto* sweep = app.add_subcommand("sweep", "one run per parameter value");
    sweep->add_option("--config", sweep_config, "base config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", sweep_param, "NAME=v1,v2,...")->required();
    sweep->add_option("--outdir", sweep_outdir, "parent directory (default: outdir of the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(run_config, run_outdir);
        if (*verify) return cmd_verify(suite, seed, verify_csv);
        if (*mms) return cmd_mms(mms_case, levels, mms_csv);
        if (*sweep) return cmd_sweep(sweep_config, sweep_param, sweep_outdir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfigError;
    } catch (const GridError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfigError;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kSolverError;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kSolverError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolverError;
    }
    return kOk;
}
