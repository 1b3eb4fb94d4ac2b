// pklab command-line front end.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance/acceptance_suite.hpp"
#include "pklab/pklab.hpp"

namespace {

using pklab::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

std::filesystem::path ensure_output_dir() {
    auto dir = pklab::output_dir();
    std::filesystem::create_directories(dir);
    return dir;
}

int cmd_simulate(const std::string& arg) {
    const auto cfg = pklab::load_config(arg);
    const auto a = pklab::simulate(cfg, ensure_output_dir());
    std::cout << a.report.str();
    if (!a.error.empty()) std::cerr << "pklab: " << a.error << "\n";
    return code(a.exit);
}

int cmd_bounds(const std::string& arg) {
    const auto cfg = pklab::load_config(arg);
    const auto a = pklab::bounds_only(cfg, ensure_output_dir());
    std::cout << a.report.str();
    if (!a.error.empty()) std::cerr << "pklab: " << a.error << "\n";
    return code(a.exit);
}

int cmd_sweep(const std::string& arg, const std::string& axis, const std::string& values, bool bounds_only, int threads) {
    const auto cfg = pklab::load_config(arg);
    const auto dir = ensure_output_dir();
    const auto rows = pklab::sweep(cfg, axis, pklab::split_values(values), dir, !bounds_only, threads);
    const auto table = pklab::sweep_table(axis, rows);
    pklab::write_atomic(dir / (cfg.name + ".sweep.csv"), table);
    std::cout << table;
    for (const auto& r : rows)
        if (!r.error.empty()) return code(ExitCode::numeric_failure);
    return code(ExitCode::success);
}

int cmd_norms(const std::string& f, const std::string& p, double length, int cells) {
    const auto r = pklab::norms(f, p, length, cells);
    std::cout << "modular = " << pklab::detail::format_double(r.modular) << "\n"
              << "luxemburg_norm = " << pklab::detail::format_double(r.norm) << "\n"
              << "sandwich_lower = " << pklab::detail::format_double(r.sandwich.lower) << "\n"
              << "sandwich_upper = " << pklab::detail::format_double(r.sandwich.upper) << "\n"
              << "sandwich_holds = " << (r.sandwich.holds ? "true" : "false") << "\n";
    return code(r.sandwich.holds ? ExitCode::success : ExitCode::numeric_failure);
}

int cmd_accept(const std::vector<int>& only) {
    const int failed = pklab::acceptance::run_acceptance(std::cout, only);
    return code(failed == 0 ? ExitCode::success : ExitCode::acceptance_failure);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pklab: plate equation with variable-exponent damping and source"};
    app.require_subcommand(1);

    std::string config;
    auto* sim = app.add_subcommand("simulate", "run a configuration or scenario:<name>");
    sim->add_option("config", config, "config file or scenario:<name>")->required();

    auto* bnd = app.add_subcommand("bounds", "classify the regime and evaluate bounds without integrating");
    bnd->add_option("config", config, "config file or scenario:<name>")->required();

    std::string axis, values;
    bool sweep_bounds_only = false;
    int threads = 0;
    auto* swp = app.add_subcommand("sweep", "vary one config key over a list of values");
    swp->add_option("config", config, "config file or scenario:<name>")->required();
    swp->add_option("--axis", axis, "section.key to vary")->required();
    swp->add_option("--values", values, "comma list, or semicolon list when values contain commas")->required();
    swp->add_flag("--bounds-only", sweep_bounds_only, "skip time integration");
    swp->add_option("--threads", threads, "worker threads (0: hardware concurrency)");

    std::string f_spec, p_spec;
    double length = 1.0;
    int cells = 200;
    auto* nrm = app.add_subcommand("norms", "modular and Luxemburg norm of a field on [0, length]");
    nrm->add_option("--f", f_spec, "function spec, e.g. constant:1")->required();
    nrm->add_option("--p", p_spec, "exponent spec, e.g. piecewise:2,3@0.5")->required();
    nrm->add_option("--length", length, "interval length");
    nrm->add_option("--cells", cells, "number of cells");

    std::vector<int> only;
    auto* acc = app.add_subcommand("accept", "run the acceptance suite");
    acc->add_option("--only", only, "criterion ids to run")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : code(ExitCode::config_error);
    }

    try {
        if (*sim) return cmd_simulate(config);
        if (*bnd) return cmd_bounds(config);
        if (*swp) return cmd_sweep(config, axis, values, sweep_bounds_only, threads);
        if (*nrm) return cmd_norms(f_spec, p_spec, length, cells);
        if (*acc) return cmd_accept(only);
    } catch (const pklab::ConfigError& e) {
        std::cerr << "pklab: configuration error\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
        return code(ExitCode::config_error);
    } catch (const pklab::InvalidInput& e) {
        std::cerr << "pklab: " << e.what() << "\n";
        return code(ExitCode::config_error);
    } catch (const std::exception& e) {
        std::cerr << "pklab: " << e.what() << "\n";
        return code(ExitCode::numeric_failure);
    }
    return code(ExitCode::config_error);
}
