#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace utm::cli;
using nlohmann::json;

int main(int argc, char** argv) {
    CLI::App app{"Unified transform solver for linear evolution PDEs on the half line with time-dependent Robin data"};
    app.require_subcommand(1);

    int n = 2, N = 0;
    std::vector<double> a{1.0};
    auto* theta = app.add_subcommand("theta", "admissible angles theta for the dispersion relation a lambda^n");
    theta->add_option("--n", n, "spatial order")->required();
    theta->add_option("--a", a, "coefficient a as RE [IM]")->expected(1, 2)->required();
    theta->add_option("--N", N, "number of boundary conditions (default: the unique well-posed count)");

    std::string config, output;
    auto with_config = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        s->add_option("-o,--output", output, "output directory (overrides the config)");
        return s;
    };
    auto* dtn = with_config("dtn", "DtN map: dtn.json, y.csv, g.csv (general: g_k.csv on the grid times)");
    auto* solve = with_config("solve", "DtN map and the field on a grid: dtn.json, grid.csv");
    auto* verify = with_config("verify", "run every verification check: report.json");
    auto* oracle = with_config("oracle", "finite-difference reference (heat, ls): fd_grid.csv, fd_trace.csv");
    auto* defaults = app.add_subcommand("defaults", "print every default the CLI applies");

    CLI11_PARSE(app, argc, argv);

    try {
        json out;
        int code = Exit::ok;
        if (theta->parsed()) {
            const utm::cplx av(a[0], a.size() > 1 ? a[1] : 0.0);
            out = cmd_theta(n, av, N > 0 ? std::optional<int>(N) : std::nullopt);
        } else if (defaults->parsed()) {
            out = defaults_json();
        } else {
            RunConfig cfg = load_config(config);
            if (!output.empty()) cfg.output = output;
            if (dtn->parsed()) out = cmd_dtn(cfg);
            if (solve->parsed()) out = cmd_solve(cfg);
            if (oracle->parsed()) out = cmd_oracle(cfg);
            if (verify->parsed()) {
                json r = cmd_verify(cfg);
                out = {{"all_pass", r["all_pass"]}, {"report", (cfg.output / "report.json").string()}};
                for (const auto& c : r["checks"]) out["checks"][c["name"].get<std::string>()] = c["status"];
                if (!r["all_pass"].get<bool>()) code = Exit::check_failed;
            }
        }
        std::cout << out.dump(2) << '\n';
        return code;
    } catch (const std::exception& e) {
        std::cout << error_payload(e).dump(2) << '\n';
        return Exit::precondition;
    }
}
