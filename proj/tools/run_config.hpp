#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "utm/oracle.hpp"

namespace utm::cli {

// Every default the CLI applies, in one place. README mirrors this table.
struct Defaults {
    static constexpr int U = 16;
    static constexpr double abs_tol = 1e-8;
    static constexpr double rel_tol = 1e-6;
    static constexpr double R = 1;
    static constexpr double t_lo_frac = 1.0 / 50;     // fit window starts at T/50; tau defaults to T
    static constexpr double x_max = 12;
    static constexpr double grid_x_to = 4;
    static constexpr int grid_n = 21;
    static constexpr double fd_x_max = 20;
    static constexpr int fd_nx = 400;
    static constexpr int fd_nt = 200;
    static constexpr int trace_points = 10;
    static constexpr double deform_x = 1;
    // verify thresholds
    static constexpr double gr_factor = 5;           // |residual| <= 5 (bound + data_bound)
    static constexpr double flode_residual = 1e-6;
    static constexpr double deformation = 1e-6;
    static constexpr double boundary_trace = 1e-4;
    static constexpr double oracle_diff = 1e-2;      // sup relative, heat only
    static constexpr double removeqT = 1e-6;
};

struct Axis {
    double from = 0, to = 1;
    int n = Defaults::grid_n;
    std::vector<double> points() const;
};

struct RunConfig {
    std::string problem = "heat";                    // heat | ls | lkdv1 | lkdv2 | general
    EquationClass general_class{2, 1.0, 1};          // problem = general: only right-hand sides are produced
    ProblemSpec spec;
    std::optional<FracPowerSeries> boundary_series;  // exact y; DtN data then skip sampling and fitting
    DtnOptions dtn;
    FieldOptions field;
    Axis x{0, Defaults::grid_x_to, Defaults::grid_n}, t{0, 1, Defaults::grid_n};
    FdGrid fd{Defaults::fd_x_max, Defaults::fd_nx, Defaults::fd_nt};
    std::vector<cplx> gr_lambdas{cplx(0, -1), cplx(0.7, -0.3), cplx(-1.5, 0), cplx(1.2, -1.1)};
    std::vector<double> gr_times;                    // empty: {T/4, T/2, T}
    std::vector<double> trace_times;                 // empty: Defaults::trace_points uniform points in (0, T]
    double deform_x = Defaults::deform_x;
    std::filesystem::path output = "out";
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Compatibility failure at load, with the residual of every condition k = 1..N.
struct CompatibilityFailure : ConfigError {
    CompatibilityFailure(const std::string& what, std::vector<cplx> r) : ConfigError(what), residuals(std::move(r)) {}
    std::vector<cplx> residuals;
};

// Parses the JSON config and checks compatibility; CompatibilityError names each failing condition.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& file);
nlohmann::json defaults_json();

// Machine-readable payload for a failed precondition.
nlohmann::json error_payload(const std::exception& e);

}  // namespace utm::cli
