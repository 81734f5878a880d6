#pragma once

#include <optional>

#include "run_config.hpp"

namespace utm::cli {

inline constexpr int report_schema_version = 1;

// Exit codes: 0 success, 1 verify ran and some check failed, 2 precondition failure (payload on stdout).
enum Exit { ok = 0, check_failed = 1, precondition = 2 };

// Admissible angles for (n, a); N defaults to the unique well-posed count.
nlohmann::json cmd_theta(int n, cplx a, std::optional<int> N = {});

// Each writes into cfg.output and returns a summary of what it wrote.
nlohmann::json cmd_dtn(const RunConfig& cfg);       // dtn.json, y.csv, g.csv (general: g_k.csv)
nlohmann::json cmd_solve(const RunConfig& cfg);     // dtn.json, grid.csv
nlohmann::json cmd_verify(const RunConfig& cfg);    // report.json
nlohmann::json cmd_oracle(const RunConfig& cfg);    // fd_grid.csv, fd_trace.csv (heat, ls)

DtnSolution build_dtn(const RunConfig& cfg);

}  // namespace utm::cli
