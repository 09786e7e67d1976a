#pragma once

#include "nopa/io.hpp"
#include "nopa/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nopa::cli {

enum ExitCode { kOk = 0, kValidation = 2, kNumerical = 3, kUnstable = 4 };

struct RunConfig {
    std::string command;
    std::optional<std::string> n_spec;  // "2..6", "2,4", "3"
    std::optional<std::string> scenarios;
    bool lossless = false;
    std::optional<double> x;
    double x_ref = 0.13;
    int n_ref = 6;
    double y = 1.0;
    double distance_km = 1.0;
    bool delay = false;
    std::optional<double> tau;
    std::optional<double> theta_a;
    std::optional<double> theta_b;
    double omega_min = 1e4;
    double omega_max = 1e10;
    int omega_points = 500;
    double t_end = 2e-7;
    double dt = 1e-10;
    int n_samples = 1000;
    bool refine = false;
    double target_db = -25.0;
    std::string kind = "target-db";
    int k_points = 500;
    int dde_start_order = 20;
    int dde_max_order = 512;
    std::optional<std::string> out;
    std::optional<std::string> json;
    bool paper_precision = false;
    bool trajectory = false;
    bool sync_check = false;
};

Json to_json(const RunConfig& rc);

/// Expands "2..6", "2,4,6" or "3" into a list of chain sizes.
std::vector<int> parse_n_spec(const std::string& spec);

/// Expands "all" or a comma-separated list of scenario names.
std::vector<LossScenario> parse_scenarios(const std::string& spec);

/// Parses argv-style arguments (without the program name) and runs the
/// selected subcommand. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nopa::cli
