#pragma once

#include "nopa/model.hpp"
#include "nopa/stability.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nopa {

enum class SweepKind { equal_power, target_db, optimal_x, threshold_approach };

std::string to_string(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& s);

struct SweepRow {
    int n_nopas = 0;
    LossScenario scenario = LossScenario::lossless;
    double x = 0.0;
    double n_x2 = 0.0;
    double v_pm_db = 0.0;  ///< V+(0) in dB (V+ = V- for these chains)
    double v_db = 0.0;     ///< V(0) = V+(0) + V-(0) in dB
    double v_pm_residual = 0.0;  ///< |V+(0) - V-(0)| / V+(0)
    std::optional<double> k;     ///< x / x_th for threshold-approach rows
};

struct SweepResult {
    SweepKind kind = SweepKind::equal_power;
    std::vector<SweepRow> rows;
};

/// Evaluates V+-(0) and V(0) of the delay-free model at the given config.
SweepRow evaluate_row(const NetworkConfig& config);

/// x = sqrt(n_ref / N) x_ref, which keeps N x^2 fixed. Throws DomainError
/// when x reaches the threshold of the chosen scenario.
double equal_power_x(int n_nopas, double x_ref = 0.13, int n_ref = 6,
                     LossScenario losses = LossScenario::lossless);

SweepResult equal_power_sweep(const std::vector<int>& n_range, LossScenario losses, double x_ref = 0.13,
                              int n_ref = 6, double y = 1.0, double distance_km = 1.0);

struct TargetSearchOptions {
    double db_tol = 1e-4;
    int bracket_samples = 64;
};

/// Smallest x in (0, x_th) with V(0) = target_db, found by bisection on a
/// bracket whose monotonicity is checked on a sample grid. Throws
/// DomainError when the target is not reached below the threshold.
double find_x_for_target_v0(const ConfigFamily& family, double x_th, double target_db,
                            const TargetSearchOptions& opts = {});

/// Per N: the lossless x reaching target_db, followed by rows for each of
/// `lossy` evaluated at that x. With `x_decimals` set, the lossy rows use
/// x rounded to that many decimals.
SweepResult target_db_sweep(const std::vector<int>& n_range, double target_db,
                            const std::vector<LossScenario>& lossy = {LossScenario::transmission_only,
                                                                      LossScenario::transmission_and_amplification},
                            std::optional<int> x_decimals = std::nullopt, double y = 1.0,
                            double distance_km = 1.0);

struct OptimalPoint {
    double x_opt = 0.0;
    int grid_index = 0;  ///< k in x = k x_th / n_samples
    double v_plus = 0.0;
    double v_minus = 0.0;
    double v = 0.0;
};

/// Grid minimiser of V(0) over x = k x_th / n_samples, k = 1..n_samples.
/// Unstable grid points are skipped. With `refine`, a golden-section
/// search on the neighbouring grid cells follows.
OptimalPoint optimal_x(const ConfigFamily& family, double x_th, int n_samples = 1000, bool refine = false);

/// With `x_th_decimals` set, the grid is built on the threshold truncated
/// to that many decimals.
SweepResult optimal_sweep(const std::vector<int>& n_range, LossScenario losses, int n_samples = 1000,
                          bool refine = false, std::optional<int> x_th_decimals = std::nullopt, double y = 1.0,
                          double distance_km = 1.0);

/// 0.5, ..., 0.999 in `points` evenly spaced steps.
std::vector<double> default_k_grid(int points = 500);

/// V(0) of a lossless chain at x = k x_th for each k in (0, 1).
SweepResult threshold_approach_curve(int n_nopas, const std::vector<double>& k_grid, double y = 1.0);

/// CSV with one column layout per sweep kind.
std::string sweep_to_csv(const SweepResult& r, const std::vector<std::pair<std::string, std::string>>& metadata = {},
                         std::optional<int> db_decimals = std::nullopt);

}  // namespace nopa
