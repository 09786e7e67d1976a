#pragma once

#include "nopa/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace nopa {

struct CovarianceMatrix {
    Eigen::MatrixXd p;
    std::optional<double> time;  ///< nullopt marks the steady state
};

/// Solves A P + P A^T + Q = 0 through the vectorised system restricted to
/// the upper triangle of P. Throws NumericalError if the residual exceeds
/// 1e-10 ||Q||.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Steady-state covariance, A P + P A^T + B B^T = 0. Throws UnstableError
/// when A is not Hurwitz.
CovarianceMatrix steady_state_covariance(const StateSpace& ss);

struct IntegratorOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
};

/// Samples of dP/dt = A P + P A^T + Q at t = 0, dt, 2 dt, ..., t_end,
/// integrated with an adaptive Dormand-Prince 5(4) scheme.
std::vector<CovarianceMatrix> lyapunov_trajectory(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                                                  const Eigen::MatrixXd& p0, double t_end, double dt,
                                                  const IntegratorOptions& opts = {});

std::vector<CovarianceMatrix> covariance_trajectory(const StateSpace& ss, const Eigen::MatrixXd& p0, double t_end,
                                                    double dt = 1e-10, const IntegratorOptions& opts = {});

/// A cavity mode: a_i / b_i (index 1..N) or the collective a_c / b_c.
struct Mode {
    ModeKind kind = ModeKind::a;
    int index = 1;  ///< 0 denotes the collective mode
    bool collective() const { return index == 0; }
};

std::string label(const Mode& m);

/// Covariance of (mode_1, mode_2) ordered (q1, p1, q2, p2).
Eigen::Matrix4d mode_pair_submatrix(const Eigen::MatrixXd& p, const Mode& first, const Mode& second);

/// Covariance of the collective modes (a_c, b_c): M P M^T with
/// M = (1/sqrt(N)) [I4 ... I4].
Eigen::Matrix4d collective_covariance(const Eigen::MatrixXd& p, int n_nopas);

struct NegativityReport {
    Mode first;
    Mode second;
    std::string pair_label;
    double nu = 1.0;
    double e_value = 0.0;
};

/// Logarithmic negativity of a two-mode covariance matrix (vacuum = I4).
NegativityReport log_negativity(const Eigen::Matrix4d& p4);

/// The mode pairs tracked for an N-chain: (a_i, b_i), (a_i, b_{i+1}),
/// (a_{i+1}, b_i), (a_1, b_N), (a_N, b_1) and (a_c, b_c), without repeats.
std::vector<std::pair<Mode, Mode>> tracked_pairs(int n_nopas);

NegativityReport pair_negativity(const Eigen::MatrixXd& p, int n_nopas, const Mode& first, const Mode& second);

/// Steady-state negativities of every tracked pair.
std::vector<NegativityReport> negativity_suite(const NetworkConfig& config);

struct NegativityTrajectory {
    std::vector<double> times;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;  ///< values[pair][sample]
};

/// Time evolution of the tracked negativities from P(0) = I (vacuum).
NegativityTrajectory negativity_trajectory(const NetworkConfig& config, double t_end, double dt = 1e-10,
                                           const IntegratorOptions& opts = {});

/// Total pump x_i = sqrt(6 / i) x_6 with x_6 = 0.13, lossless, y = 1: the
/// operating point used for the internal-mode study.
NetworkConfig equal_power_lossless_config(int n_nopas, double x_ref = 0.13, int n_ref = 6);

}  // namespace nopa
