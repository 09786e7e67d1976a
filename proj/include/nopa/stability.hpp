#pragma once

#include "nopa/errors.hpp"
#include "nopa/model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace nopa {

struct HurwitzResult {
    bool stable = false;
    double max_real_eig = 0.0;
    /// True when the eigenvalue test landed inside the marginal band
    /// (-1e-9 gamma_r, 0) and the verdict came from the refinement step.
    bool marginal = false;
};

/// Hurwitz test on a square drift matrix.
HurwitzResult is_hurwitz(const Eigen::MatrixXd& a);
HurwitzResult is_hurwitz(const StateSpace& ss);

enum class ThresholdMethod { eigen_reduction, bisection };

std::string to_string(ThresholdMethod m);

struct ProbeRecord {
    double x = 0.0;
    double max_real_eig = 0.0;
};

struct StabilityReport {
    int n_nopas = 0;
    LossScenario loss_scenario = LossScenario::lossless;
    double x_th = 0.0;
    ThresholdMethod method = ThresholdMethod::eigen_reduction;
    bool stable_on_full_range = false;
    std::vector<ProbeRecord> max_real_eig_at;
};

/// Threshold from the smallest positive eigenvalue of A_u(0) A_l(0) =
/// A_l(0)^T A_l(0); requires kappa independent of x. The pump parameter
/// stored in `structure` is ignored.
double threshold_eigen_reduction(const NetworkConfig& structure);

using ConfigFamily = std::function<NetworkConfig(double x)>;

struct BisectionResult {
    double x_th = 0.0;
    bool stable_on_full_range = false;
    std::vector<ProbeRecord> probes;
};

/// Bisection on x in (0, 1] using the Hurwitz test as the probe. Returns
/// x_hat with x_hat <= x_th < x_hat + eps_tol. A coarse probe grid checks
/// that stability is lost monotonically before bisecting.
BisectionResult bisection_threshold(const ConfigFamily& family, double eps_tol = 1e-10,
                                    int monotonicity_probes = 64);

/// Family of chains with a given size and loss scenario (y, distance fixed).
ConfigFamily chain_family(int n_nopas, LossScenario losses, double y = 1.0, double distance_km = 1.0);

/// Threshold for the scenario, picking the eigen reduction when kappa does
/// not depend on x and bisection otherwise.
StabilityReport stability_threshold(int n_nopas, LossScenario losses, double y = 1.0,
                                    double distance_km = 1.0);

std::vector<StabilityReport> threshold_table(const std::vector<LossScenario>& scenarios,
                                             const std::vector<int>& n_range, double y = 1.0,
                                             double distance_km = 1.0);

// ---------------------------------------------------------------------------
// Delay systems

/// Linear retarded system z'(t) = a0 z(t) + sum_k terms[k].second z(t - terms[k].first).
struct DelaySystem {
    Eigen::MatrixXd a0;
    std::vector<std::pair<double, Eigen::MatrixXd>> terms;

    [[nodiscard]] double max_delay() const;
};

/// Delay system of the network; `q_block_only` keeps the (a^q, b^q)
/// subsystem, whose spectrum coincides with that of the (a^p, b^p) one.
DelaySystem network_delay_system(const NetworkConfig& config, bool q_block_only = false);

/// Pseudospectral (Chebyshev collocation) discretisation of the solution
/// operator generator on [-max_delay, 0] with `order` + 1 nodes.
Eigen::MatrixXd collocation_generator(const DelaySystem& sys, int order);

/// Eigenvalues of the collocation generator.
Eigen::VectorXcd approximate_delay_spectrum(const DelaySystem& sys, int order);

/// det(s I - a0 - sum_k A_k e^{-s tau_k}).
std::complex<double> characteristic_determinant(const DelaySystem& sys, std::complex<double> s);

struct DdeSpectrumReport {
    int discretization_order = 0;
    std::complex<double> rightmost_root;
    bool converged = false;
    bool stable = false;
    std::vector<std::pair<int, std::complex<double>>> root_history;
};

struct DdeOptions {
    int start_order = 20;
    int max_order = 512;
    double rel_tol = 1e-6;
};

/// Raised when the rightmost root does not settle before max_order.
class DdeConvergenceError : public NumericalError {
public:
    DdeConvergenceError(const std::string& what, DdeSpectrumReport report)
        : NumericalError(what), report_(std::move(report)) {}

    [[nodiscard]] const DdeSpectrumReport& report() const noexcept { return report_; }

private:
    DdeSpectrumReport report_;
};

/// Doubles the collocation order from start_order until the rightmost root
/// moves by less than rel_tol * max(1, |root|).
DdeSpectrumReport dde_rightmost_root(const DelaySystem& sys, const DdeOptions& opts = {});
DdeSpectrumReport dde_rightmost_root(const NetworkConfig& config, const DdeOptions& opts = {});

}  // namespace nopa
