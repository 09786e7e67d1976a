#pragma once

// Quadrature state-space model of a linear coherent-feedback chain of N
// nondegenerate optical parametric amplifiers (NOPAs).
//
// Ordering conventions
//   state   z  = [a1q a1p b1q b1p  a2q a2p b2q b2p ... aNq aNp bNq bNp]
//   input   xi = [in_a[1], in_b[N], loss_a[1], loss_b[1], ..., loss_a[N], loss_b[N],
//                 BS_a[1], BS_a[2], BS_b[2], ..., BS_a[N-1], BS_b[N-1], BS_b[N]]
//                 (every field contributes a (q, p) pair)
//   output     = [out_a q, out_a p, out_b q, out_b p]
//
// BS_a[j] is the vacuum noise entering the a-path segment that leaves NOPA j
// (heading to j+1); BS_b[j] enters the b-path segment leaving NOPA j (heading
// to j-1).

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nopa {

/// Reference mirror damping rate (Hz).
inline constexpr double kGammaRef = 7.2e7;
/// Propagation speed used to turn a fibre length into a delay (km/s).
inline constexpr double kFibreSpeedKmPerS = 3.0e5;
/// Amplification loss rate per unit pump parameter: kappa = slope * x (Hz).
double amplification_loss_slope();

struct NopaParams {
    double x = 0.0;        ///< dimensionless pump parameter
    double y = 1.0;        ///< dimensionless damping parameter
    double gamma_r = kGammaRef;
    double epsilon = 0.0;  ///< pump coupling, x * gamma_r
    double gamma = kGammaRef;  ///< mirror damping, gamma_r / y
    double kappa = 0.0;    ///< amplification loss rate (0 when lossless)
};

/// Builds per-NOPA parameters. x = 0 (pump off) is accepted; x in (0, 1] is
/// the physical operating range. Throws ValidationError otherwise.
NopaParams make_params(double x, double y, bool amplification_loss_on);

/// Per-segment beamsplitter transmissivity 10^(-0.01 d / (N - 1)).
double transmission_rate(double d_km, int n_nopas);

enum class LossScenario { lossless, transmission_only, transmission_and_amplification };

std::string to_string(LossScenario s);
LossScenario loss_scenario_from_string(const std::string& s);

struct PhasePair {
    double theta_a = 0.0;
    double theta_b = 0.0;
};

/// Output phase shifts that minimise the two-mode squeezing at omega = 0:
/// (0, 0) for an even number of NOPAs, (pi, 0) for an odd number.
PhasePair theta_defaults(int n_nopas);

struct NetworkConfig {
    int n_nopas = 2;
    double distance_km = 1.0;
    bool transmission_on = false;
    bool amplification_loss_on = false;
    double alpha = 1.0;
    double beta = 0.0;
    double tau = 0.0;  ///< per-segment delay (s); 0 for the delay-free model
    double theta_a = 0.0;
    double theta_b = 0.0;
    NopaParams nopa;

    [[nodiscard]] LossScenario scenario() const;
};

/// Convenience description of a chain from which a NetworkConfig is derived.
struct NetworkOptions {
    int n_nopas = 2;
    double x = 0.0;
    double y = 1.0;
    LossScenario losses = LossScenario::lossless;
    double distance_km = 1.0;
    bool delays = false;
    std::optional<double> tau;  ///< overrides the distance-derived delay
    std::optional<double> theta_a;
    std::optional<double> theta_b;
};

NetworkConfig make_network(const NetworkOptions& opts);

/// Per-segment delay d / (c_f (N - 1)).
double segment_delay(double d_km, int n_nopas);

/// Throws ValidationError when the configuration violates its invariants.
void validate(const NetworkConfig& config);

struct StateSpace {
    Eigen::MatrixXd a;  ///< 4N x 4N
    Eigen::MatrixXd b;  ///< 4N x 8N
    Eigen::MatrixXd c;  ///< 4 x 4N
    Eigen::MatrixXd d;  ///< 4 x 8N
    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
};

struct FrequencyMatrices {
    double omega = 0.0;
    Eigen::MatrixXcd a;
    Eigen::MatrixXcd b;
    Eigen::MatrixXcd c;
    Eigen::MatrixXcd d;
};

// Index maps. Modes and NOPAs are 1-based as in the physical labelling.
enum class ModeKind { a, b };

int state_index(ModeKind kind, int nopa, int n_nopas);
int input_index_in_a(int n_nopas);
int input_index_in_b(int n_nopas);
int input_index_loss(ModeKind kind, int nopa, int n_nopas);
/// Beamsplitter noise on the a-path (j in 1..N-1) or b-path (j in 2..N).
int input_index_bs(ModeKind kind, int j, int n_nopas);

std::vector<std::string> state_labels(int n_nopas);
std::vector<std::string> input_labels(int n_nopas);
std::vector<std::string> output_labels();

/// Delay-free model built directly from the closed-form chain equations.
StateSpace assemble_state_space(const NetworkConfig& config);

/// Same network built by interconnecting elementary NOPA and beamsplitter
/// blocks. Used as an independent check of assemble_state_space.
StateSpace compose_by_interconnection(const NetworkConfig& config);

/// Frequency-domain matrices of the delayed network: every coefficient that
/// propagates through k path segments carries exp(-i k omega tau).
FrequencyMatrices assemble_frequency_matrices(const NetworkConfig& config, double omega);

/// Single NOPA as a 4-state system with inputs (in_a, in_b, loss_a, loss_b)
/// and outputs (out_a, out_b).
StateSpace nopa_block(const NopaParams& p);

/// Static beamsplitter xi_out = alpha xi_in + beta xi_noise as a 2 x 4
/// quadrature matrix [alpha I2, beta I2].
Eigen::Matrix<double, 2, 4> beamsplitter_block(double alpha);

/// 2x2 rotation acting on a (q, p) pair for the phase factor exp(i theta).
Eigen::Matrix2d phase_rotation(double theta);

/// Pump contribution Delta_N(x) = I_N (x) Delta_0(x).
Eigen::MatrixXd pump_coupling(const NetworkConfig& config);

/// Block-diagonal commutation matrix I_k (x) [[0, 2], [-2, 0]].
Eigen::MatrixXd commutation_matrix(int pairs);

}  // namespace nopa
