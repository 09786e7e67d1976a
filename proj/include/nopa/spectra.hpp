#pragma once

#include "nopa/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nopa {

/// dB value used for an exact zero (perfect squeezing).
inline constexpr double kZeroDbSentinel = -320.0;

/// 10 log10(v), clamped to kZeroDbSentinel for v == 0.
double to_db(double v);

/// H(i omega) = C (i omega I - A)^-1 B + D of the delay-free model.
Eigen::MatrixXcd transfer_function(const StateSpace& ss, double omega);
/// Same for the frequency-dependent matrices of a delayed model.
Eigen::MatrixXcd transfer_function(const FrequencyMatrices& fm);

struct SqueezingValues {
    double v_plus = 0.0;
    double v_minus = 0.0;
    [[nodiscard]] double v_sum() const { return v_plus + v_minus; }
};

/// V+ = Tr[H1^* H1] with H1 = [1 0 1 0] H, V- with H2 = [0 1 0 -1] H.
SqueezingValues squeezing_from_transfer(const Eigen::MatrixXcd& h);

struct SqueezingSpectrum {
    std::vector<double> omega_grid;
    std::vector<double> v_plus;
    std::vector<double> v_minus;
    std::vector<double> v_sum;
    std::vector<double> v_plus_db;
    std::vector<double> v_minus_db;
    std::vector<double> v_sum_db;
    double theta_a = 0.0;
    double theta_b = 0.0;
    bool delayed = false;
    NetworkConfig config;
};

struct SpectrumOptions {
    /// Refuse unstable configurations (Hurwitz test, or the delay-spectrum
    /// check when tau > 0).
    bool check_stability = true;
};

/// Two-mode squeezing spectra over `omega_grid`. Uses the delayed model when
/// config.tau > 0. Throws UnstableError for unstable configurations.
SqueezingSpectrum squeezing_spectra(const NetworkConfig& config, std::span<const double> omega_grid,
                                    const SpectrumOptions& opts = {});

/// V+(0), V-(0) of the delay-free model (no stability check).
SqueezingValues squeezing_at_zero(const NetworkConfig& config);

/// `points` logarithmically spaced values over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int points);
/// 500 points over [1e4, 1e10] rad/s.
std::vector<double> default_omega_grid();

/// Rational closed form of V+-(0) for a lossless chain with y = 1 and
/// N in 2..6; depends on the phases only through theta_a + theta_b.
double closed_form_v0(int n_nopas, double x, double theta_sum);

/// Bracketed polynomial of the closed form (x^2 - 1 for N = 2, ...).
double closed_form_sign_polynomial(int n_nopas, double x);

/// Sum criterion V < 4.
bool epr_entangled(double v_sum);

// CSV rendering. Metadata lines are emitted as "# key=value" comments
// before the header row.
std::string spectrum_to_csv(const SqueezingSpectrum& s,
                            const std::vector<std::pair<std::string, std::string>>& metadata = {},
                            std::optional<int> db_decimals = std::nullopt);

struct ParsedSpectrumCsv {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<double> omega;
    std::vector<double> v_plus;
    std::vector<double> v_minus;
    std::vector<double> v_sum;
};

ParsedSpectrumCsv parse_spectrum_csv(const std::string& text);

}  // namespace nopa
