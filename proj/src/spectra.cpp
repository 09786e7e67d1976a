#include "nopa/spectra.hpp"

#include "nopa/errors.hpp"
#include "nopa/format.hpp"
#include "nopa/stability.hpp"

#include <cmath>
#include <sstream>

namespace nopa {

double to_db(double v) {
    if (v == 0.0) return kZeroDbSentinel;
    if (v < 0.0 || !std::isfinite(v)) throw NumericalError("cannot express a negative or non-finite value in dB");
    return std::max(kZeroDbSentinel, 10.0 * std::log10(v));
}

namespace {

Eigen::MatrixXcd resolve(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& c,
                         const Eigen::MatrixXcd& d, double omega) {
    Eigen::MatrixXcd lhs = -a;
    lhs.diagonal().array() += std::complex<double>(0.0, omega);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(lhs);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
        throw NumericalError("singular resolvent (i omega I - A) at omega = " + format_number(omega) +
                             " (rcond " + format_number(rc) + "); network at or beyond its stability threshold");
    }
    return c * lu.solve(b) + d;
}

}  // namespace

Eigen::MatrixXcd transfer_function(const StateSpace& ss, double omega) {
    using Cd = std::complex<double>;
    return resolve(ss.a.cast<Cd>(), ss.b.cast<Cd>(), ss.c.cast<Cd>(), ss.d.cast<Cd>(), omega);
}

Eigen::MatrixXcd transfer_function(const FrequencyMatrices& fm) { return resolve(fm.a, fm.b, fm.c, fm.d, fm.omega); }

SqueezingValues squeezing_from_transfer(const Eigen::MatrixXcd& h) {
    if (h.rows() != 4) throw ValidationError("transfer matrix must have 4 output rows");
    const Eigen::RowVectorXcd h1 = h.row(0) + h.row(2);
    const Eigen::RowVectorXcd h2 = h.row(1) - h.row(3);
    return {h1.squaredNorm(), h2.squaredNorm()};
}

SqueezingValues squeezing_at_zero(const NetworkConfig& config) {
    return squeezing_from_transfer(transfer_function(assemble_state_space(config), 0.0));
}

SqueezingSpectrum squeezing_spectra(const NetworkConfig& config, std::span<const double> omega_grid,
                                    const SpectrumOptions& opts) {
    validate(config);
    const bool delayed = config.tau > 0.0;
    const StateSpace ss = assemble_state_space(config);
    if (opts.check_stability) {
        if (delayed) {
            const DdeSpectrumReport dde = dde_rightmost_root(config);
            if (!dde.stable) {
                throw UnstableError("delayed network is unstable: rightmost characteristic root has real part " +
                                        format_number(dde.rightmost_root.real()),
                                    dde.rightmost_root.real());
            }
        } else {
            const HurwitzResult h = is_hurwitz(ss);
            if (!h.stable) {
                throw UnstableError("network is unstable: max real eigenvalue of A is " +
                                        format_number(h.max_real_eig),
                                    h.max_real_eig);
            }
        }
    }

    SqueezingSpectrum s;
    s.config = config;
    s.theta_a = config.theta_a;
    s.theta_b = config.theta_b;
    s.delayed = delayed;
    const std::size_t n = omega_grid.size();
    s.omega_grid.assign(omega_grid.begin(), omega_grid.end());
    s.v_plus.resize(n);
    s.v_minus.resize(n);
    s.v_sum.resize(n);
    s.v_plus_db.resize(n);
    s.v_minus_db.resize(n);
    s.v_sum_db.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = omega_grid[k];
        const Eigen::MatrixXcd h =
            delayed ? transfer_function(assemble_frequency_matrices(config, w)) : transfer_function(ss, w);
        const SqueezingValues v = squeezing_from_transfer(h);
        s.v_plus[k] = v.v_plus;
        s.v_minus[k] = v.v_minus;
        s.v_sum[k] = v.v_sum();
        s.v_plus_db[k] = to_db(v.v_plus);
        s.v_minus_db[k] = to_db(v.v_minus);
        s.v_sum_db[k] = to_db(v.v_sum());
    }
    return s;
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (points < 0) throw ValidationError("grid size must be non-negative");
    if (points > 0 && !(lo > 0.0 && hi >= lo)) throw ValidationError("log grid needs 0 < lo <= hi");
    std::vector<double> g(static_cast<std::size_t>(points));
    if (points == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int k = 0; k < points; ++k) g[k] = std::pow(10.0, a + (b - a) * k / (points - 1));
    return g;
}

std::vector<double> default_omega_grid() { return log_grid(1e4, 1e10, 500); }

namespace {

// The rational expressions cancel heavily close to the threshold, so they
// are evaluated in extended precision.
using Wide = long double;

Wide horner_even(std::initializer_list<Wide> coeffs, Wide x) {
    // coefficients of x^0, x^2, x^4, ...
    const Wide x2 = x * x;
    Wide acc = 0.0L;
    Wide p = 1.0L;
    for (Wide c : coeffs) {
        acc += c * p;
        p *= x2;
    }
    return acc;
}

struct ClosedForm {
    Wide square_weight;  // multiplies x^2 P(x)^2
    Wide cos_weight;     // multiplies x (1 + x^2)^N P(x) cos(theta_sum)
    Wide p;
    Wide q;
};

ClosedForm closed_form_terms(int n, Wide x) {
    switch (n) {
    case 2:
        return {16, 8, horner_even({-1, 1}, x), horner_even({1, -6, 1}, x)};
    case 3:
        return {4, 4, horner_even({3, -10, 3}, x), horner_even({-1, 15, -15, 1}, x)};
    case 4:
        return {64, 16, horner_even({-1, 7, -7, 1}, x), horner_even({1, -28, 70, -28, 1}, x)};
    case 5:
        return {4, 4, horner_even({5, -60, 126, -60, 5}, x), horner_even({-1, 45, -210, 210, -45, 1}, x)};
    case 6:
        return {16, 8, horner_even({-3, 55, -198, 198, -55, 3}, x),
                horner_even({1, -66, 495, -924, 495, -66, 1}, x)};
    default:
        throw DomainError("closed-form V(0) is available for N = 2..6 only, got N = " + std::to_string(n));
    }
}

}  // namespace

double closed_form_sign_polynomial(int n_nopas, double x) {
    return static_cast<double>(closed_form_terms(n_nopas, x).p);
}

double closed_form_v0(int n_nopas, double x, double theta_sum) {
    const Wide xw = x;
    const ClosedForm t = closed_form_terms(n_nopas, xw);
    if (std::abs(t.q) < 1e-14L) throw DomainError("x = " + format_number(x) + " is a pole of the closed form");
    const Wide s = std::pow(1.0L + xw * xw, n_nopas);
    const Wide num =
        s * s + t.square_weight * xw * xw * t.p * t.p + t.cos_weight * xw * s * t.p * std::cos(Wide(theta_sum));
    return static_cast<double>(2.0L * num / (t.q * t.q));
}

bool epr_entangled(double v_sum) {
    if (!(v_sum >= 0.0)) throw ValidationError("V must be non-negative");
    return v_sum < 4.0;
}

std::string spectrum_to_csv(const SqueezingSpectrum& s, const std::vector<std::pair<std::string, std::string>>& metadata,
                            std::optional<int> db_decimals) {
    auto db = [&](double v) { return db_decimals ? format_fixed(v, *db_decimals) : format_csv(v); };
    std::ostringstream os;
    for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
    os << "omega_rad_s,v_plus,v_minus,v_sum,v_plus_db,v_minus_db,v_sum_db\n";
    for (std::size_t k = 0; k < s.omega_grid.size(); ++k) {
        os << format_csv(s.omega_grid[k]) << ',' << format_csv(s.v_plus[k]) << ',' << format_csv(s.v_minus[k])
           << ',' << format_csv(s.v_sum[k]) << ',' << db(s.v_plus_db[k]) << ',' << db(s.v_minus_db[k]) << ','
           << db(s.v_sum_db[k]) << '\n';
    }
    return os.str();
}

ParsedSpectrumCsv parse_spectrum_csv(const std::string& text) {
    ParsedSpectrumCsv out;
    std::istringstream is(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            out.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (!header_seen) {
            if (line.rfind("omega_rad_s,", 0) != 0) throw ValidationError("unexpected spectrum CSV header");
            header_seen = true;
            continue;
        }
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != 7) throw ValidationError("spectrum CSV row must have 7 columns");
        out.omega.push_back(vals[0]);
        out.v_plus.push_back(vals[1]);
        out.v_minus.push_back(vals[2]);
        out.v_sum.push_back(vals[3]);
    }
    if (!header_seen) throw ValidationError("spectrum CSV has no header row");
    return out;
}

}  // namespace nopa
