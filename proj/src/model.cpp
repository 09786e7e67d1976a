#include "nopa/model.hpp"

#include "nopa/errors.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace nopa {

double amplification_loss_slope() { return 3.0e6 / (0.6 * std::numbers::sqrt2); }

NopaParams make_params(double x, double y, bool amplification_loss_on) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError("pump parameter x must lie in [0, 1], got " + std::to_string(x));
    }
    if (!(y > 0.0 && y <= 1.0)) {
        throw ValidationError("damping parameter y must lie in (0, 1], got " + std::to_string(y));
    }
    NopaParams p;
    p.x = x;
    p.y = y;
    p.gamma_r = kGammaRef;
    p.epsilon = x * kGammaRef;
    p.gamma = kGammaRef / y;
    p.kappa = amplification_loss_on ? amplification_loss_slope() * x : 0.0;
    return p;
}

double transmission_rate(double d_km, int n_nopas) {
    if (n_nopas < 2) {
        throw ValidationError("a chain needs at least 2 NOPAs, got " + std::to_string(n_nopas));
    }
    if (!(d_km >= 0.0)) {
        throw ValidationError("distance must be non-negative");
    }
    return std::pow(10.0, -0.01 * d_km / (n_nopas - 1));
}

std::string to_string(LossScenario s) {
    switch (s) {
    case LossScenario::lossless:
        return "lossless";
    case LossScenario::transmission_only:
        return "transmission_only";
    case LossScenario::transmission_and_amplification:
        return "transmission_and_amplification";
    }
    return "unknown";
}

LossScenario loss_scenario_from_string(const std::string& s) {
    if (s == "lossless" || s == "none") return LossScenario::lossless;
    if (s == "transmission_only" || s == "transmission") return LossScenario::transmission_only;
    if (s == "transmission_and_amplification" || s == "both") {
        return LossScenario::transmission_and_amplification;
    }
    throw ValidationError("unknown loss scenario '" + s + "'");
}

PhasePair theta_defaults(int n_nopas) {
    if (n_nopas % 2 == 0) return {0.0, 0.0};
    return {std::numbers::pi, 0.0};
}

LossScenario NetworkConfig::scenario() const {
    if (!transmission_on) return LossScenario::lossless;
    return amplification_loss_on ? LossScenario::transmission_and_amplification
                                 : LossScenario::transmission_only;
}

double segment_delay(double d_km, int n_nopas) {
    if (n_nopas < 2) throw ValidationError("a chain needs at least 2 NOPAs");
    return d_km / (kFibreSpeedKmPerS * (n_nopas - 1));
}

NetworkConfig make_network(const NetworkOptions& opts) {
    if (opts.n_nopas < 2) {
        throw ValidationError("a chain needs at least 2 NOPAs, got " + std::to_string(opts.n_nopas));
    }
    NetworkConfig cfg;
    cfg.n_nopas = opts.n_nopas;
    cfg.distance_km = opts.distance_km;
    cfg.transmission_on = opts.losses != LossScenario::lossless;
    cfg.amplification_loss_on = opts.losses == LossScenario::transmission_and_amplification;
    cfg.nopa = make_params(opts.x, opts.y, cfg.amplification_loss_on);
    if (cfg.transmission_on) {
        cfg.alpha = transmission_rate(opts.distance_km, opts.n_nopas);
        cfg.beta = std::sqrt(1.0 - cfg.alpha * cfg.alpha);
    } else {
        cfg.alpha = 1.0;
        cfg.beta = 0.0;
    }
    if (opts.tau) {
        cfg.tau = *opts.tau;
    } else {
        cfg.tau = opts.delays ? segment_delay(opts.distance_km, opts.n_nopas) : 0.0;
    }
    const PhasePair defaults = theta_defaults(opts.n_nopas);
    cfg.theta_a = opts.theta_a.value_or(defaults.theta_a);
    cfg.theta_b = opts.theta_b.value_or(defaults.theta_b);
    validate(cfg);
    return cfg;
}

void validate(const NetworkConfig& config) {
    if (config.n_nopas < 2) {
        throw ValidationError("a chain needs at least 2 NOPAs, got " + std::to_string(config.n_nopas));
    }
    if (!(config.distance_km >= 0.0)) throw ValidationError("distance must be non-negative");
    if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
        throw ValidationError("transmissivity alpha must lie in (0, 1]");
    }
    if (std::abs(config.alpha * config.alpha + config.beta * config.beta - 1.0) > 1e-12) {
        throw ValidationError("beamsplitter coefficients must satisfy alpha^2 + beta^2 = 1");
    }
    if (!(config.tau >= 0.0)) throw ValidationError("delay tau must be non-negative");
    const auto& p = config.nopa;
    if (!(p.gamma > 0.0)) throw ValidationError("mirror damping gamma must be positive");
    if (!(p.kappa >= 0.0)) throw ValidationError("amplification loss kappa must be non-negative");
    if (!std::isfinite(config.theta_a) || !std::isfinite(config.theta_b)) {
        throw ValidationError("phase shifts must be finite");
    }
}

// ---------------------------------------------------------------------------
// Index maps

int state_index(ModeKind kind, int nopa, int n_nopas) {
    if (nopa < 1 || nopa > n_nopas) {
        throw ValidationError("NOPA index " + std::to_string(nopa) + " out of range 1.." +
                              std::to_string(n_nopas));
    }
    return 4 * (nopa - 1) + (kind == ModeKind::a ? 0 : 2);
}

int input_index_in_a(int /*n_nopas*/) { return 0; }
int input_index_in_b(int /*n_nopas*/) { return 2; }

int input_index_loss(ModeKind kind, int nopa, int n_nopas) {
    if (nopa < 1 || nopa > n_nopas) throw ValidationError("NOPA index out of range");
    const int field = 2 + 2 * (nopa - 1) + (kind == ModeKind::a ? 0 : 1);
    return 2 * field;
}

int input_index_bs(ModeKind kind, int j, int n_nopas) {
    const int base = 2 + 2 * n_nopas;
    int field = 0;
    if (kind == ModeKind::a) {
        if (j < 1 || j > n_nopas - 1) throw ValidationError("a-path beamsplitter index out of range");
        field = j == 1 ? base : base + 1 + 2 * (j - 2);
    } else {
        if (j < 2 || j > n_nopas) throw ValidationError("b-path beamsplitter index out of range");
        field = j == n_nopas ? base + 2 * n_nopas - 3 : base + 2 + 2 * (j - 2);
    }
    return 2 * field;
}

std::vector<std::string> state_labels(int n_nopas) {
    std::vector<std::string> out;
    out.reserve(4 * n_nopas);
    for (int i = 1; i <= n_nopas; ++i) {
        const std::string idx = "[" + std::to_string(i) + "]";
        out.push_back("a_q" + idx);
        out.push_back("a_p" + idx);
        out.push_back("b_q" + idx);
        out.push_back("b_p" + idx);
    }
    return out;
}

namespace {

void push_pair(std::vector<std::string>& v, const std::string& stem, int idx) {
    const std::string i = "[" + std::to_string(idx) + "]";
    v.push_back(stem + "_q" + i);
    v.push_back(stem + "_p" + i);
}

}  // namespace

std::vector<std::string> input_labels(int n_nopas) {
    std::vector<std::string> out;
    out.reserve(8 * n_nopas);
    push_pair(out, "xi_in_a", 1);
    push_pair(out, "xi_in_b", n_nopas);
    for (int i = 1; i <= n_nopas; ++i) {
        push_pair(out, "xi_loss_a", i);
        push_pair(out, "xi_loss_b", i);
    }
    push_pair(out, "xi_BS_a", 1);
    for (int j = 2; j <= n_nopas - 1; ++j) {
        push_pair(out, "xi_BS_a", j);
        push_pair(out, "xi_BS_b", j);
    }
    push_pair(out, "xi_BS_b", n_nopas);
    return out;
}

std::vector<std::string> output_labels() {
    return {"xi_out_a_q", "xi_out_a_p", "xi_out_b_q", "xi_out_b_p"};
}

Eigen::Matrix2d phase_rotation(double theta) {
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

Eigen::Matrix<double, 2, 4> beamsplitter_block(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
    const double beta = std::sqrt(1.0 - alpha * alpha);
    Eigen::Matrix<double, 2, 4> m = Eigen::Matrix<double, 2, 4>::Zero();
    m.leftCols<2>() = alpha * Eigen::Matrix2d::Identity();
    m.rightCols<2>() = beta * Eigen::Matrix2d::Identity();
    return m;
}

Eigen::MatrixXd commutation_matrix(int pairs) {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(2 * pairs, 2 * pairs);
    for (int k = 0; k < pairs; ++k) {
        theta(2 * k, 2 * k + 1) = 2.0;
        theta(2 * k + 1, 2 * k) = -2.0;
    }
    return theta;
}

namespace {

Eigen::Matrix4d single_drift(const NopaParams& p) {
    const double m = 0.5 * (p.gamma + p.kappa);
    const double e = 0.5 * p.epsilon;
    Eigen::Matrix4d a;
    a << -m, 0, e, 0,
         0, -m, 0, -e,
         e, 0, -m, 0,
         0, -e, 0, -m;
    return a;
}

/// Fills the network matrices. `delay(k)` is the factor attached to a
/// coefficient that has travelled through k path segments.
template <typename Scalar, typename DelayFactor>
void fill_chain(const NetworkConfig& cfg, DelayFactor delay,
                Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& B,
                Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& C,
                Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& D) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int n = cfg.n_nopas;
    const double g = cfg.nopa.gamma;
    const double sg = std::sqrt(g);
    const double sk = std::sqrt(cfg.nopa.kappa);
    const double al = cfg.alpha;
    const double be = cfg.beta;

    A = Mat::Zero(4 * n, 4 * n);
    B = Mat::Zero(4 * n, 8 * n);
    C = Mat::Zero(4, 4 * n);
    D = Mat::Zero(4, 8 * n);

    // Adds coeff * I2 to the 2x2 block at (row, col).
    auto add2 = [](Mat& M, int row, int col, Scalar coeff) {
        M(row, col) += coeff;
        M(row + 1, col + 1) += coeff;
    };

    const Eigen::Matrix4d local = single_drift(cfg.nopa);
    for (int i = 1; i <= n; ++i) {
        const int ai = state_index(ModeKind::a, i, n);
        A.template block<4, 4>(ai, ai) = local.cast<Scalar>();
    }

    // a-path: NOPA 1 -> N
    for (int i = 1; i <= n; ++i) {
        const int row = state_index(ModeKind::a, i, n);
        for (int k = 1; k <= i - 1; ++k) {
            add2(A, row, state_index(ModeKind::a, i - k, n), -g * std::pow(al, k) * delay(k));
            add2(B, row, input_index_bs(ModeKind::a, i - k, n),
                 -be * sg * std::pow(al, k - 1) * delay(k));
        }
        add2(B, row, input_index_in_a(n), -sg * std::pow(al, i - 1) * delay(i - 1));
        add2(B, row, input_index_loss(ModeKind::a, i, n), Scalar(-sk));
    }
    // b-path: NOPA N -> 1
    for (int j = 1; j <= n; ++j) {
        const int row = state_index(ModeKind::b, j, n);
        for (int k = 1; k <= n - j; ++k) {
            add2(A, row, state_index(ModeKind::b, j + k, n), -g * std::pow(al, k) * delay(k));
            add2(B, row, input_index_bs(ModeKind::b, j + k, n),
                 -be * sg * std::pow(al, k - 1) * delay(k));
        }
        add2(B, row, input_index_in_b(n), -sg * std::pow(al, n - j) * delay(n - j));
        add2(B, row, input_index_loss(ModeKind::b, j, n), Scalar(-sk));
    }

    // Outputs before the phase shifters: rows 0-1 out_a, rows 2-3 out_b.
    Mat Cr = Mat::Zero(4, 4 * n);
    Mat Dr = Mat::Zero(4, 8 * n);
    for (int k = 1; k <= n; ++k) {
        add2(Cr, 0, state_index(ModeKind::a, k, n), sg * std::pow(al, n - k) * delay(n - k));
        add2(Cr, 2, state_index(ModeKind::b, k, n), sg * std::pow(al, k - 1) * delay(k - 1));
    }
    add2(Dr, 0, input_index_in_a(n), std::pow(al, n - 1) * delay(n - 1));
    add2(Dr, 2, input_index_in_b(n), std::pow(al, n - 1) * delay(n - 1));
    for (int k = 1; k <= n - 1; ++k) {
        add2(Dr, 0, input_index_bs(ModeKind::a, n - k, n), be * std::pow(al, k - 1) * delay(k));
        add2(Dr, 2, input_index_bs(ModeKind::b, k + 1, n), be * std::pow(al, k - 1) * delay(k));
    }

    const Mat ra = phase_rotation(cfg.theta_a).cast<Scalar>();
    const Mat rb = phase_rotation(cfg.theta_b).cast<Scalar>();
    C.topRows(2) = ra * Cr.topRows(2);
    C.bottomRows(2) = rb * Cr.bottomRows(2);
    D.topRows(2) = ra * Dr.topRows(2);
    D.bottomRows(2) = rb * Dr.bottomRows(2);
}

}  // namespace

StateSpace assemble_state_space(const NetworkConfig& config) {
    validate(config);
    StateSpace ss;
    fill_chain<double>(config, [](int) { return 1.0; }, ss.a, ss.b, ss.c, ss.d);
    ss.state_labels = state_labels(config.n_nopas);
    ss.input_labels = input_labels(config.n_nopas);
    ss.output_labels = output_labels();
    return ss;
}

FrequencyMatrices assemble_frequency_matrices(const NetworkConfig& config, double omega) {
    validate(config);
    FrequencyMatrices fm;
    fm.omega = omega;
    const double wt = omega * config.tau;
    auto delay = [wt](int k) -> std::complex<double> {
        if (k == 0 || wt == 0.0) return {1.0, 0.0};
        return std::polar(1.0, -static_cast<double>(k) * wt);
    };
    fill_chain<std::complex<double>>(config, delay, fm.a, fm.b, fm.c, fm.d);
    return fm;
}

Eigen::MatrixXd pump_coupling(const NetworkConfig& config) {
    const int n = config.n_nopas;
    const double e = 0.5 * config.nopa.epsilon;
    Eigen::Matrix4d d0;
    d0 << 0, 0, e, 0,
          0, 0, 0, -e,
          e, 0, 0, 0,
          0, -e, 0, 0;
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    for (int i = 0; i < n; ++i) delta.block<4, 4>(4 * i, 4 * i) = d0;
    return delta;
}

// ---------------------------------------------------------------------------
// Construction by interconnection of elementary blocks

StateSpace nopa_block(const NopaParams& p) {
    StateSpace s;
    s.a = single_drift(p);
    s.b = Eigen::MatrixXd::Zero(4, 8);
    const double sg = std::sqrt(p.gamma);
    const double sk = std::sqrt(p.kappa);
    // inputs: in_a (0,1), in_b (2,3), loss_a (4,5), loss_b (6,7)
    s.b.block<2, 2>(0, 0) = -sg * Eigen::Matrix2d::Identity();
    s.b.block<2, 2>(2, 2) = -sg * Eigen::Matrix2d::Identity();
    s.b.block<2, 2>(0, 4) = -sk * Eigen::Matrix2d::Identity();
    s.b.block<2, 2>(2, 6) = -sk * Eigen::Matrix2d::Identity();
    s.c = sg * Eigen::MatrixXd::Identity(4, 4);
    s.d = Eigen::MatrixXd::Zero(4, 8);
    s.d.block<2, 2>(0, 0) = Eigen::Matrix2d::Identity();
    s.d.block<2, 2>(2, 2) = Eigen::Matrix2d::Identity();
    s.state_labels = {"a_q", "a_p", "b_q", "b_p"};
    s.input_labels = {"in_a_q", "in_a_p", "in_b_q", "in_b_p",
                      "loss_a_q", "loss_a_p", "loss_b_q", "loss_b_p"};
    s.output_labels = {"out_a_q", "out_a_p", "out_b_q", "out_b_p"};
    return s;
}

StateSpace compose_by_interconnection(const NetworkConfig& config) {
    validate(config);
    if (config.tau != 0.0) {
        throw ValidationError("compose_by_interconnection builds the delay-free model only");
    }
    const int n = config.n_nopas;
    const StateSpace blk = nopa_block(config.nopa);
    const Eigen::Matrix<double, 2, 4> bs = beamsplitter_block(config.alpha);

    // Stack the NOPAs: per NOPA i, 4 states, 8 local inputs, 4 local outputs.
    const int ns = 4 * n;
    const int nu = 8 * n;
    const int ny = 4 * n;
    Eigen::MatrixXd Ad = Eigen::MatrixXd::Zero(ns, ns);
    Eigen::MatrixXd Bd = Eigen::MatrixXd::Zero(ns, nu);
    Eigen::MatrixXd Cd = Eigen::MatrixXd::Zero(ny, ns);
    Eigen::MatrixXd Dd = Eigen::MatrixXd::Zero(ny, nu);
    for (int i = 0; i < n; ++i) {
        Ad.block<4, 4>(4 * i, 4 * i) = blk.a;
        Bd.block<4, 8>(4 * i, 8 * i) = blk.b;
        Cd.block<4, 4>(4 * i, 4 * i) = blk.c;
        Dd.block<4, 8>(4 * i, 8 * i) = blk.d;
    }
    auto u_in_a = [](int i) { return 8 * (i - 1) + 0; };
    auto u_in_b = [](int i) { return 8 * (i - 1) + 2; };
    auto u_loss_a = [](int i) { return 8 * (i - 1) + 4; };
    auto u_loss_b = [](int i) { return 8 * (i - 1) + 6; };
    auto y_out_a = [](int i) { return 4 * (i - 1) + 0; };
    auto y_out_b = [](int i) { return 4 * (i - 1) + 2; };

    // External fields are registered in the order the wiring meets them and
    // mapped to the canonical input ordering by label afterwards.
    std::vector<std::string> ext_labels;
    auto ext_field = [&ext_labels](const std::string& stem, int idx) {
        const int col = static_cast<int>(ext_labels.size());
        push_pair(ext_labels, stem, idx);
        return col;
    };

    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(nu, ny);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nu, nu);
    const Eigen::Matrix2d I2 = Eigen::Matrix2d::Identity();

    // a-path, left to right
    G.block<2, 2>(u_in_a(1), ext_field("xi_in_a", 1)) = I2;
    for (int i = 2; i <= n; ++i) {
        F.block<2, 2>(u_in_a(i), y_out_a(i - 1)) = bs.leftCols<2>();
        G.block<2, 2>(u_in_a(i), ext_field("xi_BS_a", i - 1)) = bs.rightCols<2>();
    }
    // b-path, right to left
    G.block<2, 2>(u_in_b(n), ext_field("xi_in_b", n)) = I2;
    for (int j = n - 1; j >= 1; --j) {
        F.block<2, 2>(u_in_b(j), y_out_b(j + 1)) = bs.leftCols<2>();
        G.block<2, 2>(u_in_b(j), ext_field("xi_BS_b", j + 1)) = bs.rightCols<2>();
    }
    for (int i = 1; i <= n; ++i) {
        G.block<2, 2>(u_loss_a(i), ext_field("xi_loss_a", i)) = I2;
        G.block<2, 2>(u_loss_b(i), ext_field("xi_loss_b", i)) = I2;
    }

    // u = F y + G w, y = Cd z + Dd u  =>  u = K (F Cd z + G w), K = (I - F Dd)^-1
    const Eigen::MatrixXd K =
        (Eigen::MatrixXd::Identity(nu, nu) - F * Dd).partialPivLu().solve(Eigen::MatrixXd::Identity(nu, nu));
    const Eigen::MatrixXd Acl = Ad + Bd * K * F * Cd;
    const Eigen::MatrixXd Bcl = Bd * K * G;
    const Eigen::MatrixXd Ccl = Cd + Dd * K * F * Cd;
    const Eigen::MatrixXd Dcl = Dd * K * G;

    // Select the chain outputs and apply the phase shifters.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(4, ny);
    S.block<2, 2>(0, y_out_a(n)) = phase_rotation(config.theta_a);
    S.block<2, 2>(2, y_out_b(1)) = phase_rotation(config.theta_b);

    // Reorder external input columns into the canonical ordering.
    const std::vector<std::string> canonical = input_labels(n);
    if (canonical.size() != ext_labels.size()) {
        throw NumericalError("interconnection produced " + std::to_string(ext_labels.size()) +
                             " input channels, expected " + std::to_string(canonical.size()));
    }
    std::unordered_map<std::string, int> where;
    for (int k = 0; k < static_cast<int>(canonical.size()); ++k) where[canonical[k]] = k;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nu, nu);
    for (int k = 0; k < static_cast<int>(ext_labels.size()); ++k) {
        auto it = where.find(ext_labels[k]);
        if (it == where.end()) {
            throw NumericalError("interconnection input '" + ext_labels[k] + "' has no canonical slot");
        }
        P(k, it->second) = 1.0;
        where.erase(it);
    }

    StateSpace ss;
    ss.a = Acl;
    ss.b = Bcl * P;
    ss.c = S * Ccl;
    ss.d = S * Dcl * P;
    ss.state_labels = state_labels(n);
    ss.input_labels = canonical;
    ss.output_labels = output_labels();
    return ss;
}

}  // namespace nopa
