#include "nopa/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nopa {

namespace {

// Width of the band around zero where the QR eigenvalue verdict is refined.
constexpr double kMarginalBand = 1e-9 * kGammaRef;

/// Inverse iteration with a Rayleigh quotient around `shift`; returns the
/// eigenvalue of `a` nearest to the shift.
std::complex<double> refine_eigenvalue(const Eigen::MatrixXd& a, std::complex<double> shift) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
    Eigen::MatrixXcd shifted = ac - shift * Eigen::MatrixXcd::Identity(n, n);
    // nudge off an exact eigenvalue so the factorisation stays usable
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    shifted.diagonal().array() -= std::complex<double>(std::numeric_limits<double>::epsilon() * scale, 0.0);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n).normalized();
    std::complex<double> lambda = shift;
    for (int it = 0; it < 30; ++it) {
        Eigen::VectorXcd w = lu.solve(v);
        const double nrm = w.norm();
        if (!std::isfinite(nrm) || nrm == 0.0) break;
        v = w / nrm;
        const std::complex<double> next = v.dot(ac * v);
        if (std::abs(next - lambda) <= 1e-15 * scale) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

// Computed on A / ||A|| with a generous iteration cap; the real Schur
// iteration can cycle on the highly structured chain matrices, in which
// case the complex solver is used instead.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& a) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const Eigen::MatrixXd as = a / scale;
    Eigen::EigenSolver<Eigen::MatrixXd> es;
    es.setMaxIterations(200 * static_cast<Eigen::Index>(a.rows()));
    es.compute(as, false);
    if (es.info() == Eigen::Success) return es.eigenvalues() * scale;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces;
    ces.setMaxIterations(200 * static_cast<Eigen::Index>(a.rows()));
    ces.compute(as.cast<std::complex<double>>(), false);
    if (ces.info() == Eigen::Success) return ces.eigenvalues() * scale;
    throw NumericalError("eigenvalue solver did not converge");
}

}  // namespace

HurwitzResult is_hurwitz(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ValidationError("Hurwitz test needs a non-empty square matrix");
    }
    const Eigen::VectorXcd ev = eigenvalues(a);
    Eigen::Index arg = 0;
    ev.real().maxCoeff(&arg);
    HurwitzResult r;
    r.max_real_eig = ev(arg).real();
    if (std::abs(r.max_real_eig) < kMarginalBand) {
        r.marginal = true;
        const std::complex<double> refined = refine_eigenvalue(a, {0.0, ev(arg).imag()});
        r.max_real_eig = refined.real();
    }
    r.stable = r.max_real_eig < 0.0;
    return r;
}

HurwitzResult is_hurwitz(const StateSpace& ss) { return is_hurwitz(ss.a); }

std::string to_string(ThresholdMethod m) {
    return m == ThresholdMethod::eigen_reduction ? "eigen_reduction" : "bisection";
}

double threshold_eigen_reduction(const NetworkConfig& structure) {
    validate(structure);
    const int n = structure.n_nopas;
    const double m = 0.5 * (structure.nopa.gamma + structure.nopa.kappa);
    const double g = structure.nopa.gamma;
    // A_l(0): m on the diagonal, alpha^k gamma on the k-th superdiagonal.
    Eigen::MatrixXd al = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        al(i, i) = m;
        for (int k = 1; i + k < n; ++k) al(i, i + k) = std::pow(structure.alpha, k) * g;
    }
    const Eigen::MatrixXd prod = al.transpose() * al;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prod, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigen solver failed");
    const double half_ref = 0.5 * structure.nopa.gamma_r;
    const double upper = half_ref * half_ref;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double lam = es.eigenvalues()(k);  // ascending
        if (lam > 0.0) {
            if (lam > upper * (1.0 + 1e-15)) break;
            return std::sqrt(lam) / half_ref;
        }
    }
    throw DomainError("no threshold in range: A_u(0) A_l(0) has no eigenvalue in (0, (gamma_r/2)^2]");
}

ConfigFamily chain_family(int n_nopas, LossScenario losses, double y, double distance_km) {
    return [=](double x) {
        NetworkOptions o;
        o.n_nopas = n_nopas;
        o.x = x;
        o.y = y;
        o.losses = losses;
        o.distance_km = distance_km;
        return make_network(o);
    };
}

BisectionResult bisection_threshold(const ConfigFamily& family, double eps_tol, int monotonicity_probes) {
    if (!(eps_tol > 0.0)) throw ValidationError("bisection tolerance must be positive");
    if (monotonicity_probes < 1) throw ValidationError("need at least one monotonicity probe");

    BisectionResult out;
    auto probe = [&](double x) {
        const HurwitzResult h = is_hurwitz(assemble_state_space(family(x)));
        out.probes.push_back({x, h.max_real_eig});
        return h.stable;
    };

    // Probe grid k / P, k = 1..P. Stability must be lost at most once.
    double x_lo = 0.0;
    double x_hi = -1.0;
    for (int k = 1; k <= monotonicity_probes; ++k) {
        const double x = static_cast<double>(k) / monotonicity_probes;
        const bool stable = probe(x);
        if (stable) {
            if (x_hi > 0.0) {
                throw NumericalError("non-monotone stability pattern: stable again at x = " +
                                     std::to_string(x) + " after losing stability at x = " +
                                     std::to_string(x_hi));
            }
            x_lo = x;
        } else if (x_hi < 0.0) {
            x_hi = x;
        }
    }
    if (x_hi < 0.0) {
        out.x_th = 1.0;
        out.stable_on_full_range = true;
        return out;
    }
    while (x_hi - x_lo > eps_tol) {
        const double mid = 0.5 * (x_lo + x_hi);
        if (probe(mid)) {
            x_lo = mid;
        } else {
            x_hi = mid;
        }
    }
    out.x_th = x_lo;
    return out;
}

StabilityReport stability_threshold(int n_nopas, LossScenario losses, double y, double distance_km) {
    StabilityReport rep;
    rep.n_nopas = n_nopas;
    rep.loss_scenario = losses;
    const ConfigFamily family = chain_family(n_nopas, losses, y, distance_km);
    if (losses == LossScenario::transmission_and_amplification) {
        BisectionResult b = bisection_threshold(family);
        rep.x_th = b.x_th;
        rep.method = ThresholdMethod::bisection;
        rep.stable_on_full_range = b.stable_on_full_range;
        rep.max_real_eig_at = std::move(b.probes);
        return rep;
    }
    rep.method = ThresholdMethod::eigen_reduction;
    try {
        rep.x_th = threshold_eigen_reduction(family(0.0));
    } catch (const DomainError&) {
        rep.x_th = 1.0;
        rep.stable_on_full_range = true;
    }
    for (double k : {0.5, 0.9, 0.99}) {
        const double x = k * rep.x_th;
        rep.max_real_eig_at.push_back({x, is_hurwitz(assemble_state_space(family(x))).max_real_eig});
    }
    return rep;
}

std::vector<StabilityReport> threshold_table(const std::vector<LossScenario>& scenarios,
                                             const std::vector<int>& n_range, double y, double distance_km) {
    std::vector<StabilityReport> out;
    out.reserve(scenarios.size() * n_range.size());
    for (int n : n_range) {
        for (LossScenario s : scenarios) out.push_back(stability_threshold(n, s, y, distance_km));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Delay systems

double DelaySystem::max_delay() const {
    double t = 0.0;
    for (const auto& [delay, m] : terms) t = std::max(t, delay);
    return t;
}

DelaySystem network_delay_system(const NetworkConfig& config, bool q_block_only) {
    validate(config);
    if (!(config.tau > 0.0)) throw ValidationError("delay system requires tau > 0");
    const int n = config.n_nopas;
    const double g = config.nopa.gamma;

    DelaySystem full;
    // Undelayed part: each NOPA's own drift.
    const NetworkConfig undelayed = [&] {
        NetworkConfig c = config;
        c.tau = 0.0;
        return c;
    }();
    full.a0 = pump_coupling(undelayed);
    full.a0.diagonal().array() -= 0.5 * (config.nopa.gamma + config.nopa.kappa);

    for (int k = 1; k <= n - 1; ++k) {
        Eigen::MatrixXd ak = Eigen::MatrixXd::Zero(4 * n, 4 * n);
        const double c = -g * std::pow(config.alpha, k);
        for (int i = k + 1; i <= n; ++i) {
            const int r = state_index(ModeKind::a, i, n);
            const int s = state_index(ModeKind::a, i - k, n);
            ak(r, s) = c;
            ak(r + 1, s + 1) = c;
        }
        for (int j = 1; j + k <= n; ++j) {
            const int r = state_index(ModeKind::b, j, n);
            const int s = state_index(ModeKind::b, j + k, n);
            ak(r, s) = c;
            ak(r + 1, s + 1) = c;
        }
        full.terms.emplace_back(k * config.tau, std::move(ak));
    }
    if (!q_block_only) return full;

    std::vector<int> keep;
    for (int i = 1; i <= n; ++i) {
        keep.push_back(state_index(ModeKind::a, i, n));
        keep.push_back(state_index(ModeKind::b, i, n));
    }
    auto restrict = [&keep](const Eigen::MatrixXd& m) {
        const int d = static_cast<int>(keep.size());
        Eigen::MatrixXd r(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) r(i, j) = m(keep[i], keep[j]);
        return r;
    };
    DelaySystem q;
    q.a0 = restrict(full.a0);
    for (const auto& [delay, m] : full.terms) q.terms.emplace_back(delay, restrict(m));
    return q;
}

Eigen::MatrixXd collocation_generator(const DelaySystem& sys, int order) {
    if (order < 2) throw ValidationError("collocation order must be at least 2");
    const double span = sys.max_delay();
    if (!(span > 0.0)) throw ValidationError("collocation needs a positive maximal delay");
    const Eigen::Index n = sys.a0.rows();
    const int M = order;

    // Chebyshev extremal points x_j = cos(j pi / M), mapped to theta = span (x - 1) / 2.
    Eigen::VectorXd x(M + 1);
    for (int j = 0; j <= M; ++j) x(j) = std::cos(std::numbers::pi * j / M);
    Eigen::VectorXd c(M + 1);
    for (int j = 0; j <= M; ++j) c(j) = ((j == 0 || j == M) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);

    // Differentiation matrix on x, negative-sum trick on the diagonal.
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(M + 1, M + 1);
    for (int i = 0; i <= M; ++i) {
        for (int j = 0; j <= M; ++j) {
            if (i != j) dx(i, j) = (c(i) / c(j)) / (x(i) - x(j));
        }
        dx(i, i) = -dx.row(i).sum();
    }
    const double dscale = 2.0 / span;

    // Barycentric Lagrange basis at an arbitrary point of [-1, 1].
    auto lagrange_row = [&](double xp) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(M + 1);
        for (int j = 0; j <= M; ++j) {
            if (std::abs(xp - x(j)) < 1e-14) {
                row(j) = 1.0;
                return row;
            }
        }
        double denom = 0.0;
        for (int j = 0; j <= M; ++j) {
            const double w = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == M) ? 0.5 : 1.0);
            row(j) = w / (xp - x(j));
            denom += row(j);
        }
        return Eigen::RowVectorXd(row / denom);
    };

    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero((M + 1) * n, (M + 1) * n);
    // Node 0 (theta = 0) carries the right-hand side of the DDE.
    gen.block(0, 0, n, n) += sys.a0;
    for (const auto& [delay, ak] : sys.terms) {
        const Eigen::RowVectorXd l = lagrange_row(1.0 - 2.0 * delay / span);
        for (int j = 0; j <= M; ++j) {
            if (l(j) != 0.0) gen.block(0, j * n, n, n) += l(j) * ak;
        }
    }
    // Remaining nodes: derivative of the interpolant.
    for (int i = 1; i <= M; ++i) {
        for (int j = 0; j <= M; ++j) {
            const double v = dscale * dx(i, j);
            for (Eigen::Index k = 0; k < n; ++k) gen(i * n + k, j * n + k) = v;
        }
    }
    return gen;
}

Eigen::VectorXcd approximate_delay_spectrum(const DelaySystem& sys, int order) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(collocation_generator(sys, order), false);
    if (es.info() != Eigen::Success) throw NumericalError("eigen solver failed on collocation matrix");
    return es.eigenvalues();
}

std::complex<double> characteristic_determinant(const DelaySystem& sys, std::complex<double> s) {
    const Eigen::Index n = sys.a0.rows();
    Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - sys.a0.cast<std::complex<double>>();
    for (const auto& [delay, ak] : sys.terms) m -= std::exp(-s * delay) * ak.cast<std::complex<double>>();
    return m.partialPivLu().determinant();
}

namespace {

std::complex<double> rightmost(const Eigen::VectorXcd& ev) {
    std::complex<double> best(-std::numeric_limits<double>::infinity(), 0.0);
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const auto z = ev(k);
        // conjugate pairs: keep the upper half-plane member
        if (z.real() > best.real() + 1e-12 * std::abs(z) ||
            (std::abs(z.real() - best.real()) <= 1e-12 * std::abs(z) && z.imag() > best.imag())) {
            best = z;
        }
    }
    return {best.real(), std::abs(best.imag())};
}

}  // namespace

DdeSpectrumReport dde_rightmost_root(const DelaySystem& sys, const DdeOptions& opts) {
    if (opts.start_order < 2 || opts.max_order < opts.start_order) {
        throw ValidationError("invalid collocation order range");
    }
    DdeSpectrumReport rep;
    std::complex<double> prev;
    bool have_prev = false;
    for (int order = opts.start_order; order <= opts.max_order; order *= 2) {
        const std::complex<double> r = rightmost(approximate_delay_spectrum(sys, order));
        rep.root_history.emplace_back(order, r);
        rep.discretization_order = order;
        rep.rightmost_root = r;
        if (have_prev && std::abs(r - prev) < opts.rel_tol * std::max(1.0, std::abs(r))) {
            rep.converged = true;
            rep.stable = r.real() < 0.0;
            return rep;
        }
        prev = r;
        have_prev = true;
    }
    throw DdeConvergenceError("rightmost characteristic root did not converge up to order " +
                                  std::to_string(opts.max_order),
                              rep);
}

DdeSpectrumReport dde_rightmost_root(const NetworkConfig& config, const DdeOptions& opts) {
    return dde_rightmost_root(network_delay_system(config, true), opts);
}

}  // namespace nopa
