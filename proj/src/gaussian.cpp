#include "nopa/gaussian.hpp"

#include "nopa/errors.hpp"
#include "nopa/format.hpp"
#include "nopa/stability.hpp"

#include <cmath>
#include <limits>

namespace nopa {

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || q.rows() != n || q.cols() != n) {
        throw ValidationError("Lyapunov solve needs square matrices of equal size");
    }
    // Unknowns p(i, j), i <= j, packed row by row.
    const Eigen::Index m = n * (n + 1) / 2;
    Eigen::MatrixXi slot(n, n);
    Eigen::Index next = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            slot(i, j) = static_cast<int>(next);
            slot(j, i) = static_cast<int>(next);
            ++next;
        }
    }
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const Eigen::Index row = slot(i, j);
            // (A P)_{ij} + (P A^T)_{ij} = sum_k a_ik p_kj + p_ik a_jk
            for (Eigen::Index k = 0; k < n; ++k) {
                lhs(row, slot(k, j)) += a(i, k);
                lhs(row, slot(i, k)) += a(j, k);
            }
            rhs(row) = -0.5 * (q(i, j) + q(j, i));
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    Eigen::VectorXd sol = lu.solve(rhs);

    auto unpack = [&](const Eigen::VectorXd& v) {
        Eigen::MatrixXd p(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) p(i, j) = v(slot(i, j));
        return p;
    };
    const double qnorm = std::max(q.norm(), std::numeric_limits<double>::min());
    Eigen::MatrixXd p = unpack(sol);
    Eigen::MatrixXd res = a * p + p * a.transpose() + q;
    // one round of iterative refinement
    if (res.norm() > 1e-13 * qnorm) {
        sol += lu.solve(rhs - lhs * sol);
        p = unpack(sol);
        res = a * p + p * a.transpose() + q;
    }
    if (!(res.norm() < 1e-10 * qnorm)) {
        throw NumericalError("Lyapunov solve is ill-conditioned: relative residual " +
                             format_number(res.norm() / qnorm));
    }
    return p;
}

CovarianceMatrix steady_state_covariance(const StateSpace& ss) {
    const HurwitzResult h = is_hurwitz(ss);
    if (!h.stable) {
        throw UnstableError("no steady state: A is not Hurwitz (max real eigenvalue " +
                                format_number(h.max_real_eig) + ")",
                            h.max_real_eig);
    }
    return {solve_lyapunov(ss.a, ss.b * ss.b.transpose()), std::nullopt};
}

std::vector<CovarianceMatrix> lyapunov_trajectory(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                                                  const Eigen::MatrixXd& p0, double t_end, double dt,
                                                  const IntegratorOptions& opts) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw ValidationError("trajectory needs dt > 0 and t_end >= 0");
    if ((p0 - p0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, p0.cwiseAbs().maxCoeff())) {
        throw ValidationError("initial covariance must be symmetric");
    }
    const auto samples = static_cast<long>(std::floor(t_end / dt * (1.0 + 1e-12))) + 1;

    auto rhs = [&](const Eigen::MatrixXd& p) -> Eigen::MatrixXd {
        Eigen::MatrixXd ap = a * p;
        return ap + ap.transpose() + q;
    };

    // Dormand-Prince 5(4) tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2;
    (void)c3;
    (void)c4;
    (void)c5;

    std::vector<CovarianceMatrix> out;
    out.reserve(static_cast<std::size_t>(samples));
    out.push_back({p0, 0.0});

    Eigen::MatrixXd p = p0;
    Eigen::MatrixXd k1 = rhs(p);
    double t = 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
    double h = std::min(dt, 0.01 / scale);
    for (long s = 1; s < samples; ++s) {
        const double target = static_cast<double>(s) * dt;
        while (t < target) {
            bool last = false;
            if (t + h >= target) {
                h = target - t;
                last = true;
            }
            if (h < 1e-6 * std::numeric_limits<double>::epsilon() * std::max(target, dt) || !std::isfinite(h)) {
                throw NumericalError("step size collapsed at t = " + format_number(t));
            }
            const Eigen::MatrixXd k2 = rhs(p + h * (a21 * k1));
            const Eigen::MatrixXd k3 = rhs(p + h * (a31 * k1 + a32 * k2));
            const Eigen::MatrixXd k4 = rhs(p + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const Eigen::MatrixXd k5 = rhs(p + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Eigen::MatrixXd k6 = rhs(p + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Eigen::MatrixXd pn = p + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Eigen::MatrixXd k7 = rhs(pn);
            const Eigen::MatrixXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const Eigen::ArrayXXd tol =
                opts.abs_tol + opts.rel_tol * p.cwiseAbs().array().max(pn.cwiseAbs().array());
            const double ratio = (err.cwiseAbs().array() / tol).maxCoeff();
            if (ratio <= 1.0) {
                t = last ? target : t + h;
                p = pn;
                k1 = k7;
            }
            const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
            if (ratio <= 1.0 && last) {
                // keep the pre-clamp step size for the next interval
                h = std::max(h, std::min(dt, h * factor));
            } else {
                h *= factor;
            }
        }
        Eigen::MatrixXd sym = 0.5 * (p + p.transpose());
        p = sym;
        out.push_back({std::move(sym), target});
    }
    return out;
}

std::vector<CovarianceMatrix> covariance_trajectory(const StateSpace& ss, const Eigen::MatrixXd& p0, double t_end,
                                                    double dt, const IntegratorOptions& opts) {
    return lyapunov_trajectory(ss.a, ss.b * ss.b.transpose(), p0, t_end, dt, opts);
}

std::string label(const Mode& m) {
    const std::string stem = m.kind == ModeKind::a ? "a" : "b";
    return m.collective() ? stem + "_c" : stem + std::to_string(m.index);
}

Eigen::Matrix4d collective_covariance(const Eigen::MatrixXd& p, int n_nopas) {
    if (n_nopas < 1 || p.rows() != 4 * n_nopas || p.cols() != 4 * n_nopas) {
        throw ValidationError("covariance size does not match the number of NOPAs");
    }
    Eigen::MatrixXd m(4, 4 * n_nopas);
    for (int i = 0; i < n_nopas; ++i) m.block<4, 4>(0, 4 * i) = Eigen::Matrix4d::Identity();
    m /= std::sqrt(static_cast<double>(n_nopas));
    return m * p * m.transpose();
}

Eigen::Matrix4d mode_pair_submatrix(const Eigen::MatrixXd& p, const Mode& first, const Mode& second) {
    if (p.rows() != p.cols() || p.rows() % 4 != 0 || p.rows() == 0) {
        throw ValidationError("covariance must be a square 4N x 4N matrix");
    }
    const int n = static_cast<int>(p.rows() / 4);
    if (first.collective() || second.collective()) {
        if (!(first.collective() && second.collective())) {
            throw ValidationError("collective modes can only be paired with each other");
        }
        if (first.kind == second.kind) throw ValidationError("mode pair must consist of distinct modes");
        const Eigen::Matrix4d pc = collective_covariance(p, n);
        if (first.kind == ModeKind::a) return pc;
        Eigen::Matrix4d swapped;
        swapped << pc.block<2, 2>(2, 2), pc.block<2, 2>(2, 0), pc.block<2, 2>(0, 2), pc.block<2, 2>(0, 0);
        return swapped;
    }
    if (first.kind == second.kind && first.index == second.index) {
        throw ValidationError("mode pair must consist of distinct modes");
    }
    const int i1 = state_index(first.kind, first.index, n);
    const int i2 = state_index(second.kind, second.index, n);
    const int idx[4] = {i1, i1 + 1, i2, i2 + 1};
    Eigen::Matrix4d out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(r, c) = p(idx[r], idx[c]);
    return out;
}

NegativityReport log_negativity(const Eigen::Matrix4d& p4) {
    const Eigen::Matrix2d p1 = p4.block<2, 2>(0, 0);
    const Eigen::Matrix2d p2 = p4.block<2, 2>(0, 2);
    const Eigen::Matrix2d p3 = p4.block<2, 2>(2, 2);
    const double delta = p1.determinant() + p3.determinant() - 2.0 * p2.determinant();
    const double det = p4.determinant();
    double radicand = delta * delta - 4.0 * det;
    if (radicand < 0.0) {
        if (radicand < -1e-12 * std::max(1.0, delta * delta)) {
            throw NumericalError("unphysical two-mode covariance: negative radicand " + format_number(radicand));
        }
        radicand = 0.0;
    }
    const double inner = 0.5 * (delta - std::sqrt(radicand));
    if (inner < 0.0) throw NumericalError("unphysical two-mode covariance: negative symplectic quantity");
    NegativityReport r;
    r.nu = std::sqrt(inner);
    r.e_value = r.nu >= 1.0 - 1e-12 ? 0.0 : -std::log2(r.nu);
    return r;
}

std::vector<std::pair<Mode, Mode>> tracked_pairs(int n_nopas) {
    std::vector<std::pair<Mode, Mode>> out;
    auto add = [&out](Mode m1, Mode m2) {
        for (const auto& [f, s] : out) {
            if (f.kind == m1.kind && f.index == m1.index && s.kind == m2.kind && s.index == m2.index) return;
        }
        out.emplace_back(m1, m2);
    };
    const int n = n_nopas;
    add({ModeKind::a, 0}, {ModeKind::b, 0});
    for (int i = 1; i <= n; ++i) add({ModeKind::a, i}, {ModeKind::b, i});
    for (int i = 1; i < n; ++i) add({ModeKind::a, i}, {ModeKind::b, i + 1});
    for (int i = 1; i < n; ++i) add({ModeKind::a, i + 1}, {ModeKind::b, i});
    add({ModeKind::a, 1}, {ModeKind::b, n});
    add({ModeKind::a, n}, {ModeKind::b, 1});
    return out;
}

NegativityReport pair_negativity(const Eigen::MatrixXd& p, int n_nopas, const Mode& first, const Mode& second) {
    if (p.rows() != 4 * n_nopas) throw ValidationError("covariance size does not match the number of NOPAs");
    NegativityReport r = log_negativity(mode_pair_submatrix(p, first, second));
    r.first = first;
    r.second = second;
    r.pair_label = "E(" + label(first) + "," + label(second) + ")";
    return r;
}

std::vector<NegativityReport> negativity_suite(const NetworkConfig& config) {
    const CovarianceMatrix cov = steady_state_covariance(assemble_state_space(config));
    std::vector<NegativityReport> out;
    for (const auto& [m1, m2] : tracked_pairs(config.n_nopas)) {
        out.push_back(pair_negativity(cov.p, config.n_nopas, m1, m2));
    }
    return out;
}

NegativityTrajectory negativity_trajectory(const NetworkConfig& config, double t_end, double dt,
                                           const IntegratorOptions& opts) {
    const StateSpace ss = assemble_state_space(config);
    const int n = config.n_nopas;
    const auto traj = covariance_trajectory(ss, Eigen::MatrixXd::Identity(4 * n, 4 * n), t_end, dt, opts);
    const auto pairs = tracked_pairs(n);
    NegativityTrajectory out;
    out.values.assign(pairs.size(), {});
    for (const auto& [m1, m2] : pairs) out.labels.push_back("E(" + label(m1) + "," + label(m2) + ")");
    for (const CovarianceMatrix& c : traj) {
        out.times.push_back(*c.time);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            out.values[k].push_back(pair_negativity(c.p, n, pairs[k].first, pairs[k].second).e_value);
        }
    }
    return out;
}

NetworkConfig equal_power_lossless_config(int n_nopas, double x_ref, int n_ref) {
    NetworkOptions o;
    o.n_nopas = n_nopas;
    o.x = std::sqrt(static_cast<double>(n_ref) / n_nopas) * x_ref;
    o.losses = LossScenario::lossless;
    return make_network(o);
}

}  // namespace nopa
