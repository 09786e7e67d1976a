#include "helpers.hpp"
#include "reference_tables.hpp"

#include "nopa/errors.hpp"
#include "nopa/gaussian.hpp"
#include "nopa/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace nopa;
using nopa::test::chain;

namespace {

std::map<std::string, double> suite_by_label(int n) {
    std::map<std::string, double> out;
    for (const NegativityReport& r : negativity_suite(equal_power_lossless_config(n))) out[r.pair_label] = r.e_value;
    return out;
}

Eigen::Matrix4d two_mode_squeezed(double r) {
    Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
    p.diagonal().setConstant(std::cosh(r));
    p(0, 2) = p(2, 0) = std::sinh(r);
    p(1, 3) = p(3, 1) = -std::sinh(r);
    return p;
}

}  // namespace

TEST_SUITE("gaussian") {

TEST_CASE("Lyapunov solver residual") {
    for (int n = 2; n <= 6; ++n) {
        for (LossScenario s : nopa::test::kAllScenarios) {
            const StateSpace ss = assemble_state_space(chain(n, std::sqrt(6.0 / n) * 0.13, s));
            const CovarianceMatrix p = steady_state_covariance(ss);
            const Eigen::MatrixXd q = ss.b * ss.b.transpose();
            CHECK((ss.a * p.p + p.p * ss.a.transpose() + q).norm() < 1e-10 * q.norm());
            CHECK((p.p - p.p.transpose()).cwiseAbs().maxCoeff() < 1e-12 * p.p.cwiseAbs().maxCoeff());
            CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.p).eigenvalues().minCoeff() > 0.0);
            CHECK_FALSE(p.time.has_value());
        }
    }
}

TEST_CASE("vacuum is the steady state of a passive chain") {
    for (LossScenario s : nopa::test::kAllScenarios) {
        const StateSpace ss = assemble_state_space(chain(4, 0.0, s));
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(16, 16);
        const Eigen::MatrixXd q = ss.b * ss.b.transpose();
        CHECK((ss.a + ss.a.transpose() + q).norm() < 1e-12 * q.norm());
        CHECK((steady_state_covariance(ss).p - id).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("unstable chains have no steady state") {
    CHECK_THROWS_AS(steady_state_covariance(assemble_state_space(chain(2, 0.5))), UnstableError);
}

TEST_CASE("scalar Lyapunov differential equation") {
    const Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd q = 2 * Eigen::MatrixXd::Identity(2, 2);
    const auto traj = lyapunov_trajectory(a, q, Eigen::MatrixXd::Zero(2, 2), 1.0, 0.25);
    REQUIRE(traj.size() == 5);
    for (const CovarianceMatrix& c : traj) {
        const double expected = 1.0 - std::exp(-2.0 * *c.time);
        CHECK(std::abs(c.p(0, 0) - expected) < 1e-8);
        CHECK(std::abs(c.p(1, 1) - expected) < 1e-8);
        CHECK(std::abs(c.p(0, 1)) < 1e-12);
    }
    CHECK(*traj.back().time == doctest::Approx(1.0));
}

TEST_CASE("trajectory starts from p0") {
    const StateSpace ss = assemble_state_space(chain(3, 0.2));
    Eigen::MatrixXd p0 = Eigen::MatrixXd::Identity(12, 12);
    p0(0, 5) = p0(5, 0) = 0.25;
    const auto traj = covariance_trajectory(ss, p0, 1e-9, 1e-10);
    REQUIRE(traj.size() == 11);
    CHECK(traj.front().p == p0);
    CHECK(*traj.front().time == 0.0);
    CHECK_THROWS_AS(covariance_trajectory(ss, p0, 1e-9, 0.0), ValidationError);
}

TEST_CASE("ODE converges to the algebraic steady state") {
    for (int n = 2; n <= 6; ++n) {
        const StateSpace ss = assemble_state_space(equal_power_lossless_config(n));
        const Eigen::MatrixXd p_inf = steady_state_covariance(ss).p;
        const int dim = static_cast<int>(ss.a.rows());
        // near the threshold the slowest mode decays over microseconds
        const double t_end = std::max(1e-6, 30.0 / -is_hurwitz(ss).max_real_eig);
        const auto traj = covariance_trajectory(ss, Eigen::MatrixXd::Identity(dim, dim), t_end, t_end / 200);
        CHECK((traj.back().p - p_inf).cwiseAbs().maxCoeff() < 1e-6);

        // tail distance to the steady state decreases monotonically down to
        // the integrator noise floor
        const double floor = 1e-7 * p_inf.norm();
        double prev = 1e300;
        for (std::size_t i = traj.size() / 30; i < traj.size() && prev > floor; ++i) {
            const double d = (traj[i].p - p_inf).norm();
            CHECK(d < prev);
            prev = d;
        }
    }
}

TEST_CASE("log negativity of known states") {
    const NegativityReport vac = log_negativity(Eigen::Matrix4d::Identity());
    CHECK(vac.nu == doctest::Approx(1.0));
    CHECK(vac.e_value == 0.0);

    const NegativityReport tms = log_negativity(two_mode_squeezed(1.0));
    CHECK(tms.nu == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(tms.e_value == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-12));

    for (double r : {0.1, 0.5, 2.0}) {
        CHECK(log_negativity(two_mode_squeezed(r)).e_value == doctest::Approx(r / std::log(2.0)).epsilon(1e-10));
    }

    Eigen::Matrix4d bad = Eigen::Matrix4d::Identity();
    bad(0, 2) = bad(2, 0) = 5.0;
    bad(1, 3) = bad(3, 1) = 5.0;
    CHECK_THROWS_AS(log_negativity(bad), NumericalError);
}

TEST_CASE("mode submatrices") {
    const int n = 6;
    Eigen::MatrixXd p(4 * n, 4 * n);
    for (int i = 0; i < 4 * n; ++i) {
        for (int j = 0; j < 4 * n; ++j) p(i, j) = 100.0 * i + j;
    }
    const Eigen::Matrix4d s = mode_pair_submatrix(p, {ModeKind::a, 1}, {ModeKind::b, 6});
    const int rows[] = {0, 1, 22, 23};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) CHECK(s(i, j) == p(rows[i], rows[j]));
    }

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4 * n, 4 * n);
    CHECK(mode_pair_submatrix(id, {ModeKind::a, 3}, {ModeKind::b, 2}) == Eigen::Matrix4d::Identity());
    CHECK(collective_covariance(id, n).isApprox(Eigen::Matrix4d::Identity(), 1e-15));

    // swapping the modes permutes the blocks
    const Eigen::Matrix4d fwd = mode_pair_submatrix(p, {ModeKind::a, 2}, {ModeKind::b, 5});
    const Eigen::Matrix4d rev = mode_pair_submatrix(p, {ModeKind::b, 5}, {ModeKind::a, 2});
    CHECK(fwd.topLeftCorner<2, 2>() == rev.bottomRightCorner<2, 2>());
    CHECK(fwd.topRightCorner<2, 2>() == rev.bottomLeftCorner<2, 2>());

    CHECK_THROWS_AS(mode_pair_submatrix(p, {ModeKind::a, 7}, {ModeKind::b, 1}), ValidationError);
    CHECK_THROWS_AS(mode_pair_submatrix(p, {ModeKind::a, 1}, {ModeKind::a, 1}), ValidationError);
    CHECK(label({ModeKind::b, 0}) == "b_c");
    CHECK(label({ModeKind::a, 4}) == "a4");
}

TEST_CASE("tracked pairs") {
    const auto pairs = tracked_pairs(2);
    REQUIRE(pairs.size() == 5);
    CHECK(pairs.front().first.collective());
    CHECK(tracked_pairs(6).size() == 1 + 6 + 5 + 5 + 1 + 1);
}

TEST_CASE("steady-state negativities match the table") {
    std::map<int, std::map<std::string, double>> computed;
    for (int n = 2; n <= 6; ++n) computed[n] = suite_by_label(n);
    for (const auto& e : nopa::test::negativity_table()) {
        CAPTURE(e.n);
        CAPTURE(e.pair);
        REQUIRE(computed[e.n].count(e.pair) == 1);
        const double v = computed[e.n][e.pair];
        if (e.e == 0.0) {
            CHECK(v == 0.0);
        } else {
            CHECK(std::abs(v - e.e) < 5e-4);
        }
    }
}

TEST_CASE("entanglement synchronisation and mirror symmetry") {
    for (int n = 2; n <= 6; ++n) {
        auto e = suite_by_label(n);
        const std::string i = std::to_string(n);
        const double e11 = e["E(a1,b1)"];
        for (int k = 2; k <= n; ++k) {
            const std::string s = std::to_string(k);
            CHECK(std::abs(e["E(a" + s + ",b" + s + ")"] - e11) < 1e-6);
        }
        for (int k = 0; k + 1 < n; ++k) {
            const double lhs = e["E(a" + std::to_string(1 + k) + ",b1)"];
            const double rhs = e["E(a" + i + ",b" + std::to_string(n - k) + ")"];
            CHECK(std::abs(lhs - rhs) < 1e-6);
        }
    }
}

TEST_CASE("intra-NOPA entanglement falls with N at equal power") {
    double prev = 1e9;
    for (int n = 2; n <= 6; ++n) {
        const double e = suite_by_label(n)["E(a1,b1)"];
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("separable pairs stay separable along the trajectory") {
    for (int n = 2; n <= 6; ++n) {
        const NegativityTrajectory t = negativity_trajectory(equal_power_lossless_config(n), 2e-7, 1e-9);
        REQUIRE(t.times.size() == 201);
        for (std::size_t k = 0; k < t.labels.size(); ++k) {
            const std::string& l = t.labels[k];
            bool separable = l == "E(a1,b" + std::to_string(n) + ")";
            for (int i = 1; i < n; ++i) {
                separable = separable || l == "E(a" + std::to_string(i) + ",b" + std::to_string(i + 1) + ")";
            }
            if (!separable) continue;
            for (double v : t.values[k]) CHECK(v == 0.0);
        }
    }
}

TEST_CASE("collective entanglement is transient for even N") {
    for (int n : {2, 4, 6}) {
        const NegativityTrajectory t = negativity_trajectory(equal_power_lossless_config(n), 2e-7, 1e-10);
        REQUIRE(t.times.size() == 2001);
        REQUIRE(t.labels.front() == "E(a_c,b_c)");
        const auto& ec = t.values.front();
        double peak = 0.0;
        for (double v : ec) peak = std::max(peak, v);
        CHECK(peak > 1e-3);
        CHECK(ec.front() == 0.0);
        CHECK(ec.back() < 1e-6);
    }
    const NegativityTrajectory odd = negativity_trajectory(equal_power_lossless_config(3), 2e-7, 1e-9);
    CHECK(odd.values.front().back() == doctest::Approx(0.0561).epsilon(1e-2));
}

TEST_CASE("equal-power configuration") {
    const NetworkConfig c = equal_power_lossless_config(2);
    CHECK(c.nopa.x == doctest::Approx(std::sqrt(3.0) * 0.13));
    CHECK(c.scenario() == LossScenario::lossless);
    CHECK(equal_power_lossless_config(6).nopa.x == 0.13);
}

}  // TEST_SUITE
