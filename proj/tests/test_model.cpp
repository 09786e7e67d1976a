#include "helpers.hpp"

#include "nopa/errors.hpp"
#include "nopa/model.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace nopa;
using nopa::test::chain;

TEST_SUITE("model") {

TEST_CASE("make_params") {
    const NopaParams p = make_params(0.5, 1.0, false);
    CHECK(p.kappa == 0.0);
    CHECK(p.epsilon == doctest::Approx(3.6e7));
    CHECK(p.gamma == doctest::Approx(kGammaRef));

    const NopaParams q = make_params(0.13, 1.0, true);
    CHECK(q.kappa == doctest::Approx(3e6 / (0.6 * std::sqrt(2.0)) * 0.13).epsilon(1e-14));
    CHECK(q.kappa == doctest::Approx(4.596e5).epsilon(1e-3));

    CHECK(make_params(0.2, 0.5, false).gamma == doctest::Approx(2 * kGammaRef));
    CHECK_THROWS_AS(make_params(1.5, 1.0, false), ValidationError);
    CHECK_THROWS_AS(make_params(-0.1, 1.0, false), ValidationError);
    CHECK_THROWS_AS(make_params(0.2, 0.0, false), ValidationError);
}

TEST_CASE("transmission rate and delay") {
    CHECK(transmission_rate(1.0, 2) == doctest::Approx(0.97724).epsilon(1e-5));
    CHECK(transmission_rate(0.0, 5) == 1.0);
    CHECK(transmission_rate(1.0, 6) == doctest::Approx(0.99540).epsilon(1e-5));
    CHECK_THROWS_AS(transmission_rate(1.0, 1), ValidationError);
    CHECK_THROWS_AS(transmission_rate(-1.0, 3), ValidationError);
    CHECK(segment_delay(1.0, 2) == doctest::Approx(1.0 / 3e5));
    CHECK(segment_delay(1.0, 4) == doctest::Approx(1.0 / 9e5));
}

TEST_CASE("loss scenario names") {
    for (LossScenario s : nopa::test::kAllScenarios) CHECK(loss_scenario_from_string(to_string(s)) == s);
    CHECK(loss_scenario_from_string("both") == LossScenario::transmission_and_amplification);
    CHECK(loss_scenario_from_string("transmission") == LossScenario::transmission_only);
    CHECK(loss_scenario_from_string("none") == LossScenario::lossless);
    CHECK_THROWS_AS(loss_scenario_from_string("lossy"), ValidationError);
}

TEST_CASE("phase defaults") {
    CHECK(theta_defaults(4).theta_a == 0.0);
    CHECK(theta_defaults(4).theta_b == 0.0);
    CHECK(theta_defaults(5).theta_a == doctest::Approx(std::numbers::pi));
    CHECK(theta_defaults(5).theta_b == 0.0);
    const NetworkConfig c = chain(3, 0.1);
    CHECK(c.theta_a == doctest::Approx(std::numbers::pi));
    NetworkOptions o;
    o.n_nopas = 3;
    o.theta_a = 0.25;
    CHECK(make_network(o).theta_a == 0.25);
}

TEST_CASE("network configuration") {
    CHECK_THROWS_AS(chain(1, 0.1), ValidationError);
    const NetworkConfig c = chain(4, 0.1, LossScenario::transmission_and_amplification, true);
    CHECK(c.alpha == doctest::Approx(std::pow(10.0, -0.01 / 3)));
    CHECK(c.alpha * c.alpha + c.beta * c.beta == doctest::Approx(1.0));
    CHECK(c.tau == doctest::Approx(1.0 / 9e5));
    CHECK(c.scenario() == LossScenario::transmission_and_amplification);
    CHECK(chain(4, 0.1).alpha == 1.0);
    CHECK(chain(4, 0.1).tau == 0.0);
}

TEST_CASE("index maps") {
    CHECK(state_index(ModeKind::a, 1, 2) == 0);
    CHECK(state_index(ModeKind::b, 1, 2) == 2);
    CHECK(state_index(ModeKind::b, 6, 6) == 22);
    CHECK_THROWS_AS(state_index(ModeKind::a, 3, 2), ValidationError);
    const auto s = state_labels(2);
    REQUIRE(s.size() == 8);
    CHECK(s[0] == "a_q[1]");
    CHECK(s[7] == "b_p[2]");
    for (int n = 2; n <= 6; ++n) {
        const auto in = input_labels(n);
        REQUIRE(in.size() == static_cast<std::size_t>(8 * n));
        CHECK(in[input_index_in_a(n)] == "xi_in_a_q[1]");
        CHECK(in[input_index_in_b(n)] == "xi_in_b_q[" + std::to_string(n) + "]");
        for (int i = 1; i <= n; ++i) {
            CHECK(in[input_index_loss(ModeKind::a, i, n)] == "xi_loss_a_q[" + std::to_string(i) + "]");
            CHECK(in[input_index_loss(ModeKind::b, i, n)] == "xi_loss_b_q[" + std::to_string(i) + "]");
        }
        for (int j = 1; j < n; ++j) CHECK(in[input_index_bs(ModeKind::a, j, n)] == "xi_BS_a_q[" + std::to_string(j) + "]");
        for (int j = 2; j <= n; ++j) CHECK(in[input_index_bs(ModeKind::b, j, n)] == "xi_BS_b_q[" + std::to_string(j) + "]");
    }
    CHECK_THROWS_AS(input_index_bs(ModeKind::a, 3, 3), ValidationError);
    CHECK_THROWS_AS(input_index_bs(ModeKind::b, 1, 3), ValidationError);
    CHECK(output_labels().size() == 4);
}

TEST_CASE("single NOPA block") {
    const NopaParams p = make_params(0.3, 1.0, true);
    const StateSpace b = nopa_block(p);
    const double m = -(p.gamma + p.kappa) / 2;
    const double e = p.epsilon / 2;
    Eigen::Matrix4d expected;
    expected << m, 0, e, 0, 0, m, 0, -e, e, 0, m, 0, 0, -e, 0, m;
    CHECK((b.a - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("beamsplitter and rotation blocks") {
    const auto bs = beamsplitter_block(1.0);
    CHECK(bs.block<2, 2>(0, 0).isIdentity());
    CHECK(bs.block<2, 2>(0, 2).isZero());
    const auto bs2 = beamsplitter_block(0.9);
    CHECK(bs2(0, 2) == doctest::Approx(std::sqrt(1 - 0.81)));
    const Eigen::Matrix2d r = phase_rotation(std::numbers::pi / 2);
    CHECK(r(0, 1) == doctest::Approx(-1.0));
    CHECK(r(1, 0) == doctest::Approx(1.0));
    CHECK((commutation_matrix(2) * commutation_matrix(2)).isApprox(-4 * Eigen::Matrix4d::Identity()));
}

TEST_CASE("block form of A") {
    const NetworkConfig c = chain(2, 0.0);
    const StateSpace ss = assemble_state_space(c);
    REQUIRE(ss.a.rows() == 8);
    REQUIRE(ss.b.cols() == 16);
    CHECK((ss.a.diagonal().array() + c.nopa.gamma / 2).abs().maxCoeff() < 1e-6);
    CHECK(pump_coupling(c).isZero());
    // zero pump: only feedback couplings a_2 <- a_1 and b_1 <- b_2
    CHECK(ss.a(state_index(ModeKind::a, 2, 2), state_index(ModeKind::a, 1, 2)) == doctest::Approx(-c.nopa.gamma));
    CHECK(ss.a(state_index(ModeKind::b, 1, 2), state_index(ModeKind::b, 2, 2)) == doctest::Approx(-c.nopa.gamma));
    CHECK(ss.a(state_index(ModeKind::a, 1, 2), state_index(ModeKind::a, 2, 2)) == 0.0);
}

TEST_CASE("physical realizability and D D^T") {
    for (int n = 2; n <= 6; ++n) {
        for (LossScenario s : nopa::test::kAllScenarios) {
            for (double x : {0.0, 0.07, 0.12}) {
                const StateSpace ss = assemble_state_space(chain(n, x, s));
                const Eigen::MatrixXd th = commutation_matrix(2 * n);
                const Eigen::MatrixXd th_in = commutation_matrix(4 * n);
                const Eigen::MatrixXd r = ss.a * th + th * ss.a.transpose() + ss.b * th_in * ss.b.transpose();
                CHECK(r.cwiseAbs().maxCoeff() < 1e-10 * kGammaRef);
                CHECK((ss.d * ss.d.transpose() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}

TEST_CASE("cross-construction agreement") {
    for (int n = 2; n <= 6; ++n) {
        for (LossScenario s : nopa::test::kAllScenarios) {
            const NetworkConfig c = chain(n, 0.6 * std::tan(std::numbers::pi / (4 * n)), s);
            const StateSpace a = assemble_state_space(c);
            const StateSpace b = compose_by_interconnection(c);
            CAPTURE(n);
            CHECK(nopa::test::rel_diff(b.a, a.a) < 1e-12);
            CHECK(nopa::test::rel_diff(b.b, a.b) < 1e-12);
            CHECK(nopa::test::rel_diff(b.c, a.c) < 1e-12);
            CHECK(nopa::test::rel_diff(b.d, a.d) < 1e-12);
            CHECK(b.input_labels == a.input_labels);
        }
    }
    CHECK_THROWS_AS(compose_by_interconnection(chain(3, 0.1, LossScenario::lossless, true)), ValidationError);
}

TEST_CASE("A minus pump coupling has a single eigenvalue") {
    for (int n = 2; n <= 6; ++n) {
        const NetworkConfig c = chain(n, 0.1, LossScenario::transmission_and_amplification);
        const Eigen::MatrixXd a0 = assemble_state_space(c).a - pump_coupling(c);
        const double m = -(c.nopa.gamma + c.nopa.kappa) / 2;
        // a0 - m I is nilpotent: the eigenvalue m is defective, so test the power
        Eigen::MatrixXd shifted = a0 - m * Eigen::MatrixXd::Identity(a0.rows(), a0.cols());
        shifted /= shifted.norm();
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(a0.rows(), a0.cols());
        for (Eigen::Index k = 0; k < a0.rows(); ++k) power = power * shifted;
        CHECK(power.norm() < 1e-12);
        CHECK(a0.trace() == doctest::Approx(m * a0.rows()).epsilon(1e-12));
    }
}

TEST_CASE("frequency matrices") {
    const NetworkConfig c = chain(3, 0.15, LossScenario::transmission_and_amplification, true);
    NetworkConfig c0 = c;
    c0.tau = 0.0;
    const StateSpace ss = assemble_state_space(c0);
    const FrequencyMatrices f0 = assemble_frequency_matrices(c, 0.0);
    CHECK((f0.a - ss.a.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((f0.b - ss.b.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((f0.d - ss.d.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-12);

    const FrequencyMatrices fz = assemble_frequency_matrices(c0, 3.7e6);
    CHECK((fz.a - ss.a.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-6);

    // unit-modulus delay factors: magnitudes unchanged entrywise
    const FrequencyMatrices fw = assemble_frequency_matrices(c, 1e6);
    CHECK((fw.a.cwiseAbs() - ss.a.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((fw.b.cwiseAbs() - ss.b.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((fw.c.cwiseAbs() - ss.c.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
    const int a2 = state_index(ModeKind::a, 2, 3);
    const int a1 = state_index(ModeKind::a, 1, 3);
    const std::complex<double> expected = ss.a(a2, a1) * std::exp(std::complex<double>(0.0, -1e6 * c.tau));
    CHECK(std::abs(fw.a(a2, a1) - expected) < 1e-6);
}

}  // TEST_SUITE
