#pragma once

#include "nopa/model.hpp"

#include <Eigen/Dense>

#include <random>

namespace nopa::test {

inline NetworkConfig chain(int n, double x, LossScenario s = LossScenario::lossless, bool delays = false) {
    NetworkOptions o;
    o.n_nopas = n;
    o.x = x;
    o.losses = s;
    o.delays = delays;
    return make_network(o);
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

inline const LossScenario kAllScenarios[] = {LossScenario::lossless, LossScenario::transmission_only,
                                             LossScenario::transmission_and_amplification};

}  // namespace nopa::test
