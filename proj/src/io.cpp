#include "nopa/io.hpp"

#include "nopa/errors.hpp"
#include "nopa/format.hpp"
#include "nopa/version.hpp"

#include <sstream>

namespace nopa {

namespace {

Json complex_json(std::complex<double> z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

const char* mode_kind_name(ModeKind k) { return k == ModeKind::a ? "a" : "b"; }

}  // namespace

Json to_json(const NetworkConfig& c) {
    Json j;
    j["n_nopas"] = c.n_nopas;
    j["x"] = c.nopa.x;
    j["y"] = c.nopa.y;
    j["gamma_r"] = c.nopa.gamma_r;
    j["gamma"] = c.nopa.gamma;
    j["epsilon"] = c.nopa.epsilon;
    j["kappa"] = c.nopa.kappa;
    j["loss_scenario"] = to_string(c.scenario());
    j["transmission_on"] = c.transmission_on;
    j["amplification_loss_on"] = c.amplification_loss_on;
    j["distance_km"] = c.distance_km;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["tau"] = c.tau;
    j["theta_a"] = c.theta_a;
    j["theta_b"] = c.theta_b;
    return j;
}

NetworkConfig network_config_from_json(const Json& j) {
    try {
        NetworkOptions o;
        o.n_nopas = j.at("n_nopas").get<int>();
        o.x = j.at("x").get<double>();
        o.y = j.value("y", 1.0);
        o.losses = loss_scenario_from_string(j.value("loss_scenario", std::string("lossless")));
        o.distance_km = j.value("distance_km", 1.0);
        const double tau = j.value("tau", 0.0);
        if (tau > 0.0) {
            o.delays = true;
            o.tau = tau;
        }
        if (j.contains("theta_a")) o.theta_a = j.at("theta_a").get<double>();
        if (j.contains("theta_b")) o.theta_b = j.at("theta_b").get<double>();
        return make_network(o);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed network configuration: ") + e.what());
    }
}

Metadata config_metadata(const NetworkConfig& c) {
    Metadata m;
    const Json j = to_json(c);
    for (const auto& [k, v] : j.items()) {
        if (v.is_number_float()) {
            m.emplace_back(k, format_csv(v.get<double>()));
        } else if (v.is_string()) {
            m.emplace_back(k, v.get<std::string>());
        } else {
            m.emplace_back(k, v.dump());
        }
    }
    return m;
}

Json index_map_json(int n_nopas) {
    Json j;
    j["n_nopas"] = n_nopas;
    j["states"] = state_labels(n_nopas);
    j["inputs"] = input_labels(n_nopas);
    j["outputs"] = output_labels();
    return j;
}

Json to_json(const HurwitzResult& h) {
    return Json{{"stable", h.stable}, {"max_real_eig", h.max_real_eig}, {"marginal", h.marginal}};
}

Json to_json(const StabilityReport& r) {
    Json probes = Json::array();
    for (const ProbeRecord& p : r.max_real_eig_at) probes.push_back({{"x", p.x}, {"max_real_eig", p.max_real_eig}});
    return Json{{"n_nopas", r.n_nopas},
                {"loss_scenario", to_string(r.loss_scenario)},
                {"x_th", r.x_th},
                {"method", to_string(r.method)},
                {"stable_on_full_range", r.stable_on_full_range},
                {"max_real_eig_at", probes}};
}

Json to_json(const DdeSpectrumReport& r) {
    Json history = Json::array();
    for (const auto& [order, z] : r.root_history) history.push_back({{"order", order}, {"root", complex_json(z)}});
    return Json{{"discretization_order", r.discretization_order},
                {"rightmost_root", complex_json(r.rightmost_root)},
                {"converged", r.converged},
                {"stable", r.stable},
                {"root_history", history}};
}

Json to_json(const SqueezingSpectrum& s) {
    return Json{{"config", to_json(s.config)}, {"delayed", s.delayed},   {"theta_a", s.theta_a},
                {"theta_b", s.theta_b},        {"omega_rad_s", s.omega_grid}, {"v_plus", s.v_plus},
                {"v_minus", s.v_minus},        {"v_sum", s.v_sum},        {"v_plus_db", s.v_plus_db},
                {"v_minus_db", s.v_minus_db},  {"v_sum_db", s.v_sum_db}};
}

Json to_json(const NegativityReport& r) {
    auto mode = [](const Mode& m) {
        return Json{{"kind", mode_kind_name(m.kind)}, {"index", m.index}, {"label", label(m)}};
    };
    return Json{{"pair", r.pair_label},
                {"first", mode(r.first)},
                {"second", mode(r.second)},
                {"nu", r.nu},
                {"e_value", r.e_value}};
}

Json to_json(const std::vector<NegativityReport>& reports) {
    Json arr = Json::array();
    for (const NegativityReport& r : reports) arr.push_back(to_json(r));
    return arr;
}

Json to_json(const SweepRow& r) {
    Json j{{"n_nopas", r.n_nopas}, {"loss_scenario", to_string(r.scenario)}, {"x", r.x},
           {"n_x2", r.n_x2},       {"v_pm_db", r.v_pm_db},                   {"v_db", r.v_db},
           {"v_pm_residual", r.v_pm_residual}};
    if (r.k) j["k"] = *r.k;
    return j;
}

Json to_json(const SweepResult& r) {
    Json rows = Json::array();
    for (const SweepRow& row : r.rows) rows.push_back(to_json(row));
    return Json{{"sweep_kind", to_string(r.kind)}, {"rows", rows}};
}

std::string threshold_table_csv(const std::vector<StabilityReport>& reports, const Metadata& metadata,
                                std::optional<int> decimals) {
    std::ostringstream os;
    for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
    os << "n,scenario,x_th\n";
    for (const StabilityReport& r : reports) {
        os << r.n_nopas << ',' << to_string(r.loss_scenario) << ','
           << (decimals ? format_fixed(r.x_th, *decimals) : format_csv(r.x_th)) << '\n';
    }
    return os.str();
}

std::string trajectory_csv(const NegativityTrajectory& t, const Metadata& metadata) {
    std::ostringstream os;
    for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
    os << 't';
    for (const std::string& l : t.labels) os << ',' << l;
    os << '\n';
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        os << format_csv(t.times[i]);
        for (const auto& col : t.values) os << ',' << format_csv(col[i]);
        os << '\n';
    }
    return os.str();
}

Json with_provenance(const Json& run_config, Json result) {
    return Json{{"toolkit_version", kToolkitVersion}, {"run_config", run_config}, {"result", std::move(result)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace nopa
