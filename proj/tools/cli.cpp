#include "cli.hpp"

#include "nopa/errors.hpp"
#include "nopa/format.hpp"
#include "nopa/gaussian.hpp"
#include "nopa/spectra.hpp"
#include "nopa/stability.hpp"
#include "nopa/sweep.hpp"
#include "nopa/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace nopa::cli {

namespace {

template <typename T>
Json opt_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const RunConfig& rc) {
    Json j;
    j["command"] = rc.command;
    j["n"] = opt_json(rc.n_spec);
    j["scenarios"] = opt_json(rc.scenarios);
    j["lossless"] = rc.lossless;
    j["x"] = opt_json(rc.x);
    j["x_ref"] = rc.x_ref;
    j["n_ref"] = rc.n_ref;
    j["y"] = rc.y;
    j["distance"] = rc.distance_km;
    j["delay"] = rc.delay;
    j["tau"] = opt_json(rc.tau);
    j["theta_a"] = opt_json(rc.theta_a);
    j["theta_b"] = opt_json(rc.theta_b);
    j["omega_min"] = rc.omega_min;
    j["omega_max"] = rc.omega_max;
    j["omega_points"] = rc.omega_points;
    j["t_end"] = rc.t_end;
    j["dt"] = rc.dt;
    j["n_samples"] = rc.n_samples;
    j["refine"] = rc.refine;
    j["target"] = rc.target_db;
    j["kind"] = rc.kind;
    j["k_points"] = rc.k_points;
    j["dde_start_order"] = rc.dde_start_order;
    j["dde_max_order"] = rc.dde_max_order;
    j["paper_precision"] = rc.paper_precision;
    j["trajectory"] = rc.trajectory;
    j["sync_check"] = rc.sync_check;
    return j;
}

std::vector<int> parse_n_spec(const std::string& spec) {
    auto to_int = [&spec](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw ValidationError("malformed N specification '" + spec + "'");
        return v;
    };
    std::vector<int> out;
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const int lo = to_int(spec.substr(0, dots));
        const int hi = to_int(spec.substr(dots + 2));
        if (hi < lo) throw ValidationError("empty N range '" + spec + "'");
        for (int n = lo; n <= hi; ++n) out.push_back(n);
    } else {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(to_int(item));
    }
    if (out.empty()) throw ValidationError("empty N specification");
    for (int n : out) {
        if (n < 2) throw ValidationError("a chain needs N >= 2 NOPAs, got N = " + std::to_string(n));
    }
    return out;
}

std::vector<LossScenario> parse_scenarios(const std::string& spec) {
    if (spec == "all") {
        return {LossScenario::lossless, LossScenario::transmission_only,
                LossScenario::transmission_and_amplification};
    }
    std::vector<LossScenario> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(loss_scenario_from_string(item));
    if (out.empty()) throw ValidationError("empty scenario list");
    return out;
}

namespace {

class Runner {
public:
    Runner(const RunConfig& rc, std::ostream& out, std::ostream& err) : rc_(rc), out_(out), err_(err) {}

    int dispatch() {
        const std::string& c = rc_.command;
        if (c == "threshold") return threshold();
        if (c == "spectrum") return spectrum();
        if (c == "covariance") return covariance();
        if (c == "negativity") return negativity();
        if (c == "sweep") return sweep();
        if (c == "dde-check") return dde_check();
        throw ValidationError("unknown command '" + c + "'");
    }

private:
    std::vector<int> n_list(const char* fallback) const { return parse_n_spec(rc_.n_spec.value_or(fallback)); }

    int single_n() const {
        const auto ns = n_list("2");
        if (ns.size() != 1) throw ValidationError(rc_.command + " needs a single N");
        return ns.front();
    }

    std::vector<LossScenario> scenario_list(const char* fallback) const {
        if (rc_.lossless) {
            if (rc_.scenarios) throw ValidationError("--lossless conflicts with --scenarios");
            return {LossScenario::lossless};
        }
        return parse_scenarios(rc_.scenarios.value_or(fallback));
    }

    LossScenario single_scenario(const char* fallback = "lossless") const {
        const auto s = scenario_list(fallback);
        if (s.size() != 1) throw ValidationError(rc_.command + " needs a single loss scenario");
        return s.front();
    }

    NetworkConfig config(int n, LossScenario s, bool delays) const {
        NetworkOptions o;
        o.n_nopas = n;
        o.x = rc_.x.value_or(std::sqrt(static_cast<double>(rc_.n_ref) / n) * rc_.x_ref);
        o.y = rc_.y;
        o.losses = s;
        o.distance_km = rc_.distance_km;
        o.delays = delays;
        o.tau = rc_.tau;
        o.theta_a = rc_.theta_a;
        o.theta_b = rc_.theta_b;
        return make_network(o);
    }

    std::optional<int> db_decimals() const { return rc_.paper_precision ? std::optional<int>(4) : std::nullopt; }

    Metadata metadata(const NetworkConfig* cfg = nullptr) const {
        Metadata m{{"toolkit_version", kToolkitVersion}, {"run_config", to_json(rc_).dump()}};
        if (cfg) m.emplace_back("network_config", nopa::to_json(*cfg).dump());
        return m;
    }

    void emit(const std::string& primary, const Json& result) const {
        if (rc_.out) {
            write_file(*rc_.out, primary);
        } else {
            out_ << primary;
        }
        if (rc_.json) write_file(*rc_.json, dump(with_provenance(to_json(rc_), result)));
    }

    static void write_file(const std::string& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ValidationError("cannot open output file '" + path + "'");
        f << text;
        if (!f) throw ValidationError("failed writing output file '" + path + "'");
    }

    int threshold() {
        const auto reports = threshold_table(scenario_list("all"), n_list("2..6"), rc_.y, rc_.distance_km);
        Json arr = Json::array();
        for (const auto& r : reports) arr.push_back(nopa::to_json(r));
        emit(threshold_table_csv(reports, metadata()), Json{{"thresholds", arr}});
        return kOk;
    }

    int spectrum() {
        const NetworkConfig cfg = config(single_n(), single_scenario(), rc_.delay || rc_.tau.has_value());
        const auto grid = log_grid(rc_.omega_min, rc_.omega_max, rc_.omega_points);
        const SqueezingSpectrum s = squeezing_spectra(cfg, grid);
        emit(spectrum_to_csv(s, metadata(&cfg), db_decimals()), nopa::to_json(s));
        return kOk;
    }

    int covariance() {
        const int n = single_n();
        const NetworkConfig cfg = config(n, single_scenario(), false);
        const StateSpace ss = assemble_state_space(cfg);
        const CovarianceMatrix steady = steady_state_covariance(ss);
        const Eigen::MatrixXd q = ss.b * ss.b.transpose();
        const double residual = (ss.a * steady.p + steady.p * ss.a.transpose() + q).norm() / q.norm();
        const auto labels = state_labels(n);
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < steady.p.rows(); ++i) {
            Json row = Json::array();
            for (Eigen::Index j = 0; j < steady.p.cols(); ++j) row.push_back(steady.p(i, j));
            rows.push_back(std::move(row));
        }
        Json result{{"config", nopa::to_json(cfg)},
                    {"index_map", index_map_json(n)},
                    {"steady_state", rows},
                    {"lyapunov_relative_residual", residual}};

        std::ostringstream os;
        for (const auto& [k, v] : metadata(&cfg)) os << "# " << k << '=' << v << '\n';
        if (rc_.trajectory) {
            const auto traj = covariance_trajectory(ss, Eigen::MatrixXd::Identity(4 * n, 4 * n), rc_.t_end, rc_.dt);
            os << 't';
            for (int i = 0; i < 4 * n; ++i)
                for (int j = i; j < 4 * n; ++j) os << ",P[" << labels[i] << ';' << labels[j] << ']';
            os << '\n';
            for (const CovarianceMatrix& c : traj) {
                os << format_csv(*c.time);
                for (int i = 0; i < 4 * n; ++i)
                    for (int j = i; j < 4 * n; ++j) os << ',' << format_csv(c.p(i, j));
                os << '\n';
            }
        } else {
            os << "state";
            for (const auto& l : labels) os << ',' << l;
            os << '\n';
            for (int i = 0; i < 4 * n; ++i) {
                os << labels[i];
                for (int j = 0; j < 4 * n; ++j) os << ',' << format_csv(steady.p(i, j));
                os << '\n';
            }
        }
        emit(os.str(), result);
        return kOk;
    }

    bool sync_ok(int n, const std::vector<NegativityReport>& reports) const {
        double e1 = 0.0;
        double worst = 0.0;
        for (const auto& r : reports) {
            if (r.first.collective() || r.first.index != r.second.index) continue;
            if (r.first.index == 1) e1 = r.e_value;
        }
        for (const auto& r : reports) {
            if (r.first.collective() || r.first.index != r.second.index) continue;
            worst = std::max(worst, std::abs(r.e_value - e1));
        }
        const bool ok = worst < 1e-6;
        err_ << "sync_check n=" << n << " max_deviation=" << format_number(worst) << (ok ? " pass" : " FAIL")
             << '\n';
        return ok;
    }

    int negativity() {
        const LossScenario s = single_scenario();
        if (rc_.trajectory) {
            const int n = single_n();
            const NetworkConfig cfg = config(n, s, false);
            bool ok = true;
            if (rc_.sync_check) ok = sync_ok(n, negativity_suite(cfg));
            const NegativityTrajectory t = negativity_trajectory(cfg, rc_.t_end, rc_.dt);
            Json series = Json::object();
            for (std::size_t k = 0; k < t.labels.size(); ++k) series[t.labels[k]] = t.values[k];
            emit(trajectory_csv(t, metadata(&cfg)),
                 Json{{"config", nopa::to_json(cfg)}, {"t", t.times}, {"series", series}});
            return ok ? kOk : kNumerical;
        }
        std::ostringstream os;
        for (const auto& [k, v] : metadata()) os << "# " << k << '=' << v << '\n';
        os << "n,pair,nu,e_value\n";
        Json blocks = Json::array();
        bool ok = true;
        for (int n : n_list("2..6")) {
            const NetworkConfig cfg = config(n, s, false);
            const auto reports = negativity_suite(cfg);
            for (const auto& r : reports) {
                os << n << ',' << r.pair_label << ',' << format_csv(r.nu) << ','
                   << (rc_.paper_precision ? format_fixed(r.e_value, 4) : format_csv(r.e_value)) << '\n';
            }
            blocks.push_back({{"config", nopa::to_json(cfg)}, {"negativities", nopa::to_json(reports)}});
            if (rc_.sync_check) ok = sync_ok(n, reports) && ok;
        }
        emit(os.str(), Json{{"steady_state", blocks}});
        return ok ? kOk : kNumerical;
    }

    int sweep() {
        const SweepKind kind = sweep_kind_from_string(rc_.kind);
        const auto ns = n_list("2..6");
        const std::optional<int> four_decimals = rc_.paper_precision ? std::optional<int>(4) : std::nullopt;
        SweepResult r;
        switch (kind) {
        case SweepKind::target_db:
            r = target_db_sweep(ns, rc_.target_db,
                                {LossScenario::transmission_only, LossScenario::transmission_and_amplification}, four_decimals,
                                rc_.y, rc_.distance_km);
            break;
        case SweepKind::optimal_x: {
            const LossScenario s = single_scenario();
            if (s == LossScenario::lossless) {
                throw ValidationError("optimal pump search needs a lossy scenario (--losses); without losses V(0) "
                                      "keeps decreasing up to the threshold");
            }
            r = optimal_sweep(ns, s, rc_.n_samples, rc_.refine, four_decimals, rc_.y, rc_.distance_km);
            break;
        }
        case SweepKind::equal_power:
            r = equal_power_sweep(ns, single_scenario(), rc_.x_ref, rc_.n_ref, rc_.y, rc_.distance_km);
            break;
        case SweepKind::threshold_approach: {
            const auto k = default_k_grid(rc_.k_points);
            r.kind = kind;
            for (int n : ns) {
                const SweepResult part = threshold_approach_curve(n, k, rc_.y);
                r.rows.insert(r.rows.end(), part.rows.begin(), part.rows.end());
            }
            break;
        }
        }
        emit(sweep_to_csv(r, metadata(), db_decimals()), nopa::to_json(r));
        return kOk;
    }

    int dde_check() {
        NetworkConfig cfg = config(single_n(), single_scenario(), true);
        DdeOptions o;
        o.start_order = rc_.dde_start_order;
        o.max_order = rc_.dde_max_order;
        DdeSpectrumReport report;
        int status = kOk;
        try {
            report = dde_rightmost_root(cfg, o);
        } catch (const DdeConvergenceError& e) {
            err_ << "error: " << e.what() << '\n';
            report = e.report();
            status = kNumerical;
        }
        if (status == kOk && !report.stable) status = kUnstable;
        const Json result{{"config", nopa::to_json(cfg)}, {"dde", nopa::to_json(report)}};
        emit(dump(with_provenance(to_json(rc_), result)), result);
        return status;
    }

    const RunConfig& rc_;
    std::ostream& out_;
    std::ostream& err_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Stability, squeezing and entanglement analysis of NOPA coherent-feedback chains", "nopa"};
    app.set_config("--config", "", "Flat key=value file with option defaults");
    app.set_version_flag("--version", kToolkitVersion);

    app.add_option("--n", rc.n_spec, "Chain sizes: 3, 2..6 or 2,4,6");
    app.add_option("--scenarios,--losses", rc.scenarios,
                   "Loss scenarios: all, lossless, transmission_only, transmission_and_amplification "
                   "(aliases: none, transmission, both)");
    app.add_flag("--lossless", rc.lossless, "Shorthand for --scenarios lossless");
    app.add_option("--x", rc.x, "Pump parameter (default: equal-power value)");
    app.add_option("--x-ref", rc.x_ref, "Equal-power reference pump");
    app.add_option("--n-ref", rc.n_ref, "Equal-power reference chain size");
    app.add_option("--y", rc.y, "Damping parameter");
    app.add_option("--distance", rc.distance_km, "End-to-end fibre length (km)");
    app.add_flag("--delay", rc.delay, "Include propagation delays");
    app.add_option("--tau", rc.tau, "Per-segment delay override (s)");
    app.add_option("--theta-a", rc.theta_a, "Output phase on the a path (rad)");
    app.add_option("--theta-b", rc.theta_b, "Output phase on the b path (rad)");
    app.add_option("--omega-min", rc.omega_min, "Lowest angular frequency (rad/s)");
    app.add_option("--omega-max", rc.omega_max, "Highest angular frequency (rad/s)");
    app.add_option("--omega-points", rc.omega_points, "Number of log-spaced frequencies");
    app.add_option("--t-end", rc.t_end, "Trajectory end time (s)");
    app.add_option("--dt", rc.dt, "Trajectory sample spacing (s)");
    app.add_option("--n-samples", rc.n_samples, "Grid size of the optimal-pump search");
    app.add_flag("--refine", rc.refine, "Refine the optimal pump beyond the grid");
    app.add_option("--target", rc.target_db, "Target V(0) in dB");
    app.add_option("--kind", rc.kind, "Sweep kind: target-db, optimal, equal-power, threshold-approach");
    app.add_option("--k-points", rc.k_points, "Points of the threshold-approach k grid");
    app.add_option("--dde-start-order", rc.dde_start_order, "Initial collocation order");
    app.add_option("--dde-max-order", rc.dde_max_order, "Largest collocation order");
    app.add_option("--out", rc.out, "Write CSV here instead of stdout");
    app.add_option("--json", rc.json, "Also write a JSON report here");
    app.add_flag("--paper-precision", rc.paper_precision,
                 "Round dB and negativity columns to 4 decimals; use 4-decimal pumps and thresholds in sweeps");
    app.add_flag("--trajectory", rc.trajectory, "Emit time evolution from the vacuum state");
    app.add_flag("--sync-check", rc.sync_check, "Check that E(a_i, b_i) is the same for every i");

    for (const char* name : {"threshold", "spectrum", "covariance", "negativity", "sweep", "dde-check"}) {
        app.add_subcommand(name)->fallthrough();
    }
    app.get_subcommand("threshold")->description("Stability thresholds x_th per N and loss scenario");
    app.get_subcommand("spectrum")->description("Two-mode squeezing spectra V+-(i omega)");
    app.get_subcommand("covariance")->description("Steady-state covariance, or its trajectory");
    app.get_subcommand("negativity")->description("Logarithmic negativities of the tracked mode pairs");
    app.get_subcommand("sweep")->description("Pump sweeps: target-db, optimal, equal-power, threshold-approach");
    app.get_subcommand("dde-check")->description("Rightmost characteristic root of the delayed network");
    app.require_subcommand(1);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }
    rc.command = app.get_subcommands().front()->get_name();

    try {
        return Runner(rc, out, err).dispatch();
    } catch (const UnstableError& e) {
        err << "error: " << e.what() << '\n';
        return kUnstable;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace nopa::cli
