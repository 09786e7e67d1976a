#include "nopa/sweep.hpp"

#include "nopa/errors.hpp"
#include "nopa/format.hpp"
#include "nopa/spectra.hpp"

#include <cmath>
#include <sstream>

namespace nopa {

std::string to_string(SweepKind k) {
    switch (k) {
    case SweepKind::equal_power: return "equal_power";
    case SweepKind::target_db: return "target_db";
    case SweepKind::optimal_x: return "optimal_x";
    case SweepKind::threshold_approach: return "threshold_approach";
    }
    return "unknown";
}

SweepKind sweep_kind_from_string(const std::string& s) {
    if (s == "equal_power" || s == "equal-power") return SweepKind::equal_power;
    if (s == "target_db" || s == "target-db") return SweepKind::target_db;
    if (s == "optimal_x" || s == "optimal") return SweepKind::optimal_x;
    if (s == "threshold_approach" || s == "threshold-approach") return SweepKind::threshold_approach;
    throw ValidationError("unknown sweep kind '" + s + "'");
}

SweepRow evaluate_row(const NetworkConfig& config) {
    const SqueezingValues v = squeezing_at_zero(config);
    SweepRow r;
    r.n_nopas = config.n_nopas;
    r.scenario = config.scenario();
    r.x = config.nopa.x;
    r.n_x2 = config.n_nopas * r.x * r.x;
    r.v_pm_db = to_db(v.v_plus);
    r.v_db = to_db(v.v_sum());
    r.v_pm_residual = v.v_plus > 0.0 ? std::abs(v.v_plus - v.v_minus) / v.v_plus : std::abs(v.v_minus);
    return r;
}

namespace {

double v0_db(const ConfigFamily& family, double x) { return to_db(squeezing_at_zero(family(x)).v_sum()); }

}  // namespace

double equal_power_x(int n_nopas, double x_ref, int n_ref, LossScenario losses) {
    if (n_nopas < 2 || n_ref < 2) throw ValidationError("equal-power scaling needs N >= 2 and n_ref >= 2");
    if (!(x_ref > 0.0)) throw ValidationError("reference pump x_ref must be positive");
    const double x = std::sqrt(static_cast<double>(n_ref) / n_nopas) * x_ref;
    const double x_th = stability_threshold(n_nopas, losses).x_th;
    if (x >= x_th) {
        throw DomainError("equal-power pump x = " + format_number(x) + " for N = " + std::to_string(n_nopas) +
                          " is not below the threshold x_th = " + format_number(x_th));
    }
    return x;
}

SweepResult equal_power_sweep(const std::vector<int>& n_range, LossScenario losses, double x_ref, int n_ref,
                              double y, double distance_km) {
    SweepResult out{SweepKind::equal_power, {}};
    for (int n : n_range) {
        const double x = equal_power_x(n, x_ref, n_ref, losses);
        out.rows.push_back(evaluate_row(chain_family(n, losses, y, distance_km)(x)));
    }
    return out;
}

double find_x_for_target_v0(const ConfigFamily& family, double x_th, double target_db,
                            const TargetSearchOptions& opts) {
    if (!(x_th > 0.0)) throw ValidationError("threshold must be positive");
    if (opts.bracket_samples < 2) throw ValidationError("need at least two bracket samples");
    std::vector<double> xs;
    for (int j = 0; j <= opts.bracket_samples; ++j) xs.push_back(x_th * j / (opts.bracket_samples + 1));
    for (int m = 2; m <= 9; ++m) {
        const double x = x_th * (1.0 - std::pow(10.0, -m));
        if (x > xs.back()) xs.push_back(x);
    }
    double prev = v0_db(family, xs[0]);
    if (prev <= target_db) {
        throw DomainError("target " + format_number(target_db) + " dB is already met at x = " +
                          format_number(xs[0]));
    }
    for (std::size_t j = 1; j < xs.size(); ++j) {
        const double cur = v0_db(family, xs[j]);
        if (cur > prev) {
            throw DomainError("V(0) stops decreasing at x = " + format_number(xs[j]) + " before reaching " +
                              format_number(target_db) + " dB");
        }
        if (cur <= target_db) {
            double lo = xs[j - 1];
            double hi = xs[j];
            double mid = 0.5 * (lo + hi);
            for (int it = 0; it < 200 && hi - lo > 1e-14 * x_th; ++it) {
                mid = 0.5 * (lo + hi);
                (v0_db(family, mid) > target_db ? lo : hi) = mid;
            }
            mid = 0.5 * (lo + hi);
            const double miss = std::abs(v0_db(family, mid) - target_db);
            if (!(miss < opts.db_tol)) {
                throw NumericalError("target search stalled " + format_number(miss) + " dB from the target");
            }
            return mid;
        }
        prev = cur;
    }
    throw DomainError("target " + format_number(target_db) + " dB is not reached below x_th = " +
                      format_number(x_th));
}

SweepResult target_db_sweep(const std::vector<int>& n_range, double target_db, const std::vector<LossScenario>& lossy,
                            std::optional<int> x_decimals, double y, double distance_km) {
    SweepResult out{SweepKind::target_db, {}};
    for (int n : n_range) {
        const ConfigFamily lossless = chain_family(n, LossScenario::lossless, y, distance_km);
        const double x_th = stability_threshold(n, LossScenario::lossless, y, distance_km).x_th;
        const double x = find_x_for_target_v0(lossless, x_th, target_db);
        out.rows.push_back(evaluate_row(lossless(x)));
        double x_eval = x;
        if (x_decimals) {
            const double scale = std::pow(10.0, *x_decimals);
            x_eval = std::round(x * scale) / scale;
        }
        for (LossScenario s : lossy) out.rows.push_back(evaluate_row(chain_family(n, s, y, distance_km)(x_eval)));
    }
    return out;
}

OptimalPoint optimal_x(const ConfigFamily& family, double x_th, int n_samples, bool refine) {
    if (n_samples < 2) throw ValidationError("optimal-x grid needs at least 2 samples");
    if (!(x_th > 0.0)) throw ValidationError("threshold must be positive");
    OptimalPoint best;
    bool found = false;
    for (int k = 1; k <= n_samples; ++k) {
        const double x = x_th * k / n_samples;
        const NetworkConfig cfg = family(x);
        const StateSpace ss = assemble_state_space(cfg);
        if (!is_hurwitz(ss).stable) continue;
        SqueezingValues v;
        try {
            v = squeezing_from_transfer(transfer_function(ss, 0.0));
        } catch (const NumericalError&) {
            continue;
        }
        if (!found || v.v_sum() < best.v) {
            best = {x, k, v.v_plus, v.v_minus, v.v_sum()};
            found = true;
        }
    }
    if (!found) throw NumericalError("every grid point of the optimal-x search is unstable");
    if (refine) {
        const double step = x_th / n_samples;
        double a = std::max(step * 1e-3, best.x_opt - step);
        double b = std::min(x_th * (1.0 - 1e-12), best.x_opt + step);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        auto f = [&](double x) { return squeezing_at_zero(family(x)).v_sum(); };
        double c = b - g * (b - a);
        double d = a + g * (b - a);
        double fc = f(c);
        double fd = f(d);
        while (b - a > 1e-12 * x_th) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        const double x = 0.5 * (a + b);
        const SqueezingValues v = squeezing_at_zero(family(x));
        if (v.v_sum() < best.v) best = {x, best.grid_index, v.v_plus, v.v_minus, v.v_sum()};
    }
    return best;
}

SweepResult optimal_sweep(const std::vector<int>& n_range, LossScenario losses, int n_samples, bool refine,
                          std::optional<int> x_th_decimals, double y, double distance_km) {
    SweepResult out{SweepKind::optimal_x, {}};
    for (int n : n_range) {
        const ConfigFamily family = chain_family(n, losses, y, distance_km);
        double x_th = stability_threshold(n, losses, y, distance_km).x_th;
        if (x_th_decimals) {
            const double scale = std::pow(10.0, *x_th_decimals);
            x_th = std::floor(x_th * scale) / scale;
        }
        const OptimalPoint p = optimal_x(family, x_th, n_samples, refine);
        out.rows.push_back(evaluate_row(family(p.x_opt)));
    }
    return out;
}

std::vector<double> default_k_grid(int points) {
    if (points < 2) throw ValidationError("k grid needs at least 2 points");
    std::vector<double> k(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) k[i] = 0.5 + (0.999 - 0.5) * i / (points - 1);
    return k;
}

SweepResult threshold_approach_curve(int n_nopas, const std::vector<double>& k_grid, double y) {
    const double x_th = stability_threshold(n_nopas, LossScenario::lossless, y).x_th;
    const ConfigFamily family = chain_family(n_nopas, LossScenario::lossless, y);
    SweepResult out{SweepKind::threshold_approach, {}};
    for (double k : k_grid) {
        if (!(k > 0.0 && k < 1.0)) {
            throw DomainError("k = " + format_number(k) + " is outside (0, 1); V(0) has a pole at the threshold");
        }
        SweepRow r = evaluate_row(family(k * x_th));
        r.k = k;
        out.rows.push_back(r);
    }
    return out;
}

std::string sweep_to_csv(const SweepResult& r, const std::vector<std::pair<std::string, std::string>>& metadata,
                         std::optional<int> db_decimals) {
    auto db = [&](double v) { return db_decimals ? format_fixed(v, *db_decimals) : format_csv(v); };
    std::ostringstream os;
    for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
    switch (r.kind) {
    case SweepKind::target_db: {
        os << "n,x_target,n_x2,v_pm_db_transmission_only,v_db_transmission_only,"
              "v_pm_db_transmission_and_amplification,v_db_transmission_and_amplification\n";
        for (std::size_t i = 0; i < r.rows.size();) {
            const SweepRow& base = r.rows[i];
            os << base.n_nopas << ',' << format_csv(base.x) << ',' << format_csv(base.n_x2);
            const SweepRow* tr = nullptr;
            const SweepRow* both = nullptr;
            std::size_t j = i + 1;
            for (; j < r.rows.size() && r.rows[j].scenario != LossScenario::lossless; ++j) {
                if (r.rows[j].scenario == LossScenario::transmission_only) tr = &r.rows[j];
                if (r.rows[j].scenario == LossScenario::transmission_and_amplification) both = &r.rows[j];
            }
            for (const SweepRow* p : {tr, both}) {
                if (p) {
                    os << ',' << db(p->v_pm_db) << ',' << db(p->v_db);
                } else {
                    os << ",,";
                }
            }
            os << '\n';
            i = j;
        }
        break;
    }
    case SweepKind::threshold_approach:
        os << "n,k,x,v_pm_db,v_db\n";
        for (const SweepRow& row : r.rows) {
            os << row.n_nopas << ',' << format_csv(row.k.value_or(0.0)) << ',' << format_csv(row.x) << ','
               << db(row.v_pm_db) << ',' << db(row.v_db) << '\n';
        }
        break;
    case SweepKind::equal_power:
    case SweepKind::optimal_x:
        os << (r.kind == SweepKind::optimal_x ? "n,x_opt,n_x2,v_pm_db,v_db\n" : "n,x,n_x2,v_pm_db,v_db\n");
        for (const SweepRow& row : r.rows) {
            os << row.n_nopas << ',' << format_csv(row.x) << ',' << format_csv(row.n_x2) << ','
               << db(row.v_pm_db) << ',' << db(row.v_db) << '\n';
        }
        break;
    }
    return os.str();
}

}  // namespace nopa
