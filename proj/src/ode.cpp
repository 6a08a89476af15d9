#include "curvcone/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "curvcone/error.hpp"
#include "curvcone/random.hpp"
#include "parallel.hpp"

namespace curvcone {
namespace {

// Dormand-Prince 5(4) tableau
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// fifth-order weights minus embedded fourth-order weights
constexpr std::array<double, 7> kE{71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525,
                                   -1.0 / 40};

double error_norm(const CurvatureTensor& err, const CurvatureTensor& y0, const CurvatureTensor& y1,
                  const IntegratorControls& c) {
    const auto e = err.components();
    const auto a = y0.components();
    const auto b = y1.components();
    double m = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double sc = c.abs_tol + c.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
        m = std::max(m, std::abs(e[i]) / sc);
    }
    return m;
}

void record_margins(TrajectoryPoint& p, std::span<const ConeSpec> monitors, const SearchBudget& budget, long step,
                    std::vector<std::vector<FrameCertificate>>& warm) {
    for (std::size_t k = 0; k < monitors.size(); ++k) {
        SearchBudget b = budget;
        b.seed = derive_seed(derive_seed(budget.seed, static_cast<std::uint64_t>(step)), k);
        const auto rep = membership_margin(p.r, monitors[k], b, warm[k]);
        p.margins.push_back({monitors[k], rep.margin});
        warm[k].assign(rep.local_minima.begin(),
                       rep.local_minima.begin() + std::min<std::size_t>(8, rep.local_minima.size()));
    }
}

TrajectoryPoint make_point(double t, const CurvatureTensor& r) { return {t, r, norm(r), scal(r), {}}; }

}  // namespace

SearchBudget monitor_budget(const SearchBudget& standalone) {
    SearchBudget b = standalone;
    b.frames = std::max(1, standalone.frames / 2);
    b.descents = std::max(1, standalone.descents / 2);
    b.max_sweeps = std::max(1, standalone.max_sweeps / 2);
    return b;
}

CurvatureTensor sphere_solution(int n, double t) {
    return (1.0 / (1.0 - 2.0 * (n - 1) * t)) * identity_tensor(n);
}

Trajectory integrate(const CurvatureTensor& r0, double t_end, const IntegratorControls& controls,
                     std::span<const ConeSpec> monitors, const SearchBudget& budget) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw Error(ErrorCode::invalid_argument, "t_end must be finite and >= 0");
    if (controls.fixed_step <= 0.0 && !(controls.rel_tol > 0.0 && controls.abs_tol > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "integrator tolerances must be positive");
    }
    for (const auto& m : monitors) {
        validate(m);
        if (m.n != r0.dim()) throw Error(ErrorCode::dimension, "monitor dimension does not match the tensor");
    }
    const double stop_norm = controls.stop_norm > 0.0 ? controls.stop_norm : 1e6 * tolerance_scale(r0);
    if (!(stop_norm > norm(r0))) throw Error(ErrorCode::invalid_argument, "stop_norm must exceed the initial norm");

    Trajectory traj;
    std::vector<std::vector<FrameCertificate>> warm(monitors.size());
    traj.points.push_back(make_point(0.0, r0));
    record_margins(traj.points.back(), monitors, budget, 0, warm);

    CurvatureTensor y = r0;
    CurvatureTensor f = q_map(y);
    ++traj.evaluations;
    double t = 0.0;
    double h = controls.fixed_step;
    if (h <= 0.0) {
        const double fy = norm(f);
        h = fy > 0.0 ? 0.01 * tolerance_scale(y) / fy : 1e-3;
        h = std::min(h, controls.max_step);
    }
    std::vector<CurvatureTensor> k(7, CurvatureTensor(r0.dim()));
    long step = 0;
    bool last_rejected = false;
    while (t < t_end) {
        if (step >= controls.max_steps) throw Error(ErrorCode::budget_exhausted, "integrator step limit reached");
        // absorb a remainder that would leave a sliver of a step
        if (t_end - t - h <= 1e-12 * std::max(1.0, t_end)) h = t_end - t;
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw Error(ErrorCode::step_underflow, "step size underflow at t = " + std::to_string(t));
        }
        k[0] = f;
        for (int s = 1; s < 7; ++s) {
            CurvatureTensor stage = y;
            for (int j = 0; j < s; ++j)
                if (kA[s][j] != 0.0) stage.add_scaled(h * kA[s][j], k[j]);
            k[s] = q_map(stage);
        }
        traj.evaluations += 6;
        CurvatureTensor y_new = y;
        for (int j = 0; j < 6; ++j)
            if (kA[6][j] != 0.0) y_new.add_scaled(h * kA[6][j], k[j]);
        y_new = canonical_project(y_new.components(), y_new.dim());

        double factor = 1.0;
        bool accept = true;
        if (controls.fixed_step <= 0.0) {
            CurvatureTensor err(r0.dim());
            for (int j = 0; j < 7; ++j)
                if (kE[j] != 0.0) err.add_scaled(h * kE[j], k[j]);
            const double e = error_norm(err, y, y_new, controls);
            accept = e <= 1.0 && std::isfinite(e);
            factor = !std::isfinite(e) ? 0.2 : e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
            if (accept && last_rejected) factor = std::min(factor, 1.0);
        }
        if (!accept) {
            ++traj.rejected;
            last_rejected = true;
            h *= factor;
            continue;
        }
        last_rejected = false;
        ++step;
        t = (h == t_end - t) ? t_end : t + h;
        y = std::move(y_new);
        f = k[6];  // FSAL
        traj.points.push_back(make_point(t, y));
        record_margins(traj.points.back(), monitors, budget, step, warm);
        if (traj.points.back().norm >= stop_norm) {
            traj.blew_up = true;
            break;
        }
        if (controls.fixed_step <= 0.0) h = std::min(h * factor, controls.max_step);
    }
    return traj;
}

InvarianceSummary invariance_report(const Trajectory& traj, const ConeSpec& spec) {
    InvarianceSummary out;
    const std::string label = spec.label();
    bool found = false;
    for (const auto& p : traj.points) {
        for (const auto& m : p.margins) {
            if (m.cone.label() != label || m.cone.n != spec.n) continue;
            if (!found || m.margin < out.worst_margin) {
                out.worst_margin = m.margin;
                out.t_worst = p.t;
            }
            if (out.points == 0) out.initial_margin = m.margin;
            found = true;
            ++out.points;
        }
    }
    if (!found) throw Error(ErrorCode::invalid_argument, spec.label() + " was not monitored on this trajectory");
    return out;
}

double transversality_check(const CurvatureTensor& r, const ConeSpec& spec, double activation_tol,
                            const SearchBudget& budget, std::span<const FrameCertificate> extra) {
    if (!(activation_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "activation tolerance must be positive");
    const auto rep = membership_margin(r, spec, budget, extra);
    std::vector<FrameCertificate> candidates = rep.local_minima;
    candidates.insert(candidates.end(), extra.begin(), extra.end());
    const double scale = tolerance_scale(r);
    const auto q = q_map(r);
    const double qscale = tolerance_scale(q);
    double worst = 0.0;
    bool any = false;
    for (const auto& c : candidates) {
        if (std::abs(certificate_value(r, c, spec) / scale) > activation_tol) continue;
        const double v = certificate_value(q, c, spec) / qscale;
        if (!any || v < worst) worst = v;
        any = true;
    }
    if (!any) throw Error(ErrorCode::no_active_constraints, "no constraint of " + spec.label() + " is active");
    return worst;
}

PinchingSeries pinching_experiment(const CurvatureTensor& r0, const ConeSpec& spec, double t_end,
                                   const IntegratorControls& controls, const ProjectionOptions& projection) {
    validate(spec);
    const int n = r0.dim();
    const auto id = identity_tensor(n);
    if (membership_margin(r0 + id, spec, projection.verify).margin < -projection.tol) {
        throw Error(ErrorCode::invalid_argument, "R0 + I must lie in " + spec.label());
    }
    const auto traj = integrate(r0, t_end, controls);
    PinchingSeries out;
    out.blew_up = traj.blew_up;
    for (const auto& p : traj.points) {
        PinchingPoint pt;
        pt.t = p.t;
        pt.coefficient = 2.0 - p.t * n * (n - 1) - p.t * p.scal;
        CurvatureTensor s = p.r;
        s.add_scaled(pt.coefficient, id);
        pt.phi = distance(s, spec, projection);
        out.points.push_back(pt);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& p : out.points) {
        if (!(p.phi > 0.0 && p.t > 0.0)) continue;
        const double x = std::log(p.t), y = std::log(p.phi);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 2 && m * sxx - sx * sx > 0.0) out.fitted_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

YokotaReport yokota_scan(const ConeSpec& spec, std::span<const double> t_grid, int samples, std::uint64_t seed,
                         const YokotaOptions& options) {
    validate(spec);
    if (!spec.uses_preimage()) throw Error(ErrorCode::invalid_argument, "the Yokota scan applies to hatc and tildec");
    if (samples <= 0) throw Error(ErrorCode::invalid_argument, "sample count must be positive");
    for (double t : t_grid)
        if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "scan times must be positive");
    if (!(options.tau_min > 0.0 && options.tau_max > options.tau_min)) {
        throw Error(ErrorCode::invalid_argument, "invalid tau range");
    }
    const int n = spec.n;
    const auto id = identity_tensor(n);
    const int nt = static_cast<int>(t_grid.size());

    struct Cell {
        bool drawn = false;
        bool qualifying = false;
        bool unresolved = false;
        double ratio = 0.0;  // lhs / |S|^2
        double t_scal = 0.0;
        double lipschitz = 0.0;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(samples) * nt);
    detail::parallel_for(samples, options.workers, [&](int i) {
        const auto is = static_cast<std::uint64_t>(i);
        CurvatureTensor m(n);
        try {
            m = sample_member(spec, derive_seed(seed, is), options.projection).tensor;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::budget_exhausted) throw;
            return;
        }
        const double sm = scal(m);
        if (!(sm > 1e-12 * norm(m))) return;
        Rng rng = make_rng(seed ^ 0x70c07a, is);
        for (int k = 0; k < nt; ++k) {
            Cell& c = cells[static_cast<std::size_t>(i) * nt + k];
            const double t = t_grid[k];
            const double tau = options.tau_min + (options.tau_max - options.tau_min) * uniform01(rng);
            const CurvatureTensor r = (tau / (t * sm)) * m;
            CurvatureTensor s = r;
            s.add_scaled(1.0 - t * scal(r), id);
            c.drawn = true;
            ProjectionOptions po = options.projection;
            po.inner.seed = derive_seed(seed ^ 0x1a, is * 64 + k);
            po.verify.seed = derive_seed(seed ^ 0x2b, is * 64 + k);
            const auto p = project(s, spec, po);
            if (!p.converged) {
                c.unresolved = true;
                continue;
            }
            if (p.distance <= po.tol * tolerance_scale(s)) continue;
            c.qualifying = true;
            c.t_scal = t * scal(r);
            const CurvatureTensor xi_s = (1.0 / p.distance) * (s - p.point);
            const double ric2 = ricci(r).matrix().squaredNorm();
            CurvatureTensor v = q_map(r);
            v.add_scaled(-scal(r) - 2.0 * t * ric2, id);
            const double ns = norm(s);
            c.ratio = inner(v, xi_s) / (ns * ns);
            c.lipschitz = norm(q_map(s) - q_map(p.point)) / (ns * p.distance);
        }
    });

    YokotaReport out;
    for (int k = 0; k < nt; ++k) {
        YokotaRow row;
        row.t = t_grid[k];
        double worst = -std::numeric_limits<double>::infinity();
        row.min_t_scal = std::numeric_limits<double>::infinity();
        for (int i = 0; i < samples; ++i) {
            const Cell& c = cells[static_cast<std::size_t>(i) * nt + k];
            row.drawn += c.drawn;
            row.unresolved += c.unresolved;
            if (!c.qualifying) continue;
            ++row.qualifying;
            worst = std::max(worst, c.ratio);
            row.min_t_scal = std::min(row.min_t_scal, c.t_scal);
            out.lipschitz_hat = std::max(out.lipschitz_hat, c.lipschitz);
        }
        row.mu_hat = row.qualifying > 0 ? -worst : std::numeric_limits<double>::quiet_NaN();
        if (row.qualifying == 0) row.min_t_scal = std::numeric_limits<double>::quiet_NaN();
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace curvcone
