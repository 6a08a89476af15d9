#pragma once

// The Hamilton ODE dR/dt = Q(R): adaptive integration with cone monitors,
// invariance and transversality probes, the pinching experiment for
// S(t) = R(t) + (2 - t n(n-1) - t scal(R(t))) I, and the Yokota scan.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "curvcone/cone.hpp"

namespace curvcone {

struct IntegratorControls {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    // blow-up guard; 0 selects 1e6 max(1, |R0|)
    double stop_norm = 0.0;
    // > 0: fixed step size, no error control
    double fixed_step = 0.0;
    long max_steps = 200000;
};

struct ConeMargin {
    ConeSpec cone;
    double margin = 0.0;
};

struct TrajectoryPoint {
    double t = 0.0;
    CurvatureTensor r;
    double norm = 0.0;
    double scal = 0.0;
    std::vector<ConeMargin> margins;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;  // t = 0 and every accepted step
    bool blew_up = false;
    long rejected = 0;
    long evaluations = 0;  // Q evaluations
};

// Monitors run on accepted steps with half the frames, descents and sweeps of a
// standalone membership call, warm started from the previous step.
SearchBudget monitor_budget(const SearchBudget& standalone = {});

// Dormand-Prince 5(4) with FSAL. Stops at t_end or when |R| reaches the
// blow-up guard (the crossing step is kept). Throws Error(step_underflow)
// when the step size collapses.
Trajectory integrate(const CurvatureTensor& r0, double t_end, const IntegratorControls& controls = {},
                     std::span<const ConeSpec> monitors = {}, const SearchBudget& budget = monitor_budget());

// (1 - 2(n-1) t)^-1 I
CurvatureTensor sphere_solution(int n, double t);

struct InvarianceSummary {
    double worst_margin = 0.0;
    double t_worst = 0.0;
    double initial_margin = 0.0;
    int points = 0;
};

// Throws Error(invalid_argument) if the cone was not monitored.
InvarianceSummary invariance_report(const Trajectory& traj, const ConeSpec& spec);

// Min over the certificates active at R (|margin| <= activation_tol) of their
// functional on Q(R), divided by max(1, |Q(R)|). `extra` certificates (for
// example the active set of a projection) join the candidates. Throws
// Error(no_active_constraints) when none is active.
double transversality_check(const CurvatureTensor& r, const ConeSpec& spec, double activation_tol,
                            const SearchBudget& budget = {}, std::span<const FrameCertificate> extra = {});

struct PinchingPoint {
    double t = 0.0;
    double coefficient = 0.0;  // 2 - t n(n-1) - t scal(R(t))
    double phi = 0.0;          // distance of S(t) to the cone
};

struct PinchingSeries {
    std::vector<PinchingPoint> points;
    bool blew_up = false;
    // least-squares slope of log phi against log t over points with phi > 0
    // (NaN with fewer than two such points); recorded, not asserted
    double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
};

// Requires R0 + I in the cone (Error(invalid_argument) otherwise).
PinchingSeries pinching_experiment(const CurvatureTensor& r0, const ConeSpec& spec, double t_end,
                                   const IntegratorControls& controls = {}, const ProjectionOptions& projection = {});

struct YokotaRow {
    double t = 0.0;
    int drawn = 0;
    int qualifying = 0;       // S outside the cone
    int unresolved = 0;       // projections that did not converge
    double mu_hat = 0.0;      // -max lhs / |S|^2 over qualifying samples
    double min_t_scal = 0.0;  // min t scal(R) over qualifying samples
};

struct YokotaReport {
    std::vector<YokotaRow> rows;
    // max |Q(S) - Q(pi S)| / (|S| |S - pi S|) over qualifying samples
    double lipschitz_hat = 0.0;
    // analytic bound: each contraction in Q is bounded by the norms of its
    // factors, so |Q(X) - Q(Y)| <= 5 |X - Y| |X + Y|
    static constexpr double lipschitz_bound = 10.0;
};

struct YokotaOptions {
    ProjectionOptions projection;
    int workers = 1;
    // t scal(R) is drawn uniformly from [tau_min, tau_max]
    double tau_min = 0.25;
    double tau_max = 4.0;
};

// For hatc / tildec only. Members M are sampled by projection and scaled to
// R = c M with t scal(R) = tau; S = R + (1 - t scal(R)) I; qualifying samples
// (S not a member) contribute <Q(R) - scal(R) I - 2t |Ric(R)|^2 I, xi(S)> / |S|^2.
YokotaReport yokota_scan(const ConeSpec& spec, std::span<const double> t_grid, int samples, std::uint64_t seed,
                         const YokotaOptions& options = {});

}  // namespace curvcone
