#include <doctest.h>

#include <cmath>

#include "curvcone/error.hpp"
#include "curvcone/ode.hpp"
#include "curvcone/random.hpp"
#include "oracles.hpp"

using namespace curvcone;

namespace {

double rel_err(const CurvatureTensor& a, const CurvatureTensor& b) { return norm(a - b) / std::max(1.0, norm(b)); }

// curvature of S^(n-1) x R: unit sectional curvature on planes in the first n-1 coordinates
CurvatureTensor cylinder(int n) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    p(n - 1, n - 1) = 0.0;
    return 0.5 * kulkarni_nomizu(SymBilinear::from_matrix(p), SymBilinear::from_matrix(p));
}

const SearchBudget kSmall{3000, 12, 7, 1, 40};

}  // namespace

TEST_CASE("sphere solution") {
    for (int n : {3, 4, 5, 6}) {
        const double t_end = 0.4 / (2.0 * (n - 1));
        const auto traj = integrate(identity_tensor(n), t_end);
        CHECK_FALSE(traj.blew_up);
        CHECK(traj.points.back().t == t_end);
        CHECK(rel_err(traj.points.back().r, sphere_solution(n, t_end)) <= 1e-8);
        for (const auto& p : traj.points) CHECK(rel_err(p.r, sphere_solution(n, p.t)) <= 1e-8);
    }
}

TEST_CASE("halving the fixed step cuts the error at least fourfold") {
    double prev = 0.0;
    for (double h : {0.02, 0.01, 0.005}) {
        IntegratorControls c;
        c.fixed_step = h;
        const auto traj = integrate(identity_tensor(4), 0.06, c);
        const double err = norm(traj.points.back().r - sphere_solution(4, 0.06));
        if (prev > 0.0) CHECK(prev / err >= 4.0);
        prev = err;
    }
}

TEST_CASE("zero stays zero") {
    const auto traj = integrate(CurvatureTensor(4), 1.0);
    CHECK(traj.points.back().t == 1.0);
    for (const auto& p : traj.points) CHECK(p.norm == 0.0);
}

TEST_CASE("scaling commutation and equivariance") {
    Rng rng = make_rng(21);
    const auto r0 = gaussian_tensor(4, rng);
    const double t = 0.05 / norm(r0);
    const double c = 2.5;
    const auto a = integrate(c * r0, t).points.back().r;
    const auto b = integrate(r0, c * t).points.back().r;
    CHECK(rel_err(a, c * b) <= 1e-7);

    const Eigen::MatrixXd o = haar_orthogonal(4, rng);
    const auto rot = integrate(rotate(r0, o), t).points.back().r;
    CHECK(rel_err(rot, rotate(integrate(r0, t).points.back().r, o)) <= 1e-7);
}

TEST_CASE("trajectory points keep the curvature symmetries") {
    Rng rng = make_rng(22);
    const auto r0 = gaussian_tensor(5, rng);
    const auto traj = integrate(r0, 0.1 / norm(r0));
    for (const auto& p : traj.points)
        CHECK(symmetry_defect(p.r.components(), 5) <= 1e-10 * std::max(1.0, p.norm));
}

TEST_CASE("scal slope matches scal(Q)") {
    Rng rng = make_rng(23);
    const auto r0 = sample_member(ConeSpec::pic1(4), 23).tensor;
    IntegratorControls c;
    c.rel_tol = 1e-13;
    c.abs_tol = 1e-15;
    for (double t : {0.01, 0.03}) {
        const double h = 1e-4;
        const double up = scal(integrate(r0, t + h, c).points.back().r);
        const double down = scal(integrate(r0, t - h, c).points.back().r);
        const auto mid = integrate(r0, t, c).points.back().r;
        const double exact = scal(q_map(mid));
        CHECK(std::abs((up - down) / (2 * h) - exact) <= 1e-5 * std::abs(exact));
    }
}

TEST_CASE("blow-up guard") {
    IntegratorControls c;
    c.stop_norm = 100.0;
    const auto traj = integrate(identity_tensor(4), 1.0, c);
    CHECK(traj.blew_up);
    CHECK(traj.points.back().norm >= 100.0);
    CHECK(traj.points[traj.points.size() - 2].norm < 100.0);
    CHECK(traj.points.back().t < 1.0 / 6.0);

    c.stop_norm = 1.0;
    CHECK_THROWS_AS(integrate(identity_tensor(4), 1.0, c), Error);
    IntegratorControls bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(integrate(identity_tensor(4), 1.0, bad), Error);
    CHECK_THROWS_AS(integrate(identity_tensor(4), -1.0), Error);
}

TEST_CASE("monitors record margins that re-evaluate") {
    const auto r0 = sample_member(ConeSpec::pic2(4), 24).tensor;
    const std::vector<ConeSpec> mons{ConeSpec::pic2(4)};
    IntegratorControls c;
    c.rel_tol = 1e-8;
    c.stop_norm = 50.0 * norm(r0);
    const auto budget = monitor_budget(kSmall);
    CHECK(budget.frames == kSmall.frames / 2);
    CHECK(budget.descents == kSmall.descents / 2);
    const auto traj = integrate(r0, 10.0, c, mons, budget);
    CHECK(traj.blew_up);
    for (const auto& p : traj.points) REQUIRE(p.margins.size() == 1);
    const auto rep = invariance_report(traj, mons[0]);
    CHECK(rep.points == static_cast<int>(traj.points.size()));
    CHECK(rep.worst_margin >= -5e-7);
    // the stored margin is the certificate value over max(1, |R|)
    const auto& last = traj.points.back();
    const auto again = membership_margin(last.r, mons[0], budget);
    CHECK(again.margin >= last.margins[0].margin - 1e-9);
    CHECK_THROWS_AS(invariance_report(traj, ConeSpec::pic1(4)), Error);
}

TEST_CASE("identity start stays inside every family") {
    const std::vector<ConeSpec> mons{ConeSpec::pic1(4), ConeSpec::check(4, 1.0), ConeSpec::tilde(4, 0.2, 1.0)};
    IntegratorControls c;
    c.stop_norm = 1e3;
    const auto traj = integrate(identity_tensor(4), 1.0, c, mons, monitor_budget(kSmall));
    for (const auto& m : mons) CHECK(invariance_report(traj, m).worst_margin > 0.0);
}

TEST_CASE("transversality") {
    for (int n : {4, 5}) {
        const double v = transversality_check(cylinder(n), ConeSpec::pic2(n), 1e-9);
        CHECK(std::abs(v) <= 1e-9);
    }
    bool reported = false;
    try {
        transversality_check(identity_tensor(4), ConeSpec::pic2(4), 1e-6);
    } catch (const Error& e) {
        reported = e.code() == ErrorCode::no_active_constraints;
    }
    CHECK(reported);

    const auto spec = ConeSpec::tilde(4, 0.2, 1.0);
    Rng rng = make_rng(25);
    for (int i = 0; i < 3; ++i) {
        const auto p = project(gaussian_tensor(4, rng), spec);
        REQUIRE(p.converged);
        REQUIRE(p.distance > 0.0);
        CHECK(transversality_check(p.point, spec, 1e-6, {}, p.active) > 0.0);
    }
}

TEST_CASE("pinching experiment closed forms") {
    const int n = 4;
    const double nn = n * (n - 1);
    const double inorm = std::sqrt(2.0 * nn);
    IntegratorControls c;
    c.max_step = 0.005;

    const auto zero = pinching_experiment(CurvatureTensor(n), ConeSpec::pic2(n), 2.0 / nn, c);
    for (const auto& p : zero.points) {
        CHECK(p.coefficient == doctest::Approx(2.0 - p.t * nn).epsilon(1e-14));
        CHECK(p.phi <= 1e-12);
    }

    // R(t) = x I with x = 1 / (1 - 2(n-1)t), so S(t) = (x + 2 - t n(n-1) - t n(n-1) x) I
    c.stop_norm = 1e3;
    const auto sphere = pinching_experiment(identity_tensor(n), ConeSpec::pic2(n), 1.0, c);
    bool went_negative = false;
    for (const auto& p : sphere.points) {
        const double x = 1.0 / (1.0 - 2.0 * (n - 1) * p.t);
        const double k = x + 2.0 - p.t * nn * (1.0 + x);
        CHECK(p.coefficient + x == doctest::Approx(k).epsilon(1e-8));
        if (k >= 1e-9) {
            CHECK(p.phi <= 1e-12 * std::max(1.0, x * inorm));
        } else if (k < -1e-6) {
            went_negative = true;
            CHECK(p.phi == doctest::Approx(-k * inorm).epsilon(1e-6));
        }
    }
    CHECK(went_negative);

    CHECK_THROWS_AS(pinching_experiment(-3.0 * identity_tensor(n), ConeSpec::pic2(n), 0.1), Error);
}

TEST_CASE("yokota scan bookkeeping") {
    const std::vector<double> ts{0.005, 0.1};
    YokotaOptions opt;
    const auto rep = yokota_scan(ConeSpec::tilde(4, 0.2, 1.0), ts, 6, 31, opt);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
        CHECK(row.drawn == 6);
        CHECK(row.qualifying + row.unresolved <= row.drawn);
        if (row.qualifying > 0) CHECK(row.min_t_scal > 1.0);
    }
    CHECK(rep.lipschitz_hat <= YokotaReport::lipschitz_bound);
    const auto again = yokota_scan(ConeSpec::tilde(4, 0.2, 1.0), ts, 6, 31, opt);
    CHECK(again.rows[0].mu_hat == rep.rows[0].mu_hat);
    CHECK_THROWS_AS(yokota_scan(ConeSpec::pic2(4), ts, 6, 31), Error);
}
