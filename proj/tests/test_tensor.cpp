#include <doctest.h>

#include <cmath>

#include "curvcone/error.hpp"
#include "curvcone/random.hpp"
#include "curvcone/tensor.hpp"
#include "oracles.hpp"

using namespace curvcone;

namespace {

std::vector<double> gaussian_table(int n, Rng& rng) {
    std::vector<double> t(std::size_t(n) * n * n * n);
    for (double& v : t) v = standard_normal(rng);
    return t;
}

}  // namespace

TEST_CASE("canonical projection of a single component") {
    for (int n : {3, 4, 6}) {
        std::vector<double> raw(std::size_t(n) * n * n * n, 0.0);
        raw[oracle::at(n, 0, 1, 0, 1)] = 1.0;
        const auto r = canonical_project(raw, n);
        CHECK(r(0, 1, 0, 1) == doctest::Approx(0.25));
        CHECK(r(1, 0, 1, 0) == doctest::Approx(0.25));
        CHECK(r(0, 1, 1, 0) == doctest::Approx(-0.25));
        CHECK(r(1, 0, 0, 1) == doctest::Approx(-0.25));
        CHECK(norm(r) == doctest::Approx(0.5));
    }
}

TEST_CASE("canonical projection is the orthogonal projector onto curvature tensors") {
    Rng rng(17);
    for (int n = kMinDim; n <= 6; ++n) {
        const auto raw = gaussian_table(n, rng);
        const auto p = canonical_project(raw, n);
        CHECK(symmetry_defect(p.components(), n) < 1e-14);
        CHECK(symmetry_defect(raw, n) > 0.1);
        // idempotent
        const auto pp = canonical_project(p.components(), n);
        CHECK(oracle::max_abs_diff(oracle::table(p), pp.components()) < 1e-14);
        // residual orthogonal to every curvature tensor
        for (int trial = 0; trial < 3; ++trial) {
            const auto s = gaussian_tensor(n, rng);
            double res = 0.0;
            for (std::size_t i = 0; i < raw.size(); ++i) res += (raw[i] - p.components()[i]) * s.components()[i];
            CHECK(std::abs(res) < 1e-11);
        }
    }
}

TEST_CASE("Ricci, scalar curvature and the identity tensor") {
    Rng rng(5);
    for (int n = kMinDim; n <= kMaxDim; ++n) {
        const auto id = identity_tensor(n);
        CHECK(oracle::max_abs_diff(oracle::identity(n), id.components()) == 0.0);
        CHECK(scal(id) == doctest::Approx(n * (n - 1)));
        CHECK((ricci(id).matrix() - (n - 1.0) * Eigen::MatrixXd::Identity(n, n)).norm() < 1e-14);
        CHECK(norm(id) == doctest::Approx(std::sqrt(2.0 * n * (n - 1))));

        const auto r = gaussian_tensor(n, rng);
        const Eigen::MatrixXd ric = oracle::ricci(oracle::table(r), n);
        CHECK((ricci(r).matrix() - ric).norm() < 1e-12);
        CHECK(scal(r) == doctest::Approx(ric.trace()));
    }
}

TEST_CASE("Kulkarni-Nomizu product") {
    Rng rng(8);
    for (int n : {3, 4, 5}) {
        const auto g = SymBilinear::metric(n);
        const auto gg = kulkarni_nomizu(g, g);
        const auto id = identity_tensor(n);
        CHECK(oracle::max_abs_diff(oracle::table(2.0 * id), gg.components()) < 1e-15);

        Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n), b = Eigen::MatrixXd::Random(n, n);
        a = (a + a.transpose()).eval();
        b = (b + b.transpose()).eval();
        const auto ab = kulkarni_nomizu(SymBilinear::from_matrix(a), SymBilinear::from_matrix(b));
        CHECK(oracle::max_abs_diff(oracle::kn(a, b), ab.components()) < 1e-14);
        CHECK(symmetry_defect(ab.components(), n) < 1e-14);
    }
}

TEST_CASE("ell map and its inverse") {
    Rng rng(21);
    for (int n : {3, 4, 5, 8}) {
        const auto r = gaussian_tensor(n, rng);
        const EllParams p{0.3, 0.2};
        const auto l = ell_ab(r, p);
        // direct formula with the oracle product
        const auto ric = oracle::ricci(oracle::table(r), n);
        const auto term_b = oracle::kn(ric, Eigen::MatrixXd::Identity(n, n));
        const auto term_s = oracle::kn(Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(n, n));
        std::vector<double> expect = oracle::table(r);
        for (std::size_t i = 0; i < expect.size(); ++i)
            expect[i] += p.b * term_b[i] + (p.a - p.b) / n * ric.trace() * term_s[i];
        CHECK(oracle::max_abs_diff(expect, l.components()) < 1e-12);

        const auto back = ell_ab_inverse(l, p);
        CHECK(norm(back - r) < 1e-12 * norm(r));
        const auto fwd = ell_ab(ell_ab_inverse(r, p), p);
        CHECK(norm(fwd - r) < 1e-12 * norm(r));

        // the inverse is self-adjoint
        const auto s = gaussian_tensor(n, rng);
        CHECK(inner(ell_ab_inverse(r, p), s) == doctest::Approx(inner(r, ell_ab_inverse(s, p))).epsilon(1e-12));
    }
    // n = 4: 1 + (n-2) b vanishes at b = -1/2
    CHECK_THROWS_AS(ell_ab_inverse(identity_tensor(4), EllParams{0.1, -0.5}), Error);
}

TEST_CASE("upsilon and companion parameter") {
    CHECK(upsilon(4) == doctest::Approx((std::sqrt(20.0) - 2.0) / 8.0));
    for (int n = kMinDim; n <= kMaxDim; ++n) {
        const double u = upsilon(n);
        // at b = upsilon the two ell eigenvalue factors satisfy 2a = 1 + (n-2) b - 1 + ... ; check positivity
        CHECK(u > 0.0);
        CHECK(companion_a(n, u) == doctest::Approx(u + 0.5 * (n - 2) * u * u));
    }
}

TEST_CASE("orthogonal decomposition") {
    Rng rng(2);
    for (int n : {3, 4, 5, 7}) {
        const auto r = gaussian_tensor(n, rng);
        const auto d = decompose(r);
        CHECK(norm(d.scalar + d.ricci_traceless + d.weyl - r) < 1e-12);
        CHECK(std::abs(inner(d.scalar, d.ricci_traceless)) < 1e-12);
        CHECK(std::abs(inner(d.scalar, d.weyl)) < 1e-12);
        CHECK(std::abs(inner(d.ricci_traceless, d.weyl)) < 1e-12);
        CHECK(ricci(d.weyl).matrix().norm() < 1e-12);
        CHECK(std::abs(scal(d.ricci_traceless)) < 1e-12);
        if (n == 3) CHECK(norm(d.weyl) < 1e-12);
    }
}

TEST_CASE("Q map against the index-sum formula") {
    Rng rng(31);
    for (int n : {3, 4, 5}) {
        const auto r = gaussian_tensor(n, rng);
        const auto qn = oracle::q(oracle::table(r), n);
        const auto qr = q_map(r);
        CHECK(oracle::max_abs_diff(qn, qr.components()) < 1e-11 * oracle::norm(qn));
        // the raw quadratic already carries the curvature symmetries
        CHECK(symmetry_defect(qn, n) < 1e-12);
        // scal Q(R) = 2 |Ric|^2
        CHECK(scal(qr) == doctest::Approx(2.0 * ricci(r).matrix().squaredNorm()).epsilon(1e-12));
    }
    for (int n = kMinDim; n <= kMaxDim; ++n) {
        const auto q = q_map(identity_tensor(n));
        CHECK(norm(q - 2.0 * (n - 1) * identity_tensor(n)) < 1e-12);
    }
}

TEST_CASE("rotation, evaluation and equivariance") {
    Rng rng(4);
    for (int n : {3, 4, 5}) {
        const auto r = gaussian_tensor(n, rng);
        const auto o = haar_orthogonal(n, rng);
        const auto rot = rotate(r, o);
        CHECK(oracle::max_abs_diff(oracle::rotate(oracle::table(r), n, o), rot.components()) < 1e-12);
        CHECK(norm(rot) == doctest::Approx(norm(r)).epsilon(1e-13));
        CHECK(scal(rot) == doctest::Approx(scal(r)).epsilon(1e-12));
        CHECK(norm(q_map(rot) - rotate(q_map(r), o)) < 1e-11 * norm(q_map(r)));

        Eigen::VectorXd x = Eigen::VectorXd::Random(n), y = Eigen::VectorXd::Random(n);
        Eigen::VectorXd z = Eigen::VectorXd::Random(n), w = Eigen::VectorXd::Random(n);
        CHECK(evaluate(r, x, y, z, w) == doctest::Approx(oracle::eval4(oracle::table(r), n, x, y, z, w)));
        CHECK(evaluate(r, x, y, z, w) == doctest::Approx(-evaluate(r, y, x, z, w)));
    }
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(4, 4);
    bad(0, 1) = 1e-6;
    CHECK_THROWS_AS(rotate(identity_tensor(4), bad), Error);
}

TEST_CASE("dimension checks") {
    CHECK_THROWS_AS(CurvatureTensor(2), Error);
    CHECK_THROWS_AS(CurvatureTensor(9), Error);
    CHECK_THROWS_AS(identity_tensor(4) + identity_tensor(5), Error);
    CHECK_THROWS_AS(CurvatureTensor::from_symmetric(4, std::vector<double>(10)), Error);
    try {
        CurvatureTensor t(1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::dimension);
    }
}
