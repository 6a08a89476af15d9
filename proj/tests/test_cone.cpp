#include <doctest.h>

#include <cmath>
#include <cstring>

#include "curvcone/cone.hpp"
#include "curvcone/error.hpp"
#include "curvcone/random.hpp"
#include "oracles.hpp"

using namespace curvcone;

namespace {

FrameCertificate random_certificate(int n, Rng& rng) {
    FrameCertificate c;
    c.frame = random_frame(n, frame_width(n), rng);
    c.lambda = n >= 4 ? uniform01(rng) : 0.0;
    c.mu = uniform01(rng);
    return c;
}

FrameCertificate coordinate_certificate(int n, double lambda, double mu) {
    FrameCertificate c;
    c.frame = Eigen::MatrixXd::Identity(n, frame_width(n));
    c.lambda = lambda;
    c.mu = mu;
    return c;
}

std::vector<ConeSpec> all_families(int n) {
    return {ConeSpec::pic1(n),     ConeSpec::pic2(n),     ConeSpec::check(n, 1.0),          ConeSpec::hat(n, 0.3),
            ConeSpec::hat(n, 1.0), ConeSpec::ricci(n),    ConeSpec::tilde(n, 0.2, 1.0)};
}

const SearchBudget kSmall{3000, 12, 7, 1, 40};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("frame functional of the identity") {
    for (int n : {4, 5}) {
        Rng rng = make_rng(11, n);
        const auto id = identity_tensor(n);
        for (int t = 0; t < 5; ++t) {
            auto c = random_certificate(n, rng);
            c.lambda = c.mu = 0.0;
            CHECK(frame_functional(id, c, ConeSpec::pic2(n)) == doctest::Approx(1.0).epsilon(1e-13));
            c.lambda = c.mu = 1.0;
            CHECK(frame_functional(id, c, ConeSpec::pic2(n)) == doctest::Approx(4.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("frame functional is linear and matches the complex oracle") {
    for (int n : {4, 6}) {
        Rng rng = make_rng(12, n);
        for (int t = 0; t < 10; ++t) {
            const auto r = gaussian_tensor(n, rng);
            const auto s = gaussian_tensor(n, rng);
            const auto c = random_certificate(n, rng);
            const double sc = 1.7;
            for (const auto& spec : {ConeSpec::pic1(n), ConeSpec::pic2(n), ConeSpec::check(n, 0.5)}) {
                const double lhs = frame_functional(r + sc * s, c, spec);
                const double rhs = frame_functional(r, c, spec) + sc * frame_functional(s, c, spec);
                CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
            }
            const auto tr = oracle::table(r);
            const double pic2 = oracle::pic2_by_complex(tr, n, c.frame, c.lambda, c.mu);
            CHECK(frame_functional(r, c, ConeSpec::pic2(n)) == doctest::Approx(pic2).epsilon(1e-12));
            CHECK(frame_functional(r, c, ConeSpec::pic1(n)) ==
                  doctest::Approx(oracle::pic2_by_complex(tr, n, c.frame, c.lambda, 1.0)).epsilon(1e-12));
            const double w = (1 - c.lambda * c.lambda) * (1 - c.mu * c.mu) * oracle::ricci(tr, n).trace();
            CHECK(frame_functional(r, c, ConeSpec::check(n, 0.5)) == doctest::Approx(pic2 + 2.0 * w).epsilon(1e-12));
        }
    }
}

TEST_CASE("certificate representers reproduce certificate values") {
    for (int n : {4, 5}) {
        Rng rng = make_rng(13, n);
        for (const auto& spec : all_families(n)) {
            for (int t = 0; t < 4; ++t) {
                const auto r = gaussian_tensor(n, rng);
                auto c = random_certificate(n, rng);
                if (spec.family == ConeFamily::ricci || (spec.family == ConeFamily::hat && t % 2 == 1))
                    c.kind = CertificateKind::ricci_direction;
                const auto g = certificate_representer(c, spec);
                CHECK(symmetry_defect(g.components(), n) < 1e-13);
                CHECK(inner(g, r) == doctest::Approx(certificate_value(r, c, spec)).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("frame functional rejects preimage families and bad certificates") {
    const int n = 4;
    const auto id = identity_tensor(n);
    auto c = coordinate_certificate(n, 0.5, 0.5);
    CHECK_THROWS_AS(frame_functional(id, c, ConeSpec::hat(n, 0.3)), Error);
    CHECK_THROWS_AS(frame_functional(id, c, ConeSpec::pic2(5)), Error);
    auto bad = c;
    bad.lambda = 1.5;
    CHECK_THROWS_AS(frame_functional(id, bad, ConeSpec::pic2(n)), Error);
    bad = c;
    bad.frame(0, 1) = 0.1;
    CHECK_THROWS_AS(frame_functional(id, bad, ConeSpec::pic2(n)), Error);
    bad = c;
    bad.frame = Eigen::MatrixXd::Identity(n, 3);
    CHECK_THROWS_AS(frame_functional(id, bad, ConeSpec::pic2(n)), Error);
}

TEST_CASE("margins of the identity and its negative") {
    for (int n : {3, 4, 5}) {
        const auto id = identity_tensor(n);
        const double len = std::sqrt(2.0 * n * (n - 1));
        const auto pic2 = membership_margin(id, ConeSpec::pic2(n), kSmall);
        CHECK(pic2.margin == doctest::Approx(1.0 / len).epsilon(1e-12));
        CHECK_FALSE(pic2.sound_violation);
        CHECK(pic2.certificate.lambda == doctest::Approx(0.0));
        CHECK(pic2.certificate.mu == doctest::Approx(0.0));

        const auto neg = membership_margin(-id, ConeSpec::pic1(n), kSmall);
        CHECK(neg.sound_violation);
        // the functional at lambda = 0 is -(R1313 + R2323)
        CHECK(certificate_value(-id, coordinate_certificate(n, 0.0, 1.0), ConeSpec::pic1(n)) == doctest::Approx(-2.0));
        // the infimum is attained at lambda = 1 in dimension >= 4
        CHECK(neg.margin * len == doctest::Approx(n >= 4 ? -4.0 : -2.0).epsilon(1e-12));
    }
    for (const auto& spec : all_families(4)) {
        CHECK(membership_margin(identity_tensor(4), spec, kSmall).margin > 0.0);
        CHECK(membership_margin(-identity_tensor(4), spec, kSmall).sound_violation);
    }
}

TEST_CASE("dimension three: pic1 margin equals the least Ricci eigenvalue") {
    const int n = 3;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng = make_rng(14, seed);
        auto r = gaussian_tensor(n, rng);
        r.add_scaled(0.4 * (static_cast<double>(seed % 5) - 1.0), identity_tensor(n));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(oracle::ricci(oracle::table(r), n));
        const auto rep = membership_margin(r, ConeSpec::pic1(n), kSmall);
        CHECK(rep.margin * tolerance_scale(r) == doctest::Approx(eig.eigenvalues()[0]).epsilon(1e-9));
    }
}

TEST_CASE("violations re-verify bit for bit") {
    for (int n : {4, 5}) {
        Rng rng = make_rng(15, n);
        for (const auto& spec : all_families(n)) {
            const auto r = gaussian_tensor(n, rng);
            const auto rep = membership_margin(r, spec, kSmall);
            REQUIRE(rep.sound_violation);
            const double v = certificate_value(r, rep.certificate, spec);
            CHECK(same_bits(v, rep.certificate.value));
            CHECK(same_bits(v / tolerance_scale(r), rep.margin));
            if (spec.family != ConeFamily::ricci && !spec.uses_preimage() &&
                rep.certificate.kind == CertificateKind::frame) {
                CHECK(same_bits(frame_functional(r, rep.certificate, spec), v));
            }
        }
    }
}

TEST_CASE("margins are rotation invariant") {
    const int n = 4;
    Rng rng = make_rng(16, 0);
    for (const auto& spec : {ConeSpec::pic1(n), ConeSpec::pic2(n), ConeSpec::check(n, 1.0), ConeSpec::hat(n, 0.3)}) {
        for (int t = 0; t < 2; ++t) {
            auto r = gaussian_tensor(n, rng);
            r.add_scaled(1.0, identity_tensor(n));
            const auto o = haar_orthogonal(n, rng);
            const double m1 = membership_margin(r, spec).margin;
            const double m2 = membership_margin(rotate(r, o), spec).margin;
            CHECK(std::abs(m1 - m2) <= 2e-8);
        }
    }
}

TEST_CASE("search is deterministic and independent of the worker count") {
    const int n = 5;
    Rng rng = make_rng(17, 0);
    const auto r = gaussian_tensor(n, rng);
    SearchBudget b = kSmall;
    const auto a = membership_margin(r, ConeSpec::pic2(n), b);
    const auto a2 = membership_margin(r, ConeSpec::pic2(n), b);
    b.workers = 3;
    const auto c = membership_margin(r, ConeSpec::pic2(n), b);
    CHECK(same_bits(a.margin, a2.margin));
    CHECK(same_bits(a.margin, c.margin));
    CHECK(a.certificate.frame == c.certificate.frame);
    CHECK(a.budget_used.frames_sampled == c.budget_used.frames_sampled);
    CHECK(a.budget_used.evaluations == c.budget_used.evaluations);
    CHECK_THROWS_AS(membership_margin(r, ConeSpec::pic2(n), SearchBudget{-1, 1, 0, 1, 10}), Error);
}

TEST_CASE("cone syntax") {
    const int n = 4;
    for (const auto& spec : all_families(n)) {
        const auto back = parse_cone(spec.label(), n);
        CHECK(back.family == spec.family);
        CHECK(back.s == spec.s);
        CHECK(back.b == spec.b);
        CHECK(back.label() == spec.label());
    }
    CHECK(parse_cone("tildec:s=1,b=0.2", n).label() == "tildec:b=0.2,s=1");
    CHECK(parse_cone("checkc:s=0.1", n).label() == "checkc:s=0.1");
    for (const char* bad : {"pic3", "pic1:s=1", "checkc", "checkc:s=", "checkc:s=1x", "hatc:s=1,b=2", "tildec:b=0.2",
                            "checkc:t=1", "checkc:s"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_cone(bad, n), Error);
    }
    for (const char* bad : {"checkc:s=0", "checkc:s=-1", "tildec:b=0.9,s=1", "tildec:b=0,s=1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_cone(bad, n), Error);
    }
    CHECK_THROWS_AS(parse_cone("hatc:s=1", 3), Error);
    CHECK_NOTHROW(parse_cone("checkc:s=1", 3));
}

TEST_CASE("hat branch constants are continuous at s = 1/2") {
    for (int n : {4, 6}) {
        const auto lo = ConeSpec::hat(n, 0.5);
        const auto hi = ConeSpec::hat(n, std::nextafter(0.5, 1.0));
        CHECK(lo.ell().a == doctest::Approx(hi.ell().a));
        CHECK(lo.ell().b == doctest::Approx(hi.ell().b));
        CHECK(lo.ricci_pinch() == doctest::Approx(hi.ricci_pinch()));
    }
    const auto t = ConeSpec::tilde(4, 0.2, 1.0);
    CHECK(t.ell().a == doctest::Approx(0.2 + 0.04));
}

TEST_CASE("pinch shift") {
    Rng rng = make_rng(18, 0);
    for (int n : {3, 4, 6}) {
        const auto r = gaussian_tensor(n, rng);
        CHECK(oracle::max_abs_diff(oracle::table(pinch_shift(r, 0.0, ShiftSign::minus)), r.components()) == 0.0);
        const double eps = 0.01;
        const auto m = pinch_shift(r, eps, ShiftSign::minus);
        CHECK(scal(m) == doctest::Approx((1.0 - eps * n * (n - 1)) * scal(r)).epsilon(1e-12));
        // undoing the shift needs eps scaled by the scal factor
        const double back = eps / (1.0 - eps * n * (n - 1));
        const auto u = pinch_shift(m, back, ShiftSign::plus);
        CHECK(oracle::max_abs_diff(oracle::table(u), r.components()) < 1e-12 * tolerance_scale(r));
    }
}

TEST_CASE("projection of the negative identity") {
    for (int n : {3, 4}) {
        const auto id = identity_tensor(n);
        for (const auto& spec : {ConeSpec::pic1(n), ConeSpec::pic2(n), ConeSpec::ricci(n)}) {
            const auto p = project(-id, spec);
            CHECK(p.converged);
            CHECK(norm(p.point) < 1e-6);
            CHECK(p.distance == doctest::Approx(std::sqrt(2.0 * n * (n - 1))).epsilon(1e-6));
        }
    }
}

TEST_CASE("projection properties") {
    const int n = 4;
    ProjectionOptions opt;
    for (const auto& spec : all_families(n)) {
        CAPTURE(spec.label());
        Rng rng = make_rng(19, static_cast<std::uint64_t>(spec.family));
        const auto r = gaussian_tensor(n, rng);
        const auto p = project(r, spec, opt);
        REQUIRE(p.converged);
        CHECK(p.final_margin >= -opt.tol);
        CHECK(p.distance == doctest::Approx(norm(r - p.point)));
        CHECK(symmetry_defect(p.point.components(), n) < 1e-12);

        // fixed point
        const auto again = project(p.point, spec, opt);
        CHECK(again.converged);
        CHECK(norm(again.point - p.point) <= 1e-6 * tolerance_scale(r));

        // positive homogeneity; a feasibility slack of tol moves the foot point
        // by up to order sqrt(tol) times the distance
        const auto scaled = project(3.0 * r, spec, opt);
        CHECK(norm(scaled.point - 3.0 * p.point) <= 10.0 * std::sqrt(opt.tol) * tolerance_scale(3.0 * r));

        // obtuseness against members: the identity ray, 0, and other projections
        const CurvatureTensor normal = r - p.point;
        std::vector<CurvatureTensor> members{identity_tensor(n), CurvatureTensor(n), 2.0 * p.point};
        for (int k = 0; k < 3; ++k) members.push_back(project(gaussian_tensor(n, rng), spec, opt).point);
        for (const auto& s : members) {
            const CurvatureTensor d = s - p.point;
            CHECK(inner(normal, d) <= 1e-6 * norm(normal) * std::max(1.0, norm(d)));
        }

        // xi is the unit outer normal at the foot
        const auto x = xi(r, spec, opt);
        CHECK(norm(x) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(inner(x, p.point) <= 1e-6 * tolerance_scale(p.point));
        CHECK_THROWS_AS(xi(identity_tensor(n), spec, opt), Error);
        CHECK(distance(identity_tensor(n), spec, opt) == 0.0);
    }
}

TEST_CASE("member sampling") {
    const auto spec = ConeSpec::pic2(4);
    const auto a = sample_member(spec, 5);
    const auto b = sample_member(spec, 5);
    CHECK(norm(a.tensor) >= 1e-6);
    CHECK(oracle::max_abs_diff(oracle::table(a.tensor), b.tensor.components()) == 0.0);
    CHECK(membership_margin(a.tensor, spec, kSmall).margin >= -1e-9);
    CHECK(scal(a.tensor) > 0.0);
}

TEST_CASE("inclusion chain on projected members") {
    const int n = 4;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto m = sample_member(ConeSpec::pic2(n), 100 + seed).tensor;
        for (double s : {0.5, 1.0, 5.0, 50.0}) CHECK(membership_margin(m, ConeSpec::check(n, s), kSmall).margin >= -1e-7);
        CHECK(membership_margin(m, ConeSpec::pic1(n), kSmall).margin >= -1e-7);
        const auto c5 = sample_member(ConeSpec::check(n, 5.0), 200 + seed).tensor;
        CHECK(membership_margin(c5, ConeSpec::check(n, 0.5), kSmall).margin >= -1e-7);
        CHECK(membership_margin(c5, ConeSpec::pic1(n), kSmall).margin >= -1e-7);
    }
}
