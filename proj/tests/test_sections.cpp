#include <doctest.h>

#include <cmath>

#include "curvcone/error.hpp"
#include "curvcone/random.hpp"
#include "curvcone/sections.hpp"
#include "oracles.hpp"

using namespace curvcone;

namespace {

using C = std::complex<double>;

ComplexSection real_plane(int n, int a, int b) {
    ComplexSection s{n, Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(n)};
    s.v[a] = 1.0;
    s.w[b] = 1.0;
    return s;
}

Eigen::Matrix2cd random_unitary(Rng& rng) {
    Eigen::Matrix2cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = C(standard_normal(rng), standard_normal(rng));
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(m);
    return qr.householderQ();
}

}  // namespace

TEST_CASE("complex sectional curvature of the identity") {
    // K(v, w) = (v, conj v)(w, conj w) - |(v, conj w)|^2 = 1 - |(v, w)_bilinear|^2 ... computed from the oracle
    for (int n : {3, 4, 6}) {
        const auto id = identity_tensor(n);
        CHECK(complex_sectional_curvature(id, real_plane(n, 0, 1)) == doctest::Approx(1.0));
        for (std::uint64_t seed = 1; seed < 6; ++seed) {
            const auto s = sample_section(n, SectionKind::generic, seed);
            const auto t = oracle::table(id);
            const double k = oracle::eval4(t, n, s.v, s.w, Eigen::VectorXcd(s.v.conjugate()),
                                           Eigen::VectorXcd(s.w.conjugate()))
                                 .real();
            CHECK(complex_sectional_curvature(id, s) == doctest::Approx(k));
        }
    }
}

TEST_CASE("alpha examples") {
    const int n = 4;
    CHECK(alpha(real_plane(n, 0, 2)) == doctest::Approx(1.0));
    // span{e1 + i e2, e3 + i e4} / sqrt2 is a PIC1 section
    ComplexSection iso{n, Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(n)};
    iso.v << 1.0, C(0, 1), 0.0, 0.0;
    iso.w << 0.0, 0.0, 1.0, C(0, 1);
    iso.v /= std::sqrt(2.0);
    iso.w /= std::sqrt(2.0);
    CHECK(alpha(iso) <= 1e-14);
    // span{e1, (e2 + i e3)/sqrt2}
    ComplexSection mixed{n, Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(n)};
    mixed.v[0] = 1.0;
    mixed.w[1] = 1.0 / std::sqrt(2.0);
    mixed.w[2] = C(0, 1.0 / std::sqrt(2.0));
    CHECK(alpha(mixed) <= 1e-14);
    const auto iv = isotropic_unit_vector(mixed);
    CHECK(std::abs(iv[0]) < 1e-14);
    CHECK(std::abs(iv[1]) == doctest::Approx(1.0 / std::sqrt(2.0)));
    // complexified span{e1, e2}: isotropic vector (e1 +- i e2)/sqrt2
    const auto rv = isotropic_unit_vector(real_plane(n, 0, 1));
    CHECK(std::abs(rv[0]) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(rv[1]) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(bilinear(rv, rv)) < 1e-15);
    for (std::uint64_t seed = 1; seed < 10; ++seed) {
        CHECK(alpha(sample_section(n, SectionKind::real, seed)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(alpha(sample_section(n, SectionKind::pic1, seed)) <= 1e-10);
        CHECK(alpha(sample_section(3, SectionKind::pic1, seed)) <= 1e-10);
        for (double a : {0.25, 0.5, 0.9, 1.0}) {
            CHECK(alpha(section_with_alpha(5, a, seed)) == doctest::Approx(a).epsilon(1e-10));
        }
    }
}

TEST_CASE("curvature and alpha do not depend on the chosen basis") {
    Rng rng(99);
    for (int n : {3, 4, 5}) {
        const auto r = gaussian_tensor(n, rng);
        for (std::uint64_t seed = 1; seed < 8; ++seed) {
            const auto s = sample_section(n, SectionKind::generic, seed);
            const auto t = rebase(s, random_unitary(rng));
            validate(t);
            CHECK(complex_sectional_curvature(r, t) == doctest::Approx(complex_sectional_curvature(r, s)));
            CHECK(alpha(t) == doctest::Approx(alpha(s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("isotropic unit vectors") {
    for (int n : {3, 4, 7}) {
        for (std::uint64_t seed = 1; seed < 350; ++seed) {
            const auto s = sample_section(n, SectionKind::generic, seed);
            const auto v = isotropic_unit_vector(s);
            CHECK(std::abs(bilinear(v, v)) < 1e-12);
            CHECK(v.norm() == doctest::Approx(1.0));
            // v lies in the section
            const Eigen::VectorXcd rest = v - s.v.dot(v) * s.v - s.w.dot(v) * s.w;
            CHECK(rest.norm() < 1e-12);
        }
    }
}

TEST_CASE("section frames reproduce the curvature") {
    Rng rng(7);
    for (int n : {3, 4, 5, 6}) {
        const auto r = gaussian_tensor(n, rng);
        const auto t = oracle::table(r);
        for (std::uint64_t seed = 1; seed < 12; ++seed) {
            for (auto kind : {SectionKind::generic, SectionKind::pic1, SectionKind::real}) {
                if (n == 3 && kind == SectionKind::pic1) continue;
                const auto s = sample_section(n, kind, seed);
                const auto f = section_frame(s);
                REQUIRE(f.frame.cols() == frame_width(n));
                CHECK(orthonormality_defect(f.frame) < 1e-12);
                CHECK(f.lambda >= 0.0);
                CHECK(f.lambda <= f.mu + 1e-15);
                CHECK(f.mu <= 1.0);
                const double k = complex_sectional_curvature(r, s);
                const double w = (1.0 + f.lambda * f.lambda) * (1.0 + f.mu * f.mu);
                CHECK(k * w == doctest::Approx(oracle::pic2_by_complex(t, n, f.frame, f.lambda, f.mu)).epsilon(1e-9));
                // both sides are square roots, so agreement is only to about 1e-8 near alpha = 0
                CHECK(std::abs(alpha_from_weights(f.lambda, f.mu) - alpha(s)) < 1e-7);
            }
        }
    }
}

TEST_CASE("invalid sections are rejected") {
    ComplexSection s = real_plane(4, 0, 0);
    CHECK_THROWS_AS(validate(s), Error);
    s = real_plane(4, 0, 1);
    s.w *= 2.0;
    CHECK_THROWS_AS(complex_sectional_curvature(identity_tensor(4), s), Error);
}
