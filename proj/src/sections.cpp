#include "curvcone/sections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "curvcone/error.hpp"
#include "curvcone/kernels.hpp"
#include "curvcone/random.hpp"
#include "frame_detail.hpp"

namespace curvcone {
namespace {

constexpr double kSectionTol = 1e-12;

Eigen::VectorXcd complex_gaussian(int n, Rng& rng) {
    Eigen::VectorXcd out(n);
    for (int i = 0; i < n; ++i) out[i] = cplx(standard_normal(rng), standard_normal(rng));
    return out;
}

Eigen::Matrix2cd random_unitary2(Rng& rng) {
    Eigen::Matrix2cd g;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) g(r, c) = cplx(standard_normal(rng), standard_normal(rng));
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(g);
    Eigen::Matrix2cd q = qr.householderQ();
    return q;
}

// Hermitian Gram-Schmidt of w against unit v, twice.
Eigen::VectorXcd orthogonalize(const Eigen::VectorXcd& v, Eigen::VectorXcd w) {
    for (int pass = 0; pass < 2; ++pass) w -= v.dot(w) * v;  // Eigen's dot conjugates the left side
    return w.normalized();
}

void normalize_phase(Eigen::VectorXcd& x) {
    const double scale = x.cwiseAbs().maxCoeff();
    for (int i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x[i]);
        if (mag > 1e-8 * scale) {
            x *= std::conj(x[i]) / mag;
            x[i] = cplx(x[i].real(), 0.0);
            return;
        }
    }
}

// Random complex unit vector orthogonal (over R) to the columns of `real_basis`.
Eigen::VectorXcd complex_unit_in_complement(const Eigen::MatrixXd& real_basis, Rng& rng) {
    const int n = static_cast<int>(real_basis.rows());
    Eigen::VectorXcd u = complex_gaussian(n, rng);
    for (int pass = 0; pass < 2; ++pass)
        for (int c = 0; c < real_basis.cols(); ++c) {
            const Eigen::VectorXd e = real_basis.col(c);
            u -= cplx(e.dot(u.real()), e.dot(u.imag())) * e.cast<cplx>();
        }
    return u.normalized();
}

}  // namespace

void validate(const ComplexSection& s) {
    check_dimension(s.n);
    if (s.v.size() != s.n || s.w.size() != s.n) throw Error(ErrorCode::invalid_section, "section vectors have wrong length");
    const double nv = s.v.norm();
    const double nw = s.w.norm();
    const double cross = std::abs(s.v.dot(s.w));
    if (std::abs(nv - 1.0) > kSectionTol || std::abs(nw - 1.0) > kSectionTol || cross > kSectionTol) {
        throw Error(ErrorCode::invalid_section, "section basis is not Hermitian-orthonormal to 1e-12");
    }
}

cplx bilinear(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) { return (x.array() * y.array()).sum(); }

cplx evaluate_complex(const CurvatureTensor& r, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                      const Eigen::VectorXcd& c, const Eigen::VectorXcd& d) {
    const int n = r.dim();
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    std::vector<double> cd_re(n2), cd_im(n2), u_re(n2), u_im(n2);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const cplx p = c[k] * d[l];
            cd_re[k * n + l] = p.real();
            cd_im[k * n + l] = p.imag();
        }
    const auto& ker = kernels::active();
    ker.gemv(r.components().data(), n2, n2, cd_re.data(), u_re.data());
    ker.gemv(r.components().data(), n2, n2, cd_im.data(), u_im.data());
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += a[i] * b[j] * cplx(u_re[i * n + j], u_im[i * n + j]);
    return acc;
}

double complex_sectional_curvature(const CurvatureTensor& r, const ComplexSection& s) {
    validate(s);
    if (s.n != r.dim()) throw Error(ErrorCode::dimension, "section and tensor dimensions differ");
    const cplx k = evaluate_complex(r, s.v, s.w, s.v.conjugate(), s.w.conjugate());
    if (std::abs(k.imag()) > 1e-10 * tolerance_scale(r)) {
        throw Error(ErrorCode::imaginary_residual,
                    "complex sectional curvature has imaginary part " + std::to_string(k.imag()));
    }
    return k.real();
}

Eigen::VectorXcd isotropic_unit_vector(const ComplexSection& s) {
    validate(s);
    const cplx bvv = bilinear(s.v, s.v);
    const cplx bvw = bilinear(s.v, s.w);
    const cplx bww = bilinear(s.w, s.w);
    constexpr double tiny = 1e-14;

    Eigen::VectorXcd x;
    if (std::abs(bvv) <= tiny) {
        x = s.v;  // z = 0 is a root and has the smallest modulus
    } else if (std::abs(bww) <= tiny) {
        // (w, w) = 0: the quadratic is linear in z and w itself is the root at infinity
        if (std::abs(bvw) > tiny) {
            x = s.v + (-bvv / (2.0 * bvw)) * s.w;
        } else {
            x = s.w;
        }
    } else {
        // bww z^2 + 2 bvw z + bvv = 0, via the cancellation-free form of the roots
        const cplx root = std::sqrt(bvw * bvw - bvv * bww);
        const cplx q = std::abs(bvw + root) >= std::abs(bvw - root) ? -(bvw + root) : -(bvw - root);
        cplx z1 = q / bww;
        cplx z2 = std::abs(q) > 0.0 ? bvv / q : z1;
        cplx z = z1;
        const double m1 = std::abs(z1), m2 = std::abs(z2);
        if (m2 < m1 || (m2 == m1 && (z2.real() < z1.real() || (z2.real() == z1.real() && z2.imag() < z1.imag())))) {
            z = z2;
        }
        x = s.v + z * s.w;
    }
    x.normalize();
    normalize_phase(x);
    return x;
}

double alpha(const ComplexSection& s) {
    validate(s);
    // |det| of the bilinear Gram matrix equals alpha^2 in every unitary basis;
    // it stays accurate near PIC1 sections, where all entries are small
    const cplx bvv = bilinear(s.v, s.v);
    const cplx bvw = bilinear(s.v, s.w);
    const cplx bww = bilinear(s.w, s.w);
    return std::clamp(std::sqrt(std::abs(bvv * bww - bvw * bvw)), 0.0, 1.0);
}

ComplexSection rebase(const ComplexSection& s, const Eigen::Matrix2cd& u) {
    ComplexSection out;
    out.n = s.n;
    out.v = u(0, 0) * s.v + u(1, 0) * s.w;
    out.w = u(0, 1) * s.v + u(1, 1) * s.w;
    return out;
}

ComplexSection sample_section(int n, SectionKind kind, std::uint64_t seed) {
    check_dimension(n);
    Rng rng = make_rng(seed, 0x5ec7);
    ComplexSection s;
    s.n = n;
    switch (kind) {
        case SectionKind::generic: {
            s.v = complex_gaussian(n, rng).normalized();
            s.w = orthogonalize(s.v, complex_gaussian(n, rng));
            return s;
        }
        case SectionKind::pic1: {
            // Coordinate-aligned construction with random phases: alpha grows like the
            // square root of any perturbation, so a rotated frame would leave alpha
            // near 1e-8 instead of 0.
            std::vector<int> axes(n);
            std::iota(axes.begin(), axes.end(), 0);
            std::shuffle(axes.begin(), axes.end(), rng);
            const cplx pv = std::polar(1.0, 2.0 * M_PI * uniform01(rng));
            const cplx pw = std::polar(1.0, 2.0 * M_PI * uniform01(rng));
            const double h = 1.0 / std::sqrt(2.0);
            s.v = Eigen::VectorXcd::Zero(n);
            s.w = Eigen::VectorXcd::Zero(n);
            s.v[axes[0]] = pv * h;
            s.v[axes[1]] = cplx(0.0, 1.0) * (pv * h);
            if (n >= 4) {
                const double theta = 0.5 * M_PI * uniform01(rng);
                s.w[axes[2]] = pw * std::cos(theta);
                s.w[axes[3]] = cplx(0.0, 1.0) * (pw * std::sin(theta));
            } else {
                s.w[axes[2]] = pw;
            }
            return s;
        }
        case SectionKind::real: {
            const Eigen::MatrixXd e = random_frame(n, 2, rng);
            s.v = e.col(0).cast<cplx>();
            s.w = e.col(1).cast<cplx>();
            break;
        }
        default:
            throw Error(ErrorCode::invalid_argument, "unsupported section kind");
    }
    ComplexSection out = rebase(s, random_unitary2(rng));
    out.w = orthogonalize(out.v.normalized(), out.w);
    out.v.normalize();
    return out;
}

ComplexSection section_with_alpha(int n, double a, std::uint64_t seed) {
    check_dimension(n);
    if (a < 0.0 || a > 1.0) throw Error(ErrorCode::invalid_argument, "alpha must lie in [0,1]");
    Rng rng = make_rng(seed, 0xa1fa);
    const Eigen::MatrixXd e = random_frame(n, 2, rng);
    ComplexSection s;
    s.n = n;
    s.v = (e.col(0).cast<cplx>() + cplx(0.0, 1.0) * e.col(1).cast<cplx>()) / std::sqrt(2.0);
    const Eigen::VectorXcd u = complex_unit_in_complement(e, rng);
    s.w = a * s.v.conjugate() + std::sqrt(1.0 - a * a) * u;
    return s;
}

FrameCertificate section_frame(const ComplexSection& s) {
    validate(s);
    const int n = s.n;
    Eigen::Matrix2cd b;
    b(0, 0) = bilinear(s.v, s.v);
    b(0, 1) = b(1, 0) = bilinear(s.v, s.w);
    b(1, 1) = bilinear(s.w, s.w);

    // Takagi vector c with B c = sigma conj(c): c is a fixed point of the
    // antilinear map J c = conj(B c) / sigma on the top singular space.
    Eigen::Vector2cd c(1.0, 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(b.adjoint() * b);
    const double sigma = std::sqrt(std::max(eig.eigenvalues()[1], 0.0));
    if (sigma > 1e-14) {
        const Eigen::Vector2cd top = eig.eigenvectors().col(1);
        const Eigen::Vector2cd jt = (b * top).conjugate() / sigma;
        const Eigen::Vector2cd plus = top + jt;
        const Eigen::Vector2cd minus = top - jt;
        c = plus.norm() >= minus.norm() ? Eigen::Vector2cd(plus.normalized())
                                        : Eigen::Vector2cd(cplx(0.0, 1.0) * minus.normalized());
    }
    const Eigen::Vector2cd d(-std::conj(c[1]), std::conj(c[0]));
    Eigen::VectorXcd x = c[0] * s.v + c[1] * s.w;
    Eigen::VectorXcd y = d[0] * s.v + d[1] * s.w;
    const cplx xx = bilinear(x, x);
    const cplx yy = bilinear(y, y);
    if (std::abs(xx) > 0.0) x *= std::exp(cplx(0.0, -0.5 * std::arg(xx)));
    if (std::abs(yy) > 0.0) y *= std::exp(cplx(0.0, -0.5 * std::arg(yy)));

    // x = a + i b with a . b = 0 and |a| >= |b|; same for y
    auto split = [](const Eigen::VectorXcd& z, Eigen::VectorXd& major, Eigen::VectorXd& minor, double& ratio) {
        major = z.real();
        minor = z.imag();
        const double la = major.norm();
        const double lb = minor.norm();
        ratio = la > 0.0 ? std::min(lb / la, 1.0) : 1.0;
        major /= la;
        if (lb > 1e-12) {
            minor /= lb;
        } else {
            minor.setZero();
            ratio = 0.0;
        }
    };
    Eigen::VectorXd e1, e2, e3, e4;
    double mu = 0.0, lambda = 0.0;
    split(x, e1, e2, mu);
    split(y, e3, e4, lambda);
    if (lambda > mu) {
        // the functional is symmetric under exchanging the two basis vectors
        std::swap(e1, e3);
        std::swap(e2, e4);
        std::swap(mu, lambda);
    }

    const int k = frame_width(n);
    FrameCertificate cert;
    cert.kind = CertificateKind::frame;
    cert.mu = mu;
    cert.lambda = k == 4 ? lambda : 0.0;

    // assemble the known columns, then fill any zero-weight direction
    Eigen::MatrixXd known(n, 0);
    auto append = [&](const Eigen::VectorXd& col) {
        known.conservativeResize(n, known.cols() + 1);
        known.col(known.cols() - 1) = col;
    };
    append(e1);
    if (mu > 0.0) append(e2);
    append(e3);
    if (k == 4 && lambda > 0.0) append(e4);
    const Eigen::MatrixXd full = detail::complete_basis(known, std::min(n, static_cast<int>(known.cols()) + 2));
    // column order in `full`: e1, [e2], e3, [e4], then completions
    int next = static_cast<int>(known.cols());
    Eigen::MatrixXd frame(n, k);
    int col = 0;
    frame.col(0) = full.col(col++);
    frame.col(1) = mu > 0.0 ? Eigen::VectorXd(full.col(col++)) : Eigen::VectorXd(full.col(next++));
    frame.col(2) = full.col(col++);
    if (k == 4) frame.col(3) = lambda > 0.0 ? Eigen::VectorXd(full.col(col++)) : Eigen::VectorXd(full.col(next++));
    orthonormalize_columns(frame);
    cert.frame = frame;
    return cert;
}

double alpha_from_weights(double lambda, double mu) {
    const double l2 = lambda * lambda, m2 = mu * mu;
    return std::sqrt(std::max(0.0, (1.0 - l2) * (1.0 - m2) / ((1.0 + l2) * (1.0 + m2))));
}

}  // namespace curvcone
