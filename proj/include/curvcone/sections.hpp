#pragma once

// Two-complex-dimensional sections of C^n, the complex sectional curvature
// R(v, w, conj v, conj w) of the complex-bilinear extension of R, isotropic
// vectors, and the invariant alpha in [0, 1] that is 0 exactly on PIC1
// sections and 1 exactly on complexified real planes.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

#include "curvcone/frame.hpp"
#include "curvcone/tensor.hpp"

namespace curvcone {

using cplx = std::complex<double>;

// Hermitian-orthonormal basis (v, w) of a section.
struct ComplexSection {
    int n = 0;
    Eigen::VectorXcd v;
    Eigen::VectorXcd w;
};

// Throws Error(invalid_section) unless |v| = |w| = 1 and <v, w> = 0 to 1e-12.
void validate(const ComplexSection& s);

// Complex-bilinear pairing (x, y) = sum_i x_i y_i (no conjugation).
cplx bilinear(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y);

// R(a, b, c, d) of the complex-bilinear extension.
cplx evaluate_complex(const CurvatureTensor& r, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                      const Eigen::VectorXcd& c, const Eigen::VectorXcd& d);

// Real part of R(v, w, conj v, conj w). Throws Error(imaginary_residual) if the
// imaginary part exceeds 1e-10 max(1, |R|).
double complex_sectional_curvature(const CurvatureTensor& r, const ComplexSection& s);

// Unit v in the section with (v, v) = 0. When two isotropic directions exist the
// root v = v0 + z w0 with smaller |z| is chosen (ties: smaller real part); the
// result is rotated so its first non-negligible entry is real and positive.
Eigen::VectorXcd isotropic_unit_vector(const ComplexSection& s);

double alpha(const ComplexSection& s);

// Replaces (v, w) by (u00 v + u10 w, u01 v + u11 w) for a 2x2 unitary u.
ComplexSection rebase(const ComplexSection& s, const Eigen::Matrix2cd& u);

enum class SectionKind { generic, pic1, real };

// Deterministic in (n, kind, seed). pic1 sections have alpha = 0 exactly
// (coordinate-aligned with random phases); real sections have alpha = 1 and,
// like generic ones, come in a random unitary basis.
ComplexSection sample_section(int n, SectionKind kind, std::uint64_t seed);

// Section spanned by an isotropic unit v and w = a conj(v) + sqrt(1 - a^2) u.
ComplexSection section_with_alpha(int n, double a, std::uint64_t seed);

// Real frame (e1..e4) and (lambda, mu) in [0,1]^2 with
//   X = (e1 + i mu e2) / sqrt(1 + mu^2),  Y = (e3 + i lambda e4) / sqrt(1 + lambda^2)
// a Hermitian-orthonormal basis of the section with (X, Y) = 0. Then
//   K(section) (1 + lambda^2)(1 + mu^2) = R1313 + lambda^2 R1414 + mu^2 R2323
//                                         + lambda^2 mu^2 R2424 - 2 lambda mu R1234.
// In dimension 3 the frame has three columns and lambda = 0.
FrameCertificate section_frame(const ComplexSection& s);

// alpha^2 = (1 - lambda^2)(1 - mu^2) / ((1 + lambda^2)(1 + mu^2)) for a frame
// produced by section_frame.
double alpha_from_weights(double lambda, double mu);

}  // namespace curvcone
