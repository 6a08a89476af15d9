#pragma once

// Algebraic curvature tensors on R^n stored as dense n^4 tables.
//
// Index convention: R(i,j,k,l) with Ric(R)_ik = sum_j R(i,j,k,j) and
// scal(R) = tr Ric(R). The identity tensor I(i,j,k,l) = d_ik d_jl - d_il d_jk
// is the curvature of the unit round sphere. Inner products and norms are
// full index sums over all n^4 components.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace curvcone {

inline constexpr int kMinDim = 3;
inline constexpr int kMaxDim = 8;

// Throws Error(dimension) unless kMinDim <= n <= kMaxDim.
void check_dimension(int n);

class CurvatureTensor {
public:
    // The zero tensor in dimension n.
    explicit CurvatureTensor(int n);

    // Wrap a table that is already known to carry the curvature symmetries.
    // No projection is applied; use canonical_project for untrusted data.
    static CurvatureTensor from_symmetric(int n, std::vector<double> components);

    int dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::span<const double> components() const noexcept { return data_; }

    double operator()(int i, int j, int k, int l) const noexcept {
        return data_[((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l];
    }

    CurvatureTensor& operator+=(const CurvatureTensor& other);
    CurvatureTensor& operator-=(const CurvatureTensor& other);
    CurvatureTensor& operator*=(double c);
    // this += c * other
    CurvatureTensor& add_scaled(double c, const CurvatureTensor& other);

    friend CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b) { return a += b; }
    friend CurvatureTensor operator-(CurvatureTensor a, const CurvatureTensor& b) { return a -= b; }
    friend CurvatureTensor operator*(double c, CurvatureTensor a) { return a *= c; }
    friend CurvatureTensor operator-(CurvatureTensor a) { return a *= -1.0; }

private:
    CurvatureTensor(int n, std::vector<double> components);

    int n_;
    std::vector<double> data_;
};

// Symmetric bilinear form on R^n. Only the upper triangle is authoritative;
// the stored table is mirrored so that entries(i,k) == entries(k,i) exactly.
class SymBilinear {
public:
    explicit SymBilinear(int n);
    // Copies the upper triangle of m and mirrors it.
    static SymBilinear from_matrix(const Eigen::MatrixXd& m);
    static SymBilinear metric(int n);

    int dim() const noexcept { return n_; }
    double operator()(int i, int k) const noexcept { return m_(i, k); }
    void set(int i, int k, double v) noexcept {
        m_(i, k) = v;
        m_(k, i) = v;
    }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }
    double trace() const { return m_.trace(); }

private:
    int n_;
    Eigen::MatrixXd m_;
};

struct EllParams {
    double a = 0.0;
    double b = 0.0;
};

// Largest admissible b for the two-parameter pinching family,
// (sqrt(2n(n-2)+4) - 2) / (n(n-2)).
double upsilon(int n);

// The companion parameter a = b + (n-2) b^2 / 2 used with the pinching family.
double companion_a(int n, double b);

// Orthogonal projection of an arbitrary n^4 table onto the curvature tensors:
// average over the 8-element pair symmetry group, then remove the totally
// antisymmetric (Bianchi) part.
CurvatureTensor canonical_project(std::span<const double> raw, int n);

// Largest violation of antisymmetry, pair symmetry and first Bianchi identity
// over all index quadruples, divided by max(1, |table|).
double symmetry_defect(std::span<const double> table, int n);

SymBilinear ricci(const CurvatureTensor& r);
double scal(const CurvatureTensor& r);
CurvatureTensor identity_tensor(int n);

// (A (x) B)_ijkl = A_ik B_jl - A_il B_jk - A_jk B_il + A_jl B_ik
CurvatureTensor kulkarni_nomizu(const SymBilinear& a, const SymBilinear& b);

// R + b Ric(R) (x) g + ((a - b)/n) scal(R) g (x) g
CurvatureTensor ell_ab(const CurvatureTensor& r, EllParams p);

// Throws Error(non_invertible) if 1 + (n-2) b or 2a(n-1) + 1 vanishes.
CurvatureTensor ell_ab_inverse(const CurvatureTensor& r, EllParams p);

// Orthogonal splitting R = scalar + ricci_traceless + weyl.
struct Decomposition {
    CurvatureTensor scalar;
    CurvatureTensor ricci_traceless;
    CurvatureTensor weyl;
};
Decomposition decompose(const CurvatureTensor& r);

// Q(R)_ijkl = R_ijpq R_klpq + 2 R_ipkq R_jplq - 2 R_iplq R_jpkq
CurvatureTensor q_map(const CurvatureTensor& r);

double inner(const CurvatureTensor& r, const CurvatureTensor& s);
double norm(const CurvatureTensor& r);

// (O.R)_ijkl = O_ip O_jq O_kr O_ls R_pqrs. Throws Error(not_orthogonal) if
// |O^T O - 1| exceeds 1e-12 entrywise.
CurvatureTensor rotate(const CurvatureTensor& r, const Eigen::MatrixXd& o);

// R(x, y, z, w) for real vectors.
double evaluate(const CurvatureTensor& r, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                const Eigen::VectorXd& z, const Eigen::VectorXd& w);

// max(1, |R|): the scale used for relative tolerances throughout.
inline double tolerance_scale(const CurvatureTensor& r) {
    const double nr = norm(r);
    return nr > 1.0 ? nr : 1.0;
}

}  // namespace curvcone
