#include "curvcone/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curvcone/error.hpp"
#include "curvcone/kernels.hpp"

namespace curvcone {
namespace {

inline std::size_t idx(int n, int i, int j, int k, int l) {
    return ((static_cast<std::size_t>(i) * n + j) * n + k) * n + l;
}

std::size_t table_size(int n) {
    const auto m = static_cast<std::size_t>(n);
    return m * m * m * m;
}

void require_same_dim(const CurvatureTensor& a, const CurvatureTensor& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::dimension, "dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                              std::to_string(b.dim()));
    }
}

}  // namespace

void check_dimension(int n) {
    if (n < kMinDim || n > kMaxDim) {
        throw Error(ErrorCode::dimension, "dimension " + std::to_string(n) + " outside supported range [" +
                                              std::to_string(kMinDim) + "," + std::to_string(kMaxDim) + "]");
    }
}

CurvatureTensor::CurvatureTensor(int n) : n_(n) {
    check_dimension(n);
    data_.assign(table_size(n), 0.0);
}

CurvatureTensor::CurvatureTensor(int n, std::vector<double> components) : n_(n), data_(std::move(components)) {}

CurvatureTensor CurvatureTensor::from_symmetric(int n, std::vector<double> components) {
    check_dimension(n);
    if (components.size() != table_size(n)) {
        throw Error(ErrorCode::dimension, "table has " + std::to_string(components.size()) + " entries, expected " +
                                              std::to_string(table_size(n)));
    }
    return CurvatureTensor(n, std::move(components));
}

CurvatureTensor& CurvatureTensor::operator+=(const CurvatureTensor& other) { return add_scaled(1.0, other); }

CurvatureTensor& CurvatureTensor::operator-=(const CurvatureTensor& other) { return add_scaled(-1.0, other); }

CurvatureTensor& CurvatureTensor::operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
}

CurvatureTensor& CurvatureTensor::add_scaled(double c, const CurvatureTensor& other) {
    require_same_dim(*this, other);
    kernels::axpy(c, other.data_, data_);
    return *this;
}

SymBilinear::SymBilinear(int n) : n_(n), m_(Eigen::MatrixXd::Zero(n, n)) { check_dimension(n); }

SymBilinear SymBilinear::from_matrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::dimension, "bilinear form must be square");
    SymBilinear out(static_cast<int>(m.rows()));
    for (int i = 0; i < out.n_; ++i)
        for (int k = i; k < out.n_; ++k) out.set(i, k, m(i, k));
    return out;
}

SymBilinear SymBilinear::metric(int n) {
    SymBilinear g(n);
    for (int i = 0; i < n; ++i) g.set(i, i, 1.0);
    return g;
}

double upsilon(int n) {
    const double nn = n;
    return (std::sqrt(2.0 * nn * (nn - 2.0) + 4.0) - 2.0) / (nn * (nn - 2.0));
}

double companion_a(int n, double b) { return b + 0.5 * (n - 2) * b * b; }

CurvatureTensor canonical_project(std::span<const double> raw, int n) {
    check_dimension(n);
    if (raw.size() != table_size(n)) {
        throw Error(ErrorCode::dimension, "table has " + std::to_string(raw.size()) + " entries, expected " +
                                              std::to_string(table_size(n)));
    }
    auto t = [&](int i, int j, int k, int l) { return raw[idx(n, i, j, k, l)]; };
    std::vector<double> sym(raw.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    sym[idx(n, i, j, k, l)] = (t(i, j, k, l) - t(j, i, k, l) - t(i, j, l, k) + t(j, i, l, k) +
                                               t(k, l, i, j) - t(l, k, i, j) - t(k, l, j, i) + t(l, k, j, i)) /
                                              8.0;
                }
    // On pair-symmetric tables the cyclic sum / 3 is the orthogonal projection
    // onto the totally antisymmetric part; it vanishes unless all indices differ.
    std::vector<double> out(sym);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            for (int k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                for (int l = 0; l < n; ++l) {
                    if (l == i || l == j || l == k) continue;
                    const double b =
                        (sym[idx(n, i, j, k, l)] + sym[idx(n, j, k, i, l)] + sym[idx(n, k, i, j, l)]) / 3.0;
                    out[idx(n, i, j, k, l)] -= b;
                }
            }
        }
    return CurvatureTensor::from_symmetric(n, std::move(out));
}

double symmetry_defect(std::span<const double> table, int n) {
    auto t = [&](int i, int j, int k, int l) { return table[idx(n, i, j, k, l)]; };
    double worst = 0.0;
    double sq = 0.0;
    for (double v : table) sq += v * v;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double v = t(i, j, k, l);
                    worst = std::max(worst, std::abs(v + t(j, i, k, l)));
                    worst = std::max(worst, std::abs(v + t(i, j, l, k)));
                    worst = std::max(worst, std::abs(v - t(k, l, i, j)));
                    worst = std::max(worst, std::abs(v + t(j, k, i, l) + t(k, i, j, l)));
                }
    return worst / std::max(1.0, std::sqrt(sq));
}

SymBilinear ricci(const CurvatureTensor& r) {
    const int n = r.dim();
    SymBilinear out(n);
    for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += r(i, j, k, j);
            out.set(i, k, acc);
        }
    return out;
}

double scal(const CurvatureTensor& r) {
    const int n = r.dim();
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += r(i, j, i, j);
    return acc;
}

CurvatureTensor identity_tensor(int n) {
    check_dimension(n);
    std::vector<double> data(table_size(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            data[idx(n, i, j, i, j)] = 1.0;
            data[idx(n, i, j, j, i)] = -1.0;
        }
    return CurvatureTensor::from_symmetric(n, std::move(data));
}

CurvatureTensor kulkarni_nomizu(const SymBilinear& a, const SymBilinear& b) {
    if (a.dim() != b.dim()) throw Error(ErrorCode::dimension, "Kulkarni-Nomizu product of mismatched dimensions");
    const int n = a.dim();
    std::vector<double> data(table_size(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    data[idx(n, i, j, k, l)] =
                        a(i, k) * b(j, l) - a(i, l) * b(j, k) - a(j, k) * b(i, l) + a(j, l) * b(i, k);
    return CurvatureTensor::from_symmetric(n, std::move(data));
}

CurvatureTensor ell_ab(const CurvatureTensor& r, EllParams p) {
    const int n = r.dim();
    const SymBilinear g = SymBilinear::metric(n);
    CurvatureTensor out = r;
    out.add_scaled(p.b, kulkarni_nomizu(ricci(r), g));
    // g (x) g = 2 I
    out.add_scaled(2.0 * (p.a - p.b) / n * scal(r), identity_tensor(n));
    return out;
}

Decomposition decompose(const CurvatureTensor& r) {
    const int n = r.dim();
    const double s = scal(r);
    const SymBilinear g = SymBilinear::metric(n);
    SymBilinear ric0 = ricci(r);
    for (int i = 0; i < n; ++i) ric0.set(i, i, ric0(i, i) - s / n);
    // Ric(h (x) g) = (n-2) h + tr(h) g, so this carries exactly the traceless Ricci part.
    CurvatureTensor e = (1.0 / (n - 2)) * kulkarni_nomizu(ric0, g);
    CurvatureTensor p = (s / (n * (n - 1.0))) * identity_tensor(n);
    CurvatureTensor w = r;
    w -= e;
    w -= p;
    return Decomposition{std::move(p), std::move(e), std::move(w)};
}

CurvatureTensor ell_ab_inverse(const CurvatureTensor& r, EllParams p) {
    const int n = r.dim();
    const double ricci_factor = 1.0 + (n - 2) * p.b;
    const double scalar_factor = 2.0 * p.a * (n - 1) + 1.0;
    if (std::abs(ricci_factor) < 1e-12 || std::abs(scalar_factor) < 1e-12) {
        throw Error(ErrorCode::non_invertible, "ell_{a,b} is not invertible for a=" + std::to_string(p.a) +
                                                   ", b=" + std::to_string(p.b));
    }
    Decomposition d = decompose(r);
    CurvatureTensor out = std::move(d.weyl);
    out.add_scaled(1.0 / ricci_factor, d.ricci_traceless);
    out.add_scaled(1.0 / scalar_factor, d.scalar);
    return out;
}

CurvatureTensor q_map(const CurvatureTensor& r) {
    const int n = r.dim();
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    const auto& k = kernels::active();
    // Viewing R as an n^2 x n^2 matrix M[(ij),(pq)], the first term is M M^T.
    std::vector<double> first(n2 * n2);
    k.gram(r.components().data(), n2, n2, first.data());
    // N[(ik),(pq)] = R_ipkq; G = N N^T gives G[(ik),(jl)] = R_ipkq R_jplq.
    std::vector<double> shuffled(n2 * n2);
    for (int i = 0; i < n; ++i)
        for (int kk = 0; kk < n; ++kk)
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) shuffled[(i * n + kk) * n2 + p * n + q] = r(i, p, kk, q);
    std::vector<double> g(n2 * n2);
    k.gram(shuffled.data(), n2, n2, g.data());
    std::vector<double> raw(n2 * n2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int kk = 0; kk < n; ++kk)
                for (int l = 0; l < n; ++l) {
                    raw[idx(n, i, j, kk, l)] = first[(i * n + j) * n2 + kk * n + l] +
                                               2.0 * g[(i * n + kk) * n2 + j * n + l] -
                                               2.0 * g[(i * n + l) * n2 + j * n + kk];
                }
    return canonical_project(raw, n);
}

double inner(const CurvatureTensor& r, const CurvatureTensor& s) {
    require_same_dim(r, s);
    return kernels::dot(r.components(), s.components());
}

double norm(const CurvatureTensor& r) { return std::sqrt(inner(r, r)); }

CurvatureTensor rotate(const CurvatureTensor& r, const Eigen::MatrixXd& o) {
    const int n = r.dim();
    if (o.rows() != n || o.cols() != n) throw Error(ErrorCode::dimension, "rotation matrix has wrong shape");
    const Eigen::MatrixXd defect = o.transpose() * o - Eigen::MatrixXd::Identity(n, n);
    if (defect.cwiseAbs().maxCoeff() > 1e-12) {
        throw Error(ErrorCode::not_orthogonal, "matrix is not orthogonal to 1e-12");
    }
    std::vector<double> cur(r.components().begin(), r.components().end());
    std::vector<double> next(cur.size());
    std::size_t stride[4];
    stride[3] = 1;
    for (int m = 2; m >= 0; --m) stride[m] = stride[m + 1] * n;
    // one mode at a time: next[..i..] = sum_p O(i,p) cur[..p..]
    for (int mode = 0; mode < 4; ++mode) {
        const std::size_t st = stride[mode];
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t base = 0; base < cur.size(); ++base) {
            const std::size_t digit = (base / st) % n;
            if (digit != 0) continue;
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int p = 0; p < n; ++p) acc += o(i, p) * cur[base + p * st];
                next[base + i * st] = acc;
            }
        }
        cur.swap(next);
    }
    return CurvatureTensor::from_symmetric(n, std::move(cur));
}

double evaluate(const CurvatureTensor& r, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
    const int n = r.dim();
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    std::vector<double> zw(n2), xy(n2), u(n2);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            zw[k * n + l] = z[k] * w[l];
            xy[k * n + l] = x[k] * y[l];
        }
    kernels::active().gemv(r.components().data(), n2, n2, zw.data(), u.data());
    return kernels::dot(xy, u);
}

}  // namespace curvcone
