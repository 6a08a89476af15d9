#pragma once

// Naive index-sum reference implementations used as test oracles. They are
// written directly from the defining formulas and share no code with the
// library beyond the storage convention.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "curvcone/tensor.hpp"

namespace oracle {

inline std::size_t at(int n, int i, int j, int k, int l) { return ((std::size_t(i) * n + j) * n + k) * n + l; }

inline double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

inline std::vector<double> table(const curvcone::CurvatureTensor& r) {
    return {r.components().begin(), r.components().end()};
}

inline double get(const std::vector<double>& t, int n, int i, int j, int k, int l) { return t[at(n, i, j, k, l)]; }

inline Eigen::MatrixXd ricci(const std::vector<double>& t, int n) {
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) ric(i, k) += get(t, n, i, j, k, j);
    return ric;
}

inline std::vector<double> identity(int n) {
    std::vector<double> t(std::size_t(n) * n * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    t[at(n, i, j, k, l)] = delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k);
    return t;
}

inline std::vector<double> kn(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const int n = int(a.rows());
    std::vector<double> t(std::size_t(n) * n * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    t[at(n, i, j, k, l)] =
                        a(i, k) * b(j, l) - a(i, l) * b(j, k) - a(j, k) * b(i, l) + a(j, l) * b(i, k);
    return t;
}

// Q(R)_ijkl = sum_pq R_ijpq R_klpq + 2 R_ipkq R_jplq - 2 R_iplq R_jpkq
inline std::vector<double> q(const std::vector<double>& r, int n) {
    std::vector<double> t(std::size_t(n) * n * n * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (int p = 0; p < n; ++p)
                        for (int qq = 0; qq < n; ++qq)
                            s += get(r, n, i, j, p, qq) * get(r, n, k, l, p, qq) +
                                 2.0 * get(r, n, i, p, k, qq) * get(r, n, j, p, l, qq) -
                                 2.0 * get(r, n, i, p, l, qq) * get(r, n, j, p, k, qq);
                    t[at(n, i, j, k, l)] = s;
                }
    return t;
}

inline std::vector<double> rotate(const std::vector<double>& r, int n, const Eigen::MatrixXd& o) {
    std::vector<double> t(r.size(), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (int p = 0; p < n; ++p)
                        for (int qq = 0; qq < n; ++qq)
                            for (int u = 0; u < n; ++u)
                                for (int v = 0; v < n; ++v)
                                    s += o(i, p) * o(j, qq) * o(k, u) * o(l, v) * get(r, n, p, qq, u, v);
                    t[at(n, i, j, k, l)] = s;
                }
    return t;
}

template <class V>
auto eval4(const std::vector<double>& r, int n, const V& a, const V& b, const V& c, const V& d) {
    using S = typename V::Scalar;
    S s = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) s += get(r, n, i, j, k, l) * a[i] * b[j] * c[k] * d[l];
    return s;
}

inline double max_abs_diff(const std::vector<double>& a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double norm(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

// Dense pic2 functional at frame columns e0..e3 with weights (lambda, mu):
// R(X, Y, conj X, conj Y) (1 + l^2)(1 + m^2) for X = e0 + i m e1, Y = e2 + i l e3.
inline double pic2_by_complex(const std::vector<double>& r, int n, const Eigen::MatrixXd& f, double lambda,
                              double mu) {
    using C = std::complex<double>;
    const Eigen::VectorXcd x = f.col(0).cast<C>() + C(0, mu) * f.col(1).cast<C>();
    Eigen::VectorXcd y = f.col(2).cast<C>();
    if (f.cols() > 3) y += C(0, lambda) * f.col(3).cast<C>();
    return eval4(r, n, x, y, Eigen::VectorXcd(x.conjugate()), Eigen::VectorXcd(y.conjugate())).real();
}

}  // namespace oracle
