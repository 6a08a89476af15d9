#include "curvcone/random.hpp"

#include <cmath>
#include <vector>

namespace curvcone {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

double standard_normal(Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

double uniform01(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

CurvatureTensor gaussian_tensor(int n, Rng& rng) {
    check_dimension(n);
    std::vector<double> raw(static_cast<std::size_t>(n) * n * n * n);
    for (double& v : raw) v = standard_normal(rng);
    return canonical_project(raw, n);
}

void orthonormalize_columns(Eigen::MatrixXd& m) {
    for (int pass = 0; pass < 2; ++pass) {
        for (int c = 0; c < m.cols(); ++c) {
            for (int p = 0; p < c; ++p) m.col(c) -= m.col(p).dot(m.col(c)) * m.col(p);
            m.col(c).normalize();
        }
    }
}

void random_frame_into(Eigen::MatrixXd& m, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
    orthonormalize_columns(m);
}

Eigen::MatrixXd random_frame(int n, int k, Rng& rng) {
    Eigen::MatrixXd m(n, k);
    random_frame_into(m, rng);
    return m;
}

Eigen::MatrixXd haar_orthogonal(int n, Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) g(r, c) = standard_normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < n; ++c)
        if (rr(c, c) < 0) q.col(c) = -q.col(c);
    // Householder products are orthogonal only to roundoff; one MGS pass pins it.
    orthonormalize_columns(q);
    return q;
}

}  // namespace curvcone
