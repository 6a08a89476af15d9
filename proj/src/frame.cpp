#include "curvcone/frame.hpp"

#include <algorithm>
#include <cmath>

#include "frame_detail.hpp"

namespace curvcone {

double orthonormality_defect(const Eigen::MatrixXd& frame) {
    const Eigen::MatrixXd g = frame.transpose() * frame;
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& partial, int total) {
    const int n = static_cast<int>(partial.rows());
    Eigen::MatrixXd out(n, total);
    int filled = 0;
    for (int c = 0; c < partial.cols() && filled < total; ++c) out.col(filled++) = partial.col(c);
    for (int e = 0; e < n && filled < total; ++e) {
        Eigen::VectorXd cand = Eigen::VectorXd::Unit(n, e);
        for (int pass = 0; pass < 2; ++pass)
            for (int c = 0; c < filled; ++c) cand -= out.col(c).dot(cand) * out.col(c);
        const double len = cand.norm();
        if (len < 1e-6) continue;
        out.col(filled++) = cand / len;
    }
    return out;
}

}  // namespace detail
}  // namespace curvcone
