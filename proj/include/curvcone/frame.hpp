#pragma once

#include <Eigen/Dense>

namespace curvcone {

enum class CertificateKind {
    // orthonormal frame e1..e4 with weights (lambda, mu)
    frame,
    // unit vector x = frame.col(0) testing a Ricci lower bound
    ricci_direction,
};

// Witness for a cone margin: the defining functional evaluated at one frame.
// In dimension 3 only three frame vectors exist and lambda is pinned to 0.
struct FrameCertificate {
    Eigen::MatrixXd frame;  // n x min(n,4), orthonormal columns
    double lambda = 0.0;
    double mu = 0.0;
    double value = 0.0;
    CertificateKind kind = CertificateKind::frame;
};

inline int frame_width(int n) { return n >= 4 ? 4 : n; }

// max |F^T F - 1| over the frame columns
double orthonormality_defect(const Eigen::MatrixXd& frame);

}  // namespace curvcone
