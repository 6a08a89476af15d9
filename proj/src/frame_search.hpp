#pragma once

// Minimization of the frame functionals over orthonormal frames and weights.

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "curvcone/cone.hpp"
#include "curvcone/frame.hpp"
#include "curvcone/tensor.hpp"

namespace curvcone::detail {

// f = A + l^2 B + m^2 C + l^2 m^2 D - 2 l m E + w (1 - l^2)(1 - m^2) scal
// with m pinned to 1 when mu_one is set.
struct FrameForm {
    bool mu_one = false;
    double scal_weight = 0.0;
};

// A = R1313, B = R1414, C = R2323, D = R2424, E = R1234 in the frame.
struct Components {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
};

struct Weights {
    double value = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
};

// Frame columns: 3 in dimension 3 (B = D = E = 0 there), 4 otherwise.
Components frame_components(const CurvatureTensor& r, const Eigen::MatrixXd& frame);

double weighted_value(const Components& c, const FrameForm& form, double scal, double lambda, double mu);

// Minimum over the weights: exact on the four edges of [0,1]^2 (each is a
// quadratic), an interior minimum is found from a grid in lambda with the
// closed-form mu, then polished by alternating closed-form steps.
Weights minimize_weights(const Components& c, const FrameForm& form, double scal, bool lambda_zero);

struct SearchResult {
    FrameCertificate best;
    std::vector<FrameCertificate> minima;
    BudgetUsed used;
};

// Random Stiefel sampling followed by Givens-rotation descents from the best
// samples and from the warm starts. Deterministic in budget.seed for any
// worker count. Values in the result come from the fast search path; callers
// re-evaluate certificates they report.
SearchResult search_frames(const CurvatureTensor& r, const FrameForm& form, const SearchBudget& budget,
                           std::span<const FrameCertificate> warm_starts);

}  // namespace curvcone::detail
