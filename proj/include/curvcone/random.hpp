#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "curvcone/tensor.hpp"

namespace curvcone {

using Rng = std::mt19937_64;

// Mixes (seed, stream) into an independent generator seed. Parallel workers
// draw from derive_seed(seed, chunk) so results never depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(derive_seed(seed, stream)); }

double standard_normal(Rng& rng);
double uniform01(Rng& rng);

// canonical_project of a table with i.i.d. standard normal entries.
CurvatureTensor gaussian_tensor(int n, Rng& rng);

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Eigen::MatrixXd haar_orthogonal(int n, Rng& rng);

// n x k matrix with orthonormal columns, Haar distributed on the Stiefel manifold.
Eigen::MatrixXd random_frame(int n, int k, Rng& rng);
// Same draw into a preallocated n x k matrix.
void random_frame_into(Eigen::MatrixXd& m, Rng& rng);

// Modified Gram-Schmidt, applied twice. Columns must be linearly independent.
void orthonormalize_columns(Eigen::MatrixXd& m);

}  // namespace curvcone
