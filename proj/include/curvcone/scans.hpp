#pragma once

// Empirical estimates of the pinching constants: the delta of the ell-pinching
// lemma, the parameters (s0, b) that capture pinched tensors, and the norm and
// complex-sectional-curvature constants of PIC1.

#include <cstdint>
#include <vector>

#include "curvcone/cone.hpp"

namespace curvcone {

struct ScanOptions {
    ProjectionOptions projection;  // member sampling
    SearchBudget search;           // membership calls
    int workers = 1;               // samples are distributed over workers
};

enum class PinchTarget { ric, pic1, pic2 };

ConeSpec target_cone(PinchTarget target, int n);

// 2(a - b) / (n (2a(n-1) + 1))
double delta_floor(int n, double a, double b);

struct DeltaEstimate {
    double delta = 0.0;  // min over samples of the largest admissible delta
    double analytic_floor = 0.0;
    // min over samples of the margin of R - floor scal(R) I
    double worst_margin_at_floor = 0.0;
    int used = 0;
    int discarded = 0;  // samples with scal(S) ~ 0 or failed projections
    std::vector<double> per_sample;
};

// S projected into the target cone, R = ell_{a,b}(S); for each R the largest
// delta with R - delta scal(R) I in the target cone, found by Dinkelbach
// iterations on the ratio of the certificate functionals.
DeltaEstimate estimate_delta(int n, double a, double b, PinchTarget target, int samples, std::uint64_t seed,
                             const ScanOptions& options = {});

struct S0Estimate {
    double s0 = 0.0;
    double b = 0.0;
    double a = 0.0;
    // starting point 1/c1 from the Young splitting, with the norm constant
    // measured on the same samples
    double candidate_s0 = 0.0;
    double norm_constant = 0.0;
    // min margin of the samples in tildec(b, s0), rechecked with options.search
    double worst_margin = 0.0;
    int used = 0;
    int discarded = 0;
    int b_halvings = 0;
    // per sample: the least scal weight 1/s that admits it
    std::vector<double> required_weight;
};

// Samples S in PIC1, un-pinches them to R with R - eps0 scal(R) I = S, and
// returns the largest s0 (together with b, starting at upsilon/2 and halved
// until every sample is admissible) such that every R lies in tildec(b, s0).
// A fixed b can be requested. Throws Error(budget_exhausted) if no b works.
S0Estimate find_s0(int n, double eps0, int samples, std::uint64_t seed, const ScanOptions& options = {},
                   double fixed_b = 0.0);

struct RatioEstimate {
    double max_ratio = 0.0;  // max |R| / scal(R)
    double mean_ratio = 0.0;
    int used = 0;
    int discarded = 0;
};

RatioEstimate pic1_norm_constant(int n, int samples, std::uint64_t seed, const ScanOptions& options = {});

struct KalphaFit {
    // max of -K(sigma) / (alpha(sigma) scal(R)) found over sections with
    // alpha >= kAlphaFloor, after local ascent from the best random sections
    double constant = 0.0;
    int tensors = 0;
    long evaluations = 0;
};

inline constexpr double kAlphaFloor = 1e-3;

KalphaFit fit_kalpha_constant(int n, int tensors, int sections_per_tensor, std::uint64_t seed,
                              const ScanOptions& options = {});

struct KalphaCheck {
    long pairs = 0;
    long violations = 0;
    double worst_ratio = 0.0;  // max -K / (alpha scal) over pairs with alpha >= kAlphaFloor
};

// Tests K(sigma) >= -constant alpha(sigma) scal(R) - tol max(1, |R|) on random
// (R, sigma) pairs, R projected into PIC1.
KalphaCheck check_kalpha(int n, double constant, int tensors, int sections_per_tensor, std::uint64_t seed,
                         const ScanOptions& options = {});

}  // namespace curvcone
