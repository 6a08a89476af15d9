#pragma once

// Curvature cones defined by families of linear functionals, their membership
// margins (with witnessing frame certificates), projections and distances.
//
// Families:
//   pic1           R1313 + l^2 R1414 + R2323 + l^2 R2424 - 2 l R1234 >= 0
//   pic2           R1313 + l^2 R1414 + m^2 R2323 + l^2 m^2 R2424 - 2 l m R1234 >= 0
//   checkc(s)      pic2 functional + (1/s)(1 - l^2)(1 - m^2) scal(R) >= 0
//   hatc(s)        ell(S) with S in pic2 and Ric(S) >= (p/n) scal(S), two-branch parameters
//   tildec(b, s)   ell_{a,b}(checkc(s)) with a = b + (n-2) b^2 / 2
//   ric            Ric(R) >= 0
// each over all orthonormal frames e1..e4 and l, m in [0, 1].

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curvcone/frame.hpp"
#include "curvcone/tensor.hpp"

namespace curvcone {

enum class ConeFamily { pic1, pic2, check, hat, tilde, ricci };

struct ConeSpec {
    ConeFamily family = ConeFamily::pic2;
    int n = 4;
    double s = 0.0;  // checkc, hatc, tildec
    double b = 0.0;  // tildec

    static ConeSpec pic1(int n) { return {ConeFamily::pic1, n}; }
    static ConeSpec pic2(int n) { return {ConeFamily::pic2, n}; }
    static ConeSpec check(int n, double s) { return {ConeFamily::check, n, s}; }
    static ConeSpec hat(int n, double s) { return {ConeFamily::hat, n, s}; }
    static ConeSpec tilde(int n, double b, double s) { return {ConeFamily::tilde, n, s, b}; }
    static ConeSpec ricci(int n) { return {ConeFamily::ricci, n}; }

    // CLI syntax: pic1 | pic2 | checkc:s=<v> | hatc:s=<v> | tildec:b=<v>,s=<v> | ric
    std::string label() const;

    // ell parameters for hatc / tildec; identity for the others
    EllParams ell() const;
    // Ricci pinching p of hatc (0 otherwise)
    double ricci_pinch() const;
    bool uses_preimage() const { return family == ConeFamily::hat || family == ConeFamily::tilde; }
};

// Throws Error(invalid_argument) for malformed parameters: s <= 0, b outside
// (0, upsilon(n)) for tildec, n < 4 for hatc / tildec.
void validate(const ConeSpec& spec);

// Parses the CLI syntax. Throws Error(parse) on malformed text.
ConeSpec parse_cone(std::string_view text, int n);

// Shortest round-trip decimal form of a double (used in labels and reports).
std::string format_number(double v);

struct SearchBudget {
    int frames = 20000;    // random Stiefel samples
    int descents = 50;     // local descents started from the best samples
    std::uint64_t seed = 0;
    int workers = 1;
    int max_sweeps = 60;   // Givens sweeps per descent
};

struct BudgetUsed {
    long frames_sampled = 0;
    long descents = 0;
    long sweeps = 0;
    long evaluations = 0;
};

struct MarginReport {
    // infimum estimate of the defining functionals, divided by max(1, |R|)
    double margin = 0.0;
    FrameCertificate certificate;
    BudgetUsed budget_used;
    // true iff margin < 0; the certificate then proves non-membership
    bool sound_violation = false;
    // end points of every local descent, best first (used for cutting planes
    // and for collecting active constraints)
    std::vector<FrameCertificate> local_minima;
};

// Defining functional of pic1 / pic2 / checkc (and the ric direction
// functional) at one certificate, evaluated on R itself.
// Throws Error(invalid_argument) for hatc / tildec.
double frame_functional(const CurvatureTensor& r, const FrameCertificate& cert, const ConeSpec& spec);

// The certificate's functional for any family; hatc / tildec evaluate on the
// ell-preimage of R. Linear in R.
double certificate_value(const CurvatureTensor& r, const FrameCertificate& cert, const ConeSpec& spec);

// G with <G, R> = certificate_value(R, cert, spec) for every curvature tensor R.
CurvatureTensor certificate_representer(const FrameCertificate& cert, const ConeSpec& spec);

MarginReport membership_margin(const CurvatureTensor& r, const ConeSpec& spec, const SearchBudget& budget = {},
                               std::span<const FrameCertificate> warm_starts = {});

// One-sided membership decision: margin >= -tol.
inline bool is_member(const MarginReport& report, double tol) { return report.margin >= -tol; }

struct ProjectionOptions {
    double tol = 1e-9;
    // budget of the inner membership calls of the cutting-plane loop
    SearchBudget inner{400, 3, 0, 1, 8};
    // budget of the final confirmation that the iterate is a member
    SearchBudget verify{20000, 50, 0, 1, 60};
    int max_iterations = 300;
    int max_cuts = 200;
};

struct ProjectionResult {
    CurvatureTensor point;
    double distance = 0.0;
    bool converged = false;
    int iterations = 0;
    // margin of `point` from the final confirmation call
    double final_margin = 0.0;
    // certificates of the halfspaces active at the solution
    std::vector<FrameCertificate> active;
};

// Euclidean projection onto the cone by cutting planes: each violated
// certificate contributes the halfspace {S : functional(S) >= 0}, and the
// projection onto the accumulated halfspaces is solved exactly in the dual
// as a nonnegative least-squares problem.
ProjectionResult project(const CurvatureTensor& r, const ConeSpec& spec, const ProjectionOptions& options = {},
                         std::span<const FrameCertificate> seed_cuts = {});

double distance(const CurvatureTensor& r, const ConeSpec& spec, const ProjectionOptions& options = {});

// (R - pi(R)) / |R - pi(R)|. Throws Error(invalid_argument) when the distance
// does not exceed options.tol * max(1, |R|).
CurvatureTensor xi(const CurvatureTensor& r, const ConeSpec& spec, const ProjectionOptions& options = {});

enum class ShiftSign { minus, plus };

// R - eps scal(R) I  (minus)  or  R + eps scal(R) I  (plus)
CurvatureTensor pinch_shift(const CurvatureTensor& r, double eps, ShiftSign sign);

struct MemberSample {
    CurvatureTensor tensor;
    int discarded = 0;  // projections that landed within 1e-6 of 0
    ProjectionResult projection;
};

// Projects Gaussian random tensors until one lands away from the origin.
MemberSample sample_member(const ConeSpec& spec, std::uint64_t seed, const ProjectionOptions& options = {});

}  // namespace curvcone
