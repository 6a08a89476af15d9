#include "curvcone/scans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvcone/error.hpp"
#include "curvcone/random.hpp"
#include "curvcone/sections.hpp"
#include "parallel.hpp"

namespace curvcone {
namespace {

constexpr int kDinkelbachSteps = 60;

struct Sampled {
    CurvatureTensor tensor{kMinDim};
    bool ok = false;  // false for discarded samples
};

Sampled draw_member(const ConeSpec& spec, std::uint64_t seed, const ProjectionOptions& options) {
    try {
        auto m = sample_member(spec, seed, options);
        const double sc = scal(m.tensor);
        if (!(sc > 1e-12 * norm(m.tensor))) return {m.tensor, false};
        return {m.tensor, true};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::budget_exhausted) throw;
        return {CurvatureTensor(spec.n), false};
    }
}

SearchBudget serial(SearchBudget b, std::uint64_t seed) {
    b.workers = 1;
    b.seed = seed;
    return b;
}

// Largest delta with r - delta scal(r) I in the cone. Each step takes the
// minimizing certificate c at the current delta and moves to the root of its
// (linear in delta) functional; after the first step the iterates decrease
// monotonically to the optimum.
double largest_delta(const CurvatureTensor& r, const ConeSpec& cone, const SearchBudget& budget, double start) {
    const double sr = scal(r);
    const auto id = identity_tensor(r.dim());
    double delta = start;
    std::vector<FrameCertificate> warm;
    for (int it = 0; it < kDinkelbachSteps; ++it) {
        const auto rep = membership_margin(pinch_shift(r, delta, ShiftSign::minus), cone, budget, warm);
        const auto& c = rep.certificate;
        const double next = certificate_value(r, c, cone) / (sr * certificate_value(id, c, cone));
        if (std::abs(next - delta) <= 1e-12 * std::abs(delta) + 1e-300) return std::min(next, delta);
        delta = next;
        warm.assign(rep.local_minima.begin(), rep.local_minima.begin() + std::min<std::size_t>(4, rep.local_minima.size()));
    }
    return delta;
}

// Least t >= 0 with t = 1/s admitting t_pre in checkc(s); +inf if no s does.
// The functional of a fixed certificate is affine and nondecreasing in t, so
// the root of the current minimizer is a lower bound for the answer; once the
// iterate is a lower bound, feasibility means convergence.
double required_weight(const CurvatureTensor& t_pre, const SearchBudget& budget, double start) {
    const int n = t_pre.dim();
    const double sc = scal(t_pre);
    const double scale = tolerance_scale(t_pre);
    const auto pic2 = ConeSpec::pic2(n);
    double t = std::max(0.0, start);
    bool lower = t == 0.0;
    std::vector<FrameCertificate> warm;
    for (int it = 0; it < kDinkelbachSteps; ++it) {
        const ConeSpec cone = t > 0.0 ? ConeSpec::check(n, 1.0 / t) : pic2;
        const auto rep = membership_margin(t_pre, cone, budget, warm);
        const auto& c = rep.certificate;
        const double p = certificate_value(t_pre, c, pic2);
        const double w = (1.0 - c.lambda * c.lambda) * (1.0 - c.mu * c.mu) * sc;
        warm.assign(rep.local_minima.begin(), rep.local_minima.begin() + std::min<std::size_t>(4, rep.local_minima.size()));
        if (rep.certificate.value >= -1e-13 * scale) {
            if (lower) return t;
            // feasible start: the root is informative only for a weighted certificate
            t = w > 0.0 ? std::max(0.0, std::min(t, -p / w)) : 0.0;
            lower = true;
            continue;
        }
        if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
        const double next = -p / w;
        if (next > 1e12) return std::numeric_limits<double>::infinity();
        if (lower && next <= t * (1.0 + 1e-12)) return std::max(t, next);
        t = next;
        lower = true;
    }
    return t;
}

double kalpha_ratio(const CurvatureTensor& r, double sc, const ComplexSection& s) {
    const double a = alpha(s);
    if (a < kAlphaFloor) return -std::numeric_limits<double>::infinity();
    return -complex_sectional_curvature(r, s) / (a * sc);
}

ComplexSection mixed_section(int n, std::uint64_t seed, int k) {
    if (k % 2 == 0) return sample_section(n, SectionKind::generic, seed);
    Rng rng = make_rng(seed, 0x5ec);
    return section_with_alpha(n, uniform01(rng), seed);
}

// Hermitian Gram-Schmidt of a perturbed basis
ComplexSection perturb(const ComplexSection& s, double step, Rng& rng) {
    auto noise = [&] {
        Eigen::VectorXcd z(s.n);
        for (int i = 0; i < s.n; ++i) z[i] = cplx(standard_normal(rng), standard_normal(rng));
        return z;
    };
    ComplexSection out = s;
    out.v = (s.v + step * noise()).normalized();
    Eigen::VectorXcd w = s.w + step * noise();
    w -= out.v.dot(w) * out.v;
    out.w = w.normalized();
    return out;
}

}  // namespace

ConeSpec target_cone(PinchTarget target, int n) {
    switch (target) {
        case PinchTarget::ric:
            return ConeSpec::ricci(n);
        case PinchTarget::pic1:
            return ConeSpec::pic1(n);
        case PinchTarget::pic2:
            return ConeSpec::pic2(n);
    }
    throw Error(ErrorCode::invalid_argument, "unknown pinching target");
}

double delta_floor(int n, double a, double b) { return 2.0 * (a - b) / (n * (2.0 * a * (n - 1) + 1.0)); }

DeltaEstimate estimate_delta(int n, double a, double b, PinchTarget target, int samples, std::uint64_t seed,
                             const ScanOptions& options) {
    check_dimension(n);
    if (!(a > b && b >= 0.0)) throw Error(ErrorCode::invalid_argument, "estimate_delta needs a > b >= 0");
    if (samples <= 0) throw Error(ErrorCode::invalid_argument, "sample count must be positive");
    const ConeSpec cone = target_cone(target, n);
    const double floor = delta_floor(n, a, b);

    struct Item {
        bool ok = false;
        double delta = 0.0;
        double margin = 0.0;
    };
    std::vector<Item> items(samples);
    detail::parallel_for(samples, options.workers, [&](int i) {
        const auto is = static_cast<std::uint64_t>(i);
        const auto s = draw_member(cone, derive_seed(seed, is), options.projection);
        if (!s.ok) return;
        const auto r = ell_ab(s.tensor, {a, b});
        const auto budget = serial(options.search, derive_seed(seed ^ 0xde17a, is));
        items[i].ok = true;
        items[i].margin = membership_margin(pinch_shift(r, floor, ShiftSign::minus), cone, budget).margin;
        items[i].delta = largest_delta(r, cone, budget, floor);
    });

    DeltaEstimate out;
    out.analytic_floor = floor;
    out.delta = std::numeric_limits<double>::infinity();
    out.worst_margin_at_floor = std::numeric_limits<double>::infinity();
    for (const auto& it : items) {
        if (!it.ok) {
            ++out.discarded;
            continue;
        }
        ++out.used;
        out.per_sample.push_back(it.delta);
        out.delta = std::min(out.delta, it.delta);
        out.worst_margin_at_floor = std::min(out.worst_margin_at_floor, it.margin);
    }
    if (out.used == 0) throw Error(ErrorCode::budget_exhausted, "estimate_delta: every sample was discarded");
    return out;
}

S0Estimate find_s0(int n, double eps0, int samples, std::uint64_t seed, const ScanOptions& options, double fixed_b) {
    check_dimension(n);
    if (n < 4) throw Error(ErrorCode::invalid_argument, "find_s0 requires n >= 4");
    if (!(eps0 > 0.0 && eps0 * n * (n - 1) < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "eps0 must lie in (0, 1/(n(n-1)))");
    }
    if (samples <= 0) throw Error(ErrorCode::invalid_argument, "sample count must be positive");
    const double ups = upsilon(n);
    if (fixed_b != 0.0 && !(fixed_b > 0.0 && fixed_b < ups)) {
        throw Error(ErrorCode::invalid_argument, "b must lie in (0, upsilon(n))");
    }

    std::vector<Sampled> drawn(samples);
    detail::parallel_for(samples, options.workers, [&](int i) {
        drawn[i] = draw_member(ConeSpec::pic1(n), derive_seed(seed, static_cast<std::uint64_t>(i)), options.projection);
    });
    // un-pinch: scal(S) = (1 - eps0 n(n-1)) scal(R)
    const double lift = eps0 / (1.0 - eps0 * n * (n - 1));
    std::vector<CurvatureTensor> pinched;
    S0Estimate out;
    for (const auto& d : drawn) {
        if (!d.ok) {
            ++out.discarded;
            continue;
        }
        out.norm_constant = std::max(out.norm_constant, norm(d.tensor) / scal(d.tensor));
        pinched.push_back(pinch_shift(d.tensor, lift, ShiftSign::plus));
    }
    out.used = static_cast<int>(pinched.size());
    if (out.used == 0) throw Error(ErrorCode::budget_exhausted, "find_s0: every sample was discarded");

    // K >= -C alpha scal with C <= sqrt5 times the norm constant, then
    // C alpha <= eps + C^2 alpha^2 / (4 eps) at eps = eps0 / 2
    const double c_a1 = std::sqrt(5.0) * out.norm_constant;
    const double c1 = c_a1 * c_a1 / (2.0 * eps0);
    out.candidate_s0 = 1.0 / c1;

    double b = fixed_b != 0.0 ? fixed_b : 0.5 * ups;
    for (int halving = 0; halving < 40; ++halving) {
        const EllParams p{companion_a(n, b), b};
        std::vector<double> weight(pinched.size());
        detail::parallel_for(out.used, options.workers, [&](int i) {
            const auto budget = serial(options.search, derive_seed(seed ^ 0x50, static_cast<std::uint64_t>(i)));
            weight[i] = required_weight(ell_ab_inverse(pinched[i], p), budget, c1);
        });
        const double worst = *std::max_element(weight.begin(), weight.end());
        if (std::isfinite(worst)) {
            out.b = b;
            out.a = p.a;
            out.b_halvings = halving;
            out.required_weight = weight;
            out.s0 = worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
            break;
        }
        if (fixed_b != 0.0) break;
        b *= 0.5;
    }
    if (out.b == 0.0) throw Error(ErrorCode::budget_exhausted, "find_s0: no admissible b found");

    if (std::isfinite(out.s0)) {
        const auto cone = ConeSpec::tilde(n, out.b, out.s0);
        std::vector<double> margins(pinched.size());
        detail::parallel_for(out.used, options.workers, [&](int i) {
            const auto budget = serial(options.search, derive_seed(seed ^ 0xc4ec, static_cast<std::uint64_t>(i)));
            margins[i] = membership_margin(pinched[i], cone, budget).margin;
        });
        out.worst_margin = *std::min_element(margins.begin(), margins.end());
    }
    return out;
}

RatioEstimate pic1_norm_constant(int n, int samples, std::uint64_t seed, const ScanOptions& options) {
    check_dimension(n);
    if (samples <= 0) throw Error(ErrorCode::invalid_argument, "sample count must be positive");
    std::vector<Sampled> drawn(samples);
    detail::parallel_for(samples, options.workers, [&](int i) {
        drawn[i] = draw_member(ConeSpec::pic1(n), derive_seed(seed, static_cast<std::uint64_t>(i)), options.projection);
    });
    RatioEstimate out;
    double sum = 0.0;
    for (const auto& d : drawn) {
        if (!d.ok) {
            ++out.discarded;
            continue;
        }
        const double ratio = norm(d.tensor) / scal(d.tensor);
        out.max_ratio = std::max(out.max_ratio, ratio);
        sum += ratio;
        ++out.used;
    }
    if (out.used == 0) throw Error(ErrorCode::budget_exhausted, "pic1_norm_constant: every sample was discarded");
    out.mean_ratio = sum / out.used;
    return out;
}

KalphaFit fit_kalpha_constant(int n, int tensors, int sections_per_tensor, std::uint64_t seed,
                              const ScanOptions& options) {
    check_dimension(n);
    if (tensors <= 0 || sections_per_tensor <= 0) throw Error(ErrorCode::invalid_argument, "counts must be positive");
    constexpr int kStarts = 3;
    constexpr int kSteps = 300;
    struct Item {
        bool ok = false;
        double best = 0.0;
        long evals = 0;
    };
    std::vector<Item> items(tensors);
    detail::parallel_for(tensors, options.workers, [&](int i) {
        const auto is = static_cast<std::uint64_t>(i);
        const auto d = draw_member(ConeSpec::pic1(n), derive_seed(seed, is), options.projection);
        if (!d.ok) return;
        const double sc = scal(d.tensor);
        std::vector<std::pair<double, ComplexSection>> found;
        for (int k = 0; k < sections_per_tensor; ++k) {
            const auto s = mixed_section(n, derive_seed(derive_seed(seed ^ 0xa1, is), static_cast<std::uint64_t>(k)), k);
            found.emplace_back(kalpha_ratio(d.tensor, sc, s), s);
        }
        items[i].evals = sections_per_tensor;
        std::stable_sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
        Rng rng = make_rng(seed ^ 0xc1147b, is);
        double best = found.front().first;
        for (int st = 0; st < kStarts && st < static_cast<int>(found.size()); ++st) {
            auto [value, sec] = found[st];
            double step = 0.1;
            int fails = 0;
            for (int k = 0; k < kSteps && step > 1e-6; ++k) {
                const auto trial = perturb(sec, step, rng);
                const double v = kalpha_ratio(d.tensor, sc, trial);
                ++items[i].evals;
                if (v > value) {
                    value = v;
                    sec = trial;
                    fails = 0;
                } else if (++fails >= 15) {
                    step *= 0.5;
                    fails = 0;
                }
            }
            best = std::max(best, value);
        }
        items[i].ok = true;
        items[i].best = best;
    });
    KalphaFit out;
    for (const auto& it : items) {
        out.evaluations += it.evals;
        if (!it.ok) continue;
        ++out.tensors;
        out.constant = std::max(out.constant, it.best);
    }
    if (out.tensors == 0) throw Error(ErrorCode::budget_exhausted, "fit_kalpha_constant: every sample was discarded");
    return out;
}

KalphaCheck check_kalpha(int n, double constant, int tensors, int sections_per_tensor, std::uint64_t seed,
                         const ScanOptions& options) {
    check_dimension(n);
    if (tensors <= 0 || sections_per_tensor <= 0) throw Error(ErrorCode::invalid_argument, "counts must be positive");
    struct Item {
        long pairs = 0;
        long violations = 0;
        double worst = -std::numeric_limits<double>::infinity();
    };
    std::vector<Item> items(tensors);
    detail::parallel_for(tensors, options.workers, [&](int i) {
        const auto is = static_cast<std::uint64_t>(i);
        const auto d = draw_member(ConeSpec::pic1(n), derive_seed(seed, is), options.projection);
        if (!d.ok) return;
        const double sc = scal(d.tensor);
        const double slack = options.projection.tol * tolerance_scale(d.tensor);
        for (int k = 0; k < sections_per_tensor; ++k) {
            const auto s = mixed_section(n, derive_seed(derive_seed(seed ^ 0xa1, is), static_cast<std::uint64_t>(k)), k);
            const double kc = complex_sectional_curvature(d.tensor, s);
            const double a = alpha(s);
            ++items[i].pairs;
            if (kc < -constant * a * sc - slack) ++items[i].violations;
            if (a >= kAlphaFloor) items[i].worst = std::max(items[i].worst, -kc / (a * sc));
        }
    });
    KalphaCheck out;
    out.worst_ratio = -std::numeric_limits<double>::infinity();
    for (const auto& it : items) {
        out.pairs += it.pairs;
        out.violations += it.violations;
        out.worst_ratio = std::max(out.worst_ratio, it.worst);
    }
    return out;
}

}  // namespace curvcone
