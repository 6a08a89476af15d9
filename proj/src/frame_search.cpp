#include "frame_search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "curvcone/kernels.hpp"
#include "curvcone/random.hpp"
#include "frame_detail.hpp"
#include "parallel.hpp"

namespace curvcone::detail {
namespace {

constexpr int kLambdaGrid = 33;
constexpr int kChunk = 256;
constexpr int kThetaGrid = 72;
constexpr int kNewtonSteps = 12;

// min over t in [0,1] of c0 + c2 t^2 - 2 c1 t
std::pair<double, double> quad_min(double c0, double c2, double c1) {
    double best_t = 0.0, best = c0;
    const double at_one = c0 + c2 - 2.0 * c1;
    if (at_one < best) {
        best = at_one;
        best_t = 1.0;
    }
    if (c2 > 0.0) {
        const double t = c1 / c2;
        if (t > 0.0 && t < 1.0) {
            const double v = c0 - c1 * t;
            if (v < best) {
                best = v;
                best_t = t;
            }
        }
    }
    return {best, best_t};
}

struct Candidate {
    double value;
    long order;
    Eigen::MatrixXd frame;
};

struct Endpoint {
    Eigen::MatrixXd frame;
    Weights weights;
    long sweeps = 0;
    long evaluations = 0;
    bool plateau = false;  // stopped on a positive plateau before converging
};

// cos(m t), sin(m t) for m = 1..4 from one sincos call
struct Harmonics {
    std::array<double, 4> c{}, s{};
    Harmonics() = default;
    explicit Harmonics(double t) {
        c[0] = std::cos(t);
        s[0] = std::sin(t);
        for (int m = 1; m < 4; ++m) {
            c[m] = c[m - 1] * c[0] - s[m - 1] * s[0];
            s[m] = s[m - 1] * c[0] + c[m - 1] * s[0];
        }
    }
};

template <int N>
std::array<Harmonics, N> harmonic_table() {
    std::array<Harmonics, N> out;
    for (int i = 0; i < N; ++i) out[i] = Harmonics(2.0 * std::numbers::pi * i / N);
    return out;
}

// Degree-4 trigonometric polynomial fitted exactly from 9 equispaced samples.
struct TrigPoly {
    double a0 = 0.0;
    std::array<double, 4> a{}, b{};

    static TrigPoly fit(const std::array<double, 9>& h) {
        static const auto table = harmonic_table<9>();
        TrigPoly p;
        for (int j = 0; j < 9; ++j) p.a0 += h[j];
        p.a0 /= 9.0;
        for (int m = 0; m < 4; ++m) {
            double sa = 0.0, sb = 0.0;
            for (int j = 0; j < 9; ++j) {
                sa += h[j] * table[j].c[m];
                sb += h[j] * table[j].s[m];
            }
            p.a[m] = 2.0 * sa / 9.0;
            p.b[m] = 2.0 * sb / 9.0;
        }
        return p;
    }

    double at(const Harmonics& hm) const {
        double v = a0;
        for (int m = 0; m < 4; ++m) v += a[m] * hm.c[m] + b[m] * hm.s[m];
        return v;
    }
    double operator()(double t) const { return at(Harmonics(t)); }

    // first and second derivatives
    std::pair<double, double> slope(const Harmonics& hm) const {
        double d1 = 0.0, d2 = 0.0;
        for (int m = 0; m < 4; ++m) {
            const double k = m + 1.0;
            d1 += k * (b[m] * hm.c[m] - a[m] * hm.s[m]);
            d2 -= k * k * (a[m] * hm.c[m] + b[m] * hm.s[m]);
        }
        return {d1, d2};
    }
};

// Global minimizer on a 72-point grid, refined by safeguarded Newton steps.
double argmin_periodic(const TrigPoly& p) {
    static const auto grid = harmonic_table<kThetaGrid>();
    const double step = 2.0 * std::numbers::pi / kThetaGrid;
    int best = 0;
    double best_v = p.at(grid[0]);
    for (int i = 1; i < kThetaGrid; ++i) {
        const double v = p.at(grid[i]);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    const double lo = (best - 1) * step, hi = (best + 1) * step;
    double t = best * step;
    double v = best_v;
    for (int it = 0; it < kNewtonSteps; ++it) {
        const Harmonics hm(t);
        const auto [d1, d2] = p.slope(hm);
        if (!(d2 > 0.0)) break;
        const double next = std::clamp(t - d1 / d2, lo, hi);
        const double nv = p(next);
        if (!(nv <= v)) break;
        const bool done = std::abs(next - t) < 1e-15;
        t = next;
        v = nv;
        if (done) break;
    }
    return t;
}

Eigen::MatrixXd rotated_frame(const Eigen::MatrixXd& q, int k, int p, int r, double c, double s) {
    Eigen::MatrixXd f = q.leftCols(k);
    f.col(p) = c * q.col(p) + s * q.col(r);
    if (r < k) f.col(r) = -s * q.col(p) + c * q.col(r);
    return f;
}

Endpoint descend(const CurvatureTensor& r, const FrameForm& form, double scal, double scale,
                 const Eigen::MatrixXd& start, int max_sweeps, bool plateau_stop = true) {
    const int n = r.dim();
    const int k = frame_width(n);
    const bool lambda_zero = k < 4;
    Eigen::MatrixXd f0 = start;
    orthonormalize_columns(f0);
    Eigen::MatrixXd q = complete_basis(f0, n);

    Endpoint out;
    Weights w = minimize_weights(frame_components(r, q.leftCols(k)), form, scal, lambda_zero);
    ++out.evaluations;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        ++out.sweeps;
        const double before = w.value;
        for (int p = 0; p < k; ++p) {
            for (int t = p + 1; t < n; ++t) {
                static const auto samples = harmonic_table<9>();
                std::array<double, 9> h{};
                h[0] = w.value;
                for (int j = 1; j < 9; ++j)
                    h[j] = weighted_value(frame_components(r, rotated_frame(q, k, p, t, samples[j].c[0], samples[j].s[0])),
                                          form, scal, w.lambda, w.mu);
                out.evaluations += 8;
                const TrigPoly poly = TrigPoly::fit(h);
                const double th = argmin_periodic(poly);
                if (poly(th) >= w.value - 1e-15 * scale) continue;
                const double c = std::cos(th), s = std::sin(th);
                const Eigen::MatrixXd f = rotated_frame(q, k, p, t, c, s);
                const Weights nw = minimize_weights(frame_components(r, f), form, scal, lambda_zero);
                ++out.evaluations;
                if (nw.value >= w.value) continue;
                const Eigen::VectorXd qp = q.col(p), qt = q.col(t);
                q.col(p) = c * qp + s * qt;
                q.col(t) = -s * qp + c * qt;
                w = nw;
            }
        }
        orthonormalize_columns(q);
        if (before - w.value <= 1e-13 * scale) break;
        if (plateau_stop && w.value > 1e-4 * scale && before - w.value <= 1e-3 * w.value) {
            out.plateau = true;
            break;
        }
    }
    out.frame = q.leftCols(k);
    out.weights = minimize_weights(frame_components(r, out.frame), form, scal, lambda_zero);
    ++out.evaluations;
    return out;
}

}  // namespace

Components frame_components(const CurvatureTensor& r, const Eigen::MatrixXd& frame) {
    const int n = r.dim();
    const std::size_t n3 = static_cast<std::size_t>(n) * n * n;
    const int k = static_cast<int>(frame.cols());
    thread_local std::vector<double> v3, v4, col;
    v3.resize(n3);
    v4.resize(n3);
    col.resize(n);
    const auto& kern = kernels::active();
    const double* m = r.components().data();
    // v[ijk] = R(i, j, k, f_t): one pass over the table per last-slot vector
    auto contract_last = [&](int t, std::vector<double>& v) {
        for (int i = 0; i < n; ++i) col[i] = frame(i, t);
        kern.gemv(m, n3, n, col.data(), v.data());
    };
    // sum_ijk x_i y_j z_k v[ijk]
    auto contract3 = [&](const std::vector<double>& v, int x, int y, int z) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double xi = frame(i, x);
            const double* vi = v.data() + static_cast<std::size_t>(i) * n * n;
            double acc_i = 0.0;
            for (int j = 0; j < n; ++j) {
                const double* vij = vi + static_cast<std::size_t>(j) * n;
                double acc_j = 0.0;
                for (int l = 0; l < n; ++l) acc_j += vij[l] * frame(l, z);
                acc_i += frame(j, y) * acc_j;
            }
            total += xi * acc_i;
        }
        return total;
    };
    Components c;
    contract_last(2, v3);
    c.a = contract3(v3, 0, 2, 0);
    c.c = contract3(v3, 1, 2, 1);
    if (k >= 4) {
        contract_last(3, v4);
        c.b = contract3(v4, 0, 3, 0);
        c.d = contract3(v4, 1, 3, 1);
        c.e = contract3(v4, 0, 1, 2);
    }
    return c;
}

double weighted_value(const Components& c, const FrameForm& form, double scal, double lambda, double mu) {
    if (form.mu_one) mu = 1.0;
    const double l2 = lambda * lambda, m2 = mu * mu;
    double v = c.a + l2 * c.b + m2 * c.c + l2 * m2 * c.d - 2.0 * lambda * mu * c.e;
    if (!form.mu_one && form.scal_weight != 0.0) v += form.scal_weight * (1.0 - l2) * (1.0 - m2) * scal;
    return v;
}

Weights minimize_weights(const Components& c, const FrameForm& form, double scal, bool lambda_zero) {
    if (form.mu_one) {
        if (lambda_zero) return {c.a + c.c, 0.0, 1.0};
        const auto [v, l] = quad_min(c.a + c.c, c.b + c.d, c.e);
        return {v, l, 1.0};
    }
    const double st = form.scal_weight * scal;
    // at fixed lambda, the coefficients of the quadratic in mu
    auto best_mu = [&](double l) {
        const double l2 = l * l;
        return quad_min(c.a + l2 * c.b + st * (1.0 - l2), c.c + l2 * c.d - st * (1.0 - l2), l * c.e);
    };
    auto best_lambda = [&](double m) {
        const double m2 = m * m;
        return quad_min(c.a + m2 * c.c + st * (1.0 - m2), c.b + m2 * c.d - st * (1.0 - m2), m * c.e);
    };
    if (lambda_zero) {
        const auto [v, m] = best_mu(0.0);
        return {v, 0.0, m};
    }
    Weights w{std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (int i = 0; i < kLambdaGrid; ++i) {
        const double l = static_cast<double>(i) / (kLambdaGrid - 1);
        const auto [v, m] = best_mu(l);
        if (v < w.value) w = {v, l, m};
    }
    // the mu = 0 and mu = 1 edges exactly; narrow minima there fall between grid points
    for (double m : {0.0, 1.0}) {
        const auto [v, l] = best_lambda(m);
        if (v < w.value) w = {v, l, m};
    }
    for (int it = 0; it < 50; ++it) {
        const auto [vl, l] = best_lambda(w.mu);
        const auto [vm, m] = best_mu(l);
        const bool moved = std::abs(l - w.lambda) > 1e-15 || std::abs(m - w.mu) > 1e-15;
        if (vm <= w.value) w = {vm, l, m};
        if (!moved) break;
    }
    // report the value of the polynomial itself at the chosen weights
    w.value = weighted_value(c, form, scal, w.lambda, w.mu);
    return w;
}

SearchResult search_frames(const CurvatureTensor& r, const FrameForm& form, const SearchBudget& budget,
                           std::span<const FrameCertificate> warm_starts) {
    const int n = r.dim();
    const int k = frame_width(n);
    const bool lambda_zero = k < 4;
    const double s = curvcone::scal(r);
    const double scale = tolerance_scale(r);
    SearchResult result;

    // Two-weight forms also descend on their mu = 1 slice (the pic1 form). A
    // point on the boundary has many near-zero minima at lambda = mu = 0 that
    // attract the full-form descents, while violations on the lambda = 1 or
    // mu = 1 edges can be narrow; slice endpoints are valid frames of the full
    // form.
    const bool sliced = !form.mu_one && !lambda_zero;
    const FrameForm slice{true, 0.0};

    // random Stiefel samples, reduced per chunk then merged in chunk order
    const int frames = std::max(0, budget.frames);
    const int total = std::max(0, budget.descents);
    const int keep_slice = sliced && total > 0 ? std::max(1, total / 4) : 0;
    const int keep = total - keep_slice;
    const int chunks = (frames + kChunk - 1) / kChunk;
    auto cmp = [](const Candidate& x, const Candidate& y) {
        return x.value < y.value || (x.value == y.value && x.order < y.order);
    };
    // max-heap of the best `cap` samples; frames are copied only when kept
    auto offer = [&](std::vector<Candidate>& heap, int cap, double v, int i, const Eigen::MatrixXd& f) {
        if (cap == 0) return;
        if (static_cast<int>(heap.size()) < cap) {
            heap.push_back({v, i, f});
            std::push_heap(heap.begin(), heap.end(), cmp);
        } else if (cmp(Candidate{v, i, {}}, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), cmp);
            heap.back() = {v, i, f};
            std::push_heap(heap.begin(), heap.end(), cmp);
        }
    };
    std::vector<std::vector<Candidate>> per_chunk(chunks), per_chunk_slice(chunks);
    parallel_for(chunks, budget.workers, [&](int ci) {
        Rng rng = make_rng(budget.seed, static_cast<std::uint64_t>(ci) + 1);
        const int begin = ci * kChunk;
        const int end = std::min(frames, begin + kChunk);
        Eigen::MatrixXd f(n, k);
        for (int i = begin; i < end; ++i) {
            random_frame_into(f, rng);
            const Components c = frame_components(r, f);
            offer(per_chunk[ci], keep, minimize_weights(c, form, s, lambda_zero).value, i, f);
            if (!sliced) continue;
            // (f3, f4, f1, f2) swaps B and C, taking the lambda = 1 edge to the slice
            const double direct = minimize_weights(c, slice, s, false).value;
            const double swapped = minimize_weights({c.a, c.c, c.b, c.d, c.e}, slice, s, false).value;
            if (direct <= swapped) {
                offer(per_chunk_slice[ci], keep_slice, direct, i, f);
            } else {
                Eigen::MatrixXd g(n, k);
                g << f.col(2), f.col(3), f.col(0), f.col(1);
                offer(per_chunk_slice[ci], keep_slice, swapped, i, g);
            }
        }
    });
    auto best_of = [&](std::vector<std::vector<Candidate>>& chunked, int cap) {
        std::vector<Candidate> pool;
        for (auto& c : chunked)
            for (auto& cand : c) pool.push_back(std::move(cand));
        std::sort(pool.begin(), pool.end(), cmp);
        if (static_cast<int>(pool.size()) > cap) pool.resize(cap);
        return pool;
    };
    auto pool = best_of(per_chunk, keep);
    auto pool_slice = best_of(per_chunk_slice, keep_slice);
    result.used.frames_sampled = frames;

    std::vector<Eigen::MatrixXd> starts;
    for (const auto& w : warm_starts)
        if (w.kind == CertificateKind::frame && w.frame.rows() == n && w.frame.cols() == k) starts.push_back(w.frame);
    for (auto& c : pool) starts.push_back(std::move(c.frame));
    // without any sample or warm start, descend from the coordinate frame
    if (starts.empty() && pool_slice.empty()) starts.push_back(Eigen::MatrixXd::Identity(n, k));
    const std::size_t first_slice = starts.size();
    for (auto& c : pool_slice) starts.push_back(std::move(c.frame));

    std::vector<Endpoint> ends(starts.size());
    parallel_for(static_cast<int>(starts.size()), budget.workers,
                 [&](int i) {
                     const bool on_slice = static_cast<std::size_t>(i) >= first_slice;
                     ends[i] = descend(r, on_slice ? slice : form, s, scale, starts[i], std::max(1, budget.max_sweeps));
                     if (on_slice) ends[i].weights = minimize_weights(frame_components(r, ends[i].frame), form, s, false);
                 });
    result.used.descents = static_cast<long>(ends.size());
    result.used.evaluations = frames;
    auto count = [&](const Endpoint& e) {
        result.used.sweeps += e.sweeps;
        result.used.evaluations += e.evaluations;
    };
    for (const auto& e : ends) count(e);

    std::vector<int> order(ends.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    auto by_value = [&](int x, int y) { return ends[x].weights.value < ends[y].weights.value; };
    std::stable_sort(order.begin(), order.end(), by_value);
    // the leading endpoints decide the margin, so they run to convergence
    const std::size_t lead = std::min<std::size_t>(3, order.size());
    std::vector<int> resumed;
    for (std::size_t j = 0; j < lead; ++j)
        if (ends[order[j]].plateau) resumed.push_back(order[j]);
    if (!resumed.empty()) {
        parallel_for(static_cast<int>(resumed.size()), budget.workers, [&](int j) {
            Endpoint& e = ends[resumed[j]];
            e = descend(r, form, s, scale, e.frame, std::max(1, budget.max_sweeps), false);
        });
        for (int i : resumed) count(ends[i]);
        std::stable_sort(order.begin(), order.end(), by_value);
    }
    for (int i : order) {
        const auto& e = ends[i];
        bool dup = false;
        for (const auto& m : result.minima) {
            if (std::abs(m.value - e.weights.value) <= 1e-10 * scale && std::abs(m.lambda - e.weights.lambda) <= 1e-8 &&
                std::abs(m.mu - e.weights.mu) <= 1e-8) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        FrameCertificate c;
        c.frame = e.frame;
        c.lambda = e.weights.lambda;
        c.mu = e.weights.mu;
        c.value = e.weights.value;
        c.kind = CertificateKind::frame;
        result.minima.push_back(std::move(c));
    }
    result.best = result.minima.front();
    return result;
}

}  // namespace curvcone::detail
