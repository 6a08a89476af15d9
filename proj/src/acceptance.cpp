#include "curvcone/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "curvcone/cone.hpp"
#include "curvcone/error.hpp"
#include "curvcone/io.hpp"
#include "curvcone/ode.hpp"
#include "curvcone/random.hpp"
#include "curvcone/scans.hpp"
#include "curvcone/sections.hpp"

namespace curvcone::acceptance {
namespace {

using clock_type = std::chrono::steady_clock;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

struct Ctx {
    bool full = true;
    std::uint64_t seed = 1;
    int workers = 1;
    int count(int full_count, int fast_count) const { return full ? full_count : fast_count; }
    std::uint64_t stream(std::uint64_t k) const { return derive_seed(seed, k); }
};

struct Outcome {
    bool passed = true;
    std::ostringstream detail;
    std::vector<std::string> notes;
    void require(bool ok) { passed = passed && ok; }
};

double rel(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

// ---------------------------------------------------------------------------

void algebra_identities(const Ctx& ctx, Outcome& out) {
    double worst = 0.0;
    for (int n = 3; n <= 6; ++n) {
        Rng rng = make_rng(ctx.stream(100), n);
        worst = std::max(worst, rel(scal(identity_tensor(n)), n * (n - 1.0)));
        for (int i = 0; i < 20; ++i) {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) h(r, c) = standard_normal(rng);
            const auto hs = SymBilinear::from_matrix(h + h.transpose());
            const double tr = hs.trace();
            worst = std::max(worst, rel(scal(kulkarni_nomizu(hs, SymBilinear::metric(n))), 2.0 * (n - 1) * tr));
            const double a = 2.0 * uniform01(rng) - 0.5;
            const double b = 2.0 * uniform01(rng) - 0.5;
            const auto s = gaussian_tensor(n, rng);
            worst = std::max(worst, rel(scal(ell_ab(s, {a, b})), (2.0 * a * (n - 1) + 1.0) * scal(s)));
        }
    }
    out.require(worst <= 1e-10);
    out.detail << "max relative error " << sci(worst) << " over n = 3..6";
}

void fixed_ray(const Ctx&, Outcome& out) {
    double q_err = 0.0, traj_err = 0.0;
    for (int n = 3; n <= 5; ++n) {
        const auto id = identity_tensor(n);
        q_err = std::max(q_err, norm(q_map(id) - 2.0 * (n - 1) * id) / norm(id));
        const double t_end = 0.4 / (2.0 * (n - 1));
        const auto traj = integrate(id, t_end);
        out.require(traj.points.back().t == t_end);
        for (const auto& p : traj.points) {
            const auto exact = sphere_solution(n, p.t);
            traj_err = std::max(traj_err, norm(p.r - exact) / norm(exact));
        }
    }
    out.require(q_err <= 1e-12 && traj_err <= 1e-8);
    out.detail << "|Q(I) - 2(n-1)I| / |I| = " << sci(q_err) << ", sphere trajectory relative error " << sci(traj_err);
}

void dimension_three(const Ctx& ctx, Outcome& out) {
    const int count = ctx.count(200, 60);
    const double tol = 1e-8;
    int disagree = 0, members = 0;
    for (int i = 0; i < count; ++i) {
        Rng rng = make_rng(ctx.stream(300), static_cast<std::uint64_t>(i));
        auto r = gaussian_tensor(3, rng);
        // shift the Ricci spectrum so that roughly half the samples are members
        const double lo = ricci(r).matrix().selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
        r.add_scaled(0.5 * (-lo + 0.5 * standard_normal(rng)), identity_tensor(3));
        const double oracle =
            ricci(r).matrix().selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() / tolerance_scale(r);
        SearchBudget budget;
        budget.seed = derive_seed(ctx.stream(301), static_cast<std::uint64_t>(i));
        budget.workers = ctx.workers;
        const auto rep = membership_margin(r, ConeSpec::pic1(3), budget);
        const bool ours = is_member(rep, tol);
        members += ours;
        disagree += ours != (oracle >= -tol);
    }
    out.require(disagree == 0);
    out.detail << disagree << " disagreements on " << count << " tensors (" << members << " members)";
}

void delta_pinching(const Ctx& ctx, Outcome& out) {
    const int samples = ctx.count(200, 15);
    const double a = 0.2, b = 0.1;
    ScanOptions opt;
    opt.workers = ctx.workers;
    const char* names[] = {"ric", "pic1", "pic2"};
    const PinchTarget targets[] = {PinchTarget::ric, PinchTarget::pic1, PinchTarget::pic2};
    out.detail << "delta = " << fmt("%.6f", delta_floor(4, a, b)) << ";";
    for (int k = 0; k < 3; ++k) {
        const auto est = estimate_delta(4, a, b, targets[k], samples, ctx.stream(400 + k), opt);
        out.require(est.worst_margin_at_floor >= -1e-7 && est.used > 0);
        out.detail << " " << names[k] << ": worst margin " << sci(est.worst_margin_at_floor) << " (" << est.used
                   << " used, " << est.discarded << " discarded)";
        out.notes.push_back(std::string("largest admissible delta over the ") + names[k] +
                            " samples: " + fmt("%.6f", est.delta));
    }
}

void inclusion_chain(const Ctx& ctx, Outcome& out) {
    const int samples = ctx.count(200, 15);
    const std::vector<ConeSpec> wider{ConeSpec::check(4, 0.5), ConeSpec::check(4, 1.0), ConeSpec::check(4, 5.0),
                                      ConeSpec::check(4, 50.0), ConeSpec::pic1(4)};
    double worst_chain = 0.0, worst_nest = 0.0;
    for (int i = 0; i < samples; ++i) {
        const auto is = static_cast<std::uint64_t>(i);
        SearchBudget budget;
        budget.workers = ctx.workers;
        const auto m = sample_member(ConeSpec::pic2(4), derive_seed(ctx.stream(500), is)).tensor;
        for (std::size_t k = 0; k < wider.size(); ++k) {
            budget.seed = derive_seed(ctx.stream(501), is * 8 + k);
            worst_chain = std::min(worst_chain, membership_margin(m, wider[k], budget).margin);
        }
        const auto c5 = sample_member(ConeSpec::check(4, 5.0), derive_seed(ctx.stream(502), is)).tensor;
        budget.seed = derive_seed(ctx.stream(503), is);
        worst_nest = std::min(worst_nest, membership_margin(c5, ConeSpec::check(4, 0.5), budget).margin);
    }
    out.require(worst_chain >= -1e-7 && worst_nest >= -1e-7);
    out.detail << samples << " pic2 members: worst margin in checkc s = 0.5, 1, 5, 50 and pic1 " << sci(worst_chain)
               << "; checkc:s=5 members in checkc:s=0.5: worst " << sci(worst_nest);
}

void appendix_a(const Ctx& ctx, Outcome& out) {
    double alpha_err = 0.0;
    for (int n = 4; n <= 6; ++n) {
        for (int i = 0; i < 50; ++i) {
            const auto is = static_cast<std::uint64_t>(n * 1000 + i);
            alpha_err = std::max(alpha_err, alpha(sample_section(n, SectionKind::pic1, derive_seed(ctx.stream(600), is))));
            alpha_err =
                std::max(alpha_err, std::abs(1.0 - alpha(sample_section(n, SectionKind::real, derive_seed(ctx.stream(601), is)))));
        }
    }
    out.require(alpha_err <= 1e-10);
    out.detail << "alpha error " << sci(alpha_err);

    ScanOptions opt;
    opt.workers = ctx.workers;
    const int ratio_samples = ctx.count(500, 150);
    const auto r1 = pic1_norm_constant(4, ratio_samples, ctx.stream(602), opt);
    const auto r2 = pic1_norm_constant(4, ratio_samples, ctx.stream(603), opt);
    const double spread = std::abs(r1.max_ratio / r2.max_ratio - 1.0);
    const bool finite = std::isfinite(r1.max_ratio) && std::isfinite(r2.max_ratio);
    out.require(finite && spread <= 0.1);
    out.detail << "; max |R|/scal " << fmt("%.4f", r1.max_ratio) << " vs " << fmt("%.4f", r2.max_ratio) << " (spread "
               << fmt("%.1f", 100.0 * spread) << "%)";

    const auto fit = fit_kalpha_constant(4, ctx.count(60, 20), ctx.count(200, 100), ctx.stream(604), opt);
    const auto check = check_kalpha(4, fit.constant, ctx.count(100, 20), ctx.count(100, 25), ctx.stream(605), opt);
    out.require(check.violations == 0 && check.pairs >= ctx.count(10000, 500));
    out.detail << "; fitted constant " << fmt("%.4f", fit.constant) << ", " << check.violations << " violations on "
               << check.pairs << " pairs (worst ratio " << fmt("%.4f", check.worst_ratio) << ")";
}

void section_form(const Ctx& ctx, Outcome& out) {
    const int count = ctx.count(1000, 200);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        const auto is = static_cast<std::uint64_t>(i);
        Rng rng = make_rng(ctx.stream(700), is);
        const int n = 4 + i % 3;
        const auto r = gaussian_tensor(n, rng);
        const double s = std::exp(std::log(0.1) + std::log(100.0) * uniform01(rng));
        const auto sigma = sample_section(n, SectionKind::generic, derive_seed(ctx.stream(701), is));
        const double a = alpha(sigma);
        const double by_section = complex_sectional_curvature(r, sigma) + a * a * scal(r) / s;
        const auto cert = section_frame(sigma);
        const double weight = (1.0 + cert.lambda * cert.lambda) * (1.0 + cert.mu * cert.mu);
        const double by_frame = frame_functional(r, cert, ConeSpec::check(n, s)) / weight;
        worst = std::max(worst, std::abs(by_section - by_frame) / tolerance_scale(r));
    }
    out.require(worst <= 1e-8);
    out.detail << "max |section form - frame form| / max(1, |R|) = " << sci(worst) << " on " << count << " triples";
}

void ode_invariance(const Ctx& ctx, Outcome& out) {
    const int starts = ctx.count(20, 3);
    IntegratorControls controls;
    controls.rel_tol = 1e-8;
    const ConeSpec cones[] = {ConeSpec::pic2(4), ConeSpec::tilde(4, 0.2, 1.0)};
    for (int k = 0; k < 2; ++k) {
        const ConeSpec& spec = cones[k];
        double worst = 0.0;
        long points = 0;
        int blown = 0;
        for (int i = 0; i < starts; ++i) {
            const auto is = static_cast<std::uint64_t>(i);
            const auto r0 = sample_member(spec, derive_seed(ctx.stream(800 + k), is)).tensor;
            SearchBudget standalone;
            standalone.seed = derive_seed(ctx.stream(810 + k), is);
            const std::vector<ConeSpec> monitors{spec};
            const auto traj = integrate(r0, 1e3 / tolerance_scale(r0), controls, monitors, monitor_budget(standalone));
            const auto rep = invariance_report(traj, spec);
            worst = std::min(worst, rep.worst_margin);
            points += rep.points;
            blown += traj.blew_up;
        }
        out.require(worst >= -5e-7 && blown == starts);
        out.detail << (k ? "; " : "") << spec.label() << ": worst margin " << sci(worst) << " over " << points
                   << " steps, " << blown << "/" << starts << " reached the blow-up guard";
    }
}

void projection(const Ctx& ctx, Outcome& out) {
    const int per_family = ctx.count(50, 4);
    const double d_exact = std::sqrt(24.0);
    double neg_err = 0.0;
    for (const auto& spec : {ConeSpec::pic1(4), ConeSpec::pic2(4)}) {
        const auto p = project(-1.0 * identity_tensor(4), spec);
        out.require(p.converged);
        neg_err = std::max({neg_err, norm(p.point), std::abs(p.distance - d_exact)});
    }
    out.require(neg_err <= 1e-6);
    out.detail << "pi(-I) error " << sci(neg_err) << ";";

    const std::vector<ConeSpec> families{ConeSpec::pic1(4),          ConeSpec::pic2(4),     ConeSpec::check(4, 1.0),
                                         ConeSpec::hat(4, 0.3),       ConeSpec::hat(4, 1.0), ConeSpec::tilde(4, 0.2, 1.0)};
    for (std::size_t f = 0; f < families.size(); ++f) {
        const auto& spec = families[f];
        // a few members to probe obtuseness against, besides 0, I and 2 pi(R)
        std::vector<CurvatureTensor> probes{identity_tensor(4)};
        for (int j = 0; j < 3; ++j) probes.push_back(sample_member(spec, derive_seed(ctx.stream(900 + f), j)).tensor);
        double idem = 0.0, obtuse = 0.0;
        int unconverged = 0;
        for (int i = 0; i < per_family; ++i) {
            Rng rng = make_rng(ctx.stream(920 + f), static_cast<std::uint64_t>(i));
            const auto r = gaussian_tensor(4, rng);
            const auto p = project(r, spec);
            if (!p.converged) {
                ++unconverged;
                continue;
            }
            const double scale = tolerance_scale(r);
            const auto pp = project(p.point, spec);
            unconverged += !pp.converged;
            idem = std::max(idem, norm(pp.point - p.point) / scale);
            const auto normal = r - p.point;
            obtuse = std::max(obtuse, std::abs(inner(normal, p.point)) / (scale * scale));
            for (const auto& m : probes) {
                const auto dir = m - p.point;
                obtuse = std::max(obtuse, inner(normal, dir) / (scale * std::max(1.0, norm(dir))));
            }
        }
        out.require(unconverged == 0 && idem <= 1e-6 && obtuse <= 1e-6);
        out.detail << " " << spec.label() << ": idempotence " << sci(idem) << ", obtuseness " << sci(obtuse);
        if (unconverged) out.detail << ", " << unconverged << " unconverged";
    }
}

void yokota(const Ctx& ctx, Outcome& out) {
    const auto spec = ConeSpec::tilde(4, 0.2, 1.0);
    const std::vector<double> grid{0.02, 0.05, 0.1};
    const int samples = ctx.count(140, 16);
    const int needed = ctx.count(100, 10);
    YokotaOptions opt;
    opt.workers = ctx.workers;
    const auto rep = yokota_scan(spec, grid, samples, ctx.stream(1000), opt);
    for (const auto& row : rep.rows) {
        out.require(row.qualifying >= needed && row.mu_hat > 0.0 && row.min_t_scal > 1.0);
        out.detail << "t = " << row.t << ": mu_hat " << fmt("%.4g", row.mu_hat) << " (" << row.qualifying
                   << " qualifying, min t scal " << fmt("%.4f", row.min_t_scal) << ", " << row.unresolved
                   << " unresolved); ";
    }
    out.require(rep.lipschitz_hat <= YokotaReport::lipschitz_bound);
    out.detail << "Lipschitz ratio " << fmt("%.4f", rep.lipschitz_hat) << " <= " << YokotaReport::lipschitz_bound;

    // smaller times, reported for comparison only
    const std::vector<double> small{0.01, 0.005};
    const auto extra = yokota_scan(spec, small, ctx.count(40, 8), ctx.stream(1001), opt);
    for (const auto& row : extra.rows) {
        out.notes.push_back("t = " + fmt("%g", row.t) + ": mu_hat " + fmt("%.4g", row.mu_hat) + " on " +
                            std::to_string(row.qualifying) + " qualifying samples");
    }
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::string artifact(const Ctx& ctx) {
    io::json doc;
    doc["config"] = {{"seed", ctx.seed}, {"cone", "pic2"}, {"n", 4}};
    const auto m = sample_member(ConeSpec::pic2(4), ctx.stream(1100), ProjectionOptions{});
    doc["member"] = io::tensor_to_json(m.tensor);
    Rng rng = make_rng(ctx.stream(1101));
    const auto r = gaussian_tensor(4, rng);
    SearchBudget budget;
    budget.seed = ctx.stream(1102);
    budget.workers = ctx.workers;
    doc["margin"] = io::margin_to_json(membership_margin(r, ConeSpec::pic1(4), budget));
    IntegratorControls controls;
    controls.stop_norm = 20.0 * norm(m.tensor);
    const std::vector<ConeSpec> monitors{ConeSpec::pic2(4)};
    const auto traj = integrate(m.tensor, 10.0, controls, monitors, monitor_budget(SearchBudget{4000, 8, 3, 1, 30}));
    std::ostringstream csv;
    io::write_trajectory_csv(csv, traj, doc["config"]);
    return io::dump(doc) + csv.str();
}

void soundness(const Ctx& ctx, Outcome& out) {
    const std::vector<ConeSpec> families{ConeSpec::pic1(4), ConeSpec::pic2(4), ConeSpec::check(4, 1.0),
                                         ConeSpec::hat(4, 0.3), ConeSpec::tilde(4, 0.2, 1.0)};
    const int count = ctx.count(20, 6);
    int negatives = 0, unstable = 0;
    for (std::size_t f = 0; f < families.size(); ++f) {
        for (int i = 0; i < count; ++i) {
            Rng rng = make_rng(ctx.stream(1200 + f), static_cast<std::uint64_t>(i));
            auto r = gaussian_tensor(4, rng);
            r.add_scaled(2.0 * uniform01(rng), identity_tensor(4));
            SearchBudget budget{4000, 10, derive_seed(ctx.stream(1210), f * 1000 + i), ctx.workers, 40};
            const auto rep = membership_margin(r, families[f], budget);
            if (!rep.sound_violation) continue;
            ++negatives;
            const double again = certificate_value(r, rep.certificate, families[f]) / tolerance_scale(r);
            const auto rep2 = membership_margin(r, families[f], budget);
            if (!same_bits(again, rep.margin) || !same_bits(rep2.margin, rep.margin) || !(again < 0.0)) ++unstable;
        }
    }
    const std::string first = artifact(ctx);
    const std::string second = artifact(ctx);
    const bool identical = first == second;
    out.require(unstable == 0 && negatives > 0 && identical);
    out.detail << negatives << " negative margins, " << unstable << " failed bit-stable re-verification; artifacts "
               << (identical ? "byte-identical" : "DIFFER") << " (" << first.size() << " bytes)";
}

struct Entry {
    int id;
    const char* title;
    double limit;
    void (*fn)(const Ctx&, Outcome&);
};

const Entry kEntries[] = {
    {1, "algebra identities", 1.0, algebra_identities},
    {2, "Hamilton ODE fixed ray", 5.0, fixed_ray},
    {3, "n = 3 equivalence", 30.0, dimension_three},
    {4, "ell pinching", 300.0, delta_pinching},
    {5, "inclusion chain", 300.0, inclusion_chain},
    {6, "alpha and PIC1 constants", 600.0, appendix_a},
    {7, "section form of checkc", 60.0, section_form},
    {8, "ODE invariance", 600.0, ode_invariance},
    {9, "projection correctness", 600.0, projection},
    {10, "Yokota scan", 600.0, yokota},
    {11, "certificate soundness and determinism", 60.0, soundness},
};

}  // namespace

std::vector<Result> run(const Options& options, const std::function<void(const Result&)>& report) {
    Ctx ctx;
    ctx.full = options.suite == Suite::full;
    ctx.seed = options.seed;
    ctx.workers = std::max(1, options.workers);
    std::vector<Result> results;
    for (const auto& e : kEntries) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), e.id) == options.only.end()) {
            continue;
        }
        Result r;
        r.id = e.id;
        r.title = e.title;
        r.limit_seconds = e.limit;
        Outcome out;
        const auto t0 = clock_type::now();
        try {
            e.fn(ctx, out);
        } catch (const std::exception& ex) {
            out.passed = false;
            out.detail << " error: " << ex.what();
        }
        r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
        r.passed = out.passed && r.seconds <= r.limit_seconds;
        r.detail = out.detail.str();
        if (r.seconds > r.limit_seconds) r.detail += " [over the time limit]";
        r.notes = std::move(out.notes);
        if (report) report(r);
        results.push_back(std::move(r));
    }
    return results;
}

std::string format(const Result& r) {
    std::ostringstream s;
    s << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << "  " << r.title << "  (" << fmt("%.1f", r.seconds)
      << " s of " << fmt("%g", r.limit_seconds) << " s)  " << r.detail;
    for (const auto& note : r.notes) s << "\n        note: " << note;
    return s.str();
}

int exit_status(const std::vector<Result>& results, const std::vector<int>& expected_fail) {
    for (const auto& r : results) {
        if (r.passed) continue;
        if (std::find(expected_fail.begin(), expected_fail.end(), r.id) == expected_fail.end()) return 1;
    }
    return 0;
}

}  // namespace curvcone::acceptance
