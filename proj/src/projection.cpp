#include <algorithm>
#include <cmath>
#include <limits>

#include "curvcone/cone.hpp"
#include "curvcone/error.hpp"
#include "curvcone/random.hpp"

namespace curvcone {
namespace {

// Projection of r onto {X : <g_i, X> >= shift for all cuts i}. Dual variables
// y >= 0 give X = r + sum_i y_i g_i; the dual objective is 1/2 y^T K y + c^T y
// with K the Gram matrix of the (unit) cuts and c_i = <g_i, r> - shift.
class HalfspaceProjector {
public:
    explicit HalfspaceProjector(const CurvatureTensor& r)
        : r_(r), dim_(static_cast<Eigen::Index>(r.size())), rvec_(Eigen::Map<const Eigen::VectorXd>(r.components().data(), dim_)) {}

    int size() const { return static_cast<int>(certs_.size()); }
    double shift() const { return shift_; }

    void tighten(double shift) {
        c_.array() += shift_ - shift;
        shift_ = shift;
    }

    // Adds the halfspace of `cert`; false if it duplicates an existing cut.
    bool add(const CurvatureTensor& g, const FrameCertificate& cert, long stamp) {
        const double len = norm(g);
        if (!(len > 1e-14)) return false;
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(g.components().data(), dim_) / len;
        const int m = size();
        Eigen::VectorXd k_new = m > 0 ? Eigen::VectorXd(g_.leftCols(m).transpose() * v) : Eigen::VectorXd();
        for (int i = 0; i < m; ++i)
            if (k_new[i] > 1.0 - 1e-12) return false;
        if (g_.cols() <= m) g_.conservativeResize(dim_, std::max<Eigen::Index>(8, 2 * g_.cols()));
        g_.col(m) = v;
        k_.conservativeResize(m + 1, m + 1);
        if (m > 0) {
            k_.block(0, m, m, 1) = k_new;
            k_.block(m, 0, 1, m) = k_new.transpose();
        }
        k_(m, m) = 1.0;
        c_.conservativeResize(m + 1);
        c_[m] = v.dot(rvec_) - shift_;
        y_.conservativeResize(m + 1);
        y_[m] = 0.0;
        certs_.push_back(cert);
        stamps_.push_back(stamp);
        return true;
    }

    void evict_to(int max_cuts) {
        while (size() > max_cuts) {
            int victim = -1;
            for (int i = 0; i < size(); ++i) {
                if (y_[i] > 0.0) continue;
                if (victim < 0 || stamps_[i] < stamps_[victim]) victim = i;
            }
            if (victim < 0) {
                victim = 0;
                for (int i = 1; i < size(); ++i)
                    if (stamps_[i] < stamps_[victim]) victim = i;
            }
            remove(victim);
        }
    }

    // The dual is a nonnegative least-squares problem (|r + G y|^2 / 2 when
    // shift = 0); solved by the Lawson-Hanson active-set method, warm started
    // from the previous multipliers.
    void solve(double scale, long stamp) {
        const int m = size();
        if (m == 0) return;
        const double eps = 1e-13 * scale;
        std::vector<char> passive(m, 0);
        // blocked: candidates whose entry was rejected because of a (numerically)
        // dependent passive set; cleared after every successful entry
        std::vector<char> blocked(m, 0);
        for (int i = 0; i < m; ++i) passive[i] = y_[i] > 0.0;
        int enter = -1;
        for (int outer = 0; outer < 8 * m + 16; ++outer) {
            // inner loop: least squares on the passive set, stepping back to stay feasible
            for (int inner = 0; inner <= m; ++inner) {
                const Eigen::VectorXd z = solve_passive(passive);
                if (inner == 0 && enter >= 0) {
                    if (!(z[enter] > 0.0)) {
                        passive[enter] = 0;
                        blocked[enter] = 1;
                        break;
                    }
                    std::fill(blocked.begin(), blocked.end(), 0);
                }
                double step = 1.0;
                int blocking = -1;
                for (int i = 0; i < m; ++i) {
                    if (!passive[i] || z[i] > 0.0) continue;
                    const double t = y_[i] / (y_[i] - z[i]);
                    if (t < step) {
                        step = t;
                        blocking = i;
                    }
                }
                if (blocking < 0) {
                    y_ = z;
                    break;
                }
                y_ += step * (z - y_);
                for (int i = 0; i < m; ++i) {
                    if (passive[i] && (i == blocking || y_[i] <= 0.0)) {
                        passive[i] = 0;
                        y_[i] = 0.0;
                    }
                }
            }
            const Eigen::VectorXd w = c_ + k_ * y_;
            enter = -1;
            for (int i = 0; i < m; ++i)
                if (!passive[i] && !blocked[i] && w[i] < -eps && (enter < 0 || w[i] < w[enter])) enter = i;
            if (enter < 0) break;
            passive[enter] = 1;
        }
        for (int i = 0; i < m; ++i)
            if (y_[i] > 0.0) stamps_[i] = stamp;
    }

    CurvatureTensor point() const {
        std::vector<double> out(r_.components().begin(), r_.components().end());
        Eigen::Map<Eigen::VectorXd> x(out.data(), dim_);
        if (size() > 0) x += g_.leftCols(size()) * y_;
        return canonical_project(out, r_.dim());
    }

    std::vector<FrameCertificate> active() const {
        std::vector<FrameCertificate> out;
        for (int i = 0; i < size(); ++i)
            if (y_[i] > 0.0) out.push_back(certs_[i]);
        return out;
    }

    // active certificates, most recently active first
    std::vector<FrameCertificate> recent_active(std::size_t limit) const {
        std::vector<int> idx;
        for (int i = 0; i < size(); ++i)
            if (y_[i] > 0.0) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return stamps_[a] > stamps_[b]; });
        std::vector<FrameCertificate> out;
        for (int i : idx) {
            if (out.size() >= limit) break;
            out.push_back(certs_[i]);
        }
        return out;
    }

private:
    // y with y_P = argmin |r + G_P y_P| and zeros elsewhere
    Eigen::VectorXd solve_passive(const std::vector<char>& passive) const {
        const int m = size();
        std::vector<int> idx;
        for (int i = 0; i < m; ++i)
            if (passive[i]) idx.push_back(i);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
        if (idx.empty()) return out;
        const int a = static_cast<int>(idx.size());
        Eigen::MatrixXd kp(a, a);
        Eigen::VectorXd rhs(a);
        for (int i = 0; i < a; ++i) {
            rhs[i] = -c_[idx[i]];
            for (int j = 0; j < a; ++j) kp(i, j) = k_(idx[i], idx[j]);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(kp);
        Eigen::VectorXd z = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !z.allFinite() || (kp * z - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) {
            z = kp.completeOrthogonalDecomposition().solve(rhs);
        }
        for (int i = 0; i < a; ++i) out[idx[i]] = z[i];
        return out;
    }

    void remove(int victim) {
        const int m = size();
        const int last = m - 1;
        if (victim != last) {
            g_.col(victim) = g_.col(last);
            k_.row(victim) = k_.row(last);
            k_.col(victim) = k_.col(last);
            k_(victim, victim) = 1.0;
            c_[victim] = c_[last];
            y_[victim] = y_[last];
            certs_[victim] = certs_[last];
            stamps_[victim] = stamps_[last];
        }
        k_.conservativeResize(last, last);
        c_.conservativeResize(last);
        y_.conservativeResize(last);
        certs_.pop_back();
        stamps_.pop_back();
    }

    const CurvatureTensor& r_;
    Eigen::Index dim_;
    Eigen::VectorXd rvec_;
    Eigen::MatrixXd g_;
    Eigen::MatrixXd k_;
    Eigen::VectorXd c_;
    Eigen::VectorXd y_;
    std::vector<FrameCertificate> certs_;
    std::vector<long> stamps_;
    double shift_ = 0.0;
};

constexpr std::size_t kWarmCuts = 12;
constexpr int kCutsPerRound = 8;
constexpr int kMaxTightenings = 6;
constexpr double kTightenBand = 16.0;
constexpr double kMaxShift = 1e-7;

}  // namespace

ProjectionResult project(const CurvatureTensor& r, const ConeSpec& spec, const ProjectionOptions& options,
                         std::span<const FrameCertificate> seed_cuts) {
    validate(spec);
    if (r.dim() != spec.n) throw Error(ErrorCode::dimension, "tensor dimension does not match cone dimension");
    if (!(options.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "projection tolerance must be positive");
    HalfspaceProjector qp(r);
    const double scale = tolerance_scale(r);
    for (const auto& c : seed_cuts) qp.add(certificate_representer(c, spec), c, 0);
    qp.evict_to(options.max_cuts);
    qp.solve(scale, 0);

    ProjectionResult result{qp.point(), 0.0, false, 0, 0.0, {}};
    int tightenings = 0;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        result.iterations = iter;
        const CurvatureTensor& x = result.point;
        std::vector<FrameCertificate> warm = qp.recent_active(kWarmCuts);
        SearchBudget inner = options.inner;
        inner.seed = derive_seed(options.inner.seed, static_cast<std::uint64_t>(iter));
        MarginReport rep = membership_margin(x, spec, inner, warm);
        if (rep.margin >= -options.tol) {
            SearchBudget verify = options.verify;
            verify.seed = derive_seed(options.verify.seed, static_cast<std::uint64_t>(iter));
            for (std::size_t i = 0; i < rep.local_minima.size() && i < 4; ++i) warm.push_back(rep.local_minima[i]);
            rep = membership_margin(x, spec, verify, warm);
            if (rep.margin >= -options.tol) {
                result.converged = true;
                result.final_margin = rep.margin;
                break;
            }
        }
        result.final_margin = rep.margin;
        const double cut_level = -options.tol * tolerance_scale(x);
        int added = 0;
        for (const auto& c : rep.local_minima) {
            if (added >= kCutsPerRound || c.value >= cut_level) break;
            if (qp.add(certificate_representer(c, spec), c, iter)) ++added;
        }
        // Near the cone the iterate can stay a roundoff-level distance outside:
        // either every violated certificate is already a cut (or nearly parallel
        // to one), or each round adds a slightly different cut. Moving all cuts
        // inward past the violation ends both.
        if (added == 0 || rep.margin >= -kTightenBand * options.tol) {
            double worst = 0.0;
            for (const auto& c : rep.local_minima) {
                if (c.value >= cut_level) break;
                const CurvatureTensor g = certificate_representer(c, spec);
                worst = std::max(worst, -curvcone::inner(g, x) / norm(g));
            }
            const double next = qp.shift() + 2.0 * worst;
            if (worst > 0.0 && tightenings < kMaxTightenings && next <= kMaxShift * scale) {
                ++tightenings;
                qp.tighten(next);
            } else if (added == 0) {
                break;
            }
        }
        qp.evict_to(options.max_cuts);
        qp.solve(scale, iter);
        result.point = qp.point();
    }
    result.distance = norm(r - result.point);
    result.active = qp.active();
    return result;
}

double distance(const CurvatureTensor& r, const ConeSpec& spec, const ProjectionOptions& options) {
    const auto p = project(r, spec, options);
    if (!p.converged) throw Error(ErrorCode::budget_exhausted, "projection onto " + spec.label() + " did not converge");
    return p.distance;
}

CurvatureTensor xi(const CurvatureTensor& r, const ConeSpec& spec, const ProjectionOptions& options) {
    const auto p = project(r, spec, options);
    if (!p.converged) throw Error(ErrorCode::budget_exhausted, "projection onto " + spec.label() + " did not converge");
    if (p.distance <= options.tol * tolerance_scale(r)) {
        throw Error(ErrorCode::invalid_argument, "xi is undefined for members of " + spec.label());
    }
    return (1.0 / p.distance) * (r - p.point);
}

MemberSample sample_member(const ConeSpec& spec, std::uint64_t seed, const ProjectionOptions& options) {
    validate(spec);
    MemberSample out{CurvatureTensor(spec.n), 0, ProjectionResult{CurvatureTensor(spec.n), 0.0, false, 0, 0.0, {}}};
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        Rng rng = make_rng(seed, attempt);
        const CurvatureTensor g = gaussian_tensor(spec.n, rng);
        ProjectionOptions opt = options;
        opt.inner.seed = derive_seed(seed, 0x1000 + attempt);
        opt.verify.seed = derive_seed(seed, 0x2000 + attempt);
        auto p = project(g, spec, opt);
        if (!p.converged || norm(p.point) < 1e-6) {
            ++out.discarded;
            continue;
        }
        out.tensor = p.point;
        out.projection = std::move(p);
        return out;
    }
    throw Error(ErrorCode::budget_exhausted, "no nonzero member of " + spec.label() + " found in 1000 attempts");
}

}  // namespace curvcone
