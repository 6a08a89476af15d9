#include "curvcone/cone.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "curvcone/error.hpp"
#include "frame_detail.hpp"
#include "frame_search.hpp"

namespace curvcone {
namespace {

detail::FrameForm form_of(const ConeSpec& spec) {
    switch (spec.family) {
        case ConeFamily::pic1:
            return {true, 0.0};
        case ConeFamily::pic2:
        case ConeFamily::hat:
            return {false, 0.0};
        case ConeFamily::check:
        case ConeFamily::tilde:
            return {false, 1.0 / spec.s};
        case ConeFamily::ricci:
            break;
    }
    throw Error(ErrorCode::invalid_argument, "the ric family has no frame functional");
}

void require_dim(const CurvatureTensor& r, const ConeSpec& spec) {
    if (r.dim() != spec.n) {
        throw Error(ErrorCode::dimension, "tensor dimension " + std::to_string(r.dim()) + " does not match cone dimension " +
                                              std::to_string(spec.n));
    }
}

void check_certificate(const FrameCertificate& cert, int n) {
    if (cert.frame.rows() != n || cert.frame.cols() < 1) {
        throw Error(ErrorCode::invalid_argument, "certificate frame has the wrong shape");
    }
    if (cert.kind == CertificateKind::frame && cert.frame.cols() != frame_width(n)) {
        throw Error(ErrorCode::invalid_argument, "certificate frame needs " + std::to_string(frame_width(n)) + " columns");
    }
    if (orthonormality_defect(cert.frame) > 1e-12) {
        throw Error(ErrorCode::not_orthogonal, "certificate frame is not orthonormal");
    }
    if (!(cert.lambda >= 0.0 && cert.lambda <= 1.0 && cert.mu >= 0.0 && cert.mu <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "certificate weights must lie in [0,1]");
    }
}

// Components of the frame functional through the public evaluation routine.
detail::Components components(const CurvatureTensor& r, const Eigen::MatrixXd& f) {
    detail::Components c;
    c.a = evaluate(r, f.col(0), f.col(2), f.col(0), f.col(2));
    c.c = evaluate(r, f.col(1), f.col(2), f.col(1), f.col(2));
    if (f.cols() >= 4) {
        c.b = evaluate(r, f.col(0), f.col(3), f.col(0), f.col(3));
        c.d = evaluate(r, f.col(1), f.col(3), f.col(1), f.col(3));
        c.e = evaluate(r, f.col(0), f.col(1), f.col(2), f.col(3));
    }
    return c;
}

double ricci_direction_value(const CurvatureTensor& r, const Eigen::VectorXd& x, double p) {
    const int n = r.dim();
    return x.dot(ricci(r).matrix() * x) - p / n * scal(r) * x.squaredNorm();
}

// Functional of a frame certificate on a tensor that is already in the
// coordinates where the cone is defined by frames (the preimage for hatc / tildec).
double raw_value(const CurvatureTensor& s, const FrameCertificate& cert, const ConeSpec& spec) {
    if (cert.kind == CertificateKind::ricci_direction) return ricci_direction_value(s, cert.frame.col(0), spec.ricci_pinch());
    const auto form = form_of(spec);
    const double lambda = cert.frame.cols() < 4 ? 0.0 : cert.lambda;
    return detail::weighted_value(components(s, cert.frame), form, form.scal_weight != 0.0 ? scal(s) : 0.0, lambda,
                                  cert.mu);
}

CurvatureTensor preimage(const CurvatureTensor& r, const ConeSpec& spec) {
    return spec.uses_preimage() ? ell_ab_inverse(r, spec.ell()) : r;
}

FrameCertificate ricci_certificate(const CurvatureTensor& s, double p) {
    const int n = s.dim();
    Eigen::MatrixXd m = ricci(s).matrix();
    m.diagonal().array() -= p / n * scal(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    FrameCertificate cert;
    cert.kind = CertificateKind::ricci_direction;
    cert.frame = detail::complete_basis(eig.eigenvectors().col(0), frame_width(n));
    cert.lambda = 0.0;
    cert.mu = 0.0;
    cert.value = eig.eigenvalues()[0];
    return cert;
}

double parse_double(std::string_view text, std::string_view what) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw Error(ErrorCode::parse, "cannot parse " + std::string(what) + " value '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string ConeSpec::label() const {
    switch (family) {
        case ConeFamily::pic1:
            return "pic1";
        case ConeFamily::pic2:
            return "pic2";
        case ConeFamily::check:
            return "checkc:s=" + format_number(s);
        case ConeFamily::hat:
            return "hatc:s=" + format_number(s);
        case ConeFamily::tilde:
            return "tildec:b=" + format_number(b) + ",s=" + format_number(s);
        case ConeFamily::ricci:
            return "ric";
    }
    return "?";
}

EllParams ConeSpec::ell() const {
    if (family == ConeFamily::tilde) return {companion_a(n, b), b};
    if (family == ConeFamily::hat) {
        if (s <= 0.5) {
            const double two_a = (2.0 * s + (n - 2) * s * s) / (1.0 + (n - 2) * s * s);
            return {0.5 * two_a, s};
        }
        return {s, 0.5};
    }
    return {0.0, 0.0};
}

double ConeSpec::ricci_pinch() const {
    if (family != ConeFamily::hat) return 0.0;
    if (s <= 0.5) return 1.0 - 1.0 / (1.0 + (n - 2) * s * s);
    return 1.0 - 4.0 / (n - 2 + 8.0 * s);
}

void validate(const ConeSpec& spec) {
    check_dimension(spec.n);
    const bool needs_s = spec.family == ConeFamily::check || spec.family == ConeFamily::hat ||
                         spec.family == ConeFamily::tilde;
    if (needs_s && !(spec.s > 0.0 && std::isfinite(spec.s))) {
        throw Error(ErrorCode::invalid_argument, spec.label() + ": s must be positive and finite");
    }
    if (spec.uses_preimage() && spec.n < 4) {
        throw Error(ErrorCode::invalid_argument, spec.label() + ": requires n >= 4");
    }
    if (spec.family == ConeFamily::tilde && !(spec.b > 0.0 && spec.b < upsilon(spec.n))) {
        throw Error(ErrorCode::invalid_argument, spec.label() + ": b must lie in (0, " + format_number(upsilon(spec.n)) + ")");
    }
}

ConeSpec parse_cone(std::string_view text, int n) {
    ConeSpec spec;
    spec.n = n;
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const std::string_view params = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    bool have_s = false, have_b = false;
    std::size_t pos = 0;
    while (pos < params.size()) {
        const auto comma = params.find(',', pos);
        const std::string_view item = params.substr(pos, comma == std::string_view::npos ? params.npos : comma - pos);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorCode::parse, "expected key=value in '" + std::string(text) + "'");
        const auto key = item.substr(0, eq);
        const double v = parse_double(item.substr(eq + 1), key);
        if (key == "s") {
            spec.s = v;
            have_s = true;
        } else if (key == "b") {
            spec.b = v;
            have_b = true;
        } else {
            throw Error(ErrorCode::parse, "unknown cone parameter '" + std::string(key) + "'");
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (name == "pic1" || name == "pic2" || name == "ric") {
        spec.family = name == "pic1" ? ConeFamily::pic1 : name == "pic2" ? ConeFamily::pic2 : ConeFamily::ricci;
        if (have_s || have_b) throw Error(ErrorCode::parse, std::string(name) + " takes no parameters");
    } else if (name == "checkc" || name == "hatc") {
        spec.family = name == "checkc" ? ConeFamily::check : ConeFamily::hat;
        if (!have_s || have_b) throw Error(ErrorCode::parse, std::string(name) + " needs exactly s=<value>");
    } else if (name == "tildec") {
        spec.family = ConeFamily::tilde;
        if (!have_s || !have_b) throw Error(ErrorCode::parse, "tildec needs b=<value>,s=<value>");
    } else {
        throw Error(ErrorCode::parse, "unknown cone '" + std::string(name) + "'");
    }
    validate(spec);
    return spec;
}

double frame_functional(const CurvatureTensor& r, const FrameCertificate& cert, const ConeSpec& spec) {
    if (spec.uses_preimage()) {
        throw Error(ErrorCode::invalid_argument, spec.label() + " is defined through a preimage; use certificate_value");
    }
    require_dim(r, spec);
    check_certificate(cert, r.dim());
    if (spec.family == ConeFamily::ricci && cert.kind != CertificateKind::ricci_direction) {
        throw Error(ErrorCode::invalid_argument, "ric expects a ricci_direction certificate");
    }
    return raw_value(r, cert, spec);
}

double certificate_value(const CurvatureTensor& r, const FrameCertificate& cert, const ConeSpec& spec) {
    require_dim(r, spec);
    check_certificate(cert, r.dim());
    return raw_value(preimage(r, spec), cert, spec);
}

CurvatureTensor certificate_representer(const FrameCertificate& cert, const ConeSpec& spec) {
    const int n = spec.n;
    check_certificate(cert, n);
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<double> raw(nn * nn, 0.0);
    const Eigen::MatrixXd& f = cert.frame;
    // raw += w * (x (x) y (x) z (x) u), whose pairing with R is w R(x, y, z, u)
    auto add = [&](double w, const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& u) {
        if (w == 0.0) return;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double xy = w * x[i] * y[j];
                if (xy == 0.0) continue;
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) raw[(i * n + j) * nn + k * n + l] += xy * z[k] * u[l];
            }
    };
    double scal_weight = 0.0;
    if (cert.kind == CertificateKind::ricci_direction) {
        const Eigen::VectorXd x = f.col(0);
        for (int j = 0; j < n; ++j) {
            const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
            add(1.0, x, e, x, e);
        }
        scal_weight = -spec.ricci_pinch() / n * x.squaredNorm();
    } else {
        const auto form = form_of(spec);
        const double lambda = f.cols() < 4 ? 0.0 : cert.lambda;
        const double mu = form.mu_one ? 1.0 : cert.mu;
        const double l2 = lambda * lambda, m2 = mu * mu;
        add(1.0, f.col(0), f.col(2), f.col(0), f.col(2));
        add(m2, f.col(1), f.col(2), f.col(1), f.col(2));
        if (f.cols() >= 4) {
            add(l2, f.col(0), f.col(3), f.col(0), f.col(3));
            add(l2 * m2, f.col(1), f.col(3), f.col(1), f.col(3));
            add(-2.0 * lambda * mu, f.col(0), f.col(1), f.col(2), f.col(3));
        }
        if (!form.mu_one) scal_weight = form.scal_weight * (1.0 - l2) * (1.0 - m2);
    }
    CurvatureTensor g = canonical_project(raw, n);
    // scal(R) = <I, R> / 2
    if (scal_weight != 0.0) g.add_scaled(0.5 * scal_weight, identity_tensor(n));
    if (spec.uses_preimage()) g = ell_ab_inverse(g, spec.ell());  // the inverse is self-adjoint
    return g;
}

MarginReport membership_margin(const CurvatureTensor& r, const ConeSpec& spec, const SearchBudget& budget,
                               std::span<const FrameCertificate> warm_starts) {
    validate(spec);
    require_dim(r, spec);
    if (budget.frames < 0 || budget.descents < 0) throw Error(ErrorCode::invalid_argument, "negative search budget");
    const CurvatureTensor s = preimage(r, spec);
    const double scale = tolerance_scale(r);
    MarginReport report;

    if (spec.family == ConeFamily::ricci) {
        report.certificate = ricci_certificate(s, 0.0);
        report.local_minima.push_back(report.certificate);
    } else {
        const auto found = detail::search_frames(s, form_of(spec), budget, warm_starts);
        report.budget_used = found.used;
        report.local_minima = found.minima;
        report.certificate = found.best;
        if (spec.family == ConeFamily::hat) report.local_minima.push_back(ricci_certificate(s, spec.ricci_pinch()));
    }
    // certificate values through the canonical evaluation path
    for (auto& c : report.local_minima) c.value = raw_value(s, c, spec);
    std::stable_sort(report.local_minima.begin(), report.local_minima.end(),
                     [](const FrameCertificate& x, const FrameCertificate& y) { return x.value < y.value; });
    report.certificate = report.local_minima.front();
    report.margin = report.certificate.value / scale;
    report.sound_violation = report.margin < 0.0;
    return report;
}

CurvatureTensor pinch_shift(const CurvatureTensor& r, double eps, ShiftSign sign) {
    CurvatureTensor out = r;
    const double c = (sign == ShiftSign::minus ? -eps : eps) * scal(r);
    if (c != 0.0) out.add_scaled(c, identity_tensor(r.dim()));
    return out;
}

}  // namespace curvcone
