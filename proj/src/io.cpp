#include "curvcone/io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "curvcone/error.hpp"

namespace curvcone::io {
namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::parse, std::string("missing field \"") + key + "\"");
    return j.at(key);
}

double number(const json& j, const char* what) {
    if (!j.is_number()) throw Error(ErrorCode::parse, std::string(what) + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw Error(ErrorCode::parse, std::string(what) + " must be finite");
    return v;
}

int dimension(const json& j) {
    const json& n = field(j, "n");
    if (!n.is_number_integer()) throw Error(ErrorCode::parse, "\"n\" must be an integer");
    const int v = n.get<int>();
    check_dimension(v);
    return v;
}

std::vector<double> numbers(const json& j, const char* key, std::size_t expected) {
    const json& a = field(j, key);
    if (!a.is_array()) throw Error(ErrorCode::parse, std::string("\"") + key + "\" must be an array");
    if (a.size() != expected) {
        throw Error(ErrorCode::parse, std::string("\"") + key + "\" has " + std::to_string(a.size()) + " entries, expected " +
                                          std::to_string(expected));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& v : a) out.push_back(number(v, key));
    return out;
}

json real_array(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

json tensor_to_json(const CurvatureTensor& r) {
    json j;
    j["n"] = r.dim();
    j["format"] = "dense-rowmajor";
    j["components"] = json::array();
    for (double v : r.components()) j["components"].push_back(v);
    return j;
}

ParsedTensor tensor_from_json(const json& j, bool repair) {
    const int n = dimension(j);
    if (j.contains("format") && j.at("format") != "dense-rowmajor") {
        throw Error(ErrorCode::parse, "unsupported tensor format " + j.at("format").dump());
    }
    const std::size_t size = static_cast<std::size_t>(n) * n * n * n;
    const std::vector<double> raw = numbers(j, "components", size);
    ParsedTensor out;
    out.tensor = canonical_project(raw, n);
    double diff = 0.0, base = 0.0;
    const auto c = out.tensor.components();
    for (std::size_t i = 0; i < size; ++i) {
        diff += (c[i] - raw[i]) * (c[i] - raw[i]);
        base += raw[i] * raw[i];
    }
    out.repair = std::sqrt(diff) / std::max(1.0, std::sqrt(base));
    // roundoff-level moves are not applied, so written tensors read back bit for bit
    if (out.repair <= 1e-12) {
        out.tensor = CurvatureTensor::from_symmetric(n, raw);
        out.repair = 0.0;
        return out;
    }
    if (out.repair > 1e-9 && !repair) {
        std::ostringstream msg;
        msg << "components violate the curvature symmetries (relative repair " << out.repair
            << "); pass --repair to accept the symmetrized tensor";
        throw Error(ErrorCode::parse, msg.str());
    }
    return out;
}

json section_to_json(const ComplexSection& s) {
    json j;
    j["n"] = s.n;
    j["v_re"] = real_array(s.v.real());
    j["v_im"] = real_array(s.v.imag());
    j["w_re"] = real_array(s.w.real());
    j["w_im"] = real_array(s.w.imag());
    return j;
}

ComplexSection section_from_json(const json& j) {
    const int n = dimension(j);
    const auto n_ = static_cast<std::size_t>(n);
    const auto vr = numbers(j, "v_re", n_), vi = numbers(j, "v_im", n_);
    const auto wr = numbers(j, "w_re", n_), wi = numbers(j, "w_im", n_);
    ComplexSection s;
    s.n = n;
    s.v.resize(n);
    s.w.resize(n);
    for (int i = 0; i < n; ++i) {
        s.v[i] = {vr[i], vi[i]};
        s.w[i] = {wr[i], wi[i]};
    }
    validate(s);
    return s;
}

json certificate_to_json(const FrameCertificate& c) {
    json j;
    j["frame"] = json::array();
    for (Eigen::Index i = 0; i < c.frame.rows(); ++i) j["frame"].push_back(real_array(c.frame.row(i).transpose()));
    j["lambda"] = c.lambda;
    j["mu"] = c.mu;
    j["value"] = c.value;
    if (c.kind == CertificateKind::ricci_direction) j["kind"] = "ricci_direction";
    return j;
}

FrameCertificate certificate_from_json(const json& j) {
    FrameCertificate c;
    const json& rows = field(j, "frame");
    if (!rows.is_array() || rows.empty() || !rows.front().is_array() || rows.front().empty()) {
        throw Error(ErrorCode::parse, "\"frame\" must be a non-empty array of rows");
    }
    const auto cols = rows.front().size();
    c.frame.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != cols) throw Error(ErrorCode::parse, "ragged \"frame\" rows");
        for (std::size_t k = 0; k < cols; ++k)
            c.frame(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = number(rows[i][k], "frame entry");
    }
    c.lambda = number(field(j, "lambda"), "lambda");
    c.mu = number(field(j, "mu"), "mu");
    c.value = number(field(j, "value"), "value");
    if (j.contains("kind")) {
        if (j.at("kind") == "ricci_direction") {
            c.kind = CertificateKind::ricci_direction;
        } else if (j.at("kind") != "frame") {
            throw Error(ErrorCode::parse, "unknown certificate kind " + j.at("kind").dump());
        }
    }
    return c;
}

json margin_to_json(const MarginReport& m) {
    json j;
    j["margin"] = m.margin;
    j["member"] = !m.sound_violation;
    j["sound_violation"] = m.sound_violation;
    j["certificate"] = certificate_to_json(m.certificate);
    j["budget_used"] = {{"frames_sampled", m.budget_used.frames_sampled},
                        {"descents", m.budget_used.descents},
                        {"sweeps", m.budget_used.sweeps},
                        {"evaluations", m.budget_used.evaluations}};
    return j;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::parse, "cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_json(text.str());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::invalid_argument, "write failed for " + path);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const json& config) {
    if (!config.is_null()) out << "# config: " << config.dump() << "\n";
    out << "t,norm,scal";
    if (!traj.points.empty())
        for (const auto& m : traj.points.front().margins) out << ',' << csv_field("margin_" + m.cone.label());
    out << "\n";
    for (const auto& p : traj.points) {
        out << format_number(p.t) << ',' << format_number(p.norm) << ',' << format_number(p.scal);
        for (const auto& m : p.margins) out << ',' << format_number(m.margin);
        out << "\n";
    }
}

}  // namespace curvcone::io
