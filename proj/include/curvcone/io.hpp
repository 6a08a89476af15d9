#pragma once

// File formats: tensors, sections and certificates as JSON, reports as JSON
// with the run configuration embedded, trajectories as CSV.
//
// Tensor:      {"n": 4, "format": "dense-rowmajor", "components": [n^4 numbers]}
// Section:     {"n": 4, "v_re": [...], "v_im": [...], "w_re": [...], "w_im": [...]}
// Certificate: {"frame": [[row], ...], "lambda": l, "mu": m, "value": v}
//
// Doubles are written in their shortest round-trip form, so parsing a written
// file gives back the same bits.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "curvcone/cone.hpp"
#include "curvcone/ode.hpp"
#include "curvcone/sections.hpp"

namespace curvcone::io {

using json = nlohmann::ordered_json;

json tensor_to_json(const CurvatureTensor& r);

struct ParsedTensor {
    CurvatureTensor tensor{kMinDim};
    // |canonical_project(raw) - raw| / max(1, |raw|); moves of at most 1e-12
    // are not applied and reported as 0
    double repair = 0.0;
};

// Inputs that canonical_project moves by more than 1e-9 (relative) are
// rejected with Error(parse) unless `repair` is set. Malformed documents throw
// Error(parse); a bad dimension throws Error(dimension).
ParsedTensor tensor_from_json(const json& j, bool repair = false);

json section_to_json(const ComplexSection& s);
ComplexSection section_from_json(const json& j);

json certificate_to_json(const FrameCertificate& c);
FrameCertificate certificate_from_json(const json& j);

json margin_to_json(const MarginReport& m);

// Parses text as JSON, mapping syntax errors to Error(parse).
json parse_json(const std::string& text);
json read_json_file(const std::string& path);
// Two-space indented dump with a trailing newline.
std::string dump(const json& j);
void write_text_file(const std::string& path, const std::string& text);

// Header `t,norm,scal,margin_<label>...`, one row per point. A comment line
// `# config: <json>` precedes the header when config is not null. Header
// fields containing commas or quotes are quoted.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const json& config = nullptr);

}  // namespace curvcone::io
