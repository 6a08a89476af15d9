// curvcone: generate, check, project, flow, scan and verify from the command line.
//
// Exit codes: 0 success (including a sound non-membership decision),
// 1 verification failure, 2 invalid input, 3 budget exhausted without a decision.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "curvcone/acceptance.hpp"
#include "curvcone/cone.hpp"
#include "curvcone/error.hpp"
#include "curvcone/io.hpp"
#include "curvcone/ode.hpp"
#include "curvcone/random.hpp"
#include "curvcone/scans.hpp"

namespace {

using curvcone::io::json;

constexpr int kExitVerify = 1;
constexpr int kExitInput = 2;
constexpr int kExitUndecided = 3;

struct Common {
    std::string cone = "pic2";
    int budget = 20000;
    double tol = 1e-9;
    std::uint64_t seed = 1;
    int workers = 1;
    bool repair = false;
    std::string output;
};

curvcone::SearchBudget search_budget(const Common& c, std::uint64_t stream = 0) {
    curvcone::SearchBudget b;
    b.frames = c.budget;
    b.descents = std::max(1, c.budget / 400);
    b.seed = curvcone::derive_seed(c.seed, stream);
    b.workers = c.workers;
    return b;
}

curvcone::ProjectionOptions projection_options(const Common& c) {
    curvcone::ProjectionOptions p;
    p.tol = c.tol;
    p.inner.seed = curvcone::derive_seed(c.seed, 11);
    p.verify = search_budget(c, 12);
    p.inner.workers = c.workers;
    return p;
}

json common_config(const Common& c, const std::string& command) {
    return {{"command", command}, {"cone", c.cone},       {"budget", c.budget}, {"tol", c.tol},
            {"seed", c.seed},     {"workers", c.workers}, {"repair", c.repair}};
}

void emit(const Common& c, const std::string& text) {
    if (c.output.empty() || c.output == "-") {
        std::cout << text << std::flush;
    } else {
        curvcone::io::write_text_file(c.output, text);
    }
}

curvcone::io::ParsedTensor load_tensor(const std::string& path, const Common& c) {
    auto parsed = curvcone::io::tensor_from_json(curvcone::io::read_json_file(path), c.repair);
    if (parsed.repair > 1e-9) std::cerr << "repaired symmetries (relative change " << parsed.repair << ")\n";
    return parsed;
}

// ---------------------------------------------------------------------------

struct GenArgs {
    int n = 4;
    std::string kind = "gaussian";
    double scale = 1.0;
    bool project = false;
};

int run_gen(const Common& c, const GenArgs& a) {
    using namespace curvcone;
    check_dimension(a.n);
    CurvatureTensor r(a.n);
    if (a.kind == "identity") {
        r = identity_tensor(a.n);
    } else if (a.kind == "gaussian") {
        Rng rng = make_rng(c.seed);
        r = gaussian_tensor(a.n, rng);
    } else if (a.kind == "member") {
        r = sample_member(parse_cone(c.cone, a.n), c.seed, projection_options(c)).tensor;
    }
    r = a.scale * r;
    json doc = io::tensor_to_json(r);
    json config = common_config(c, "gen");
    config["n"] = a.n;
    config["kind"] = a.kind;
    config["scale"] = a.scale;
    config["project"] = a.project;
    if (a.project) {
        const auto p = project(r, parse_cone(c.cone, a.n), projection_options(c));
        if (!p.converged) {
            std::cerr << "projection did not converge\n";
            return kExitUndecided;
        }
        doc = io::tensor_to_json(p.point);
    }
    doc["config"] = config;
    emit(c, io::dump(doc));
    return 0;
}

int run_check(const Common& c, const std::string& input) {
    using namespace curvcone;
    const auto parsed = load_tensor(input, c);
    const auto spec = parse_cone(c.cone, parsed.tensor.dim());
    const auto rep = membership_margin(parsed.tensor, spec, search_budget(c));
    json config = common_config(c, "check");
    config["input"] = input;
    json doc;
    doc["config"] = config;
    doc["cone"] = spec.label();
    doc["repair"] = parsed.repair;
    doc["report"] = io::margin_to_json(rep);
    std::string decision = "member";
    int code = 0;
    if (rep.sound_violation) {
        decision = "not a member";
    } else if (rep.margin < c.tol) {
        decision = "undecided";
        code = kExitUndecided;
    }
    doc["decision"] = decision;
    emit(c, io::dump(doc));
    return code;
}

int run_project(const Common& c, const std::string& input) {
    using namespace curvcone;
    const auto parsed = load_tensor(input, c);
    const auto spec = parse_cone(c.cone, parsed.tensor.dim());
    const auto p = project(parsed.tensor, spec, projection_options(c));
    json config = common_config(c, "project");
    config["input"] = input;
    json doc;
    doc["config"] = config;
    doc["cone"] = spec.label();
    doc["converged"] = p.converged;
    doc["distance"] = p.distance;
    doc["iterations"] = p.iterations;
    doc["final_margin"] = p.final_margin;
    doc["point"] = io::tensor_to_json(p.point);
    doc["active"] = json::array();
    for (const auto& cert : p.active) doc["active"].push_back(io::certificate_to_json(cert));
    emit(c, io::dump(doc));
    return p.converged ? 0 : kExitUndecided;
}

struct FlowArgs {
    double t_end = 1.0;
    std::vector<std::string> monitors;
    double rel_tol = 1e-10;
    double stop_norm = 0.0;
};

int run_flow(const Common& c, const std::string& input, const FlowArgs& a) {
    using namespace curvcone;
    const auto parsed = load_tensor(input, c);
    const int n = parsed.tensor.dim();
    std::vector<ConeSpec> monitors;
    for (const auto& m : a.monitors) monitors.push_back(parse_cone(m, n));
    IntegratorControls controls;
    controls.rel_tol = a.rel_tol;
    controls.stop_norm = a.stop_norm;
    const auto traj = integrate(parsed.tensor, a.t_end, controls, monitors, monitor_budget(search_budget(c)));
    json config = common_config(c, "flow");
    config["input"] = input;
    config["t_end"] = a.t_end;
    config["rel_tol"] = a.rel_tol;
    config["stop_norm"] = a.stop_norm;
    config["monitors"] = a.monitors;
    config["blew_up"] = traj.blew_up;
    std::ostringstream csv;
    io::write_trajectory_csv(csv, traj, config);
    emit(c, csv.str());
    return 0;
}

struct ScanArgs {
    std::string kind;
    int n = 4;
    int samples = 50;
    double a = 0.2;
    double b = 0.1;
    std::string target = "pic2";
    double eps0 = 0.005;
    std::vector<double> times{0.02, 0.05, 0.1};
    int sections = 100;
};

int run_scan(const Common& c, const ScanArgs& a) {
    using namespace curvcone;
    ScanOptions opt;
    opt.projection = projection_options(c);
    opt.search = search_budget(c, 13);
    opt.workers = c.workers;
    json config = common_config(c, "scan");
    config["scan"] = a.kind;
    config["n"] = a.n;
    config["samples"] = a.samples;
    json result;
    if (a.kind == "delta") {
        const PinchTarget target = a.target == "ric" ? PinchTarget::ric : a.target == "pic1" ? PinchTarget::pic1 : PinchTarget::pic2;
        config["a"] = a.a;
        config["b"] = a.b;
        config["target"] = a.target;
        const auto d = estimate_delta(a.n, a.a, a.b, target, a.samples, c.seed, opt);
        result = {{"delta", d.delta},
                  {"analytic_floor", d.analytic_floor},
                  {"worst_margin_at_floor", d.worst_margin_at_floor},
                  {"used", d.used},
                  {"discarded", d.discarded},
                  {"per_sample", d.per_sample}};
    } else if (a.kind == "s0") {
        config["eps0"] = a.eps0;
        const auto s = find_s0(a.n, a.eps0, a.samples, c.seed, opt);
        result = {{"s0", s.s0},
                  {"b", s.b},
                  {"a", s.a},
                  {"candidate_s0", s.candidate_s0},
                  {"norm_constant", s.norm_constant},
                  {"worst_margin", s.worst_margin},
                  {"used", s.used},
                  {"discarded", s.discarded},
                  {"b_halvings", s.b_halvings},
                  {"required_weight", s.required_weight}};
    } else if (a.kind == "yokota") {
        config["times"] = a.times;
        YokotaOptions yo;
        yo.projection = opt.projection;
        yo.workers = c.workers;
        const auto rep = yokota_scan(parse_cone(c.cone, a.n), a.times, a.samples, c.seed, yo);
        result["rows"] = json::array();
        for (const auto& row : rep.rows) {
            result["rows"].push_back({{"t", row.t},
                                      {"drawn", row.drawn},
                                      {"qualifying", row.qualifying},
                                      {"unresolved", row.unresolved},
                                      {"mu_hat", row.mu_hat},
                                      {"min_t_scal", row.min_t_scal}});
        }
        result["lipschitz_hat"] = rep.lipschitz_hat;
        result["lipschitz_bound"] = YokotaReport::lipschitz_bound;
    } else if (a.kind == "norm") {
        const auto r = pic1_norm_constant(a.n, a.samples, c.seed, opt);
        result = {{"max_ratio", r.max_ratio}, {"mean_ratio", r.mean_ratio}, {"used", r.used}, {"discarded", r.discarded}};
    } else if (a.kind == "kalpha") {
        config["sections"] = a.sections;
        const auto fit = fit_kalpha_constant(a.n, a.samples, a.sections, c.seed, opt);
        result = {{"constant", fit.constant}, {"tensors", fit.tensors}, {"evaluations", fit.evaluations}};
    }
    json doc;
    doc["config"] = config;
    doc["result"] = result;
    emit(c, io::dump(doc));
    return 0;
}

int run_verify(const Common& c, const std::string& suite, const std::vector<int>& only, const std::vector<int>& expect_fail) {
    namespace acc = curvcone::acceptance;
    acc::Options opt;
    opt.suite = suite == "fast" ? acc::Suite::fast : acc::Suite::full;
    opt.seed = c.seed;
    opt.workers = c.workers;
    opt.only = only;
    const auto results = acc::run(opt, [](const acc::Result& r) { std::cout << acc::format(r) << "\n" << std::flush; });
    return acc::exit_status(results, expect_fail) == 0 ? 0 : kExitVerify;
}

int exit_code_for(const curvcone::Error& e) {
    switch (e.code()) {
        case curvcone::ErrorCode::budget_exhausted:
        case curvcone::ErrorCode::no_active_constraints:
        case curvcone::ErrorCode::step_underflow:
            return kExitUndecided;
        default:
            return kExitInput;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature cones: membership, projection, Hamilton ODE and pinching scans"};
    app.require_subcommand(1);
    // global options may also follow the subcommand
    app.fallthrough();
    Common c;
    c.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("CURVCONE_SEED")) {
        try {
            c.seed = std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "CURVCONE_SEED is not an unsigned integer\n";
            return kExitInput;
        }
    }
    app.add_option("--cone", c.cone, "cone, e.g. pic1, pic2, checkc:s=1, hatc:s=0.3, tildec:b=0.2,s=1, ric");
    app.add_option("--budget", c.budget, "random frames per membership call (descents = budget / 400)")
        ->check(CLI::PositiveNumber);
    app.add_option("--tol", c.tol, "projection tolerance and the undecided band of check")->check(CLI::PositiveNumber);
    app.add_option("--seed", c.seed, "seed (falls back to CURVCONE_SEED, then 1)");
    app.add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--repair", c.repair, "accept inputs that need symmetrization");
    app.add_option("-o,--output", c.output, "output file (default stdout)");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "write a tensor JSON");
    gen_cmd->add_option("-n,--dim", gen.n, "dimension")->check(CLI::Range(curvcone::kMinDim, curvcone::kMaxDim));
    gen_cmd->add_option("--kind", gen.kind, "identity, gaussian or member (of --cone)")
        ->check(CLI::IsMember({"identity", "gaussian", "member"}));
    gen_cmd->add_option("--scale", gen.scale, "multiply the tensor by this factor");
    gen_cmd->add_flag("--project", gen.project, "project the result into --cone");

    std::string input;
    auto* check_cmd = app.add_subcommand("check", "membership margin and certificate");
    check_cmd->add_option("input", input, "tensor JSON")->required();
    auto* project_cmd = app.add_subcommand("project", "projection onto the cone and the distance");
    project_cmd->add_option("input", input, "tensor JSON")->required();

    FlowArgs flow;
    auto* flow_cmd = app.add_subcommand("flow", "integrate dR/dt = Q(R) and write a trajectory CSV");
    flow_cmd->add_option("input", input, "tensor JSON")->required();
    flow_cmd->add_option("--t-end", flow.t_end, "final time")->check(CLI::NonNegativeNumber);
    flow_cmd->add_option("--monitor", flow.monitors, "cones whose margins are recorded (repeatable)");
    flow_cmd->add_option("--rel-tol", flow.rel_tol, "relative error tolerance")->check(CLI::PositiveNumber);
    flow_cmd->add_option("--stop-norm", flow.stop_norm, "blow-up guard (default 1e6 max(1, |R0|))");

    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "pinching-constant scans");
    scan_cmd->add_option("kind", scan.kind, "delta, s0, yokota, norm or kalpha")
        ->required()
        ->check(CLI::IsMember({"delta", "s0", "yokota", "norm", "kalpha"}));
    scan_cmd->add_option("-n,--dim", scan.n, "dimension")->check(CLI::Range(curvcone::kMinDim, curvcone::kMaxDim));
    scan_cmd->add_option("--samples", scan.samples, "samples (tensors for kalpha)")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--a", scan.a, "ell parameter a (delta)");
    scan_cmd->add_option("--b", scan.b, "ell parameter b (delta)");
    scan_cmd->add_option("--target", scan.target, "delta target cone")->check(CLI::IsMember({"ric", "pic1", "pic2"}));
    scan_cmd->add_option("--eps0", scan.eps0, "pinching of the samples (s0)");
    scan_cmd->add_option("--t", scan.times, "scan times (yokota)");
    scan_cmd->add_option("--sections", scan.sections, "sections per tensor (kalpha)")->check(CLI::PositiveNumber);

    std::string suite = "full";
    std::vector<int> only, expect_fail;
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
    verify_cmd->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    verify_cmd->add_option("--only", only, "criteria to run")->check(CLI::Range(1, curvcone::acceptance::kCriteria));
    verify_cmd->add_option("--expect-fail", expect_fail, "criteria whose failure does not fail the run")
        ->check(CLI::Range(1, curvcone::acceptance::kCriteria));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*gen_cmd) return run_gen(c, gen);
        if (*check_cmd) return run_check(c, input);
        if (*project_cmd) return run_project(c, input);
        if (*flow_cmd) return run_flow(c, input, flow);
        if (*scan_cmd) return run_scan(c, scan);
        if (*verify_cmd) return run_verify(c, suite, only, expect_fail);
    } catch (const curvcone::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
