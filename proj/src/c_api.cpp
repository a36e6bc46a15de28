#include "pdeopt/pdeopt.h"

#include "pdeopt/error.hpp"
#include "pdeopt/harness.hpp"
#include "pdeopt/loss.hpp"
#include "pdeopt/optimizer.hpp"
#include "pdeopt/reference.hpp"
#include "pdeopt/validation.hpp"
#include "pdeopt/warmstart.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <new>
#include <string>

struct pdeopt_problem {
    pdeopt::ProblemSpec spec;
};

struct pdeopt_field {
    pdeopt::Field field;
};

struct pdeopt_result {
    pdeopt::SolveResult result;
    nlohmann::json extra = nlohmann::json::object();
};

namespace {

thread_local std::string last_error;

pdeopt_status status_of(pdeopt::ErrorCode c)
{
    using pdeopt::ErrorCode;
    switch (c) {
    case ErrorCode::InvalidArgument: return PDEOPT_INVALID_ARGUMENT;
    case ErrorCode::GridTooSmall: return PDEOPT_GRID_TOO_SMALL;
    case ErrorCode::ShapeMismatch: return PDEOPT_SHAPE_MISMATCH;
    case ErrorCode::NonFinite: return PDEOPT_NON_FINITE;
    case ErrorCode::LineSearchFailure: return PDEOPT_LINE_SEARCH_FAILURE;
    case ErrorCode::SingularSystem: return PDEOPT_SINGULAR_SYSTEM;
    case ErrorCode::OracleRejected: return PDEOPT_ORACLE_REJECTED;
    case ErrorCode::Io: return PDEOPT_IO;
    }
    return PDEOPT_INTERNAL;
}

template <typename F>
pdeopt_status guard(F&& body)
{
    try {
        last_error.clear();
        body();
        return PDEOPT_OK;
    }
    catch (const pdeopt::Error& e) {
        last_error = e.what();
        return status_of(e.code());
    }
    catch (const nlohmann::json::exception& e) {
        last_error = std::string("invalid JSON: ") + e.what();
        return PDEOPT_INVALID_ARGUMENT;
    }
    catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return PDEOPT_INTERNAL;
    }
    catch (const std::exception& e) {
        last_error = e.what();
        return PDEOPT_INTERNAL;
    }
    catch (...) {
        last_error = "unknown error";
        return PDEOPT_INTERNAL;
    }
}

void need(const void* p, const char* what)
{
    pdeopt::require(p != nullptr, pdeopt::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

nlohmann::json parse(const char* text, const char* what)
{
    need(text, what);
    try {
        return nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e) {
        pdeopt::fail(pdeopt::ErrorCode::InvalidArgument, std::string("cannot parse ") + what + ": " + e.what());
    }
}

char* dup(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

pdeopt::SchemePolicy policy_of(pdeopt_scheme s)
{
    pdeopt::SchemePolicy p{s.interior_order, s.boundary_order};
    p.validate();
    return p;
}

} // namespace

extern "C" {

const char* pdeopt_version(void) { return "0.1.0"; }

const char* pdeopt_last_error(void) { return last_error.c_str(); }

const char* pdeopt_status_name(pdeopt_status s)
{
    switch (s) {
    case PDEOPT_OK: return "ok";
    case PDEOPT_INVALID_ARGUMENT: return "invalid_argument";
    case PDEOPT_GRID_TOO_SMALL: return "grid_too_small";
    case PDEOPT_SHAPE_MISMATCH: return "shape_mismatch";
    case PDEOPT_NON_FINITE: return "non_finite";
    case PDEOPT_LINE_SEARCH_FAILURE: return "line_search_failure";
    case PDEOPT_SINGULAR_SYSTEM: return "singular_system";
    case PDEOPT_ORACLE_REJECTED: return "oracle_rejected";
    case PDEOPT_IO: return "io";
    case PDEOPT_INTERNAL: return "internal";
    }
    return "unknown";
}

void pdeopt_string_free(char* s) { std::free(s); }

pdeopt_status pdeopt_problem_builtin(const char* name, size_t n_x, size_t n_t, double lambda, pdeopt_problem** out)
{
    return guard([&] {
        need(name, "name");
        need(out, "out");
        *out = new pdeopt_problem{pdeopt::builtin_problem(name, n_x, n_t, lambda)};
    });
}

pdeopt_status pdeopt_problem_from_json(const char* json, pdeopt_problem** out)
{
    return guard([&] {
        need(out, "out");
        *out = new pdeopt_problem{pdeopt::problem_from_json(parse(json, "problem JSON"))};
    });
}

pdeopt_status pdeopt_problem_to_json(const pdeopt_problem* p, char** out)
{
    return guard([&] {
        need(p, "problem");
        need(out, "out");
        *out = dup(pdeopt::to_json(p->spec).dump(2));
    });
}

pdeopt_status pdeopt_problem_resized(const pdeopt_problem* p, size_t n_x, size_t n_t, pdeopt_problem** out)
{
    return guard([&] {
        need(p, "problem");
        need(out, "out");
        *out = new pdeopt_problem{p->spec.with_resolution(n_x, n_t)};
    });
}

pdeopt_status pdeopt_problem_set_lambda(pdeopt_problem* p, double lambda)
{
    return guard([&] {
        need(p, "problem");
        pdeopt::require(std::isfinite(lambda) && lambda > 0.0, pdeopt::ErrorCode::InvalidArgument, "lambda must be positive");
        p->spec.lambda = lambda;
    });
}

pdeopt_status pdeopt_problem_grid(const pdeopt_problem* p, size_t* n_x, size_t* n_t)
{
    return guard([&] {
        need(p, "problem");
        if (n_x) *n_x = p->spec.grid.n_x();
        if (n_t) *n_t = p->spec.grid.n_t();
    });
}

void pdeopt_problem_free(pdeopt_problem* p) { delete p; }

pdeopt_status pdeopt_field_random(const pdeopt_problem* p, uint64_t seed, pdeopt_field** out)
{
    return guard([&] {
        need(p, "problem");
        need(out, "out");
        *out = new pdeopt_field{pdeopt::random_field(p->spec.grid, seed)};
    });
}

pdeopt_status pdeopt_field_from_values(const pdeopt_problem* p, const double* values, size_t count, pdeopt_field** out)
{
    return guard([&] {
        need(p, "problem");
        need(values, "values");
        need(out, "out");
        *out = new pdeopt_field{pdeopt::Field(p->spec.grid, std::vector<double>(values, values + count))};
    });
}

pdeopt_status pdeopt_field_reference(const pdeopt_problem* p, pdeopt_field** out)
{
    return guard([&] {
        need(p, "problem");
        need(out, "out");
        auto ref = pdeopt::reference_field(p->spec);
        pdeopt::require(ref.has_value(), pdeopt::ErrorCode::InvalidArgument, "problem '" + p->spec.name + "' has no reference");
        *out = new pdeopt_field{std::move(*ref)};
    });
}

pdeopt_status pdeopt_field_values(const pdeopt_field* f, const double** values, size_t* n_x, size_t* n_t)
{
    return guard([&] {
        need(f, "field");
        if (values) *values = f->field.values().data();
        if (n_x) *n_x = f->field.grid().n_x();
        if (n_t) *n_t = f->field.grid().n_t();
    });
}

pdeopt_status pdeopt_field_mae(const pdeopt_field* a, const pdeopt_field* b, double* out)
{
    return guard([&] {
        need(a, "a");
        need(b, "b");
        need(out, "out");
        *out = pdeopt::mae(a->field, b->field);
    });
}

pdeopt_status pdeopt_field_interpolate(const pdeopt_field* coarse, const pdeopt_problem* fine, const char* method, double smooth,
                                       pdeopt_field** out)
{
    return guard([&] {
        need(coarse, "coarse");
        need(fine, "fine");
        need(method, "method");
        need(out, "out");
        *out = new pdeopt_field{
            pdeopt::interpolate(coarse->field, fine->spec.grid, pdeopt::parse_interp_method(method), smooth)};
    });
}

pdeopt_status pdeopt_field_write_csv(const pdeopt_field* f, const char* path)
{
    return guard([&] {
        need(f, "field");
        if (!path || std::string(path) == "-") {
            pdeopt::write_csv(std::cout, f->field);
            std::cout.flush();
            return;
        }
        std::ofstream os(path);
        pdeopt::require(os.good(), pdeopt::ErrorCode::Io, std::string("cannot write ") + path);
        pdeopt::write_csv(os, f->field);
        pdeopt::require(os.good(), pdeopt::ErrorCode::Io, std::string("write failed: ") + path);
    });
}

void pdeopt_field_free(pdeopt_field* f) { delete f; }

pdeopt_status pdeopt_loss(const pdeopt_problem* p, const pdeopt_field* f, pdeopt_scheme scheme, double* interior, double* boundary,
                          double* total)
{
    return guard([&] {
        need(p, "problem");
        need(f, "field");
        const auto l = pdeopt::loss(p->spec, f->field, policy_of(scheme));
        if (interior) *interior = l.interior;
        if (boundary) *boundary = l.boundary;
        if (total) *total = l.total;
    });
}

pdeopt_status pdeopt_gradient(const pdeopt_problem* p, const pdeopt_field* f, pdeopt_scheme scheme, double* grad, size_t count)
{
    return guard([&] {
        need(p, "problem");
        need(f, "field");
        need(grad, "grad");
        pdeopt::require(count == f->field.size(), pdeopt::ErrorCode::ShapeMismatch, "gradient buffer has wrong size");
        const auto g = pdeopt::gradient(p->spec, f->field, policy_of(scheme));
        std::copy(g.values().begin(), g.values().end(), grad);
    });
}

pdeopt_status pdeopt_solve(const pdeopt_problem* p, const pdeopt_field* init, pdeopt_scheme scheme, const char* optimizer_json,
                           pdeopt_result** out)
{
    return guard([&] {
        need(p, "problem");
        need(init, "init");
        need(out, "out");
        const pdeopt::OptimizerConfig cfg =
            optimizer_json ? pdeopt::optimizer_config_from_json(parse(optimizer_json, "optimizer JSON")) : pdeopt::OptimizerConfig{};
        auto res = pdeopt::minimize(p->spec, init->field, policy_of(scheme), cfg, pdeopt::reference_field(p->spec));
        *out = new pdeopt_result{std::move(res)};
    });
}

pdeopt_status pdeopt_solve_request(const char* request_json, pdeopt_result** out)
{
    return guard([&] {
        need(out, "out");
        const auto req = pdeopt::solve_request_from_json(parse(request_json, "solve request"));
        auto levels = pdeopt::run_solve_request(req);
        nlohmann::json extra = {{"problem", req.problem.name},
                                {"scheme", {req.policy.interior_order, req.policy.boundary_order}},
                                {"init", pdeopt::to_string(req.init)},
                                {"seed", req.seed},
                                {"lambda", req.problem.lambda},
                                {"optimizer", pdeopt::to_json(req.optimizer)}};
        if (req.init != pdeopt::InitKind::Random) extra["levels"] = pdeopt::to_json(levels);
        *out = new pdeopt_result{std::move(levels.back().result), std::move(extra)};
    });
}

pdeopt_status pdeopt_result_json(const pdeopt_result* r, int include_field, char** out)
{
    return guard([&] {
        need(r, "result");
        need(out, "out");
        auto j = pdeopt::to_json(r->result, include_field != 0);
        for (const auto& [k, v] : r->extra.items()) j[k] = v;
        *out = dup(j.dump(2));
    });
}

pdeopt_status pdeopt_result_field(const pdeopt_result* r, pdeopt_field** out)
{
    return guard([&] {
        need(r, "result");
        need(out, "out");
        *out = new pdeopt_field{r->result.field};
    });
}

pdeopt_status pdeopt_result_summary(const pdeopt_result* r, long* iterations, pdeopt_convergence* converged, double* mae,
                                    double* total_loss, double* wall_time)
{
    return guard([&] {
        need(r, "result");
        const auto& s = r->result;
        if (iterations) *iterations = s.iterations;
        if (converged) *converged = static_cast<pdeopt_convergence>(s.converged);
        if (mae) *mae = s.mae_vs_reference.value_or(std::numeric_limits<double>::quiet_NaN());
        if (total_loss) *total_loss = s.final_loss.total;
        if (wall_time) *wall_time = s.wall_time;
    });
}

void pdeopt_result_free(pdeopt_result* r) { delete r; }

pdeopt_status pdeopt_experiment_run(const char* spec_json, const char* output_path, char** summary_json)
{
    return guard([&] {
        auto spec = pdeopt::experiment_from_json(parse(spec_json, "experiment JSON"));
        if (output_path) spec.output = output_path;
        const auto res = pdeopt::run_experiment(spec);
        if (summary_json) *summary_json = dup(res.summary.dump(2));
    });
}

pdeopt_status pdeopt_validate(const char* options_json, char** report_json, int* all_passed)
{
    return guard([&] {
        pdeopt::ValidationOptions o;
        if (options_json) {
            const auto j = parse(options_json, "validation options");
            o.gradient_cases = j.value("gradient_cases", o.gradient_cases);
            o.seed = j.value("seed", o.seed);
            o.gradient_tol = j.value("gradient_tol", o.gradient_tol);
            if (j.contains("heat_sizes")) o.heat_sizes = j["heat_sizes"].get<std::vector<std::size_t>>();
        }
        const auto checks = pdeopt::run_validation(o);
        bool ok = true;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks) {
            ok = ok && c.passed;
            arr.push_back(pdeopt::to_json(c));
        }
        if (all_passed) *all_passed = ok ? 1 : 0;
        if (report_json) *report_json = dup(nlohmann::json{{"passed", ok}, {"checks", arr}}.dump(2));
    });
}

} // extern "C"
