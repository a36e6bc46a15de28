#include "pdeopt/harness.hpp"

#include "pdeopt/error.hpp"
#include "pdeopt/reference.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace pdeopt {

using nlohmann::json;
using Resolution = std::pair<std::size_t, std::size_t>;

std::string to_string(InitKind k)
{
    switch (k) {
    case InitKind::Random: return "random";
    case InitKind::Multilinear: return "multilinear";
    case InitKind::Rbf: return "rbf";
    }
    return "?";
}

InitKind parse_init_kind(const std::string& s)
{
    if (s == "random") return InitKind::Random;
    if (s == "multilinear" || s == "interp" || s == "interpn" || s == "cascade") return InitKind::Multilinear;
    if (s == "rbf") return InitKind::Rbf;
    fail(ErrorCode::InvalidArgument, "unknown init '" + s + "' (expected random, interp, rbf or cascade)");
}

namespace {

bool strictly_below(Resolution a, Resolution b) { return a.first < b.first && a.second < b.second; }

std::string res_label(Resolution r) { return std::to_string(r.first) + "x" + std::to_string(r.second); }

Resolution parse_resolution(const json& j)
{
    if (j.is_number_unsigned()) return {j.get<std::size_t>(), j.get<std::size_t>()};
    if (j.is_array() && j.size() == 2 && j[0].is_number_unsigned() && j[1].is_number_unsigned())
        return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto x = s.find('x');
        std::size_t a = 0, b = 0;
        if (x != std::string::npos) {
            const auto r1 = std::from_chars(s.data(), s.data() + x, a);
            const auto r2 = std::from_chars(s.data() + x + 1, s.data() + s.size(), b);
            if (r1.ec == std::errc{} && r1.ptr == s.data() + x && r2.ec == std::errc{} && r2.ptr == s.data() + s.size())
                return {a, b};
        }
    }
    fail(ErrorCode::InvalidArgument, "bad resolution " + j.dump() + " (expected N, [NX,NT] or \"NXxNT\")");
}

SchemePolicy parse_scheme(const json& j)
{
    SchemePolicy p;
    if (j.is_array() && j.size() == 2) {
        p = {j[0].get<int>(), j[1].get<int>()};
    }
    else if (j.is_object()) {
        p = {j.at("interior").get<int>(), j.at("boundary").get<int>()};
    }
    else if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto c = s.find(',');
        require(c != std::string::npos, ErrorCode::InvalidArgument, "scheme must look like \"I,B\"");
        p = {std::stoi(s.substr(0, c)), std::stoi(s.substr(c + 1))};
    }
    else {
        fail(ErrorCode::InvalidArgument, "bad scheme " + j.dump());
    }
    p.validate();
    return p;
}

json stat_json(const Stat& s)
{
    return {{"count", s.count},
            {"mean", s.count ? json(s.mean) : json(nullptr)},
            {"stddev", s.stddev ? json(*s.stddev) : json(nullptr)},
            {"ci95", s.ci95 ? json(*s.ci95) : json(nullptr)},
            {"ci_defined", s.ci95.has_value()}};
}

int thread_count(int requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("THREADS")) {
        int n = 0;
        const auto r = std::from_chars(env, env + std::strlen(env), n);
        if (r.ec == std::errc{} && n > 0) return n;
    }
    return 1;
}

std::filesystem::path sibling(const std::filesystem::path& csv, const std::string& suffix)
{
    auto p = csv;
    p.replace_filename(csv.stem().string() + suffix);
    return p;
}

} // namespace

std::vector<Resolution> CascadePlan::schedule(Resolution last, const std::vector<Resolution>& extra) const
{
    std::vector<Resolution> fixed(extra.begin(), extra.end());
    fixed.push_back(last);
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
    fixed.erase(std::remove_if(fixed.begin(), fixed.end(), [&](Resolution r) { return strictly_below(last, r); }),
                fixed.end());

    std::vector<std::size_t> coarse = levels;
    if (coarse.empty()) {
        require(step >= 1 && start >= 3, ErrorCode::InvalidArgument, "cascade needs start >= 3 and step >= 1");
        for (std::size_t n = start; n < std::max(last.first, last.second); n += step) coarse.push_back(n);
    }

    std::set<Resolution> fixed_set(fixed.begin(), fixed.end());
    std::vector<Resolution> merged = fixed;
    for (std::size_t n : coarse) merged.emplace_back(n, n);
    std::sort(merged.begin(), merged.end());

    std::vector<Resolution> out;
    std::size_t next_fixed = 0;
    for (Resolution r : merged) {
        const bool is_fixed = fixed_set.count(r) > 0;
        if (is_fixed) {
            if (!out.empty() && out.back() == r) continue;
            out.push_back(r);
            ++next_fixed;
            continue;
        }
        if (!out.empty() && !strictly_below(out.back(), r)) continue;
        if (next_fixed < fixed.size() && !strictly_below(r, fixed[next_fixed])) continue;
        out.push_back(r);
    }
    return out;
}

void ExperimentSpec::validate() const
{
    require(runs >= 1, ErrorCode::InvalidArgument, "runs must be >= 1");
    require(!resolutions.empty(), ErrorCode::InvalidArgument, "resolutions must not be empty");
    for (std::size_t k = 1; k < resolutions.size(); ++k)
        require(strictly_below(resolutions[k - 1], resolutions[k]), ErrorCode::InvalidArgument,
                "resolutions must be strictly increasing");
    require(!methods.empty(), ErrorCode::InvalidArgument, "experiment needs at least one method");
    for (const auto& m : methods) m.policy.validate();
    require(rbf_smooth >= 0.0, ErrorCode::InvalidArgument, "rbf_smooth must be >= 0");
    require(threads >= 0, ErrorCode::InvalidArgument, "threads must be >= 0");
    problem.validate();
    optimizer.validate();
}

ExperimentSpec experiment_from_json(const json& j)
{
    require(j.is_object(), ErrorCode::InvalidArgument, "experiment must be a JSON object");
    ExperimentSpec e;
    try {
        require(j.contains("resolutions") && j["resolutions"].is_array(), ErrorCode::InvalidArgument,
                "experiment needs a resolutions array");
        for (const auto& r : j["resolutions"]) e.resolutions.push_back(parse_resolution(r));
        require(!e.resolutions.empty(), ErrorCode::InvalidArgument, "resolutions must not be empty");

        const json& p = j.at("problem");
        if (p.is_string())
            e.problem = builtin_problem(p.get<std::string>(), e.resolutions.front().first, e.resolutions.front().second);
        else
            e.problem = problem_from_json(p);
        if (j.contains("lambda")) e.problem.lambda = j["lambda"].get<double>();

        e.runs = j.value("runs", e.runs);
        e.seed = j.value("seed", e.seed);
        e.rbf_smooth = j.value("rbf_smooth", e.rbf_smooth);
        e.output = j.value("output", e.output);
        e.threads = j.value("threads", e.threads);
        if (j.contains("optimizer")) e.optimizer = optimizer_config_from_json(j["optimizer"]);
        if (j.contains("cascade")) {
            const auto& c = j["cascade"];
            e.cascade.start = c.value("start", e.cascade.start);
            e.cascade.step = c.value("step", e.cascade.step);
            if (c.contains("levels"))
                for (const auto& l : c["levels"]) e.cascade.levels.push_back(l.get<std::size_t>());
        }

        if (j.contains("methods")) {
            for (const auto& m : j["methods"])
                e.methods.push_back({parse_scheme(m.at("scheme")), parse_init_kind(m.at("init").get<std::string>())});
        }
        else {
            std::vector<SchemePolicy> pols;
            for (const auto& s : j.value("policies", json::array({json::array({2, 2})}))) pols.push_back(parse_scheme(s));
            std::vector<InitKind> inits;
            for (const auto& s : j.value("inits", json::array({"random"}))) inits.push_back(parse_init_kind(s.get<std::string>()));
            for (const auto& pol : pols)
                for (InitKind k : inits) e.methods.push_back({pol, k});
        }
    }
    catch (const json::exception& ex) {
        fail(ErrorCode::InvalidArgument, std::string("malformed experiment: ") + ex.what());
    }
    e.validate();
    return e;
}

json to_json(const ExperimentSpec& e)
{
    json res = json::array();
    for (auto r : e.resolutions) res.push_back({r.first, r.second});
    json methods = json::array();
    for (const auto& m : e.methods)
        methods.push_back({{"init", to_string(m.init)}, {"scheme", {m.policy.interior_order, m.policy.boundary_order}}});
    return {{"problem", to_json(e.problem)},
            {"resolutions", res},
            {"runs", e.runs},
            {"seed", e.seed},
            {"methods", methods},
            {"cascade", {{"start", e.cascade.start}, {"step", e.cascade.step}, {"levels", e.cascade.levels}}},
            {"rbf_smooth", e.rbf_smooth},
            {"optimizer", to_json(e.optimizer)},
            {"output", e.output},
            {"threads", e.threads}};
}

Stat summarize(const std::vector<double>& values)
{
    Stat s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double n = static_cast<double>(values.size());
    s.stddev = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    s.ci95 = boost::math::quantile(boost::math::complement(dist, 0.025)) * *s.stddev / std::sqrt(n);
    return s;
}

namespace {

struct Job {
    std::size_t method;
    std::size_t run;
    /// Random: the single resolution index. Cascade: unused, all resolutions.
    std::size_t resolution;
};

RunRow blank_row(const ExperimentSpec& spec, std::size_t m, std::size_t r, std::size_t k)
{
    RunRow row;
    const std::size_t nr = spec.resolutions.size();
    row.run_id = static_cast<long>((m * nr + r) * static_cast<std::size_t>(spec.runs) + k);
    row.n_x = spec.resolutions[r].first;
    row.n_t = spec.resolutions[r].second;
    row.method = spec.methods[m];
    row.seed = spec.seed + k;
    return row;
}

void fill(RunRow& row, const SolveResult& res)
{
    row.iterations = res.iterations;
    row.converged = to_string(res.converged);
    row.mae = res.mae_vs_reference;
    row.interior_loss = res.final_loss.interior;
    row.boundary_loss = res.final_loss.boundary;
    row.wall_time = res.wall_time;
}

void mark_error(RunRow& row, const std::string& msg)
{
    row.converged = "error";
    row.error = msg;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    const std::size_t nr = spec.resolutions.size();
    const auto runs = static_cast<std::size_t>(spec.runs);

    // References are shared read-only by every job.
    std::vector<std::optional<Field>> refs(nr);
    std::vector<std::string> ref_errors(nr);
    for (std::size_t r = 0; r < nr; ++r) {
        try {
            refs[r] = reference_field(spec.problem.with_resolution(spec.resolutions[r].first, spec.resolutions[r].second));
        }
        catch (const std::exception& e) {
            ref_errors[r] = std::string("reference: ") + e.what();
        }
    }
    auto ref_for = [&](const GridSpec& g) -> std::optional<Field> {
        for (std::size_t r = 0; r < nr; ++r)
            if (refs[r] && refs[r]->grid() == g) return refs[r];
        return std::nullopt;
    };

    std::vector<Job> jobs;
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
        for (std::size_t k = 0; k < runs; ++k) {
            if (spec.methods[m].init == InitKind::Random)
                for (std::size_t r = 0; r < nr; ++r) jobs.push_back({m, k, r});
            else
                jobs.push_back({m, k, 0});
        }
    }

    std::vector<RunRow> rows(spec.methods.size() * nr * runs);
    auto run_job = [&](const Job& job) {
        const Method& method = spec.methods[job.method];
        const std::uint64_t seed = spec.seed + job.run;
        if (method.init == InitKind::Random) {
            RunRow& row = rows[(job.method * nr + job.resolution) * runs + job.run];
            row = blank_row(spec, job.method, job.resolution, job.run);
            if (!ref_errors[job.resolution].empty()) {
                mark_error(row, ref_errors[job.resolution]);
                return;
            }
            try {
                const auto level = spec.problem.with_resolution(row.n_x, row.n_t);
                fill(row, minimize(level, random_field(level.grid, seed), method.policy, spec.optimizer, refs[job.resolution]));
            }
            catch (const std::exception& e) {
                mark_error(row, e.what());
            }
            return;
        }

        for (std::size_t r = 0; r < nr; ++r) rows[(job.method * nr + r) * runs + job.run] = blank_row(spec, job.method, r, job.run);
        try {
            const auto schedule = spec.cascade.schedule(spec.resolutions.back(), spec.resolutions);
            CascadeOptions opts;
            opts.method = method.init == InitKind::Rbf ? InterpMethod::Rbf : InterpMethod::Multilinear;
            opts.rbf_smooth = spec.rbf_smooth;
            opts.seed = seed;
            opts.reference = [&](const ProblemSpec& p) { return ref_for(p.grid); };
            const auto levels = cascade(spec.problem, schedule, method.policy, spec.optimizer, opts);
            for (std::size_t r = 0; r < nr; ++r) {
                RunRow& row = rows[(job.method * nr + r) * runs + job.run];
                const auto it = std::find_if(levels.begin(), levels.end(), [&](const CascadeLevel& l) {
                    return l.result.field.grid().n_x() == row.n_x && l.result.field.grid().n_t() == row.n_t;
                });
                fill(row, it->result);
                if (!ref_errors[r].empty()) mark_error(row, ref_errors[r]);
            }
        }
        catch (const std::exception& e) {
            for (std::size_t r = 0; r < nr; ++r) mark_error(rows[(job.method * nr + r) * runs + job.run], e.what());
        }
    };

    const int nthreads = std::min<int>(thread_count(spec.threads), static_cast<int>(jobs.size()));
    if (nthreads <= 1) {
        for (const auto& job : jobs) run_job(job);
    }
    else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < jobs.size(); k = next++) run_job(jobs[k]);
            });
        for (auto& th : pool) th.join();
    }

    ExperimentResult out;
    out.rows = std::move(rows);
    out.summary = summarize_rows(out.rows);
    json failures = json::array();
    for (const auto& row : out.rows)
        if (!row.error.empty()) failures.push_back({{"run_id", row.run_id}, {"error", row.error}});
    out.summary["failures"] = failures;
    out.summary["experiment"] = to_json(spec);

    if (!spec.output.empty()) {
        const std::filesystem::path path(spec.output);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        auto open = [](const std::filesystem::path& p) {
            std::ofstream f(p);
            require(f.good(), ErrorCode::Io, "cannot write " + p.string());
            return f;
        };
        {
            auto f = open(path);
            write_rows_csv(f, out.rows);
        }
        {
            auto f = open(sibling(path, ".summary.json"));
            f << out.summary.dump(2) << "\n";
        }
        {
            auto f = open(sibling(path, ".table.csv"));
            write_table_csv(f, out.summary);
        }
    }
    return out;
}

SolveRequest solve_request_from_json(const json& j)
{
    require(j.is_object(), ErrorCode::InvalidArgument, "solve request must be a JSON object");
    SolveRequest r;
    try {
        const json problem = j.value("problem", json("wave"));
        std::optional<Resolution> grid;
        if (j.contains("grid")) grid = parse_resolution(j["grid"]);
        if (problem.is_string()) {
            const Resolution g = grid.value_or(Resolution{20, 20});
            r.problem = builtin_problem(problem.get<std::string>(), g.first, g.second);
        }
        else {
            r.problem = problem_from_json(problem);
            if (grid) r.problem = r.problem.with_resolution(grid->first, grid->second);
        }
        if (j.contains("lambda")) r.problem.lambda = j["lambda"].get<double>();
        if (j.contains("scheme")) r.policy = parse_scheme(j["scheme"]);
        r.init = parse_init_kind(j.value("init", std::string("random")));
        r.seed = j.value("seed", r.seed);
        r.rbf_smooth = j.value("rbf_smooth", r.rbf_smooth);
        if (j.contains("optimizer")) r.optimizer = optimizer_config_from_json(j["optimizer"]);
        if (j.contains("cascade")) {
            const auto& c = j["cascade"];
            r.cascade.start = c.value("start", r.cascade.start);
            r.cascade.step = c.value("step", r.cascade.step);
            if (c.contains("levels"))
                for (const auto& l : c["levels"]) r.cascade.levels.push_back(l.get<std::size_t>());
        }
    }
    catch (const json::exception& ex) {
        fail(ErrorCode::InvalidArgument, std::string("malformed solve request: ") + ex.what());
    }
    r.policy.validate();
    r.problem.validate();
    require(r.rbf_smooth >= 0.0, ErrorCode::InvalidArgument, "rbf_smooth must be >= 0");
    return r;
}

std::vector<CascadeLevel> run_solve_request(const SolveRequest& r)
{
    const Resolution last{r.problem.grid.n_x(), r.problem.grid.n_t()};
    if (r.init == InitKind::Random) {
        const auto t0 = std::chrono::steady_clock::now();
        auto res = minimize(r.problem, random_field(r.problem.grid, r.seed), r.policy, r.optimizer, reference_field(r.problem));
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::vector<CascadeLevel> out;
        out.push_back({std::move(res), elapsed});
        return out;
    }
    CascadeOptions opts;
    opts.method = r.init == InitKind::Rbf ? InterpMethod::Rbf : InterpMethod::Multilinear;
    opts.rbf_smooth = r.rbf_smooth;
    opts.seed = r.seed;
    return cascade(r.problem, r.cascade.schedule(last), r.policy, r.optimizer, opts);
}

static constexpr const char* kHeader =
    "run_id,n_x,n_t,interior_order,boundary_order,init,seed,iterations,converged,mae,interior_loss,boundary_loss,wall_time_s";

void write_rows_csv(std::ostream& out, const std::vector<RunRow>& rows)
{
    out << kHeader << "\n";
    for (const auto& r : rows) {
        out << r.run_id << ',' << r.n_x << ',' << r.n_t << ',' << r.method.policy.interior_order << ','
            << r.method.policy.boundary_order << ',' << to_string(r.method.init) << ',' << r.seed << ',' << r.iterations << ','
            << r.converged << ',' << (r.mae ? format_double(*r.mae) : std::string()) << ',' << format_double(r.interior_loss)
            << ',' << format_double(r.boundary_loss) << ',' << format_double(r.wall_time) << "\n";
    }
}

std::vector<RunRow> read_rows_csv(std::istream& in)
{
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == kHeader, ErrorCode::Io, "unexpected run CSV header");
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        require(cells.size() == 13, ErrorCode::Io, "run CSV row has " + std::to_string(cells.size()) + " cells");
        auto num = [&](const std::string& s, auto& v) {
            const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            require(r.ec == std::errc{} && r.ptr == s.data() + s.size(), ErrorCode::Io, "bad number '" + s + "' in run CSV");
        };
        RunRow r;
        num(cells[0], r.run_id);
        num(cells[1], r.n_x);
        num(cells[2], r.n_t);
        num(cells[3], r.method.policy.interior_order);
        num(cells[4], r.method.policy.boundary_order);
        r.method.init = parse_init_kind(cells[5]);
        num(cells[6], r.seed);
        num(cells[7], r.iterations);
        r.converged = cells[8];
        if (!cells[9].empty()) {
            double m = 0.0;
            num(cells[9], m);
            r.mae = m;
        }
        num(cells[10], r.interior_loss);
        num(cells[11], r.boundary_loss);
        num(cells[12], r.wall_time);
        rows.push_back(r);
    }
    return rows;
}

json summarize_rows(const std::vector<RunRow>& rows)
{
    double max_time = 0.0;
    for (const auto& r : rows)
        if (r.converged != "error") max_time = std::max(max_time, r.wall_time);

    std::vector<Method> methods;
    std::vector<Resolution> resolutions;
    for (const auto& r : rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        if (std::find(resolutions.begin(), resolutions.end(), Resolution{r.n_x, r.n_t}) == resolutions.end())
            resolutions.emplace_back(r.n_x, r.n_t);
    }
    std::sort(resolutions.begin(), resolutions.end());

    json groups = json::array();
    json table_rows = json::array();
    for (const auto& m : methods) {
        json cells = json::array();
        for (auto res : resolutions) {
            std::vector<double> mae, iters, times, ratios;
            std::map<std::string, int> conv;
            std::size_t total = 0;
            for (const auto& r : rows) {
                if (!(r.method == m) || Resolution{r.n_x, r.n_t} != res) continue;
                ++total;
                ++conv[r.converged];
                if (r.converged == "error") continue;
                if (r.mae) mae.push_back(*r.mae);
                iters.push_back(static_cast<double>(r.iterations));
                times.push_back(r.wall_time);
                ratios.push_back(max_time > 0.0 ? r.wall_time / max_time : 0.0);
            }
            if (total == 0) {
                cells.push_back(nullptr);
                continue;
            }
            const Stat ms = summarize(mae);
            groups.push_back({{"init", to_string(m.init)},
                              {"interior_order", m.policy.interior_order},
                              {"boundary_order", m.policy.boundary_order},
                              {"n_x", res.first},
                              {"n_t", res.second},
                              {"runs", total},
                              {"converged", conv},
                              {"mae", stat_json(ms)},
                              {"iterations", stat_json(summarize(iters))},
                              {"wall_time_s", stat_json(summarize(times))},
                              {"time_ratio", stat_json(summarize(ratios))}});
            cells.push_back(ms.count ? json(ms.mean) : json(nullptr));
        }
        table_rows.push_back({{"init", to_string(m.init)},
                              {"interior_order", m.policy.interior_order},
                              {"boundary_order", m.policy.boundary_order},
                              {"mae", cells}});
    }
    json columns = json::array();
    for (auto r : resolutions) columns.push_back(res_label(r));
    return {{"groups", groups}, {"max_wall_time_s", max_time}, {"table", {{"columns", columns}, {"rows", table_rows}}}};
}

void write_table_csv(std::ostream& out, const json& summary)
{
    const auto& t = summary.at("table");
    out << "method,interior_order,boundary_order";
    for (const auto& c : t.at("columns")) out << ',' << c.get<std::string>();
    out << "\n";
    for (const auto& r : t.at("rows")) {
        out << r.at("init").get<std::string>() << ',' << r.at("interior_order").get<int>() << ','
            << r.at("boundary_order").get<int>();
        for (const auto& v : r.at("mae")) out << ',' << (v.is_null() ? std::string() : format_double(v.get<double>()));
        out << "\n";
    }
}

} // namespace pdeopt
