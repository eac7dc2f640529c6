// Command line driver: `mlab run` executes verification suites and writes
// a machine-readable report, `mlab replay` re-evaluates a recorded failure.
// Exit codes: 0 all checks pass, 1 a hard check failed, 2 usage or
// configuration error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mlab/suites.hpp"

namespace fs = std::filesystem;
using namespace mlab;

namespace {

bool parse_int_pair(const std::string& s, char sep, int& a, int& b) {
    const size_t pos = s.find(sep);
    if (pos == std::string::npos) return false;
    try {
        size_t used = 0;
        a = std::stoi(s.substr(0, pos), &used);
        if (used != pos) return false;
        b = std::stoi(s.substr(pos + 1), &used);
        if (used != s.size() - pos - 1) return false;
    } catch (const std::exception&) {
        return false;
    }
    return a > 0 && b > 0;
}

bool parse_exponents(const std::string& s, SuiteConfig& cfg) {
    std::vector<double> v;
    size_t start = 0;
    while (start <= s.size()) {
        const size_t comma = s.find(',', start);
        const std::string tok =
            s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) return false;
        } catch (const std::exception&) {
            return false;
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (v.size() != 3) return false;
    cfg.p = v[0];
    cfg.q = v[1];
    cfg.r = v[2];
    return true;
}

void print_check(const CheckRecord& c) {
    const char* tag = c.hard ? (c.pass ? "PASS" : "FAIL") : "info";
    std::printf("  [%s] %-34s value=%-14.8g bound=%-12.8g %s\n", tag, c.name.c_str(),
                c.value, c.bound, c.note.c_str());
}

int usage_error(const std::string& msg) {
    std::fprintf(stderr, "mlab: %s\n", msg.c_str());
    return 2;
}

struct OutPaths {
    fs::path dir;    // directory holding tables/ and failures/
    fs::path report; // report.json location
};

// --out accepts either a directory or a path ending in .json; the json form
// names the report file and puts tables/ and failures/ next to it
OutPaths resolve_out(const std::string& out) {
    fs::path p(out);
    if (p.extension() == ".json") {
        fs::path dir = p.parent_path();
        if (dir.empty()) dir = ".";
        return {dir, p};
    }
    return {p, p / "report.json"};
}

int run_main(const std::string& suite, const SuiteConfig& cfg, const std::string& out) {
    std::vector<std::string> ids;
    if (suite == "all")
        ids = {"identities", "bellman", "estimates", "paraproduct", "stochastic"};
    else
        ids = {suite};

    std::vector<SuiteReport> reports;
    for (const std::string& id : ids) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<SuiteReport> one = run_suites(id, cfg);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (SuiteReport& sr : one) {
            std::printf("suite %s: %s (%.2fs)\n", sr.suite.c_str(),
                        sr.pass ? "pass" : "FAIL", secs);
            for (const CheckRecord& c : sr.checks) print_check(c);
            reports.push_back(std::move(sr));
        }
    }

    std::optional<OutPaths> paths;
    if (!out.empty()) {
        paths = resolve_out(out);
        std::error_code ec;
        fs::create_directories(paths->dir / "tables", ec);
        if (ec) return usage_error("cannot create output directory: " + paths->dir.string());
    }

    bool all_pass = true;
    for (const SuiteReport& sr : reports) {
        for (const CheckRecord& c : sr.checks) {
            if (!c.hard || c.pass) continue;
            all_pass = false;
            std::printf("FAILED %s.%s", sr.suite.c_str(), c.name.c_str());
            if (c.seed != 0) std::printf(" (instance seed %llu)",
                                         static_cast<unsigned long long>(c.seed));
            std::printf("\n");
            if (c.artifact.is_null()) continue;
            if (paths) {
                fs::create_directories(paths->dir / "failures");
                const fs::path fp = paths->dir / "failures" / (sr.suite + "-" + c.name + ".json");
                std::ofstream f(fp);
                f << c.artifact.dump(2) << '\n';
                std::printf("  replay with: mlab replay %s\n", fp.string().c_str());
            } else {
                std::printf("  artifact: %s\n", c.artifact.dump().c_str());
            }
        }
    }

    if (paths) {
        for (const SuiteReport& sr : reports)
            for (const auto& [name, csv] : sr.tables) {
                std::ofstream f(paths->dir / "tables" / (name + ".csv"));
                f << csv;
            }
        const Json rep = report_json(suite, cfg, reports, iso8601_utc_now());
        std::ofstream f(paths->report);
        if (!f) return usage_error("cannot write report: " + paths->report.string());
        f << rep.dump(2) << '\n';
        std::printf("report written to %s\n", paths->report.string().c_str());
    }

    std::printf("overall: %s\n", all_pass ? "pass" : "FAIL");
    return all_pass ? 0 : 1;
}

int replay_main(const std::string& artifact_path) {
    std::ifstream f(artifact_path);
    if (!f) return usage_error("cannot open artifact: " + artifact_path);
    Json a;
    try {
        f >> a;
    } catch (const Json::exception& e) {
        return usage_error(std::string("artifact is not valid json: ") + e.what());
    }
    const CheckRecord c = replay_artifact(a);
    print_check(c);
    return c.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact and numeric verification workbench for two-parameter "
                 "martingale transform estimates"};
    app.require_subcommand(1);

    std::string suite = "all";
    std::string dims, paths_opt, exponents, out;
    std::uint64_t seed_flag = 1;
    bool exact = false;
    int horizon = 0, depth = 0, trials = 0;
    double dt = 0.0;

    CLI::App* run = app.add_subcommand("run", "run verification suites");
    run->add_option("--suite", suite, "suite to run")
        ->check(CLI::IsMember({"identities", "bellman", "estimates", "paraproduct",
                               "stochastic", "all"}));
    run->add_option("--seed", seed_flag, "master seed (also via MLAB_SEED; default 1)");
    run->add_flag("--exact", exact, "prefer exact rational arithmetic where supported");
    run->add_option("--dims", dims, "factor space sizes as AxB");
    run->add_option("--n", horizon, "filtration horizon")->check(CLI::PositiveNumber);
    run->add_option("--depth", depth, "dyadic grid depth")->check(CLI::PositiveNumber);
    run->add_option("--exponents", exponents, "exponent triple as p,q,r");
    run->add_option("--trials", trials, "instances per fuzzed check")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out, "output directory, or a path ending in .json");
    run->add_option("--paths", paths_opt, "path ensemble sizes as M1xM2");
    run->add_option("--dt", dt, "time step over [0, 1]; sets steps = round(1/dt)");

    std::string artifact_path;
    CLI::App* replay = app.add_subcommand("replay", "re-evaluate a recorded failure");
    replay->add_option("artifact", artifact_path, "failure artifact json file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // help or version
        app.exit(e);
        return 2;
    }

    try {
        if (replay->parsed()) return replay_main(artifact_path);

        SuiteConfig cfg;
        cfg.seed = 1;
        if (const char* env = std::getenv("MLAB_SEED")) {
            try {
                size_t used = 0;
                cfg.seed = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument(env);
            } catch (const std::exception&) {
                return usage_error("MLAB_SEED is not an unsigned integer");
            }
        }
        if (run->count("--seed") > 0) cfg.seed = seed_flag;
        cfg.exact = exact;
        if (!dims.empty() && !parse_int_pair(dims, 'x', cfg.dims1, cfg.dims2))
            return usage_error("--dims expects AxB with positive integers");
        if (!paths_opt.empty() && !parse_int_pair(paths_opt, 'x', cfg.m1, cfg.m2))
            return usage_error("--paths expects M1xM2 with positive integers");
        if (!exponents.empty() && !parse_exponents(exponents, cfg))
            return usage_error("--exponents expects p,q,r");
        if (horizon > 0) cfg.horizon = horizon;
        if (depth > 0) cfg.depth = depth;
        if (trials > 0) cfg.trials = trials;
        if (run->count("--dt") > 0) {
            if (!(dt > 0.0) || dt > 1.0) return usage_error("--dt must lie in (0, 1]");
            cfg.steps = static_cast<int>(std::llround(1.0 / dt));
        }
        return run_main(suite, cfg, out);
    } catch (const Error& e) {
        return usage_error(e.what());
    }
}
