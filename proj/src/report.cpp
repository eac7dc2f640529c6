#include "mlab/report.hpp"

#include <ctime>

namespace mlab {

Json json_scalar(double v) { return Json(v); }

Json json_scalar(const Rational& v) {
    return Json(numerator(v).str() + "/" + denominator(v).str());
}

double double_from_json(const Json& j) {
    require(j.is_number(), "json: expected a number");
    return j.get<double>();
}

Rational rational_from_json(const Json& j) {
    require(j.is_string(), "json: expected a \"p/q\" string");
    const std::string s = j.get<std::string>();
    try {
        return Rational(s);
    } catch (const std::exception&) {
        fail("json: malformed rational literal");
    }
}

std::string csv_number(double v) { return Json(v).dump(); }

Json json_partition(const Partition& p) {
    Json block_of = Json::array();
    for (int i = 0; i < p.size(); ++i) block_of.push_back(p.block_of(i));
    Json j = Json::object();
    j["block_of"] = std::move(block_of);
    return j;
}

Partition partition_from_json(const Json& j) {
    require(j.is_object() && j.contains("block_of") && j["block_of"].is_array(),
            "json: partition needs a block_of array");
    std::vector<int> lab;
    for (const auto& e : j["block_of"]) {
        require(e.is_number_integer(), "json: partition labels must be integers");
        lab.push_back(e.get<int>());
    }
    return Partition(std::move(lab));
}

Json json_filtration(const Filtration& f) {
    Json steps = Json::array();
    for (int k = 0; k <= f.horizon(); ++k) steps.push_back(json_partition(f.at(k)));
    Json j = Json::object();
    j["steps"] = std::move(steps);
    return j;
}

Filtration filtration_from_json(const Json& j) {
    require(j.is_object() && j.contains("steps") && j["steps"].is_array(),
            "json: filtration needs a steps array");
    std::vector<Partition> steps;
    for (const auto& e : j["steps"]) steps.push_back(partition_from_json(e));
    return Filtration(std::move(steps));
}

CheckRecord check_le(std::string name, double value, double bound, std::string note,
                     std::uint64_t seed) {
    CheckRecord c;
    c.name = std::move(name);
    c.value = value;
    c.bound = bound;
    c.pass = value <= bound;
    c.note = std::move(note);
    c.seed = seed;
    return c;
}

CheckRecord check_ge(std::string name, double value, double bound, std::string note,
                     std::uint64_t seed) {
    CheckRecord c;
    c.name = std::move(name);
    c.value = value;
    c.bound = bound;
    c.pass = value >= bound;
    c.note = std::move(note);
    c.seed = seed;
    return c;
}

CheckRecord check_true(std::string name, bool ok, std::string note, std::uint64_t seed) {
    CheckRecord c;
    c.name = std::move(name);
    c.value = ok ? 1.0 : 0.0;
    c.bound = 1.0;
    c.pass = ok;
    c.note = std::move(note);
    c.seed = seed;
    return c;
}

CheckRecord report_value(std::string name, double value, std::string note) {
    CheckRecord c;
    c.name = std::move(name);
    c.hard = false;
    c.value = value;
    c.note = std::move(note);
    return c;
}

Json json_config(const SuiteConfig& cfg) {
    Json j = Json::object();
    j["seed"] = cfg.seed;
    j["exact"] = cfg.exact;
    j["dims1"] = cfg.dims1;
    j["dims2"] = cfg.dims2;
    j["horizon"] = cfg.horizon;
    j["depth"] = cfg.depth;
    j["p"] = cfg.p;
    j["q"] = cfg.q;
    j["r"] = cfg.r;
    j["trials"] = cfg.trials;
    j["m1"] = cfg.m1;
    j["m2"] = cfg.m2;
    j["steps"] = cfg.steps;
    return j;
}

SuiteConfig config_from_json(const Json& j) {
    require(j.is_object(), "json: config must be an object");
    SuiteConfig cfg;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.exact = j.at("exact").get<bool>();
    cfg.dims1 = j.at("dims1").get<int>();
    cfg.dims2 = j.at("dims2").get<int>();
    cfg.horizon = j.at("horizon").get<int>();
    cfg.depth = j.at("depth").get<int>();
    cfg.p = j.at("p").get<double>();
    cfg.q = j.at("q").get<double>();
    cfg.r = j.at("r").get<double>();
    cfg.trials = j.at("trials").get<int>();
    cfg.m1 = j.at("m1").get<int>();
    cfg.m2 = j.at("m2").get<int>();
    cfg.steps = j.at("steps").get<int>();
    return cfg;
}

Json json_check(const CheckRecord& c) {
    Json j = Json::object();
    j["name"] = c.name;
    j["hard"] = c.hard;
    j["pass"] = c.pass;
    j["value"] = c.value;
    j["bound"] = c.bound;
    j["note"] = c.note;
    if (c.seed != 0) j["seed"] = c.seed;
    return j;
}

Json json_suite(const SuiteReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(json_check(c));
    Json tables = Json::array();
    for (const auto& t : r.tables) tables.push_back("tables/" + t.first + ".csv");
    Json j = Json::object();
    j["suite"] = r.suite;
    j["pass"] = r.pass;
    j["checks"] = std::move(checks);
    j["tables"] = std::move(tables);
    return j;
}

Json report_json(const std::string& suite_id, const SuiteConfig& cfg,
                 const std::vector<SuiteReport>& suites, const std::string& timestamp) {
    bool pass = true;
    Json list = Json::array();
    for (const auto& s : suites) {
        pass = pass && s.pass;
        list.push_back(json_suite(s));
    }
    Json j = Json::object();
    j["schema"] = "mlab-report-v1";
    j["suite"] = suite_id;
    j["config"] = json_config(cfg);
    j["pass"] = pass;
    j["suites"] = std::move(list);
    j["timestamp"] = timestamp;
    return j;
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace mlab
