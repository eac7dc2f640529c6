#ifndef MLAB_REPORT_HPP
#define MLAB_REPORT_HPP

// JSON encodings for the core objects plus the check/suite record types
// shared by the command line runner and the acceptance gate. Doubles go
// through the library's shortest round-trip formatting and rationals render
// as "p/q" strings, so identical values always dump to identical bytes and
// exact values survive a round trip. Object keys serialize alphabetically.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlab/fuzz.hpp"

namespace mlab {

using Json = nlohmann::json;

Json json_scalar(double v);
Json json_scalar(const Rational& v);
double double_from_json(const Json& j);
Rational rational_from_json(const Json& j);

template <class S>
S scalar_from_json(const Json& j);
template <>
inline double scalar_from_json<double>(const Json& j) {
    return double_from_json(j);
}
template <>
inline Rational scalar_from_json<Rational>(const Json& j) {
    return rational_from_json(j);
}

// shortest exact decimal for CSV cells
std::string csv_number(double v);

template <class S>
Json json_space(const Space<S>& s) {
    Json mass = Json::array();
    for (const S& m : s.masses()) mass.push_back(json_scalar(m));
    Json j = Json::object();
    j["mass"] = std::move(mass);
    return j;
}

template <class S>
SpacePtr<S> space_from_json(const Json& j) {
    require(j.is_object() && j.contains("mass") && j["mass"].is_array(),
            "json: space needs a mass array");
    std::vector<S> m;
    for (const auto& e : j["mass"]) m.push_back(scalar_from_json<S>(e));
    return make_space<S>(std::move(m));
}

Json json_partition(const Partition& p);
Partition partition_from_json(const Json& j);
Json json_filtration(const Filtration& f);
Filtration filtration_from_json(const Json& j);

template <class S>
Json json_rv(const Rv<S>& v) {
    Json values = Json::array();
    for (const S& x : v.values()) values.push_back(json_scalar(x));
    Json j = Json::object();
    j["values"] = std::move(values);
    return j;
}

template <class S>
Rv<S> rv_from_json(const Json& j, const SpacePtr<S>& space) {
    require(j.is_object() && j.contains("values") && j["values"].is_array(),
            "json: rv needs a values array");
    std::vector<S> v;
    for (const auto& e : j["values"]) v.push_back(scalar_from_json<S>(e));
    return Rv<S>(space, std::move(v));
}

template <class S>
Json json_inputs(const MartingaleInputs<S>& in) {
    Json j = Json::object();
    j["space1"] = json_space(*in.pair->space1());
    j["space2"] = json_space(*in.pair->space2());
    j["filtration1"] = json_filtration(in.pair->filt1());
    j["filtration2"] = json_filtration(in.pair->filt2());
    j["X"] = json_rv(in.X);
    j["Y"] = json_rv(in.Y);
    j["Z"] = json_rv(in.Z);
    Json k = Json::array();
    for (const auto& kv : in.K) k.push_back(json_rv(kv));
    j["K"] = std::move(k);
    return j;
}

template <class S>
MartingaleInputs<S> inputs_from_json(const Json& j) {
    require(j.is_object(), "json: inputs must be an object");
    auto s1 = space_from_json<S>(j.at("space1"));
    auto s2 = space_from_json<S>(j.at("space2"));
    auto pair = std::make_shared<const ProductFiltrationPair<S>>(
        s1, s2, filtration_from_json(j.at("filtration1")),
        filtration_from_json(j.at("filtration2")));
    Rv<S> x = rv_from_json<S>(j.at("X"), pair->product());
    Rv<S> y = rv_from_json<S>(j.at("Y"), pair->product());
    Rv<S> z = rv_from_json<S>(j.at("Z"), pair->product());
    Process<S> k;
    for (const auto& e : j.at("K")) k.push_back(rv_from_json<S>(e, pair->product()));
    return make_martingale_inputs(std::move(pair), std::move(x), std::move(y),
                                  std::move(z), std::move(k));
}

// One verified or measured quantity. Hard checks gate the exit status;
// soft ones are reported only. A failing hard check carries the seed of
// the offending instance and a self-contained replay artifact.
struct CheckRecord {
    std::string name;
    bool hard = true;
    bool pass = true;
    double value = 0;
    double bound = 0;
    std::string note;
    std::uint64_t seed = 0;
    Json artifact; // null unless the check failed with a replayable instance
};

CheckRecord check_le(std::string name, double value, double bound, std::string note,
                     std::uint64_t seed = 0);
CheckRecord check_ge(std::string name, double value, double bound, std::string note,
                     std::uint64_t seed = 0);
CheckRecord check_true(std::string name, bool ok, std::string note,
                       std::uint64_t seed = 0);
CheckRecord report_value(std::string name, double value, std::string note);

struct SuiteReport {
    std::string suite;
    bool pass = true;
    std::vector<CheckRecord> checks;
    std::vector<std::pair<std::string, std::string>> tables; // name -> csv text

    void add(CheckRecord c) {
        pass = pass && c.pass;
        checks.push_back(std::move(c));
    }
    const CheckRecord* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

// Runner knobs. Zero/empty fields mean "suite default"; the defaults are
// pinned to the documented acceptance settings.
struct SuiteConfig {
    std::uint64_t seed = 1;
    bool exact = false; // force exact arithmetic in the fuzz suites
    int dims1 = 0, dims2 = 0;
    int horizon = 0;
    int depth = 0;
    double p = 3.0, q = 3.0, r = 1.5;
    int trials = 0;
    int m1 = 0, m2 = 0; // path counts
    int steps = 0;      // time steps
};

Json json_config(const SuiteConfig& cfg);
SuiteConfig config_from_json(const Json& j);
Json json_check(const CheckRecord& c);
Json json_suite(const SuiteReport& r);

// Full report document. The timestamp is the single nondeterministic field
// and lives in one top-level key so determinism comparisons can drop it.
Json report_json(const std::string& suite_id, const SuiteConfig& cfg,
                 const std::vector<SuiteReport>& suites, const std::string& timestamp);

std::string iso8601_utc_now();

} // namespace mlab

#endif
