#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mlab/suites.hpp"

using namespace mlab;

namespace {

template <class S>
MartingaleInputs<S> small_instance(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 2));
    return random_inputs<S>(rng, 3, 2, 2, true);
}

Json hand_artifact(std::uint64_t seed) {
    const MartingaleInputs<Rational> in = small_instance<Rational>(seed);
    Json a = Json::object();
    a["schema"] = "mlab-failure-v1";
    a["suite"] = "identities";
    a["check"] = "exact_splitting_identity";
    a["scalar"] = "rational";
    a["seed"] = seed;
    Json p = Json::object();
    p["dims1"] = 3;
    p["dims2"] = 2;
    p["horizon"] = 2;
    p["with_weights"] = true;
    a["params"] = std::move(p);
    a["config"] = json_config(SuiteConfig{});
    a["inputs"] = json_inputs(in);
    Json obs = Json::object();
    obs["value"] = 0.0;
    obs["bound"] = 0.0;
    obs["note"] = "synthetic";
    a["observed"] = std::move(obs);
    return a;
}

} // namespace

TEST_CASE("scalar json round trips") {
    CHECK(double_from_json(json_scalar(0.1)) == 0.1);
    CHECK(double_from_json(json_scalar(-3.0)) == -3.0);
    const double tiny = 1e-17;
    CHECK(double_from_json(json_scalar(tiny)) == tiny);

    const Rational r = Rational(-7) / Rational(12);
    const Json j = json_scalar(r);
    CHECK(j.get<std::string>() == "-7/12");
    CHECK(rational_from_json(j) == r);
    CHECK(rational_from_json(json_scalar(Rational(0))) == 0);

    CHECK_THROWS_AS(rational_from_json(Json("3/4/5")), Error);
    CHECK_THROWS_AS(rational_from_json(Json("abc")), Error);
}

TEST_CASE("csv numbers use the shortest round trip form") {
    CHECK(csv_number(1.5) == "1.5");
    CHECK(csv_number(0.1) == "0.1");
    CHECK(csv_number(4.0) == "4.0");
    CHECK(double_from_json(Json::parse(csv_number(0.30000000000000004))) ==
          0.30000000000000004);
}

TEST_CASE("inputs serialize and decode to the same json in both modes") {
    {
        const auto in = small_instance<Rational>(9);
        const Json j = json_inputs(in);
        const auto back = inputs_from_json<Rational>(j);
        CHECK(json_inputs(back) == j);
        CHECK(back.horizon() == in.horizon());
        CHECK(max_abs(back.X - in.X) == 0);
    }
    {
        const auto in = small_instance<double>(9);
        const Json j = json_inputs(in);
        const auto back = inputs_from_json<double>(j);
        CHECK(json_inputs(back) == j);
        CHECK(max_abs(back.Z - in.Z) == 0.0);
    }
}

TEST_CASE("suite config round trips through json") {
    SuiteConfig cfg;
    cfg.seed = 42;
    cfg.exact = true;
    cfg.dims1 = 5;
    cfg.horizon = 3;
    cfg.p = 4;
    cfg.q = 4;
    cfg.r = 2;
    cfg.trials = 17;
    cfg.m1 = 64;
    cfg.steps = 256;
    const SuiteConfig back = config_from_json(json_config(cfg));
    CHECK(json_config(back) == json_config(cfg));
    CHECK(back.seed == 42);
    CHECK(back.exact);
    CHECK(back.r == 2.0);
}

TEST_CASE("check helpers record pass and fail directions") {
    CHECK(check_le("a", 1.0, 2.0, "").pass);
    CHECK(!check_le("a", 3.0, 2.0, "").pass);
    CHECK(check_ge("b", -1e-12, -1e-10, "").pass);
    CHECK(!check_ge("b", -1e-9, -1e-10, "").pass);
    CHECK(!check_true("c", false, "").pass);
    CHECK(!report_value("d", 7.0, "").hard);

    SuiteReport rep;
    rep.suite = "x";
    rep.add(check_le("ok", 0.0, 1.0, ""));
    rep.add(report_value("soft", 99.0, ""));
    CHECK(rep.pass);
    rep.add(check_true("broken", false, ""));
    CHECK(!rep.pass);
    CHECK(rep.find("soft") != nullptr);
    CHECK(rep.find("missing") == nullptr);
}

TEST_CASE("report json dumps are byte stable") {
    SuiteConfig cfg;
    cfg.trials = 2;
    SuiteReport rep;
    rep.suite = "identities";
    rep.add(check_le("gap", 0.25, 1.0, "note"));
    rep.tables.emplace_back("t", "a,b\n1,2\n");
    const Json one = report_json("identities", cfg, {rep}, "1970-01-01T00:00:00Z");
    const Json two = report_json("identities", cfg, {rep}, "1970-01-01T00:00:00Z");
    CHECK(one.dump(2) == two.dump(2));
    CHECK(one.at("schema") == "mlab-report-v1");
    CHECK(one.at("pass").get<bool>());
    CHECK(one.at("suites").at(0).at("tables").at(0) == "tables/t.csv");
}

TEST_CASE("replay reproduces a recorded instance bit for bit") {
    const Json a = hand_artifact(77);
    const CheckRecord c = replay_artifact(a);
    CHECK(c.name == "exact_splitting_identity");
    CHECK(c.pass);
    CHECK(c.value == 0.0);
    CHECK(c.note.find("bit for bit") != std::string::npos);
}

TEST_CASE("replay rejects corrupted artifacts") {
    Json a = hand_artifact(78);
    a["inputs"]["X"]["values"][0] = "9999/1";
    CHECK_THROWS_AS(replay_artifact(a), Error);

    Json bad = hand_artifact(79);
    bad["schema"] = "mlab-failure-v0";
    CHECK_THROWS_AS(replay_artifact(bad), Error);

    Json missing = hand_artifact(80);
    missing.erase("params");
    CHECK_THROWS_AS(replay_artifact(missing), Error);

    CHECK_THROWS_AS(replay_artifact(Json("plain string")), Error);
}

TEST_CASE("unknown suite ids are rejected") {
    CHECK(known_suite("identities"));
    CHECK(known_suite("all"));
    CHECK(!known_suite("identity"));
    SuiteConfig cfg;
    CHECK_THROWS_AS(run_suites("identity", cfg), Error);
}

TEST_CASE("tiny identities suite passes and is deterministic") {
    SuiteConfig cfg;
    cfg.trials = 6;
    const SuiteReport one = run_identities_suite(cfg);
    const SuiteReport two = run_identities_suite(cfg);
    CHECK(one.pass);
    CHECK(one.checks.size() == 10);
    REQUIRE(two.checks.size() == one.checks.size());
    for (size_t i = 0; i < one.checks.size(); ++i) {
        CHECK(one.checks[i].name == two.checks[i].name);
        CHECK(one.checks[i].value == two.checks[i].value);
        CHECK(one.checks[i].pass == two.checks[i].pass);
    }
}
