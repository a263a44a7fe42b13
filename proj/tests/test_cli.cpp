#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "json.hpp"
#include "tap/gen.hpp"
#include "tap/instance.hpp"
#include "tap/report.hpp"

using namespace tap;

namespace {

GenOptions opts_for(Profile p, int n) {
    GenOptions o;
    o.profile = p;
    o.n = n;
    return o;
}

} // namespace

TEST_CASE("profile names round trip and reject junk") {
    for (Profile p : {Profile::RandomTree, Profile::Star, Profile::Caterpillar, Profile::Spider,
                      Profile::BoundedDiameter})
        CHECK(profile_from_name(profile_name(p)) == p);
    CHECK_THROWS_AS(profile_from_name("hypercube"), Error);
    CHECK_THROWS_AS(generate(1, opts_for(Profile::RandomTree, 1)), Error);
    CHECK_THROWS_AS(generate(1, opts_for(Profile::RandomTree, kMaxNodes + 1)), Error);
}

TEST_CASE("every profile generates feasible deterministic instances") {
    for (Profile p : {Profile::RandomTree, Profile::Star, Profile::Caterpillar, Profile::Spider,
                      Profile::BoundedDiameter}) {
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            GenOptions o = opts_for(p, 3 + static_cast<int>(seed));
            o.max_cost = seed % 2 ? 1 : 4;
            TapInstance a = generate(seed, o);
            CHECK(a.n() == o.n);
            CHECK_NOTHROW(a.require_feasible());
            CHECK(a.max_cost() <= o.max_cost);
            TapInstance b = generate(seed, o);
            CHECK(a.to_json_text() == b.to_json_text()); // byte-identical
            TapInstance c = generate(seed + 100, o);
            if (p != Profile::Star) // star's tree and link set are fixed by n
                CHECK(a.to_json_text() != c.to_json_text());
        }
    }
}

TEST_CASE("star profile with three leaves is the canonical triangle fixture") {
    TapInstance s = generate(5, opts_for(Profile::Star, 4));
    CHECK(s.n() == 4);
    CHECK(s.leaf_count() == 3);
    CHECK(s.num_links() == 3);
    CHECK(find_link(s, 1, 2) == 0);
    CHECK(find_link(s, 1, 3) == 1);
    CHECK(find_link(s, 2, 3) == 2);
    for (const Link& l : s.links()) CHECK(l.cost == 1);

    TapInstance tiny = generate(5, opts_for(Profile::Star, 2)); // repaired with a root link
    CHECK(tiny.num_links() == 1);
    CHECK_NOTHROW(tiny.require_feasible());
}

TEST_CASE("spider profile emits only up and cross links") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        GenOptions o = opts_for(Profile::Spider, 4 + static_cast<int>(seed % 9));
        o.max_cost = 3;
        TapInstance s = generate(seed, o);
        for (int e = 0; e < s.num_links(); ++e) {
            LinkClass c = s.classify_link(e);
            bool spider_ok = c.up || c.kind == LinkKind::Cross;
            CHECK(spider_ok);
        }
    }
}

TEST_CASE("bounded-diameter profile respects the bound and can attain it") {
    for (int d = 2; d <= 7; ++d) {
        bool attained = false;
        for (std::uint64_t seed = 1; seed <= 25; ++seed) {
            GenOptions o = opts_for(Profile::BoundedDiameter, 12);
            o.diameter = d;
            TapInstance t = generate(seed, o);
            CHECK(t.diameter() <= d);
            attained = attained || t.diameter() == d;
        }
        CHECK(attained);
    }

    GenOptions single = opts_for(Profile::BoundedDiameter, 2);
    single.diameter = 1;
    CHECK(generate(1, single).diameter() == 1);
    GenOptions bad = opts_for(Profile::BoundedDiameter, 3);
    bad.diameter = 1;
    CHECK_THROWS_AS(generate(1, bad), Error); // no 3-node tree has diameter 1
}

TEST_CASE("exit codes follow the error kind") {
    CHECK(exit_code_for(ErrorKind::Malformed) == 2);
    CHECK(exit_code_for(ErrorKind::Infeasible) == 2);
    CHECK(exit_code_for(ErrorKind::CapExceeded) == 3);
    CHECK(exit_code_for(ErrorKind::CertificateFailure) == 4);
    CHECK(exit_code_for(ErrorKind::NoSubtreeFound) == 4);
    CHECK(exit_code_for(ErrorKind::Internal) == 1);
}

TEST_CASE("run_algo reproduces the star fixture across all algorithms") {
    TapInstance s = generate(1, opts_for(Profile::Star, 4));
    SolveParams params;

    AlgoRun exact = run_algo(s, "exact", params, false);
    CHECK(exact.cost == 2);
    CHECK(exact.observed_ratio == Rat(1));

    AlgoRun cutlp = run_algo(s, "cutlp", params, true);
    CHECK(cutlp.value == Rat(3, 2));
    CHECK(cutlp.detail["x"].size() == 3);
    CHECK(cutlp.detail["x"][0].get<std::string>() == "1/2");

    AlgoRun bunch = run_algo(s, "bunch3", params, false);
    CHECK(bunch.value == Rat(2));

    AlgoRun ug = run_algo(s, "unitgap", params, true);
    CHECK(ug.cost == 2);
    CHECK(ug.observed_ratio == Rat(4, 3));
    CHECK(ug.certified_ratio == Rat(28, 15));
    CHECK(ug.baseline == "cutLpOpt");
    CHECK(ug.has_certificate);
    CHECK(ug.certificate_pass);
    CHECK(ug.exit_code == 0);
    CHECK(ug.detail["certificate"]["pass"].get<bool>());

    AlgoRun ugb = run_algo(s, "unitgap-bunch", params, false);
    CHECK(ugb.cost == 2);
    CHECK(ugb.observed_ratio == Rat(1));
    CHECK(ugb.certified_ratio == Rat(7, 4));

    AlgoRun kb = run_algo(s, "kbranch", params, false);
    CHECK(kb.cost == 2);
    CHECK(kb.observed_ratio == Rat(4, 3));
    CHECK(kb.certified_ratio.sign() > 0);

    AlgoRun outer = run_algo(s, "outer", params, false);
    CHECK(outer.cost == 2);

    AlgoRun d7 = run_algo(s, "diam7", params, false);
    CHECK(d7.cost == 2);
    CHECK(d7.observed_ratio == Rat(1));
    CHECK(d7.certified_ratio == Rat(3, 2));

    AlgoRun up = run_algo(s, "uplink2", params, false);
    CHECK(up.cost >= 2);
    CHECK(Rat(up.cost) <= Rat(2) * Rat(3, 2));
    CHECK(up.certified_ratio == Rat(2));

    CHECK_THROWS_AS(run_algo(s, "simulated-annealing", params, false), Error);
}

TEST_CASE("run_algo failure paths carry the right exit codes") {
    GenOptions o = opts_for(Profile::RandomTree, 8);
    o.max_cost = 3;
    TapInstance costly = generate(3, o);
    SolveParams params;
    try {
        run_algo(costly, "unitgap", params, false);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(exit_code_for(e.kind()) == 2); // unit costs required
    }

    GenOptions deep = opts_for(Profile::BoundedDiameter, 14);
    deep.diameter = 10;
    TapInstance wide = generate(11, deep);
    if (wide.diameter() > 7) {
        try {
            run_algo(wide, "diam7", params, false);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(exit_code_for(e.kind()) == 2);
        }
    }
}

TEST_CASE("evaluate_instance checks the sandwich inequalities") {
    SolveParams params;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        GenOptions o = opts_for(seed % 2 ? Profile::RandomTree : Profile::Caterpillar,
                                5 + static_cast<int>(seed % 6));
        o.max_cost = seed % 3 == 0 ? 3 : 1;
        TapInstance inst = generate(seed * 31, o);
        std::vector<std::string> algos{"exact", "uplink2"};
        if (o.max_cost == 1) algos.push_back("unitgap");
        GapReport rep = evaluate_instance(inst, static_cast<long long>(seed), algos, params);
        CHECK(rep.violations.empty());
        CHECK(rep.cut_lp_opt <= rep.kbranch_lp_opt);
        CHECK(rep.kbranch_lp_opt <= Rat(rep.exact_opt));
        CHECK(rep.cut_lp_opt <= rep.bunch3_lp_opt);
        CHECK(rep.bunch3_lp_opt <= Rat(rep.exact_opt));
        for (const AlgoRun& run : rep.algos) {
            CHECK(run.ok);
            if (run.cost >= 0) CHECK(run.cost >= rep.exact_opt);
        }
        nlohmann::json j = rep.to_json();
        CHECK(j["exactOpt"].get<long long>() == rep.exact_opt);
        CHECK(j["algorithms"].size() == algos.size());
    }
}

TEST_CASE("run_suite: empty config yields an empty passing report") {
    SuiteResult res = run_suite(nlohmann::json{{"groups", nlohmann::json::array()}});
    CHECK(res.pass);
    CHECK(res.report["reports"].empty());
    CHECK(res.report["summary"]["instances"].get<int>() == 0);
    CHECK(res.report["summary"]["pass"].get<bool>());
}

TEST_CASE("run_suite: a star-only suite reproduces the fixture numbers") {
    nlohmann::json config{
        {"seed", 9},
        {"groups",
         {{{"profile", "star"},
           {"n", 4},
           {"count", 2},
           {"algos", {"exact", "cutlp", "bunch3", "unitgap", "unitgap-bunch"}}}}}};
    SuiteResult res = run_suite(config);
    CHECK(res.pass);
    REQUIRE(res.report["reports"].size() == 2);
    for (const auto& rep : res.report["reports"]) {
        CHECK(rep["exactOpt"].get<long long>() == 2);
        CHECK(rep["cutLpOpt"].get<std::string>() == "3/2");
        CHECK(rep["bunch3LpOpt"].get<std::string>() == "2");
        CHECK(rep["violations"].empty());
    }
    const auto& summary = res.report["summary"];
    CHECK(summary["perAlgo"]["unitgap"]["maxObservedRatio"].get<std::string>() == "4/3");
    CHECK(summary["perAlgo"]["unitgap"]["certificateFailures"].get<int>() == 0);
    CHECK(summary["perAlgo"]["unitgap-bunch"]["maxObservedRatio"].get<std::string>() == "1");
}

TEST_CASE("run_suite: reports are ordered and byte-identical across runs") {
    nlohmann::json config{
        {"seed", 42},
        {"k", 6},
        {"lambda", "2"},
        {"groups",
         {{{"profile", "random-tree"}, {"n", 7}, {"count", 3}},
          {{"profile", "spider"}, {"n", 8}, {"count", 2}, {"maxCost", 2},
           {"algos", {"exact", "cutlp", "kbranch", "uplink2"}}}}}};
    SuiteResult a = run_suite(config);
    SuiteResult b = run_suite(config);
    CHECK(a.pass);
    CHECK(a.report.dump() == b.report.dump());
    long long prev = -1;
    for (const auto& rep : a.report["reports"]) {
        long long id = rep["instanceId"].get<long long>();
        CHECK(id > prev);
        prev = id;
    }
    CHECK(prev == 4);
}

TEST_CASE("run_suite records failures but keeps going") {
    // unitgap demands unit costs; a maxCost 3 group must fail on it yet still
    // produce all reports.
    nlohmann::json config{
        {"seed", 3},
        {"groups",
         {{{"profile", "random-tree"},
           {"n", 6},
           {"count", 2},
           {"maxCost", 3},
           {"algos", {"exact", "unitgap"}}}}}};
    SuiteResult res = run_suite(config);
    CHECK_FALSE(res.pass);
    CHECK(res.report["reports"].size() == 2);
    CHECK(res.report["summary"]["perAlgo"]["unitgap"]["failures"].get<int>() == 2);
    CHECK(res.report["summary"]["perAlgo"]["exact"]["failures"].get<int>() == 0);
    for (const auto& rep : res.report["reports"]) {
        const auto& runs = rep["algorithms"];
        REQUIRE(runs.size() == 2);
        CHECK(runs[1]["ok"].get<bool>() == false);
        CHECK(runs[1]["exitCode"].get<int>() == 2);
    }
}
