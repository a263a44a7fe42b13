#include "tap/report.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "tap/bounded.hpp"
#include "tap/gen.hpp"
#include "tap/lp.hpp"
#include "tap/oracle.hpp"
#include "tap/unitgap.hpp"

namespace tap {

namespace {

Rat cut_lp_opt(const TapInstance& inst) { return solve_lp(build_cut_lp(inst)).objective; }

long long cover_cost(const TapInstance& inst, const std::vector<int>& links) {
    long long total = 0;
    for (int e : links) total += inst.link(e).cost;
    return total;
}

CostMode auto_mode(const TapInstance& inst) {
    return inst.unit_costs() ? CostMode::Unit : CostMode::General;
}

PipelineParams pipeline_params(const TapInstance& inst, const SolveParams& params) {
    PipelineParams p;
    p.k = params.k;
    p.lambda = params.lambda;
    p.mode = auto_mode(inst);
    return p;
}

void run_exact(const TapInstance& inst, AlgoRun& out, bool with_detail) {
    ExactResult r = solve_exact(inst);
    out.cost = r.cost;
    out.value = Rat(r.cost);
    out.observed_ratio = Rat(1);
    out.certified_ratio = Rat(1);
    out.baseline = "exactOpt";
    if (with_detail) out.detail["links"] = r.links;
}

void run_cutlp(const TapInstance& inst, AlgoRun& out, bool with_detail) {
    LpSolution sol = solve_lp(build_cut_lp(inst));
    out.value = sol.objective;
    if (with_detail) {
        nlohmann::json x = nlohmann::json::array();
        for (const Rat& xe : sol.x) x.push_back(xe.str());
        out.detail["x"] = std::move(x);
        out.detail["pivots"] = sol.pivots;
    }
}

void run_kbranch(const TapInstance& inst, AlgoRun& out, const SolveParams& params,
                 bool with_detail) {
    PipelineParams p = pipeline_params(inst, params);
    DriverResult dr = lazy_kbranch_driver(inst, p);
    out.cost = dr.cost;
    out.value = Rat(dr.cost);
    out.observed_ratio = dr.ratio;
    out.baseline = "driverLp";
    if (Rat(p.k) > p.lambda * Rat(inst.max_cost()))
        out.certified_ratio = pipeline_bound(p, inst.max_cost());
    out.detail["lpValue"] = dr.lp_value.str();
    out.detail["rowsAdded"] = dr.rows_added;
    out.detail["mode"] = p.mode == CostMode::Unit ? "unit" : "general";
    if (with_detail) out.detail["trace"] = dr.trace;
}

void run_bunch3(const TapInstance& inst, AlgoRun& out, bool with_detail) {
    Bunch3Result br = solve_bunch3_lazy(inst);
    out.value = br.sol.objective;
    out.detail["rounds"] = br.rounds;
    out.detail["activeBunches"] = br.active_bunches.size();
    if (with_detail) {
        nlohmann::json x = nlohmann::json::array();
        for (const Rat& xe : br.sol.x) x.push_back(xe.str());
        out.detail["x"] = std::move(x);
    }
}

void run_outer(const TapInstance& inst, AlgoRun& out, const SolveParams& params,
               bool with_detail) {
    PipelineParams p = pipeline_params(inst, params);
    LpSolution sol = solve_lp(build_cut_lp(inst));
    OuterResult res = outer_iteration(inst, sol.x, p);
    if (with_detail) out.detail["trace"] = res.trace;
    if (res.outcome.violated) {
        const ViolatedBranch& vb = *res.outcome.violated;
        out.detail["violatedBranch"] = {{"top", inst.id_of(vb.branch.top)},
                                        {"lhs", vb.lhs.str()},
                                        {"tau", vb.rhs}};
        return;
    }
    out.cost = res.outcome.cost;
    out.value = Rat(res.outcome.cost);
    out.observed_ratio = Rat(res.outcome.cost) / sol.objective;
    out.baseline = "cutLpOpt";
    if (Rat(p.k) > p.lambda * Rat(inst.max_cost()))
        out.certified_ratio = pipeline_bound(p, inst.max_cost());
}

void run_unitgap(const TapInstance& inst, AlgoRun& out, DualMode mode, bool with_detail) {
    UnitGapResult ug = iterative_contraction(inst);
    Rat lp = mode == DualMode::Cut2815 ? cut_lp_opt(inst) : solve_bunch3_lazy(inst).sol.objective;
    out.cost = ug.cost;
    out.value = Rat(ug.cost);
    out.observed_ratio = Rat(ug.cost) / lp;
    out.certified_ratio = dual_rho(mode);
    out.baseline = mode == DualMode::Cut2815 ? "cutLpOpt" : "bunch3LpOpt";
    out.detail["closedCount"] = ug.closed_count;
    out.has_certificate = true;
    // The ratio bound is the theorem under test; it must hold whether or not
    // the dual certificate below can be reconstructed.
    check(Rat(ug.closed_count) <= dual_rho(mode) * lp,
          "iterative contraction exceeded its certified ratio");
    try {
        DualCertificate cert = build_dual(ug.trace, mode);
        CertificateReport cr = check_certificate(ug.trace, cert);
        out.certificate_pass = cr.pass;
        out.detail["dualValue"] = cr.dual_value.str();
        if (with_detail) out.detail["certificate"] = cr.dump;
        if (!cr.pass) out.exit_code = 4;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::CertificateFailure) throw;
        out.certificate_pass = false;
        out.exit_code = 4;
        out.detail["certificateError"] = e.what();
    }
}

void run_diam7(const TapInstance& inst, AlgoRun& out, bool with_detail) {
    DiamResult d = solve_diameter_le7(inst);
    out.cost = d.cost;
    out.value = Rat(d.cost);
    out.observed_ratio = d.ratio;
    out.certified_ratio = d.certified;
    out.baseline = "exactOpt";
    out.detail["exact"] = d.exact;
    if (with_detail) out.detail["links"] = d.links;
}

void run_uplink2(const TapInstance& inst, AlgoRun& out, bool with_detail) {
    std::vector<long long> ids(inst.n());
    std::vector<int> parent(inst.n());
    for (int v = 0; v < inst.n(); ++v) {
        ids[v] = inst.id_of(v);
        parent[v] = inst.parent(v);
    }
    std::vector<Link> shadows;
    std::vector<int> src;
    for (int e = 0; e < inst.num_links(); ++e) {
        const Link& l = inst.link(e);
        int w = inst.lca(l.u, l.v);
        if (l.u != w) {
            shadows.push_back({l.u, w, l.cost});
            src.push_back(e);
        }
        if (l.v != w) {
            shadows.push_back({l.v, w, l.cost});
            src.push_back(e);
        }
    }
    TapInstance up = TapInstance::build(std::move(ids), inst.root(), std::move(parent),
                                        std::move(shadows));
    ExactResult r = solve_uplink_cover(up, up.all_edges());
    std::set<int> chosen;
    for (int e : r.links) chosen.insert(src[e]);
    std::vector<int> links(chosen.begin(), chosen.end());
    check(covers(inst, links, inst.all_edges()), "up-shadow cover misses a tree edge");
    Rat lp = cut_lp_opt(inst);
    out.cost = cover_cost(inst, links);
    out.value = Rat(out.cost);
    out.observed_ratio = Rat(out.cost) / lp;
    out.certified_ratio = Rat(2);
    out.baseline = "cutLpOpt";
    out.detail["shadowCost"] = r.cost;
    if (with_detail) out.detail["links"] = links;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t instance_id) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (instance_id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Malformed:
        case ErrorKind::Infeasible: return 2;
        case ErrorKind::CapExceeded: return 3;
        case ErrorKind::CertificateFailure:
        case ErrorKind::NoSubtreeFound: return 4;
        case ErrorKind::Internal: return 1;
    }
    return 1;
}

nlohmann::json AlgoRun::to_json() const {
    nlohmann::json j{{"algo", algo}, {"ok", ok}};
    if (!ok) {
        j["error"] = error;
        j["exitCode"] = exit_code;
        return j;
    }
    j["value"] = value.str();
    if (cost >= 0) j["cost"] = cost;
    if (observed_ratio.sign() > 0) j["observedRatio"] = observed_ratio.str();
    if (certified_ratio.sign() > 0) j["certifiedRatio"] = certified_ratio.str();
    if (!baseline.empty()) j["baseline"] = baseline;
    if (has_certificate) j["certificatePass"] = certificate_pass;
    if (exit_code != 0) j["exitCode"] = exit_code;
    if (!detail.is_null()) j["detail"] = detail;
    return j;
}

nlohmann::json GapReport::to_json() const {
    nlohmann::json j{{"instanceId", instance_id},
                     {"n", n},
                     {"leafCount", leaf_count},
                     {"diameter", diameter},
                     {"maxCost", max_cost},
                     {"exactOpt", exact_opt},
                     {"cutLpOpt", cut_lp_opt.str()},
                     {"kBranchLpOpt", kbranch_lp_opt.str()},
                     {"bunch3LpOpt", bunch3_lp_opt.str()}};
    nlohmann::json runs = nlohmann::json::array();
    for (const AlgoRun& run : algos) runs.push_back(run.to_json());
    j["algorithms"] = std::move(runs);
    j["violations"] = violations;
    return j;
}

AlgoRun run_algo(const TapInstance& inst, const std::string& algo, const SolveParams& params,
                 bool with_detail) {
    AlgoRun out;
    out.algo = algo;
    if (algo == "exact") run_exact(inst, out, with_detail);
    else if (algo == "cutlp") run_cutlp(inst, out, with_detail);
    else if (algo == "kbranch") run_kbranch(inst, out, params, with_detail);
    else if (algo == "bunch3") run_bunch3(inst, out, with_detail);
    else if (algo == "outer") run_outer(inst, out, params, with_detail);
    else if (algo == "unitgap") run_unitgap(inst, out, DualMode::Cut2815, with_detail);
    else if (algo == "unitgap-bunch") run_unitgap(inst, out, DualMode::Bunch74, with_detail);
    else if (algo == "diam7") run_diam7(inst, out, with_detail);
    else if (algo == "uplink2") run_uplink2(inst, out, with_detail);
    else fail(ErrorKind::Malformed, "unknown algorithm '" + algo + "'");
    if (out.observed_ratio.sign() > 0 && out.certified_ratio.sign() > 0)
        check(out.observed_ratio <= out.certified_ratio,
              algo + " observed ratio exceeds its certified bound");
    out.ok = true;
    return out;
}

GapReport evaluate_instance(const TapInstance& inst, long long instance_id,
                            const std::vector<std::string>& algos, const SolveParams& params) {
    GapReport rep;
    rep.instance_id = instance_id;
    rep.n = inst.n();
    rep.leaf_count = inst.leaf_count();
    rep.diameter = inst.diameter();
    rep.max_cost = inst.max_cost();
    rep.exact_opt = solve_exact(inst).cost;
    rep.cut_lp_opt = cut_lp_opt(inst);
    rep.kbranch_lp_opt = solve_lp(build_kbranch_lp(inst, params.k).model).objective;
    rep.bunch3_lp_opt = solve_bunch3_lazy(inst).sol.objective;

    const Rat exact(rep.exact_opt);
    if (!(rep.cut_lp_opt <= rep.kbranch_lp_opt && rep.kbranch_lp_opt <= exact))
        rep.violations.push_back("cutLpOpt <= kBranchLpOpt <= exactOpt violated");
    if (!(rep.cut_lp_opt <= rep.bunch3_lp_opt && rep.bunch3_lp_opt <= exact))
        rep.violations.push_back("cutLpOpt <= bunch3LpOpt <= exactOpt violated");

    for (const std::string& algo : algos) {
        AlgoRun run;
        try {
            run = run_algo(inst, algo, params, false);
        } catch (const Error& e) {
            run.algo = algo;
            run.ok = false;
            run.error = e.what();
            run.exit_code = exit_code_for(e.kind());
        }
        if (run.ok && run.cost >= 0 && run.cost < rep.exact_opt)
            rep.violations.push_back(algo + " returned cost below the exact optimum");
        rep.algos.push_back(std::move(run));
    }
    return rep;
}

SuiteResult run_suite(const nlohmann::json& config) {
    SolveParams params;
    const std::uint64_t seed = config.value("seed", std::uint64_t{1});
    params.k = config.value("k", 6);
    params.lambda = Rat::parse(config.value("lambda", std::string("2")));

    struct Agg {
        long long runs = 0;
        long long failures = 0;
        long long certificate_failures = 0;
        Rat max_observed;
        bool any_observed = false;
    };
    std::map<std::string, Agg> agg;
    std::vector<std::string> violations;
    nlohmann::json reports = nlohmann::json::array();
    long long instance_id = 0;
    bool all_ok = true;

    for (const nlohmann::json& group : config.value("groups", nlohmann::json::array())) {
        GenOptions opts;
        opts.profile = profile_from_name(group.value("profile", std::string("random-tree")));
        opts.n = group.value("n", 10);
        opts.num_links = group.value("links", -1);
        opts.diameter = group.value("diameter", 5);
        opts.max_cost = group.value("maxCost", std::int64_t{1});
        const int count = group.value("count", 1);

        std::vector<std::string> algos;
        if (group.contains("algos")) {
            algos = group["algos"].get<std::vector<std::string>>();
        } else {
            algos = {"exact", "cutlp", "kbranch", "bunch3"};
            if (opts.max_cost == 1) {
                algos.push_back("unitgap");
                algos.push_back("unitgap-bunch");
            }
        }

        for (int i = 0; i < count; ++i, ++instance_id) {
            TapInstance inst = generate(mix_seed(seed, static_cast<std::uint64_t>(instance_id)), opts);
            GapReport rep;
            try {
                rep = evaluate_instance(inst, instance_id, algos, params);
            } catch (const Error& e) {
                all_ok = false;
                violations.push_back("instance " + std::to_string(instance_id) +
                                     ": evaluation failed: " + e.what());
                reports.push_back({{"instanceId", instance_id}, {"error", e.what()}});
                continue;
            }
            for (const AlgoRun& run : rep.algos) {
                Agg& a = agg[run.algo];
                ++a.runs;
                if (!run.ok) {
                    ++a.failures;
                    all_ok = false;
                }
                if (run.has_certificate && !run.certificate_pass) ++a.certificate_failures;
                if (run.ok && run.observed_ratio.sign() > 0) {
                    a.max_observed = a.any_observed ? rat_max(a.max_observed, run.observed_ratio)
                                                    : run.observed_ratio;
                    a.any_observed = true;
                }
            }
            for (const std::string& v : rep.violations) {
                all_ok = false;
                violations.push_back("instance " + std::to_string(instance_id) + ": " + v);
            }
            reports.push_back(rep.to_json());
        }
    }

    nlohmann::json per_algo = nlohmann::json::object();
    for (const auto& [name, a] : agg) {
        nlohmann::json entry{{"runs", a.runs},
                             {"failures", a.failures},
                             {"certificateFailures", a.certificate_failures}};
        if (a.any_observed) entry["maxObservedRatio"] = a.max_observed.str();
        per_algo[name] = std::move(entry);
    }

    SuiteResult out;
    out.pass = all_ok;
    out.report = {{"reports", std::move(reports)},
                  {"summary", nlohmann::json{{"instances", instance_id},
                                             {"perAlgo", std::move(per_algo)},
                                             {"violations", violations},
                                             {"pass", all_ok}}}};
    return out;
}

} // namespace tap
