// tapsolve: run one algorithm on an instance file and print a JSON report.
// Exit codes: 0 success, 2 malformed/infeasible, 3 cap exceeded, 4 certificate
// failure, 1 internal error.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tap/instance.hpp"
#include "tap/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tap single-instance solver"};
    std::string algo = "exact";
    std::string file;
    std::string lambda = "2";
    tap::SolveParams params;
    bool brief = false;
    app.add_option("--algo", algo,
                   "exact | cutlp | kbranch | bunch3 | outer | unitgap | unitgap-bunch | "
                   "diam7 | uplink2")
        ->capture_default_str();
    app.add_option("--k", params.k, "k-branch threshold")->capture_default_str();
    app.add_option("--lambda", lambda, "thickness threshold (rational, e.g. 2 or 5/2)")
        ->capture_default_str();
    app.add_flag("--brief", brief, "omit solution vectors and traces");
    app.add_option("file", file, "instance file")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        params.lambda = tap::Rat::parse(lambda);
        tap::TapInstance inst = tap::TapInstance::from_file(file);
        tap::AlgoRun run = tap::run_algo(inst, algo, params, !brief);
        nlohmann::json out = run.to_json();
        out["file"] = file;
        out["n"] = inst.n();
        out["maxCost"] = inst.max_cost();
        std::cout << out.dump(2) << "\n";
        return run.exit_code;
    } catch (const tap::Error& e) {
        nlohmann::json out{{"file", file}, {"algo", algo}, {"ok", false}, {"error", e.what()}};
        std::cout << out.dump(2) << "\n";
        return tap::exit_code_for(e.kind());
    }
}
