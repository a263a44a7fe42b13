// tapsuite: generate and evaluate a whole benchmark suite from a JSON config.
// Exit 0 iff every run succeeded and every sandwich inequality held.
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tap/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tap benchmark suite driver"};
    std::string config_path;
    std::string out_path = "-";
    app.add_option("--config", config_path, "suite config (JSON)")->required();
    app.add_option("--out", out_path, "report file ('-': stdout)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "cannot open '" << config_path << "'\n";
            return 2;
        }
        nlohmann::json config = nlohmann::json::parse(in, nullptr, true);
        tap::SuiteResult res = tap::run_suite(config);
        const std::string text = res.report.dump(2) + "\n";
        if (out_path == "-") {
            std::cout << text;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "cannot open '" << out_path << "' for writing\n";
                return 1;
            }
            out << text;
        }
        std::cerr << (res.pass ? "suite passed" : "suite FAILED") << "\n";
        return res.pass ? 0 : 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        return 2;
    } catch (const tap::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return tap::exit_code_for(e.kind());
    }
}
