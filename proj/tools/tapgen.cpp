// tapgen: write a generated instance (JSON) to a file or stdout.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tap/gen.hpp"
#include "tap/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tap instance generator"};
    std::uint64_t seed = 1;
    std::string profile = "random-tree";
    std::string out_path = "-";
    std::string dot_path;
    tap::GenOptions opts;
    app.add_option("--seed", seed, "generator seed")->capture_default_str();
    app.add_option("--profile", profile,
                   "random-tree | star | caterpillar | spider | bounded-diameter")
        ->capture_default_str();
    app.add_option("--n", opts.n, "number of nodes (2..64)")->capture_default_str();
    app.add_option("--links", opts.num_links, "random link draws (-1: 2*n)")
        ->capture_default_str();
    app.add_option("--diameter", opts.diameter, "diameter bound (bounded-diameter profile)")
        ->capture_default_str();
    app.add_option("--max-cost", opts.max_cost, "costs drawn from 1..max-cost (1: unit)")
        ->capture_default_str();
    app.add_option("--out", out_path, "output file ('-': stdout)")->capture_default_str();
    app.add_option("--dot", dot_path, "also write a Graphviz rendering here");
    CLI11_PARSE(app, argc, argv);

    try {
        opts.profile = tap::profile_from_name(profile);
        tap::TapInstance inst = tap::generate(seed, opts);
        const std::string text = inst.to_json_text();
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
        if (!dot_path.empty()) {
            std::ofstream dot(dot_path);
            if (!dot) {
                std::cerr << "cannot open '" << dot_path << "' for writing\n";
                return 1;
            }
            dot << inst.to_dot();
        }
    } catch (const tap::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return tap::exit_code_for(e.kind());
    }
    return 0;
}
