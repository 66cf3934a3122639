#include "cavelast/numerics.hpp"
#include "cavelast/radial.hpp"
#include "cavelast/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

std::set<std::string> parse_emit(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item == "none") continue;
        if (item != "svg" && item != "csv" && item != "raster" && item != "inverse")
            throw cavelast::ArgumentError("--emit accepts svg, csv, raster, inverse; got '" + item + "'");
        out.insert(item);
    }
    return out;
}

int report(const cavelast::RunOutcome& r) {
    if (r.exit_code == 0 || r.exit_code == 3) {
        std::cout << "directory = " << r.directory << "\n";
        for (const char* k : {"solver.status", "energy.total", "energy.bulk", "energy.surface", "inv.pass"})
            if (auto it = r.summary.find(k); it != r.summary.end()) std::cout << k << " = " << it->second << "\n";
    }
    if (r.exit_code != 0) std::cerr << "cavelast: " << r.message << "\n";
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavitation energy minimization with anisotropic surface energy"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0 = hardware default)");

    std::string config, out, emit, dir_a, dir_b, lambdas = "1.0,1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8";
    int M = 128;

    auto* run = app.add_subcommand("run", "Minimize the scenario energy and write a run directory");
    run->add_option("config", config, "Scenario file")->required();
    run->add_option("--out", out, "Output directory (overrides [output] directory)");
    run->add_option("--emit", emit, "Comma list of svg,csv,raster,inverse");

    auto* eval = app.add_subcommand("eval", "Evaluate the initial deformation without minimizing");
    eval->add_option("config", config, "Scenario file")->required();
    eval->add_option("--out", out, "Output directory");
    eval->add_option("--emit", emit, "Comma list of svg,csv,raster,inverse");

    auto* compare = app.add_subcommand("compare", "Compare two run directories");
    compare->add_option("dir_a", dir_a, "Run A")->required();
    compare->add_option("dir_b", dir_b, "Run B")->required();

    auto* sweep = app.add_subcommand("sweep", "Radial solutions over a list of boundary stretches");
    sweep->add_option("config", config, "Scenario file providing material, surface and geometry")->required();
    sweep->add_option("--lambdas", lambdas, "Comma list of stretches");
    sweep->add_option("--M", M, "Number of radial intervals");
    sweep->add_option("--out", out, "CSV file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; malformed arguments exit 2.
        return app.exit(e) == 0 ? 0 : 2;
    }
    cavelast::set_max_threads(threads);

    try {
        if (run->parsed() || eval->parsed()) {
            cavelast::RunRequest req;
            req.config_path = config;
            req.evaluate_only = eval->parsed();
            if (!out.empty()) req.out_dir = out;
            if (!emit.empty()) req.emit = parse_emit(emit);
            return report(cavelast::run_scenario(req));
        }
        if (compare->parsed()) {
            const auto rep = cavelast::compare_runs(dir_a, dir_b);
            std::cout << rep.table;
            if (rep.alarm) std::cerr << "cavelast: minimality alarm: run A beats run B on B's functional\n";
            return 0;
        }
        if (sweep->parsed()) {
            const cavelast::ScenarioConfig c = cavelast::load_config(config);
            cavelast::validate_config(c);
            if (c.punctures.empty()) throw cavelast::ConfigError("domain.punctures", 0, "sweep needs a puncture");
            std::vector<double> ls;
            std::stringstream ss(lambdas);
            std::string item;
            while (std::getline(ss, item, ',')) ls.push_back(cavelast::parse_double(item));
            cavelast::RadialOptions o;
            o.M = M;
            o.r_out = c.radius;
            const auto rows = cavelast::radial_sweep(ls, cavelast::build_bulk(c), cavelast::build_surface(c),
                                                     c.punctures[0].radius, o);
            if (out.empty()) {
                cavelast::write_sweep_csv(std::cout, rows);
            } else {
                std::ofstream os(out);
                if (!os) throw cavelast::Error("cannot write " + out);
                cavelast::write_sweep_csv(os, rows);
            }
            return 0;
        }
    } catch (const cavelast::ConfigError& e) {
        std::cerr << "cavelast: " << e.what() << "\n";
        return 2;
    } catch (const cavelast::ArgumentError& e) {
        std::cerr << "cavelast: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "cavelast: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
