#include "cavelast/numerics.hpp"
#include "cavelast/scenario.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cavelast;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = CAVELAST_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cavelast_test_scenario_" + name);
    fs::remove_all(p);
    return p;
}

ScenarioConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

std::string small_radial(double lambda, int max_iters = 300, const std::string& extra = "") {
    std::ostringstream os;
    os << "[scenario]\nname = small\nmode = minimize\n"
       << "[domain]\nshape = disk\nradius = 1\nmesh = structured\nn_theta = 24\npunctures = 0 0 0.1\n"
       << "[material]\nmu = 2\na = 2\nb = 2\np = 1.5\n"
       << "[boundary]\nkind = radial_stretch\nlambda = " << lambda << "\n"
       << "[initial]\nkind = radial_seed\nseed_radius = 0.8\n"
       << "[solver]\nmax_iters = " << max_iters << "\ntol_energy = 1e-8\n" << extra;
    return os.str();
}

} // namespace

TEST_CASE("bundled scenarios parse, validate and round trip") {
    for (const auto& entry : fs::directory_iterator(kScenarios)) {
        if (entry.path().extension() != ".ini") continue;
        CAPTURE(entry.path().string());
        const ScenarioConfig c = load_config(entry.path().string());
        CHECK_NOTHROW(validate_config(c));
        const std::string text = serialize_config(c);
        const ScenarioConfig back = parse(text);
        CHECK(serialize_config(back) == text);
    }
    const ScenarioConfig c = load_config(kScenarios + "/radial_elliptic_lambda1.5.ini");
    CHECK(c.surface == "elliptic");
    CHECK(c.A(0, 0) == 4.0);
    CHECK(c.A(1, 1) == 1.0);
    CHECK(c.lambda == 1.5);
    REQUIRE(c.punctures.size() == 1);
    CHECK(c.punctures[0].radius == 0.1);
}

TEST_CASE("config errors name the key and line") {
    try {
        parse("[scenario]\nname = x\n[solver]\nmax_iters = lots\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 4);
        CHECK(e.key().find("max_iters") != std::string::npos);
    }
    try {
        parse("[scenario]\nname = x\n[domain]\nwobble = 3\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 4);
        CHECK(e.key().find("wobble") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("just text\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);

    ScenarioConfig c = parse(small_radial(1.5));
    CHECK_NOTHROW(validate_config(c));
    c.punctures[0].radius = 0.3; // inradius / 4 = 0.25
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = parse(small_radial(1.5));
    c.tol_energy = 0.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = parse(small_radial(1.5));
    c.punctures[0].center = Vec2(2.0, 0.0);
    CHECK_THROWS_AS(validate_config(c), ConfigError);
}

TEST_CASE("builders") {
    const ScenarioConfig c = load_config(kScenarios + "/radial_iso_lambda1.5.ini");
    const auto mesh = build_mesh(c);
    CHECK(mesh->punctures().size() == 1);
    CHECK(build_bulk(c).energy(Mat2::Identity()) == doctest::Approx(oracle::default_density(2, 2, 2, 1.5, Mat2::Identity())));
    CHECK(build_surface(c).value(Vec2(1, 0)) == 1.0);
    CHECK((build_boundary(c)(Vec2(1, 0)) - Vec2(1.5, 0)).norm() < 1e-15);
    const DeformationField y = build_initial(c, mesh);
    CHECK(min_det(y).value > 0.0);
    for (int v = 0; v < mesh->num_vertices(); ++v)
        if (mesh->is_dirichlet(v)) CHECK((y.positions()[v] - 1.5 * mesh->vertices()[v]).norm() < 1e-12);
    const MinimizeOptions o = build_solver(c);
    CHECK(o.max_iters == 20000);
    CHECK(o.tol_energy == 1e-11);

    ScenarioConfig two = load_config(kScenarios + "/two_cavity.ini");
    two.seed_radius = 5.0;
    CHECK_THROWS_AS(build_initial(two, build_mesh(two)), ConfigError);
}

TEST_CASE("export formats round trip") {
    CHECK(format_double(0.1) == "0.1");
    for (double v : {0.0, -1.5, 1e-300, 3.141592653589793, 6.02e23}) CHECK(parse_double(format_double(v)) == v);
    CHECK_THROWS(parse_double("abc"));

    Summary s{{"energy.total", "1.5"}, {"scenario.name", "x y"}};
    CHECK(parse_summary(format_summary(s)) == s);

    const auto mesh = std::make_shared<const Mesh>(annulus_mesh(Vec2::Zero(), 0.1, 1.0, 16));
    const DeformationField y =
        DeformationField::from_map(mesh, [](const Vec2& x) { return oracle::radial_cavitation(x, 0.3); });
    const DeformationField back = parse_deformation_csv(deformation_csv(y), mesh);
    CHECK(back.positions() == y.positions());

    const std::vector<Polyline> cav = {cavity_boundary(y, 0), oracle::regular_polygon(Vec2(3, 3), 0.5, 7, 1)};
    CHECK(parse_cavities_csv(cavities_csv(cav)) == cav);

    const std::string it = iterations_csv({{0, 2.0, 1.5, 0.5, 0.9, 0.0, 0.1}, {1, 1.9, 1.5, 0.4, 0.8, 0.01, 0.05}});
    CHECK(it.rfind("iter,", 0) == 0);
    CHECK(std::count(it.begin(), it.end(), '\n') == 3);
}

TEST_CASE("run directory and figure") {
    const fs::path dir = scratch("run");
    fs::create_directories(dir);
    const fs::path ini = dir / "small.ini";
    {
        std::ofstream f(ini);
        f << small_radial(1.5);
    }
    RunRequest req;
    req.config_path = ini.string();
    req.out_dir = (dir / "out").string();
    req.emit = std::set<std::string>{"svg", "csv", "raster", "inverse"};
    const RunOutcome r = run_scenario(req);
    REQUIRE(r.exit_code == 0);
    for (const char* name : {"summary.txt", "config.ini", "deformation.csv", "cavities.csv", "mesh.cavmesh",
                             "iterations.csv", "figure.svg", "degree.pgm", "inverse.csv", "jump_set.csv"})
        CHECK(fs::exists(dir / "out" / name));
    CHECK(r.summary.at("scenario.name") == "small");
    CHECK(r.summary.at("inv.pass") == "1");
    CHECK(parse_summary(read_text((dir / "out" / "summary.txt").string())) == r.summary);

    // The figure depends only on the three exports.
    const fs::path copy = dir / "copy";
    fs::create_directories(copy);
    for (const char* name : {"mesh.cavmesh", "deformation.csv", "cavities.csv"})
        fs::copy_file(dir / "out" / name, copy / name);
    const std::string svg = render_svg_from_exports(copy.string());
    CHECK(svg == read_text((dir / "out" / "figure.svg").string()));
    CHECK(svg.find("<svg") != std::string::npos);
    fs::remove(copy / "cavities.csv");
    CHECK_THROWS(render_svg_from_exports(copy.string()));

    // Evaluation-only runs skip the solver.
    req.evaluate_only = true;
    req.out_dir = (dir / "eval").string();
    const RunOutcome e = run_scenario(req);
    CHECK(e.exit_code == 0);
    CHECK(e.summary.count("solver.iterations") == 0);
    CHECK_FALSE(fs::exists(dir / "eval" / "iterations.csv"));

    // Bad input maps to exit code 2.
    {
        std::ofstream f(dir / "bad.ini");
        f << "[domain]\nshape = hexagon\n";
    }
    req.config_path = (dir / "bad.ini").string();
    req.evaluate_only = false;
    const RunOutcome bad = run_scenario(req);
    CHECK(bad.exit_code == 2);
    CHECK(bad.message.find("shape") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("runs do not depend on the thread count") {
    const fs::path dir = scratch("threads");
    fs::create_directories(dir);
    const fs::path ini = dir / "small.ini";
    {
        std::ofstream f(ini);
        f << small_radial(1.4, 300, "[output]\nemit = csv\n");
    }
    auto run = [&](unsigned threads, const std::string& out) {
        set_max_threads(threads);
        RunRequest req;
        req.config_path = ini.string();
        req.out_dir = (dir / out).string();
        const RunOutcome r = run_scenario(req);
        set_max_threads(0);
        REQUIRE(r.exit_code == 0);
        return read_text((dir / out / "deformation.csv").string());
    };
    CHECK(run(1, "one") == run(4, "four"));
    fs::remove_all(dir);
}

TEST_CASE("compare runs") {
    const fs::path dir = scratch("compare");
    fs::create_directories(dir);
    auto run = [&](const std::string& name, const std::string& text) {
        const fs::path ini = dir / (name + ".ini");
        {
            std::ofstream f(ini);
            f << text;
        }
        RunRequest req;
        req.config_path = ini.string();
        req.out_dir = (dir / name).string();
        req.emit = std::set<std::string>{"csv"};
        REQUIRE(run_scenario(req).exit_code == 0);
        return (dir / name).string();
    };
    const std::string a = run("a", small_radial(1.5));
    const CompareReport same = compare_runs(a, a);
    CHECK_FALSE(same.alarm);
    CHECK(same.same_boundary);
    CHECK(same.energy_a_under_b == doctest::Approx(same.energy_b).epsilon(1e-12));
    CHECK(same.table.find("energy.total") != std::string::npos);

    // A truncated run B is beaten by a converged A on B's own functional.
    const std::string b = run("b", small_radial(1.5, 1));
    const CompareReport trunc = compare_runs(a, b);
    CHECK(trunc.same_boundary);
    CHECK(trunc.alarm);

    const std::string c = run("c", small_radial(1.3));
    CHECK_FALSE(compare_runs(a, c).same_boundary);
    CHECK_FALSE(compare_runs(a, c).alarm);
    CHECK_THROWS(compare_runs(a, (dir / "missing").string()));
    fs::remove_all(dir);
}
