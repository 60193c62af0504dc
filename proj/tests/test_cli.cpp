#include "netrate/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace netrate;
namespace fs = std::filesystem;

namespace {

const char* kBenchPlant = R"([plant]
G11.num = 0 0 0.165
G11.den = 1 -2.5789 1.1578
G12.num = 0 0 0.165
G12.den = 1 -2.5789 1.1578
G21.num = 0 0 0.165
G21.den = 1 -2.5789 1.1578
G22.num = 0 0 0.165
G22.den = 1 -2.5789 1.1578
)";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("netrate_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    os << s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const char* exe = std::getenv("NETRATE_CLI");
    REQUIRE_MESSAGE(exe, "NETRATE_CLI not set");
    const std::string cmd = std::string(exe) + " " + args + " > " + log.string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string bench_config(const std::string& rest) { return std::string(kBenchPlant) + "\n" + rest; }

}  // namespace

TEST_CASE("parse_config") {
    const auto cfg = parse_config(bench_config("[delays]\nh = 0 2\n[grid]\nD = 5 10\n[seeds]\nnoise = 9\n"));
    CHECK(cfg.h == std::vector<int>{0, 2});
    CHECK(cfg.grid.values == std::vector<double>{5, 10});
    CHECK(cfg.seeds.noise == 9);
    CHECK(cfg.seeds.dither == 2);
    CHECK(cfg.plant.G22.den() == std::vector<double>{1, -2.5789, 1.1578});

    CHECK_THROWS_AS(parse_config(bench_config("[grid]\nDmax = 3\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(bench_config("[bogus]\nx = 1\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(bench_config("[delays]\nh = -1\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(bench_config("[delays]\nmode = random\nsupport = 0:0.5 1:0.4\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(bench_config("[sim]\nhorizon = 10\nburn_in = 5\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(bench_config("[grid]\nD = 5 x\n")), ConfigError);
    CHECK_THROWS_AS(parse_config("[plant]\nG11.num = 1\n"), ConfigError);
    // biproper G22 violates the plant assumptions
    CHECK_THROWS_AS(parse_config("[plant]\nG11.num = 1\nG11.den = 1\nG12.num = 1\nG12.den = 1\nG21.num = 1\n"
                                 "G21.den = 1\nG22.num = 1 0.5\nG22.den = 1 -0.5\n"),
                    ConfigError);
    try {
        parse_config(bench_config("[sim]\nhorizn = 5\n"));
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("horizn") != std::string::npos);
    }
}

TEST_CASE("config round trip") {
    const std::string texts[] = {
        bench_config("[delays]\nh = 0 1 2\n[grid]\nD = 4.7 10 50\n[sim]\nmargin = 0.07\nnoise = awgn\n"),
        bench_config("[delays]\nmode = random\nsupport = 0:0.25 1:0.25 2:0.5\n[grid]\nD_min = 6\nD_max = 40\n"
                     "D_count = 4\nspacing = log\n[solver]\nfir_order = 20\nadapt_decoder = false\n"),
        bench_config("[grid]\nD_min = auto\nD_count = 3\n[seeds]\nnoise = 18446744073709551615\n[output]\ndir = x/y\n"),
        "[plant]\nnz = 2\nnw = 2\nG11.0.0.num = 0 1\nG11.0.0.den = 1 -0.5\nG11.0.1.num = 0.3\nG11.0.1.den = 1\n"
        "G11.1.0.num = 0\nG11.1.0.den = 1\nG11.1.1.num = 0 0.1\nG11.1.1.den = 1 0.2\nG12.0.num = 0 1\n"
        "G12.0.den = 1 -0.5\nG12.1.num = 1\nG12.1.den = 1\nG21.0.num = 0 1\nG21.0.den = 1 -0.5\nG21.1.num = 1\n"
        "G21.1.den = 1\nG22.num = 0 1\nG22.den = 1 -0.5\n",
    };
    for (const auto& t : texts) {
        const ExperimentConfig a = parse_config(t);
        const std::string s = serialize_config(a);
        const ExperimentConfig b = parse_config(s);
        CHECK(a == b);
        CHECK(serialize_config(b) == s);
    }
}

TEST_CASE("plant file reference") {
    const fs::path dir = scratch("plantfile");
    write(dir / "p.ini", kBenchPlant);
    write(dir / "c.ini", "[plant]\nfile = p.ini\n[grid]\nD = 10\n");
    const ExperimentConfig c = load_config(dir / "c.ini");
    CHECK(c.plant_file == "p.ini");
    CHECK(c.plant.G12[0].num() == std::vector<double>{0, 0, 0.165});
    CHECK(parse_config(serialize_config(c), dir) == c);
    CHECK_THROWS_AS(load_config(dir / "missing.ini"), ConfigError);
}

TEST_CASE("d_grid") {
    ExperimentConfig c = parse_config(bench_config("[delays]\nh = 0 1 2\n[grid]\nD_min = auto\nD_max = 50\nD_count = 4\n"));
    const auto g = d_grid(c);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == doctest::Approx(1.05 * d_inf(c.plant, 2)));
    CHECK(g.back() == doctest::Approx(50));
    c = parse_config(bench_config("[grid]\nD_min = 2\nD_max = 32\nD_count = 5\nspacing = log\n"));
    const auto l = d_grid(c);
    CHECK(l[1] == doctest::Approx(4));
    CHECK(l[4] == doctest::Approx(32));
}

TEST_CASE("cmd_bounds writes an ordered table") {
    const fs::path dir = scratch("bounds");
    const ExperimentConfig cfg = parse_config(bench_config("[delays]\nh = 2 0 1\n[grid]\nD = 50 3 10\n"));
    CommandOptions opt;
    opt.out_dir = dir;
    opt.jobs = 2;
    CHECK(cmd_bounds(cfg, opt) == kExitOk);
    const CsvTable t = read_csv(dir / "bounds.csv");
    CHECK(t.header == std::vector<std::string>{"h", "D", "d_inf", "phi_prime", "rate_lb_bits", "rate_ub_bits",
                                               "solver_gap", "status"});
    REQUIRE(t.rows.size() == 9);
    const int ch = t.column("h"), cd = t.column("D"), cl = t.column("rate_lb_bits"), cu = t.column("rate_ub_bits"),
              cs = t.column("status");
    std::map<std::pair<int, double>, double> lb;
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        CHECK(std::stoi(r[ch]) == static_cast<int>(i / 3));
        if (r[cs] == "infeasible_below_d_inf") {
            CHECK(r[cl].empty());
            continue;
        }
        CHECK(r[cs] == "ok");
        CHECK(std::abs(std::stod(r[cu]) - std::stod(r[cl]) - 1.2546) < 1e-4);
        CHECK(std::abs(std::stod(r[cu]) - std::stod(r[cl]) - kEcdqGapBits) < 1e-9);
        lb[{std::stoi(r[ch]), std::stod(r[cd])}] = std::stod(r[cl]);
    }
    // D = 3 is infeasible for h = 2 (d_inf = 4.43)
    CHECK(t.rows[6][cs] == "infeasible_below_d_inf");
    CHECK(lb.at({2, 10}) >= lb.at({1, 10}));
    CHECK(lb.at({1, 10}) >= lb.at({0, 10}));
    for (int h : {0, 1, 2}) CHECK(std::abs(lb.at({h, 50}) - 1.0) < 0.1);
    CHECK(fs::exists(dir / "bounds.columns.csv"));
    CHECK(fs::exists(dir / "manifest.txt"));
    CHECK(parse_config(slurp(dir / "config.ini")) == cfg);

    SUBCASE("byte-identical on rerun") {
        const std::string first = slurp(dir / "bounds.csv");
        opt.jobs = 1;
        CHECK(cmd_bounds(cfg, opt) == kExitOk);
        CHECK(slurp(dir / "bounds.csv") == first);
        CHECK(first.find('\r') == std::string::npos);
    }
}

TEST_CASE("cmd_simulate") {
    const fs::path dir = scratch("simulate");
    const ExperimentConfig cfg =
        parse_config(bench_config("[delays]\nh = 1\n[grid]\nD = 10\n[sim]\nhorizon = 60000\nburn_in = 2000\n"));
    CommandOptions opt;
    opt.out_dir = dir;
    CHECK(cmd_simulate(cfg, opt) == kExitOk);
    const CsvTable t = read_csv(dir / "simulate.csv");
    CHECK(t.header.size() == 14);
    REQUIRE(t.rows.size() == 1);
    const auto& r = t.rows[0];
    CHECK(r[t.column("status")] == "ok");
    CHECK(r[t.column("mode")] == "constant");
    CHECK(r[t.column("var_le_D")] == "1");
    CHECK(r[t.column("rate_in_bounds")] == "1");
    CHECK(r[t.column("seeds")] == "1:2:3");
    const std::string first = slurp(dir / "simulate.csv");
    CHECK(cmd_simulate(cfg, opt) == kExitOk);
    CHECK(slurp(dir / "simulate.csv") == first);
    CHECK(slurp(dir / "simulate.columns.csv").find("var_z_hat,simulated") != std::string::npos);
}

TEST_CASE("render_plot") {
    CsvTable b;
    b.header = {"h", "D", "rate_lb_bits", "rate_ub_bits"};
    CsvTable s;
    s.header = {"h", "D", "rate_bits", "entropy_bits"};
    for (int h : {0, 1, 2})
        for (double D : {5.0, 10.0, 50.0}) {
            b.rows.push_back({std::to_string(h), std::to_string(D), std::to_string(1.0 + h / D), std::to_string(2.2 + h / D)});
            s.rows.push_back({std::to_string(h), std::to_string(D), std::to_string(1.6 + h / D), std::to_string(1.4 + h / D)});
        }
    auto count = [](const std::string& svg) {
        size_t n = 0;
        for (size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++n;
        return n;
    };
    CsvTable b0 = b;
    b0.rows.resize(3);  // h = 0 only
    CHECK(count(render_plot({b0})) == 2);
    const std::string full = render_plot({b, s});
    CHECK(count(full) == 12);
    CHECK(render_plot({b, s}) == full);
    CHECK(full.rfind("<svg", 0) == 0);

    CsvTable bad = b;
    bad.header[3] = "ub";
    try {
        render_plot({bad});
        FAIL("no schema error");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("rate_ub_bits") != std::string::npos);
    }
}

TEST_CASE("command line") {
    const fs::path dir = scratch("exe");
    const fs::path log = dir / "log.txt";
    write(dir / "good.ini", bench_config("[delays]\nh = 0 2\n[grid]\nD = 10 50\n"));
    write(dir / "bad.ini", bench_config("[grid]\nwhat = 1\n"));

    CHECK(run_cli("bounds --config " + (dir / "good.ini").string() + " --out " + (dir / "o").string(), log) == 0);
    CHECK(fs::exists(dir / "o" / "bounds.csv"));
    CHECK(run_cli("bounds --config " + (dir / "bad.ini").string(), log) == 1);
    CHECK(slurp(log).find("what") != std::string::npos);
    CHECK(run_cli("bounds --config " + (dir / "none.ini").string(), log) == 1);
    CHECK(run_cli("bounds", log) == 1);
    CHECK(run_cli("frobnicate", log) == 1);
    CHECK(run_cli("bounds --config " + (dir / "good.ini").string() + " --jobs 0", log) == 1);

    CHECK(run_cli("plot " + (dir / "o" / "bounds.csv").string() + " --out " + (dir / "p").string(), log) == 0);
    const std::string svg = slurp(dir / "p" / "plot.svg");
    CHECK(svg.find("<svg") == 0);
    CHECK(run_cli("plot " + (dir / "o" / "bounds.csv").string() + " --out " + (dir / "p").string(), log) == 0);
    CHECK(slurp(dir / "p" / "plot.svg") == svg);
    write(dir / "broken.csv", "h,D,rate_lb_bits\n0,5,1\n");
    CHECK(run_cli("plot " + (dir / "broken.csv").string() + " --out " + (dir / "p").string(), log) == 1);
    CHECK(slurp(log).find("rate_ub_bits") != std::string::npos);

    SUBCASE("--seed overrides the config seeds") {
        write(dir / "sim.ini", bench_config("[delays]\nh = 1\n[grid]\nD = 20\n[sim]\nhorizon = 20000\nburn_in = 1000\n"));
        CHECK(run_cli("simulate --config " + (dir / "sim.ini").string() + " --seed 40 --out " + (dir / "s").string(),
                      log) == 0);
        CHECK(read_csv(dir / "s" / "simulate.csv").rows.at(0).at(9) == "40:41:42");
    }
    SUBCASE("infeasible grid point is a warning row, not a failure") {
        write(dir / "low.ini", bench_config("[delays]\nh = 2\n[grid]\nD = 1 10\n"));
        CHECK(run_cli("bounds --config " + (dir / "low.ini").string() + " --out " + (dir / "l").string(), log) == 0);
        CHECK(read_csv(dir / "l" / "bounds.csv").rows.at(0).back() == "infeasible_below_d_inf");
    }
    SUBCASE("verify") {
        CHECK(run_cli("verify --quick", log) == 0);
        CHECK(slurp(log).find("FAIL") == std::string::npos);
        CHECK(run_cli("verify --quick --mutate h2", log) == 3);
        CHECK(slurp(log).find("FAIL h2") != std::string::npos);
        CHECK(slurp(log).find("T = T_a") != std::string::npos);
    }
}

TEST_CASE("run_verify") {
    const auto checks = run_verify({"", true});
    CHECK(checks.size() >= 10);
    for (const auto& c : checks) CHECK_MESSAGE(c.pass, c.name << " residual " << c.residual);
    CHECK_THROWS_AS(run_verify({"nonsense", true}), ConfigError);
}
