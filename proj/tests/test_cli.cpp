#include "fishbone/experiment.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace fishbone;

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(FISHBONE_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir()
{
    const fs::path dir = fs::temp_directory_path() / "fishbone-cli-test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("grid and bracket parsing")
{
    const auto g = parse_grid("0.1:0.5:0.1");
    REQUIRE(g.size() == 5);
    CHECK(g.back() == doctest::Approx(0.5));
    CHECK(parse_grid("0.5:10:0.5").size() == 20);
    CHECK(parse_grid("0.05:0.799:0.05").size() == 15);
    CHECK(parse_grid("0.799").size() == 1);
    CHECK(parse_grid("1,2, 3:4:0.5").size() == 5);
    CHECK_THROWS_AS(parse_grid("1:x"), ConfigError);
    CHECK_THROWS_AS(parse_grid("2:1:0.1"), ConfigError);
    CHECK_THROWS_AS(parse_grid("0:1:0"), ConfigError);
    CHECK_THROWS_AS(parse_grid(""), ConfigError);

    CHECK(parse_bracket("1.4:1.6") == std::pair{1.4, 1.6});
    CHECK_THROWS_AS(parse_bracket("1.6:1.4"), ConfigError);
    CHECK_THROWS_AS(parse_bracket("1.4"), ConfigError);
}

TEST_CASE("config text")
{
    ExperimentConfig c;
    apply_config_text(c, "# comment\nvariant = cross\ndelta=0.02\n\nsigma=1.5\nt_end=50\nscheme=adaptive\n");
    CHECK(c.variant == Variant::CrossDeriv);
    CHECK(c.delta == 0.02);
    CHECK(c.sigma == 1.5);
    CHECK(c.integrator.t_end == 50.0);
    CHECK(c.integrator.scheme == Scheme::AdaptiveEmbedded);
    CHECK_THROWS_AS(apply_config_text(c, "sigma=abc\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "colour=blue\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "preset=fig1-147\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "variant=gusty\n"), ConfigError);
}

TEST_CASE("presets")
{
    int simulate = 0, hill = 0;
    for (const auto& p : presets()) {
        const ExperimentConfig c = resolve_preset(p);
        CHECK(c.preset == p.name);
        if (p.command == Command::Simulate)
            ++simulate;
        else if (p.command == Command::Hill)
            ++hill;
    }
    CHECK(simulate == 14);
    CHECK(hill == 2);

    const ExperimentConfig a = resolve_preset(*find_preset("fig1-147"));
    CHECK(a.variant == Variant::Isolated);
    CHECK(a.sigma == 1.47);
    CHECK(a.integrator.t_end == 200.0);
    const ExperimentConfig b = resolve_preset(*find_preset("fig2-d001"));
    CHECK(b.variant == Variant::CrossDeriv);
    CHECK(b.delta == 0.01);
    const ExperimentConfig c = resolve_preset(*find_preset("fig6-147"));
    CHECK(c.variant == Variant::CrossDerivZero);
    CHECK(c.sigma == 1.47);
    CHECK(find_preset("fig9-000") == nullptr);
}

TEST_CASE("hill runner")
{
    ExperimentConfig c;
    c.energies = "0.799,0.1";
    std::ostringstream out, err;
    CHECK(run_hill(c, out, err) == exit_code::ok);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.find(",stable,true") != std::string::npos);
    std::getline(in, line);
    CHECK(line.find(",stable,true") != std::string::npos);

    c.energies = "0,1";
    CHECK(run_hill(c, out, err) == exit_code::config);
}

TEST_CASE("hill chart locates the first unstable energy above the sufficient bound")
{
    ExperimentConfig c;
    c.energies = "0.1:10:0.1";
    c.forced_delta = 0.01;
    std::ostringstream out, err;
    REQUIRE(run_hill(c, out, err) == exit_code::ok);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "E,amplitude,period,trace,classification,zhukovskii,forced_sup,forced_growth,forced_bounded");
    double first_unstable = -1.0;
    std::string previous;
    while (std::getline(in, line)) {
        if (line.find(",unstable,") != std::string::npos) {
            first_unstable = std::stod(line);
            CHECK(line.substr(line.rfind(',') + 1) == "false");
            CHECK(previous.substr(previous.rfind(',') + 1) == "true");
            break;
        }
        previous = line;
    }
    CHECK(first_unstable >= 235.0 / 294.0);
    CHECK(first_unstable == doctest::Approx(5.0));
}

TEST_CASE("exit status contract")
{
    const fs::path dir = scratch_dir();
    const std::string csv = (dir / "run.csv").string();

    CHECK(run_cli("presets") == exit_code::ok);
    CHECK(run_cli("--help") == exit_code::ok);
    CHECK(run_cli("") == exit_code::usage);
    CHECK(run_cli("simulate --no-such-flag") == exit_code::usage);
    CHECK(run_cli("simulate --sigma abc --out " + csv) == exit_code::config);
    CHECK(run_cli("simulate --preset fig1-147 --sigma 1.5 --out " + csv) == exit_code::config);
    CHECK(run_cli("simulate --preset nope --out " + csv) == exit_code::config);
    CHECK(run_cli("simulate --preset prop1-check --out " + csv) == exit_code::config);
    CHECK(run_cli("simulate --config " + (dir / "missing.cfg").string()) == exit_code::config);
    CHECK(run_cli("hill --energies 1:x") == exit_code::config);
    CHECK(run_cli("simulate --t-end 1 --out " + (dir / "no" / "such" / "dir.csv").string()) == exit_code::io);
    CHECK(run_cli("threshold --bracket 0.1:0.2") == exit_code::invalid_bracket);

    fs::remove(csv);
    CHECK(run_cli("simulate --sigma 200 --step 0.01 --t-end 5 --out " + csv) == exit_code::blow_up);
    const std::string partial = slurp(csv);
    CHECK(partial.find("t,y1,z1,") != std::string::npos);
    CHECK(partial.find("\n0.01,") != std::string::npos);

    {
        std::ofstream cfg(dir / "short.cfg");
        cfg << "variant=cross\ndelta=0.01\nsigma=1.2\nt_end=2\n";
    }
    CHECK(run_cli("simulate --config " + (dir / "short.cfg").string() + " --t-end 1 --out " + csv) ==
          exit_code::ok);
    const std::string text = slurp(csv);
    CHECK(text.find("# variant=cross\n") != std::string::npos);
    CHECK(text.find("# t_end=1\n") != std::string::npos);
}

TEST_CASE("presets reproduce byte for byte")
{
    const fs::path dir = scratch_dir();
    const std::string a = (dir / "a.csv").string();
    const std::string b = (dir / "b.csv").string();
    REQUIRE(run_cli("simulate --preset fig2-d001 --out " + a) == exit_code::ok);
    REQUIRE(run_cli("simulate --preset fig2-d001 --out " + b) == exit_code::ok);
    const std::string first = slurp(a);
    CHECK(first == slurp(b));
    CHECK(first.rfind("# preset=fig2-d001\n# command=simulate\n# variant=cross\n", 0) == 0);
    CHECK(first.find("# sigma=1.47\n") != std::string::npos);
    CHECK(first.find("# delta=0.01\n") != std::string::npos);

    const std::string h = (dir / "h.csv").string();
    REQUIRE(run_cli("hill --preset prop1-check --out " + h) == exit_code::ok);
    const std::string chart = slurp(h);
    CHECK(chart.find(",unstable,") == std::string::npos);
    CHECK(chart.find(",false\n") == std::string::npos);
}

TEST_CASE("plot stub")
{
    const std::string s = plot_stub(Command::Simulate, "out.csv");
    CHECK(s.find("read_csv('out.csv'") != std::string::npos);
    CHECK(s.find("'z1'") != std::string::npos);
    CHECK(plot_stub(Command::Sweep, "s.csv").find("t_onset") != std::string::npos);
    CHECK(run_cli("plot-stub hill chart.csv") == exit_code::ok);
}
