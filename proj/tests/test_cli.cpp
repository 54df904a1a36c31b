#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "virtlev/cli.hpp"

using namespace virtlev;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("virtlev_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(CliAngles, DecimalsAndMultiplesOfPi) {
    EXPECT_DOUBLE_EQ(cli::parse_angle("1.25"), 1.25);
    EXPECT_DOUBLE_EQ(cli::parse_angle("pi"), pi);
    EXPECT_DOUBLE_EQ(cli::parse_angle("pi/2"), pi / 2);
    EXPECT_DOUBLE_EQ(cli::parse_angle("-pi/2"), -pi / 2);
    EXPECT_DOUBLE_EQ(cli::parse_angle("3pi/4"), 0.75 * pi);
    EXPECT_DOUBLE_EQ(cli::parse_angle("0.5*pi"), 0.5 * pi);
    EXPECT_ERROR_KIND(cli::parse_angle("abc"), ErrorKind::Usage);
    EXPECT_ERROR_KIND(cli::parse_angle("pi/0"), ErrorKind::Usage);
    EXPECT_ERROR_KIND(cli::parse_angle("pix"), ErrorKind::Usage);
}

TEST(CliLists, CommaSeparatedNumbers) {
    EXPECT_EQ(cli::parse_list("0.04,0.02, 0.01", "g"), (std::vector<double>{0.04, 0.02, 0.01}));
    EXPECT_ERROR_KIND(cli::parse_list("1,x", "g"), ErrorKind::Usage);
    EXPECT_ERROR_KIND(cli::parse_list("", "g"), ErrorKind::Usage);
}

TEST(CliParse, CommandDefaultsAndOverrides) {
    const cli::ExperimentConfig sweep = cli::parse_arguments({"sweep"});
    EXPECT_EQ(sweep.command, "sweep");
    EXPECT_EQ(sweep.count, 9);
    EXPECT_DOUBLE_EQ(sweep.R, 30.0);
    const cli::ExperimentConfig critical = cli::parse_arguments({"critical", "--R", "100", "--geometry", "radial3d"});
    EXPECT_DOUBLE_EQ(critical.R, 100.0);
    EXPECT_DOUBLE_EQ(critical.h, 0.5);
    EXPECT_EQ(critical.geometry, "radial3d");
    EXPECT_DOUBLE_EQ(cli::parse_arguments({"jost", "--h", "0.02"}).h, 0.02);
    EXPECT_ERROR_KIND(cli::parse_arguments({"sweep", "--nonsense", "1"}), ErrorKind::Usage);
    EXPECT_ERROR_KIND(cli::parse_arguments({"frobnicate"}), ErrorKind::Usage);
    EXPECT_ERROR_KIND(cli::parse_arguments({}), ErrorKind::Usage);
}

TEST(CliParse, ConfigFileRoundTrip) {
    cli::ExperimentConfig c = cli::defaults("sweep");
    c.op = "schrodinger1d";
    c.potential = "bump:amp=2,a=0.5";
    c.R = 12.5;
    c.count = 11;
    c.ray = "pi/2";
    c.refine = false;
    const auto path = temp_file("roundtrip.toml");
    {
        std::ofstream out(path);
        out << cli::serialize(c);
    }
    const cli::ExperimentConfig back = cli::parse_arguments({"sweep", "--config", path.string()});
    EXPECT_EQ(cli::describe(back), cli::describe(c));
    // flags on the command line take precedence over the file
    const cli::ExperimentConfig over = cli::parse_arguments({"sweep", "--count", "5", "--config", path.string()});
    EXPECT_EQ(over.count, 5);
    EXPECT_DOUBLE_EQ(over.R, 12.5);
    std::filesystem::remove(path);
}

TEST(CliParse, ConfigWithSectionAndLists) {
    const auto path = temp_file("section.toml");
    {
        std::ofstream out(path);
        out << "[bifurcate]\ng = [0.04, 0.02]\ns = 1.5\n";
    }
    const cli::ExperimentConfig c = cli::parse_arguments({"bifurcate", "--config", path.string()});
    EXPECT_EQ(cli::parse_list(c.g, "g"), (std::vector<double>{0.04, 0.02}));
    EXPECT_DOUBLE_EQ(c.s, 1.5);
    EXPECT_ERROR_KIND(cli::parse_arguments({"sweep", "--config", path.string()}), ErrorKind::Usage);
    std::filesystem::remove(path);
    EXPECT_ERROR_KIND(cli::parse_arguments({"sweep", "--config", path.string()}), ErrorKind::Usage);
}

TEST(CliRun, HelpAndVersionExitZero) {
    const Result v = run_cli({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_EQ(v.out, std::string(cli::version) + "\n");
    const Result h = run_cli({"sweep", "--help"});
    EXPECT_EQ(h.code, 0);
    EXPECT_NE(h.out.find("--per-decade"), std::string::npos);
}

TEST(CliRun, ErrorsAreJsonWithExitCodes) {
    const Result usage = run_cli({"sweep", "--count", "x"});
    EXPECT_EQ(usage.code, 2);
    const auto j = nlohmann::json::parse(usage.err);
    EXPECT_EQ(j["error"]["kind"], "usage");
    EXPECT_EQ(j["error"]["exit_code"], 2);

    const Result negative_form = run_cli({"critical", "--potential", "well:g=1", "--R", "50"});
    EXPECT_EQ(negative_form.code, 2);
    EXPECT_EQ(nlohmann::json::parse(negative_form.err)["error"]["kind"], "invalid_input");

    const Result ambiguous = run_cli({"kernel", "--z-re", "1", "--approach", "interior"});
    EXPECT_EQ(ambiguous.code, 2);
    EXPECT_EQ(nlohmann::json::parse(ambiguous.err)["error"]["kind"], "branch_ambiguity");

    const Result threshold = run_cli({"kernel", "--z-re", "0"});
    EXPECT_EQ(threshold.code, 1);
    EXPECT_EQ(nlohmann::json::parse(threshold.err)["error"]["kind"], "threshold_singularity");
}

TEST(CliRun, JostVerdictAndCsv) {
    const Result r = run_cli({"jost", "--potential", "bump:amp=1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# command = jost"), std::string::npos);
    EXPECT_NE(r.out.find("# verdict: Regular"), std::string::npos);
    const Result v = run_cli({"jost", "--potential", "zero"});
    EXPECT_NE(v.out.find("# verdict: Virtual"), std::string::npos);
}

TEST(CliRun, OutputFileAndReport) {
    const auto csv = temp_file("bif.csv");
    const auto report = temp_file("crit.json");
    const Result r = run_cli({"bifurcate", "--g", "0.04,0.02,0.01", "--out", csv.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("verdict: slope=", 0), 0u);
    const std::string body = slurp(csv);
    EXPECT_EQ(body.rfind("# command = bifurcate\n", 0), 0u);
    EXPECT_NE(body.find("\ng,E,E_predicted\n"), std::string::npos);

    const Result c = run_cli({"critical", "--R", "100", "--out", csv.string(), "--report", report.string()});
    ASSERT_EQ(c.code, 0) << c.err;
    const auto j = nlohmann::json::parse(slurp(report));
    EXPECT_EQ(j["verdict"], "NullState");
    EXPECT_TRUE(j["stable"].get<bool>());
    std::filesystem::remove(csv);
    std::filesystem::remove(report);
}

TEST(CliRun, NullityAndShift) {
    const Result n = run_cli({"nullity", "--jordan", "3"});
    ASSERT_EQ(n.code, 0) << n.err;
    EXPECT_NE(n.out.find("nullity=1 svd_nullity=1"), std::string::npos);
    EXPECT_EQ(run_cli({"nullity"}).code, 2);
    const Result s = run_cli({"shift", "--z0-angle", "pi/2", "--n", "128", "--m", "16"});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_NE(s.out.find("virtual_space_dim=1"), std::string::npos);
}

TEST(CliRun, SweepIsDeterministic) {
    const std::vector<std::string> args{"sweep", "--R", "20", "--count", "7", "--refine", "false", "--threads", "2"};
    const Result a = run_cli(args);
    const Result b = run_cli(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out.find("radius,norm,z_re,z_im"), std::string::npos);
    EXPECT_NE(a.out.find("# verdict: Virtual"), std::string::npos);
}
