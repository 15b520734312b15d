#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nam/cli.hpp"
#include "nam/metrics.hpp"

using namespace nam;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path resnet_arch() {
    const auto dir = test::temp_dir("cli_arch");
    std::ofstream(dir / "r50.arch") << "block = 512 4 32 32\nblock = 256 4 16 16\nblock = 128 4 8 8\n"
                                       "block = 64 4 4 4\nreduction = 16\nkernel = 7\n";
    return dir / "r50.arch";
}

std::string read(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("count prints the overhead totals") {
    const auto arch = resnet_arch().string();
    const auto expect = [&](const char* type, const char* total) {
        const auto r = cli({"count", "--arch-config", arch, "--attention", type});
        CHECK(r.code == exit_ok);
        CHECK(r.out.find(std::string("\nOverhead,") + type + "," + total + ",") != std::string::npos);
    };
    expect("cbam-channel", "696320");
    expect("nam-channel", "3840");
    expect("cbam-spatial", "392");
    expect("nam-spatial", "1360");
    const auto j = cli({"count", "--arch-config", arch, "--attention", "nam-ch", "--json"});
    CHECK(j.out.find("\"params\": 3840") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(cli({}).code == exit_usage);
    CHECK(cli({"frobnicate"}).code == exit_usage);
    CHECK(cli({"count", "--attention", "nam"}).code == exit_usage);
    CHECK(cli({"count", "--arch-config", resnet_arch().string(), "--attention", "bam"}).code == exit_usage);
}

TEST_CASE("gradcheck reports each seed") {
    const auto r = cli({"gradcheck", "--op", "nam", "--seed", "5", "--seeds", "2"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("nam seed 5 max_rel_error ") == 0);
    CHECK(r.out.find("nam seed 6 ") != std::string::npos);
    CHECK(cli({"gradcheck", "--op", "nam", "--tolerance", "0"}).code == exit_numeric);
    CHECK(cli({"gradcheck", "--op", "nope"}).code == exit_usage);
}

TEST_CASE("missing data exits with 2") {
    const auto dir = test::temp_dir("cli_nodata");
    const auto r = cli({"train", "--data", (dir / "none").string(), "--out", (dir / "out").string()});
    CHECK(r.code == exit_data);
    CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("synth, train and eval work end to end") {
    const auto dir = test::temp_dir("cli_e2e");
    const auto data = (dir / "data").string(), out = (dir / "run").string();
    REQUIRE(cli({"synth", "--out", data, "--train", "120", "--test", "40", "--seed", "3"}).code == exit_ok);
    const auto t = cli({"train", "--data", data, "--out", out, "--epochs", "1", "--attention", "nam"});
    REQUIRE(t.code == exit_ok);
    CHECK(t.out.find("epoch 1: loss ") != std::string::npos);
    for (const char* f : {"metrics.csv", "metrics.json", "sparsity.json", "model.namk"})
        CHECK(std::filesystem::exists(std::filesystem::path(out) / f));
    const auto rows = metrics_from_csv(read(std::filesystem::path(out) / "metrics.csv"));
    REQUIRE(rows.size() == 1);

    const auto e = cli({"eval", "--model", out + "/model.namk", "--data", data});
    REQUIRE(e.code == exit_ok);
    CHECK(e.out.find("samples 40\n") == 0);
    CHECK(e.out.find("top1_error " + format_double(rows[0].top1_error) + "\n") != std::string::npos);
}
