// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include "lorapl_cli.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace lorapl;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

struct TempDir {
    fs::path path;

    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("lorapl-cli-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    [[nodiscard]] std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(std::vector<std::string> args, std::string* err_text = nullptr)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run_cli(args, out, err);
    if (err_text)
        *err_text = err.str();
    return code;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Noiseless synthetic corpus in `dir`/corpus.
std::string make_corpus(const TempDir& dir, const std::string& count, const std::string& sigma = "0")
{
    const auto ini = dir / "synth.ini";
    write_text(ini, "[synth]\nsigma_db = " + sigma + "\n");
    REQUIRE(run({"synth", "--config", ini, "--count", count, "--out", dir / "corpus"}) == 0);
    return dir / "corpus";
}

} // namespace

TEST_CASE("fit on a noiseless corpus returns the exponent exactly", "[cli]")
{
    TempDir dir;
    const auto corpus = make_corpus(dir, "3000");
    REQUIRE(run({"fit", "--samples", corpus + "/samples.csv", "--gateways", corpus + "/gateways.csv", "--out",
                 dir / "fit"}) == 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "fit/fit.json"));
    CHECK_THAT(doc.at("n").get<double>(), WithinAbs(2.0, 1e-9));
    CHECK_THAT(doc.at("pl_d0").get<double>(), WithinAbs(130.0, 1e-9));
    CHECK(doc.at("sample_count") == 3000);
    CHECK(fs::exists(dir / "fit/ecdf.csv"));
    CHECK(fs::exists(dir / "fit/bins.csv"));
}

TEST_CASE("filter reports a single low-satellite row", "[cli]")
{
    TempDir dir;
    const auto corpus = make_corpus(dir, "50");
    // satellites is column 7 of the sample CSV; damage the first data row
    std::istringstream lines(slurp(corpus + "/samples.csv"));
    std::string text;
    std::string line;
    for (int row = 0; std::getline(lines, line); ++row) {
        if (row == 1) {
            const auto fields = csv::split_line(line);
            REQUIRE(fields.at(6) == "10");
            line.clear();
            for (std::size_t i = 0; i < fields.size(); ++i)
                line += (i ? "," : "") + (i == 6 ? std::string("3") : fields[i]);
        }
        text += line + "\n";
    }
    write_text(dir / "bad.csv", text);

    REQUIRE(run({"filter", "--samples", dir / "bad.csv", "--gateways", corpus + "/gateways.csv",
                 "--max-altitude-m", "150", "--out", dir / "filter"}) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "filter/filter_report.json"));
    CHECK(report.at("rejections").at("LowSatellites") == 1);
    CHECK(report.at("output") == 49);
    CHECK(report.at("reconciles") == true);
    const auto rejects = slurp(dir / "filter/filter_rejects.csv");
    CHECK(rejects.find("LowSatellites") != std::string::npos);
}

TEST_CASE("exit codes", "[cli]")
{
    TempDir dir;
    const auto corpus = make_corpus(dir, "200");
    const auto samples = corpus + "/samples.csv";
    const auto gateways = corpus + "/gateways.csv";
    std::string err;

    CHECK(run({"fit", "--samples", dir / "missing.csv", "--gateways", gateways, "--out", dir / "o"}, &err) == 2);
    CHECK(err.find("missing.csv") != std::string::npos);
    // the altitude ceiling has no default
    CHECK(run({"filter", "--samples", samples, "--gateways", gateways, "--out", dir / "o"}, &err) == 1);
    CHECK(err.find("max_altitude_m") != std::string::npos);
    CHECK(run({"fit", "--samples", samples, "--gateways", gateways, "--bin-width-m", "-5", "--out", dir / "o"}) == 1);
    CHECK(run({"fit", "--samples", samples, "--gateways", gateways, "--bogus"}) == 1);
    CHECK(run({"teleport"}) == 1);
    CHECK(run({"convergence", "--samples", samples, "--gateways", gateways, "--subset-sizes", "100,201", "--out",
               dir / "o"}) == 1);
    CHECK(run({"filter", "--samples", samples, "--gateways", gateways, "--max-altitude-m", "150", "--snap",
               "fixture:" + (dir / "nofixture.json"), "--out", dir / "o"}) == 2);

    // a fixture without the needed points quarantines instead of failing
    write_text(dir / "empty_fixture.json", R"({"precision": 6, "points": {}})");
    REQUIRE(run({"filter", "--samples", samples, "--gateways", gateways, "--max-altitude-m", "150", "--snap",
                 "fixture:" + (dir / "empty_fixture.json"), "--out", dir / "q"}) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "q/filter_report.json"));
    CHECK(report.at("quarantined") == 200);
    CHECK(report.at("output") == 0);
}

TEST_CASE("artifacts are byte-identical across runs", "[cli]")
{
    TempDir dir;
    const auto corpus = make_corpus(dir, "4000", "8");
    CHECK(slurp(corpus + "/samples.csv") == slurp(make_corpus(dir, "4000", "8") + "/samples.csv"));

    const std::vector<std::string> common = {"--samples", corpus + "/samples.csv", "--gateways",
                                             corpus + "/gateways.csv", "--max-altitude-m", "150",
                                             "--subset-sizes", "500,2000", "--repeats", "4"};
    for (const char* sub : {"a", "b"}) {
        auto args = common;
        args.insert(args.begin(), "report");
        args.insert(args.end(), {"--out", dir / sub});
        REQUIRE(run(args) == 0);
        auto eval_args = common;
        eval_args.insert(eval_args.begin(), "eval");
        eval_args.insert(eval_args.end(), {"--out", dir / sub});
        REQUIRE(run(eval_args) == 0);
    }
    for (const char* file : {"report.json", "model_rmse.csv", "distance_bias.csv", "eval_summary.json"})
        CHECK(slurp(dir / (std::string("a/") + file)) == slurp(dir / (std::string("b/") + file)));

    const auto report = nlohmann::json::parse(slurp(dir / "a/report.json"));
    for (const char* key : {"ingest", "filter", "fit", "eval", "progression", "convergence", "gateways", "sf_feasibility"})
        CHECK(report.contains(key));
    CHECK(report.at("eval").size() == models::default_catalog().models.size());
}

TEST_CASE("ingest, progression and convergence outputs", "[cli]")
{
    TempDir dir;
    const auto corpus = make_corpus(dir, "3000", "8");
    write_text(dir / "mixed.csv", slurp(corpus + "/samples.csv") + "broken,row\n");
    REQUIRE(run({"ingest", "--samples", dir / "mixed.csv", "--out", dir / "i"}) == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "i/ingest_summary.json"));
    CHECK(summary.at("valid") == 3000);
    CHECK(summary.at("rejected") == 1);
    CHECK(slurp(dir / "i/rejects.csv").find("broken,row") != std::string::npos);

    const std::vector<std::string> inputs = {"--samples", corpus + "/samples.csv", "--gateways",
                                             corpus + "/gateways.csv", "--out", dir / "p"};
    auto prog = inputs;
    prog.insert(prog.begin(), "progression");
    REQUIRE(run(prog) == 0);
    std::istringstream rows(slurp(dir / "p/progression.csv"));
    std::string line;
    int count = 0;
    while (std::getline(rows, line))
        ++count;
    CHECK(count == 14);

    auto conv = inputs;
    conv.insert(conv.begin(), "convergence");
    conv.insert(conv.end(), {"--repeats", "3"});
    REQUIRE(run(conv) == 0);
    CHECK(slurp(dir / "p/convergence.csv").rfind("subset_size,repeats,rmse_mean_db", 0) == 0);
}
