/*
 * Copyright 2026 The OPE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ope/csv.hpp"
#include "ope/design.hpp"
#include "ope/simulator.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status = -1;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    static fs::path dir;

    static void SetUpTestSuite() {
        dir = fs::temp_directory_path() / "ope_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    static CliResult invoke(const std::string& args, const fs::path& cwd = dir) {
        const fs::path err = cwd / "stderr.txt";
        const std::string cmd = "cd '" + cwd.string() + "' && '" OPE_CLI_PATH "' " + args + " >/dev/null 2>'" + err.string() + "'";
        const int raw = std::system(cmd.c_str());
        CliResult r;
        r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.err = ope::io::read_file(err);
        return r;
    }

    static std::string slurp(const fs::path& p) { return ope::io::read_file(p); }
};

fs::path Cli::dir;

} // namespace

TEST_F(Cli, DesignDefaultsAndSeedIdempotence) {
    ASSERT_EQ(invoke("design --seed 7").status, 0);
    const std::string first = slurp(dir / "out/design.csv");
    const auto table = ope::io::parse_csv(first);
    EXPECT_EQ(table.header, (std::vector<std::string>{"x0", "u0", "c"}));
    EXPECT_EQ(table.rows.size(), 40u);
    ASSERT_EQ(invoke("design --seed 7").status, 0);
    EXPECT_EQ(slurp(dir / "out/design.csv"), first);
    const auto meta = nlohmann::json::parse(slurp(dir / "out/design.csv.meta.json"));
    EXPECT_EQ(meta["run"]["seeds"]["design"], 7);
    EXPECT_TRUE(meta["run"].contains("config_hash"));
    EXPECT_TRUE(meta["run"].contains("version"));
    ASSERT_EQ(invoke("design --seed 8").status, 0);
    EXPECT_NE(slurp(dir / "out/design.csv"), first);
}

TEST_F(Cli, InvalidBoundsNameTheDimension) {
    std::ofstream(dir / "bad.json") << R"({"design": {"bounds": [[-3, 1], [1, 2], [3, 0.5]]}})";
    const CliResult r = invoke("--config bad.json design");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("'c'"), std::string::npos) << r.err;
    std::ofstream(dir / "unknown.json") << R"({"desing": {}})";
    EXPECT_EQ(invoke("--config unknown.json design").status, 2);
    EXPECT_EQ(invoke("--config missing.json design").status, 2);
}

TEST_F(Cli, MissingInputsAreDataErrors) {
    const fs::path empty = dir / "empty";
    fs::create_directories(empty);
    EXPECT_EQ(invoke("simulate", empty).status, 3);
    EXPECT_EQ(invoke("fit", empty).status, 3);
    EXPECT_EQ(invoke("uq", empty).status, 3);
    EXPECT_EQ(invoke("predict", empty).status, 2); // --point is required
}

TEST_F(Cli, FullPipeline) {
    const fs::path run = dir / "pipeline";
    fs::create_directories(run);
    ASSERT_EQ(invoke("design", run).status, 0);
    ASSERT_EQ(invoke("simulate", run).status, 0);
    ASSERT_EQ(invoke("fit --threads 1", run).status, 0);
    const std::string model = slurp(run / "out/model.json");
    ASSERT_EQ(invoke("fit --threads 3", run).status, 0);
    EXPECT_EQ(slurp(run / "out/model.json"), model) << "fit output depends on thread count";

    ASSERT_EQ(invoke("validate", run).status, 0);
    const auto loo = nlohmann::json::parse(slurp(run / "out/reports/loo.json"));
    EXPECT_EQ(loo["completed"], 40);
    EXPECT_TRUE(fs::exists(run / "out/reports/loo/fold_39.csv"));

    // Predicting at a training design point reproduces its row.
    const auto space = ope::DesignSpace::landslide();
    const auto train = ope::ingest_runs(run / "out/training.csv", space);
    const auto design_rows = ope::io::parse_csv(slurp(run / "out/design.csv"));
    const std::string point = design_rows.rows[5][0] + "," + design_rows.rows[5][1] + "," + design_rows.rows[5][2];
    ASSERT_EQ(invoke("predict --point " + point + " --out pred.csv", run).status, 0);
    const auto pred = ope::io::parse_csv(slurp(run / "pred.csv"));
    ASSERT_EQ(pred.rows.size(), train.q());
    EXPECT_EQ(pred.header[1], "location");
    double sd = 0.0;
    {
        const Eigen::ArrayXd all = train.outputs.reshaped().array();
        sd = std::sqrt((all - all.mean()).square().mean());
    }
    for (std::size_t j = 0; j < pred.rows.size(); ++j)
        EXPECT_NEAR(*ope::io::parse_double(pred.rows[j][1]), train.outputs(5, static_cast<Eigen::Index>(j)), 1e-2 * sd);

    EXPECT_EQ(invoke("predict --point 1,2", run).status, 2);

    ASSERT_EQ(invoke("sweep", run).status, 0);
    EXPECT_EQ(ope::io::parse_csv(slurp(run / "out/reports/sweep_u0.csv")).rows.size(), 50u);

    ASSERT_EQ(invoke("uq --samples 1000", run).status, 0);
    const std::string q1 = slurp(run / "out/reports/uq_max_elev_quantiles.csv");
    const auto t1 = ope::io::parse_csv(q1), t2 = ope::io::parse_csv(slurp(run / "out/reports/uq_mcil_quantiles.csv"));
    ASSERT_EQ(t1.rows.size(), 5u);
    ASSERT_EQ(t2.rows.size(), 5u);
    for (std::size_t i = 1; i < 5; ++i) EXPECT_LE(*ope::io::parse_double(t1.rows[i - 1][1]), *ope::io::parse_double(t1.rows[i][1]));
    ASSERT_EQ(invoke("uq --samples 1000 --threads 2", run).status, 0);
    EXPECT_EQ(slurp(run / "out/reports/uq_max_elev_quantiles.csv"), q1);
    EXPECT_TRUE(fs::exists(run / "out/reports/ope.log"));
}
