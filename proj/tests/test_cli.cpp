#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace
{

namespace fs = std::filesystem;

struct Result
{
    int code = -1;
    std::string out;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Result run(const std::string& args)
{
    const fs::path out = fs::temp_directory_path() / "ipmix_cli_stdout.txt";
    const std::string cmd = std::string(IPMIX_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
    const int status      = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out  = slurp(out);
    fs::remove(out);
    return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    for (std::string line; std::getline(ss, line);)
    {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');)
            cells.push_back(c);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST(Cli, ArgumentErrorsExitTwo)
{
    EXPECT_EQ(run("solve --k 3").code, 2);
    EXPECT_EQ(run("solve --dim 4").code, 2);
    EXPECT_EQ(run("study --levels 2,x").code, 2);
    EXPECT_EQ(run("study").code, 2);
    EXPECT_EQ(run("solve --space s9").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("verify").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, MeshJson)
{
    const auto r = run("mesh --dim 2 --m 2");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["dim"], 2);
    EXPECT_EQ(j["vertices"].size(), 9u);
    EXPECT_EQ(j["elements"].size(), 8u);
}

TEST(Cli, VerifyAll)
{
    const auto r = run("verify --all --format json");
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(nlohmann::json::parse(r.out)["all_passed"].get<bool>());
}

TEST(Cli, SolveWritesFields)
{
    const fs::path out = fs::temp_directory_path() / "ipmix_cli_solve.json";
    ASSERT_EQ(run("solve --dim 2 --m 2 --out " + out.string()).code, 0);
    const auto j = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(j["sigma"].size(), j["dim_sigma"].get<std::size_t>());
    EXPECT_EQ(j["u"].size(), 16u);
    EXPECT_LE(j["residual"].get<double>(), 1e-10);
    fs::remove(out);
}

TEST(Cli, StudyMatches3DMinimalTableRows)
{
    const auto r = run("study --dim 3 --k 0 --space s2 --eta 0.1 --levels 2,4 --protocol table");
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    ASSERT_EQ(rows[1].size(), 11u);
    const double u[]     = {0.26120, 0.15504};
    const double sigma[] = {1.39194, 0.78910};
    const double div[]   = {8.05894, 4.48971};
    const double jump[]  = {0.28483, 0.24513};
    const char* dims[]   = {"378", "2766"};
    for (int i = 0; i < 2; ++i)
    {
        const auto& row = rows[i + 1];
        EXPECT_NEAR(std::stod(row[1]), u[i], 0.03 * u[i]);
        EXPECT_NEAR(std::stod(row[3]), sigma[i], 0.03 * sigma[i]);
        EXPECT_NEAR(std::stod(row[5]), div[i], 0.03 * div[i]);
        EXPECT_NEAR(std::stod(row[7]), jump[i], 0.03 * jump[i]);
        EXPECT_EQ(row[10], dims[i]);
    }
}

TEST(Cli, StudyIsByteIdentical)
{
    const fs::path a = fs::temp_directory_path() / "ipmix_cli_a.json";
    const fs::path b = fs::temp_directory_path() / "ipmix_cli_b.json";
    ASSERT_EQ(run("study --dim 2 --levels 2,4 --out " + a.string()).code, 0);
    ASSERT_EQ(run("study --dim 2 --levels 2,4 --out " + b.string()).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(nlohmann::json::parse(slurp(a))["records"].size(), 2u);
    fs::remove(a);
    fs::remove(b);
}

TEST(Cli, UnwritableOutputIsARuntimeFailure)
{
    EXPECT_EQ(run("mesh --dim 2 --m 1 --out /nonexistent/dir/mesh.json").code, 1);
}
