#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("igp_cli_" + std::to_string(::getpid()) + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& name, const std::string& text) const
    {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    /// Exit status of the tool; stderr is kept in err().
    int run(const std::string& args) const
    {
        const std::string cmd = std::string(IGP_CLI_PATH) + " " + args + " >" + (dir_ / "stdout.txt").string() + " 2>" +
                                (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string err() const { return slurp(dir_ / "stderr.txt"); }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    }

    fs::path dir_;
};

const char* small_phi = "[model]\np = 2.5\nomega = 0\n[grid]\nh = 1e-2\nrmax = 6\n[groundstate]\nmethod = phi\n";

} // namespace

TEST_F(Cli, UnknownKeyExitsWithConfigCodeAndNamesKey)
{
    const fs::path cfg = write_config("bad.ini", "[model]\nbogus = 1\n");
    EXPECT_EQ(run("groundstate -c " + cfg.string() + " -o " + (dir_ / "out").string()), 2);
    EXPECT_NE(err().find("model.bogus"), std::string::npos) << err();
    EXPECT_FALSE(fs::exists(dir_ / "out" / "profile.txt"));
}

TEST_F(Cli, MalformedValueAndInvalidModelExitWithConfigCode)
{
    EXPECT_EQ(run("groundstate -c " + write_config("a.ini", "[grid]\nh = fine\n").string()), 2);
    EXPECT_NE(err().find("grid.h"), std::string::npos) << err();
    EXPECT_EQ(run("groundstate -c " + write_config("b.ini", "[model]\np = 9\n").string()), 2);
    EXPECT_NE(err().find("p must satisfy"), std::string::npos) << err();
}

TEST_F(Cli, UsageErrorsExitWithConfigCode)
{
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("nosuchcommand"), 2);
    EXPECT_EQ(run("groundstate --bogus-flag"), 2);
    EXPECT_EQ(run("groundstate -c " + (dir_ / "missing.ini").string()), 2);
}

TEST_F(Cli, GroundStateWritesFilesWithConfigHeader)
{
    const fs::path cfg = write_config("phi.ini", small_phi);
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("groundstate -c " + cfg.string() + " -o " + out.string()), 0) << err();
    const std::string prof = slurp(out / "profile.txt");
    EXPECT_EQ(prof.rfind("# model.dim = 3\n", 0), 0u);
    EXPECT_NE(prof.find("# model.p = 2.5\n"), std::string::npos);
    EXPECT_NE(prof.find("# groundstate.method = phi\n"), std::string::npos);
    EXPECT_NE(prof.find("# r u\n"), std::string::npos);
    const std::string js = slurp(out / "groundstate.json");
    EXPECT_NE(js.find("\"config\""), std::string::npos);
    EXPECT_NE(js.find("\"grid.h\": \"0.01\""), std::string::npos);
    EXPECT_NE(js.find("\"residual_sup\""), std::string::npos);
}

TEST_F(Cli, RerunIsByteIdentical)
{
    const fs::path cfg = write_config("phi.ini", small_phi);
    ASSERT_EQ(run("groundstate -c " + cfg.string() + " -o " + (dir_ / "a").string()), 0) << err();
    ASSERT_EQ(run("-c " + cfg.string() + " -o " + (dir_ / "b").string() + " groundstate"), 0) << err();
    for (const char* f : {"profile.txt", "groundstate.json"}) EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(Cli, EvolveWritesSeries)
{
    const fs::path cfg = write_config("ev.ini", "[grid]\nh = 2e-2\nrmax = 6\n[evolve]\ndt = 1e-2\nt_end = 0.2\nrecord_every = 5\n");
    ASSERT_EQ(run("evolve -c " + cfg.string() + " -o " + dir_.string()), 0) << err();
    const std::string s = slurp(dir_ / "series.csv");
    EXPECT_NE(s.find("\nt,mass,energy,grad_sq,f,f_prime\n0,"), std::string::npos);
    EXPECT_NE(s.find("# evolve.dt = 0.01\n"), std::string::npos);
}

TEST_F(Cli, SolverFailureExitsWithSolverCodeAndMarker)
{
    const fs::path bad = write_config("flow.ini", "[model]\np = 2\n[grid]\nh = 4e-3\n"
                                                  "[groundstate]\nmethod = flow\nq = 66\n");
    ASSERT_EQ(run("groundstate -c " + bad.string() + " -o " + dir_.string()), 1);
    EXPECT_NE(err().find("energy unbounded"), std::string::npos) << err();
    ASSERT_TRUE(fs::exists(dir_ / "groundstate.failed"));
    EXPECT_NE(slurp(dir_ / "groundstate.failed").find("energy unbounded"), std::string::npos);

    const fs::path good = write_config("phi.ini", small_phi);
    ASSERT_EQ(run("groundstate -c " + good.string() + " -o " + dir_.string()), 0) << err();
    EXPECT_FALSE(fs::exists(dir_ / "groundstate.failed"));
}
