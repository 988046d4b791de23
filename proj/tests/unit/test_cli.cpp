#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "fmlab/checkpoint.hpp"
#include "fmlab/cli/app.hpp"
#include "fmlab/io.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("fmlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    setenv("FMLAB_OUTPUT_ROOT", (root_ / "runs").c_str(), 1);
  }
  void TearDown() override {
    unsetenv("FMLAB_OUTPUT_ROOT");
    fs::remove_all(root_);
  }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "fmlab");
    return fmlab::cli::run(args);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path run_dir(const std::string& name) const { return root_ / "runs" / name; }

  fs::path root_;
};

const char* kSmall =
    "[dataset]\nname = two_moons\nsamples = 128\nseed = 7\n"
    "[field]\nhidden = 16,16\ntime_features = 4\n"
    "[solver]\nmethod = euler\nsteps = 20\n"
    "[train]\nsteps = 40\nbatch_size = 64\nlr = 1e-3\nseed = 7\n"
    "[finetune]\nsteps = 5\nbatch_size = 32\nseed = 7\n";

}  // namespace

TEST_F(CliTest, UnknownKeysFailFast) {
  const fs::path cfg = write_config("bad.ini", "[train]\nsteps = 2\nbogus = 1\n[extra]\nfoo = 2\n");
  ::testing::internal::CaptureStderr();
  const int code = run({"pretrain", "-c", cfg.string()});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("train.bogus"), std::string::npos) << err;
  EXPECT_NE(err.find("extra.foo"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(run_dir("pretrain") / "checkpoint.json"));
  EXPECT_EQ(run({"pretrain", "--set", "train.nope=3"}), 2);
}

TEST_F(CliTest, MissingCheckpointNamesPath) {
  ::testing::internal::CaptureStderr();
  const int code = run({"sample", "--set", "field.checkpoint=/no/such/ckpt.json"});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("/no/such/ckpt.json"), std::string::npos) << err;
  EXPECT_EQ(run({"sample"}), 2);
}

TEST_F(CliTest, UsageErrors) {
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"launch"}), 2);
  EXPECT_EQ(run({"pretrain", "--set", "train.steps=-1"}), 2);
  ::testing::internal::GetCapturedStderr();
  ::testing::internal::GetCapturedStdout();
}

TEST_F(CliTest, PretrainThenSampleIsDeterministic) {
  const fs::path cfg = write_config("small.ini", kSmall);
  std::vector<std::string> samples, checkpoints;
  for (int rep = 0; rep < 2; ++rep) {
    const std::string tag = std::to_string(rep);
    ASSERT_EQ(run({"pretrain", "-c", cfg.string(), "--set", "output.run=pre" + tag}), 0);
    const fs::path ck = run_dir("pre" + tag) / "checkpoint.json";
    ASSERT_TRUE(fs::exists(ck));
    ASSERT_TRUE(fs::exists(run_dir("pre" + tag) / "loss.csv"));
    ASSERT_EQ(run({"sample", "-c", cfg.string(), "--set", "field.checkpoint=" + ck.string(),
                   "--set", "output.run=smp" + tag}),
              0);
    samples.push_back(slurp(run_dir("smp" + tag) / "samples.csv"));
    checkpoints.push_back(slurp(ck));
  }
  EXPECT_EQ(samples[0], samples[1]);
  EXPECT_EQ(checkpoints[0], checkpoints[1]);
  EXPECT_EQ(samples[0].substr(0, 4), "x,y\n");

  const nlohmann::json m = fmlab::read_json_file(run_dir("pre0") / "manifest.json");
  EXPECT_EQ(m.at("subcommand"), "pretrain");
  EXPECT_EQ(m.at("checkpoint_hash"),
            fmlab::checkpoint_hash(fmlab::load_checkpoint_file(run_dir("pre0") / "checkpoint.json")));
  EXPECT_TRUE(m.contains("config"));
  EXPECT_TRUE(m.contains("seeds"));
  EXPECT_TRUE(fs::exists(run_dir("pre0") / "config.ini"));

  // The config snapshot alone reproduces the run.
  ASSERT_EQ(run({"pretrain", "-c", (run_dir("pre0") / "config.ini").string(), "--set", "output.run=replay"}), 0);
  EXPECT_EQ(slurp(run_dir("replay") / "checkpoint.json"), checkpoints[0]);
}

TEST_F(CliTest, FinetuneWithZeroLearningRateKeepsHash) {
  const fs::path cfg = write_config("small.ini", kSmall);
  ASSERT_EQ(run({"pretrain", "-c", cfg.string(), "--set", "output.run=pre"}), 0);
  const fs::path ck = run_dir("pre") / "checkpoint.json";
  ASSERT_EQ(run({"finetune", "-c", cfg.string(), "--set", "field.checkpoint=" + ck.string(), "--set",
                 "finetune.lr=0", "--set", "output.run=ft"}),
            0);
  const nlohmann::json m = fmlab::read_json_file(run_dir("ft") / "manifest.json");
  EXPECT_EQ(m.at("checkpoint_hash"), m.at("inputs").at("checkpoint").at("hash"));
  EXPECT_TRUE(fs::exists(run_dir("ft") / "metrics.json"));

  ASSERT_EQ(run({"finetune-residual", "-c", cfg.string(), "--set", "field.checkpoint=" + ck.string(),
                 "--horizon-T", "0.25", "--lambda-omega", "0.1", "--set", "output.run=res"}),
            0);
  const nlohmann::json r = fmlab::read_json_file(run_dir("res") / "manifest.json");
  EXPECT_EQ(r.at("config").at("finetune").at("horizon_T"), "0.25");
  EXPECT_TRUE(fs::exists(run_dir("res") / "residual.json"));
  EXPECT_EQ(run({"finetune-residual", "-c", cfg.string(), "--set", "field.checkpoint=" + ck.string(),
                 "--no-freeze-pretrained", "--set", "output.run=res2"}),
            2);

  ASSERT_EQ(run({"eval", "-c", cfg.string(), "--set", "field.checkpoint=" + ck.string(), "--set",
                 "field.residual_checkpoint=" + (run_dir("res") / "residual.json").string(), "--set",
                 "finetune.horizon_T=0.25", "--set", "output.run=ev"}),
            0);
  const nlohmann::json ev = fmlab::read_json_file(run_dir("ev") / "eval.json");
  for (const char* key : {"w2", "recon_mse", "mean_nfe", "straightness_mean"}) EXPECT_TRUE(ev.contains(key)) << key;
  EXPECT_EQ(ev.at("mean_nfe").get<double>(), 40.0);
}

TEST_F(CliTest, VerifyBoundsPasses) {
  ::testing::internal::CaptureStdout();
  const int code = run({"verify-bounds"});
  const std::string out = ::testing::internal::GetCapturedStdout();
  EXPECT_EQ(code, 0);
  const std::string csv = slurp(run_dir("verify-bounds") / "bounds.csv");
  EXPECT_EQ(csv.rfind("case,L_u,delta,M,eps0,bound4,bound5,measured,pass\n", 0), 0u);
  EXPECT_EQ(csv.find(",false"), std::string::npos);
  EXPECT_NE(out.find("case,L_u"), std::string::npos);
}

TEST_F(CliTest, AnalyzeStabilityOnDissipativeResidual) {
  fmlab::ControlSynthConfig cc;
  cc.dim = 2;
  cc.widths = {3};
  fmlab::ControlSynthField f = fmlab::ControlSynthField::zeros(cc);
  fmlab::Mat w(3, 2);
  w << 1, 0.5, -0.3, 1, 0.7, -0.2;
  f.params().set_value("A0", -fmlab::Mat::Identity(2, 2));
  f.params().set_value("W1", w);
  f.params().set_value("A1", -0.5 * w.transpose());
  const fs::path res = root_ / "res.json";
  fmlab::write_json_file(res, fmlab::save_checkpoint(f, {}));
  ASSERT_EQ(run({"analyze-stability", "--set", "field.residual_checkpoint=" + res.string(), "--set",
                 "stability.probes=20"}),
            0);
  const nlohmann::json v = fmlab::read_json_file(run_dir("analyze-stability") / "verdict.json");
  EXPECT_TRUE(v.at("iss_ok").get<bool>());
  EXPECT_TRUE(v.at("contraction_ok").get<bool>());
  EXPECT_EQ(slurp(run_dir("analyze-stability") / "probes.csv").rfind("probe,t,norm\n", 0), 0u);

  // A supplied certificate that fails is a violation.
  const fs::path bad = root_ / "cert.json";
  fmlab::write_json_file(bad, nlohmann::json::object());
  EXPECT_EQ(run({"analyze-stability", "--set", "field.residual_checkpoint=" + res.string(), "--set",
                 "stability.certificate=" + bad.string(), "--set", "stability.probes=2", "--set",
                 "output.run=bad"}),
            1);
  EXPECT_EQ(run({"probe-contraction", "--set", "field.residual_checkpoint=" + res.string(), "--set",
                 "stability.probes=5"}),
            0);
  EXPECT_TRUE(fs::exists(run_dir("probe-contraction") / "probe_summary.json"));
}

TEST(CliBinary, HelpAndUsageExitCodes) {
  const std::string bin = FMLAB_CLI_PATH;
  EXPECT_EQ(std::system((bin + " --help > /dev/null").c_str()), 0);
  const int status = std::system((bin + " > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
