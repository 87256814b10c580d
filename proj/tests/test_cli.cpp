/* Copyright 2026 The CSDS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "csds/csds.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kSmall = R"({
  "model": {"d_model": 16, "heads": 2, "ff_width": 16, "d_z": 4, "vae_hidden": 8,
            "lstm_hidden": 8, "memory_slots": 4, "conv1_channels": 2, "conv2_channels": 3},
  "train": {"epochs": 2, "batch_size": 4, "crop_frames": 24, "vae_poses_per_clip": 4,
            "contrastive_pairs": 4},
  "synth": {"clips_per_style": 3, "frames": 32, "seed": 7},
  "eval": {"diversity_samples": 6}
})";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("csds_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args, const std::string& err_file = "/dev/null") {
  const std::string cmd = std::string(CSDS_CLI_PATH) + " " + args + " > /dev/null 2> " + err_file;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---- C API ------------------------------------------------------------------

TEST(CApi, EffectiveConfigFillsDefaults) {
  char* out = nullptr;
  ASSERT_EQ(csds_config_effective(R"({"train":{"epochs":3}})", &out), CSDS_OK);
  const json j = json::parse(out);
  csds_string_free(out);
  EXPECT_EQ(j["train"]["epochs"], 3);
  EXPECT_EQ(j["train"]["batch_size"], 8);
  EXPECT_TRUE(j.contains("model"));
}

TEST(CApi, ErrorsMapToStatusCodes) {
  char* out = nullptr;
  EXPECT_EQ(csds_config_effective(R"({"trian":{}})", &out), CSDS_ERR_DATA);
  EXPECT_NE(std::string(csds_last_error()).find("trian"), std::string::npos);
  EXPECT_EQ(csds_config_effective("{}", nullptr), CSDS_ERR_USAGE);
  csds_model* m = nullptr;
  EXPECT_EQ(csds_model_load("/nonexistent/model.ckpt", &m), CSDS_ERR_IO);
  EXPECT_EQ(m, nullptr);
  EXPECT_EQ(csds_embed(nullptr, "x", "y", "z"), CSDS_ERR_USAGE);
  EXPECT_NE(std::string(csds_version()), "");
}

TEST(CApi, TrainLoadEmbedRoundTrip) {
  TempDir dir;
  ASSERT_EQ(csds_synth_corpus(kSmall, (dir / "c.ndjson").c_str()), CSDS_OK) << csds_last_error();
  std::size_t epochs = 0;
  auto cb = [](std::size_t, double loss, void* user) {
    EXPECT_TRUE(std::isfinite(loss));
    ++*static_cast<std::size_t*>(user);
  };
  ASSERT_EQ(csds_train((dir / "c.ndjson").c_str(), kSmall, nullptr, (dir / "m.ckpt").c_str(), cb, &epochs),
            CSDS_OK)
      << csds_last_error();
  EXPECT_EQ(epochs, 2u);
  csds_model* m = nullptr;
  ASSERT_EQ(csds_model_load((dir / "m.ckpt").c_str(), &m), CSDS_OK);
  char* info = nullptr;
  ASSERT_EQ(csds_model_info(m, &info), CSDS_OK);
  const json j = json::parse(info);
  csds_string_free(info);
  EXPECT_EQ(j["history"].size(), 2u);
  EXPECT_EQ(csds_embed(m, (dir / "c.ndjson").c_str(), "no-such-clip", (dir / "e.json").c_str()), CSDS_ERR_DATA);
  csds_model_free(m);
}

// ---- CLI --------------------------------------------------------------------

TEST(Cli, NoArgumentsIsUsageError) { EXPECT_EQ(run(""), 1); }

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(run("dance"), 1); }

TEST(Cli, SynthDataIsDeterministic) {
  TempDir dir;
  ASSERT_EQ(run("synth-data --seed 7 --clips-per-style 2 --frames 32 --out " + (dir / "a.ndjson")), 0);
  ASSERT_EQ(run("synth-data --seed 7 --clips-per-style 2 --frames 32 --out " + (dir / "b.ndjson")), 0);
  ASSERT_EQ(run("synth-data --seed 8 --clips-per-style 2 --frames 32 --out " + (dir / "c.ndjson")), 0);
  EXPECT_EQ(slurp(dir / "a.ndjson"), slurp(dir / "b.ndjson"));
  EXPECT_NE(slurp(dir / "a.ndjson"), slurp(dir / "c.ndjson"));
}

TEST(Cli, StructuredErrors) {
  TempDir dir;
  std::ofstream(dir / "bad.json") << R"({"train":{"epochz":1}})";
  EXPECT_EQ(run("synth-data --config " + (dir / "bad.json") + " --out " + (dir / "x"), dir / "err.txt"), 2);
  const json err = json::parse(slurp(dir / "err.txt"));
  EXPECT_EQ(err["code"], 2);
  EXPECT_NE(err["message"].get<std::string>().find("epochz"), std::string::npos);
  EXPECT_EQ(run("train --corpus /nonexistent.ndjson --out " + (dir / "m")), 3);
  std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  EXPECT_EQ(run("embed --model " + (dir / "junk.ckpt") + " --clip a --corpus x --out y"), 3);
  EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST(Cli, FullPipeline) {
  TempDir dir;
  std::ofstream(dir / "cfg.json") << kSmall;
  const std::string cfg = " --config " + (dir / "cfg.json");
  ASSERT_EQ(run("synth-data" + cfg + " --out " + (dir / "c.ndjson")), 0);
  ASSERT_EQ(run("train --quiet --corpus " + (dir / "c.ndjson") + cfg + " --epochs 2 --out " + (dir / "m.ckpt")), 0);
  ASSERT_EQ(run("train --quiet --corpus " + (dir / "c.ndjson") + " --resume " + (dir / "m.ckpt") +
                " --epochs 1 --out " + (dir / "m3.ckpt")),
            0);
  ASSERT_EQ(run("embed --model " + (dir / "m.ckpt") + " --corpus " + (dir / "c.ndjson") +
                " --clip anime_dance_000 --out " + (dir / "style.json")),
            0);
  const json style = json::parse(slurp(dir / "style.json"));
  EXPECT_TRUE(style["embedding"].is_array());

  ASSERT_EQ(run("generate --model " + (dir / "m.ckpt") + " --music " + (dir / "c.ndjson") +
                " --style-file " + (dir / "style.json") + " --seed 3 --out " + (dir / "g1.ndjson")),
            0);
  ASSERT_EQ(run("generate --model " + (dir / "m.ckpt") + " --music " + (dir / "c.ndjson") +
                " --style-from locking_dance_001 --seed 3 --out " + (dir / "g2.ndjson")),
            0);
  ASSERT_EQ(run("generate --model " + (dir / "m.ckpt") + " --music " + (dir / "c.ndjson") +
                " --style-file " + (dir / "style.json") + " --seed 3 --out " + (dir / "g3.ndjson")),
            0);
  EXPECT_EQ(slurp(dir / "g1.ndjson"), slurp(dir / "g3.ndjson"));
  EXPECT_NE(slurp(dir / "g1.ndjson"), slurp(dir / "g2.ndjson"));

  ASSERT_EQ(run("evaluate --model " + (dir / "m.ckpt") + " --corpus " + (dir / "c.ndjson") + cfg +
                " --threads 2 --report " + (dir / "r.json")),
            0);
  const json r = json::parse(slurp(dir / "r.json"));
  for (const char* k : {"beat", "intensity", "fid_consistency", "fid_diversity", "cluster_accuracy", "pca"})
    EXPECT_TRUE(r.contains(k)) << k;
  EXPECT_TRUE(r["intensity"]["pearson"].is_number());
  EXPECT_TRUE(r["pca"]["points"].is_array());
  EXPECT_EQ(r["pca"]["explained"].size(), 2u);
  EXPECT_TRUE(r.contains("config"));

  ASSERT_EQ(run("pca --model " + (dir / "m.ckpt") + " --corpus " + (dir / "c.ndjson") + " --out " +
                (dir / "p.csv")),
            0);
  EXPECT_EQ(slurp(dir / "p.csv").rfind("x,y,", 0), 0u);
}

}  // namespace
