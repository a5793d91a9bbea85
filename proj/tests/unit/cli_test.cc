// Copyright 2026 The MSIC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "cli.h"
#include "gtest/gtest.h"
#include "msic/bytes.h"
#include "msic/codec.h"
#include "msic/corpus.h"
#include "msic/log.h"
#include "msic/png_io.h"
#include "rd_plot.h"

namespace msic {
namespace {

namespace fs = std::filesystem;
using cli::format_rd_csv;
using cli::kRdCsvHeader;
using cli::parse_rd_csv;
using cli::RdRow;
using cli::render_rd_svg;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int exit_code_of(const std::string& args) {
  const std::string cmd = std::string(MSIC_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

constexpr char kTinyConfig[] =
    "M=2\nchannels=1,2\nN=5\nhidden_width=4\ndepth=3\nK=2\ncoder_width=4\n"
    "ae_updates=6\nae_batch_size=2\ncrop=16\ncoder_updates=4\ncoder_batch_size=2\n";

// Shared fixture: a tiny corpus and a fully trained tiny model.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    set_warnings_enabled(false);
    dir_ = new fs::path(fs::temp_directory_path() / ("msic_cli_test_" + std::to_string(::getpid())));
    fs::remove_all(*dir_);
    fs::create_directories(*dir_);
    write_corpus((*dir_ / "corpus").string(), make_toy_corpus(4, 32, 40, 1));
    spit(*dir_ / "tiny.cfg", kTinyConfig);
    ASSERT_EQ(run({"train", "--stage", "ae", "--corpus", path("corpus"), "--config", path("tiny.cfg"),
                   "--out", path("ae.model"), "--seed", "3"}),
              cli::kExitOk);
    ASSERT_EQ(run({"train", "--stage", "coder", "--corpus", path("corpus"), "--config",
                   path("tiny.cfg"), "--ae", path("ae.model"), "--out", path("full.model"),
                   "--seed", "4"}),
              cli::kExitOk);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
    set_warnings_enabled(true);
  }

  static int run(const std::vector<std::string>& args) { return cli::run(args); }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"nonsense"}), cli::kExitUsage);
  EXPECT_EQ(run({"compress", path("x.png")}), cli::kExitUsage);
  EXPECT_EQ(run({"train", "--stage", "both", "--corpus", path("corpus"), "--config",
                 path("tiny.cfg"), "--out", path("x.model")}),
            cli::kExitUsage);
}

TEST_F(CliTest, CoderStageWithoutAutoencoderIsUsageError) {
  EXPECT_EQ(run({"train", "--stage", "coder", "--corpus", path("corpus"), "--config",
                 path("tiny.cfg"), "--out", path("x.model")}),
            cli::kExitUsage);
}

TEST_F(CliTest, BinaryExitCodes) {
  EXPECT_EQ(exit_code_of("--help"), cli::kExitOk);
  EXPECT_EQ(exit_code_of("bogus"), cli::kExitUsage);
  EXPECT_EQ(exit_code_of("decompress " + path("missing.msic") + " --model " + path("full.model") +
                         " --out " + path("o.png")),
            cli::kExitData);
}

TEST_F(CliTest, CompressDecompressRoundTrip) {
  const std::string img = path("corpus/toy_0000.png");
  ASSERT_EQ(run({"compress", img, "--model", path("full.model"), "--out", path("a.msic")}), cli::kExitOk);
  ASSERT_EQ(run({"decompress", path("a.msic"), "--model", path("full.model"), "--out", path("a1.png")}),
            cli::kExitOk);
  ASSERT_EQ(run({"decompress", path("a.msic"), "--model", path("full.model"), "--out", path("a2.png")}),
            cli::kExitOk);
  EXPECT_EQ(slurp(path("a1.png")), slurp(path("a2.png")));
  const Model m = load_model(path("full.model"));
  const Tensor direct = reconstruct_direct(m, read_png(img));
  EXPECT_EQ(read_png(path("a1.png")), quantize_to_8bit(direct));
  // Compression is deterministic too.
  ASSERT_EQ(run({"compress", img, "--model", path("full.model"), "--out", path("b.msic")}), cli::kExitOk);
  EXPECT_EQ(slurp(path("a.msic")), slurp(path("b.msic")));
}

TEST_F(CliTest, MismatchedModelExitsWithThree) {
  ASSERT_EQ(run({"compress", path("corpus/toy_0001.png"), "--model", path("full.model"), "--out",
                 path("m.msic")}),
            cli::kExitOk);
  ASSERT_EQ(run({"train", "--stage", "coder", "--corpus", path("corpus"), "--config",
                 path("tiny.cfg"), "--ae", path("ae.model"), "--out", path("other.model"),
                 "--seed", "99"}),
            cli::kExitOk);
  EXPECT_EQ(run({"decompress", path("m.msic"), "--model", path("other.model"), "--out", path("m.png")}),
            cli::kExitModelMismatch);
  EXPECT_EQ(exit_code_of("decompress " + path("m.msic") + " --model " + path("other.model") +
                         " --out " + path("m.png")),
            cli::kExitModelMismatch);
}

TEST_F(CliTest, CorruptContainerIsDataError) {
  ASSERT_EQ(run({"compress", path("corpus/toy_0002.png"), "--model", path("full.model"), "--out",
                 path("c.msic")}),
            cli::kExitOk);
  std::string bytes = slurp(path("c.msic"));
  bytes.resize(bytes.size() - 2);
  spit(path("c_bad.msic"), bytes);
  EXPECT_EQ(run({"decompress", path("c_bad.msic"), "--model", path("full.model"), "--out",
                 path("c.png")}),
            cli::kExitData);
  spit(path("garbage.msic"), "hello world");
  EXPECT_EQ(run({"decompress", path("garbage.msic"), "--model", path("full.model"), "--out",
                 path("c.png")}),
            cli::kExitData);
}

TEST_F(CliTest, AlphaPngIsRejected) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 2;
  image.height = 2;
  image.format = PNG_FORMAT_RGBA;
  const std::vector<uint8_t> pixels(16, 200);
  png_alloc_size_t size = 0;
  ASSERT_TRUE(png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr));
  std::vector<uint8_t> rgba(size);
  ASSERT_TRUE(png_image_write_to_memory(&image, rgba.data(), &size, 0, pixels.data(), 0, nullptr));
  rgba.resize(size);
  write_file(path("rgba.png"), rgba);
  EXPECT_THROW(decode_png(rgba), FormatError);
  EXPECT_EQ(run({"compress", path("rgba.png"), "--model", path("full.model"), "--out", path("r.msic")}),
            cli::kExitData);
}

TEST_F(CliTest, EvalWritesRowsAndMean) {
  ASSERT_EQ(run({"eval", "--corpus", path("corpus"), "--model", path("full.model"), "--out",
                 path("eval.csv"), "--no-timing"}),
            cli::kExitOk);
  const auto rows = parse_rd_csv(slurp(path("eval.csv")));
  ASSERT_EQ(rows.size(), 5u);
  double mean_bpp = 0;
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(rows[i].label, "msic");
    EXPECT_GT(rows[i].bpp, 0);
    EXPECT_GT(rows[i].ms_ssim, 0);
    EXPECT_LE(rows[i].ms_ssim, 1);
    EXPECT_EQ(rows[i].enc_s, 0);
    mean_bpp += rows[i].bpp / 4;
  }
  EXPECT_EQ(rows[4].image, "mean");
  EXPECT_NEAR(rows[4].bpp, mean_bpp, 1e-12);
  // Deterministic, also with several jobs.
  ASSERT_EQ(run({"eval", "--corpus", path("corpus"), "--model", path("full.model"), "--out",
                 path("eval2.csv"), "--no-timing", "--jobs", "3"}),
            cli::kExitOk);
  EXPECT_EQ(slurp(path("eval.csv")), slurp(path("eval2.csv")));
}

TEST_F(CliTest, EvalEmptyCorpusWritesHeaderOnly) {
  fs::create_directories(path("empty"));
  ASSERT_EQ(run({"eval", "--corpus", path("empty"), "--model", path("full.model"), "--out",
                 path("empty.csv")}),
            cli::kExitOk);
  EXPECT_EQ(slurp(path("empty.csv")), kRdCsvHeader);
}

TEST_F(CliTest, AutoencoderOnlyModelCannotCompress) {
  EXPECT_EQ(run({"compress", path("corpus/toy_0000.png"), "--model", path("ae.model"), "--out",
                 path("x.msic")}),
            cli::kExitData);
}

TEST_F(CliTest, ResumeReproducesTrajectory) {
  for (const std::string stage : {"ae", "coder"}) {
    std::vector<std::string> base = {"train", "--stage", stage, "--corpus", path("corpus"),
                                     "--config", path("tiny.cfg"), "--seed", "5"};
    if (stage == "coder") {
      base.push_back("--ae");
      base.push_back(path("ae.model"));
    }
    auto with = [&](std::vector<std::string> extra) {
      auto a = base;
      a.insert(a.end(), extra.begin(), extra.end());
      return a;
    };
    ASSERT_EQ(run(with({"--out", path("full_" + stage + ".model")})), cli::kExitOk);
    ASSERT_EQ(run(with({"--out", path("split_" + stage + ".model"), "--stop-at", "3"})), cli::kExitOk);
    ASSERT_EQ(run(with({"--out", path("split_" + stage + ".model"), "--resume"})), cli::kExitOk);
    EXPECT_EQ(slurp(path("full_" + stage + ".model")), slurp(path("split_" + stage + ".model"))) << stage;
    EXPECT_EQ(slurp(path("full_" + stage + ".model.log.csv")),
              slurp(path("split_" + stage + ".model.log.csv")))
        << stage;
  }
}

TEST_F(CliTest, BenchWithoutExternalCodecs) {
  ASSERT_EQ(run({"bench", "--corpus", path("corpus"), "--model", path("full.model"), "--jpeg-cmd",
                 "definitely-not-a-codec {in} {out}", "--out", path("bench"), "--no-timing"}),
            cli::kExitOk);
  const auto rows = parse_rd_csv(slurp(path("bench/bench.csv")));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_TRUE(fs::exists(path("bench/rd.svg")));
  ASSERT_EQ(run({"plot", "--csv", path("bench/bench.csv"), "--out", path("again.svg")}), cli::kExitOk);
  EXPECT_EQ(slurp(path("bench/rd.svg")), slurp(path("again.svg")));
}

TEST_F(CliTest, BenchWithShellCodec) {
  // A "codec" that stores the PNG unchanged: full quality at PNG rate.
  ASSERT_EQ(run({"bench", "--corpus", path("corpus"), "--model", path("full.model"), "--jpeg-cmd",
                 "cp {in} {out} ::: cp {out} {recon}", "--qualities", "50", "--out",
                 path("bench2"), "--no-timing"}),
            cli::kExitOk);
  const auto rows = parse_rd_csv(slurp(path("bench2/bench.csv")));
  int copies = 0;
  for (const auto& r : rows) {
    if (r.label == "jpeg@q50" && r.image != "mean") {
      EXPECT_NEAR(r.ms_ssim, 1.0, 1e-12);
      ++copies;
    }
  }
  EXPECT_EQ(copies, 4);
}

TEST_F(CliTest, MakeCorpusIsDeterministic) {
  ASSERT_EQ(run({"make-corpus", "--out", path("mc1"), "--count", "3", "--seed", "7"}), cli::kExitOk);
  ASSERT_EQ(run({"make-corpus", "--out", path("mc2"), "--count", "3", "--seed", "7"}), cli::kExitOk);
  for (const char* n : {"toy_0000.png", "toy_0001.png", "toy_0002.png"}) {
    EXPECT_EQ(slurp(path(std::string("mc1/") + n)), slurp(path(std::string("mc2/") + n)));
  }
}

TEST(RdPlotTest, CsvRoundTripAndSvgDeterminism) {
  const std::vector<RdRow> rows = {{"msic", "a.png", 0.5, 0.9, 1, 2},
                                   {"msic", "b.png", 0.25, 0.8, 1, 2},
                                   {"jpeg@q50", "a.png", 1.0, 0.95, 0, 0}};
  const std::string csv = format_rd_csv(rows);
  EXPECT_EQ(csv.rfind(kRdCsvHeader, 0), 0u);
  const auto back = parse_rd_csv(csv);
  ASSERT_EQ(back.size(), 5u);
  EXPECT_EQ(back[0].image, "a.png");
  EXPECT_DOUBLE_EQ(back[3].bpp, 0.375);  // msic mean
  EXPECT_EQ(render_rd_svg(back), render_rd_svg(parse_rd_csv(csv)));
  EXPECT_NE(render_rd_svg(back).find("<svg"), std::string::npos);
}

}  // namespace
}  // namespace msic
