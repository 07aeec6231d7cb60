// Copyright 2026 The skewent Authors
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

#include "skewent/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace skewent {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  fs::path dir = fs::path(::testing::TempDir()) / "skewent_io_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(Csv, ParsesMatrixWithHeaderAndComments) {
  const Matrix m = io::parse_csv_matrix("a,b\n# note\n1, 2\n\n3,-4.5e-1\r\n", "m.csv");
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 2);
  EXPECT_EQ(m(1, 1), -0.45);
  EXPECT_EQ(m(0, 1), 2.0);
}

TEST(Csv, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of([] { (void)io::parse_csv_matrix("1,2\n3,x\n", "m.csv"); }).find("m.csv:2: column 2"),
            std::string::npos);
  EXPECT_NE(error_of([] { (void)io::parse_csv_matrix("1,2\n\n3\n", "m.csv"); }).find("m.csv:3: expected 2 columns"),
            std::string::npos);
  EXPECT_NE(error_of([] { (void)io::parse_csv_matrix("# only a comment\n", "m.csv"); }).find("no numeric rows"),
            std::string::npos);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.718281828459045, 1e-300, 6.02214076e23}) {
    const std::string s = io::format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  std::ostringstream out;
  io::CsvWriter w(out);
  w.header({"name", "value", "count"});
  w.row({std::string("x"), 0.1, std::uint64_t{7}});
  EXPECT_EQ(out.str(), "name,value,count\nx,0.10000000000000001,7\n");
  EXPECT_THROW(w.row({0.5}), Error);
}

TEST(Grid, RangeAndList) {
  const auto g = io::parse_grid("0:10:0.5");
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.back(), 10.0);
  const auto s = io::parse_grid("-0.7:0.7:0.1");
  ASSERT_EQ(s.size(), 15u);
  EXPECT_EQ(s[7], 0.0);  // snapped, not 1e-16
  EXPECT_EQ(io::parse_grid("1,2,3").size(), 3u);
  EXPECT_THROW((void)io::parse_grid("0:1"), Error);
  EXPECT_THROW((void)io::parse_grid("1:0:0.1"), Error);
  EXPECT_THROW((void)io::parse_grid("0:1:0"), Error);
}

TEST(Spec, UnivariateFamilies) {
  auto sn = io::parse_spec(R"({"family": "sn", "mu": 1, "sigma2": 4, "alpha": 2})", ".", "s.json");
  const auto& d = std::get<SkewNormal>(sn.dist);
  EXPECT_EQ(d.sigma, 2.0);
  EXPECT_EQ(d.alpha, 2.0);
  auto lsn = io::parse_spec(R"({"family": "lsn", "mu": 0, "sigma": 1, "alpha": 1})", ".", "s.json");
  EXPECT_TRUE(std::holds_alternative<LogSkewNormal>(lsn.dist));
  ASSERT_TRUE(lsn.lsn.has_value());
  auto ln = io::parse_spec(R"({"family": "lognormal", "mu": 1, "sigma": 1})", ".", "s.json");
  EXPECT_TRUE(std::holds_alternative<LogNormal>(ln.dist));
}

TEST(Spec, CsvPathsResolveAgainstSpecDirectory) {
  write(scratch("delta.csv"), "0.5,0.1\n0.2,0.3\n");
  write(scratch("sigma.csv"), "2,0.5\n0.5,1\n");
  write(scratch("mu.csv"), "1\n-1\n");
  write(scratch("spec.json"), R"({"family": "lcfusn", "mu": "mu.csv", "Sigma": "sigma.csv", "Delta": "delta.csv",
  "partition": 1})");
  auto s = io::load_spec(scratch("spec.json"));
  const auto& l = std::get<Lcfusn>(s.dist);
  EXPECT_EQ(l.delta.cols(), 2u);
  EXPECT_EQ(l.ls.mu()(1), -1.0);
  EXPECT_EQ(l.ls.sigma().matrix()(0, 1), 0.5);
  EXPECT_EQ(s.partition, 1u);
}

TEST(Spec, CanonicalDefaultsAndMultivariateLsn) {
  auto c = io::parse_spec(R"({"family": "cfusn", "Delta": [[0.3], [0.4]]})", ".", "c.json");
  EXPECT_TRUE(std::get<Cfusn>(c.dist).ls.is_canonical());
  auto y = io::parse_spec(R"({"family": "lsn", "mu": [0, 1], "Sigma": [[1, 0.2], [0.2, 2]], "alpha": [1, -1]})", ".",
                          "y.json");
  ASSERT_TRUE(y.lsn.has_value());
  EXPECT_EQ(y.lsn->dim(), 2u);
  EXPECT_TRUE(std::holds_alternative<Lcfusn>(y.dist));
}

TEST(Spec, ValidationMessagesPointAtTheKey) {
  const std::string text = "{\n  \"family\": \"cfusn\",\n  \"Delta\": [[0.8], [0.7]]\n}\n";
  const auto msg = error_of([&] { (void)io::parse_spec(text, ".", "bad.json"); });
  EXPECT_NE(msg.find("bad.json:3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("||Delta a|| < 1"), std::string::npos) << msg;
  try {
    (void)io::parse_spec(text, ".", "bad.json");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
  }
}

TEST(Spec, SyntaxAndSchemaErrors) {
  EXPECT_NE(error_of([] { (void)io::parse_spec("{\n\"family\": \"sn\",\n\"mu\": ,\n}", ".", "x.json"); })
                .find("x.json:3:"),
            std::string::npos);
  EXPECT_NE(error_of([] { (void)io::parse_spec("{\"family\": \"sn\",\n\"mu\": 0, \"sigma\": 1, \"alpah\": 1}", ".",
                                               "x.json"); })
                .find("x.json:2: unknown key 'alpah'"),
            std::string::npos);
  EXPECT_NE(error_of([] { (void)io::parse_spec(R"({"family": "gamma"})", ".", "x.json"); }).find("unknown family"),
            std::string::npos);
  EXPECT_NE(error_of([] { (void)io::parse_spec(R"({"family": "sn", "mu": 0, "sigma": 1})", ".", "x.json"); })
                .find("missing key 'alpha'"),
            std::string::npos);
  EXPECT_NE(error_of([] { (void)io::parse_spec(R"({"family": "normal", "mu": 0, "sigma": -1})", ".", "x.json"); })
                .find("x.json:1:"),
            std::string::npos);
  EXPECT_NE(error_of([] {
              (void)io::parse_spec(R"({"family": "cfusn", "mu": [0, 0, 0], "Delta": [[0.1], [0.2]]})", ".", "x.json");
            }).find("mu has 3 entries"),
            std::string::npos);
}

TEST(Manifest, RoundTrip) {
  io::RunManifest m;
  m.command = "entropy";
  m.spec_files = {"/a/b.json"};
  m.seed = 18446744073709551615ull;
  m.n_samples = 100000;
  m.timestamp = io::utc_timestamp();
  m.output = "out.csv";
  m.args = {"entropy", "--spec", "/a/b.json"};
  io::write_manifest(m, scratch("m.json"));
  const auto r = io::read_manifest(scratch("m.json"));
  EXPECT_EQ(r.seed, m.seed);
  EXPECT_EQ(r.args, m.args);
  EXPECT_EQ(r.tool_version, std::string(kVersion));
  EXPECT_EQ(r.timestamp.size(), 20u);  // YYYY-MM-DDTHH:MM:SSZ
}

}  // namespace
}  // namespace skewent
