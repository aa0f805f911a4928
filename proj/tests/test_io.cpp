#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oplength/io.hpp"
#include "oplength/oplength.hpp"

using namespace oplength;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("oplength_test_io_" + name);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST(Io, InstanceRoundTripIsBitExact) {
  const auto x = random_block_matrix(3, 4, 1) * Complex(1.0 / 3.0);
  const auto path = temp_file("instance.json");
  io::write_instance(path.string(), x);
  const auto y = io::read_instance(path.string());
  ASSERT_TRUE(x.same_shape(y));
  EXPECT_TRUE(x.inflated() == y.inflated());
  fs::remove(path);
}

TEST(Io, CertificateRoundTripIsBitExact) {
  const auto x = random_block_matrix(2, 2, 2);
  const auto c = ampliation_certificate(x);
  const auto path = temp_file("cert.json");
  io::write_certificate(path.string(), c);
  const auto d = io::read_certificate(path.string());
  EXPECT_EQ(d.depth(), c.depth());
  EXPECT_EQ(d.widths(), c.widths());
  EXPECT_EQ(d.claimed_cost(), c.claimed_cost());
  for (std::size_t i = 0; i < c.alphas().size(); ++i) EXPECT_TRUE(d.alphas()[i].matrix() == c.alphas()[i].matrix());
  for (std::size_t i = 0; i < c.diags().size(); ++i)
    for (Index e = 0; e < c.diags()[i].size(); ++e)
      EXPECT_TRUE(d.diags()[i][e].matrix() == c.diags()[i][e].matrix());
  fs::remove(path);
}

TEST(Io, ExtremeValuesRoundTrip) {
  BlockMatrix x(1, 1, 2);
  CMatrix m(2, 2);
  m << Complex(1e-300, -0.1), Complex(1.0 / 7.0, 4.9e-324), Complex(-1e300, 0.0), Complex(0.3, 2.0 / 3.0);
  x = BlockMatrix(1, 1, 2, m);
  const auto j = io::instance_to_json(x);
  const auto y = io::instance_from_json(io::json::parse(j.dump()));
  EXPECT_TRUE(x.inflated() == y.inflated());
}

TEST(Io, MalformedInstances) {
  using io::json;
  EXPECT_THROW(io::instance_from_json(json::parse(R"({"k": 1, "blocks": [[[[[1, 0]]]]]})")), io::FormatError);
  EXPECT_THROW(io::instance_from_json(json::parse(R"({"n": 1, "k": 1, "blocks": [[[[[1]]]]]})")), io::FormatError);
  EXPECT_THROW(io::instance_from_json(json::parse(R"({"n": 2, "k": 1, "blocks": [[[[[1, 0]]]]]})")), io::FormatError);
  EXPECT_THROW(io::instance_from_json(json::parse(R"({"n": "two", "k": 1, "blocks": []})")), io::FormatError);
  EXPECT_THROW(io::instance_from_json(json::parse(R"({"n": 0, "k": 1, "blocks": []})")), io::FormatError);
  EXPECT_NO_THROW(io::instance_from_json(json::parse(R"({"n": 1, "k": 1, "blocks": [[[[[1, 0]]]]]})")));
}

TEST(Io, MalformedCertificates) {
  const auto good = io::certificate_to_json(universal_length_one(random_block_matrix(2, 2, 3)));
  auto bad = good;
  bad["d"] = 2;
  EXPECT_THROW(io::certificate_from_json(bad), io::FormatError);
  bad = good;
  bad["widths"][1] = 3;
  EXPECT_THROW(io::certificate_from_json(bad), io::FormatError);
  bad = good;
  bad.erase("alphas");
  EXPECT_THROW(io::certificate_from_json(bad), io::FormatError);
  EXPECT_NO_THROW(io::certificate_from_json(good));
}

TEST(Io, UnreadableFiles) {
  EXPECT_THROW(io::read_instance("/nonexistent/dir/file.json"), io::FormatError);
  const auto path = temp_file("garbage.json");
  write_text(path, "{ not json");
  EXPECT_THROW(io::read_instance(path.string()), io::FormatError);
  fs::remove(path);
}
