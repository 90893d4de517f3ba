#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "sshwalk/io.hpp"

using namespace sshwalk;

TEST_CASE("shortest round-trip formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1.5e-300) == "-1.5e-300");
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("csv writer") {
  CsvWriter csv({"a", "b"});
  csv.row({"1", "2"}).row({"3", "4"});
  CHECK(csv.str() == "a,b\n1,2\n3,4\n");
  CHECK_THROWS(csv.row({"1"}));
}

TEST_CASE("generator json round trip") {
  const ChainGenerator g = build_ssh_generator(RateConfig::from_bias(1.0, -0.25), 5);
  const json doc = to_json(g);
  CHECK(doc["n_sites"] == 5);
  CHECK(doc["config"]["alpha"] == -0.25);
  const ChainGenerator back = generator_from_json(json::parse(doc.dump()));
  CHECK(back.diagonal == g.diagonal);
  CHECK(back.off_diagonal == g.off_diagonal);
  CHECK(back.jump_left == g.jump_left);
  CHECK(back.jump_right == g.jump_right);
  REQUIRE(back.rates() != nullptr);
  CHECK(back.rates()->gamma_l() == 0.75);
}

TEST_CASE("winding json") {
  const RateConfig cfg = RateConfig::from_bias(1.0, -0.5);
  const json doc = to_json(winding_number(cfg), cfg);
  CHECK(doc["W"] == 1);
  CHECK(doc["zak_phase"] == 0.5);
  CHECK(doc["label"] == "nontrivial");
}

TEST_CASE("fit json") {
  FitResult fit;
  fit.terms = {{0.5, 0.25}, {2.0, 0.75}};
  fit.residual = 1e-3;
  fit.k_terms = 2;
  const json doc = to_json(fit);
  CHECK(doc["terms"].size() == 2);
  CHECK(doc["terms"][1]["beta"] == 2.0);
  CHECK(doc["terms"][1]["A"] == 0.75);
  CHECK(doc["effective_k"] == 2);
}

TEST_CASE("ensemble binary round trip") {
  EscapeTimeEnsemble e =
      sample_ensemble(RateConfig::from_bias(1.0, 0.2), 4, 1000, InitialSpec::at_site(2), 17);
  e.rescale(2.0, "1/(2 gamma_bar)");
  const std::string bytes = encode_ensemble(e, to_json(RateConfig::from_bias(1.0, 0.2)));
  const std::size_t newline = bytes.find('\n');
  REQUIRE(newline != std::string::npos);
  CHECK(bytes.size() == newline + 1 + 8 * 1000);

  json header;
  const EscapeTimeEnsemble back = decode_ensemble(bytes, &header);
  CHECK(back.times == e.times);
  CHECK(back.seed == 17);
  CHECK(back.n_sites == 4);
  CHECK(back.initial.describe() == "site:2");
  CHECK(back.time_scale == 2.0);
  CHECK(back.fingerprint == e.fingerprint);
  CHECK(header["format"] == "sshwalk-ensemble");
  CHECK(header["rng"] == "philox4x64-10");
  CHECK(header["i_max"] == 1000);

  CHECK_THROWS(decode_ensemble(bytes.substr(0, bytes.size() - 3)));
  CHECK_THROWS(decode_ensemble("not json\n"));
}

TEST_CASE("curve csv round trip") {
  ReconstructedCurve c;
  c.kind = CurveKind::etd;
  c.points = {{0.5, 0.1}, {1.0 / 3.0, std::nextafter(0.2, 1.0)}};
  const ReconstructedCurve back = parse_curve_csv(curve_csv(c));
  CHECK(back.kind == CurveKind::etd);
  REQUIRE(back.points.size() == 2);
  CHECK(back.points[1].t == c.points[1].t);
  CHECK(back.points[1].value == c.points[1].value);
  CHECK_THROWS(parse_curve_csv("x,y\n1,2\n"));
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "sshwalk_test_io" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_file(dir / "x.bin", std::string("a\0b", 3));
  CHECK(read_file(dir / "x.bin") == std::string("a\0b", 3));
  CHECK_THROWS(read_file(dir / "missing"));
  std::filesystem::remove_all(dir.parent_path());
}
