#include "cpcp/errors.hpp"
#include "cpcp/io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

using namespace cpcp;
using namespace cpcp::test;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cpcp_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path with_text(const std::string& name, const std::string& text) {
  const auto path = scratch(name);
  write_text_file(path, text);
  return path;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("feature files detect their delimiter") {
  Matrix expected(2, 3);
  expected << 1.5, -2.0, 3.25, 0.0, 1e-3, 7.0;
  CHECK(read_feature_file(with_text("comma.txt", "1.5,-2.0,3.25\n0.0, 1e-3 ,7.0\n")) == expected);
  CHECK(read_feature_file(with_text("tab.txt", "1.5\t-2.0\t3.25\n\n0.0\t1e-3\t7.0\n")) == expected);
  CHECK(read_feature_file(with_text("space.txt", "  1.5  -2.0 3.25\r\n0.0 1e-3   7.0\n")) == expected);
}

TEST_CASE("feature file errors carry file and line") {
  const auto ragged = with_text("ragged.txt", "1.0,2.0\n3.0\n");
  const std::string msg = error_of([&] { (void)read_feature_file(ragged); });
  CHECK(msg.find("ragged.txt:2") != std::string::npos);
  const auto bad = with_text("bad.txt", "1.0 2.0\n3.0 x\n");
  CHECK(error_of([&] { (void)read_feature_file(bad); }).find("bad.txt:2") != std::string::npos);
  CHECK_THROWS_AS(read_feature_file(with_text("inf.txt", "1.0 inf\n")), ValidationError);
  CHECK_THROWS_AS(read_feature_file(with_text("empty.txt", "\n\n")), ValidationError);
  CHECK_THROWS_AS(read_feature_file(scratch("does_not_exist.txt")), ValidationError);
}

TEST_CASE("feature files round trip exactly") {
  Rng rng(3);
  Matrix values = random_matrix(rng, 7, 4, -1e3, 1e3);
  values(0, 0) = 2.0;
  values(1, 1) = 1e-300;
  const auto path = scratch("round.txt");
  write_feature_file(path, values);
  CHECK(read_feature_file(path) == values);
  CHECK(read_text_file(path).find("2.0,") == 0);
}

TEST_CASE("label files hold one or more labels per line") {
  const LabelSets labels = read_label_file(with_text("labels.txt", "0\n1,2\n2 0 1\n"));
  CHECK(labels == LabelSets{{0}, {1, 2}, {2, 0, 1}});
  const auto path = scratch("labels_out.txt");
  write_label_file(path, labels);
  CHECK(read_label_file(path) == labels);
  CHECK_THROWS_AS(read_label_file(with_text("gap.txt", "0\n\n1\n")), ValidationError);
  CHECK_THROWS_AS(read_label_file(with_text("word.txt", "0\ncat\n")), ValidationError);
}

TEST_CASE("constraint files") {
  const ConstraintSet c = read_constraints_file(with_text("c.txt", "# pairs\n0 1 1\n2 3 -1\n1 3 +1\n"), 4);
  CHECK(c.must_links == std::vector<IndexPair>{{0, 1}, {1, 3}});
  CHECK(c.cannot_links == std::vector<IndexPair>{{2, 3}});
  const auto path = scratch("c_out.txt");
  write_constraints_file(path, c);
  const ConstraintSet back = read_constraints_file(path, 4);
  CHECK(back.must_links == c.must_links);
  CHECK(back.cannot_links == c.cannot_links);

  CHECK_THROWS_AS(read_constraints_file(with_text("c_label.txt", "0 1 2\n"), 4), ValidationError);
  CHECK_THROWS_AS(read_constraints_file(with_text("c_short.txt", "0 1\n"), 4), ValidationError);
  CHECK_THROWS_AS(read_constraints_file(with_text("c_range.txt", "0 4 1\n"), 4), ValidationError);
  CHECK_THROWS_AS(read_constraints_file(with_text("c_both.txt", "0 1 1\n1 0 -1\n"), 4), ValidationError);
}

TEST_CASE("assignment files list one label per line") {
  const auto path = scratch("assign.txt");
  write_assignment_file(path, {2, 0, 1});
  CHECK(read_text_file(path) == "2\n0\n1\n");
}
