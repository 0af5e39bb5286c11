#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "s2cd/dataset.hpp"

using namespace s2cd;

namespace {

SparseDataset small() {
  return SparseDataset::from_rows({{{0, 1.0}, {2, -2.0}}, {{1, 3.0}}, {{0, 4.0}, {1, 5.0}, {2, 6.0}}},
                                  {1.0, -1.0, 0.5}, 3);
}

}  // namespace

TEST_CASE("dataset: rows and columns describe the same matrix") {
  const auto data = small();
  CHECK(data.num_examples() == 3);
  CHECK(data.num_features() == 3);
  CHECK(data.nnz() == 6);
  std::size_t seen = 0;
  for (std::size_t j = 0; j < data.num_features(); ++j) {
    std::uint32_t prev = 0;
    bool first = true;
    for (const auto& e : data.col(j)) {
      CHECK(data.at(e.index, j) == e.value);
      if (!first) CHECK(e.index > prev);
      prev = e.index;
      first = false;
      ++seen;
    }
    CHECK(data.col_count(j) == data.col(j).size());
  }
  CHECK(seen == data.nnz());
  CHECK(data.at(1, 0) == 0.0);
  CHECK(data.mean_row_support() == doctest::Approx(2.0));
  const std::vector<double> x = {1.0, 1.0, 1.0};
  CHECK(data.row_dot(2, x) == 15.0);
}

TEST_CASE("dataset: explicit zeros are dropped") {
  const auto data = SparseDataset::from_rows({{{0, 0.0}, {1, 2.0}}, {{0, 1.0}}}, {0.0, 0.0}, 2);
  CHECK(data.nnz() == 2);
  CHECK(data.row(0).size() == 1);
}

TEST_CASE("dataset: empty columns are pruned and remapped") {
  const auto data = SparseDataset::from_rows({{{0, 1.0}, {3, 2.0}}, {{3, 1.0}}}, {0.0, 0.0}, 5);
  CHECK(data.num_features() == 2);
  CHECK(data.declared_features() == 5);
  CHECK(data.pruned_columns() == std::vector<std::size_t>{1, 2, 4});
  CHECK(data.original_column(0) == 0);
  CHECK(data.original_column(1) == 3);
  CHECK(data.at(0, 1) == 2.0);
}

TEST_CASE("dataset: malformed construction is rejected") {
  CHECK_THROWS_AS(SparseDataset::from_rows({{{1, 1.0}, {0, 1.0}}}, {0.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(SparseDataset::from_rows({{{1, 1.0}, {1, 1.0}}}, {0.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(SparseDataset::from_rows({{{2, 1.0}}}, {0.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(SparseDataset::from_rows({{{0, 1.0}}}, {0.0, 1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(SparseDataset::from_rows({}, {}, 2), std::invalid_argument);
  CHECK_THROWS_AS(SparseDataset::from_rows({{{0, std::nan("")}}}, {0.0}, 1), std::invalid_argument);
}

TEST_CASE("libsvm: parses labels, 1-based indices, blanks and comments") {
  std::istringstream in("# header\n+1 1:0.5 3:2\n\n-1\t2:1e-1   3:-4\n");
  const auto data = read_libsvm(in);
  CHECK(data.num_examples() == 2);
  CHECK(data.num_features() == 3);
  CHECK(data.label(0) == 1.0);
  CHECK(data.label(1) == -1.0);
  CHECK(data.at(0, 0) == 0.5);
  CHECK(data.at(0, 2) == 2.0);
  CHECK(data.at(1, 1) == doctest::Approx(0.1));
  CHECK(data.at(1, 2) == -4.0);
}

TEST_CASE("libsvm: malformed lines report their line number") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_libsvm(in, "t");
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("1 1:1\n1 0:1\n") == 2);          // zero index
  CHECK(line_of("1 1:1\n1 2:1 2:3\n") == 2);      // duplicate
  CHECK(line_of("1 3:1 2:1\n") == 1);             // decreasing
  CHECK(line_of("1 1:1\n\nabc 1:1\n") == 3);      // bad label
  CHECK(line_of("1 1:x\n") == 1);                 // bad value
  CHECK(line_of("1 1\n") == 1);                   // missing colon
  CHECK(line_of("1 1:inf\n") == 1);
  std::istringstream over("1 4:1\n");
  CHECK_THROWS_AS(read_libsvm(over, "t", 3), ParseError);
}

TEST_CASE("libsvm: write then read reproduces the data exactly") {
  const auto data = SparseDataset::from_rows({{{0, 0.1}, {4, 1.0 / 3.0}}, {{4, -2.5e-7}}},
                                             {0.3, -1.0}, 5);
  std::stringstream buf;
  write_libsvm(buf, data);
  const auto back = read_libsvm(buf);
  REQUIRE(back.num_examples() == 2);
  REQUIRE(back.num_features() == 2);
  CHECK(back.at(0, 0) == 0.1);
  CHECK(back.at(0, 1) == 1.0 / 3.0);
  CHECK(back.at(1, 1) == -2.5e-7);
  CHECK(back.label(0) == 0.3);
  // original numbering survives: the second column was feature 5
  CHECK(buf.str().find("5:") != std::string::npos);
}

TEST_CASE("libsvm: missing file is an error") {
  CHECK_THROWS(read_libsvm_file("/nonexistent/data.svm"));
}

TEST_CASE("generator: seeded, sized, labelled per model") {
  GeneratorParams g;
  g.n = 50;
  g.d = 30;
  g.density = 0.2;
  g.seed = 9;
  const auto a = generate_dataset(g);
  const auto b = generate_dataset(g);
  CHECK(a.num_examples() == 50);
  CHECK(a.num_features() <= 30);
  CHECK(a.nnz() == b.nnz());
  for (std::size_t i = 0; i < a.num_examples(); ++i) {
    CHECK(a.label(i) == b.label(i));
    CHECK(!a.row(i).empty());
  }
  g.labels = LabelModel::Classification;
  const auto c = generate_dataset(g);
  for (double y : c.labels()) CHECK((y == 1.0 || y == -1.0));
  g.labels = LabelModel::Regression;
  g.seed = 10;
  const auto d = generate_dataset(g);
  bool differs = d.nnz() != a.nnz();
  for (std::size_t i = 0; i < a.num_examples(); ++i) differs = differs || d.label(i) != a.label(i);
  CHECK(differs);
  g.density = 0.0;
  CHECK_THROWS_AS(generate_dataset(g), std::invalid_argument);
}
