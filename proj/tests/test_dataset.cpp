#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fairpca/dataset.hpp"
#include "fairpca/linalg.hpp"
#include "fairpca/solver.hpp"
#include "test_util.hpp"

using namespace fairpca;

namespace {

struct TempCsv {
  std::filesystem::path path;
  explicit TempCsv(const std::string& content) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("fairpca_test_" + std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << content;
  }
  ~TempCsv() { std::filesystem::remove(path); }
};

DatasetSchema toy_schema() {
  DatasetSchema schema;
  schema.columns = {{"height", ColumnKind::kNumeric, {}},
                    {"color", ColumnKind::kCategorical, {}},
                    {"group", ColumnKind::kSensitive, {}},
                    {"outcome", ColumnKind::kLabel, {}}};
  schema.positive_label = "yes";
  return schema;
}

const char* kToyCsv =
    "height,color,group,outcome\n"
    "1.0,red,a,yes\n"
    "2.0,blue,b,no\n"
    "3.0,red,a,no\n"
    "4.0,green,b,yes\n"
    "5.0,blue,a,yes\n"
    "6.0,red,b,no\n";

std::string data_dir() {
  const char* env = std::getenv("FAIRPCA_DATA_DIR");
  return env ? env : "data";
}

}  // namespace

TEST_CASE("load_csv parses a typed table") {
  TempCsv file(kToyCsv);
  const auto table = load_csv(file.path.string(), toy_schema());
  CHECK(table.total_rows == 6);
  CHECK(table.row_count == 6);
  CHECK(table.dropped_missing == 0);
  CHECK(table.columns[0].numeric[3] == 4.0);
  CHECK(table.columns[1].text[3] == "green");
}

TEST_CASE("load_csv drops and counts rows with missing tokens") {
  TempCsv file(
      "height,color,group,outcome\n"
      "1.0,red,a,yes\n"
      "?,blue,b,no\n"
      "3.0,?,a,no\n"
      "4.0,green,b,yes\n");
  const auto table = load_csv(file.path.string(), toy_schema());
  CHECK(table.total_rows == 4);
  CHECK(table.row_count == 2);
  CHECK(table.dropped_missing == 2);
}

TEST_CASE("load_csv error paths name the offending location") {
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", toy_schema()), load_error);

  TempCsv missing_column(
      "height,color,outcome\n"
      "1.0,red,yes\n");
  CHECK_THROWS_WITH(load_csv(missing_column.path.string(), toy_schema()),
                    Catch::Matchers::ContainsSubstring("group"));

  TempCsv bad_cell(
      "height,color,group,outcome\n"
      "1.0,red,a,yes\n"
      "oops,blue,b,no\n");
  CHECK_THROWS_WITH(load_csv(bad_cell.path.string(), toy_schema()),
                    Catch::Matchers::ContainsSubstring("row 2") &&
                        Catch::Matchers::ContainsSubstring("height"));
}

TEST_CASE("load_csv applies sensitive exclusion only to the sensitive column") {
  DatasetSchema schema = toy_schema();
  for (ColumnSpec& c : schema.columns) {
    if (c.name == "group") c.exclude_as_sensitive = {"b"};
  }
  TempCsv file(kToyCsv);
  const auto table = load_csv(file.path.string(), schema);
  CHECK(table.row_count == 3);
  CHECK(table.dropped_excluded == 3);

  // Same values in a non-sensitive role survive: flip sensitive to color.
  DatasetSchema schema2 = toy_schema();
  for (ColumnSpec& c : schema2.columns) {
    if (c.name == "group") c.exclude_as_sensitive = {"b"};
  }
  schema2.set_sensitive("color");
  const auto table2 = load_csv(file.path.string(), schema2);
  CHECK(table2.row_count == 6);
}

TEST_CASE("preprocess one-hot encodes and z-scores") {
  TempCsv file(kToyCsv);
  const auto table = load_csv(file.path.string(), toy_schema());
  const auto gd = preprocess(table);

  // height (1) + color (3) + group (2); label removed.
  REQUIRE(gd.dim() == 6);
  CHECK(gd.group_names == std::vector<std::string>{"a", "b"});
  CHECK(gd.group_ids == std::vector<int>{0, 1, 0, 1, 0, 1});
  REQUIRE(gd.labels.has_value());
  CHECK(*gd.labels == std::vector<int>{1, -1, -1, 1, 1, -1});

  // z-scored numeric column.
  const Vector h = gd.matrix.col(0);
  CHECK(std::abs(h.mean()) <= 1e-10);
  CHECK(h.array().square().mean() == Catch::Approx(1.0).margin(1e-8));

  // Encoding round-trip recovers the raw categorical values.
  CHECK(decode_categorical(gd, "color") ==
        std::vector<std::string>{"red", "blue", "red", "green", "blue", "red"});
  CHECK(decode_categorical(gd, "group") ==
        std::vector<std::string>{"a", "b", "a", "b", "a", "b"});
}

TEST_CASE("preprocess can exclude the sensitive column") {
  TempCsv file(kToyCsv);
  const auto table = load_csv(file.path.string(), toy_schema());
  PreprocessOptions opts;
  opts.include_sensitive = false;
  const auto gd = preprocess(table, opts);
  CHECK(gd.dim() == 4);  // height + color one-hot
  CHECK(gd.group_count() == 2);
}

TEST_CASE("preprocess drops constant numeric columns with a warning") {
  TempCsv file(
      "height,color,group,outcome\n"
      "2.0,red,a,yes\n"
      "2.0,blue,b,no\n"
      "2.0,red,a,no\n"
      "2.0,red,b,yes\n");
  const auto table = load_csv(file.path.string(), toy_schema());
  const auto gd = preprocess(table);
  CHECK(gd.dim() == 4);  // color(2) + group(2); height dropped
  REQUIRE(gd.warnings.size() == 1);
  CHECK(gd.warnings[0].find("height") != std::string::npos);
}

TEST_CASE("split_groups partitions rows and preserves the Gram sum") {
  TempCsv file(kToyCsv);
  const auto gd = preprocess(load_csv(file.path.string(), toy_schema()));
  const auto blocks = split_groups(gd);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].rows() == 3);
  CHECK(blocks[1].rows() == 3);

  Matrix sum = Matrix::Zero(gd.dim(), gd.dim());
  for (const Matrix& b : blocks) sum += b.transpose() * b;
  const Matrix global = gd.matrix.transpose() * gd.matrix;
  CHECK((sum - global).norm() <= 1e-8 * std::max(1.0, global.norm()));
}

TEST_CASE("single group split returns the whole matrix") {
  TempCsv file(
      "height,color,group,outcome\n"
      "1.0,red,a,yes\n"
      "2.0,blue,a,no\n");
  const auto gd = preprocess(load_csv(file.path.string(), toy_schema()));
  const auto blocks = split_groups(gd);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].rows() == gd.n());
}

TEST_CASE("train_test_split is deterministic and stratified") {
  // 100 rows, 2 groups x 2 labels, 25 each.
  std::ostringstream csv;
  csv << "height,color,group,outcome\n";
  for (int i = 0; i < 100; ++i) {
    csv << i << ",red," << (i % 2 == 0 ? "a" : "b") << ","
        << (i % 4 < 2 ? "yes" : "no") << "\n";
  }
  TempCsv file(csv.str());
  const auto gd = preprocess(load_csv(file.path.string(), toy_schema()));

  const auto [train, test] = train_test_split(gd, 0.5, 3);
  CHECK(train.n() + test.n() == 100);
  CHECK(std::abs(static_cast<double>(test.n()) - 50.0) <= 4.0);

  // Per-stratum share within one sample of the target.
  std::map<std::pair<int, int>, int> train_count, test_count;
  for (Eigen::Index r = 0; r < train.n(); ++r) {
    ++train_count[{train.group_ids[static_cast<size_t>(r)],
                   (*train.labels)[static_cast<size_t>(r)]}];
  }
  for (Eigen::Index r = 0; r < test.n(); ++r) {
    ++test_count[{test.group_ids[static_cast<size_t>(r)],
                  (*test.labels)[static_cast<size_t>(r)]}];
  }
  for (const auto& [key, n_test] : test_count) {
    const int total = n_test + train_count[key];
    CHECK(std::abs(n_test - 0.5 * total) <= 1.0);
  }

  const auto [train2, test2] = train_test_split(gd, 0.5, 3);
  CHECK(train.matrix == train2.matrix);
  CHECK(test.matrix == test2.matrix);

  const auto [train3, test3] = train_test_split(gd, 0.5, 4);
  CHECK(train.matrix != train3.matrix);
}

TEST_CASE("singleton strata go to the train side with a warning") {
  TempCsv file(
      "height,color,group,outcome\n"
      "1.0,red,a,yes\n"
      "2.0,blue,a,no\n"
      "3.0,red,a,no\n"
      "4.0,green,b,yes\n");  // group b: single row
  const auto gd = preprocess(load_csv(file.path.string(), toy_schema()));
  const auto [train, test] = train_test_split(gd, 0.4, 1);
  bool warned = false;
  for (const auto& w : train.warnings) {
    if (w.find("single sample") != std::string::npos) warned = true;
  }
  CHECK(warned);
  // The singleton is in train.
  bool found = false;
  for (Eigen::Index r = 0; r < train.n(); ++r) {
    if (train.group_ids[static_cast<size_t>(r)] == 1) found = true;
  }
  CHECK(found);
}

TEST_CASE("train_test_split validates the fraction") {
  TempCsv file(kToyCsv);
  const auto gd = preprocess(load_csv(file.path.string(), toy_schema()));
  CHECK_THROWS_AS(train_test_split(gd, 0.0, 1), invalid_input_error);
  CHECK_THROWS_AS(train_test_split(gd, 1.0, 1), invalid_input_error);
}

TEST_CASE("synthetic mirrored groups") {
  const auto gd = synthetic_mirrored_groups(300, 3, 0.0, 5);
  CHECK(gd.n() == 600);
  CHECK(gd.group_count() == 2);

  // angle 0: the groups are reflections of an axis-aligned Gaussian, so
  // their Gram matrices coincide on the diagonal and disparity errors
  // agree for any axis-aligned subspace.
  const auto blocks = split_groups(gd);
  const Matrix g1 = blocks[0].transpose() * blocks[0];
  const Matrix g2 = blocks[1].transpose() * blocks[1];
  CHECK((g1.diagonal() - g2.diagonal()).cwiseAbs().maxCoeff() < 1e-8);

  // Determinism.
  const auto again = synthetic_mirrored_groups(300, 3, 0.0, 5);
  CHECK(gd.matrix == again.matrix);

  CHECK_THROWS_AS(synthetic_mirrored_groups(10, 1, 0.0, 1), dimension_error);
}

TEST_CASE("mirrored sample grams are exact reflections") {
  const double angle = 0.78539816339744831;  // pi/4
  const auto gd = synthetic_mirrored_groups(500, 2, angle, 11);
  const auto blocks = split_groups(gd);
  const Matrix g1 = blocks[0].transpose() * blocks[0];
  const Matrix g2 = blocks[1].transpose() * blocks[1];
  Matrix reflect = Matrix::Identity(2, 2);
  reflect(1, 1) = -1.0;
  CHECK((g2 - reflect * g1 * reflect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fair direction beats plain PCA on the angle sweep") {
  // d = 2, r = 1: sweep the subspace angle, computing both disparity
  // errors exactly from the sample grams; the fair solve's gap must not
  // exceed plain PCA's.
  const double angle = 0.78539816339744831;  // pi/4
  const auto gd = synthetic_mirrored_groups(800, 2, angle, 3);
  const auto problem = FairPcaProblem::from_groups(split_groups(gd), 1,
                                                   Mode::kPairwise,
                                                   Penalty::kSquared, 0.0);
  auto gap_at = [&](double theta) {
    Matrix u(2, 1);
    u << std::cos(theta), std::sin(theta);
    return std::abs(disparity_error(problem, 0, u) -
                    disparity_error(problem, 1, u));
  };

  const Subspace plain = top_r_eigensubspace(problem.global_gram(), 1);
  const double plain_gap =
      std::abs(disparity_error(problem, 0, plain.basis()) -
               disparity_error(problem, 1, plain.basis()));

  double best_gap = std::numeric_limits<double>::infinity();
  double best_theta = 0.0;
  for (int i = 0; i < 31416; ++i) {
    const double theta = i * 1e-4;
    const double gap = gap_at(theta);
    if (gap < best_gap) {
      best_gap = gap;
      best_theta = theta;
    }
  }
  // The bisector (theta = 0 mod pi/2) is exactly fair by construction.
  CHECK(best_gap <= 1e-8);
  const double folded = std::fmod(best_theta + 0.25 * 3.14159265358979,
                                  0.5 * 3.14159265358979);
  CHECK(std::abs(folded - 0.25 * 3.14159265358979) < 1e-3);

  SolverConfig config;
  config.line_search = LineSearch::kFixedInvSqrt;
  config.max_iters = 800;
  const auto result =
      pareto_fair_pca(problem, config, random_orthonormal(2, 1, 21));
  const double e1 = disparity_error(problem, 0, result.subspace.basis());
  const double e2 = disparity_error(problem, 1, result.subspace.basis());
  const double fair_gap = std::abs(e1 - e2);
  // Plain PCA is exactly fair on this mirror-symmetric fixture (the
  // pooled Gram is diagonal), so compare up to the solver's resolution.
  CHECK(fair_gap <= plain_gap + 1e-3 * (e1 + e2 + 1e-12));
}

TEST_CASE("adult dataset loads with the published shape") {
  const std::string dir = data_dir();
  if (!std::filesystem::exists(dir + "/adult.csv")) {
    SKIP("adult.csv not present");
  }
  auto schema = DatasetSchema::from_json_file(dir + "/adult.schema.json");
  const auto table = load_csv(dir + "/adult.csv", schema);
  CHECK(table.total_rows == 32561);
  // 2399 rows carry '?' in workclass/occupation/native-country.
  CHECK(table.row_count == 30162);

  const auto gd = preprocess(table);
  CHECK(gd.group_count() == 2);
  // Actual counts from the canonical file after the missing-row drop.
  const auto blocks = split_groups(gd);
  REQUIRE(gd.group_names == std::vector<std::string>{"Female", "Male"});
  CHECK(blocks[0].rows() == 9782);
  CHECK(blocks[1].rows() == 20380);

  // Gram-sum identity on the real data.
  Matrix sum = Matrix::Zero(gd.dim(), gd.dim());
  for (const Matrix& b : blocks) sum += b.transpose() * b;
  const Matrix global = gd.matrix.transpose() * gd.matrix;
  CHECK((sum - global).norm() <= 1e-8 * global.norm());

  // Race as the sensitive feature: five groups.
  schema.set_sensitive("race");
  const auto by_race = preprocess(load_csv(dir + "/adult.csv", schema));
  CHECK(by_race.group_count() == 5);
}

TEST_CASE("credit dataset loads with the published shape") {
  const std::string dir = data_dir();
  if (!std::filesystem::exists(dir + "/credit.csv")) {
    SKIP("credit.csv not present");
  }
  auto schema = DatasetSchema::from_json_file(dir + "/credit.schema.json");
  const auto table = load_csv(dir + "/credit.csv", schema);
  CHECK(table.total_rows == 30000);
  CHECK(table.row_count == 30000);
  const auto gd = preprocess(table);
  CHECK(gd.group_count() == 2);
  const auto blocks = split_groups(gd);
  REQUIRE(gd.group_names == std::vector<std::string>{"1", "2"});
  CHECK(blocks[0].rows() == 11888);  // male
  CHECK(blocks[1].rows() == 18112);  // female

  // Marriage as the sensitive feature: the undocumented 0 rows drop.
  schema.set_sensitive("MARRIAGE");
  const auto table2 = load_csv(dir + "/credit.csv", schema);
  CHECK(table2.dropped_excluded == 54);
  const auto by_marriage = preprocess(table2);
  CHECK(by_marriage.group_count() == 3);
  const auto blocks2 = split_groups(by_marriage);
  CHECK(blocks2[0].rows() == 13659);  // married
  CHECK(blocks2[1].rows() == 15964);  // single
  CHECK(blocks2[2].rows() == 323);    // other
}

TEST_CASE("z-scored numeric columns on real data") {
  const std::string dir = data_dir();
  if (!std::filesystem::exists(dir + "/adult.csv")) {
    SKIP("adult.csv not present");
  }
  const auto schema = DatasetSchema::from_json_file(dir + "/adult.schema.json");
  const auto gd = preprocess(load_csv(dir + "/adult.csv", schema));
  for (const auto& enc : gd.encoding.columns) {
    if (enc.categorical) continue;
    const Vector col = gd.matrix.col(enc.offset);
    REQUIRE(std::abs(col.mean()) <= 1e-10);
    REQUIRE(col.array().square().mean() == Catch::Approx(1.0).margin(1e-8));
  }
}
