#include <gtest/gtest.h>
#include <treatfair/csv_io.hpp>
#include <treatfair/error.hpp>
#include <treatfair/synth_loan.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace treatfair;
namespace fs = std::filesystem;

namespace {

const std::string fixtures = TREATFAIR_FIXTURES;

SchemaConfig sxzy() {
  SchemaConfig c;
  c.sensitive = {"S"};
  c.covariates = {"X"};
  c.treatments = {"Z"};
  c.outcome = "Y";
  c.kinds = {{"S", "binary"}, {"Y", "binary"}};
  return c;
}

errc code_of_read(const std::string& text, const SchemaConfig& c) {
  std::istringstream in(text);
  try {
    read_csv(in, c);
  } catch (const error& e) {
    return e.code();
  }
  return errc::invalid_argument;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "treatfair_data_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(LoadCsv, DropsRowsWithMissingCells) {
  const Dataset d = load_csv(fixtures + "/missing_cell.csv", SchemaConfig::load(fixtures + "/missing_cell.schema.json"));
  ASSERT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.provenance().dropped_rows, 1u);
  EXPECT_EQ(d.row(0), (std::vector<double>{0, 1.5, 2.0, 1}));
  EXPECT_EQ(d.row(1), (std::vector<double>{1, 0.25, -1e-3, 1}));
}

TEST(LoadCsv, GermanShapedFixture) {
  const SchemaConfig c = SchemaConfig::load(fixtures + "/german_credit.schema.json");
  const Dataset d = load_csv(fixtures + "/german_credit.csv", c);
  const FeatureSchema& s = d.schema();
  EXPECT_EQ(s.size(), 21u);
  EXPECT_EQ(d.rows(), 1000u);
  const auto t = s.indices(Role::treatment);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(s[t[0]].name, "Duration");
  EXPECT_EQ(s[t[1]].name, "Credit Amount");
  EXPECT_EQ(s[t[2]].name, "Installment rate");
  EXPECT_EQ(s.indices(Role::sensitive).size(), 2u);
  EXPECT_EQ(s[s.outcome()].name, "Loan repayment");
  EXPECT_EQ(s[s.index_of("Purpose")].type, ColumnType::categorical(6));
  EXPECT_EQ(*s.code_of(s.index_of("Gender"), "male"), 1.0);
}

TEST(LoadCsv, OrderPreservingAndTolerant) {
  // BOM, quoted header with a comma, CRLF, extra ignored column, labels for S
  SchemaConfig c = sxzy();
  c.covariates = {"X, raw"};
  c.categorical_codes = {{"S", {"F", "M"}}};
  std::istringstream in("\xEF\xBB\xBF\"X, raw\",junk,S,Z,Y\r\n1,a,M,2,0\r\n2,b,F,3,1\r\n\r\n3,c,F,NA,1\r\n");
  const Dataset d = read_csv(in, c);
  ASSERT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.row(0), (std::vector<double>{1, 1, 2, 0}));
  EXPECT_EQ(d.row(1), (std::vector<double>{0, 2, 3, 1}));
  EXPECT_EQ(d.provenance().dropped_rows, 1u);
  for (const char* t : {"", "NA", "?", "nan", " null "}) EXPECT_TRUE(is_missing(t)) << t;
  EXPECT_FALSE(is_missing("0"));
}

TEST(LoadCsv, Errors) {
  EXPECT_EQ(code_of_read("S,X,Y\n0,1,1\n", sxzy()), errc::unknown_column);
  EXPECT_EQ(code_of_read("S,X,Z,Y\n0,abc,1,1\n", sxzy()), errc::non_numeric_cell);
  EXPECT_EQ(code_of_read("S,X,Z,Y\n0,1,1,2\n", sxzy()), errc::outcome_not_binary);
  EXPECT_EQ(code_of_read("S,X,Z,Y\n3,1,1,1\n", sxzy()), errc::unknown_value);
  EXPECT_EQ(code_of_read("", sxzy()), errc::io_failure);
  SchemaConfig c = sxzy();
  c.treatments.clear();
  EXPECT_EQ(code_of_read("S,X,Z,Y\n0,1,1,1\n", c), errc::role_missing);
  c = sxzy();
  c.kinds["W"] = "continuous";
  EXPECT_EQ(code_of_read("S,X,Z,Y\n0,1,1,1\n", c), errc::role_missing);
  try {
    load_csv(fixtures + "/does_not_exist.csv", sxzy());
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::io_failure);
  }
}

TEST(SaveCsv, RoundTripIsExact) {
  const Dataset d = generate(SynthConfig{.n = 400});
  const fs::path p = scratch("synth.csv");
  save_csv(d, p.string());
  const Dataset back = load_csv(p.string(), SchemaConfig::from_schema(d.schema()));
  EXPECT_EQ(back.schema(), d.schema());
  for (std::size_t c = 0; c < d.cols(); ++c)
    for (std::size_t r = 0; r < d.rows(); ++r) ASSERT_EQ(back.at(r, c), d.at(r, c));

  const Dataset german = load_csv(fixtures + "/german_credit.csv",
                                  SchemaConfig::load(fixtures + "/german_credit.schema.json"));
  const fs::path q = scratch("german.csv");
  save_csv(german, q.string());
  const Dataset g2 = load_csv(q.string(), SchemaConfig::from_schema(german.schema()));
  EXPECT_EQ(g2.schema(), german.schema());
  EXPECT_EQ(g2.row(17), german.row(17));
}

TEST(SaveCsv, HeaderOnlyWhenEmpty) {
  const Dataset empty(synth_schema());
  std::ostringstream out;
  write_csv(empty, out);
  EXPECT_EQ(out.str(), "G,A,E,I,S_sav,L,D,Y\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_csv(in, SchemaConfig::from_schema(empty.schema())).rows(), 0u);
}

TEST(SaveCsv, ShortestRoundTripDecimal) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  const double v = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(SchemaConfig, JsonRoundTrip) {
  const SchemaConfig c = SchemaConfig::load(fixtures + "/german_credit.schema.json");
  const SchemaConfig back = SchemaConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_schema(), c.to_schema());
  const fs::path p = scratch("schema.json");
  c.save(p.string());
  EXPECT_EQ(SchemaConfig::load(p.string()).to_schema(), c.to_schema());
  EXPECT_EQ(SchemaConfig::from_schema(synth_schema()).to_schema(), synth_schema());
  EXPECT_THROW(SchemaConfig::from_json(nlohmann::json{{"sensitive", 4}}), error);
}
