#include "hardedge/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

namespace hardedge {
namespace {

TEST(Numbers, ShortestRoundTrip) {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t bits = gen();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_TRUE(std::isnan(parse_double("nan")));
  EXPECT_THROW(parse_double("1.5x"), IoError);
  EXPECT_THROW(parse_double("1,5"), IoError);
}

TEST(Configuration, CsvRoundTrip) {
  const EnsembleParams p(0.25, 1.5, 0.6, 40);
  const auto cfg = sample_configuration(p, 99);
  std::stringstream ss;
  write_configuration_csv(ss, cfg);
  const auto back = read_configuration_csv(ss);
  EXPECT_EQ(back.params, p);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.u, cfg.u);
}

TEST(Configuration, SeveralInOneCsv) {
  const EnsembleParams p(0.0, 1.0, 0.5, 5);
  const ConfigurationSampler sampler(p);
  std::stringstream ss;
  for (std::uint64_t r = 0; r < 3; ++r) write_configuration_csv(ss, sampler.sample(4, r), r);
  const auto all = read_configurations_csv(ss);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2].u, sampler.sample(4, 2).u);
}

TEST(Configuration, JsonRoundTrip) {
  const auto cfg = sample_configuration(EnsembleParams(0.0, 2.0, 0.7, 25), 5);
  const auto text = configuration_to_json(cfg).dump();
  const auto back = configuration_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.u, cfg.u);
  EXPECT_EQ(back.params, cfg.params);
}

TEST(Configuration, CsvRejectsMalformed) {
  std::stringstream no_header("j,u\n1,0.5\n");
  EXPECT_THROW(read_configuration_csv(no_header), IoError);
  std::stringstream short_rows("# alpha=0,b=1,rho=0.5,n=3,seed=1\nj,u\n1,0.5\n");
  EXPECT_THROW(read_configuration_csv(short_rows), IoError);
}

TEST(StepProcess, CsvColumns) {
  const std::vector<double> u{2.0, 1.0, 2.0};
  std::stringstream ss;
  write_step_process_csv(ss, build_statistic(u, phi_one()));
  EXPECT_EQ(ss.str(), "location,increment,cumulative\n1,0.3333333333333333,0.3333333333333333\n2,0.6666666666666666,1\n");
}

TEST(Tables, CsvJsonParity) {
  NumericTable t{{"t", "value, with comma"}, {{0.1, 1.0 / 3.0}, {INFINITY, 2e-300}}};
  std::stringstream ss;
  write_table_csv(ss, t);
  const auto from_csv = read_table_csv(ss);
  const auto from_json = table_from_json(nlohmann::json::parse(table_to_json(t).dump()));
  EXPECT_EQ(from_csv.columns, t.columns);
  EXPECT_EQ(from_json.columns, t.columns);
  EXPECT_EQ(from_csv.rows, t.rows);
  EXPECT_EQ(from_json.rows, t.rows);
}

TEST(Report, CsvHeaderCarriesConfig) {
  ExperimentReport r;
  r.config.seed = 42;
  r.records.push_back({"cov", 0.5, 1.0, 0.1, 0.11, 0.01, -1.0, true});
  r.table.push_back({"m1", 0.5, NAN, 0.2});
  std::stringstream ss;
  write_report_csv(ss, r);
  std::string header;
  std::getline(ss, header);
  ASSERT_EQ(header.rfind("# ", 0), 0u);
  const auto cfg = nlohmann::json::parse(header.substr(2));
  EXPECT_EQ(cfg["seed"], 42);
  std::string columns, row;
  std::getline(ss, columns);
  std::getline(ss, row);
  EXPECT_EQ(row, "record,cov,0.5,1,0.1,0.11,0.01,-1,1,");
}

}  // namespace
}  // namespace hardedge
