#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace treatfair::cli {

// Bad flag values detected after parsing; exit code 2.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulateOptions {
  double beta = 0.03;
  double gamma = 0.5;
  double delta = 1.0;
  double eta = 5.0;
  std::size_t n = 5000;
  std::uint64_t seed = 1;
  std::string variant = "auto";
  std::string gaussian_parameter = "std_dev";
  std::string out;
  std::string schema_out;  // default: <out stem>.schema.json
  std::string oracle_out;  // default: <out stem>.oracle.json
};

struct FitOptions {
  std::string data;
  std::string schema;
  std::string out;
  std::string report;
  std::string basis = "linear_plus_pairwise";
  double regularization = 1e-6;
  std::vector<double> split{0.8, 0.1, 0.1};
  std::uint64_t seed = 1;
};

struct AuditOptions {
  std::string data;
  std::string schema;
  std::string model = "oracle";
  std::string sensitive;
  std::vector<std::string> group_pair;
  std::string stats = "median";
  std::string delta = "difference";
  std::string multi;  // aggregator; empty = single-pair audit
  std::vector<std::string> multi_columns;
  std::string flip = "single";
  std::string path = "total";
  std::string outcome_aggregator = "worst_case";
  bool corrected = false;
  std::string predictor;
  std::string out;  // prefix: <out>.json and <out>.csv; stdout JSON when empty
};

struct MitigateOptions {
  std::string data;
  std::string schema;
  std::string model = "oracle";
  std::string sensitive;
  std::string disadvantaged;
  std::string advantaged;
  std::string out;
  std::string report;
};

struct RiskOptions {
  std::string data;
  std::string schema;
  std::string model = "oracle";
  std::string sensitive;
  std::vector<std::string> policies;
  std::size_t samples = 256;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

struct LossesOptions {
  std::string data;
  std::string schema;
  std::string amount;
  std::string group;
  std::string formula = "rate";
  double rate = 10.0;
  std::string duration;
  std::string annuity;
  double years = 15.0;
  std::string tag = "D";
  std::string out;
};

struct PredictOptions {
  std::string data;
  std::string schema;
  std::string sensitive;
  std::string criterion = "none";
  double train_fraction = 0.6;
  std::uint64_t seed = 1;
  std::string out;
  std::string metrics;
};

int run_simulate(const SimulateOptions& o, std::size_t threads);
int run_fit(const FitOptions& o, std::size_t threads);
int run_audit(const AuditOptions& o, std::size_t threads);
int run_mitigate(const MitigateOptions& o, std::size_t threads);
int run_risk(const RiskOptions& o, std::size_t threads);
int run_losses(const LossesOptions& o, std::size_t threads);
int run_predict(const PredictOptions& o, std::size_t threads);

std::uint64_t fnv1a_file(const std::string& path);

}  // namespace treatfair::cli
