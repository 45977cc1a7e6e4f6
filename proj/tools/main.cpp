#include "commands.hpp"

#include <treatfair/error.hpp>

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <json.hpp>

namespace {

using treatfair::errc;

int exit_code(errc code) {
  switch (code) {
    case errc::empty_group:
    case errc::empty_policy:
    case errc::degenerate:
      return 3;
    case errc::non_invertible:
    case errc::inconsistent:
    case errc::plan_order_violation:
    case errc::underdetermined:
    case errc::schema_mismatch:
      return 4;
    case errc::io_failure:
    case errc::unknown_column:
    case errc::role_missing:
    case errc::non_numeric_cell:
    case errc::outcome_not_binary:
      return 5;
    case errc::invalid_argument:
    case errc::unknown_value:
    case errc::missing_column:
    case errc::negative_rate:
      return 2;
  }
  return 4;
}

int fail(std::string_view name, const std::string& message, int code) {
  const nlohmann::json j = {{"error", name}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << '\n';
  return code;
}

void data_flags(CLI::App* cmd, std::string& data, std::string& schema) {
  cmd->add_option("--data", data, "Input CSV")->required();
  cmd->add_option("--schema", schema, "Schema config JSON (column roles and kinds)")->required();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace treatfair::cli;

  CLI::App app{"Treatment disparity audits, mitigation and fair risk scores on causal models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TREATFAIR_VERSION);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = available parallelism)")->capture_default_str();

  std::function<int()> run;

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Sample the synthetic loan model; writes CSV, schema config and oracle descriptor");
  c_sim->add_option("--beta", sim.beta, "Weight of savings in the amount mechanism (0 or 0.03)")->capture_default_str();
  c_sim->add_option("--gamma", sim.gamma, "Outcome noise scale for the F group")->capture_default_str();
  c_sim->add_option("--delta", sim.delta, "Group effect multiplier (1 balanced, 2 unbalanced)")->capture_default_str();
  c_sim->add_option("--eta", sim.eta, "Recorded with the config; unused by the mechanisms")->capture_default_str();
  c_sim->add_option("--n", sim.n, "Rows")->capture_default_str()->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  c_sim->add_option("--variant", sim.variant, "Outcome mechanism: auto | noisy | deterministic")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "noisy", "deterministic"}));
  c_sim->add_option("--gaussian-parameter", sim.gaussian_parameter, "Read Gaussian scale as std_dev or variance")
      ->capture_default_str()
      ->check(CLI::IsMember({"std_dev", "variance"}));
  c_sim->add_option("--out", sim.out, "Output CSV")->required();
  c_sim->add_option("--schema-out", sim.schema_out, "Schema config path (default <out>.schema.json)");
  c_sim->add_option("--oracle-out", sim.oracle_out, "Oracle descriptor path (default <out>.oracle.json)");
  c_sim->callback([&] { run = [&] { return run_simulate(sim, threads); }; });

  FitOptions fit;
  auto* c_fit = app.add_subcommand("fit", "Fit an additive-noise SCM; writes model JSON and a goodness-of-fit report");
  data_flags(c_fit, fit.data, fit.schema);
  c_fit->add_option("--out", fit.out, "Model JSON")->required();
  c_fit->add_option("--report", fit.report, "Goodness report JSON (default stdout)");
  c_fit->add_option("--basis", fit.basis, "linear | linear_plus_pairwise")
      ->capture_default_str()
      ->check(CLI::IsMember({"linear", "linear_plus_pairwise"}));
  c_fit->add_option("--regularization", fit.regularization, "Ridge penalty")->capture_default_str();
  c_fit->add_option("--split", fit.split, "Train, validation, test fractions")->expected(3)->capture_default_str();
  c_fit->add_option("--seed", fit.seed, "Split seed")->capture_default_str();
  c_fit->callback([&] { run = [&] { return run_fit(fit, threads); }; });

  AuditOptions aud;
  auto* c_aud = app.add_subcommand("audit", "Treatment disparity report (TTD, DTD and label effects) as JSON and CSV");
  data_flags(c_aud, aud.data, aud.schema);
  c_aud->add_option("--model", aud.model, "oracle | oracle:unbalanced | model or oracle JSON path")->capture_default_str();
  c_aud->add_option("--sensitive", aud.sensitive, "Sensitive column (default first)");
  c_aud->add_option("--group-pair", aud.group_pair, "Audited group and counterfactual group, labels or codes (binary default: first code then second)")->expected(2);
  c_aud->add_option("--stats", aud.stats, "median | mean")->capture_default_str()->check(CLI::IsMember({"median", "mean"}));
  c_aud->add_option("--delta", aud.delta, "difference | abs")->capture_default_str();
  c_aud->add_option("--multi", aud.multi, "Aggregate over counterfactual worlds: none | avg | max | var");
  c_aud->add_option("--multi-columns", aud.multi_columns, "Sensitive columns for --multi (default --sensitive)");
  c_aud->add_option("--flip", aud.flip, "single | joint")->capture_default_str();
  c_aud->add_option("--path", aud.path, "total | direct")->capture_default_str();
  c_aud->add_option("--outcome-aggregator", aud.outcome_aggregator, "worst_case | mean | variance")->capture_default_str();
  c_aud->add_flag("--corrected", aud.corrected, "Normalize --multi by the number of counterfactuals");
  c_aud->add_option("--predictor", aud.predictor, "Predictor JSON; audit only accepted rows");
  c_aud->add_option("--out", aud.out, "Output prefix for <out>.json and <out>.csv (default JSON on stdout)");
  c_aud->callback([&] { run = [&] { return run_audit(aud, threads); }; });

  MitigateOptions mit;
  auto* c_mit = app.add_subcommand("mitigate", "Build the treatment-fair dataset for a disadvantaged group");
  data_flags(c_mit, mit.data, mit.schema);
  c_mit->add_option("--model", mit.model, "oracle | oracle:unbalanced | model or oracle JSON path")->capture_default_str();
  c_mit->add_option("--sensitive", mit.sensitive, "Sensitive column (default first)");
  c_mit->add_option("--disadvantaged", mit.disadvantaged, "Group whose treatments are replaced")->required();
  c_mit->add_option("--advantaged", mit.advantaged, "Reference group")->required();
  c_mit->add_option("--out", mit.out, "Output CSV")->required();
  c_mit->add_option("--report", mit.report, "Summary JSON (default stdout)");
  c_mit->callback([&] { run = [&] { return run_mitigate(mit, threads); }; });

  RiskOptions risk;
  auto* c_risk = app.add_subcommand("risk", "Fair risk scores under treatment policies; per-group CDF grids and KS summary");
  data_flags(c_risk, risk.data, risk.schema);
  c_risk->add_option("--model", risk.model, "oracle | oracle:unbalanced | model or oracle JSON path")->capture_default_str();
  c_risk->add_option("--sensitive", risk.sensitive, "Sensitive column (default first)");
  c_risk->add_option("--policy", risk.policies, "factual | conditional:<v> | conditional:own | counterfactual:<v>")->required();
  c_risk->add_option("--samples", risk.samples, "Treatment draws per row")->capture_default_str()->check(CLI::PositiveNumber);
  c_risk->add_option("--seed", risk.seed, "Sampling seed")->capture_default_str();
  c_risk->add_option("--out-dir", risk.out_dir, "Directory for CDF CSVs and risk_summary.json")->capture_default_str();
  c_risk->callback([&] { run = [&] { return run_risk(risk, threads); }; });

  LossesOptions loss;
  auto* c_loss = app.add_subcommand("losses", "Group-wise loss given default and expected simple interest");
  data_flags(c_loss, loss.data, loss.schema);
  c_loss->add_option("--amount", loss.amount, "Credit amount column")->required();
  c_loss->add_option("--group", loss.group, "Grouping column")->required();
  c_loss->add_option("--formula", loss.formula, "rate | annuity")->capture_default_str()->check(CLI::IsMember({"rate", "annuity"}));
  c_loss->add_option("--rate", loss.rate, "Yearly interest rate in percent (rate formula)")->capture_default_str();
  c_loss->add_option("--duration", loss.duration, "Duration column in months (rate formula)");
  c_loss->add_option("--annuity", loss.annuity, "Annuity column (annuity formula)");
  c_loss->add_option("--years", loss.years, "Term in years (annuity formula)")->capture_default_str();
  c_loss->add_option("--tag", loss.tag, "Label for the report")->capture_default_str();
  c_loss->add_option("--out", loss.out, "Report JSON (default stdout)");
  c_loss->callback([&] { run = [&] { return run_losses(loss, threads); }; });

  PredictOptions pred;
  auto* c_pred = app.add_subcommand("predict", "Train a logistic predictor with optional DP or EOD threshold post-processing");
  data_flags(c_pred, pred.data, pred.schema);
  c_pred->add_option("--sensitive", pred.sensitive, "Sensitive column (default first)");
  c_pred->add_option("--criterion", pred.criterion, "none | dp | eod")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "dp", "eod"}));
  c_pred->add_option("--train-fraction", pred.train_fraction, "Stratified training share")
      ->capture_default_str()
      ->check(CLI::Range(0.05, 0.95));
  c_pred->add_option("--seed", pred.seed, "Split seed")->capture_default_str();
  c_pred->add_option("--out", pred.out, "Predictor JSON")->required();
  c_pred->add_option("--metrics", pred.metrics, "Metrics JSON (default stdout)");
  c_pred->callback([&] { run = [&] { return run_predict(pred, threads); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("Usage", e.what(), 2);
  }

  try {
    return run();
  } catch (const usage_error& e) {
    return fail("Usage", e.what(), 2);
  } catch (const treatfair::error& e) {
    return fail(treatfair::to_string(e.code()), e.what(), exit_code(e.code()));
  } catch (const nlohmann::json::exception& e) {
    return fail("ModelFormat", e.what(), 4);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("IoFailure", e.what(), 5);
  } catch (const std::exception& e) {
    return fail("Internal", e.what(), 4);
  }
}
