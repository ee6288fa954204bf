#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fedgraph/cli/config.hpp"
#include "fedgraph/cli/experiment.hpp"
#include "fedgraph/csv.hpp"
#include "fedgraph/errors.hpp"
#include "fedgraph/privacy/privacy.hpp"

namespace {

// 0: success. 2: bad usage, bad config, malformed input. 1: runtime failure.
constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

int classify(const std::exception& e) {
  if (dynamic_cast<const fedgraph::ConfigError*>(&e) ||
      dynamic_cast<const fedgraph::SchemaError*>(&e) ||
      dynamic_cast<const fedgraph::ParseError*>(&e))
    return kUsage;
  return kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated multimodal graph learning simulator"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  CLI::App* run = app.add_subcommand(
      "run", "Run the experiment described by a config file");
  run->add_option("config", run_config, "config file")->required();
  run->add_option("--out", run_out, "output directory override");

  std::string gen_config, gen_out;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "Write a synthetic raw dataset in the sensor layout");
  gen->add_option("config", gen_config, "config file")->required();
  gen->add_option("--out", gen_out, "output directory override");

  double cal_eps = 0.0, cal_delta = 0.0, cal_q = 0.0;
  long cal_steps = 0;
  double cal_lo = 0.3, cal_hi = 100.0, cal_tol = 1e-4;
  CLI::App* cal = app.add_subcommand(
      "calibrate", "Find the noise multiplier for a privacy budget");
  cal->add_option("--epsilon", cal_eps, "target epsilon")->required();
  cal->add_option("--delta", cal_delta, "failure probability")->required();
  cal->add_option("--q", cal_q, "sampling rate")->required();
  cal->add_option("--steps", cal_steps, "composition steps")->required();
  cal->add_option("--lo", cal_lo, "bracket lower edge");
  cal->add_option("--hi", cal_hi, "bracket upper edge");
  cal->add_option("--tol", cal_tol, "bisection tolerance");

  std::string tb_config, tb_out;
  CLI::App* tb = app.add_subcommand(
      "testbed", "Simulate the quadratic convergence testbed");
  tb->add_option("config", tb_config, "config file")->required();
  tb->add_option("--out", tb_out, "output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) {
      fedgraph::cli::ExperimentResult result = fedgraph::cli::run_experiment(
          fedgraph::cli::ConfigMap::from_file(run_config), run_out);
      std::cout << "model,setting,epsilon,accuracy,f1,utility_loss\n";
      for (const fedgraph::cli::SummaryRow& row : result.summary)
        std::cout << row.model << ',' << row.setting << ',' << row.epsilon
                  << ',' << fedgraph::format_double(row.accuracy) << ','
                  << fedgraph::format_double(row.f1) << ','
                  << fedgraph::format_double(row.utility_loss) << '\n';
      std::cout << "artifacts under " << result.out_dir << "\n";
    } else if (gen->parsed()) {
      fedgraph::cli::DatasetResult result = fedgraph::cli::generate_dataset(
          fedgraph::cli::ConfigMap::from_file(gen_config), gen_out);
      std::cout << "wrote " << result.recordings << " recordings under "
                << result.out_dir << "\n";
    } else if (cal->parsed()) {
      double sigma = fedgraph::privacy::calibrate_sigma(
          cal_eps, cal_delta, cal_q, cal_steps, cal_lo, cal_hi, cal_tol);
      auto grid = fedgraph::privacy::default_alpha_grid();
      std::vector<double> gamma;
      for (int a : grid)
        gamma.push_back(
            fedgraph::privacy::rdp_subsampled_gaussian(cal_q, sigma, a));
      double achieved = fedgraph::privacy::compose_and_convert(
          grid, gamma, cal_steps, cal_delta);
      std::cout << "sigma = " << fedgraph::format_double(sigma) << "\n"
                << "achieved_epsilon = " << fedgraph::format_double(achieved)
                << "\n";
    } else if (tb->parsed()) {
      fedgraph::cli::TestbedStats stats = fedgraph::cli::run_testbed(
          fedgraph::cli::ConfigMap::from_file(tb_config), tb_out);
      std::cout << "testbed: plateau " << fedgraph::format_double(stats.plateau)
                << " theoretical floor " << fedgraph::format_double(stats.floor)
                << " under " << stats.out_dir << "\n";
    }
  } catch (const fedgraph::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
