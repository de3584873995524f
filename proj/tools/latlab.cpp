// latlab <experiment> --config <file.json> [--out <dir>] [--seed <int>]
// latlab merge <report.csv>... [--out <summary.json>]
//
// Exit codes: 0 all rows PASS, 1 any FAIL or a numerical failure, 2 usage or
// precondition error.

#include "latlab/lab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

using latlab::lab::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw latlab::lab::UsageError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw latlab::lab::UsageError("config " + path + " is not valid JSON: " + e.what());
  }
}

int run_experiment(const std::string& name, const std::string& config_path, const std::string& out_dir,
                   std::optional<std::uint64_t> seed) {
  const auto cfg = latlab::lab::parse_config(load_json(config_path), name, seed);
  const auto start = std::chrono::steady_clock::now();
  latlab::lab::RunResult result;
  try {
    result = latlab::lab::run(cfg);
  } catch (const latlab::Error& e) {
    // keep the module exception type, add the experiment as context
    const std::string ctx = name + ": " + e.what();
    if (dynamic_cast<const latlab::PreconditionError*>(&e) || dynamic_cast<const latlab::DimensionError*>(&e))
      throw latlab::PreconditionError(ctx);
    throw latlab::Error(ctx);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto [csv, js] = latlab::lab::write_outputs(result, out_dir);
  std::cerr << name << ": run " << result.run_id << ", " << result.passed() << " PASS, " << result.failed()
            << " FAIL, worst gap " << latlab::lab::fmt(result.worst_gap()) << ", " << latlab::lab::fmt(seconds)
            << " s\n"
            << "  " << csv.string() << "\n  " << js.string() << '\n';
  return result.all_pass() ? 0 : 1;
}

int run_merge(const std::vector<std::string>& reports, const std::string& out) {
  const json merged = latlab::lab::report_merge(reports);
  const std::string text = merged.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else latlab::lab::write_atomic(out, text);
  return merged["status"] == "PASS" ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordered-space and lattice construction experiments"};
  app.require_subcommand(1);

  std::string config, out_dir = ".";
  std::optional<std::uint64_t> seed;
  for (const auto& [kind, name] : latlab::lab::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory for the CSV and JSON summary");
    sub->add_option("--seed", seed, "override the config seed");
  }
  std::vector<std::string> reports;
  std::string merge_out;
  CLI::App* merge = app.add_subcommand("merge", "merge report CSVs into one JSON summary");
  merge->add_option("reports", reports, "report CSV files")->required();
  merge->add_option("--out", merge_out, "write the summary here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen == merge) return run_merge(reports, merge_out);
    return run_experiment(chosen->get_name(), config, out_dir, seed);
  } catch (const latlab::lab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const latlab::lab::MergeError& e) {
    std::cerr << "malformed report: " << e.what() << '\n';
    return 2;
  } catch (const latlab::PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << '\n';
    return 2;
  } catch (const latlab::DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
