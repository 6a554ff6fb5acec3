// hetserve: plan, search, simulate and compare heterogeneous serving configurations.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hetserve/errors.h"
#include "hetserve/experiment.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hetserve;

namespace {

constexpr int kUsageError = 2;
constexpr int kInfeasible = 3;

json scenario_stamp(const Scenario& sc) {
  return json{{"name", sc.name},
              {"digest", sc.digest},
              {"seed", sc.seed},
              {"batch_distribution", describe(sc.workload.batch_dist)}};
}

json report_json(const SimReport& r, const Catalog& catalog) {
  json util = json::object();
  for (std::size_t t = 0; t < catalog.size(); ++t) util[catalog[t].name] = r.utilization[t];
  return json{{"policy", r.policy},
              {"seed", r.seed},
              {"offered_rate_qps", r.offered_rate_qps},
              {"num_queries", r.num_queries},
              {"completed", r.completed},
              {"qos_violations", r.qos_violations},
              {"forced_dispatches", r.forced_dispatches},
              {"percentile", r.percentile},
              {"tail_latency_ms", r.p99_latency_ms},
              {"mean_latency_ms", r.mean_latency_ms},
              {"makespan_s", r.makespan_s},
              {"achieved_goodput_qps", r.achieved_goodput_qps},
              {"utilization", util},
              {"truncated", r.truncated}};
}

json trace_summary(const SearchTrace& t, std::size_t space) {
  return json{{"best_config", t.best_config.to_string()},
              {"best_qps", t.best_qps},
              {"evaluations_used", t.evaluations_used},
              {"search_space", space},
              {"pruned_by_bound", t.pruned_by_bound},
              {"pruned_as_subconfig", t.pruned_as_subconfig},
              {"bound_breaches", t.bound_breaches}};
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content;
  else
    write_file(path, content);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous inference-serving planner and simulator"};
  app.require_subcommand(1);

  std::string scenario_path, config_text, policy = "kairos", out, out_dir, algo = "kairos_plus";
  std::optional<double> rate;
  std::uint64_t seed = 1;
  bool no_pruning = false;

  auto* sim = app.add_subcommand("simulate", "Run one simulation at a fixed offered rate");
  sim->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  sim->add_option("--config", config_text, "Instance counts per catalog type, e.g. 3,1,3")->required();
  sim->add_option("--policy", policy, "kairos | ribbon | drs | clkwrk");
  sim->add_option("--rate", rate, "Offered rate in QPS (default: scenario workload rate)");
  sim->add_option("--out", out, "Report path (default: stdout)");

  auto* plan = app.add_subcommand("plan", "Rank configurations by upper bound and pick one without simulation");
  plan->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  plan->add_option("--out-dir", out_dir, "Directory for upper_bounds.csv and plan.json")->required();

  auto* search = app.add_subcommand("search", "Search the configuration space with simulated evaluations");
  search->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  search->add_option("--algo", algo, "kairos_plus | random")->check(CLI::IsMember({"kairos_plus", "random"}));
  search->add_option("--seed", seed, "Shuffle seed for random search");
  search->add_flag("--no-pruning", no_pruning, "Disable sub-configuration pruning for random search");
  search->add_option("--out-dir", out_dir, "Directory for search_trace.csv and search_summary.json");

  auto* cmp = app.add_subcommand("compare", "Allowable throughput of every policy on one configuration");
  cmp->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  cmp->add_option("--config", config_text, "Configuration (default: the plan's choice)");
  cmp->add_option("--out", out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    Experiment exp(load_scenario(scenario_path));
    const auto& sc = exp.scenario();

    if (*sim) {
      auto config = parse_config(config_text);
      validate(config, sc.catalog);
      make_policy(policy);  // rejects unknown names before any work
      auto report = exp.simulate(config, policy, rate);
      json j = report_json(report, sc.catalog);
      j["config"] = config.to_string();
      j["scenario"] = scenario_stamp(sc);
      emit(out, dump(j));
    } else if (*plan) {
      const auto& p = exp.profile();
      auto choice = exp.plan();
      std::ostringstream csv;
      write_upper_bound_csv(csv, exp.table(), sc.catalog);
      json types = json::array();
      for (std::size_t t = 0; t < sc.catalog.size(); ++t)
        types.push_back({{"name", sc.catalog[t].name},
                         {"qos_batch_limit", p.s[t]},
                         {"fraction_below_limit", p.f[t]},
                         {"aux_rate_qps", p.q_aux[t]}});
      json j{{"chosen_config", choice.config.to_string()},
             {"qps_upper_bound", choice.qps_max},
             {"cost_per_hour", choice.config.cost_per_hour(sc.catalog)},
             {"rule", to_string(choice.rule)},
             {"candidates_considered", choice.candidates},
             {"search_space", exp.configs().size()},
             {"profile",
              {{"types", types},
               {"f_prime", p.f_prime},
               {"s_prime", p.s_prime},
               {"base_rate_qps", p.q_base},
               {"base_rate_large_qps", p.q_base_splus}}},
             {"scenario", scenario_stamp(sc)}};
      write_file(fs::path(out_dir) / "upper_bounds.csv", csv.str());
      write_file(fs::path(out_dir) / "plan.json", dump(j));
      std::cout << "chosen " << choice.config.to_string() << " (" << to_string(choice.rule) << "), bound "
                << choice.qps_max << " QPS over " << exp.configs().size() << " configs\n";
    } else if (*search) {
      SearchTrace trace = algo == "kairos_plus" ? exp.search_kairos_plus() : exp.search_random(seed, !no_pruning);
      json j = trace_summary(trace, exp.configs().size());
      j["algorithm"] = algo;
      if (algo == "random") {
        j["seed"] = seed;
        j["pruning"] = !no_pruning;
      }
      j["scenario"] = scenario_stamp(sc);
      if (!out_dir.empty()) {
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        write_file(fs::path(out_dir) / "search_trace.csv", csv.str());
        write_file(fs::path(out_dir) / "search_summary.json", dump(j));
      }
      std::cout << dump(j);
    } else if (*cmp) {
      auto config = config_text.empty() ? exp.plan().config : parse_config(config_text);
      validate(config, sc.catalog);
      auto rows = exp.compare(config);
      std::ostringstream csv;
      csv << "# scenario=" << sc.name << " digest=" << sc.digest << " config=" << config.to_string() << '\n';
      csv << "policy,allowable_qps,drs_threshold,tuning_evaluations\n";
      for (const auto& r : rows) {
        csv << r.policy << ',' << r.qps << ',';
        if (r.drs_threshold) csv << *r.drs_threshold;
        csv << ',' << r.tuning_evaluations << '\n';
      }
      emit(out, csv.str());
    }
  } catch (const ConfigurationError& e) {
    std::cerr << "infeasible scenario: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
