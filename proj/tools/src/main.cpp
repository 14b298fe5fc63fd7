#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kSuiteNames{"identities", "operators", "stability", "fields"};

struct Overrides {
  int grid_scale = 0;  // 0 = keep config value
  long seed = -1;
  std::string csv_dir;
  std::string json_dir;
  bool dump_fields = false;
  bool all = false;
};

struct Job {
  const foliage::Scenario* scenario = nullptr;
  std::vector<std::string> suites;
  foliage::RunOptions opt;
};

void check_suites(const std::vector<std::string>& suites) {
  for (const auto& s : suites)
    if (!kSuiteNames.count(s)) throw foliage::ConfigError("unknown suite '" + s + "'");
}

Job job_from_name(const std::string& name) {
  Job job;
  job.scenario = &foliage::find_scenario(name);
  job.suites = job.scenario->suites;
  return job;
}

Job job_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw foliage::ConfigError("cannot open config '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    throw foliage::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object() || !cfg.contains("scenario"))
    throw foliage::ConfigError("config '" + path + "' needs a \"scenario\" key");

  Job job = job_from_name(cfg.at("scenario").get<std::string>());
  if (cfg.contains("suites")) {
    job.suites = cfg.at("suites").get<std::vector<std::string>>();
    check_suites(job.suites);
  }
  if (cfg.contains("grid_scale")) job.opt.grid_scale = cfg.at("grid_scale").get<int>();
  if (cfg.contains("seed")) job.opt.seed = cfg.at("seed").get<unsigned>();
  if (cfg.contains("dump_fields")) job.opt.dump_fields = cfg.at("dump_fields").get<bool>();
  for (const auto& [key, value] : cfg.items()) {
    (void)value;
    if (key != "scenario" && key != "suites" && key != "grid_scale" && key != "seed" &&
        key != "dump_fields")
      throw foliage::ConfigError("config '" + path + "' has an unknown key '" + key + "'");
  }
  return job;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const fs::path& dir, const std::string& name,
               const foliage::ScenarioResult& res) {
  fs::create_directories(dir);
  std::ofstream out(dir / (name + ".csv"));
  out << "scenario,suite,check,r,t,value,bound,contracted,pass\n";
  char buf[64];
  for (const auto& row : res.rows) {
    out << csv_quote(row.scenario) << ',' << csv_quote(row.suite) << ',' << csv_quote(row.check)
        << ',';
    if (row.r >= 0) out << row.r;
    out << ',';
    if (!std::isnan(row.t)) {
      std::snprintf(buf, sizeof buf, "%.17g", row.t);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", row.value);
    out << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", row.bound);
    out << ',' << buf << ',' << (row.contracted ? 1 : 0) << ',' << (row.pass ? 1 : 0) << '\n';
  }
  for (const auto& dump : res.dumps) {
    std::ofstream table(dir / (name + "--" + dump.name + ".csv"));
    if (!dump.header.empty()) table << dump.header << '\n';
    for (long i = 0; i < dump.table.rows(); ++i) {
      for (long j = 0; j < dump.table.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", dump.table(i, j));
        table << (j ? "," : "") << buf;
      }
      table << '\n';
    }
  }
}

void write_json(const fs::path& dir, const std::string& name,
                const foliage::ScenarioResult& res) {
  fs::create_directories(dir);
  json doc;
  doc["scenario"] = name;
  doc["rows"] = json::array();
  for (const auto& row : res.rows) {
    json r{{"suite", row.suite},           {"check", row.check},
           {"value", row.value},           {"bound", row.bound},
           {"contracted", row.contracted}, {"pass", row.pass}};
    if (row.r >= 0) r["r"] = row.r;
    if (!std::isnan(row.t)) r["t"] = row.t;
    doc["rows"].push_back(std::move(r));
  }
  doc["notes"] = res.notes;
  std::ofstream out(dir / (name + ".json"));
  out << doc.dump(2) << '\n';
}

void print_report(const std::string& name, const std::vector<std::string>& suites,
                  const foliage::ScenarioResult& res) {
  std::printf("== %s ==\n", name.c_str());
  std::string current;
  for (const auto& row : res.rows) {
    if (row.suite != current) {
      current = row.suite;
      std::printf("  [%s]\n", current.c_str());
    }
    std::string where;
    if (row.r >= 0) where += " r=" + std::to_string(row.r);
    if (!std::isnan(row.t)) {
      char tb[32];
      std::snprintf(tb, sizeof tb, " t=%g", row.t);
      where += tb;
    }
    const char* status = row.contracted ? (row.pass ? "pass" : "FAIL") : "info";
    std::printf("    %-4s  %-58s%-14s %10.3e", status, row.check.c_str(), where.c_str(),
                row.value);
    if (row.contracted) std::printf("  (bound %.1e)", row.bound);
    std::printf("\n");
  }
  if (res.rows.empty())
    std::printf("  no checks: scenario carries none of the requested suites (%zu requested)\n",
                suites.size());
  for (const auto& note : res.notes) {
    std::printf("  --\n");
    std::istringstream lines(note);
    std::string line;
    while (std::getline(lines, line)) std::printf("  | %s\n", line.c_str());
  }
  std::printf("\n");
}

int run_jobs(std::vector<Job>& jobs, const Overrides& over) {
  std::vector<std::string> failures;
  std::size_t checks = 0;
  for (auto& job : jobs) {
    if (over.grid_scale > 0) job.opt.grid_scale = over.grid_scale;
    if (over.seed >= 0) job.opt.seed = unsigned(over.seed);
    if (over.dump_fields) job.opt.dump_fields = true;
    check_suites(job.suites);

    auto res = job.scenario->run(job.suites, job.opt);
    checks += res.rows.size();
    print_report(job.scenario->name, job.suites, res);
    if (!over.csv_dir.empty()) write_csv(over.csv_dir, job.scenario->name, res);
    if (!over.json_dir.empty()) write_json(over.json_dir, job.scenario->name, res);
    for (const auto& row : res.rows)
      if (row.contracted && !row.pass)
        failures.push_back(row.scenario + " / " + row.suite + " / " + row.check);
  }
  std::printf("%zu scenario%s, %zu checks, %zu failure%s\n", jobs.size(),
              jobs.size() == 1 ? "" : "s", checks, failures.size(),
              failures.size() == 1 ? "" : "s");
  if (!failures.empty()) {
    std::string what = "numerical contract violated: " + failures.front();
    if (failures.size() > 1)
      what += " (and " + std::to_string(failures.size() - 1) + " more)";
    throw foliage::NumericalContractViolation(what);
  }
  return EXIT_SUCCESS;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature ladders, stability operators, and sign surveys for hypersurfaces "
               "and warped foliations"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "print the shipped scenarios");

  Overrides over;
  std::vector<std::string> targets;
  auto* run = app.add_subcommand("run", "run scenario configs (shipped names or JSON files)");
  run->add_option("targets", targets, "scenario names or config paths");
  run->add_flag("--all", over.all, "run every shipped scenario");
  run->add_option("--grid-scale", over.grid_scale,
                  "power-of-two multiplier for every grid size")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", over.seed, "sampling seed for the ambient classification")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--csv", over.csv_dir, "directory for per-scenario CSV reports");
  run->add_option("--json", over.json_dir, "directory for per-scenario JSON reports");
  run->add_flag("--dump-fields", over.dump_fields, "also write sampled field tables");

  list->callback([] {
    for (const auto& s : foliage::scenario_catalog()) {
      std::printf("%-18s %s\n", s.name.c_str(), s.summary.c_str());
      std::printf("%-18s suites:", "");
      for (const auto& suite : s.suites) std::printf(" %s", suite.c_str());
      std::printf("\n");
    }
  });

  run->callback([&] {
    std::vector<Job> jobs;
    if (over.all)
      for (const auto& s : foliage::scenario_catalog()) jobs.push_back(job_from_name(s.name));
    for (const auto& target : targets) {
      if (fs::path(target).extension() == ".json" || fs::exists(target))
        jobs.push_back(job_from_file(target));
      else
        jobs.push_back(job_from_name(target));
    }
    if (jobs.empty()) throw foliage::ConfigError("nothing to run: pass targets or --all");
    run_jobs(jobs, over);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const foliage::NumericalContractViolation& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const foliage::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const foliage::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
