// ghostmg: experiment runner and verification front end.

#include <CLI11.hpp>

#include <iostream>

#include "ghostmg/experiment.hpp"
#include "ghostmg/verify.hpp"

namespace {

template <class Row>
void write_rows(const ghostmg::ExperimentConfig& c, const char* header, const std::vector<Row>& rows) {
  if (c.output.empty()) {
    ghostmg::write_csv(std::cout, header, rows);
  } else {
    ghostmg::emit_results(rows, c.output);
  }
}

int run(const std::string& path) {
  ghostmg::ExperimentConfig c;
  try {
    c = ghostmg::load_config(path);
  } catch (const ghostmg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  bool row_error = false;
  if (c.study == ghostmg::Study::Accuracy) {
    const auto rows = ghostmg::run_accuracy_study(c);
    for (const auto& r : rows)
      if (!r.error.empty()) {
        row_error = true;
        std::cerr << "row error (n=" << r.n << "): " << r.error << '\n';
      }
    write_rows(c, ghostmg::kAccuracyHeader, rows);
  } else {
    const auto rows = ghostmg::run_experiment(c);
    for (const auto& r : rows) {
      if (!r.error.empty()) {
        row_error = true;
        std::cerr << "row error (n=" << r.n << "): " << r.error << '\n';
      }
      if (r.diverged) std::cerr << "warning: divergence detected (n=" << r.n << ")\n";
    }
    write_rows(c, ghostmg::kResultHeader, rows);
  }
  return row_error ? 1 : 0;
}

int catalog() {
  for (const auto& e : ghostmg::domain_catalog_entries()) {
    std::cout << e.name << " (" << e.dim << "D): " << e.description;
    if (!e.defaults.empty()) {
      std::cout << " [";
      bool first = true;
      for (const auto& [k, v] : e.defaults) {
        std::cout << (first ? "" : ", ") << k << '=' << v;
        first = false;
      }
      std::cout << ']';
    }
    if (!e.required.empty()) {
      std::cout << " requires:";
      for (const auto& r : e.required) std::cout << ' ' << r;
    }
    std::cout << '\n';
  }
  return 0;
}

int verify(bool acceptance) {
  bool ok = true;
  std::size_t k = 0;
  if (acceptance) {
    for (const auto& f : ghostmg::acceptance_criteria()) {
      ++k;
      const auto r = ghostmg::run_guarded(f, "criterion " + std::to_string(k));
      ok = ok && r.pass;
      std::cout << ghostmg::format_line(k, r) << std::endl;
    }
  } else {
    for (const auto& r : ghostmg::property_suite()) {
      ok = ok && r.pass;
      std::cout << ghostmg::format_line(++k, r) << std::endl;
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ghost-FEM geometric multigrid for Poisson on level-set domains"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "config file (key = value lines)")->required();

  auto* catalog_cmd = app.add_subcommand("catalog", "list the built-in domains");

  bool acceptance = false;
  auto* verify_cmd = app.add_subcommand("verify", "run the property suite and print PASS/FAIL lines");
  verify_cmd->add_flag("--acceptance", acceptance, "run the full acceptance criteria instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return run(config_path);
    if (*catalog_cmd) return catalog();
    if (*verify_cmd) return verify(acceptance);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
