// anisolab command line: run experiments, list the catalog, export fields.
// Links only the C API.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "anisolab.h"

int main(int argc, char** argv) {
  CLI::App app{"anisolab - numerical laboratory for weighted semilinear equations"};
  app.set_version_flag("--version", std::string(aniso_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, field_path, csv_path;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "key=value config file")->required();
  run->add_option("-o,--out", out_dir, "output directory override");

  CLI::App* list = app.add_subcommand("list", "list the built-in experiments");

  CLI::App* exp = app.add_subcommand("export-csv", "convert an ANISO1 field container to CSV");
  exp->add_option("field", field_path, "field container path")->required();
  exp->add_option("-o,--out", csv_path, "CSV output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return aniso_run(config_path.c_str(), out_dir.empty() ? nullptr : out_dir.c_str());

  if (list->parsed()) {
    std::fputs(aniso_experiment_catalog(), stdout);
    return 0;
  }

  if (exp->parsed()) {
    aniso_status st =
        aniso_field_export_csv(field_path.c_str(), csv_path.empty() ? nullptr : csv_path.c_str());
    if (st != ANISO_OK) {
      std::fprintf(stderr, "error: %s\n", aniso_last_error());
      return 1;
    }
    return 0;
  }
  return 1;
}
