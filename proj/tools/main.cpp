// nvstimex: batch front-end for the three-level emission-dynamics toolkit.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nvstimex/config.hpp"
#include "nvstimex/errors.hpp"
#include "nvstimex/runner.hpp"

namespace {

struct SubcommandArgs {
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
};

int run_subcommand(nvstimex::ExperimentType type, const SubcommandArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) {
    std::cerr << "error: cannot open config file: " << args.config_path << "\n";
    return 1;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  nvstimex::RunConfig config;
  try {
    config = nvstimex::parse_config(buffer.str());
  } catch (const nvstimex::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  nvstimex::RunOptions options;
  options.out_dir = args.out_dir;
  options.quiet = args.quiet;
  return nvstimex::run(config, type, options, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-level emission dynamics under CW pumping and pulsed stimulation"};
  app.require_subcommand(1);

  const std::pair<const char*, nvstimex::ExperimentType> subcommands[] = {
      {"steady-state", nvstimex::ExperimentType::steady_state},
      {"simulate", nvstimex::ExperimentType::simulate},
      {"sweep-wavelength", nvstimex::ExperimentType::sweep_wavelength},
      {"sweep-power", nvstimex::ExperimentType::sweep_power},
      {"recovery", nvstimex::ExperimentType::recovery},
      {"fit", nvstimex::ExperimentType::fit},
      {"classify", nvstimex::ExperimentType::classify},
  };

  auto args = std::make_shared<SubcommandArgs>();
  int exit_code = 0;
  for (const auto& [name, type] : subcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args->config_path, "Run configuration (JSON)")
        ->required();
    sub->add_option("--out-dir", args->out_dir, "Directory for output CSV files");
    sub->add_flag("--quiet", args->quiet, "Suppress the summary line");
    const nvstimex::ExperimentType sub_type = type;
    sub->callback([args, sub_type, &exit_code]() {
      exit_code = run_subcommand(sub_type, *args);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return exit_code;
}
