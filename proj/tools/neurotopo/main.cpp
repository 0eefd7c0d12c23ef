#include <cstdlib>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"
#include "neurotopo/parallel.hpp"
#include "neurotopo/rips.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

std::size_t budget_from_env() {
  if (const char* env = std::getenv("NEUROTOPO_RIPS_MEMORY_BUDGET")) {
    const auto v = neurotopo::io::parse_int(env);
    if (v && *v > 0) return static_cast<std::size_t>(*v);
    std::cerr << "warning: ignoring invalid NEUROTOPO_RIPS_MEMORY_BUDGET='" << env << "'\n";
  }
  return neurotopo::kDefaultMemoryBudget;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neurotopo: persistent homology of point clouds and neural representations"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  neurotopo::cli::GlobalOptions global;
  global.jobs = neurotopo::default_jobs();
  global.memory_budget = budget_from_env();
  app.add_option("-j,--jobs", global.jobs, "Worker threads (output is identical for any value)")
      ->check(CLI::PositiveNumber);
  app.add_option("--memory-budget", global.memory_budget,
                 "Byte budget for Rips enumeration (env NEUROTOPO_RIPS_MEMORY_BUDGET)")
      ->check(CLI::PositiveNumber);

  neurotopo::cli::register_commands(app, global);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  } catch (const neurotopo::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
