#pragma once

#include <CLI11.hpp>

namespace neurotopo::cli {

/// Options shared by every subcommand.
struct GlobalOptions {
  unsigned jobs = 1;
  std::size_t memory_budget = 0;
};

/// Registers every subcommand on `app`. Handlers run from App callbacks and
/// throw neurotopo::DataError on bad data.
void register_commands(CLI::App& app, GlobalOptions& global);

}  // namespace neurotopo::cli
