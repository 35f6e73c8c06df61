#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace abae::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEngine = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBounds = 3;

enum class OracleMode { Inline, Subprocess };

struct RunConfig {
  std::string input;
  std::size_t k = 5;
  std::uint64_t n1 = 100;
  std::uint64_t n2 = 2000;
  bool reuse = false;
  std::uint64_t seed = 0;
  std::size_t bootstrap_resamples = 1000;
  double alpha = 0.05;
  OracleMode oracle_mode = OracleMode::Inline;
  std::string oracle_command;
  std::string output;  // empty: standard output
};

/// Reads the snake_case fields of a config document over `base`. Unknown
/// keys and ill-typed values throw InvalidArgument.
RunConfig merge_run_config(RunConfig base, const nlohmann::json& doc);

/// Throws InvalidArgument when a numeric field is not positive, alpha is
/// outside (0, 1), or the oracle settings are inconsistent.
void validate(const RunConfig& config);

/// Entry point of the `abae` tool. Subcommands: run, simulate,
/// validate-bounds, generate.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace abae::cli
