// Front end shared by the kbmc executable and the CLI tests: load a KB, run
// queries, render answers.

#ifndef KBMC_CLI_CLI_HPP_
#define KBMC_CLI_CLI_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

namespace kbmc::cli {

enum ExitCode : int {
  kOk = 0,
  kConstructionFailed = 1,
  kParseError = 2,
  kIoError = 3,
};

enum class Format { kText, kJson };

struct CliConfig {
  std::string kb_path;
  // At most one of these; neither means queries are read from the input
  // stream, one per line.
  std::optional<std::string> query;
  std::optional<std::string> query_file;
  bool trace = false;
  bool explain = false;
  std::optional<std::string> dot_path;
  std::optional<std::size_t> models;
  std::size_t depth = 64;
  Format format = Format::kText;
};

// Construct and solve. `in` is only read in line mode.
int run(const CliConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err);

// Parse and check only; prints declaration counts.
int validate(const std::string& kb_path, std::ostream& out, std::ostream& err);

// Like run(), but answers by brute-force enumeration over the constructed
// diagram instead of the evaluator.
int oracle(const CliConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace kbmc::cli

#endif  // KBMC_CLI_CLI_HPP_
