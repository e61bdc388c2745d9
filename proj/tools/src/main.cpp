#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "kbmc_cli/cli.hpp"

int main(int argc, char** argv) {
  using kbmc::cli::CliConfig;
  using kbmc::cli::Format;

  CLI::App app{"kbmc: build and solve query-specific influence diagrams from a knowledge base"};
  app.require_subcommand(1);

  CliConfig cfg;
  const std::map<std::string, Format> formats{{"text", Format::kText}, {"json", Format::kJson}};

  auto add_query_options = [&](CLI::App* cmd) {
    cmd->add_option("kb", cfg.kb_path, "knowledge base file (.ikb)")->required();
    auto* q = cmd->add_option("-q,--query", cfg.query, "query text, e.g. \"?dist (weather ?x monday).\"");
    auto* f = cmd->add_option("--query-file", cfg.query_file, "file holding one query");
    q->excludes(f);
    cmd->add_flag("--trace", cfg.trace, "append the construction trace");
    cmd->add_flag("--explain", cfg.explain, "append the solver's transformations");
    cmd->add_option("--dot", cfg.dot_path, "write the constructed diagram as Graphviz DOT");
    cmd->add_option("--models", cfg.models, "enumerate up to K distinct models")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--depth", cfg.depth, "subgoal depth limit")->check(CLI::PositiveNumber);
    cmd->add_option("--format", cfg.format, "output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
        ->option_text("text|json");
  };

  CLI::App* run = app.add_subcommand("run", "answer queries against a knowledge base");
  add_query_options(run);
  CLI::App* validate = app.add_subcommand("validate", "parse and check a knowledge base");
  validate->add_option("kb", cfg.kb_path, "knowledge base file (.ikb)")->required();
  CLI::App* oracle = app.add_subcommand("oracle", "")->group("");
  add_query_options(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; any other command-line error is a parse error.
    int code = app.exit(e);
    return code == 0 ? kbmc::cli::kOk : kbmc::cli::kParseError;
  }

  if (*run) return kbmc::cli::run(cfg, std::cin, std::cout, std::cerr);
  if (*validate) return kbmc::cli::validate(cfg.kb_path, std::cout, std::cerr);
  return kbmc::cli::oracle(cfg, std::cin, std::cout, std::cerr);
}
