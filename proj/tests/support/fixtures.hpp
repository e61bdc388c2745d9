// Locating and loading the .ikb fixtures shipped with the tests.

#ifndef KBMC_TESTS_FIXTURES_HPP_
#define KBMC_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "kbmc/knowledge_base.hpp"
#include "kbmc/parser.hpp"

namespace kbmc::testing {

std::string fixture_path(const std::string& name);
std::string read_file(const std::string& path);
KnowledgeBase load_fixture(const std::string& name);

// Fixture names relative to the fixture directory, sorted.
std::vector<std::string> all_fixtures();
std::vector<std::string> horn_fixtures();

// Queries listed in "% query: ..." comment lines.
std::vector<Query> fixture_queries(const std::string& name);

}  // namespace kbmc::testing

#endif  // KBMC_TESTS_FIXTURES_HPP_
