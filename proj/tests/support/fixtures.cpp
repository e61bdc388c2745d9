#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kbmc::testing {

namespace fs = std::filesystem;

std::string fixture_path(const std::string& name) {
  return (fs::path(KBMC_FIXTURE_DIR) / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

KnowledgeBase load_fixture(const std::string& name) {
  return parse_kb(read_file(fixture_path(name)), name);
}

std::vector<std::string> all_fixtures() {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(KBMC_FIXTURE_DIR)) {
    if (entry.path().extension() == ".ikb") {
      out.push_back(fs::relative(entry.path(), KBMC_FIXTURE_DIR).generic_string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> horn_fixtures() {
  std::vector<std::string> out;
  for (const std::string& f : all_fixtures()) {
    if (f.rfind("horn/", 0) == 0) out.push_back(f);
  }
  return out;
}

std::vector<Query> fixture_queries(const std::string& name) {
  std::istringstream in(read_file(fixture_path(name)));
  std::vector<Query> out;
  const std::string marker = "% query:";
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(marker, 0) == 0) out.push_back(parse_query(line.substr(marker.size())));
  }
  return out;
}

}  // namespace kbmc::testing
