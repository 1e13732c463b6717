#pragma once

// Minimal subprocess and filesystem helpers for exercising the command-line
// binary from tests.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace testsupport {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr merged
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult res;
  std::FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return res;
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe))
    res.output += buf.data();
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  return res;
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  std::string tmpl = (std::filesystem::temp_directory_path() /
                      ("sos_test_" + tag + "_XXXXXX"))
                         .string();
  char* got = ::mkdtemp(tmpl.data());
  return std::filesystem::path(got ? got : tmpl.c_str());
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testsupport
