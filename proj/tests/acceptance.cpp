// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// if every criterion passes.
//
//   acceptance [--only 1,2,...] [--resolution N] [--max-iters N] [--jobs N] [--sweep-csv PATH] [-q]

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>

#include "willmiso/acceptance.hpp"

int main(int argc, char** argv) {
  willmiso::AcceptanceOptions opt;
  bool quiet = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << "\n";
        std::exit(1);
      }
      return argv[++i];
    };
    if (arg == "--only") {
      std::stringstream ss(value());
      std::string id;
      while (std::getline(ss, id, ',')) opt.only.push_back(std::stoi(id));
    } else if (arg == "--resolution") {
      opt.resolution = std::stoi(value());
    } else if (arg == "--max-iters") {
      opt.max_iters = std::stoi(value());
    } else if (arg == "--jobs") {
      opt.jobs = std::stoi(value());
    } else if (arg == "--sweep-csv") {
      opt.sweep_csv = value();
    } else if (arg == "-q") {
      quiet = true;
    } else if (arg == "-h" || arg == "--help") {
      std::cout << "usage: acceptance [--only 1,2,..] [--resolution N] [--max-iters N] [--jobs N]"
                   " [--sweep-csv PATH] [-q]\n";
      return 0;
    } else {
      std::cerr << "unknown argument " << arg << "\n";
      return 1;
    }
  }
  if (const char* env = std::getenv("WILLMISO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) opt.jobs = std::max(opt.jobs, 1) > cap ? cap : std::max(opt.jobs, 1);
  }
  if (!quiet) opt.log = [](const std::string& s) { std::cerr << "  .. " << s << std::endl; };

  int failed = 0;
  willmiso::run_acceptance(opt, [&](const willmiso::CriterionResult& r) {
    if (!r.passed) ++failed;
    std::cout << willmiso::format_result(r) << std::endl;
  });
  std::cout << (failed == 0 ? "acceptance: all criteria passed" : "acceptance: " + std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
