// Command-line front end: simulate noncompliant trials and compare the
// Per-Protocol and IV estimators of the complier average causal effect.

#include <iostream>
#include <string>
#include <vector>

#include "cace/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const cace::CliRequest request = cace::parse_cli(args);
    return cace::execute_cli(request, std::cout, std::cerr);
  } catch (const cace::CliHelpRequested& help) {
    std::cout << help.text;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
