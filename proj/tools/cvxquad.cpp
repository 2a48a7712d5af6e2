#include <iostream>

#include "cvxquad/cli.hpp"

int main(int argc, char** argv) {
  return cvxquad::cli::run(argc, argv, std::cout, std::cerr);
}
