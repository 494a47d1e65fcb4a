#include <iostream>

#include "ctindex/service/cli.hpp"

int main(int argc, char** argv) { return ctindex::service::run_cli(argc, argv, std::cout, std::cerr); }
