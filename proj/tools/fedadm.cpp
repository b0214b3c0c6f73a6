#include "fedadm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return fedadm::cli_main(argc, argv, std::cout, std::cerr);
}
