#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return vpersona::cli_dispatch(argc, argv, std::cout, std::cerr);
}
