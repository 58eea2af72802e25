#include "dagas/cli.hpp"

#include <iostream>

int main(int argc, char **argv)
{
    return dagas::run_cli(argc, argv, std::cout, std::cerr);
}
