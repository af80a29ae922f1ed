#include <iostream>
#include <string>
#include <vector>

#include "mwtp/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return mwtp::run_cli(args, std::cout, std::cerr);
}
