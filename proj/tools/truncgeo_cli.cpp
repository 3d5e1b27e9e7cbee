#include <vector>
#include <string>

#include "truncgeo/cli.hpp"

int main(int argc, char** argv) {
    return truncgeo::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
