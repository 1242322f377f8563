#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    const wpdef::cli::CommandResult r = wpdef::cli::run(argc, argv);
    (r.exit_code == 0 ? std::cout : std::cerr) << r.report;
    return r.exit_code;
}
