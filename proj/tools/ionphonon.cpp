#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    using namespace ionphonon::cli;
    const ParseResult p = parse_config(argc, argv);
    if (p.exit_code >= 0) {
        (p.exit_code == kOk ? std::cout : std::cerr) << p.message;
        return p.exit_code;
    }
    return run(p.cfg, std::cout, std::cerr);
}
