#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "vfpen/config.hpp"

namespace {

void print_usage(std::ostream& out) {
    out << "usage: vfpen run --scenario <names> --selectors <tokens> [options]\n"
           "\n"
           "options:\n"
           "  --scenario   comma list or repeated flag; one of S1 S2 HSd1 HSd2 S1000\n"
           "               Ssqrt0.1 S0.1 Svar2 Sqrt His6 DopReg Dop2bin\n"
           "  --selectors  comma list, e.g. mal,mal*,2fcv,loo,pen10f,penloo+,epenid\n"
           "               suffix + multiplies the penalty by 5/4; @c=<x> overrides C\n"
           "  --N          replications per scenario (default 100)\n"
           "  --seed       64-bit master seed (default 0)\n"
           "  --threads    worker count, or auto (env VFOLD_THREADS as fallback)\n"
           "  --output     output path (atomic write); stdout when omitted\n"
           "  --format     csv | markdown | json (default csv)\n"
           "  --config     key=value file; flags override file values\n";
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        print_usage(args.empty() ? std::cerr : std::cout);
        return args.empty() ? 2 : 0;
    }
    try {
        const vfpen::RunConfig cfg = vfpen::parse_config(args);
        return vfpen::run_batch(cfg, std::cout, std::cerr);
    } catch (const vfpen::config_error& ex) {
        std::cerr << "error: " << ex.what() << "\n\n";
        print_usage(std::cerr);
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
