#include <cstdlib>
#include <cstring>
#include <iostream>

#include "selftest.hpp"

// Usage: acceptance [--quick] [criterion ids...]
int main(int argc, char** argv) {
    coassoc::selftest::Options opt;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0)
            opt.quick = true;
        else
            opt.only.push_back(std::atoi(argv[i]));
    }
    auto results = coassoc::selftest::run(opt, std::cout);
    int failed = 0;
    for (auto& r : results) failed += !r.pass;
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
