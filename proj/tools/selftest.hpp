#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace coassoc::selftest {

struct Options {
    unsigned seed = 20240611;
    // Wall checks stop at refinement level 3 instead of comparing levels 3 and 4.
    bool quick = false;
    std::vector<int> only;  // empty runs all criteria
};

struct Result {
    int id;
    std::string name;
    bool pass;
    double seconds;
    double budget;  // seconds
    std::string detail;
};

// Runs the acceptance criteria and prints one line per criterion to `log` as it goes.
std::vector<Result> run(const Options& opt, std::ostream& log);

std::string format_line(const Result& r);

}  // namespace coassoc::selftest
