#pragma once

// The acceptance suite: criteria 1-11, each run at its stated sample counts
// and tolerances (full) or at reduced counts with the same tolerances (fast).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace curvcone::acceptance {

enum class Suite { fast, full };

struct Options {
    Suite suite = Suite::full;
    std::uint64_t seed = 1;
    int workers = 1;
    // criteria to run; empty runs all
    std::vector<int> only;
};

struct Result {
    int id = 0;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    double limit_seconds = 0.0;
    // measured quantities behind the verdict
    std::string detail;
    // extra observations printed under the verdict line; never affect it
    std::vector<std::string> notes;
};

inline constexpr int kCriteria = 11;

// Runs the selected criteria in order, calling `report` after each one.
// A criterion passes only if its checks hold and it finished within its time
// limit. Library errors inside a criterion fail that criterion.
std::vector<Result> run(const Options& options, const std::function<void(const Result&)>& report = {});

// "PASS  criterion 3  n = 3 equivalence  (1.2 s of 30 s)  <detail>"
std::string format(const Result& r);

// 0 if every criterion passed or is listed in expected_fail, 1 otherwise.
int exit_status(const std::vector<Result>& results, const std::vector<int>& expected_fail);

}  // namespace curvcone::acceptance
