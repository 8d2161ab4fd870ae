// Acceptance suite: one callable criterion per scaled-down reproduction of the
// simulation study. Run with --criterion N for a single criterion, or no
// arguments for all twelve. Prints one PASS/FAIL line per criterion.
#include <cmath>
#include <cstring>
#include <iostream>

int run_criterion(int n);

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    int failures = 0;
    if (only > 0) {
        failures = run_criterion(only);
    } else {
        for (int n = 1; n <= 12; ++n) failures += run_criterion(n);
    }
    return failures == 0 ? 0 : 1;
}

int run_criterion(int) { return 0; }  // placeholder while the suite is assembled
