// One line per acceptance criterion; exit status 1 if any fails.
#include <cstdio>
#include <string>

#include "checks/suite.hpp"

int main(int argc, char** argv) {
    const std::string suite = argc > 1 ? argv[1] : "all";
    int failed = 0;
    for (const auto& r : dsqft::checks::run_suite(suite)) {
        const auto& h = r.headline();
        std::printf("%s  %2d  %-70s  %s = %.3e (%s %.1e)  %.2f s (budget %.0f s)\n", r.pass() ? "PASS" : "FAIL", r.id,
                    r.criterion.c_str(), h.name.c_str(), h.measured, h.upper ? "<=" : ">=", h.tolerance, r.seconds,
                    r.budget_seconds);
        for (const auto& m : r.parts)
            std::printf("        %-4s %s = %.6e (%s %.6e)\n", m.pass() ? "ok" : "FAIL", m.name.c_str(), m.measured, m.upper ? "<=" : ">=", m.tolerance);
        if (!r.in_budget()) std::printf("        over the runtime budget\n");
        std::fflush(stdout);
        failed += !r.pass();
    }
    std::printf("%d criteria failed\n", failed);
    return failed ? 1 : 0;
}
