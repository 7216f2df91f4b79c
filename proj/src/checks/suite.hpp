#pragma once

#include <cstdint>
#include <string>
#include <vector>

// The fifteen acceptance criteria, grouped by module. Shared by the CLI `check` command and the
// acceptance test binary.

namespace dsqft::checks {

struct Measurement {
    std::string name;
    double measured = 0;
    double tolerance = 0;
    bool upper = true;  // pass iff measured <= tolerance; otherwise measured >= tolerance
    bool pass() const { return upper ? measured <= tolerance : measured >= tolerance; }
};

struct CriterionResult {
    int id = 0;
    std::string suite;
    std::string criterion;
    std::vector<Measurement> parts;
    double seconds = 0;
    double budget_seconds = 0;

    bool accurate() const;
    bool in_budget() const { return seconds <= budget_seconds; }
    bool pass() const { return accurate() && in_budget(); }
    // the first failing part, else the first part (each criterion lists its main measurement first)
    const Measurement& headline() const;
};

struct SuiteOptions {
    double mu = 1.0;
    double r = 1.0;
    std::uint64_t seed = 20240917;
    int threads = 0;  // 0: DSQFT_THREADS or the hardware concurrency
};

// group, geometry, specfun, rep, oneparticle, euclid, all
const std::vector<std::string>& suite_names();
// ContractError for an unknown suite name.
std::vector<CriterionResult> run_suite(const std::string& name, const SuiteOptions& opt = {});

}  // namespace dsqft::checks
