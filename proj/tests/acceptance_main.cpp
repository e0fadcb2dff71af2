// Acceptance gate for the library's core guarantees.  Each check prints one
// PASS/FAIL line with its measured numbers; the exit status is the number of
// failures.  Tolerances live next to the checks in qpwalk/verify.hpp.

#include <algorithm>
#include <cstdio>
#include <thread>
#include <vector>

#include "qpwalk/verify.hpp"

int main() {
    using qpwalk::verify::CheckResult;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    std::vector<CheckResult> results;
    results.push_back(qpwalk::verify::check_martingale_identity());
    results.push_back(qpwalk::verify::check_exit_probability_oracle());
    results.push_back(qpwalk::verify::check_visit_counts());
    results.push_back(qpwalk::verify::check_renewal_identity());
    results.push_back(qpwalk::verify::check_return_ratio());
    results.push_back(qpwalk::verify::check_strong_ratio_limit());
    results.push_back(qpwalk::verify::check_stationary_harmonics());
    results.push_back(qpwalk::verify::check_running_extremum_trend(threads));
    results.push_back(qpwalk::verify::check_mixing_gap(threads));
    results.push_back(qpwalk::verify::check_denjoy_koksma());
    results.push_back(qpwalk::verify::check_mc_determinism());

    int failed = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const CheckResult& r = results[i];
        if (!r.pass) ++failed;
        total += r.seconds;
        std::printf("[%2zu/%zu] %s %-28s %7.2fs  %s\n", i + 1, results.size(),
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    }
    std::printf("%d/%zu passed in %.1fs\n", static_cast<int>(results.size()) - failed,
                results.size(), total);
    return failed;
}
