// Command-line front end. run() is the whole program minus process plumbing,
// so tests can drive it in-process.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace kyano::cli {

enum ExitCode { kOk = 0, kVerificationFailed = 1, kUsage = 2 };

struct ReportConfig {
    std::uint64_t seed = 42;
    std::size_t multipole_samples = 1000;
    std::set<std::string> skip;
};

// Section names accepted by --skip.
const std::vector<std::string>& report_sections();

// Aggregated catalog checks. "status" is "pass" or "fail" over the required sections.
nlohmann::json build_report(const ReportConfig& config);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kyano::cli
