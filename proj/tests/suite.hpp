#pragma once
// The acceptance suite: deterministic corpus construction plus the twelve
// property gates, each checked against an independent oracle where one is
// called for.  Reports carry no timings so that identical seeds give
// byte-identical output.

#include <iosfwd>
#include <string>
#include <vector>

#include "epistemia/common.hpp"

namespace epistemia::suite {

struct SpecParseError : Error {
  explicit SpecParseError(const std::string& w) : Error(w) {}
};

struct SuiteSpec {
  uint64_t seed = 1;
  bool empty_corpus = false;    // run vacuously (with a warning per criterion)
  std::string report_json;      // optional output paths
  std::string report_junit;
};

// Parses {"seed": ..., "empty_corpus": ..., "report_json": ..., ...};
// throws SpecParseError on malformed input.
SuiteSpec parse_suite_spec(const std::string& json_text);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  bool vacuous = false;
  std::string detail;
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  bool all_pass() const {
    for (const auto& c : criteria)
      if (!c.pass) return false;
    return true;
  }
};

// Runs every criterion, streaming one pass/fail line per criterion to `log`
// (timings go to `timing_log`, kept out of the reports).
SuiteResult run_suite(const SuiteSpec& spec, std::ostream& log,
                      std::ostream& timing_log);

std::string suite_report_json(const SuiteResult& result, uint64_t seed);
std::string suite_report_junit(const SuiteResult& result);

}  // namespace epistemia::suite
