#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "strathjb/vec.hpp"

namespace strathjb::report {

//! One probed site inside a check: a point (and optionally a time and a
//! stratum), the residual measured there, and whether it passed.
struct Site {
  Vec location;
  std::optional<double> time;
  std::optional<int> stratum;
  double residual = 0.0;
  bool pass = true;
  std::string note;
};

//! Uniform result of every verification and validation entry point.
//! Serialized shape: {check, tolerance, sites, max_residual, pass} plus any
//! check-specific fields carried in `extra`.
struct CheckReport {
  std::string check;
  double tolerance = 0.0;
  std::vector<Site> sites;
  double max_residual = 0.0;
  bool pass = true;
  nlohmann::json extra = nlohmann::json::object();

  //! Record a site and fold it into max_residual / pass.
  void add(Site s) {
    max_residual = std::max(max_residual, std::abs(s.residual));
    if (!s.pass) pass = false;
    sites.push_back(std::move(s));
  }

  nlohmann::json to_json(std::size_t max_sites = 64) const;
};

//! Result of one structural-assumption checker: per-stratum entries plus a
//! summary (certified deltas, fitted constants, modulus tables, witnesses).
struct AssumptionReport {
  std::string assumption;                 // "nc" | "tc" | "lp"
  bool pass = true;
  std::vector<CheckReport> entries;       // one per stratum or facet of the check
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json to_json() const;
};

}  // namespace strathjb::report
