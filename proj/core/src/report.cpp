#include "strathjb/report.hpp"

#include <algorithm>
#include <cmath>

namespace strathjb::report {

nlohmann::json CheckReport::to_json(std::size_t max_sites) const {
  nlohmann::json sites_json = nlohmann::json::array();
  // Reports stay readable: failing sites first, then the worst passing ones,
  // truncated. max_residual/pass always reflect every probed site.
  std::vector<const Site*> order;
  order.reserve(sites.size());
  for (const Site& s : sites)
    if (!s.pass) order.push_back(&s);
  std::vector<const Site*> passing;
  for (const Site& s : sites)
    if (s.pass) passing.push_back(&s);
  std::stable_sort(passing.begin(), passing.end(),
                   [](const Site* a, const Site* b) {
                     return std::abs(a->residual) > std::abs(b->residual);
                   });
  order.insert(order.end(), passing.begin(), passing.end());
  if (order.size() > max_sites) order.resize(max_sites);

  for (const Site* s : order) {
    nlohmann::json j;
    j["location"] = s->location;
    if (s->time) j["time"] = *s->time;
    if (s->stratum) j["stratum"] = *s->stratum;
    j["residual"] = s->residual;
    j["pass"] = s->pass;
    if (!s->note.empty()) j["note"] = s->note;
    sites_json.push_back(std::move(j));
  }

  nlohmann::json j;
  j["check"] = check;
  j["tolerance"] = tolerance;
  j["sites"] = std::move(sites_json);
  j["sites_probed"] = sites.size();
  j["max_residual"] = max_residual;
  j["pass"] = pass;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

nlohmann::json AssumptionReport::to_json() const {
  nlohmann::json j;
  j["assumption"] = assumption;
  j["pass"] = pass;
  j["summary"] = summary;
  nlohmann::json e = nlohmann::json::array();
  for (const CheckReport& r : entries) e.push_back(r.to_json());
  j["entries"] = std::move(e);
  return j;
}

}  // namespace strathjb::report
