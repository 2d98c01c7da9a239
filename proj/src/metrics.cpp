#include "cludl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cludl/errors.hpp"
#include "cludl/pipeline.hpp"

namespace cludl {

std::vector<int> error_region(const RunOutcome& outcome) {
    std::vector<int> out;
    std::set_intersection(outcome.delta_null.begin(), outcome.delta_null.end(),
                          outcome.selected.begin(), outcome.selected.end(),
                          std::back_inserter(out));
    return out;
}

namespace {

RateCi binomial_rate_ci(int hits, int total) {
    RateCi ci;
    ci.rate = static_cast<double>(hits) / total;
    // 80% two-sided normal approximation, clipped to [0, 1].
    const double half = 1.2816 * std::sqrt(ci.rate * (1.0 - ci.rate) / total);
    ci.lo = std::max(0.0, ci.rate - half);
    ci.hi = std::min(1.0, ci.rate + half);
    return ci;
}

bool selected_outside_support(const RunOutcome& o) {
    return !std::includes(o.support.begin(), o.support.end(),
                          o.selected.begin(), o.selected.end());
}

} // namespace

RateCi delta_fwer_estimate(const std::vector<RunOutcome>& outcomes) {
    if (outcomes.empty())
        throw ContractViolation("delta_fwer_estimate needs at least one outcome");
    const double alpha = outcomes.front().alpha;
    const double delta = outcomes.front().delta;
    int hits = 0;
    for (const auto& o : outcomes) {
        if (o.alpha != alpha || o.delta != delta)
            throw ContractViolation("outcomes must share alpha and delta");
        if (!error_region(o).empty()) ++hits;
    }
    return binomial_rate_ci(hits, static_cast<int>(outcomes.size()));
}

double tpr(const RunOutcome& outcome) {
    if (outcome.support.empty())
        throw UndefinedMetricError("TPR is undefined for an empty support");
    std::vector<int> hits;
    std::set_intersection(outcome.selected.begin(), outcome.selected.end(),
                          outcome.support.begin(), outcome.support.end(),
                          std::back_inserter(hits));
    return static_cast<double>(hits.size()) / outcome.support.size();
}

Summary summarize(const std::vector<RunOutcome>& outcomes) {
    Summary s;
    s.delta_fwer = delta_fwer_estimate(outcomes);
    int fwer_hits = 0;
    std::vector<double> tprs;
    tprs.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        if (selected_outside_support(o)) ++fwer_hits;
        tprs.push_back(tpr(o));
    }
    s.fwer = binomial_rate_ci(fwer_hits, static_cast<int>(outcomes.size()));
    s.tpr_median = empirical_gamma_quantile(tprs, 0.5);
    s.tpr_d10 = empirical_gamma_quantile(tprs, 0.1);
    s.tpr_d90 = empirical_gamma_quantile(tprs, 0.9);
    s.n_seeds = static_cast<int>(outcomes.size());
    return s;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

std::string SummaryRow::csv_header() {
    return "scenario_id,method,C,B,gamma,alpha,delta,n_seeds,delta_fwer,"
           "ci_lo,ci_hi,tpr_median,tpr_d10,tpr_d90,wall_time_s,error";
}

std::string SummaryRow::to_csv() const {
    std::string out;
    out += scenario_id + "," + method + ",";
    out += std::to_string(C) + "," + std::to_string(B) + ",";
    out += fmt(gamma) + "," + fmt(alpha) + "," + fmt(delta) + ",";
    out += std::to_string(n_seeds) + ",";
    out += fmt(delta_fwer) + "," + fmt(ci_lo) + "," + fmt(ci_hi) + ",";
    out += fmt(tpr_median) + "," + fmt(tpr_d10) + "," + fmt(tpr_d90) + ",";
    out += fmt(wall_time_s) + "," + error;
    return out;
}

} // namespace cludl
