#pragma once

#include <string>
#include <vector>

namespace cludl {

// One Monte-Carlo run: what was selected at level alpha against the truth.
// All index sets are sorted ascending.
struct RunOutcome {
    std::vector<int> selected;
    std::vector<int> support;    // S(beta*)
    std::vector<int> delta_null; // N^delta(beta*)
    double alpha = 0.0;
    double delta = 0.0;
};

// Erroneous rejections with tolerance delta: N^delta intersected with the
// rejection region.
std::vector<int> error_region(const RunOutcome& outcome);

struct RateCi {
    double rate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Fraction of outcomes whose delta-type-1 error region is nonempty, with an
// 80% normal-approximation binomial confidence interval.
RateCi delta_fwer_estimate(const std::vector<RunOutcome>& outcomes);

// |selected and support| / |support|; throws UndefinedMetricError when the
// support is empty.
double tpr(const RunOutcome& outcome);

struct Summary {
    RateCi delta_fwer;
    RateCi fwer; // delta = 0: any selection outside the support
    double tpr_median = 0.0;
    double tpr_d10 = 0.0;
    double tpr_d90 = 0.0;
    int n_seeds = 0;
};

Summary summarize(const std::vector<RunOutcome>& outcomes);

// One row of the summary CSV; schema:
// scenario_id,method,C,B,gamma,alpha,delta,n_seeds,delta_fwer,ci_lo,ci_hi,
// tpr_median,tpr_d10,tpr_d90,wall_time_s
struct SummaryRow {
    std::string scenario_id;
    std::string method;
    int C = 0;
    int B = 0;
    double gamma = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    int n_seeds = 0;
    double delta_fwer = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double tpr_median = 0.0;
    double tpr_d10 = 0.0;
    double tpr_d90 = 0.0;
    double wall_time_s = 0.0;
    std::string error; // nonempty when the row failed

    std::string to_csv() const;
    static std::string csv_header();
};

} // namespace cludl
