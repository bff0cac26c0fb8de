#include "evcs/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace evcs::nn {

GradCheckReport grad_check(const ParamRefs& params, const std::function<double()>& loss, double h,
                           double tolerance) {
    GradCheckReport report;
    report.tolerance = tolerance;
    for (Parameter* p : params) {
        for (std::size_t k = 0; k < p->value.size(); ++k) {
            const double saved = p->value.data[k];
            p->value.data[k] = saved + h;
            const double up = loss();
            p->value.data[k] = saved - h;
            const double down = loss();
            p->value.data[k] = saved;

            const double numeric = (up - down) / (2.0 * h);
            const double analytic = p->grad.data[k];
            const double abs_err = std::abs(analytic - numeric);
            const double rel = abs_err / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            ++report.checked;
            report.max_abs_error = std::max(report.max_abs_error, abs_err);
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_parameter = p->name;
                report.worst_index = k;
            }
        }
    }
    return report;
}

}  // namespace evcs::nn
