#pragma once

#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "sparch/diagnostics.hpp"
#include "sparch/estimate.hpp"
#include "sparch/simulate.hpp"

namespace sparch::report {

/// Every FitResult field at full precision. NaN and infinities become null.
nlohmann::json fit_to_json(const FitResult& fit, std::string_view call);

/// Human-readable summary: call, standardized-residual quantiles, coefficient
/// table with significance codes, information criteria and Moran tests,
/// numbers at 6 significant digits.
std::string summary(const FitResult& fit, std::string_view call);

/// "***" below 0.001, "**" below 0.01, "*" below 0.05, "." below 0.1, else "".
std::string significance_stars(double p);

/// printf "%.<digits>g".
std::string format_sig(double v, int digits = 6);

nlohmann::json moran_to_json(const MoranTest& t);

std::string moran_scatter_csv(const MoranScatter& s);
std::string qq_csv(const QqData& q);
std::string trace_csv(const std::vector<TraceStep>& trace);
std::string field_csv(const SimulatedField& field);

std::string scatter_svg(const MoranScatter& s, std::string_view title, std::string_view x_label,
                        std::string_view y_label);
std::string qq_svg(const QqData& q, std::string_view title);

}  // namespace sparch::report
