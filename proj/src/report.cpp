#include "sparch/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sparch/io.hpp"

namespace sparch::report {
namespace {

using nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string format_p(double p) {
  if (!std::isfinite(p)) return "NA";
  if (p < 2.2e-16) return "< 2.2e-16";
  return format_sig(p, 4);
}

std::string cell(double v) { return std::isfinite(v) ? format_sig(v) : "NA"; }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double kSize = 400.0;
  static constexpr double kMargin = 50.0;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kSize - 2 * kMargin); }
  double py(double y) const { return kSize - kMargin - (y - y0) / (y1 - y0) * (kSize - 2 * kMargin); }
};

Frame frame_for(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  auto range = [](const Eigen::VectorXd& v, double& lo, double& hi) {
    lo = v.size() ? v.minCoeff() : 0.0;
    hi = v.size() ? v.maxCoeff() : 1.0;
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  };
  Frame f{};
  range(x, f.x0, f.x1);
  range(y, f.y0, f.y1);
  return f;
}

std::string svg_plot(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double intercept,
                     double slope, std::string_view title, std::string_view x_label,
                     std::string_view y_label) {
  const Frame f = frame_for(x, y);
  std::ostringstream s;
  char buf[160];
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  s << "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
  s << "<rect x=\"50\" y=\"50\" width=\"300\" height=\"300\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"200\" y=\"30\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  s << "<text x=\"200\" y=\"385\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(x_label) << "</text>\n";
  s << "<text x=\"15\" y=\"200\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 200)\">"
    << xml_escape(y_label) << "</text>\n";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"none\" stroke=\"black\"/>\n",
                  f.px(x[i]), f.py(y[i]));
    s << buf;
  }
  const double ya = intercept + slope * f.x0;
  const double yb = intercept + slope * f.x1;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"red\"/>\n", f.px(f.x0),
                f.py(ya), f.px(f.x1), f.py(yb));
  s << "<clipPath id=\"c\"><rect x=\"50\" y=\"50\" width=\"300\" height=\"300\"/></clipPath>\n";
  s << "<g clip-path=\"url(#c)\">" << buf << "</g>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace

std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string significance_stars(double p) {
  if (!std::isfinite(p)) return "";
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

json moran_to_json(const MoranTest& t) {
  return json{{"statistic", num(t.statistic)},     {"null_mean", num(t.null_mean)},
              {"null_variance", num(t.null_variance)}, {"z_score", num(t.z_score)},
              {"p_value", num(t.p_value)},         {"alternative", std::string(alternative_name(t.alternative))}};
}

json fit_to_json(const FitResult& fit, std::string_view call) {
  json coefs = json::array();
  for (const auto& c : fit.coefficients) {
    coefs.push_back({{"name", c.name},
                     {"estimate", num(c.estimate)},
                     {"std_error", num(c.std_error)},
                     {"t_value", num(c.t_value)},
                     {"p_value", num(c.p_value)},
                     {"at_bound", c.at_bound}});
  }
  json cov = json::array();
  for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
    cov.push_back(vec(fit.covariance.row(i).transpose()));
  }
  json trace = json::array();
  for (const auto& t : fit.trace) trace.push_back({{"formula", t.formula}, {"bic", num(t.bic)}, {"action", t.action}});

  json notes = fit.notes;
  for (const auto& c : fit.coefficients) {
    if (c.at_bound && c.name == "rho") {
      notes.push_back("rho is on its lower bound: the fit nests the model without spatial ARCH dependence (rho = 0)");
    }
  }

  const auto& cr = fit.convergence;
  return json{
      {"call", std::string(call)},
      {"family", std::string(family_name(fit.family))},
      {"formula", fit.formula},
      {"sar", fit.sar},
      {"n", fit.n},
      {"k", fit.k},
      {"loglik", num(fit.loglik)},
      {"aic", num(fit.aic)},
      {"bic", num(fit.bic)},
      {"parameters",
       {{"alpha", num(fit.params.alpha)},
        {"rho", num(fit.params.rho)},
        {"b", num(fit.params.b)},
        {"lambda", num(fit.params.lambda)},
        {"beta", vec(fit.params.beta)}}},
      {"coefficients", coefs},
      {"covariance", {{"labels", fit.covariance_labels}, {"matrix", cov}}},
      {"convergence",
       {{"converged", cr.converged},
        {"iterations", cr.iterations},
        {"evaluations", cr.evaluations},
        {"starts", cr.starts},
        {"gradient_norm", num(cr.gradient_norm)},
        {"method", cr.method},
        {"hessian_ok", cr.hessian_ok},
        {"start_logliks", vec(Eigen::Map<const Eigen::VectorXd>(cr.start_logliks.data(),
                                                                 static_cast<Eigen::Index>(cr.start_logliks.size())))},
        {"at_bound", cr.at_bound}}},
      {"moran_residuals", moran_to_json(fit.moran_residuals)},
      {"moran_squared_residuals", moran_to_json(fit.moran_squared)},
      {"fitted", vec(fit.fitted)},
      {"residuals", vec(fit.residuals)},
      {"standardized_residuals", vec(fit.standardized_residuals)},
      {"h", vec(fit.h)},
      {"trace", trace},
      {"notes", notes},
  };
}

std::string summary(const FitResult& fit, std::string_view call) {
  std::ostringstream s;
  s << " Call:\n" << call << "\n\n";

  Eigen::VectorXd sorted = fit.standardized_residuals;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const double stats[6] = {sorted.size() ? sorted[0] : NAN,
                           sorted.size() ? sample_quantile(sorted, 0.25) : NAN,
                           sorted.size() ? sample_quantile(sorted, 0.5) : NAN,
                           sorted.size() ? sorted.mean() : NAN,
                           sorted.size() ? sample_quantile(sorted, 0.75) : NAN,
                           sorted.size() ? sorted[sorted.size() - 1] : NAN};
  const char* labels[6] = {"Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max."};
  std::size_t width = 8;
  for (double v : stats) width = std::max(width, cell(v).size() + 1);
  s << " Residuals:\n";
  for (const char* l : labels) s << pad_left(l, width + 1);
  s << "\n";
  for (double v : stats) s << pad_left(cell(v), width + 1);
  s << "\n\n";

  s << " Coefficients:\n";
  std::size_t name_w = 0;
  for (const auto& c : fit.coefficients) name_w = std::max(name_w, c.name.size());
  std::vector<std::array<std::string, 5>> rows;
  for (const auto& c : fit.coefficients) {
    rows.push_back({cell(c.estimate), cell(c.std_error), cell(c.t_value), format_p(c.p_value),
                    significance_stars(c.p_value)});
  }
  const char* heads[4] = {"Estimate", "Std. Error", "t value", "Pr(>|t|)"};
  std::size_t col_w[4];
  for (int k = 0; k < 4; ++k) {
    col_w[k] = std::string(heads[k]).size();
    for (const auto& r : rows) col_w[k] = std::max(col_w[k], r[static_cast<std::size_t>(k)].size());
  }
  s << pad_right("", name_w);
  for (int k = 0; k < 4; ++k) s << ' ' << pad_left(heads[k], col_w[k]);
  s << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s << pad_right(fit.coefficients[i].name, name_w);
    for (int k = 0; k < 4; ++k) s << ' ' << pad_left(rows[i][static_cast<std::size_t>(k)], col_w[k]);
    if (!rows[i][4].empty()) s << ' ' << rows[i][4];
    if (fit.coefficients[i].at_bound) s << " (at bound)";
    s << "\n";
  }
  s << "---\nSignif. codes:  0 *** 0.001 ** 0.01 * 0.05 . 0.1   1\n\n";

  s << " AIC: " << format_sig(fit.aic) << ", BIC: " << format_sig(fit.bic)
    << " (Log-Likelihood: " << format_sig(fit.loglik) << ")\n\n";
  s << " Moran's I (residuals): " << format_sig(fit.moran_residuals.statistic)
    << ", p-value: " << format_sig(fit.moran_residuals.p_value) << "\n\n";
  s << " Moran's I (squared residuals): " << format_sig(fit.moran_squared.statistic)
    << ", p-value: " << format_sig(fit.moran_squared.p_value) << "\n";
  for (const auto& c : fit.coefficients) {
    if (c.at_bound && c.name == "rho") {
      s << "\n Note: rho is on its lower bound; the fit nests the model without spatial ARCH "
           "dependence.\n";
    }
  }
  return s.str();
}

std::string moran_scatter_csv(const MoranScatter& m) {
  std::ostringstream s;
  s << "value,lag\n";
  for (Eigen::Index i = 0; i < m.value.size(); ++i) {
    s << io::format_double(m.value[i]) << ',' << io::format_double(m.lag[i]) << '\n';
  }
  return s.str();
}

std::string qq_csv(const QqData& q) {
  std::ostringstream s;
  s << "theoretical,sample\n";
  for (Eigen::Index i = 0; i < q.sample.size(); ++i) {
    s << io::format_double(q.theoretical[i]) << ',' << io::format_double(q.sample[i]) << '\n';
  }
  return s.str();
}

std::string trace_csv(const std::vector<TraceStep>& trace) {
  std::ostringstream s;
  s << "step,action,formula,bic\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    s << i << ',' << trace[i].action << ",\"" << trace[i].formula << "\"," << io::format_double(trace[i].bic) << '\n';
  }
  return s.str();
}

std::string field_csv(const SimulatedField& field) {
  std::ostringstream s;
  s << "index,y_re,y_im,eps,h\n";
  for (Eigen::Index i = 0; i < field.y.size(); ++i) {
    s << (i + 1) << ',' << io::format_double(field.y[i]) << ','
      << io::format_double(field.y_imag.size() ? field.y_imag[i] : 0.0) << ','
      << io::format_double(field.eps[i]) << ',' << io::format_double(field.h[i]) << '\n';
  }
  return s.str();
}

std::string scatter_svg(const MoranScatter& m, std::string_view title, std::string_view x_label,
                        std::string_view y_label) {
  return svg_plot(m.value, m.lag, m.intercept, m.slope, title, x_label, y_label);
}

std::string qq_svg(const QqData& q, std::string_view title) {
  return svg_plot(q.theoretical, q.sample, q.line_intercept, q.line_slope, title,
                  "Theoretical Quantiles", "Standardized Residuals");
}

}  // namespace sparch::report
