#include "ellikernel/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ellikernel {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDiagnosticTol = 1e-9;
constexpr double kAuditTol = 1e-8;
constexpr double kChainTol = 1e-6;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line += ',';
    line += csv_field(f);
    first = false;
  }
  return line + "\r\n";
}

std::string num(double v) { return format_number(v); }

AronsonFit fit_from_json(const json& a) {
  AronsonFit fit;
  fit.a = a.at("a").get<double>();
  fit.b = a.at("b").get<double>();
  fit.a_prime = a.at("a_prime").get<double>();
  fit.b_prime = a.at("b_prime").get<double>();
  fit.s_cap = a.at("s_cap").get<double>();
  return fit;
}

// ---------------------------------------------------------------------------
// SVG

struct Frame {
  double x0 = 70, y0 = 20, w = 520, h = 320;
  double xmin, xmax, ymin, ymax;
  bool logy;

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const {
    const double v = logy ? std::log10(y) : y;
    return y0 + h - (v - ymin) / (ymax - ymin) * h;
  }
};

std::string svg_open(const std::string& title) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n"
    << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
    << "<text x=\"330\" y=\"14\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
    << "</text>\n";
  return o.str();
}

std::string svg_axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream o;
  o << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w << "\" height=\"" << f.h
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.xmin + (f.xmax - f.xmin) * i / 4.0;
    const double yv = f.ymin + (f.ymax - f.ymin) * i / 4.0;
    const double xp = f.x0 + f.w * i / 4.0;
    const double yp = f.y0 + f.h - f.h * i / 4.0;
    char xl[32], yl[32];
    std::snprintf(xl, sizeof xl, "%.3g", xv);
    if (f.logy)
      std::snprintf(yl, sizeof yl, "1e%.1f", yv);
    else
      std::snprintf(yl, sizeof yl, "%.3g", yv);
    o << "<text x=\"" << xp << "\" y=\"" << f.y0 + f.h + 14 << "\" font-size=\"10\" text-anchor=\"middle\">" << xl
      << "</text>\n";
    o << "<text x=\"" << f.x0 - 4 << "\" y=\"" << yp + 3 << "\" font-size=\"10\" text-anchor=\"end\">" << yl
      << "</text>\n";
  }
  o << "<text x=\"" << f.x0 + f.w / 2 << "\" y=\"" << f.y0 + f.h + 32 << "\" font-size=\"11\" text-anchor=\"middle\">"
    << xlabel << "</text>\n";
  o << "<text x=\"14\" y=\"" << f.y0 + f.h / 2 << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << f.y0 + f.h / 2 << ")\">" << ylabel << "</text>\n";
  return o.str();
}

std::string svg_polyline(const std::vector<std::pair<double, double>>& pts, const char* color, const char* id) {
  std::ostringstream o;
  o << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : pts) o << x << ',' << y << ' ';
  o << "\"/>\n";
  return o.str();
}

std::string envelope_svg(const json& doc) {
  const auto& prof = doc.at("kernel").at("profile");
  const auto ts = prof.at("t").get<std::vector<double>>();
  const auto ss = prof.at("s").get<std::vector<double>>();
  const auto vs = prof.at("t_pow_K").get<std::vector<double>>();
  const AronsonFit fit = fit_from_json(doc.at("aronson"));
  const double floor = doc.at("aronson").at("positivity_floor").get<double>();

  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i] > floor && vs[i] > fit.upper_env(ss[i]))
      throw std::runtime_error("envelope re-check failed: profile point above the upper envelope at t=" + num(ts[i]) +
                               ", s=" + num(ss[i]));
    if (ss[i] <= fit.s_cap && vs[i] < fit.lower_env(ss[i]))
      throw std::runtime_error("envelope re-check failed: profile point below the lower envelope at t=" + num(ts[i]) +
                               ", s=" + num(ss[i]));
  }

  double smax = 0.0, vmax = 0.0, vmin = 1.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i] <= floor) continue;
    smax = std::max(smax, ss[i]);
    vmax = std::max(vmax, vs[i]);
    vmin = std::min(vmin, vs[i]);
  }
  smax = std::max(smax, 1.0);
  vmax = std::max({vmax, fit.a, 1e-12});
  const double ymax = std::ceil(std::log10(vmax));
  const double ymin = std::max(std::floor(std::log10(std::max(vmin, 1e-14))), ymax - 14.0);
  const Frame f{70, 20, 520, 320, 0.0, smax, ymin, ymax, true};
  const double ylo = std::pow(10.0, ymin);

  std::ostringstream o;
  o << svg_open("kernel profile t^{d/2} K vs s = |x-y|^2/t with fitted envelopes");
  o << svg_axes(f, "s", "t^{d/2} K");
  o << "<g id=\"points\" fill=\"#1f77b4\" fill-opacity=\"0.5\">\n";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i] <= floor || vs[i] < ylo) continue;
    o << "<circle cx=\"" << f.px(ss[i]) << "\" cy=\"" << f.py(vs[i]) << "\" r=\"1.5\"/>\n";
  }
  o << "</g>\n";
  std::vector<std::pair<double, double>> up, lo;
  for (int k = 0; k <= 200; ++k) {
    const double s = smax * k / 200.0;
    if (fit.upper_env(s) >= ylo) up.emplace_back(f.px(s), f.py(fit.upper_env(s)));
    if (fit.a_prime > 0.0 && s <= fit.s_cap && fit.lower_env(s) >= ylo) lo.emplace_back(f.px(s), f.py(fit.lower_env(s)));
  }
  o << svg_polyline(up, "#d62728", "upper_envelope");
  if (!lo.empty()) o << svg_polyline(lo, "#2ca02c", "lower_envelope");
  o << "</svg>\n";
  return o.str();
}

std::string mu_svg(const json& doc) {
  std::vector<std::pair<std::string, double>> bars;
  bars.emplace_back("mu_pointwise", doc.at("field").at("mu_pointwise").get<double>());
  if (doc.contains("garding")) bars.emplace_back("garding mu", doc.at("garding").at("mu").get<double>());
  if (doc.contains("cks")) bars.emplace_back("mu_cks", doc.at("cks").at("mu_cks").get<double>());
  double top = 0.0;
  for (const auto& b : bars) top = std::max(top, b.second);
  if (top <= 0.0) top = 1.0;
  const Frame f{70, 20, 520, 320, 0.0, static_cast<double>(bars.size()), 0.0, top * 1.1, false};
  std::ostringstream o;
  o << svg_open("ellipticity constants");
  o << svg_axes(f, "", "mu");
  const double slot = f.w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x = f.x0 + slot * (static_cast<double>(i) + 0.2);
    const double y = f.py(bars[i].second);
    o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << slot * 0.6 << "\" height=\"" << f.y0 + f.h - y
      << "\" fill=\"#4c72b0\"/>\n";
    o << "<text x=\"" << x + slot * 0.3 << "\" y=\"" << y - 4 << "\" font-size=\"10\" text-anchor=\"middle\">"
      << bars[i].first << " = " << num(bars[i].second) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string viscosity_svg(const json& doc) {
  const auto& v = doc.at("viscosity");
  const auto deltas = v.at("deltas").get<std::vector<double>>();
  const auto bounds = v.at("delta_bounds").get<std::vector<double>>();
  double hi = 1e-300, lo = 1e300;
  for (double d : deltas) {
    if (d > 0) hi = std::max(hi, d), lo = std::min(lo, d);
  }
  for (double d : bounds) {
    if (d > 0) hi = std::max(hi, d), lo = std::min(lo, d);
  }
  if (lo > hi) lo = hi = 1.0;
  const double ymax = std::ceil(std::log10(hi));
  const double ymin = std::min(std::floor(std::log10(lo)), ymax - 1.0);
  const double xmax = std::max<double>(1.0, static_cast<double>(deltas.size()) - 1.0);
  const Frame f{70, 20, 520, 320, 0.0, xmax, ymin, ymax, true};
  std::ostringstream o;
  o << svg_open("viscosity: resolvent differences delta_j and their bounds");
  o << svg_axes(f, "j", "delta_j");
  std::vector<std::pair<double, double>> pd, pb;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    if (deltas[j] > 0) pd.emplace_back(f.px(static_cast<double>(j)), f.py(deltas[j]));
    if (j < bounds.size() && bounds[j] > 0) pb.emplace_back(f.px(static_cast<double>(j)), f.py(bounds[j]));
  }
  o << svg_polyline(pd, "#1f77b4", "deltas");
  o << svg_polyline(pb, "#7f7f7f", "bounds");
  o << "</svg>\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// CSV

std::string profile_csv(const json& doc) {
  const auto& prof = doc.at("kernel").at("profile");
  const auto ts = prof.at("t").get<std::vector<double>>();
  const auto ss = prof.at("s").get<std::vector<double>>();
  const auto vs = prof.at("t_pow_K").get<std::vector<double>>();
  std::string out = csv_row({"t", "s", "t_pow_K"});
  for (std::size_t i = 0; i < ts.size(); ++i) out += csv_row({num(ts[i]), num(ss[i]), num(vs[i])});
  return out;
}

std::string envelope_csv(const json& doc) {
  const auto& prof = doc.at("kernel").at("profile");
  const auto ts = prof.at("t").get<std::vector<double>>();
  const auto ss = prof.at("s").get<std::vector<double>>();
  const auto vs = prof.at("t_pow_K").get<std::vector<double>>();
  const AronsonFit fit = fit_from_json(doc.at("aronson"));
  std::string out = csv_row({"t", "s", "t_pow_K", "upper_env", "lower_env"});
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out += csv_row({num(ts[i]), num(ss[i]), num(vs[i]), num(fit.upper_env(ss[i])), num(fit.lower_env(ss[i]))});
  }
  return out;
}

std::string viscosity_csv(const json& doc) {
  const auto& v = doc.at("viscosity");
  const auto eps = v.at("eps").get<std::vector<double>>();
  const auto deltas = v.at("deltas").get<std::vector<double>>();
  const auto bounds = v.at("delta_bounds").get<std::vector<double>>();
  std::string out = csv_row({"j", "eps", "eps_next", "delta", "delta_bound"});
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    out += csv_row({std::to_string(j), num(eps[j]), num(eps[j + 1]), num(deltas[j]), num(bounds[j])});
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Formats parse_formats(const std::string& list) {
  Formats f{false, false, false};
  std::stringstream in(list);
  std::string item;
  bool any = false;
  while (std::getline(in, item, ',')) {
    if (item == "json")
      f.json = true;
    else if (item == "csv")
      f.csv = true;
    else if (item == "svg")
      f.svg = true;
    else
      throw std::invalid_argument("unknown format '" + item + "' (expected json, csv or svg)");
    any = true;
  }
  if (!any) throw std::invalid_argument("no output format given");
  return f;
}

json report_to_json(const Report& r) {
  json doc;
  doc["schema"] = kReportSchema;
  doc["scenario"] = scenario_to_json(r.scenario);
  doc["field"] = {
      {"family", family_name(r.scenario.family)},
      {"tag", r.field_tag},
      {"mu_pointwise", r.eig_range.mu_pointwise},
      {"Lambda_pointwise", r.eig_range.Lambda_pointwise},
      {"norm", r.field_norm},
      {"laplacian_norm_bound", r.laplacian_norm},
  };
  json stats = json::object();

  if (r.garding) {
    const auto& g = *r.garding;
    doc["garding"] = {
        {"mu", g.mu},
        {"nu", g.nu},
        {"method", g.method},
        {"residual", g.residual},
        {"rel_tol", 1e-8},
        {"subspace", "mean-zero"},
    };
    stats["garding_iterations"] = g.iterations;
  }
  if (r.viscosity) {
    const auto& v = *r.viscosity;
    doc["viscosity"] = {
        {"eps", v.eps},
        {"deltas", v.deltas},
        {"delta_bounds", v.delta_bounds},
        {"psi_norm", v.psi_norm},
        {"converged", v.converged},
        {"convergence_tol", 1e-8},
        {"limit_gap", v.limit_gap},
        {"limit_gap_bound", v.limit_gap_bound},
        {"consistent", v.consistent},
        {"resolvent_rel_tol", 1e-10},
    };
    stats["viscosity_cg_iterations"] = v.solver_iterations;
  }
  if (!r.times.empty()) {
    json diag = {{"t", json::array()}, {"symmetry_defect", json::array()}, {"min_entry", json::array()},
                 {"mass_defect", json::array()}};
    bool all_ok = true;
    for (const auto& k : r.kernel_diagnostics) {
      diag["t"].push_back(k.t);
      diag["symmetry_defect"].push_back(k.symmetry_defect);
      diag["min_entry"].push_back(k.min_entry);
      diag["mass_defect"].push_back(k.mass_defect);
      all_ok = all_ok && k.symmetry_defect <= kDiagnosticTol && k.min_entry >= -kDiagnosticTol &&
               k.mass_defect <= kDiagnosticTol;
    }
    json prof = {{"source", 0}, {"t", json::array()}, {"s", json::array()}, {"t_pow_K", json::array()}};
    for (const auto& p : r.profile) {
      prof["t"].push_back(p.t);
      prof["s"].push_back(p.s);
      prof["t_pow_K"].push_back(p.value);
    }
    doc["kernel"] = {
        {"path", r.kernel_path},
        {"semigroup_tol", 1e-9},
        {"times", r.times},
        {"diagnostics", diag},
        {"diagnostic_tol", kDiagnosticTol},
        {"diagnostics_ok", all_ok},
        {"profile", prof},
    };
    stats["kernel_path"] = r.kernel_path;
    stats["kernel_slices"] = r.times.size();
  }
  if (r.lower_bound) {
    const auto& lb = *r.lower_bound;
    json viol = json::array();
    for (const auto& v : lb.violations) viol.push_back({{"t", v.t}, {"x", v.x}, {"y", v.y}, {"value", v.value}});
    doc["lower_bound"] = {
        {"a", lb.a},         {"r", lb.r},           {"threshold", lb.threshold}, {"verdict", lb.verdict},
        {"probes", lb.probes}, {"violations", viol},
    };
  }
  if (r.aronson) {
    const auto& a = *r.aronson;
    const AronsonOptions o;
    doc["aronson"] = {
        {"a", a.a},
        {"b", a.b},
        {"a_prime", a.a_prime},
        {"b_prime", a.b_prime},
        {"s_cap", a.s_cap},
        {"b_grid", {{"min", o.b_min}, {"max", o.b_max}, {"points", o.b_points}, {"ratio", a.b_grid_ratio}}},
        {"positivity_floor", o.positivity_floor},
        {"upper_points", a.upper_points},
        {"lower_points", a.lower_points},
        {"inside_fraction", a.inside_fraction},
        {"lower_vanishes", a.lower_vanishes},
    };
  }
  if (r.cks) {
    const auto& c = *r.cks;
    json audit = {{"t", json::array()}, {"phi", json::array()}, {"value", json::array()}, {"form", json::array()},
                  {"ok", json::array()}};
    std::size_t violations = 0;
    for (const auto& e : c.difference_form_values) {
      audit["t"].push_back(e.t);
      audit["phi"].push_back(e.phi_index);
      audit["value"].push_back(e.value);
      audit["form"].push_back(e.form);
      audit["ok"].push_back(e.ok);
      violations += e.ok ? 0 : 1;
    }
    doc["cks"] = {
        {"mu_cks", c.mu_cks},
        {"r", c.r},
        {"d", c.d},
        {"plateau_fraction", c.plateau_fraction},
        {"I_rho", c.I_rho},
        {"audit", audit},
        {"audit_tol", kAuditTol},
        {"audit_violations", violations},
    };
  }
  if (r.verdicts) {
    const auto& v = *r.verdicts;
    doc["verdicts"] = {
        {"V1_strongly_elliptic", v.strongly_elliptic},
        {"V2_local_lower_bound", v.local_lower_bound},
        {"V3_aronson_lower", v.aronson_lower},
        {"consistent", v.consistent},
        {"mu_pointwise", v.mu_pointwise},
        {"garding_mu", v.garding_mu},
        {"a", v.a},
        {"a_prime", v.a_prime},
        {"mu_cks", v.mu_cks},
        {"cks_chain_ok", v.cks_chain_ok},
        {"cks_chain_tol", kChainTol},
        {"thresholds", {{"mu", v.thresholds.mu}, {"a", v.thresholds.a}, {"a_prime", v.thresholds.a_prime}}},
    };
  }
  doc["solver_stats"] = stats;
  doc["timing"] = r.timing;
  return doc;
}

json without_timing(json doc) {
  doc.erase("timing");
  return doc;
}

std::vector<fs::path> emit_document(const json& doc, const fs::path& out_dir, const Formats& formats) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  if (!doc.contains("schema") || doc.at("schema") != kReportSchema)
    throw std::runtime_error("not an " + std::string(kReportSchema) + " report document");
  const std::string name = doc.at("scenario").at("name").get<std::string>();

  std::vector<fs::path> written;
  auto emit = [&](const std::string& suffix, const std::string& content) {
    const fs::path p = out_dir / (name + suffix);
    write_file(p, content);
    written.push_back(p);
  };
  // Render everything before writing so a failed re-check leaves no partial output.
  std::vector<std::pair<std::string, std::string>> files;
  if (formats.json) files.emplace_back(".json", doc.dump(2) + "\n");
  const bool has_profile = doc.contains("kernel");
  const bool has_fit = has_profile && doc.contains("aronson");
  const bool has_visc = doc.contains("viscosity");
  if (formats.csv) {
    if (has_profile) files.emplace_back("_profile.csv", profile_csv(doc));
    if (has_fit) files.emplace_back("_envelope.csv", envelope_csv(doc));
    if (has_visc) files.emplace_back("_viscosity.csv", viscosity_csv(doc));
  }
  if (formats.svg) {
    if (has_fit) files.emplace_back("_envelope.svg", envelope_svg(doc));
    files.emplace_back("_mu.svg", mu_svg(doc));
    if (has_visc) files.emplace_back("_viscosity.svg", viscosity_svg(doc));
  }
  for (const auto& [suffix, content] : files) emit(suffix, content);
  return written;
}

std::vector<fs::path> emit_report(const Report& report, const fs::path& out_dir, const Formats& formats) {
  return emit_document(report_to_json(report), out_dir, formats);
}

}  // namespace ellikernel
