#include "gravistat/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace gravistat {

namespace {

using nlohmann::json;

constexpr const char* kCsvHeader =
    "rho0,mass,m,sup_density,lambda,entropy,potential,free_energy";

std::string short_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

double parse_number(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw PreconditionError("CSV: not a number: '" + text + "'");
  return v;
}

std::string_view convention_name(PotentialConvention c) {
  return c == PotentialConvention::Definition ? "definition" : "four_pi";
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string samples_to_csv(const std::vector<BranchSample>& samples) {
  std::string out = kCsvHeader;
  out += "\r\n";
  for (const auto& s : samples) {
    bool first = true;
    for (double v : {s.rho0, s.mass, s.m, s.sup_density, s.lambda, s.entropy, s.potential,
                     s.free_energy}) {
      if (!first) out += ',';
      out += format_number(v);
      first = false;
    }
    out += "\r\n";
  }
  return out;
}

std::string branch_to_csv(const Branch& branch) { return samples_to_csv(branch.samples); }

std::vector<BranchSample> parse_branch_csv(std::string_view text) {
  std::vector<BranchSample> samples;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw PreconditionError("CSV: unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw PreconditionError("CSV: expected 8 columns");
    samples.push_back({parse_number(f[0]), parse_number(f[1]), parse_number(f[2]),
                       parse_number(f[3]), parse_number(f[4]), parse_number(f[5]),
                       parse_number(f[6]), parse_number(f[7])});
  }
  if (!header_seen) throw PreconditionError("CSV: missing header");
  return samples;
}

json to_json(const ModelSpec& model) {
  json j = {{"statistics", std::string(to_string(model.kind))}, {"eta", model.eta}};
  if (model.kind == Statistics::FD) j["mu"] = model.mu;
  return j;
}

json to_json(const IntegratorConfig& cfg) {
  return {{"eps_cut", cfg.eps_cut},
          {"abs_tol", cfg.abs_tol},
          {"rel_tol", cfg.rel_tol},
          {"max_steps", cfg.max_steps},
          {"dense_samples", cfg.dense_samples}};
}

json to_json(const Branch& branch) {
  json samples = json::array();
  for (const auto& s : branch.samples) {
    samples.push_back({{"rho0", s.rho0},
                       {"mass", s.mass},
                       {"m", s.m},
                       {"sup_density", s.sup_density},
                       {"lambda", s.lambda},
                       {"entropy", s.entropy},
                       {"potential", s.potential},
                       {"free_energy", s.free_energy}});
  }
  json failures = json::array();
  for (const auto& f : branch.failures) failures.push_back({{"rho0", f.rho0}, {"message", f.message}});
  return {{"model", to_json(branch.model)},
          {"config", to_json(branch.cfg)},
          {"potential_convention", std::string(convention_name(branch.convention))},
          {"samples", samples},
          {"failures", failures}};
}

ModelSpec model_from_json(const json& j) {
  return make_model(parse_statistics(j.at("statistics").get<std::string>()),
                    j.at("eta").get<double>());
}

Branch branch_from_json(const json& j) {
  Branch b;
  b.model = model_from_json(j.at("model"));
  const json& c = j.at("config");
  b.cfg.eps_cut = c.at("eps_cut").get<double>();
  b.cfg.abs_tol = c.at("abs_tol").get<double>();
  b.cfg.rel_tol = c.at("rel_tol").get<double>();
  b.cfg.max_steps = c.at("max_steps").get<long>();
  b.cfg.dense_samples = c.at("dense_samples").get<int>();
  b.convention = j.at("potential_convention").get<std::string>() == "four_pi"
                     ? PotentialConvention::FourPi
                     : PotentialConvention::Definition;
  for (const auto& s : j.at("samples")) {
    b.samples.push_back({s.at("rho0").get<double>(), s.at("mass").get<double>(),
                         s.at("m").get<double>(), s.at("sup_density").get<double>(),
                         s.at("lambda").get<double>(), s.at("entropy").get<double>(),
                         s.at("potential").get<double>(), s.at("free_energy").get<double>()});
  }
  for (const auto& f : j.at("failures"))
    b.failures.push_back({f.at("rho0").get<double>(), f.at("message").get<std::string>()});
  return b;
}

json to_json(const TurningPointSet& set) {
  auto seq = [](const std::vector<TurningPoint>& v) {
    json arr = json::array();
    for (const auto& tp : v) {
      arr.push_back({{"n", tp.n},
                     {"mass", tp.mass},
                     {"m", tp.mass / (4.0 * M_PI)},
                     {"rho0", tp.rho0},
                     {"rho0_bracket", {tp.rho0_lo, tp.rho0_hi}}});
    }
    return arr;
  };
  return {{"lower", seq(set.lower)}, {"upper", seq(set.upper)}, {"ordered", set.ordered()}};
}

json to_json(const CheckReport& r) {
  json j = {{"name", r.name},
            {"passed", r.passed},
            {"location", r.location},
            {"tolerance", r.tolerance},
            {"inconclusive", r.inconclusive}};
  // NaN (inconclusive) has no JSON representation.
  j["worst_margin"] = std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr);
  return j;
}

json to_json(const EnergyReport& r) {
  return {{"entropy", r.entropy}, {"potential", r.potential}, {"free_energy", r.free_energy}};
}

json to_json(const SolutionCount& c) {
  json unresolved = json::array();
  for (const auto& [lo, hi] : c.unresolved) unresolved.push_back({lo, hi});
  return {{"count", c.count},
          {"roots", c.roots},
          {"lower_bound", c.lower_bound},
          {"unresolved", unresolved}};
}

json to_json(const std::vector<MatrixEntry>& matrix) {
  json entries = json::array();
  bool all = true;
  for (const auto& e : matrix) {
    json reports = json::array();
    bool ok = e.error.empty();
    for (const auto& r : e.reports) {
      reports.push_back(to_json(r));
      ok = ok && r.passed;
    }
    all = all && ok;
    json entry = {{"model", to_json(e.model)}, {"rho0", e.rho0}, {"passed", ok}, {"checks", reports}};
    if (!e.error.empty()) entry["error"] = e.error;
    entries.push_back(std::move(entry));
  }
  return {{"passed", all}, {"entries", entries}};
}

std::string emit_diagram(const std::vector<Branch>& branches, const DiagramStyle& style) {
  if (branches.empty()) throw PreconditionError("emit_diagram needs at least one branch");
  for (const auto& b : branches)
    if (b.samples.empty()) throw PreconditionError("emit_diagram: empty branch");

  auto point = [&](const BranchSample& s) -> std::pair<double, double> {
    switch (style.kind) {
      case DiagramKind::Bifurcation:
        return {std::log1p(s.m), std::log1p(s.sup_density)};
      case DiagramKind::Entropy:
      case DiagramKind::Potential:
      case DiagramKind::FreeEnergy: {
        const double v = style.kind == DiagramKind::Entropy     ? s.entropy
                         : style.kind == DiagramKind::Potential ? s.potential
                                                                : s.free_energy;
        return {std::log1p(s.mass), style.log100 ? std::log(100.0 + v) : v};
      }
    }
    return {0.0, 0.0};
  };

  std::vector<std::vector<std::pair<double, double>>> curves;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& b : branches) {
    auto& c = curves.emplace_back();
    for (const auto& s : b.samples) {
      const auto [x, y] = point(s);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      c.emplace_back(x, y);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) throw PreconditionError("emit_diagram: no finite points to draw");
  const bool bifurcation = style.kind == DiagramKind::Bifurcation;
  const double focus = std::log1p(2.0);
  if (bifurcation) {
    xmin = std::min(xmin, focus);
    xmax = std::max(xmax, focus);
  }
  if (xmax - xmin <= 0.0) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin <= 0.0) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = style.width - left - right, ph = style.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.width
      << "\" height=\"" << style.height << "\" viewBox=\"0 0 " << style.width << ' '
      << style.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
      << "\" fill=\"white\"/>\n";
  if (!style.title.empty())
    svg << "<text x=\"" << style.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(style.title) << "</text>\n";

  // Axes and ticks.
  svg << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\"/>\n</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 5.0;
    const double yv = ymin + (ymax - ymin) * k / 5.0;
    svg << "<line x1=\"" << short_number(px(xv)) << "\" y1=\"" << top + ph << "\" x2=\""
        << short_number(px(xv)) << "\" y2=\"" << top + ph + 4 << "\" stroke=\"black\"/>"
        << "<text x=\"" << short_number(px(xv)) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << short_number(xv) << "</text>\n";
    svg << "<line x1=\"" << left - 4 << "\" y1=\"" << short_number(py(yv)) << "\" x2=\"" << left
        << "\" y2=\"" << short_number(py(yv)) << "\" stroke=\"black\"/>"
        << "<text x=\"" << left - 6 << "\" y=\"" << short_number(py(yv) + 3)
        << "\" text-anchor=\"end\">" << short_number(yv) << "</text>\n";
  }
  svg << "</g>\n";

  std::string xlabel = bifurcation ? "log(1+m)" : "log(1+M)";
  std::string ylabel;
  switch (style.kind) {
    case DiagramKind::Bifurcation: ylabel = "log(1+||rho||_inf)"; break;
    case DiagramKind::Entropy: ylabel = style.log100 ? "log(100+S)" : "S"; break;
    case DiagramKind::Potential: ylabel = style.log100 ? "log(100+P)" : "P"; break;
    case DiagramKind::FreeEnergy: ylabel = style.log100 ? "log(100+F)" : "F"; break;
  }
  svg << "<text x=\"" << short_number(left + pw / 2) << "\" y=\"" << style.height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
      << "</text>\n"
      << "<text x=\"16\" y=\"" << short_number(top + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << short_number(top + ph / 2) << ")\">" << ylabel
      << "</text>\n";

  if (bifurcation) {
    svg << "<line x1=\"" << short_number(px(focus)) << "\" y1=\"" << top << "\" x2=\""
        << short_number(px(focus)) << "\" y2=\"" << top + ph
        << "\" stroke=\"#999999\" stroke-width=\"0.5\" stroke-dasharray=\"2,3\"/>\n";
  }

  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& c = curves[i];
    const bool limit = branches[i].model.eta == 0.0;
    const std::string color = limit ? "black" : palette[i % 10];
    if (c.empty()) continue;
    if (c.size() == 1) {
      svg << "<circle cx=\"" << short_number(px(c[0].first)) << "\" cy=\""
          << short_number(py(c[0].second)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      continue;
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << (limit ? "2" : "1") << '"';
    if (limit) svg << " stroke-dasharray=\"6,4\"";
    svg << " points=\"";
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) svg << ' ';
      svg << short_number(px(c[k].first)) << ',' << short_number(py(c[k].second));
    }
    svg << "\"/>\n";
  }

  // Legend.
  svg << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const bool limit = branches[i].model.eta == 0.0;
    const double ly = top + 12.0 * static_cast<double>(i) + 6;
    const double lx = left + pw - 110;
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly
        << "\" stroke=\"" << (limit ? "black" : palette[i % 10]) << "\""
        << (limit ? " stroke-dasharray=\"6,4\"" : "") << "/>"
        << "<text x=\"" << lx + 24 << "\" y=\"" << ly + 3 << "\">"
        << to_string(branches[i].model.kind) << " eta=" << short_number(branches[i].model.eta)
        << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace gravistat
