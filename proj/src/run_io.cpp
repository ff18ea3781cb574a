#include "catch919/run_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "catch919/tendon.hpp"

namespace catch919 {
namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string cell(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(std::move(cell));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view l = text.substr(start, nl - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) out.push_back(l);
    start = nl + 1;
  }
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw SchemaError(where, "not a number: '" + s + "'");
  return v;
}

long long parse_integer(const std::string& s, const std::string& where) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw SchemaError(where, "not an integer: '" + s + "'");
  return v;
}

Command command_for(const std::string& target, double value, const std::string& where) {
  if (auto c = cable_from_string(target)) return SetCable{*c, value};
  if (auto s = slot_from_name(target)) return SetDirectJoint{*s, value};
  if (target.rfind("force.", 0) == 0) {
    auto f = finger_from_string(target.substr(6));
    if (!f) throw ReferenceError(where + ": unknown finger in '" + target + "'");
    return SetForce{*f, value};
  }
  if (target == "resistance") return SetResistance{value != 0.0};
  if (target == "preset") return LoadPreset{static_cast<int>(value)};
  if (target == "reset") return Reset{};
  throw ReferenceError(where + ": unknown target '" + target + "'");
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<ScriptStep> parse_script(std::string_view csv) {
  const auto ls = lines(csv);
  if (ls.empty() || split(ls[0]) != std::vector<std::string>{"step", "target", "value"}) {
    throw SchemaError("script:1", "header must be 'step,target,value'");
  }
  std::vector<ScriptStep> out;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const std::string where = "script:" + std::to_string(i + 1);
    const auto cells = split(ls[i]);
    if (cells.size() != 3) throw SchemaError(where, "expected 3 columns");
    const long long step = parse_integer(cells[0], where);
    const Command c = command_for(cells[1], parse_number(cells[2], where), where);
    if (!out.empty() && step < out.back().step) throw SchemaError(where, "steps must not decrease");
    if (out.empty() || out.back().step != step) out.push_back({step, {}});
    out.back().commands.push_back(c);
  }
  return out;
}

std::vector<RunRow> simulate(const ModelPtr& model, const std::vector<ScriptStep>& script) {
  SimSession session(model);
  std::vector<RunRow> rows;
  for (const ScriptStep& st : script) {
    for (const Command& c : st.commands) {
      const ApplyResult r = session.apply({std::nullopt, c});
      if (!r.ack.accepted) throw ControlError("step " + std::to_string(st.step) + ": " + r.ack.reason);
    }
    const SessionState s = session.snapshot();
    rows.push_back({st.step, s.q, s.tensions_n, s.energy, s.posture_class, s.converged});
  }
  return rows;
}

std::vector<std::string> run_csv_header() {
  std::vector<std::string> h{"step"};
  for (std::size_t i = 0; i < kJointSlots; ++i) h.push_back(joint_name(static_cast<Slot>(i)));
  for (CableId c : kAllCables) h.push_back("tension." + std::string(to_string(c)));
  h.push_back("energy");
  h.push_back("posture_class");
  return h;
}

std::string run_csv(const std::vector<RunRow>& rows) {
  std::ostringstream out;
  const auto header = run_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const RunRow& r : rows) {
    out << r.step;
    for (std::size_t i = 0; i < kJointSlots; ++i) out << ',' << format_double(r.q.at(i));
    for (double t : r.tensions_n) out << ',' << format_double(t);
    out << ',' << format_double(r.energy) << ',' << to_string(r.posture_class) << '\n';
  }
  return out.str();
}

std::vector<RunRow> parse_run_csv(std::string_view csv) {
  const auto ls = lines(csv);
  const auto header = run_csv_header();
  if (ls.empty() || split(ls[0]) != header) throw SchemaError("run:1", "unexpected header");
  std::vector<RunRow> rows;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const std::string where = "run:" + std::to_string(i + 1);
    const auto cells = split(ls[i]);
    if (cells.size() != header.size()) throw SchemaError(where, "expected " + std::to_string(header.size()) + " columns");
    RunRow r;
    r.step = parse_integer(cells[0], where);
    std::size_t k = 1;
    for (std::size_t j = 0; j < kJointSlots; ++j) r.q.at(j) = parse_number(cells[k++], where);
    for (double& t : r.tensions_n) t = parse_number(cells[k++], where);
    r.energy = parse_number(cells[k++], where);
    auto pc = posture_from_string(cells[k]);
    if (!pc) throw SchemaError(where, "unknown posture class '" + cells[k] + "'");
    r.posture_class = *pc;
    rows.push_back(r);
  }
  return rows;
}

std::string plot_svg(const HandModel& model, const std::vector<RunRow>& rows) {
  constexpr double kFrame = 170.0;
  constexpr double kHeight = 220.0;
  const double width = std::max<double>(1, static_cast<double>(rows.size())) * kFrame + 20.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width) << "\" height=\""
      << format_double(kHeight * 2) << "\" viewBox=\"0 0 " << format_double(width) << ' ' << format_double(kHeight * 2)
      << "\">\n";
  svg << "<style>.bone{fill:none;stroke:#333;stroke-width:3;stroke-linejoin:round}"
         ".pin{fill:#c33}.trace{fill:none;stroke:#36c;stroke-width:1.5}text{font:12px sans-serif}</style>\n";

  std::ostringstream trace;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RunRow& r = rows[i];
    const std::vector<Point2> chain = finger_chain(model, Finger::Index, r.q);
    const double ox = 20.0 + static_cast<double>(i) * kFrame;
    svg << "<g class=\"frame\" data-step=\"" << r.step << "\" data-class=\"" << to_string(r.posture_class)
        << "\" transform=\"translate(" << format_double(ox) << " 40) scale(1 -1) translate(0 -40)\">\n";
    svg << "<polyline class=\"bone\" points=\"";
    for (std::size_t k = 0; k < chain.size(); ++k) {
      svg << (k ? " " : "") << format_double(chain[k].x) << ',' << format_double(chain[k].y);
    }
    svg << "\"/>\n";
    for (const Point2& p : chain) {
      svg << "<circle class=\"pin\" cx=\"" << format_double(p.x) << "\" cy=\"" << format_double(p.y) << "\" r=\"2\"/>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << format_double(ox) << "\" y=\"" << format_double(kHeight - 10) << "\">step " << r.step
        << " class " << to_string(r.posture_class) << "</text>\n";
    const Point2 tip = chain.back();
    trace << (i ? " " : "") << format_double(tip.x) << ',' << format_double(tip.y);
  }
  svg << "<g class=\"trace-panel\" transform=\"translate(40 " << format_double(kHeight + 40)
      << ") scale(1 -1) translate(0 -40)\">\n";
  svg << "<polyline class=\"trace\" points=\"" << trace.str() << "\"/>\n</g>\n";
  svg << "<text x=\"40\" y=\"" << format_double(kHeight * 2 - 10) << "\">fingertip trace (mm)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string jacobian_csv(const HandModel& model, const Pose& q) {
  const ExcursionJacobian j = jacobian(model, q);
  std::ostringstream out;
  out << "cable";
  for (std::size_t i = 0; i < kJointSlots; ++i) out << ',' << joint_name(static_cast<Slot>(i));
  out << '\n';
  for (CableId c : kAllCables) {
    out << to_string(c);
    for (std::size_t i = 0; i < kJointSlots; ++i) out << ',' << format_double(j.rows[idx(c)][i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace catch919
