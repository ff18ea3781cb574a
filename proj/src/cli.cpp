#include "catch919/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "catch919/control.hpp"
#include "catch919/error.hpp"
#include "catch919/grasps.hpp"
#include "catch919/linkage.hpp"
#include "catch919/run_io.hpp"
#include "catch919/server.hpp"
#include "json_util.hpp"

namespace catch919 {
namespace {

using detail::Json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Output {
 public:
  Output(std::string path, std::ostream& fallback) : path_(std::move(path)), fallback_(fallback) {}
  void write(const std::string& text) const {
    if (path_.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw SchemaError(path_, "cannot write file");
    f << text;
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

struct Globals {
  std::string model_path;
  bool custom_hand = false;
  std::uint64_t seed = 919;
  double eps_deg = kDefaultEpsDeg;
  std::string out;
};

ModelPtr load(const Globals& g) {
  std::string path = g.model_path;
  if (path.empty()) {
    if (const char* env = std::getenv("CATCH_MODEL")) path = env;
  }
  if (path.empty()) return default_model_ptr();
  LoadOptions o;
  o.enforce_reference_hand = !g.custom_hand;
  return std::make_shared<const HandModel>(load_model_file(path, o));
}

// Pose document: {"Joint.Name": deg, ...}; absent joints sit at rest. Values
// must lie inside the joint ranges.
Pose read_pose(const HandModel& m, const std::string& path) {
  const Json j = detail::parse_json(read_file(path), path);
  if (!j.is_object()) throw SchemaError(path, "pose must be an object of joint angles");
  Pose q = m.rest_pose();
  for (const auto& [name, v] : j.items()) {
    auto slot = slot_from_name(name);
    if (!slot) throw ReferenceError(path + ": nonexistent joint '" + name + "'");
    if (!v.is_number()) throw SchemaError(path + "." + name, "must be a number");
    const double deg = v.get<double>();
    const JointSpec& spec = m.joint(*slot);
    if (!(deg >= spec.min_deg && deg <= spec.max_deg)) {
      bool reference = false;
      for (const ReferenceRange& r : reference_ranges()) reference = reference || r.slot == *slot;
      throw InvariantError(path + "." + name, std::to_string(deg) + " deg violates the " +
                                                  std::string(reference ? "reference bound" : "joint range") + " [" +
                                                  std::to_string(spec.min_deg) + ", " + std::to_string(spec.max_deg) + "]");
    }
    q[*slot] = deg;
  }
  return clamp_pose(m, q);
}

Json activation_json(const ActivationSet& a) {
  Json j;
  j["BL"] = std::string(to_string(a.bl));
  j["OL"] = std::string(to_string(a.ol));
  j["SP"] = std::string(to_string(a.sp));
  j["PL"] = std::string(to_string(a.pl));
  return j;
}

Json map_json(const CalibrationMap& map) {
  Json cables = Json::array();
  for (const CablePolynomial& p : map.cables) {
    Json o;
    o["cable"] = std::string(to_string(p.cable));
    Json slots = Json::array();
    for (Slot s : p.slots) slots.push_back(joint_name(s));
    o["joints"] = std::move(slots);
    o["center_deg"] = p.center_deg;
    o["half_range_deg"] = p.half_range_deg;
    o["exponents"] = p.exponents;
    o["coefficients"] = p.coefficients;
    cables.push_back(std::move(o));
  }
  Json j;
  j["degree"] = map.degree;
  j["fit_rms_mm"] = map.fit_rms_mm;
  j["sample_count"] = map.sample_count;
  j["holdout_count"] = map.holdout_count;
  j["cables"] = std::move(cables);
  return j;
}

CouplingCurve read_curve(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path, "empty curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "pip_deg,dip_deg") throw SchemaError(path + ":1", "header must be 'pip_deg,dip_deg'");
  CouplingCurve curve;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw SchemaError(path + ":" + std::to_string(n), "expected two columns");
    try {
      std::size_t used = 0;
      const double pip = std::stod(line.substr(0, comma), &used);
      const double dip = std::stod(line.substr(comma + 1));
      curve.push_back({pip, dip});
    } catch (const std::logic_error&) {
      throw SchemaError(path + ":" + std::to_string(n), "not a number");
    }
  }
  if (curve.size() < 3) throw SchemaError(path, "need at least 3 samples");
  return curve;
}

int exit_for(const Error& e) { return dynamic_cast<const SolverError*>(&e) ? kExitNoConvergence : kExitInvalid; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for a tendon-driven anthropomorphic hand", "catch919"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--model", g.model_path, "Hand Description File (fallback: $CATCH_MODEL, then the built-in hand)");
  app.add_flag("--custom-hand", g.custom_hand, "Skip the reference-hand checks when loading --model");
  app.add_option("--seed", g.seed, "Seed for every stochastic step");
  app.add_option("--eps-deg", g.eps_deg, "Flexion threshold for posture classes")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output file (default: standard output)");

  auto* model_cmd = app.add_subcommand("model", "Inspect the hand description");
  model_cmd->require_subcommand(1);
  auto* model_dump = model_cmd->add_subcommand("dump", "Print the hand description as JSON");
  auto* model_check = model_cmd->add_subcommand("validate", "Load and validate the hand description");

  auto* sim = app.add_subcommand("simulate", "Run a command script through the equilibrium solver");
  std::string script_path, svg_path;
  sim->add_option("--script", script_path, "Command script CSV (step,target,value)")->required();
  sim->add_option("--svg", svg_path, "Also write a silhouette strip");

  auto* posture = app.add_subcommand("posture", "Posture classes and control tables");
  posture->require_subcommand(1);
  auto* classify = posture->add_subcommand("classify", "Classify a pose JSON");
  std::string pose_path;
  bool forced = false;
  classify->add_option("--q", pose_path, "Pose JSON {joint: deg}")->required();
  classify->add_flag("--forced", forced, "External force on the index fingertip");
  auto* table = posture->add_subcommand("table", "Print the control strategy table");

  auto* cal = app.add_subcommand("calibrate", "Fit cable length against joint angles");
  std::size_t samples = 500;
  double noise = 0.0;
  int degree = 1;
  cal->add_option("--samples", samples, "Random poses drawn")->check(CLI::PositiveNumber);
  cal->add_option("--noise-sd", noise, "Length noise (mm)")->check(CLI::NonNegativeNumber);
  cal->add_option("--degree", degree, "Polynomial degree")->check(CLI::Range(1, 4));

  auto* grasp = app.add_subcommand("grasp", "Grasp taxonomy presets");
  grasp->require_subcommand(1);
  std::string catalog_path;
  grasp->add_option("--catalog", catalog_path, "Preset catalog JSON (default: built-in)");
  auto* glist = grasp->add_subcommand("list", "List presets");
  auto* gcheck = grasp->add_subcommand("check", "Check one preset");
  int preset_id = 0;
  gcheck->add_option("id", preset_id, "Taxonomy id")->required();
  auto* grun = grasp->add_subcommand("run-all", "Check every preset");
  std::string report_path;
  grun->add_option("--report", report_path, "Write the report JSON here");
  auto* gexport = grasp->add_subcommand("export", "Print the built-in catalog as JSON");

  auto* link = app.add_subcommand("linkage", "Four-bar linkage tools");
  link->require_subcommand(1);
  auto* synth = link->add_subcommand("synth", "Fit linkage dims to a DIP(PIP) curve");
  std::string curve_path;
  int restarts = 4;
  synth->add_option("--curve", curve_path, "CSV with header pip_deg,dip_deg")->required();
  synth->add_option("--restarts", restarts, "Seeded restarts around the initial dims")->check(CLI::NonNegativeNumber);
  auto* curve_cmd = link->add_subcommand("curve", "Print a finger's coupling curve as CSV");
  std::string finger_name = "Index";
  std::size_t curve_n = 91;
  curve_cmd->add_option("--finger", finger_name, "Finger with a linkage");
  curve_cmd->add_option("--samples", curve_n, "Samples over the PIP range")->check(CLI::Range(2, 100000));

  auto* serve = app.add_subcommand("serve", "Serve the simulation over WebSocket");
  unsigned short port = 7919;
  serve->add_option("--port", port, "TCP port");

  auto* plot = app.add_subcommand("plot", "Render a run CSV or dump the Jacobian");
  std::string run_path;
  std::string jac_pose;
  plot->add_option("--run", run_path, "Run CSV from simulate");
  plot->add_option("--jacobian", jac_pose, "Pose JSON; print the excursion Jacobian as CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitInvalid;
  }

  const Output output(g.out, out);
  try {
    if (model_cmd->parsed()) {
      const ModelPtr m = load(g);
      if (model_dump->parsed()) output.write(serialize(*m));
      if (model_check->parsed()) output.write("ok: " + std::to_string(dof_count(*m)) + " DOF\n");
      return kExitOk;
    }
    if (sim->parsed()) {
      const ModelPtr m = load(g);
      const auto rows = simulate(m, parse_script(read_file(script_path)));
      output.write(run_csv(rows));
      if (!svg_path.empty()) Output(svg_path, out).write(plot_svg(*m, rows));
      for (const RunRow& r : rows) {
        if (!r.converged) {
          err << "error: equilibrium did not converge at step " << r.step << "\n";
          return kExitNoConvergence;
        }
      }
      return kExitOk;
    }
    if (posture->parsed()) {
      if (table->parsed()) {
        std::ostringstream t;
        t << "class,BL,OL,SP,PL,description\n";
        for (PostureClass c : kAllPostureClasses) {
          const ActivationSet a = activation_for(c);
          t << to_string(c) << ',' << to_string(a.bl) << ',' << to_string(a.ol) << ',' << to_string(a.sp) << ','
            << to_string(a.pl) << ",\"" << describe(c) << "\"\n";
        }
        output.write(t.str());
        return kExitOk;
      }
      const ModelPtr m = load(g);
      const Pose q = read_pose(*m, pose_path);
      const PostureClass c = classify_posture(q, forced, g.eps_deg);
      Json j;
      j["class"] = std::string(to_string(c));
      j["description"] = std::string(describe(c));
      j["activations"] = activation_json(activation_for(c));
      output.write(j.dump(2) + "\n");
      return kExitOk;
    }
    if (cal->parsed()) {
      const ModelPtr m = load(g);
      const CalibrationMap map = calibrate(*m, random_grid(*m, samples, g.seed), noise, g.seed, degree);
      output.write(map_json(map).dump(2) + "\n");
      return kExitOk;
    }
    if (grasp->parsed()) {
      const std::vector<GraspPreset> presets = catalog_path.empty() ? load_catalog() : load_catalog_file(catalog_path);
      if (gexport->parsed()) {
        output.write(catalog_json(presets));
        return kExitOk;
      }
      if (glist->parsed()) {
        std::ostringstream t;
        t << "id,name,thumb_stage_hint,force_closure_pair\n";
        for (const GraspPreset& p : presets) {
          t << p.taxonomy_id << ',' << p.name << ',' << to_string(p.thumb_stage_hint) << ',';
          if (p.force_closure_pair) {
            t << to_string(p.force_closure_pair->first) << '+' << to_string(p.force_closure_pair->second);
          }
          t << '\n';
        }
        output.write(t.str());
        return kExitOk;
      }
      const ModelPtr m = load(g);
      if (gcheck->parsed()) {
        auto it = std::find_if(presets.begin(), presets.end(), [&](const auto& p) { return p.taxonomy_id == preset_id; });
        if (it == presets.end()) throw ReferenceError("no preset with taxonomy id " + std::to_string(preset_id));
        CatalogReport r;
        r.rows.push_back(check_feasible(m, *it));
        output.write(report_json(r));
        return r.rows.front().realizable ? kExitOk : kExitInvalid;
      }
      const CatalogReport r = run_catalog(m, presets);
      const std::string doc = report_json(r);
      if (!report_path.empty()) Output(report_path, out).write(doc);
      std::ostringstream summary;
      summary << "realizable " << r.realizable_count() << "/" << r.rows.size() << "\n";
      for (const PresetCheck& row : r.rows) {
        if (!row.realizable) summary << "  " << row.taxonomy_id << " " << row.name << ": " << row.note << "\n";
      }
      output.write(summary.str());
      return kExitOk;
    }
    if (link->parsed()) {
      const ModelPtr m = load(g);
      if (curve_cmd->parsed()) {
        auto f = finger_from_string(finger_name);
        if (!f || m->linkage(*f) == nullptr) throw ReferenceError("finger '" + finger_name + "' has no linkage");
        const Slot pip = *slot_from_name(finger_name + ".PIP.FlexExt");
        const JointSpec& j = m->joint(pip);
        std::ostringstream t;
        t << "pip_deg,dip_deg\n";
        for (const CouplingSample& s : coupling_curve(*m->linkage(*f), j.min_deg, j.max_deg, curve_n)) {
          t << format_double(s.pip_deg) << ',' << format_double(s.dip_deg) << '\n';
        }
        output.write(t.str());
        return kExitOk;
      }
      const CouplingCurve target = read_curve(curve_path);
      const FourBarDims start = *m->linkage(Finger::Index);
      const SynthesisBounds bounds;
      SynthesisResult best = synthesize(target, start, bounds);
      std::mt19937_64 rng(g.seed);
      std::uniform_real_distribution<double> jitter(0.9, 1.1);
      for (int r = 0; r < restarts; ++r) {
        FourBarDims d = start;
        d.input_mm *= jitter(rng);
        d.coupler_mm *= jitter(rng);
        d.output_mm *= jitter(rng);
        d.input_mount_deg *= jitter(rng);
        if (coupling_rms(d, target) == std::numeric_limits<double>::infinity()) continue;
        const SynthesisResult res = synthesize(target, d, bounds);
        if (res.rms_deg < best.rms_deg) best = res;
      }
      output.write(dims_fragment(best.dims));
      err << "rms " << format_double(best.rms_deg) << " deg, grashof " << to_string(grashof_class(best.dims)) << "\n";
      return kExitOk;
    }
    if (serve->parsed()) {
      const ModelPtr m = load(g);
      ServerOptions o;
      o.port = port;
      Server server(std::make_shared<SimSession>(m), o);
      err << "serving on ws://127.0.0.1:" << server.port() << "\n";
      server.run();
      return kExitOk;
    }
    if (plot->parsed()) {
      const ModelPtr m = load(g);
      if (!jac_pose.empty()) {
        output.write(jacobian_csv(*m, read_pose(*m, jac_pose)));
        return kExitOk;
      }
      if (run_path.empty()) throw SchemaError("plot", "need --run or --jacobian");
      output.write(plot_svg(*m, parse_run_csv(read_file(run_path))));
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace catch919
