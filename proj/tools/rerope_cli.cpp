// rerope: analysis CLI over the positional-operator library. Every command
// writes '#'-commented, deterministically formatted files; see README.md for
// the format and exit-code contract.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rerope/attention_lab.hpp"
#include "rerope/camera.hpp"
#include "rerope/random.hpp"
#include "rerope/rerope.hpp"
#include "rerope/rope.hpp"
#include "rerope/trajectory_metrics.hpp"
#include "rerope/video_rope.hpp"

namespace fs = std::filesystem;
using namespace rerope;

namespace {

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// File plumbing. All writes go through write-then-rename so a crashed run
// never leaves a truncated output behind.
// ---------------------------------------------------------------------------

struct OutputWriter {
  fs::path dir;

  fs::path resolve(const std::string& name) const {
    const fs::path p(name);
    return p.is_absolute() ? p : dir / p;
  }

  void write(const std::string& name, const std::string& content) const {
    const fs::path target = resolve(name);
    if (target.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(target.parent_path(), ec);
      if (ec && !fs::is_directory(target.parent_path()))
        throw IoError("cannot create output directory '" +
                      target.parent_path().string() + "': " + ec.message());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out)
        throw IoError("cannot open '" + tmp.string() + "' for writing");
      out << content;
      out.flush();
      if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      std::error_code ignore;
      fs::remove(tmp, ignore);
      throw IoError("cannot move '" + tmp.string() + "' to '" +
                    target.string() + "': " + ec.message());
    }
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return out.str();
}

Trajectory load_trajectory(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_trajectory(text);
  } catch (const ParseError& e) {
    throw ParseError(path + " line " + std::to_string(e.line()) + ": " +
                         e.what(),
                     e.line());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const OrderingError& e) {
    throw OrderingError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Family / form names shared by the invariance and demo commands.
// ---------------------------------------------------------------------------

OperatorFamily parse_family(const std::string& name) {
  if (name == "rope3d") return OperatorFamily::rope3d;
  if (name == "masked_rope") return OperatorFamily::masked_rope;
  if (name == "rerope") return OperatorFamily::rerope;
  if (name == "full_temporal") return OperatorFamily::full_temporal;
  if (name == "double_rope") return OperatorFamily::double_rope;
  throw ConfigError("unknown operator family '" + name + "'");
}

RelativeForm parse_form(const std::string& name) {
  if (name == "c_from_t") return RelativeForm::c_from_t;
  if (name == "t_from_c") return RelativeForm::t_from_c;
  throw ConfigError("unknown relative form '" + name + "'");
}

// ---------------------------------------------------------------------------
// heatmap
// ---------------------------------------------------------------------------

struct HeatmapArgs {
  std::size_t frames = 50;
  double theta = 1e4;
  std::size_t dim = 32;
  std::string output = "heatmap.csv";
  std::string image;  // optional portable graymap
};

int run_heatmap(const HeatmapArgs& a, const OutputWriter& writer) {
  const auto schedule = make_frequency_schedule(a.theta, a.dim);
  const Matrix table = toy_heatmap(a.frames, schedule);

  std::string csv;
  csv += "# rerope heatmap\n";
  csv += "# T=" + std::to_string(a.frames) + " theta=" + g9(a.theta) +
         " dim=" + std::to_string(a.dim) + " output=" + a.output +
         " image=" + (a.image.empty() ? "-" : a.image) + "\n";
  csv += "# cell[delta][f] = <Phi(delta) 1, 1> restricted to plane f "
         "= 2 cos(delta * omega_f)\n";
  csv += "delta";
  for (std::size_t f = 0; f < table.cols(); ++f)
    csv += ",plane_" + std::to_string(f);
  csv += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    csv += std::to_string(r);
    for (std::size_t c = 0; c < table.cols(); ++c) csv += ',' + g9(table(r, c));
    csv += '\n';
  }
  writer.write(a.output, csv);

  if (!a.image.empty()) {
    std::string pgm = "P2\n";
    pgm += std::to_string(table.cols()) + " " + std::to_string(table.rows()) +
           "\n255\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
      for (std::size_t c = 0; c < table.cols(); ++c) {
        const double unit = std::clamp((table(r, c) + 2.0) / 4.0, 0.0, 1.0);
        if (c) pgm += ' ';
        pgm += std::to_string(static_cast<int>(std::lround(unit * 255.0)));
      }
      pgm += '\n';
    }
    writer.write(a.image, pgm);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// redundancy
// ---------------------------------------------------------------------------

struct RedundancyArgs {
  std::size_t frames = 101;
  double theta = 1e4;
  std::size_t dim = 32;
  std::string output = "redundancy.csv";
};

int run_redundancy(const RedundancyArgs& a, const OutputWriter& writer) {
  const auto schedule = make_frequency_schedule(a.theta, a.dim);
  const auto rows = band_redundancy_report(a.frames, schedule);

  std::string csv;
  csv += "# rerope redundancy\n";
  csv += "# T=" + std::to_string(a.frames) + " theta=" + g9(a.theta) +
         " dim=" + std::to_string(a.dim) + " output=" + a.output + "\n";
  csv += "plane,omega,accumulated_phase,logit_deviation\n";
  for (const auto& row : rows) {
    csv += std::to_string(row.plane) + ',' + g9(row.omega) + ',' +
           g9(row.accumulated_phase) + ',' + g9(row.logit_deviation) + '\n';
  }
  writer.write(a.output, csv);
  return 0;
}

// ---------------------------------------------------------------------------
// invariance
// ---------------------------------------------------------------------------

struct InvarianceArgs {
  std::string suite;
  std::string family;  // empty = per-suite default
  std::string form = "c_from_t";
  std::size_t trials = 100;
  std::uint64_t seed = 42;
  bool negative_control = false;
  std::string output = "invariance.txt";
};

int run_invariance(const InvarianceArgs& a, const OutputWriter& writer) {
  LabConfig config;
  config.form = parse_form(a.form);

  InvarianceReport report;
  std::string family = a.family;
  if (a.suite == "shift") {
    if (family.empty()) family = "rope3d";
    report = verify_shift_invariance(parse_family(family), config, a.trials,
                                     a.seed, a.negative_control);
  } else if (a.suite == "world") {
    if (family.empty()) family = "rerope";
    report = verify_world_transform_invariance(parse_family(family), config,
                                               a.trials, a.seed,
                                               a.negative_control);
  } else if (a.suite == "reduction" || a.suite == "ablation") {
    if (a.negative_control)
      throw ConfigError("suite '" + a.suite + "' has no negative control");
    if (!family.empty())
      throw ConfigError("suite '" + a.suite + "' does not take a family");
    family = "-";
    report = a.suite == "reduction"
                 ? verify_reduction_identity(config, a.trials, a.seed)
                 : verify_ablation_structure(config, a.trials, a.seed);
  } else {
    throw ConfigError("unknown invariance suite '" + a.suite + "'");
  }

  std::string text;
  text += "# rerope invariance\n";
  text += "# suite=" + a.suite + " family=" + family + " form=" + a.form +
          " trials=" + std::to_string(a.trials) +
          " seed=" + std::to_string(a.seed) +
          " negative_control=" + (a.negative_control ? "1" : "0") +
          " output=" + a.output + "\n";
  text += "name " + report.name + "\n";
  text += "trials " + std::to_string(report.trials) + "\n";
  text += "max_abs_deviation " + g9(report.max_abs_deviation) + "\n";
  text += "tolerance " + g9(report.tolerance) + "\n";
  text += std::string("result ") + (report.passed ? "PASS" : "FAIL") + "\n";
  writer.write(a.output, text);

  std::cout << (report.passed ? "PASS" : "FAIL")
            << " max_dev=" << g9(report.max_abs_deviation)
            << " tol=" << g9(report.tolerance) << "\n";
  return report.passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// traj normalize / joint-normalize / metrics
// ---------------------------------------------------------------------------

struct TrajNormalizeArgs {
  std::string input;
  std::string output = "normalized.txt";
};

int run_traj_normalize(const TrajNormalizeArgs& a, const OutputWriter& writer) {
  const Trajectory traj = load_trajectory(a.input);
  const NormalizationResult res = normalize_translations(traj);
  if (res.degenerate)
    std::cerr << "warning: all translations are zero; trajectory left "
                 "unchanged\n";

  const std::vector<std::string> comments{
      "rerope traj normalize",
      "input=" + a.input + " output=" + a.output + " scale=" + g9(res.scale) +
          " degenerate=" + (res.degenerate ? std::string("1") : std::string("0"))};
  writer.write(a.output, serialize_trajectory(res.trajectory, comments));
  std::cout << "scale=" << g9(res.scale) << "\n";
  return 0;
}

struct TrajJointArgs {
  std::string source;
  std::string target;
  double epsilon = 1e-8;
  std::string source_output = "source_normalized.txt";
  std::string target_output = "target_normalized.txt";
};

int run_traj_joint(const TrajJointArgs& a, const OutputWriter& writer) {
  const Trajectory src = pre_normalize(load_trajectory(a.source));
  const Trajectory tgt = pre_normalize(load_trajectory(a.target));
  const JointNormalizationResult joint = joint_normalize(src, tgt, a.epsilon);

  const std::string echo = "source=" + a.source + " target=" + a.target +
                           " epsilon=" + g9(a.epsilon) + " S=" + g9(joint.scale);
  writer.write(a.source_output,
               serialize_trajectory(joint.source,
                                    {"rerope traj joint-normalize", echo}));
  writer.write(a.target_output,
               serialize_trajectory(joint.target,
                                    {"rerope traj joint-normalize", echo}));
  std::cout << "S=" << g9(joint.scale) << "\n";
  return 0;
}

struct TrajMetricsArgs {
  std::string estimate;
  std::string reference;
  bool with_scale = false;
  std::size_t stride = 1;
  std::string output = "metrics.txt";
};

int run_traj_metrics(const TrajMetricsArgs& a, const OutputWriter& writer) {
  const Trajectory est = load_trajectory(a.estimate);
  const Trajectory ref = load_trajectory(a.reference);
  const AlignedPair pair = align(est, ref, a.with_scale);
  const MetricResult m = compute_metrics(pair, a.stride);

  const std::string line =
      "RRE_deg=" + (m.rre_deg ? g9(*m.rre_deg) : std::string("n/a")) +
      " RTE=" + (m.rte ? g9(*m.rte) : std::string("n/a")) +
      " ATE=" + g9(m.ate);

  std::string text;
  text += "# rerope traj metrics\n";
  text += "# estimate=" + a.estimate + " reference=" + a.reference +
          " with_scale=" + (a.with_scale ? "1" : "0") +
          " stride=" + std::to_string(a.stride) + " output=" + a.output + "\n";
  text += "# alignment scale=" + g9(pair.alignment().scale) + "\n";
  text += line + "\n";
  writer.write(a.output, text);

  std::cout << line << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// demo
// ---------------------------------------------------------------------------

struct DemoArgs {
  std::string task = "v2v";
  long long frames = 2;
  std::size_t total_dim = 96;
  std::string family = "rerope";
  std::string form = "c_from_t";
  std::string cameras;
  std::uint64_t seed = 42;
  std::string output = "demo.csv";
};

int run_demo(const DemoArgs& a, const OutputWriter& writer) {
  const Trajectory raw = load_trajectory(a.cameras);
  const std::size_t slots = a.task == "v2v"
                                ? 2 * static_cast<std::size_t>(a.frames)
                                : static_cast<std::size_t>(a.frames);
  if (raw.size() != slots)
    throw ValidationError("camera file '" + a.cameras + "' has " +
                          std::to_string(raw.size()) + " poses but the " +
                          a.task + " grid needs " + std::to_string(slots));

  // Express every pose relative to the conditioning frame (the first pose in
  // the file), then bring translations to unit scale.
  std::vector<std::string> scale_comments;
  std::vector<TrajectoryEntry> prepared;
  if (a.task == "v2v") {
    const Trajectory rel = relative_to_first(raw);
    std::vector<TrajectoryEntry> src_e(
        rel.entries().begin(),
        rel.entries().begin() + static_cast<std::ptrdiff_t>(a.frames));
    std::vector<TrajectoryEntry> tgt_e(
        rel.entries().begin() + static_cast<std::ptrdiff_t>(a.frames),
        rel.entries().end());
    // Timestamps restart per half when splitting; reuse source stamps so the
    // target half still forms a valid trajectory.
    for (std::size_t i = 0; i < tgt_e.size(); ++i)
      tgt_e[i].timestamp = src_e[i].timestamp;
    const JointNormalizationResult joint =
        joint_normalize(pre_normalize(Trajectory(src_e)),
                        pre_normalize(Trajectory(tgt_e)));
    prepared = joint.source.entries();
    prepared.insert(prepared.end(), joint.target.entries().begin(),
                    joint.target.entries().end());
    scale_comments.push_back("# joint scale S=" + g9(joint.scale) + "\n");
  } else {
    const NormalizationResult res =
        normalize_translations(relative_to_first(raw));
    prepared = res.trajectory.entries();
    scale_comments.push_back("# translation scale=" + g9(res.scale) + "\n");
  }

  LabConfig config;
  config.layout = ReRoPELayout::standard(a.total_dim);
  config.form = parse_form(a.form);

  std::vector<LiftedProjection> cameras;
  for (const auto& e : prepared)
    cameras.push_back(lift_projection(
        Intrinsics::identity(), Pose{e.rotation.to_mat3(), e.translation}));

  Rng rng(a.seed);
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < slots; ++i) {
    Token t{GridCoord{static_cast<long long>(i), 0, 0}, i, {}, {}};
    t.q.resize(config.head_dim());
    t.k.resize(config.head_dim());
    for (double& x : t.q) x = rng.uniform(-1.0, 1.0);
    for (double& x : t.k) x = rng.uniform(-1.0, 1.0);
    tokens.push_back(std::move(t));
  }

  const Matrix table = pairwise_logits(
      TokenSet(std::move(tokens), config.head_dim(), std::move(cameras)),
      parse_family(a.family), config);

  std::string csv;
  csv += "# rerope demo\n";
  csv += "# task=" + a.task + " T=" + std::to_string(a.frames) +
         " total_dim=" + std::to_string(a.total_dim) + " family=" + a.family +
         " form=" + a.form + " seed=" + std::to_string(a.seed) +
         " cameras=" + a.cameras + " output=" + a.output + "\n";
  for (const std::string& c : scale_comments) csv += c;
  if (a.task == "v2v") {
    csv += "# slots 0.." + std::to_string(a.frames - 1) +
           ": source frames; slots " + std::to_string(a.frames) + ".." +
           std::to_string(2 * a.frames - 1) + ": target frames\n";
  } else {
    csv += "# slot 0: anchor frame; slots 1.." + std::to_string(a.frames - 1) +
           ": generated frames\n";
  }
  csv += "# slot i sits at temporal index i with camera i; cell[i][j] = "
         "<op_q(i) q_i, op_k(j) k_j>\n";
  csv += "slot";
  for (std::size_t j = 0; j < slots; ++j) csv += ',' + std::to_string(j);
  csv += '\n';
  for (std::size_t i = 0; i < slots; ++i) {
    csv += std::to_string(i);
    for (std::size_t j = 0; j < slots; ++j) csv += ',' + g9(table(i, j));
    csv += '\n';
  }
  writer.write(a.output, csv);
  return 0;
}

// Flat key=value configuration: `--config FILE` anywhere on the command line
// expands into `--key=value` tokens placed right after the subcommand, so
// explicit flags that follow the subcommand override file values.
std::vector<std::string> expand_config(std::vector<std::string> tokens) {
  std::string file;
  for (std::size_t i = 0; i < tokens.size();) {
    if (tokens[i] == "--config" && i + 1 < tokens.size()) {
      file = tokens[i + 1];
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (tokens[i].rfind("--config=", 0) == 0) {
      file = tokens[i].substr(9);
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (file.empty()) return tokens;

  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file '" + file + "'");
  const auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  std::vector<std::string> injected;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config file '" + file + "' line " +
                        std::to_string(lineno) + ": expected key=value");
    injected.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }

  std::size_t at = 0;  // skip the subcommand tokens (two levels for traj)
  if (!tokens.empty() && !tokens[0].empty() && tokens[0][0] != '-') {
    at = 1;
    if (tokens[0] == "traj" && tokens.size() > 1 && !tokens[1].empty() &&
        tokens[1][0] != '-')
      at = 2;
  }
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at),
                injected.begin(), injected.end());
  return tokens;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positional-operator analysis toolkit"};
  app.require_subcommand(1);
  // Later occurrences win, so config-injected values yield to explicit flags.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string output_dir = [] {
    const char* env = std::getenv("REROPE_OUTPUT_DIR");
    return env && *env ? std::string(env) : std::string(".");
  }();
  app.add_option("--output-dir", output_dir,
                 "Directory for relative output paths (default: "
                 "$REROPE_OUTPUT_DIR or '.')");
  std::string config_doc;  // consumed before parsing; registered for --help
  const auto configurable = [&config_doc](CLI::App* cmd) {
    cmd->add_option("--config", config_doc,
                    "Flat key=value file for this command's options; "
                    "explicit flags override");
  };

  std::function<int()> action;

  HeatmapArgs heatmap;
  auto* cmd_heatmap = app.add_subcommand(
      "heatmap", "Per-plane rotary logit contributions over a window");
  cmd_heatmap->fallthrough();
  configurable(cmd_heatmap);
  cmd_heatmap->add_option("-T,--frames", heatmap.frames, "Window length");
  cmd_heatmap->add_option("--theta", heatmap.theta, "Schedule base");
  cmd_heatmap->add_option("--dim", heatmap.dim, "Head dimension");
  cmd_heatmap->add_option("-o,--output", heatmap.output, "CSV path");
  cmd_heatmap->add_option("--image", heatmap.image,
                          "Optional portable-graymap rendering");
  cmd_heatmap->callback([&] { action = [&] { return run_heatmap(heatmap, {output_dir}); }; });

  RedundancyArgs redundancy;
  auto* cmd_redundancy = app.add_subcommand(
      "redundancy", "Accumulated phase and logit drift per frequency plane");
  cmd_redundancy->fallthrough();
  configurable(cmd_redundancy);
  cmd_redundancy->add_option("-T,--frames", redundancy.frames, "Window length");
  cmd_redundancy->add_option("--theta", redundancy.theta, "Schedule base");
  cmd_redundancy->add_option("--dim", redundancy.dim, "Head dimension");
  cmd_redundancy->add_option("-o,--output", redundancy.output, "CSV path");
  cmd_redundancy->callback(
      [&] { action = [&] { return run_redundancy(redundancy, {output_dir}); }; });

  InvarianceArgs invariance;
  auto* cmd_invariance = app.add_subcommand(
      "invariance", "Randomized verification suites (exit 0 iff PASS)");
  cmd_invariance->fallthrough();
  configurable(cmd_invariance);
  cmd_invariance->add_option("--suite", invariance.suite, "Property suite")
      ->required()
      ->check(CLI::IsMember({"shift", "world", "reduction", "ablation"}));
  cmd_invariance
      ->add_option("--family", invariance.family,
                   "Operator family (default per suite)")
      ->check(CLI::IsMember({"rope3d", "masked_rope", "rerope", "full_temporal",
                             "double_rope"}));
  cmd_invariance->add_option("--form", invariance.form, "Relative form")
      ->check(CLI::IsMember({"c_from_t", "t_from_c"}));
  cmd_invariance->add_option("--trials", invariance.trials, "Trial count");
  cmd_invariance->add_option("--seed", invariance.seed, "Sampling seed");
  cmd_invariance->add_flag("--negative-control", invariance.negative_control,
                           "Break the property on purpose; suite must FAIL");
  cmd_invariance->add_option("-o,--output", invariance.output, "Report path");
  cmd_invariance->callback(
      [&] { action = [&] { return run_invariance(invariance, {output_dir}); }; });

  auto* cmd_traj =
      app.add_subcommand("traj", "Trajectory normalization and metrics");
  cmd_traj->fallthrough();
  cmd_traj->require_subcommand(1);

  TrajNormalizeArgs tnorm;
  auto* cmd_tnorm = cmd_traj->add_subcommand(
      "normalize", "Scale translations so the largest norm is 1");
  cmd_tnorm->fallthrough();
  configurable(cmd_tnorm);
  cmd_tnorm->add_option("-i,--input", tnorm.input, "Trajectory file")
      ->required();
  cmd_tnorm->add_option("-o,--output", tnorm.output, "Output trajectory");
  cmd_tnorm->callback(
      [&] { action = [&] { return run_traj_normalize(tnorm, {output_dir}); }; });

  TrajJointArgs tjoint;
  auto* cmd_tjoint = cmd_traj->add_subcommand(
      "joint-normalize", "Scale two trajectories by one strict unit bound");
  cmd_tjoint->fallthrough();
  configurable(cmd_tjoint);
  cmd_tjoint->add_option("--source", tjoint.source, "Source trajectory")
      ->required();
  cmd_tjoint->add_option("--target", tjoint.target, "Target trajectory")
      ->required();
  cmd_tjoint->add_option("--epsilon", tjoint.epsilon,
                         "Margin added to the shared maximum");
  cmd_tjoint->add_option("--source-output", tjoint.source_output,
                         "Normalized source path");
  cmd_tjoint->add_option("--target-output", tjoint.target_output,
                         "Normalized target path");
  cmd_tjoint->callback(
      [&] { action = [&] { return run_traj_joint(tjoint, {output_dir}); }; });

  TrajMetricsArgs tmetrics;
  auto* cmd_tmetrics = cmd_traj->add_subcommand(
      "metrics", "RRE/RTE/ATE of an estimate against a reference");
  cmd_tmetrics->fallthrough();
  configurable(cmd_tmetrics);
  cmd_tmetrics->add_option("--estimate", tmetrics.estimate, "Estimated poses")
      ->required();
  cmd_tmetrics->add_option("--reference", tmetrics.reference, "Reference poses")
      ->required();
  cmd_tmetrics->add_flag("--with-scale", tmetrics.with_scale,
                         "Also fit a global scale during alignment");
  cmd_tmetrics->add_option("--stride", tmetrics.stride,
                           "Frame gap for relative metrics");
  cmd_tmetrics->add_option("-o,--output", tmetrics.output, "Summary path");
  cmd_tmetrics->callback(
      [&] { action = [&] { return run_traj_metrics(tmetrics, {output_dir}); }; });

  DemoArgs demo;
  auto* cmd_demo = app.add_subcommand(
      "demo", "Pairwise logits for a synthetic temporal token grid");
  cmd_demo->fallthrough();
  configurable(cmd_demo);
  cmd_demo->add_option("--task", demo.task, "Conditioning regime")
      ->check(CLI::IsMember({"v2v", "i2v"}));
  cmd_demo->add_option("-T,--frames", demo.frames, "Frames per video")
      ->check(CLI::PositiveNumber);
  cmd_demo->add_option("--total-dim", demo.total_dim, "Head dimension");
  cmd_demo->add_option("--family", demo.family, "Operator family")
      ->check(CLI::IsMember({"rope3d", "masked_rope", "rerope", "full_temporal",
                             "double_rope"}));
  cmd_demo->add_option("--form", demo.form, "Relative form")
      ->check(CLI::IsMember({"c_from_t", "t_from_c"}));
  cmd_demo->add_option("--cameras", demo.cameras,
                       "Trajectory file with one pose per slot")
      ->required();
  cmd_demo->add_option("--seed", demo.seed, "Feature sampling seed");
  cmd_demo->add_option("-o,--output", demo.output, "CSV path");
  cmd_demo->callback([&] { action = [&] { return run_demo(demo, {output_dir}); }; });

  try {
    std::vector<std::string> tokens(argv + 1, argv + argc);
    tokens = expand_config(std::move(tokens));
    std::reverse(tokens.begin(), tokens.end());  // parse() wants them reversed
    app.parse(std::move(tokens));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
