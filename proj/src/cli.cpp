#include "oscilab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "oscilab/construct.hpp"
#include "oscilab/lap.hpp"

namespace oscilab {

using nlohmann::json;

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table{
      {"verify-wvn", "Wigner-von Neumann identity -f'' + V f = f (1D and 3D radial)",
       "residual of the closed-form bound state"},
      {"construct-dirac", "radial Dirac inverse construction: potentials from a prescribed channel bound state",
       "phi_sc, phi_am, phi_el and the channel residual"},
      {"construct-kg", "Klein-Gordon construction V = lambda - N f / f with Fourier multipliers",
       "eigenvalue, residual and the <x>|V| bound"},
      {"find-embedded", "embedded eigenvalues in the continuum, Virial identity <f, [H, iA] f> = 0",
       "box-stable localized eigenvalues in a window"},
      {"lap-scan", "limiting absorption: sup of ||<Q>^-s (H - z)^-1 <Q>^-s|| over Re z in I",
       "weighted resolvent norms and divergence exponent"},
      {"mourre-check", "Mourre estimate E_J [H, iA] E_J >= c E_J + K and its weighted and strict forms",
       "commutator form on the spectral window"},
      {"compactness-probe", "compactness of <P>^-l1 <Q>^p sin(k|Q|^alpha) <P>^-l2 and of theta(H0) sin(k|Q|) theta(H0)",
       "tail norms outside growing balls"},
      {"phase-diagram", "LAP regions of W_alpha_beta in the (alpha, beta) plane around k^2/4",
       "lap-scan verdicts per cell, CSV and SVG"},
  };
  return table;
}

std::string list_commands() {
  std::ostringstream os;
  os << std::left << std::setw(20) << "command" << "anchor\n";
  for (const auto& c : command_table()) os << std::left << std::setw(20) << c.name << c.anchor << '\n';
  return os.str();
}

void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override has the form key=value");
  std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    auto dot = key.find('.', start);
    std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!part.empty(), "override key has no empty path segments");
    if (node->is_null()) *node = json::object();
    require(node->is_object(), "override path runs through objects");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

RunConfig parse_config(const json& doc) {
  require(doc.is_object(), "config is a JSON object");
  RunConfig cfg;
  require(doc.contains("command") && doc.at("command").is_string(), "config names a command");
  cfg.command = doc.at("command").get<std::string>();
  bool known = false;
  for (const auto& c : command_table()) known = known || c.name == cfg.command;
  if (!known) throw ValidationError("command recognized (got '" + cfg.command + "')");
  if (doc.contains("params")) cfg.params = doc.at("params");
  require(cfg.params.is_object(), "params is an object");
  cfg.output_dir = doc.value("output_dir", cfg.output_dir);
  cfg.seed = doc.value("seed", cfg.seed);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file exists (" + path + ")");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("config file parses as JSON (" + path + ")");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

namespace {

// Output files, held until the run succeeds.
struct Outputs {
  std::map<std::string, std::string> files;
  json disclosures = json::object();

  void put_json(const std::string& name, const json& j) { files[name] = j.dump(2) + "\n"; }
};

std::pair<double, double> interval(const json& p, const char* key, std::pair<double, double> fallback) {
  if (!p.contains(key)) return fallback;
  auto v = p.at(key).get<std::vector<double>>();
  require(v.size() == 2, "interval has two endpoints");
  require(v[0] < v[1], "interval lo < hi");
  return {v[0], v[1]};
}

Sampling sampling_param(const json& p) {
  std::string s = p.value("sampling", std::string("point"));
  if (s == "point") return Sampling::point;
  if (s == "cell_average") return Sampling::cell_average;
  throw ValidationError("sampling in {point, cell_average} (got '" + s + "')");
}

// no "potential" entry means the free Hamiltonian
std::optional<PotentialSpec> potential_param(const json& p) {
  if (!p.contains("potential") || p.at("potential").is_null()) return std::nullopt;
  PotentialSpec V = p.at("potential").get<PotentialSpec>();
  validate(V);
  return V;
}

OperatorFactory hamiltonian(std::optional<PotentialSpec> V, Sampling sampling) {
  if (!V) return [](const Grid1D& g) { return build_h0(g); };
  return [V = *V, sampling](const Grid1D& g) { return build_schrodinger(g, V, {}, sampling); };
}

void cmd_verify_wvn(const json& p, Outputs& out) {
  double x_max = p.value("x_max", 50.0), step = p.value("step", 1e-3);
  require(x_max > 0.0, "x_max > 0");
  require(step > 0.0 && step < x_max, "0 < step < x_max");
  double r1 = verify_wvn_1d(x_max, step), r3 = verify_wvn_3d(x_max, step);
  out.put_json("wvn.json", {{"x_max", x_max},
                            {"step", step},
                            {"residual_1d", r1},
                            {"residual_3d", r3},
                            {"below_1e-9", r1 < 1e-9 && r3 < 1e-9}});
}

void cmd_construct_dirac(const json& p, Outputs& out) {
  DiracChannelSpec spec = p.get<DiracChannelSpec>();
  validate(spec);
  Grid1D g = default_dirac_grid();
  if (p.contains("grid")) {
    g = p.at("grid").get<Grid1D>();
    require(g.kind == GridKind::halfline, "Dirac channel uses a halfline grid");
  }
  validate(g);
  DiracConstruction c = dirac_solve_potential(spec, g);
  DiracLimits lim = dirac_check_limits(c);
  std::ostringstream csv;
  csv << std::setprecision(12);
  write_csv(csv, c);
  out.files["dirac.csv"] = csv.str();
  json s = summary_json(c, lim);
  s["spec"] = spec;
  s["residual"] = dirac_residual(c, spec);
  out.put_json("dirac.json", s);
}

void cmd_construct_kg(const json& p, Outputs& out) {
  double m = p.value("m", 1.0);
  Grid1D g = periodic_grid(p.value("L", 200.0), p.value("n", 8192));
  validate(g);
  KgConstruction c = kg_construct(m, g);
  std::ostringstream csv;
  csv << std::setprecision(12);
  write_csv(csv, c);
  out.files["kg.csv"] = csv.str();
  out.put_json("kg.json", summary_json(c));
}

void cmd_find_embedded(const json& p, Outputs& out) {
  auto V = potential_param(p);
  auto [lo, hi] = interval(p, "window", {0.9, 1.1});
  auto boxes = p.value("box_list", std::vector<double>{200.0, 400.0});
  require(boxes.size() >= 2, "box_list has at least two boxes");
  double h = p.value("h", 0.05);
  require(h > 0.0, "h > 0");
  EmbeddedOptions opt;
  opt.drift_tol = p.value("drift_tol", opt.drift_tol);
  if (p.value("virial", true)) opt.conjugate = [](const Grid1D& g) { return build_conjugate_A(g); };
  auto cands = find_embedded(hamiltonian(V, sampling_param(p)), [h](double L) { return line_grid_step(L, h); }, lo,
                             hi, boxes, opt);
  json list = json::array();
  int genuine = 0;
  for (const auto& c : cands) {
    list.push_back(to_json_value(c));
    genuine += c.verdict == EmbeddedVerdict::genuine;
  }
  out.put_json("embedded.json", {{"window", {lo, hi}}, {"box_list", boxes}, {"h", h}, {"genuine", genuine},
                                 {"candidates", list}});
}

void cmd_lap_scan(const json& p, Outputs& out) {
  auto V = potential_param(p);
  LapScanSpec spec = p.contains("scan") ? p.at("scan").get<LapScanSpec>() : LapScanSpec{};
  validate(spec);
  LapScanResult r = lap_scan(hamiltonian(V, spec.sampling), spec);
  std::ostringstream csv;
  write_scan_csv(csv, r);
  out.files["lap_scan.csv"] = csv.str();
  json s = summary_json(r);
  s["spec"] = spec;
  out.put_json("lap_scan.json", s);
  out.disclosures["lap_scan"] = {{"im_floor", r.im_floor}, {"level_spacing", r.level_spacing}};
}

void cmd_mourre(const json& p, Outputs& out, std::uint64_t seed) {
  auto V = potential_param(p);
  auto [lo, hi] = interval(p, "window", {0.5, 1.5});
  Grid1D g = line_grid_step(p.value("L", 20.0), p.value("h", 0.01));
  validate(g);
  OperatorFactory H = hamiltonian(V, sampling_param(p));
  OperatorFactory A = [](const Grid1D& gg) { return build_conjugate_A(gg); };
  std::string mode = p.value("mode", std::string("strict"));
  json result;
  if (mode == "strict" || mode == "plain") {
    auto r = mourre_check(H, A, g, lo, hi, mode == "strict" ? MourreMode::strict : MourreMode::plain,
                          p.value("remainder_rank", 0));
    result = to_json_value(r);
  } else if (mode == "weighted") {
    double s = p.value("s", 0.51);
    WeightFunctionSpec psi;
    psi.kind = WeightKind::psi;
    psi.c = p.value("c", 0.0);
    json list = json::array();
    for (double R : p.value("R", std::vector<double>{1, 4, 16, 64}))
      list.push_back(to_json_value(weighted_mourre_check(H, A, g, psi, R, lo, hi, s)));
    result = {{"kind", "weighted"}, {"s", s}, {"scan", list}};
  } else if (mode == "at_infinity") {
    auto r = mourre_at_infinity_check(H, g, p.value("radii", std::vector<double>{20, 40}), p.value("delta", 0.1),
                                      p.value("s", 0.51), p.value("gamma", 0.7), lo, hi, p.value("trials", 64),
                                      static_cast<unsigned>(seed));
    result = to_json_value(r);
  } else {
    throw ValidationError("mode in {strict, plain, weighted, at_infinity} (got '" + mode + "')");
  }
  result["window"] = {lo, hi};
  out.put_json("mourre.json", result);
}

void cmd_compactness(const json& p, Outputs& out) {
  std::string kind = p.value("kind", std::string("oscillation"));
  if (kind == "oscillation") {
    CompactnessSpec cs;
    cs.p = p.value("p", cs.p);
    cs.alpha = p.value("alpha", cs.alpha);
    cs.k = p.value("k", cs.k);
    cs.l1 = p.value("l1", cs.l1);
    cs.l2 = p.value("l2", cs.l2);
    if (p.contains("cutoff")) cs.cutoff = p.at("cutoff").get<CutoffSpec>();
    validate(cs.cutoff);
    Grid1D g = periodic_grid(p.value("L", 80.0), p.value("n", 16384));
    double outer = p.value("outer", g.L - 10.0);
    auto r = oscillation_compactness_probe(g, cs, p.value("radii", std::vector<double>{4, 8, 16, 32, 64}), outer);
    std::ostringstream csv;
    csv << "radius,tail_norm\n" << std::setprecision(12);
    for (std::size_t i = 0; i < r.radii.size(); ++i) csv << r.radii[i] << ',' << r.tail_norms[i] << '\n';
    out.files["compactness.csv"] = csv.str();
    out.put_json("compactness.json", {{"kind", kind}, {"report", to_json_value(r)}});
    return;
  }
  require(kind == "interference" || kind == "small_plus_decay",
          "kind in {oscillation, interference, small_plus_decay}");
  WindowSpec w = p.contains("window") ? p.at("window").get<WindowSpec>() : WindowSpec{1.2, 1.7};
  validate(w);
  double k = p.value("k", 2.0);
  InterferenceOptions opt;
  opt.dim = p.value("dim", 3);
  Grid1D g = opt.dim == 1 ? line_grid_step(p.value("L", 200.0), p.value("h", 0.1))
                          : halfline_grid_step(p.value("L", 200.0), p.value("h", 0.1));
  auto radii = p.value("radii", std::vector<double>{10, 20, 40, 80});
  double symbol = interference_symbol_check(w, k, opt.dim);
  std::ostringstream csv;
  json rep{{"kind", kind}, {"symbol", symbol}, {"k", k}, {"dim", opt.dim}};
  if (kind == "interference") {
    auto r = interference_probe(g, w, k, radii, opt);
    append_sweep_csv(csv, w, k, r, true);
    rep["report"] = to_json_value(r);
  } else {
    auto r = small_plus_decay_probe(g, w, k, radii, p.value("narrow_fraction", 0.25), opt);
    append_sweep_csv(csv, w, k, r.wide, true);
    append_sweep_csv(csv, r.narrow_window, k, r.narrow, false);
    rep["wide"] = to_json_value(r.wide);
    rep["narrow"] = to_json_value(r.narrow);
    rep["narrow_window"] = r.narrow_window;
    rep["narrowing_lowers"] = r.narrowing_lowers;
  }
  out.files["compactness.csv"] = csv.str();
  out.put_json("compactness.json", rep);
}

void cmd_phase(const json& p, Outputs& out) {
  PhaseSweepSpec spec = p.get<PhaseSweepSpec>();
  validate(spec);
  auto cells = phase_sweep(spec);
  std::ostringstream csv, svg;
  write_phase_csv(csv, cells);
  write_phase_svg(svg, cells, spec);
  out.files["phase.csv"] = csv.str();
  out.files["phase.svg"] = svg.str();
  json list = json::array(), disc = json::array();
  for (const auto& c : cells) {
    json cell{{"alpha", c.alpha},          {"beta", c.beta},  {"region", region_name(c.region)},
              {"below", c.below},          {"above", c.above}, {"genuine_below", c.genuine_below},
              {"genuine_above", c.genuine_above}};
    if (c.below != "skipped") {
      cell["below_scan"] = summary_json(c.below_scan);
      cell["above_scan"] = summary_json(c.above_scan);
      disc.push_back({{"alpha", c.alpha},
                      {"beta", c.beta},
                      {"below_im_floor", c.below_scan.im_floor},
                      {"above_im_floor", c.above_scan.im_floor}});
    }
    list.push_back(cell);
  }
  out.put_json("phase.json", {{"spec", spec}, {"cells", list}});
  out.disclosures["phase_diagram"] = disc;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) throw ComputeError("cannot write " + path.string());
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  RunOutcome outcome;
  auto t0 = std::chrono::steady_clock::now();
  Outputs out;
  try {
    const json& p = cfg.params;
    if (cfg.command == "verify-wvn") cmd_verify_wvn(p, out);
    else if (cfg.command == "construct-dirac") cmd_construct_dirac(p, out);
    else if (cfg.command == "construct-kg") cmd_construct_kg(p, out);
    else if (cfg.command == "find-embedded") cmd_find_embedded(p, out);
    else if (cfg.command == "lap-scan") cmd_lap_scan(p, out);
    else if (cfg.command == "mourre-check") cmd_mourre(p, out, cfg.seed);
    else if (cfg.command == "compactness-probe") cmd_compactness(p, out);
    else if (cfg.command == "phase-diagram") cmd_phase(p, out);
    else throw ValidationError("command recognized (got '" + cfg.command + "')");

    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    json listing = json::array();
    for (const auto& [name, content] : out.files) {
      write_file(dir / name, content);
      listing.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
      outcome.files.push_back(name);
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest{{"tool_version", kToolVersion},
                  {"command", cfg.command},
                  {"config", {{"command", cfg.command}, {"params", cfg.params}, {"output_dir", cfg.output_dir},
                              {"seed", cfg.seed}}},
                  {"threads", thread_count()},
                  {"wall_time_s", wall},
                  {"outputs", listing},
                  {"disclosures", out.disclosures}};
    // the manifest appears only once every output is on disk
    write_file(dir / "manifest.json.tmp", manifest.dump(2) + "\n");
    std::filesystem::rename(dir / "manifest.json.tmp", dir / "manifest.json");
    outcome.files.push_back("manifest.json");
  } catch (const ValidationError& e) {
    outcome.exit_code = 2;
    outcome.error = {{"error", "validation"}, {"invariant", e.what()}, {"command", cfg.command}};
  } catch (const json::exception& e) {
    outcome.exit_code = 2;
    outcome.error = {{"error", "validation"}, {"invariant", std::string("params well-formed: ") + e.what()},
                     {"command", cfg.command}};
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.error = {{"error", "compute"}, {"message", e.what()}, {"command", cfg.command}};
  }
  return outcome;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"oscilab: oscillating potentials, embedded eigenvalues, LAP and Mourre diagnostics"};
  app.require_subcommand(1);
  auto* list = app.add_subcommand("list", "print the command table");
  auto* runc = app.add_subcommand("run", "run a JSON configuration");
  std::string config_path, positional, out_dir;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int threads = 0;
  runc->add_option("config_file", positional, "configuration file");
  runc->add_option("--config", config_path, "configuration file");
  runc->add_option("--set", sets, "dot-path override key=value")->take_all();
  runc->add_option("--out", out_dir, "output directory");
  auto* seed_opt = runc->add_option("--seed", seed, "random seed");
  runc->add_option("--threads", threads, "worker threads (default: OSCILAB_THREADS or hardware)")
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << json{{"error", "validation"}, {"invariant", std::string("command line: ") + e.what()}}.dump() << '\n';
    return 2;
  }
  if (list->parsed()) {
    out << list_commands();
    return 0;
  }
  (void)runc;
  if (config_path.empty()) config_path = positional;
  RunConfig cfg;
  try {
    if (config_path.empty()) throw ValidationError("a config file is given");
    cfg = load_config(config_path, sets);
  } catch (const ValidationError& e) {
    err << json{{"error", "validation"}, {"invariant", e.what()}}.dump() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << json{{"error", "validation"}, {"invariant", std::string("config well-formed: ") + e.what()}}.dump()
        << '\n';
    return 2;
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed_opt->count() > 0) cfg.seed = seed;
  if (threads > 0) set_thread_count(threads);
  RunOutcome r = run(cfg);
  if (r.exit_code != 0) {
    err << r.error.dump() << '\n';
    return r.exit_code;
  }
  for (const auto& f : r.files) out << (std::filesystem::path(cfg.output_dir) / f).string() << '\n';
  return 0;
}

}  // namespace oscilab
