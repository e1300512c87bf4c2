// magnomech command-line front end.
//
//   magnomech meanfield --params p.cfg [--duration T] [--samples N] [--out f.csv]
//   magnomech steady    --params p.cfg [--samples N] [--out f.csv]
//   magnomech entangle  --params p.cfg [--samples N] [--format csv|json] [--out f]
//   magnomech stability --params p.cfg [--phases N] [--out f.csv]
//   magnomech sweep     --spec s.cfg [--params base.cfg] [--jobs N] [--format csv|json] [--out f]
//
// Exit codes: 0 success (a sweep succeeds even if some points fail),
// 1 computation error, 2 invalid input, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "magnomech/magnomech.hpp"

namespace mm = magnomech;

namespace {

std::string fmt(double v) { return mm::detail::format_double(v); }

/// Writes a summary line where it does not collide with CSV on stdout.
void summary_line(const std::string& line, const std::string& out) {
  (out == "-" ? std::cerr : std::cout) << line << "\n";
}

std::string infer_format(const std::string& requested, const std::string& out) {
  if (!requested.empty()) return requested;
  if (out.size() > 5 && out.substr(out.size() - 5) == ".json") return "json";
  return "csv";
}

void cmd_meanfield(const std::string& params_path, const std::string& out, double duration,
                   std::size_t samples) {
  const mm::SystemParams p = mm::load_params(params_path);
  mm::MeanTrajectory traj;
  if (duration > 0.0) {
    traj = mm::integrate_meanfield(p, 0.0, duration, mm::find_fixed_point(p), samples);
  } else {
    mm::OrbitOptions opt;
    opt.n_samples = samples;
    traj = mm::steady_meanfield(p, opt);
  }
  std::ostringstream o;
  o << "t,re_a,im_a,re_b,im_b,re_m,im_m,abs_a\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const mm::ModeAmplitudes& s = traj.states[k];
    o << fmt(traj.times[k]) << "," << fmt(s.a.real()) << "," << fmt(s.a.imag()) << ","
      << fmt(s.b.real()) << "," << fmt(s.b.imag()) << "," << fmt(s.m.real()) << ","
      << fmt(s.m.imag()) << "," << fmt(std::abs(s.a)) << "\n";
  }
  mm::write_text(o.str(), out);
}

void cmd_steady(const std::string& params_path, const std::string& out, std::size_t samples) {
  const mm::SystemParams p = mm::load_params(params_path);
  const mm::MeanTrajectory orbit = mm::steady_meanfield(p);
  const mm::StabilityReport st = mm::assess_stability(p, orbit);
  if (!st.steady_state_exists()) {
    throw mm::InstabilityError("no periodic steady state (spectral radius " +
                                   fmt(st.spectral_radius) + ")",
                               st.spectral_radius);
  }
  std::vector<mm::CovarianceMatrix> cms;
  if (orbit.period) {
    cms = mm::periodic_steady_cm(p, orbit, *orbit.period, *st.monodromy, samples);
  } else {
    cms = {mm::stationary_cm(p, orbit.states.front())};
  }
  std::ostringstream o;
  o << "t";
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) o << ",v" << i + 1 << j + 1;
  o << "\n";
  bool physical = true;
  for (const mm::CovarianceMatrix& v : cms) {
    physical = physical && mm::physicality_check(v);
    o << fmt(v.time);
    for (int i = 0; i < 6; ++i)
      for (int j = i; j < 6; ++j) o << "," << fmt(v.entries(i, j));
    o << "\n";
  }
  mm::write_text(o.str(), out);
  summary_line("routh_hurwitz=" + std::to_string(st.routh_hurwitz) +
                   " floquet=" + std::to_string(st.floquet) +
                   " max_re_eig=" + fmt(st.max_real_eigenvalue) +
                   " spectral_radius=" + fmt(st.spectral_radius) +
                   " physical=" + std::to_string(physical),
               out);
}

void cmd_entangle(const std::string& params_path, const std::string& out, std::size_t samples,
                  const std::string& format) {
  const mm::SystemParams p = mm::load_params(params_path);
  mm::PipelineOptions opt;
  opt.period.n_samples = samples;
  const mm::PointAnalysis a = mm::analyze_point(p, opt);
  if (!a.summary) {
    throw mm::InstabilityError("no periodic steady state (spectral radius " +
                                   fmt(a.stability.spectral_radius) + ")",
                               a.stability.spectral_radius);
  }
  const mm::PeriodSummary& s = *a.summary;
  if (infer_format(format, out) == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const mm::EntanglementReport& r : s.samples) {
      rows.push_back({{"t", r.time},
                      {"pairwise_logneg", r.pairwise_logneg},
                      {"one_vs_two_logneg", r.one_vs_two_logneg},
                      {"residuals", r.residuals},
                      {"r_min", r.r_min},
                      {"monogamy_ok", r.monogamy_ok}});
    }
    const nlohmann::json doc = {
        {"samples", rows},
        {"summary",
         {{"r_max", s.r_max},
          {"t_max", s.t_max},
          {"monogamy_ok", s.monogamy_ok},
          {"physical", s.physical},
          {"routh_hurwitz", a.stability.routh_hurwitz},
          {"floquet", a.stability.floquet},
          {"spectral_radius", a.stability.spectral_radius}}}};
    mm::write_text(doc.dump(2) + "\n", out);
    return;
  }
  std::ostringstream o;
  o << "t,en_ab,en_am,en_bm,en_a_bm,en_b_am,en_m_ab,res_a,res_b,res_m,r_min,monogamy_ok\n";
  for (const mm::EntanglementReport& r : s.samples) {
    o << fmt(r.time);
    for (double v : r.pairwise_logneg) o << "," << fmt(v);
    for (double v : r.one_vs_two_logneg) o << "," << fmt(v);
    for (double v : r.residuals) o << "," << fmt(v);
    o << "," << fmt(r.r_min) << "," << r.monogamy_ok << "\n";
  }
  o << "\nr_max,t_max,monogamy_ok,physical,routh_hurwitz,floquet,spectral_radius\n"
    << fmt(s.r_max) << "," << fmt(s.t_max) << "," << s.monogamy_ok << "," << s.physical << ","
    << a.stability.routh_hurwitz << "," << a.stability.floquet << ","
    << fmt(a.stability.spectral_radius) << "\n";
  mm::write_text(o.str(), out);
}

void cmd_stability(const std::string& params_path, const std::string& out, std::size_t phases) {
  const mm::SystemParams p = mm::load_params(params_path);
  std::ostringstream o;
  o << "status,routh_hurwitz,floquet,max_re_eig,spectral_radius,period\n";
  try {
    const mm::MeanTrajectory orbit = mm::steady_meanfield(p);
    const mm::StabilityReport st = mm::assess_stability(p, orbit, phases);
    const char* status = st.stable() ? "stable" : st.floquet ? "rh_violated" : "unstable_floquet";
    o << status << "," << st.routh_hurwitz << "," << st.floquet << ","
      << fmt(st.max_real_eigenvalue) << "," << fmt(st.spectral_radius) << ","
      << fmt(orbit.period.value_or(0.0)) << "\n";
  } catch (const mm::InstabilityError& e) {
    o << "unstable_floquet,nan,0,nan," << fmt(e.spectral_radius()) << ",nan\n";
  }
  mm::write_text(o.str(), out);
}

void cmd_sweep(const std::string& spec_path, const std::string& params_path,
               const std::string& out, unsigned jobs, const std::string& format) {
  std::string text;
  if (!params_path.empty()) text = mm::read_text_file(params_path) + "\n";
  text += mm::read_text_file(spec_path);
  mm::SweepSpec spec;
  try {
    spec = mm::parse_spec(text);
  } catch (const mm::ParseError& e) {
    throw mm::ParseError(spec_path + ": " + e.what());
  }
  const mm::SweepResult result = mm::run_sweep(spec, jobs);
  mm::emit(result, infer_format(format, out) == "json" ? mm::Format::json : mm::Format::csv, out);
  std::size_t failed = 0;
  for (const mm::PointRecord& r : result.records) {
    if (r.status != "stable" && r.status != "rh_violated") ++failed;
  }
  std::cerr << "magnomech: " << result.records.size() << " points, " << failed
            << " without steady state or failed\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic steady states and tripartite entanglement of a driven "
               "cavity-magnon-mechanics system"};
  app.set_version_flag("--version", std::string(mm::kVersion));
  app.require_subcommand(1);

  std::string params;
  std::string out = "-";
  std::size_t samples = 256;
  std::string format;

  auto* meanfield = app.add_subcommand("meanfield", "Mean values over the orbit or a transient");
  double duration = 0.0;
  meanfield->add_option("--params", params, "Parameter file")->required()->check(CLI::ExistingFile);
  meanfield->add_option("--out", out, "Output path, '-' for stdout");
  meanfield->add_option("--duration", duration,
                        "Integrate a transient of this length from the static root instead");
  meanfield->add_option("--samples", samples, "Samples per period or window")
      ->check(CLI::Range(2, 1 << 24));

  auto* steady = app.add_subcommand("steady", "One period of the steady-state covariance matrix");
  steady->add_option("--params", params, "Parameter file")->required()->check(CLI::ExistingFile);
  steady->add_option("--out", out, "Output path, '-' for stdout");
  steady->add_option("--samples", samples, "Samples per period")->check(CLI::Range(1, 1 << 24));

  auto* entangle = app.add_subcommand("entangle", "Entanglement over one period");
  entangle->add_option("--params", params, "Parameter file")->required()->check(CLI::ExistingFile);
  entangle->add_option("--out", out, "Output path, '-' for stdout");
  entangle->add_option("--samples", samples, "Samples per period")->check(CLI::Range(3, 1 << 24));
  entangle->add_option("--format", format, "csv or json (default from --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* stability = app.add_subcommand("stability", "Routh-Hurwitz and Floquet stability");
  std::size_t phases = 64;
  stability->add_option("--params", params, "Parameter file")->required()->check(CLI::ExistingFile);
  stability->add_option("--out", out, "Output path, '-' for stdout");
  stability->add_option("--phases", phases, "Orbit phases for the instantaneous test")
      ->check(CLI::Range(1, 1 << 20));

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep over one or two axes");
  std::string spec;
  unsigned jobs = 1;
  sweep->add_option("--spec", spec, "Sweep document")->required()->check(CLI::ExistingFile);
  sweep->add_option("--params", params, "Base parameter file, read before the spec")
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Output path, '-' for stdout");
  sweep->add_option("--jobs", jobs, "Worker threads, 0 for all cores");
  sweep->add_option("--format", format, "csv or json (default from --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*meanfield) cmd_meanfield(params, out, duration, samples);
    if (*steady) cmd_steady(params, out, samples);
    if (*entangle) cmd_entangle(params, out, samples, format);
    if (*stability) cmd_stability(params, out, phases);
    if (*sweep) cmd_sweep(spec, params, out, jobs, format);
  } catch (const mm::ParseError& e) {
    std::cerr << "magnomech: " << e.what() << "\n";
    return 2;
  } catch (const mm::DomainError& e) {
    std::cerr << "magnomech: " << e.what() << "\n";
    return 2;
  } catch (const mm::IoError& e) {
    std::cerr << "magnomech: " << e.what() << "\n";
    return 3;
  } catch (const mm::Error& e) {
    std::cerr << "magnomech: " << mm::to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
