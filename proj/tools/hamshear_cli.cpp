// hamshear: compile Hamiltonians on T^n x T^n into shear words.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hamshear/hamshear.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitTargetNotMet = 2;
constexpr int kExitInvalid = 3;

struct IoError {
  std::string msg;
};

int exit_code(hs_status s) {
  switch (s) {
    case HS_OK: return kExitOk;
    case HS_TARGET_NOT_MET: return kExitTargetNotMet;
    case HS_ERR_INVALID_INPUT:
    case HS_ERR_DIMENSION:
    case HS_ERR_IO: return kExitInvalid;
    default: return kExitOther;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError{"cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError{"cannot write " + path};
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) throw IoError{"cannot write " + path};
}

// owns a char* from the library
struct LibString {
  char* p = nullptr;
  ~LibString() { hs_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct Globals {
  std::size_t grid = 0;
  double tol = 1e-11;
  std::size_t cap_length = 0;
  std::optional<std::uint64_t> seed;
  std::string preset;
  std::optional<double> time;
  std::size_t inner_steps = 64;

  hs_options options() const {
    hs_options o;
    hs_options_default(&o);
    o.grid_per_axis = grid;
    o.tol = tol;
    o.cap_length = cap_length;
    if (seed) {
      o.has_seed = 1;
      o.seed = *seed;
    }
    if (time) {
      o.has_time = 1;
      o.time = *time;
    }
    o.inner_steps = inner_steps;
    return o;
  }

  // Problem text from a file, or a preset stub.
  std::string problem_text(const std::string& path) const {
    if (!preset.empty() && !path.empty()) throw IoError{"give either a problem file or --preset, not both"};
    if (!preset.empty()) return nlohmann::json{{"schema", "hamshear/problem/1"}, {"preset", preset}}.dump();
    if (path.empty()) throw IoError{"a problem file (or --preset) is required"};
    return read_file(path);
  }
};

int report_failure(hs_status s) {
  std::cerr << "hamshear: " << hs_last_error() << "\n";
  return exit_code(s);
}

int run_compile(const Globals& g, const std::string& problem, const std::string& word_path,
                const std::string& report_path) {
  const std::string text = g.problem_text(problem);
  const hs_options opts = g.options();
  hs_word* word = nullptr;
  LibString report;
  const hs_status s = hs_compile(text.c_str(), &opts, &word, &report.p);
  if (s != HS_OK && s != HS_TARGET_NOT_MET) return report_failure(s);

  LibString word_json, metrics;
  const hs_status ws = hs_word_to_json(word, &word_json.p);
  const hs_status ms = hs_word_metrics(word, &metrics.p);
  hs_word_free(word);
  if (ws != HS_OK) return report_failure(ws);
  if (ms != HS_OK) return report_failure(ms);

  auto rep = nlohmann::json::parse(report.str());
  if (!word_path.empty()) {
    write_file(word_path, word_json.str());
    write_file(word_path + ".metrics.json", metrics.str());
    rep["word_path"] = word_path;
  }
  const std::string rep_text = rep.dump(2);
  if (!report_path.empty()) {
    write_file(report_path, rep_text);
  } else {
    std::cout << rep_text << "\n";
  }
  std::cerr << "hamshear: word length " << rep["word_length"] << ", measured error "
            << rep["measured_error"] << ", target " << rep["target_eps"]
            << (s == HS_OK ? " met" : " NOT met") << "\n";
  return exit_code(s);
}

int run_verify(const Globals& g, const std::string& word_path, const std::string& problem,
               const std::string& report_path) {
  const std::string word_text = read_file(word_path);
  const std::string text = g.problem_text(problem);
  hs_word* word = nullptr;
  hs_status s = hs_word_from_json(word_text.c_str(), &word);
  if (s != HS_OK) return report_failure(s);
  const hs_options opts = g.options();
  LibString report;
  s = hs_verify(word, text.c_str(), &opts, &report.p);
  hs_word_free(word);
  if (s != HS_OK && s != HS_TARGET_NOT_MET) return report_failure(s);
  auto rep = nlohmann::json::parse(report.str());
  rep["word_path"] = word_path;
  if (!report_path.empty()) {
    write_file(report_path, rep.dump(2));
  } else {
    std::cout << rep.dump(2) << "\n";
  }
  return exit_code(s);
}

int run_ladder(const Globals& g, const std::string& problem, const std::string& scheme,
               const std::vector<std::size_t>& steps, const std::string& out_path) {
  const std::string text = g.problem_text(problem);
  const hs_options opts = g.options();
  LibString csv;
  const hs_status s = hs_ladder(text.c_str(), scheme.c_str(), steps.data(), steps.size(), &opts, &csv.p);
  if (s != HS_OK) return report_failure(s);
  if (!out_path.empty()) {
    write_file(out_path, csv.str());
  } else {
    std::cout << csv.str();
  }
  return kExitOk;
}

int run_decompose(const Globals& g, const std::string& problem, const std::string& out_path) {
  const std::string text = g.problem_text(problem);
  LibString out;
  const hs_status s = hs_decompose_problem(text.c_str(), &out.p);
  if (s != HS_OK) return report_failure(s);
  if (!out_path.empty()) {
    write_file(out_path, out.str());
  } else {
    std::cout << out.str() << "\n";
  }
  return kExitOk;
}

int run_presets() {
  LibString names;
  const hs_status s = hs_preset_names(&names.p);
  if (s != HS_OK) return report_failure(s);
  std::cout << names.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hamshear: compile trigonometric-polynomial Hamiltonians into shear words"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hs_version()));

  Globals g;
  std::uint64_t seed = 0;
  double time = 0.0;
  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--grid", g.grid, "error grid points per axis (0 = default)");
    sub->add_option("--tol", g.tol, "reference integrator tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--cap-length", g.cap_length, "word-length cap (overrides the problem file)");
    sub->add_option("--seed", seed, "use a random error grid with this seed");
    sub->add_option("--preset", g.preset, "use a built-in problem instead of a file");
    sub->add_option("--time", time, "flow time (overrides the problem file)");
    sub->add_option("--inner-steps", g.inner_steps, "inner step count for ladders")
        ->check(CLI::PositiveNumber);
  };

  std::string problem, word_path, report_path, scheme, out_path, steps_text;

  auto* compile = app.add_subcommand("compile", "compile a problem into a shear word");
  compile->add_option("problem", problem, "problem file");
  compile->add_option("-o,--output", word_path, "word file to write");
  compile->add_option("--report", report_path, "report file (default: stdout)");
  add_globals(compile);

  auto* verify = app.add_subcommand("verify", "re-measure a word against a problem");
  verify->add_option("word", word_path, "word file")->required();
  verify->add_option("problem", problem, "problem file");
  verify->add_option("--report", report_path, "report file (default: stdout)");
  add_globals(verify);

  auto* ladder = app.add_subcommand("ladder", "convergence ladder of one scheme");
  ladder->add_option("problem", problem, "problem file");
  ladder->add_option("--scheme", scheme, "trotter | commutator | slicing | end_to_end")->required();
  ladder->add_option("--steps", steps_text, "comma-separated step counts, e.g. 8,16,32")->required();
  ladder->add_option("-o,--output", out_path, "CSV file (default: stdout)");
  add_globals(ladder);

  auto* decompose = app.add_subcommand("decompose", "emit the bracket decomposition only");
  decompose->add_option("problem", problem, "problem file");
  decompose->add_option("-o,--output", out_path, "output file (default: stdout)");
  add_globals(decompose);

  auto* presets = app.add_subcommand("presets", "list built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  for (auto* sub : {compile, verify, ladder, decompose}) {
    if (sub->parsed()) {
      if (sub->count("--seed") > 0) g.seed = seed;
      if (sub->count("--time") > 0) g.time = time;
    }
  }

  try {
    if (compile->parsed()) return run_compile(g, problem, word_path, report_path);
    if (verify->parsed()) return run_verify(g, word_path, problem, report_path);
    if (decompose->parsed()) return run_decompose(g, problem, out_path);
    if (presets->parsed()) return run_presets();
    if (ladder->parsed()) {
      std::vector<std::size_t> steps;
      std::stringstream ss(steps_text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
          v = std::stoull(item, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != item.size() || item.empty() || v == 0) {
          std::cerr << "hamshear: bad step count \"" << item << "\"\n";
          return kExitInvalid;
        }
        steps.push_back(static_cast<std::size_t>(v));
      }
      return run_ladder(g, problem, scheme, steps, out_path);
    }
  } catch (const IoError& e) {
    std::cerr << "hamshear: " << e.msg << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "hamshear: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
