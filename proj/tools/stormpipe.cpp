// stormpipe: staged media-storm detection pipeline.
//
//   stormpipe <stage> --config <file> [--threads N] [--seed S] [--set key=value ...]
//   stormpipe generate --preset benchmark|long-trial [--spec file] --out DIR [--seed S]
//
// Exit codes: 0 ok, 1 internal error, 2 validation error, 3 missing upstream artifact.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stormpipe/pipeline.hpp"
#include "stormpipe/synthetic.hpp"

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitMissing = 3;

struct StageArgs {
  std::string config;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

// --set key=value; the value is parsed as JSON when possible, else taken as a string.
nlohmann::json parse_overrides(const std::vector<std::string>& sets) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw stormpipe::ValidationError("override '" + s + "' is not key=value");
    const std::string key = s.substr(0, eq), value = s.substr(eq + 1);
    auto parsed = nlohmann::json::parse(value, nullptr, false);
    j[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
  }
  return j;
}

stormpipe::PipelineConfig resolve_config(const StageArgs& a) {
  auto cfg = stormpipe::load_config(a.config);
  cfg.apply(parse_overrides(a.overrides));
  if (a.threads) cfg.threads = a.threads;
  if (a.seed) cfg.seed = *a.seed;
  if (cfg.workdir.empty())
    if (const char* env = std::getenv("STORMPIPE_WORKDIR")) cfg.workdir = env;
  return cfg;
}

void print_report(const stormpipe::StageReport& r) {
  std::cout << stormpipe::stage_name(r.stage) << ": " << r.counts.dump() << " (" << static_cast<long>(r.wall_ms)
            << " ms)\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << stormpipe::stage_name(r.stage) << ": " << w << '\n';
}

int run_generate(const std::string& preset, const std::string& spec_file, const std::string& out, std::uint64_t seed) {
  namespace syn = stormpipe::synthetic;
  syn::GeneratorSpec spec;
  if (!spec_file.empty()) {
    std::ifstream in(spec_file);
    if (!in) throw stormpipe::ValidationError("cannot open spec " + spec_file);
    spec = syn::spec_from_json(nlohmann::json::parse(in));
  } else if (preset == "benchmark") {
    spec = syn::benchmark_spec();
  } else if (preset == "long-trial") {
    spec = syn::long_trial_spec();
  } else {
    throw stormpipe::ValidationError("unknown preset '" + preset + "'");
  }
  const auto sc = syn::generate(spec, seed);
  syn::write(sc, out);
  nlohmann::ordered_json cfg;
  cfg["articles"] = "articles.jsonl";
  cfg["outlets"] = "outlets.jsonl";
  cfg["embeddings"] = "embeddings.emb";
  cfg["embedding_ids"] = "embeddings.ids";
  cfg["workdir"] = "work";
  std::ofstream(std::filesystem::path(out) / "config.json") << cfg.dump(1) << '\n';
  std::cout << "wrote " << sc.corpus.size() << " articles, " << sc.truth.of_kind(syn::StoryKind::storm).size()
            << " planted storms to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Media storm detection pipeline"};
  app.require_subcommand(1);

  StageArgs args;
  std::vector<std::pair<std::string, CLI::App*>> stage_cmds;
  auto add_stage_options = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "bootstrap seed");
    sub->add_option("--set", args.overrides, "override a config key (key=value)");
  };
  for (auto s : stormpipe::all_stages()) {
    auto* sub = app.add_subcommand(stormpipe::stage_name(s), "run the " + stormpipe::stage_name(s) + " stage");
    add_stage_options(sub);
    stage_cmds.emplace_back(stormpipe::stage_name(s), sub);
  }
  auto* all = app.add_subcommand("all", "run every stage in order");
  add_stage_options(all);

  std::string preset = "benchmark", spec_file, out_dir;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "write a synthetic corpus with planted storms");
  gen->add_option("--preset", preset, "benchmark or long-trial");
  gen->add_option("--spec", spec_file, "generator spec (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--seed", gen_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (gen->parsed()) return run_generate(preset, spec_file, out_dir, gen_seed);
    stormpipe::Pipeline pipeline(resolve_config(args));
    if (all->parsed()) {
      for (auto s : stormpipe::all_stages()) print_report(pipeline.run(s));
      return 0;
    }
    for (const auto& [name, sub] : stage_cmds)
      if (sub->parsed()) print_report(pipeline.run(*stormpipe::parse_stage(name)));
    return 0;
  } catch (const stormpipe::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissing;
  } catch (const stormpipe::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const stormpipe::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
