#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "copkit/cli/commands.hpp"

namespace {

using namespace copkit;
namespace fs = std::filesystem;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream is(s);
  while (std::getline(is, token, ',')) {
    if (!text::trim(token).empty()) out.push_back(text::trim(token));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"copkit: procedure-aware visual next-step prediction toolkit"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> config_path;
  std::optional<std::string> cache_dir;
  std::string out;
  std::size_t workers = 4;

  auto common = [&](CLI::App* sub, bool needs_out = true) {
    sub->add_option("--seed", seed, "Seed; overrides the config");
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--cache-dir", cache_dir, "Response cache directory");
    auto* o = sub->add_option("--out", out, "Output directory");
    if (needs_out) o->required();
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with embeddings and a config");
  common(synth);
  std::optional<int> per_domain, max_steps;
  synth->add_option("--procedures-per-domain", per_domain);
  synth->add_option("--max-steps", max_steps);

  auto* forge = app.add_subcommand("forge", "Build benchmark instances, splits and statistics");
  common(forge);

  auto* run = app.add_subcommand("run", "Run a prediction mode over a dataset");
  common(run);
  std::string dataset, mode = "cop", provider = "oracle";
  run->add_option("--dataset", dataset, "Instances JSONL")->required();
  run->add_option("--mode", mode,
                  "baseline | baseline:cot | cop | ablation:<phases> | clip:p1|p3|full | subtasks:<kinds>|all");
  run->add_option("--provider", provider, "Provider name from the config");
  run->add_option("--workers", workers, "Concurrent instances");

  auto* eval = app.add_subcommand("eval", "Score results against gold instances");
  common(eval);
  std::vector<std::string> results;
  std::string gold, metrics = "accuracy", group_by = "none";
  eval->add_option("--results", results, "Results JSONL (repeatable)")->required();
  eval->add_option("--gold", gold, "Gold instances JSONL")->required();
  eval->add_option("--metrics", metrics, "Comma list of accuracy, similarity, llm_score");
  eval->add_option("--group-by", group_by, "none | domain | step_length_bucket");

  auto* subtasks = app.add_subcommand("subtasks", "Diagnostic sub-tasks");
  subtasks->require_subcommand(1);
  auto* gen = subtasks->add_subcommand("generate", "Write sub-task items");
  common(gen);
  std::string kinds = "all";
  gen->add_option("--dataset", dataset, "Instances JSONL")->required();
  gen->add_option("--kinds", kinds, "Comma list of SIV, CSI, NSP, DPA, CPM or all");
  auto* score = subtasks->add_subcommand("score", "Score responses against sub-task items");
  common(score);
  std::string items, responses;
  score->add_option("--items", items, "Sub-task items JSONL")->required();
  score->add_option("--responses", responses, "Responses JSONL {id, response}")->required();

  auto* embed = app.add_subcommand("embed", "Embedding store utilities");
  embed->require_subcommand(1);
  auto* import = embed->add_subcommand("import", "Convert vectors into a store file");
  common(import);
  std::string input;
  std::optional<std::size_t> dim;
  std::optional<std::string> corpus;
  import->add_option("--input", input, "JSONL, CSV or TSV vectors")->required();
  import->add_option("--dim", dim, "Expected dimension");
  import->add_option("--corpus", corpus, "Corpus JSONL for domain tags");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = [&] {
      return cli::Config::load(config_path ? std::optional<fs::path>(*config_path) : std::nullopt);
    };
    std::optional<fs::path> cache;
    if (cache_dir) cache = fs::path(*cache_dir);

    if (*synth) {
      cli::SynthOptions o{out, seed.value_or(0), per_domain, max_steps};
      const auto manifest = cli::cmd_synth(o);
      std::cout << "synth: " << manifest["ledger"]["procedures"] << " procedures written to " << out << "\n";
    } else if (*forge) {
      const auto manifest = cli::cmd_forge({config(), out, seed});
      std::cout << "forge: " << manifest["instances"] << " instances (" << manifest["train"] << " train, "
                << manifest["test"] << " test)\n";
    } else if (*run) {
      cli::RunOptions o{config(), dataset, mode, provider, out, cache, seed, workers};
      const auto summary = cli::cmd_run(o);
      std::cout << "run " << mode << ": " << summary.total << " results, " << summary.failed << " failed, "
                << summary.manifest["requests"] << " requests\n";
      if (summary.exceeded()) {
        std::cerr << "failure fraction exceeds " << summary.max_failure_fraction << "\n";
        return cli::kExitFailureFraction;
      }
    } else if (*eval) {
      cli::EvalCliOptions o;
      o.config = config();
      for (const auto& r : results) o.results.emplace_back(r);
      o.gold = gold;
      o.metrics = split_csv(metrics);
      o.group_by = group_by;
      o.out = out;
      o.cache_dir = cache;
      std::cout << render_text(cli::cmd_eval(o));
    } else if (*gen) {
      const auto n = cli::cmd_subtasks_generate(dataset, split_csv(kinds), seed.value_or(0), out, config());
      std::cout << "subtasks: " << n << " items\n";
    } else if (*score) {
      const auto report = cli::cmd_subtasks_score(items, responses, out);
      for (const auto& [kind, t] : report.per_kind) {
        std::cout << kind << ": " << format_fixed(t.accuracy()) << " (" << t.total << " items)\n";
      }
    } else if (*import) {
      const auto n = cli::cmd_embed_import(input, out, dim,
                                           corpus ? std::optional<fs::path>(*corpus) : std::nullopt);
      std::cout << "embed import: " << n << " vectors\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.name() << "]: " << e.what() << "\n";
    return is_input_error(e.code()) ? cli::kExitInput : cli::kExitInternal;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [ParseError]: " << e.what() << "\n";
    return cli::kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return cli::kExitInternal;
  }
  return cli::kExitOk;
}
