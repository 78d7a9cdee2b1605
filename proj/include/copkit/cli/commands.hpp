#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/cop/batch.hpp"
#include "copkit/cop/clip.hpp"
#include "copkit/cop/oracle.hpp"
#include "copkit/cop/pipeline.hpp"
#include "copkit/core/corpus.hpp"
#include "copkit/core/io.hpp"
#include "copkit/forge/overlap.hpp"
#include "copkit/forge/split.hpp"
#include "copkit/forge/stats.hpp"
#include "copkit/forge/synth.hpp"
#include "copkit/gateway/cache.hpp"
#include "copkit/gateway/http_provider.hpp"
#include "copkit/gateway/scripted.hpp"
#include "copkit/gateway/usage.hpp"
#include "copkit/metrics/evaluate.hpp"
#include "copkit/subtasks/subtasks.hpp"

namespace copkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInput = 2, kExitFailureFraction = 3 };

/// Declarative run configuration. Relative paths resolve against the file's directory.
class Config {
 public:
  Config() = default;
  Config(json raw, fs::path base) : raw_(std::move(raw)), base_(std::move(base)) {}

  static Config load(const std::optional<fs::path>& path) {
    if (!path) return Config(json::object(), fs::current_path());
    json raw;
    try {
      raw = json::parse(io::read_file(*path));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kConfigError, path->string() + ": " + e.what());
    }
    if (!raw.is_object()) throw Error(ErrorCode::kConfigError, path->string() + ": config must be a JSON object");
    return Config(std::move(raw), fs::absolute(*path).parent_path());
  }

  const json& raw() const { return raw_; }
  json section(const std::string& key) const { return raw_.value(key, json::object()); }
  bool has(const std::string& key) const { return raw_.contains(key) && !raw_.at(key).is_null(); }

  fs::path path(const std::string& key) const {
    if (!has(key)) throw Error(ErrorCode::kConfigError, "config is missing '" + key + "'");
    return resolve(raw_.at(key).get<std::string>());
  }

  std::optional<fs::path> optional_path(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return resolve(raw_.at(key).get<std::string>());
  }

  fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : base_ / p; }

  std::uint64_t seed(std::optional<std::uint64_t> override_seed) const {
    if (override_seed) return *override_seed;
    return raw_.value("seed", std::uint64_t{0});
  }

 private:
  json raw_ = json::object();
  fs::path base_;
};

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Manifest fields that legitimately differ between identical runs live under "runtime".
inline void write_manifest(const fs::path& out, json manifest, const std::string& started_at,
                           json runtime = json::object()) {
  runtime["started_at"] = started_at;
  runtime["finished_at"] = utc_now();
  manifest["runtime"] = std::move(runtime);
  io::write_atomic(out / "manifest.json", manifest.dump(2) + "\n");
}

inline PipelineConfig pipeline_config(const Config& config) {
  const json p = config.section("pipeline");
  PipelineConfig pc;
  if (p.contains("phases")) pc.phases = p.at("phases").get<std::set<int>>();
  if (p.contains("retrieval_mode")) pc.retrieval_mode = parse_retrieval_mode(p.at("retrieval_mode").get<std::string>());
  pc.score_scale_max = p.value("score_scale_max", pc.score_scale_max);
  pc.chain_of_thought = p.value("chain_of_thought", false);
  pc.decoding.temperature = p.value("temperature", pc.decoding.temperature);
  pc.decoding.max_output_tokens = p.value("max_output_tokens", pc.decoding.max_output_tokens);
  if (p.contains("templates_dir")) {
    pc.templates = TemplateSet::from_directory(config.resolve(p.at("templates_dir").get<std::string>()));
  }
  pc.validate();
  return pc;
}

/// Providers named in the config, each wrapped in a gateway and optionally a cache.
class ProviderRegistry {
 public:
  ProviderRegistry(const Config& config, const std::vector<Instance>* instances, std::optional<fs::path> cache_dir,
                   TemplateSet templates)
      : config_(config), instances_(instances), cache_dir_(std::move(cache_dir)), templates_(std::move(templates)) {
    const json g = config.section("gateway");
    options_.max_in_flight = g.value("max_in_flight", options_.max_in_flight);
    options_.max_attempts = g.value("max_attempts", options_.max_attempts);
    options_.initial_backoff = std::chrono::milliseconds(g.value("initial_backoff_ms", 200));
    if (g.contains("token_ceiling") && !g.at("token_ceiling").is_null()) {
      options_.token_ceiling = g.at("token_ceiling").get<std::int64_t>();
    }
  }

  /// `oracle` is always available when instances are loaded, even without a config entry.
  Provider& get(const std::string& name) {
    auto it = built_.find(name);
    if (it != built_.end()) return *it->second.gateway;
    Built b;
    b.inner = make(name);
    ProviderPtr wrapped = b.inner;
    if (cache_dir_) {
      b.cache = std::make_shared<CachingProvider>(b.inner, *cache_dir_);
      wrapped = b.cache;
    }
    b.gateway = std::make_shared<Gateway>(wrapped, options_);
    return *built_.emplace(name, std::move(b)).first->second.gateway;
  }

  json stats() const {
    json out = json::object();
    for (const auto& [name, b] : built_) {
      out[name] = {{"provider_id", b.inner->id()}, {"requests", b.gateway->requests()},
                   {"tokens", b.gateway->tokens_used()}};
    }
    return out;
  }

  json cache_stats() const {
    json out = json::object();
    for (const auto& [name, b] : built_) {
      if (b.cache) out[name] = {{"hits", b.cache->hits()}, {"misses", b.cache->misses()}};
    }
    return out;
  }

  std::int64_t total_requests() const {
    std::int64_t n = 0;
    for (const auto& [name, b] : built_) n += static_cast<std::int64_t>(b.gateway->requests());
    return n;
  }

 private:
  struct Built {
    ProviderPtr inner;
    std::shared_ptr<CachingProvider> cache;
    std::shared_ptr<Gateway> gateway;
  };

  ProviderPtr make(const std::string& name) {
    const json providers = config_.section("providers");
    json spec = providers.contains(name) ? providers.at(name) : json::object();
    if (!providers.contains(name) && name != "oracle" && name != "oracle-rigged") {
      throw Error(ErrorCode::kConfigError, "unknown provider '" + name + "'");
    }
    const std::string kind = spec.value("kind", name == "oracle-rigged" ? "oracle-rigged" : "oracle");
    if (kind == "oracle" || kind == "oracle-rigged") {
      if (!instances_) throw Error(ErrorCode::kConfigError, "the oracle provider needs a dataset");
      OracleOptions o;
      o.direct_answers_current = kind == "oracle-rigged" || spec.value("direct_answers_current", false);
      return make_oracle_provider(*instances_, o, templates_, spec.value("id", name));
    }
    if (kind == "scripted") {
      if (!spec.contains("id")) spec["id"] = name;
      return ScriptedProvider::from_json(spec);
    }
    if (kind == "openai" || kind == "http") {
      HttpProviderConfig h;
      h.id = spec.value("id", name);
      h.base_url = spec.value("base_url", std::string{});
      h.path = spec.value("path", h.path);
      h.model = spec.value("model", std::string{});
      h.image_root = config_.resolve(spec.value("image_root", std::string(".")));
      h.timeout_seconds = spec.value("timeout_seconds", h.timeout_seconds);
      return std::make_shared<HttpProvider>(h);
    }
    throw Error(ErrorCode::kConfigError, "provider '" + name + "' has unknown kind '" + kind + "'");
  }

  const Config& config_;
  const std::vector<Instance>* instances_;
  std::optional<fs::path> cache_dir_;
  TemplateSet templates_;
  GatewayOptions options_;
  std::map<std::string, Built> built_;
};

// ---------------------------------------------------------------- synth

struct SynthOptions {
  fs::path out;
  std::uint64_t seed = 0;
  std::optional<int> procedures_per_domain;
  std::optional<int> max_steps;
};

/// Synthetic corpus, embeddings and a ready-to-use config.json.
inline json cmd_synth(const SynthOptions& opts) {
  const std::string started = utc_now();
  SynthConfig sc;
  sc.seed = opts.seed;
  if (opts.procedures_per_domain) sc.procedures_per_domain = *opts.procedures_per_domain;
  if (opts.max_steps) sc.max_steps = *opts.max_steps;
  const SynthCorpus synth = generate_synthetic_corpus(sc);
  fs::create_directories(opts.out);
  save_corpus(opts.out / "corpus.jsonl", synth.corpus);
  save_store(opts.out / "images.jsonl", synth.image_store);
  save_store(opts.out / "steps.jsonl", synth.step_store);
  save_store(opts.out / "texts.jsonl", synth.text_store);
  io::write_atomic(opts.out / "synth_ledger.json", synth.ledger.dump(2) + "\n");
  json config{{"seed", opts.seed},
              {"corpus", "corpus.jsonl"},
              {"embeddings", "images.jsonl"},
              {"step_embeddings", "steps.jsonl"},
              {"text_embeddings", "texts.jsonl"},
              {"forge", ForgeConfig{}},
              {"split", SplitSpec{}},
              {"providers", {{"oracle", {{"kind", "oracle"}}}}},
              {"judges", {"oracle"}},
              {"max_failure_fraction", 0.5}};
  config["forge"]["seed"] = opts.seed;
  io::write_atomic(opts.out / "config.json", config.dump(2) + "\n");
  json manifest{{"command", "synth"}, {"seed", opts.seed}, {"ledger", synth.ledger},
                {"corpus_hash", io::sha256_file(opts.out / "corpus.jsonl")}};
  write_manifest(opts.out, manifest, started);
  return manifest;
}

// ---------------------------------------------------------------- forge

struct ForgeOptions {
  Config config;
  fs::path out;
  std::optional<std::uint64_t> seed;
};

inline json cmd_forge(const ForgeOptions& opts) {
  const std::string started = utc_now();
  const Config& config = opts.config;
  ForgeConfig fc = config.section("forge").get<ForgeConfig>();
  if (opts.seed || !config.section("forge").contains("seed")) fc.seed = config.seed(opts.seed);
  SplitSpec spec = config.section("split").get<SplitSpec>();
  if (!config.section("split").contains("ood_domains")) spec.ood_domains = {fc.ood_domains.begin(), fc.ood_domains.end()};

  const Corpus corpus = load_corpus(config.path("corpus"));
  const EmbeddingStore images = load_store(config.path("embeddings"));
  const ForgeOutput forged = forge_dataset(corpus, images, fc);
  const SplitResult split = split_dataset(forged.instances, spec, fc.seed);

  fs::create_directories(opts.out);
  io::write_atomic(opts.out / "instances.jsonl", io::to_jsonl(forged.instances));
  io::write_atomic(opts.out / "train.jsonl", io::to_jsonl(split.train));
  io::write_atomic(opts.out / "test.jsonl", io::to_jsonl(split.test));

  StatsTable table = corpus_stats({{"train", split.train}, {"test", split.test}});
  io::write_atomic(opts.out / "stats.json", to_json(table).dump(2) + "\n");
  io::write_atomic(opts.out / "stats.txt", render_text(table));

  json overlap = nullptr;
  if (auto texts_path = config.optional_path("text_embeddings")) {
    const EmbeddingStore texts = load_store(*texts_path);
    auto procedure_ids = [](const std::vector<Instance>& v) {
      std::set<std::string> ids;
      for (const auto& in : v) ids.insert(in.visual.source_procedure);
      return std::vector<std::string>(ids.begin(), ids.end());
    };
    const auto train_ids = procedure_ids(split.train);
    if (!train_ids.empty()) {
      overlap = to_json(semantic_overlap(train_ids, procedure_ids(split.test), texts));
      io::write_atomic(opts.out / "overlap.json", overlap.dump(2) + "\n");
    }
  }

  json skipped = json::array();
  for (const auto& s : forged.skipped) skipped.push_back({{"image", s.visual.image_id}, {"reason", s.reason}});
  json manifest{{"command", "forge"},
                {"seed", fc.seed},
                {"forge", fc},
                {"split", spec},
                {"corpus_hash", io::sha256_file(config.path("corpus"))},
                {"embeddings_hash", io::sha256_file(config.path("embeddings"))},
                {"instances", forged.instances.size()},
                {"train", split.train.size()},
                {"test", split.test.size()},
                {"instances_hash", io::sha256_file(opts.out / "instances.jsonl")},
                {"skipped", skipped},
                {"invalid_procedures", forged.invalid_procedures},
                {"warnings", split.warnings}};
  if (!overlap.is_null()) manifest["median_overlap"] = overlap.at("median_cosine");
  write_manifest(opts.out, manifest, started);
  return manifest;
}

// ---------------------------------------------------------------- run

struct RunOptions {
  Config config;
  fs::path dataset;
  std::string mode = "cop";
  std::string provider = "oracle";
  fs::path out;
  std::optional<fs::path> cache_dir;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 4;
};

struct RunSummary {
  std::size_t total = 0;
  std::size_t failed = 0;
  double max_failure_fraction = 1.0;
  json manifest;
  bool exceeded() const {
    return total > 0 && static_cast<double>(failed) / static_cast<double>(total) > max_failure_fraction;
  }
};

namespace detail {

inline void write_results(const fs::path& out, const std::vector<RunResult>& results) {
  std::string lines;
  for (const auto& r : results) {
    lines += result_record(r).dump() + "\n";
    const fs::path trace = out / "traces" / (trace_hash(r.trace) + ".json");
    if (!fs::exists(trace)) io::write_atomic(trace, json(r.trace).dump(2) + "\n");
  }
  io::write_atomic(out / "results.jsonl", lines);
}

inline RunSummary run_subtasks_mode(const RunOptions& opts, const std::vector<Instance>& instances,
                                    const std::string& which, ProviderRegistry& registry,
                                    const PipelineConfig& pc, std::uint64_t seed) {
  std::vector<SubTaskKind> kinds;
  if (which == "all") {
    kinds.assign(kAllSubTasks.begin(), kAllSubTasks.end());
  } else {
    std::string token;
    std::istringstream is(which);
    while (std::getline(is, token, ',')) kinds.push_back(parse_subtask_kind(token));
  }
  const std::vector<SubTaskItem> items = generate_subtasks(instances, kinds, seed, pc.templates);
  Provider& provider = registry.get(opts.provider);
  std::vector<std::string> responses(items.size());
  std::vector<std::string> errors(items.size());
  {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::max<std::size_t>(opts.workers, 1); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
          try {
            responses[i] = provider.complete(subtask_request(items[i], pc.decoding)).text;
          } catch (const Error& e) {
            errors[i] = std::string(e.name()) + ": " + e.what();
          }
        }
      });
    }
  }
  const SubTaskReport report = score_subtasks(items, responses);
  std::string item_lines, response_lines;
  RunSummary summary;
  summary.total = items.size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    item_lines += json(items[i]).dump() + "\n";
    json r{{"id", items[i].id}, {"response", responses[i]}};
    if (!errors[i].empty()) {
      r["error"] = errors[i];
      ++summary.failed;
    }
    response_lines += r.dump() + "\n";
  }
  io::write_atomic(opts.out / "subtasks.jsonl", item_lines);
  io::write_atomic(opts.out / "responses.jsonl", response_lines);
  io::write_atomic(opts.out / "subtask_report.json", to_json(report).dump(2) + "\n");
  std::vector<std::vector<std::string>> rows{{"kind", "n", "accuracy", "unparseable"}};
  for (const auto& [kind, t] : report.per_kind) {
    rows.push_back({kind, std::to_string(t.total), format_fixed(t.accuracy()), std::to_string(t.unparseable)});
  }
  io::write_atomic(opts.out / "subtask_report.txt", render_table(rows));
  return summary;
}

}  // namespace detail

inline RunSummary cmd_run(const RunOptions& opts) {
  const std::string started = utc_now();
  const Config& config = opts.config;
  const std::vector<Instance> instances = load_instances(opts.dataset);
  PipelineConfig pc = pipeline_config(config);
  const std::uint64_t seed = config.seed(opts.seed);
  ProviderRegistry registry(config, &instances, opts.cache_dir, pc.templates);
  fs::create_directories(opts.out);

  const std::string& mode = opts.mode;
  RunSummary summary;
  summary.max_failure_fraction = config.raw().value("max_failure_fraction", 1.0);
  json provider_ids = json::array();
  std::string config_hash = pc.hash();

  if (mode.rfind("subtasks:", 0) == 0) {
    RunSummary s = detail::run_subtasks_mode(opts, instances, mode.substr(9), registry, pc, seed);
    summary.total = s.total;
    summary.failed = s.failed;
    provider_ids.push_back(opts.provider);
  } else {
    std::function<RunResult(const Instance&)> fn;
    std::optional<EmbeddingStore> image_store, step_store;
    Provider* provider = nullptr;
    if (mode == "baseline" || mode == "baseline:cot") {
      pc.chain_of_thought = mode == "baseline:cot";
      config_hash = pc.hash();
      provider = &registry.get(opts.provider);
      fn = [&](const Instance& in) { return baseline_direct(in, *provider, pc); };
    } else if (mode == "cop" || mode.rfind("ablation:", 0) == 0) {
      if (mode != "cop") pc.phases = parse_phase_set(mode.substr(9));
      pc.validate();
      config_hash = pc.hash();
      provider = &registry.get(opts.provider);
      fn = [&](const Instance& in) { return run_cop(in, pc, *provider); };
    } else if (mode.rfind("clip:", 0) == 0) {
      const ClipMode cm = parse_clip_mode(mode.substr(5));
      image_store = load_store(config.path("embeddings"));
      step_store = load_store(config.path("step_embeddings"));
      if (cm != ClipMode::kFull) provider = &registry.get(opts.provider);
      fn = [&, cm](const Instance& in) {
        return clip_variant(in, cm, ClipStores{*image_store, *step_store}, provider, pc);
      };
    } else {
      throw Error(ErrorCode::kConfigError, "unknown run mode '" + mode + "'");
    }
    if (provider) provider_ids.push_back(opts.provider);
    const std::vector<RunResult> results = run_batch(instances, fn, opts.workers);
    detail::write_results(opts.out, results);
    summary.total = results.size();
    for (const auto& r : results) summary.failed += r.error ? 1 : 0;
    summary.manifest["tokens"] = to_json(usage_report(results));
  }

  json manifest{{"command", "run"},
                {"mode", mode},
                {"seed", seed},
                {"config_hash", config_hash},
                {"template_hash", pc.templates.hash()},
                {"dataset_hash", io::sha256_file(opts.dataset)},
                {"provider_ids", provider_ids},
                {"providers", registry.stats()},
                {"requests", registry.total_requests()},
                {"instances", instances.size()},
                {"results", summary.total},
                {"failed", summary.failed},
                {"max_failure_fraction", summary.max_failure_fraction}};
  if (summary.manifest.contains("tokens")) manifest["tokens"] = summary.manifest["tokens"];
  write_manifest(opts.out, manifest, started, {{"cache", registry.cache_stats()}});
  summary.manifest = manifest;
  return summary;
}

// ---------------------------------------------------------------- eval

struct EvalCliOptions {
  Config config;
  std::vector<fs::path> results;
  fs::path gold;
  std::vector<std::string> metrics{"accuracy"};
  std::string group_by = "none";
  fs::path out;
  std::optional<fs::path> cache_dir;
};

inline EvalReport cmd_eval(const EvalCliOptions& opts) {
  const std::string started = utc_now();
  const std::vector<Instance> gold = load_instances(opts.gold);
  EvalOptions eo;
  eo.metrics = opts.metrics;
  eo.group_by = parse_group_by(opts.group_by);

  std::optional<EmbeddingStore> tokens;
  const json sim = opts.config.section("similarity");
  if (sim.contains("token_embeddings")) {
    tokens = load_store(opts.config.resolve(sim.at("token_embeddings").get<std::string>()));
    eo.similarity = SimilarityScorer(&*tokens);
  }
  const PipelineConfig pc = pipeline_config(opts.config);
  ProviderRegistry registry(opts.config, &gold, opts.cache_dir, pc.templates);
  JudgePanel panel;
  panel.templates = pc.templates;
  if (std::find(eo.metrics.begin(), eo.metrics.end(), "llm_score") != eo.metrics.end()) {
    const json judges = opts.config.raw().value("judges", json::array({"oracle"}));
    for (const auto& name : judges) panel.judges.push_back(&registry.get(name.get<std::string>()));
    eo.panel = &panel;
  }
  eo.validate();

  EvalReport report;
  json inputs = json::array();
  for (const fs::path& path : opts.results) {
    const std::vector<ResultRecord> records = load_results(path);
    std::vector<std::string> order;
    std::map<std::string, std::vector<ResultRecord>> by_mode;
    for (const auto& r : records) {
      if (!by_mode.count(r.mode)) order.push_back(r.mode);
      by_mode[r.mode].push_back(r);
    }
    for (const auto& m : order) report.modes.push_back(evaluate_run(by_mode[m], gold, eo));
    inputs.push_back({{"path", path.filename().string()}, {"hash", io::sha256_file(path)}});
  }

  fs::create_directories(opts.out);
  io::write_atomic(opts.out / "report.json", to_json(report).dump(2) + "\n");
  io::write_atomic(opts.out / "report.txt", render_text(report));
  io::write_atomic(opts.out / "report.csv", render_csv(report));
  json manifest{{"command", "eval"},
                {"metrics", eo.metrics},
                {"group_by", to_string(eo.group_by)},
                {"similarity_mode", eo.similarity.mode()},
                {"gold_hash", io::sha256_file(opts.gold)},
                {"results", inputs},
                {"judge_requests", registry.total_requests()}};
  write_manifest(opts.out, manifest, started, {{"cache", registry.cache_stats()}});
  return report;
}

// ---------------------------------------------------------------- subtasks

inline std::size_t cmd_subtasks_generate(const fs::path& dataset, const std::vector<std::string>& kinds,
                                         std::uint64_t seed, const fs::path& out, const Config& config = {}) {
  const std::vector<Instance> instances = load_instances(dataset);
  std::vector<SubTaskKind> parsed;
  for (const auto& k : kinds) {
    if (k == "all") {
      parsed.assign(kAllSubTasks.begin(), kAllSubTasks.end());
    } else {
      parsed.push_back(parse_subtask_kind(k));
    }
  }
  const auto items = generate_subtasks(instances, parsed, seed, pipeline_config(config).templates);
  io::write_atomic(out, io::to_jsonl(items));
  return items.size();
}

/// Responses JSONL lines `{"id", "response"}`; items without a response score as unparseable.
inline SubTaskReport cmd_subtasks_score(const fs::path& items_path, const fs::path& responses_path,
                                        const fs::path& out) {
  std::vector<SubTaskItem> items;
  io::for_each_jsonl(items_path, [&](const json& j, std::size_t line) {
    try {
      items.push_back(j.get<SubTaskItem>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, items_path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  std::map<std::string, std::string> by_id;
  io::for_each_jsonl(responses_path, [&](const json& j, std::size_t line) {
    if (!j.contains("id") || !j.contains("response")) {
      throw Error(ErrorCode::kParseError, responses_path.string() + ":" + std::to_string(line) +
                                              ": expected {\"id\", \"response\"}");
    }
    by_id[j.at("id").get<std::string>()] = j.at("response").get<std::string>();
  });
  std::vector<std::string> responses;
  for (const auto& item : items) {
    auto it = by_id.find(item.id);
    responses.push_back(it == by_id.end() ? std::string{} : it->second);
  }
  const SubTaskReport report = score_subtasks(items, responses);
  io::write_atomic(out, to_json(report).dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------- embed import

/// Canonical store JSONL from JSONL (`id` + `vector`|`values`|`embedding`, optional `domain`)
/// or delimited text (`id,v1,v2,...`). Domain tags come from the corpus when given.
inline std::size_t cmd_embed_import(const fs::path& input, const fs::path& out, std::optional<std::size_t> dim,
                                    const std::optional<fs::path>& corpus_path) {
  std::optional<Corpus> corpus;
  if (corpus_path) corpus = load_corpus(*corpus_path);
  EmbeddingStore store(dim.value_or(0));
  auto tag_for = [&](const std::string& id, std::string tag) {
    if (tag.empty() && corpus) {
      if (auto loc = corpus->locate_image(id)) {
        tag = corpus->at(loc->procedure_id).domain;
      } else if (corpus->contains(id)) {
        tag = corpus->at(id).domain;
      }
    }
    return tag;
  };
  const std::string ext = input.extension().string();
  if (ext == ".jsonl" || ext == ".json" || ext == ".gz") {
    io::for_each_jsonl(input, [&](const json& j, std::size_t line) {
      const char* keys[] = {"vector", "values", "embedding"};
      const json* vec = nullptr;
      for (const char* k : keys) {
        if (j.contains(k)) vec = &j.at(k);
      }
      if (!j.contains("id") || !vec) {
        throw Error(ErrorCode::kParseError, input.string() + ":" + std::to_string(line) + ": needs id and vector");
      }
      EmbeddingVector v{j.at("id").get<std::string>(), vec->get<std::vector<double>>()};
      store.add(std::move(v), tag_for(j.at("id").get<std::string>(), j.value("domain", std::string{})));
    });
  } else {
    const char sep = ext == ".tsv" ? '\t' : ',';
    std::size_t line_no = 0;
    const std::string content = io::read_file(input);
    for (std::string_view line : text::split_lines(content)) {
      ++line_no;
      if (text::trim_view(line).empty()) continue;
      std::vector<std::string> cells;
      std::string cell;
      std::istringstream is{std::string(line)};
      while (std::getline(is, cell, sep)) cells.push_back(text::trim(cell));
      if (cells.size() < 2) {
        throw Error(ErrorCode::kParseError, input.string() + ":" + std::to_string(line_no) + ": needs id and values");
      }
      EmbeddingVector v{cells[0], {}};
      for (std::size_t i = 1; i < cells.size(); ++i) {
        try {
          std::size_t used = 0;
          v.values.push_back(std::stod(cells[i], &used));
          if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kParseError,
                      input.string() + ":" + std::to_string(line_no) + ": bad number '" + cells[i] + "'");
        }
      }
      store.add(std::move(v), tag_for(cells[0], {}));
    }
  }
  save_store(out, store);
  return store.size();
}

}  // namespace copkit::cli
