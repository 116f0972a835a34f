// Copyright 2026 The semsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "semsteer/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "semsteer/augment.hpp"
#include "semsteer/config.hpp"
#include "semsteer/eval.hpp"
#include "semsteer/pipeline.hpp"
#include "semsteer/records.hpp"
#include "semsteer/remote.hpp"

namespace semsteer::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Shared plumbing

struct RunFlags {
  std::string config_path;
  std::optional<std::string> paradigm;
  std::optional<std::string> backend;
  std::optional<std::string> task;
  std::optional<std::size_t> n;
  std::optional<double> lambda0;
  std::optional<double> eta_tok;
  std::optional<double> e_target;
  std::optional<std::size_t> top_k;
  std::optional<int> steps;
  std::optional<std::string> cv_mode;
  std::optional<std::size_t> workers;
  std::string prompts_path;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--config", f.config_path, "Run configuration file (overrides flags)");
  cmd.add_option("--paradigm", f.paradigm, "arm or mdm");
  cmd.add_option("--backend", f.backend, "synthetic or remote");
  cmd.add_option("--task", f.task, "se or mi");
  cmd.add_option("--n", f.n, "Samples (or pairs) per prompt");
  cmd.add_option("--lambda0", f.lambda0, "Initial tilt strength");
  cmd.add_option("--eta-tok", f.eta_tok, "Token-level adaptation rate");
  cmd.add_option("--e-target", f.e_target, "Target similarity");
  cmd.add_option("--top-k", f.top_k, "Restrict the proposal to the k most likely tokens");
  cmd.add_option("--steps", f.steps, "Denoising steps (mdm)");
  cmd.add_option("--cv-mode", f.cv_mode, "weighted_mean, known_mean or pathwise_entropy");
  cmd.add_option("--workers", f.workers, "Prompts processed concurrently");
  cmd.add_option("--prompts", f.prompts_path, "Prompt records {prompt_id, context, question}");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path, std::string("not valid JSON: ") + e.what());
  }
}

RunConfig resolve_config(const RunFlags& f) {
  json flags = json::object();
  if (f.paradigm) flags["paradigm"] = *f.paradigm;
  if (f.backend) flags["backend"] = *f.backend;
  if (f.task) flags["task"] = *f.task;
  if (f.n) flags["n"] = *f.n;
  if (f.workers) flags["workers"] = *f.workers;
  json sampler = json::object();
  if (f.lambda0) sampler["lambda0"] = *f.lambda0;
  if (f.eta_tok) sampler["eta_tok"] = *f.eta_tok;
  if (f.e_target) sampler["e_target"] = *f.e_target;
  if (f.top_k) sampler["top_k"] = *f.top_k;
  if (f.steps) sampler["steps"] = *f.steps;
  if (!sampler.empty()) flags["sampler"] = sampler;
  if (f.cv_mode) flags["estimator"] = {{"cv_mode", *f.cv_mode}};

  json doc;
  if (!f.config_path.empty()) {
    doc = read_json_file(f.config_path);
    // Task defaults (N, clustering mode) are settled before explicit flags apply.
    if (doc.is_object() && doc.contains("task")) flags["task"] = doc.at("task");
  }
  RunConfig cfg = parse_run_config(flags);
  if (!f.config_path.empty()) cfg = parse_run_config(doc, cfg);
  if (!f.prompts_path.empty() && cfg.prompts.empty()) cfg.prompts = read_prompts(f.prompts_path);
  if (cfg.remote.logits_url.empty()) {
    if (const char* v = std::getenv("SEMSTEER_LOGITS_URL")) cfg.remote.logits_url = v;
  }
  if (cfg.remote.nli_url.empty()) {
    if (const char* v = std::getenv("SEMSTEER_NLI_URL")) cfg.remote.nli_url = v;
  }
  cfg.validate();
  return cfg;
}

/// Models and scorers shared by every prompt of a run.
struct Backends {
  std::optional<World> world;
  std::shared_ptr<const SimilarityScorer> scorer;
  std::shared_ptr<const HttpTransport> logits;
};

Backends make_backends(const RunConfig& cfg) {
  Backends b;
  if (cfg.backend == Backend::kSynthetic) {
    b.world = build_world(cfg.world);
    b.scorer = oracle_scorer(b.world->labeler, cfg.scorer_noise);
  } else {
    b.logits = std::make_shared<HttpTransport>(cfg.remote.logits_url, cfg.remote.http);
    auto nli = std::make_shared<HttpTransport>(cfg.remote.nli_url, cfg.remote.http);
    b.scorer = std::make_shared<RemoteNliClient>(nli, cfg.arm.marking);
  }
  return b;
}

struct PromptJob {
  PromptSpec spec;
  std::string prompt;  // text used for clustering
};

std::vector<PromptJob> make_jobs(const RunConfig& cfg, const Backends& b) {
  std::vector<PromptJob> jobs;
  if (cfg.backend == Backend::kSynthetic) {
    if (cfg.prompts.empty()) return {{{"p0", "", ""}, b.world->prompt}};
    for (const auto& p : cfg.prompts) jobs.push_back({p, b.world->prompt});
    return jobs;
  }
  for (const auto& p : cfg.prompts) jobs.push_back({p, render_prompt(cfg.se_template, p)});
  return jobs;
}

Rng prompt_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return Rng(seq);
}

std::optional<double> known_mean_for(const RunConfig& cfg, const Backends& b) {
  if (cfg.cv_mode != CvMode::kKnownMean) return std::nullopt;
  std::optional<double> m;
  if (b.world) m = b.world->control_mean(cfg.mdm.steps);
  if (!m) throw ConfigError("estimator.cv_mode", "known_mean needs an enumerable autoregressive world");
  return m;
}

SeRunConfig se_config(const RunConfig& cfg, const Backends& b, const PromptJob& job) {
  SeRunConfig c;
  c.prompt_id = job.spec.id;
  c.prompt = job.prompt;
  c.n = cfg.n;
  c.cluster = cfg.cluster;
  c.stopping = cfg.stopping;
  c.seq_lambda = cfg.seq_lambda;
  if (cfg.stopping) c.seq_lambda_window = cfg.stopping->window;
  c.cv_mode = cfg.cv_mode;
  c.known_mean = known_mean_for(cfg, b);
  return c;
}

MiRunConfig mi_config(const RunConfig& cfg, const Backends& b, const PromptJob& job) {
  MiRunConfig c;
  c.prompt_id = job.spec.id;
  c.prompt = job.prompt;
  c.n = cfg.n;
  c.cluster = cfg.cluster;
  c.stopping = cfg.stopping;
  c.cv_mode = cfg.cv_mode;
  c.known_mean = known_mean_for(cfg, b);
  return c;
}

/// Runs `fn(i)` for every job index on `workers` threads; the first error is
/// rethrown after all threads finish.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(body);
  body();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string paradigm_name(Paradigm p) { return p == Paradigm::kArm ? "arm" : "mdm"; }

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
  RunFlags flags;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_sample(const SampleArgs& a) {
  const RunConfig cfg = resolve_config(a.flags);
  const Backends b = make_backends(cfg);
  const auto jobs = make_jobs(cfg, b);
  auto out = create_output(a.output);
  std::vector<std::vector<json>> results(jobs.size());

  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const PromptJob& job = jobs[i];
    Rng rng = prompt_rng(a.seed, i);
    json run = {{"schema", kRecordSchema},
                {"kind", "run"},
                {"prompt_id", job.spec.id},
                {"prompt", job.prompt},
                {"task", cfg.task == Task::kSe ? "se" : "mi"},
                {"paradigm", paradigm_name(cfg.paradigm)},
                {"seed", a.seed},
                {"n", cfg.n}};
    std::vector<json>& records = results[i];
    if (cfg.task == Task::kMi) {
      std::shared_ptr<const ArmChain> chain;
      if (b.world) {
        chain = b.world->pair;
      } else {
        RemoteArmConfig first{render_prompt(cfg.se_template, job.spec), cfg.remote.top_k, cfg.remote.eos_id};
        chain = std::make_shared<RemoteArmChain>(
            b.logits, first, cfg.mi_template,
            std::unordered_map<std::string, std::string>{{"context", job.spec.context},
                                                         {"question", job.spec.question}});
      }
      const MiRun r = run_mi(*chain, cfg.arm, *b.scorer, mi_config(cfg, b, job), rng);
      records.push_back(run);
      for (std::size_t k = 0; k < r.pairs.size(); ++k) {
        records.push_back(pair_record(job.spec.id, k, r.pairs.samples()[k], r.pairs.normalized_weights()[k]));
      }
      return;
    }
    SeRun r;
    if (cfg.paradigm == Paradigm::kMdm) {
      const MdmSampler sampler(*b.world->mdm, cfg.mdm);
      r = run_se(sampler, *b.scorer, se_config(cfg, b, job), rng);
    } else if (b.world) {
      const ArmSampler sampler(*b.world->arm, cfg.arm);
      r = run_se(sampler, *b.scorer, se_config(cfg, b, job), rng);
    } else {
      const RemoteArmModel model(b.logits, {job.prompt, cfg.remote.top_k, cfg.remote.eos_id});
      const ArmSampler sampler(model, cfg.arm);
      r = run_se(sampler, *b.scorer, se_config(cfg, b, job), rng);
    }
    run["lambda_starts"] = r.lambda_starts;
    records.push_back(run);
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      records.push_back(sample_record(job.spec.id, k, r.samples.samples()[k], r.samples.normalized_weights()[k]));
    }
  });

  for (const auto& rs : results) {
    for (const auto& r : rs) out << r.dump() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
  RunFlags flags;
  std::vector<std::string> inputs;
  std::string output;
};

struct TraceGroup {
  std::string prompt_id;
  std::string prompt;
  std::string task;
  std::map<std::size_t, SequenceSample> samples;
  std::map<std::size_t, SamplePair> pairs;
};

std::vector<TraceGroup> read_traces(const std::vector<std::string>& files) {
  std::vector<TraceGroup> groups;
  std::map<std::string, std::size_t> where;
  for (const auto& file : files) {
    for (const auto& r : read_jsonl(file)) {
      const json& v = r.value;
      if (!v.is_object() || v.value("schema", "") != kRecordSchema) {
        throw CorruptTrace(file, r.offset, "missing or unknown schema");
      }
      const std::string kind = v.value("kind", "");
      std::string id;
      try {
        id = v.at("prompt_id").get<std::string>();
      } catch (const json::exception& e) {
        throw CorruptTrace(file, r.offset, e.what());
      }
      auto [it, fresh] = where.emplace(id, groups.size());
      if (fresh) groups.push_back({id, "", "", {}, {}});
      TraceGroup& g = groups[it->second];
      try {
        if (kind == "run") {
          g.prompt = v.value("prompt", "");
          g.task = v.value("task", "");
        } else if (kind == "sample") {
          g.samples.emplace(v.at("index").get<std::size_t>(), sample_from_json(v.at("sample")));
        } else if (kind == "pair") {
          SamplePair p = SamplePair::make(sample_from_json(v.at("first")), sample_from_json(v.at("second")));
          if (std::abs(p.logp_joint - v.at("logp_joint").get<double>()) > 1e-9 ||
              std::abs(p.logq_joint - v.at("logq_joint").get<double>()) > 1e-9) {
            throw InvalidArgument("joint log-probabilities disagree with the answers");
          }
          g.pairs.emplace(v.at("index").get<std::size_t>(), std::move(p));
        } else {
          throw InvalidArgument("unexpected record kind '" + kind + "'");
        }
      } catch (const json::exception& e) {
        throw CorruptTrace(file, r.offset, e.what());
      } catch (const InvalidArgument& e) {
        throw CorruptTrace(file, r.offset, e.what());
      }
    }
  }
  return groups;
}

int cmd_estimate(const EstimateArgs& a) {
  const RunConfig cfg = resolve_config(a.flags);
  const auto groups = read_traces(a.inputs);
  const Backends b = make_backends(cfg);
  auto out = create_output(a.output);
  std::vector<EstimateReport> reports(groups.size());

  parallel_for(groups.size(), cfg.workers, [&](std::size_t i) {
    const TraceGroup& g = groups[i];
    const PromptJob job{{g.prompt_id, "", ""}, g.prompt};
    EstimateReport r;
    if (!g.pairs.empty()) {
      std::vector<SamplePair> pairs;
      for (const auto& [k, p] : g.pairs) pairs.push_back(p);
      MiRunConfig mc = mi_config(cfg, b, job);
      mc.n = pairs.size();
      if (mc.cluster.mode != ClusterMode::kThreshold) mc.cluster.mode = ClusterMode::kThreshold;
      r = estimate_mi(std::move(pairs), *b.scorer, mc).report;
    } else if (!g.samples.empty()) {
      std::vector<SequenceSample> samples;
      for (const auto& [k, s] : g.samples) samples.push_back(s);
      SeRunConfig sc = se_config(cfg, b, job);
      sc.n = samples.size();
      r = estimate_se(std::move(samples), *b.scorer, sc).report;
    } else {
      throw InvalidArgument("prompt '" + g.prompt_id + "' has no samples");
    }
    if (b.world) r.oracle_value = b.world->oracle_value(cfg.mdm.steps);
    reports[i] = std::move(r);
  });

  for (const auto& r : reports) out << report_record(r).dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string study;
  std::uint64_t seed = 0;
  std::string output;
  std::string summary;
};

struct SimRow {
  std::string world;
  double lambda = 0.0;
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  EstimateReport report;
  double rho = 0.0;
  std::optional<double> oracle;
};

std::uint64_t row_seed(std::uint64_t seed, std::size_t w, std::size_t l, std::size_t n, std::size_t r) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(w),    static_cast<std::uint32_t>(l),
                    static_cast<std::uint32_t>(n),    static_cast<std::uint32_t>(r)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_simulate(const SimulateArgs& a) {
  const json study = read_json_file(a.study);
  if (study.value("schema", "") != kStudySchema) throw ConfigError("schema", "expected " + std::string(kStudySchema));
  if (!study.contains("worlds") || !study.at("worlds").is_array() || study.at("worlds").empty()) {
    throw ConfigError("worlds", "must be a non-empty list");
  }
  const auto lambdas = study.value("lambda_grid", std::vector<double>{0.0});
  const auto ns = study.value("n_grid", std::vector<std::size_t>{16});
  const auto reps = study.value("replications", std::size_t{200});
  if (lambdas.empty()) throw ConfigError("lambda_grid", "must be non-empty");
  if (ns.empty()) throw ConfigError("n_grid", "must be non-empty");
  if (reps < 2) throw ConfigError("replications", "must be >= 2");

  json base = json::object();
  for (const char* key : {"paradigm", "sampler", "cluster", "estimator", "scorer"}) {
    if (study.contains(key)) base[key] = study.at(key);
  }

  struct Cell {
    RunConfig cfg;
    World world;
    std::string name;
  };
  std::vector<Cell> worlds;
  for (std::size_t w = 0; w < study.at("worlds").size(); ++w) {
    const json& entry = study.at("worlds").at(w);
    json doc = base;
    doc["world"] = entry.at("world");
    const std::string kind = entry.at("world").value("kind", "");
    if (kind == "random_mdm") doc["paradigm"] = "mdm";
    if (kind == "copy_pair" || kind == "independent_pair") doc["task"] = "mi";
    RunConfig cfg = parse_run_config(doc);
    cfg.validate();
    worlds.push_back({cfg, build_world(cfg.world), entry.value("name", "world" + std::to_string(w))});
  }

  auto out = create_output(a.output);
  const std::string summary_path = a.summary.empty() ? a.output + ".summary.csv" : a.summary;
  auto summary = create_output(summary_path);
  out << "world,lambda,n,rep,seed,se,se_cv,alpha_se,mi,mi_cv,alpha_mi,rho,ess,ess_ratio,n_clusters,oracle\n";
  summary << "world,lambda,n,replications,mean_se,var_se,var_se_cv,var_ratio_se,mean_mi,var_mi,var_mi_cv,"
             "var_ratio_mi,mean_rho,median_ess_ratio,median_clusters,oracle\n";

  for (std::size_t w = 0; w < worlds.size(); ++w) {
    const Cell& cell = worlds[w];
    const auto scorer = oracle_scorer(cell.world.labeler, cell.cfg.scorer_noise);
    const std::optional<double> oracle = cell.world.oracle_value(cell.cfg.mdm.steps);
    std::optional<double> known;
    if (cell.cfg.cv_mode == CvMode::kKnownMean) {
      known = cell.world.control_mean(cell.cfg.mdm.steps);
      if (!known) throw ConfigError("estimator.cv_mode", "known_mean needs an enumerable autoregressive world");
    }
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        std::vector<double> se, se_cv, mi, mi_cv, rho, ess_ratio, clusters;
        for (std::size_t r = 0; r < reps; ++r) {
          SimRow row{cell.name, lambdas[l], ns[ni], r, row_seed(a.seed, w, l, ni, r), {}, 0.0, oracle};
          Rng rng(row.seed);
          if (cell.world.pair) {
            ArmSamplerConfig sc = cell.cfg.arm;
            sc.lambda0 = lambdas[l];
            MiRunConfig mc;
            mc.prompt = cell.world.prompt;
            mc.n = ns[ni];
            mc.cluster = cell.cfg.cluster;
            mc.cv_mode = cell.cfg.cv_mode;
            mc.known_mean = known;
            const MiRun run = run_mi(*cell.world.pair, sc, *scorer, mc, rng);
            row.report = run.report;
            row.rho = mi_with_cv(run.pairs, run.joint, run.first_map, run.second_map, mc.cv_mode, known).rho;
          } else {
            SeRunConfig rc;
            rc.prompt = cell.world.prompt;
            rc.n = ns[ni];
            rc.cluster = cell.cfg.cluster;
            rc.seq_lambda = cell.cfg.seq_lambda;
            rc.cv_mode = cell.cfg.cv_mode;
            rc.known_mean = known;
            SeRun run;
            if (cell.world.mdm) {
              MdmSamplerConfig sc = cell.cfg.mdm;
              sc.lambda0 = lambdas[l];
              run = run_se(MdmSampler(*cell.world.mdm, sc), *scorer, rc, rng);
            } else {
              ArmSamplerConfig sc = cell.cfg.arm;
              sc.lambda0 = lambdas[l];
              run = run_se(ArmSampler(*cell.world.arm, sc), *scorer, rc, rng);
            }
            row.report = run.report;
            row.rho = se_with_cv(run.samples, run.clustering, rc.cv_mode, known).rho;
          }
          const EstimateReport& rep = row.report;
          out << csv_field(row.world) << ',' << csv_number(row.lambda) << ',' << row.n << ',' << row.rep << ','
              << row.seed << ',' << csv_number(rep.se) << ',' << csv_number(rep.se_cv) << ','
              << csv_number(rep.alpha_se) << ',' << csv_number(rep.mi) << ',' << csv_number(rep.mi_cv) << ','
              << csv_number(rep.alpha_mi) << ',' << csv_number(row.rho) << ',' << csv_number(rep.ess) << ','
              << csv_number(rep.ess / static_cast<double>(rep.n)) << ',' << rep.n_clusters << ','
              << (oracle ? csv_number(*oracle) : "") << '\n';
          se.push_back(rep.se);
          se_cv.push_back(rep.se_cv);
          mi.push_back(rep.mi);
          mi_cv.push_back(rep.mi_cv);
          rho.push_back(row.rho);
          ess_ratio.push_back(rep.ess / static_cast<double>(rep.n));
          clusters.push_back(static_cast<double>(rep.n_clusters));
        }
        const auto mean = [](const std::vector<double>& v) {
          double s = 0.0;
          for (const double x : v) s += x;
          return s / static_cast<double>(v.size());
        };
        const auto ratio = [](double num, double den) {
          return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
        };
        const double vse = sample_variance(se);
        const double vse_cv = sample_variance(se_cv);
        const double vmi = sample_variance(mi);
        const double vmi_cv = sample_variance(mi_cv);
        summary << csv_field(cell.name) << ',' << csv_number(lambdas[l]) << ',' << ns[ni] << ',' << reps << ','
                << csv_number(mean(se)) << ',' << csv_number(vse) << ',' << csv_number(vse_cv) << ','
                << csv_number(ratio(vse_cv, vse)) << ',' << csv_number(mean(mi)) << ',' << csv_number(vmi) << ','
                << csv_number(vmi_cv) << ',' << csv_number(ratio(vmi_cv, vmi)) << ',' << csv_number(mean(rho))
                << ',' << csv_number(median(ess_ratio)) << ',' << csv_number(median(clusters)) << ','
                << (oracle ? csv_number(*oracle) : "") << '\n';
        std::cout << cell.name << " lambda=" << lambdas[l] << " n=" << ns[ni] << " var_ratio_se="
                  << ratio(vse_cv, vse) << " median_ess_ratio=" << median(ess_ratio)
                  << " median_clusters=" << median(clusters) << '\n';
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentArgs {
  std::string input;
  std::string mode = "trunc";
  std::size_t k = 20;
  std::string marker;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int cmd_augment(const AugmentArgs& a) {
  if (a.mode != "trunc" && a.mode != "trunc-sampled" && a.mode != "mask") {
    throw ConfigError("--mode", "must be trunc, trunc-sampled or mask");
  }
  if (a.mode != "trunc" && !a.seed) throw ConfigError("--seed", "is required for stochastic modes");
  const std::string marker =
      a.marker.empty() ? std::string(a.mode == "mask" ? kMaskMarker : kTruncMarker) : a.marker;
  const auto records = read_jsonl(a.input);
  auto out = create_output(a.output);
  for (std::size_t i = 0; i < records.size(); ++i) {
    LabeledPair pair;
    try {
      pair = labeled_pair_from_json(records[i].value);
    } catch (const json::exception& e) {
      throw CorruptTrace(a.input, records[i].offset, e.what());
    } catch (const InvalidArgument& e) {
      throw CorruptTrace(a.input, records[i].offset, e.what());
    }
    std::vector<LabeledPair> expanded;
    try {
      if (a.mode == "trunc") {
        expanded = unroll_truncations(pair, marker);
      } else if (a.mode == "trunc-sampled") {
        expanded = sample_truncation(pair, marker, *a.seed, i);
      } else {
        expanded = mask_variants(pair, a.k, marker, *a.seed, i);
      }
    } catch (const InvalidArgument& e) {
      throw CorruptTrace(a.input, records[i].offset, e.what());
    }
    for (const auto& r : expanded) out << to_json(r).dump() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::vector<std::string> reports;
  std::string references;
  std::optional<double> threshold;
  std::string output;
};

json metric_or_reason(const std::function<double()>& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    return json{{"error", e.what()}};
  }
}

int cmd_evaluate(const EvaluateArgs& a) {
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& r : read_jsonl(a.references)) {
    try {
      refs[r.value.at("prompt_id").get<std::string>()] = r.value.at("references").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw CorruptTrace(a.references, r.offset, e.what());
    }
  }
  std::vector<EstimateReport> reports;
  for (const auto& file : a.reports) {
    for (const auto& r : read_jsonl(file)) {
      expect_kind(r, file, "report");
      try {
        reports.push_back(report_from_json(r.value));
      } catch (const json::exception& e) {
        throw CorruptTrace(file, r.offset, e.what());
      }
    }
  }
  const bool mi_task = !reports.empty() && std::all_of(reports.begin(), reports.end(),
                                                       [](const EstimateReport& r) { return r.task == "mi"; });
  const double threshold = a.threshold.value_or(mi_task ? kCorrectnessThresholdMi : kCorrectnessThreshold);

  std::vector<double> rouge;
  std::vector<bool> incorrect;
  std::map<std::string, std::vector<double>> scores;
  std::size_t skipped = 0;
  for (const auto& r : reports) {
    const auto it = refs.find(r.prompt_id);
    if (it == refs.end() || r.best_answer.empty()) {
      ++skipped;
      continue;
    }
    std::string answer = r.best_answer;
    if (r.task == "mi") {
      const auto cut = answer.find(" || ");
      if (cut != std::string::npos) answer = answer.substr(0, cut);
    }
    if (rouge_tokens(answer).empty()) {
      ++skipped;
      continue;
    }
    const CorrectnessLabel label = label_correctness(answer, it->second, threshold);
    rouge.push_back(label.score);
    incorrect.push_back(!label.correct);
    scores["se"].push_back(r.se);
    scores["se_cv"].push_back(r.se_cv);
    if (r.task == "mi") {
      scores["mi"].push_back(r.mi);
      scores["mi_cv"].push_back(r.mi_cv);
    }
  }
  std::vector<double> neg_rouge(rouge.size());
  std::transform(rouge.begin(), rouge.end(), neg_rouge.begin(), [](double v) { return -v; });
  std::vector<char> labels_c(incorrect.begin(), incorrect.end());
  const std::span<const bool> labels(reinterpret_cast<const bool*>(labels_c.data()), labels_c.size());

  json metrics = json::object();
  for (const auto& [name, s] : scores) {
    if (s.size() != rouge.size()) continue;
    metrics[name] = {{"auroc", metric_or_reason([&] { return auroc(s, labels); })},
                     {"spearman", metric_or_reason([&] { return spearman_rho(neg_rouge, s); })}};
  }
  std::size_t correct = 0;
  for (const bool b : incorrect) correct += b ? 0 : 1;
  const json record = {{"schema", kRecordSchema}, {"kind", "metrics"},      {"n", rouge.size()},
                       {"skipped", skipped},      {"n_correct", correct}, {"threshold", threshold},
                       {"metrics", metrics}};
  auto out = create_output(a.output);
  out << record.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> reports;
  std::string samples;
  std::string outdir;
};

int cmd_report(const ReportArgs& a) {
  std::vector<EstimateReport> reports;
  for (const auto& file : a.reports) {
    for (const auto& r : read_jsonl(file)) {
      expect_kind(r, file, "report");
      try {
        reports.push_back(report_from_json(r.value));
      } catch (const json::exception& e) {
        throw CorruptTrace(file, r.offset, e.what());
      }
    }
  }
  std::vector<TraceGroup> traces;
  if (!a.samples.empty()) traces = read_traces({a.samples});

  const fs::path dir(a.outdir);
  auto counts = create_output(dir / "cluster_counts.csv");
  counts << "prompt_id,task,n,n_clusters,ess,se,se_cv,mi,mi_cv,stopped_early\n";
  auto sizes = create_output(dir / "cluster_sizes.csv");
  sizes << "prompt_id,cluster,size\n";
  auto history = create_output(dir / "history.csv");
  history << "prompt_id,sample,estimate\n";
  for (const auto& r : reports) {
    counts << csv_field(r.prompt_id) << ',' << r.task << ',' << r.n << ',' << r.n_clusters << ','
           << csv_number(r.ess) << ',' << csv_number(r.se) << ',' << csv_number(r.se_cv) << ','
           << csv_number(r.mi) << ',' << csv_number(r.mi_cv) << ',' << (r.stopped_early ? 1 : 0) << '\n';
    for (std::size_t c = 0; c < r.cluster_sizes.size(); ++c) {
      sizes << csv_field(r.prompt_id) << ',' << c << ',' << r.cluster_sizes[c] << '\n';
    }
    for (std::size_t i = 0; i < r.history.size(); ++i) {
      history << csv_field(r.prompt_id) << ',' << i << ',' << csv_number(r.history[i]) << '\n';
    }
  }
  if (!traces.empty()) {
    auto lambdas = create_output(dir / "lambda_trajectories.csv");
    lambdas << "prompt_id,sample,answer,step,lambda,penalty\n";
    const auto emit = [&](const std::string& id, std::size_t k, int answer, const SequenceSample& s) {
      for (std::size_t t = 0; t < s.steps.size(); ++t) {
        lambdas << csv_field(id) << ',' << k << ',' << answer << ',' << t << ',' << csv_number(s.steps[t].lambda)
                << ',' << csv_number(s.steps[t].penalty) << '\n';
      }
    };
    for (const auto& g : traces) {
      for (const auto& [k, s] : g.samples) emit(g.prompt_id, k, 1, s);
      for (const auto& [k, p] : g.pairs) {
        emit(g.prompt_id, k, 1, p.first);
        emit(g.prompt_id, k, 2, p.second);
      }
    }
  }
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Diversity-steered sampling and importance-weighted uncertainty estimation"};
  app.require_subcommand(1);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Draw steered samples and write traces");
  add_run_flags(*sample_cmd, sample.flags);
  sample_cmd->add_option("--seed", sample.seed, "Random seed")->required();
  sample_cmd->add_option("--output", sample.output, "Trace file to create")->required();

  EstimateArgs estimate;
  auto* estimate_cmd = app.add_subcommand("estimate", "Cluster traces and write estimate reports");
  add_run_flags(*estimate_cmd, estimate.flags);
  estimate_cmd->add_option("--input", estimate.inputs, "Trace files")->required();
  estimate_cmd->add_option("--output", estimate.output, "Report file to create")->required();

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Replication study on synthetic worlds");
  simulate_cmd->add_option("--study", simulate.study, "Study specification")->required();
  simulate_cmd->add_option("--seed", simulate.seed, "Random seed")->required();
  simulate_cmd->add_option("--output", simulate.output, "Per-replication CSV to create")->required();
  simulate_cmd->add_option("--summary", simulate.summary, "Summary CSV (default <output>.summary.csv)");

  AugmentArgs augment;
  auto* augment_cmd = app.add_subcommand("augment", "Expand NLI pairs with truncated or masked variants");
  augment_cmd->add_option("--input", augment.input, "NLI records {premise, hypothesis, label}")->required();
  augment_cmd->add_option("--mode", augment.mode, "trunc, trunc-sampled or mask");
  augment_cmd->add_option("--k", augment.k, "Masked variants per pair");
  augment_cmd->add_option("--marker", augment.marker, "Marker token");
  augment_cmd->add_option("--seed", augment.seed, "Random seed");
  augment_cmd->add_option("--output", augment.output, "Record file to create")->required();

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score reports against reference answers");
  evaluate_cmd->add_option("--reports", evaluate.reports, "Report files")->required();
  evaluate_cmd->add_option("--references", evaluate.references, "Reference records {prompt_id, references}")
      ->required();
  evaluate_cmd->add_option("--threshold", evaluate.threshold, "ROUGE-L threshold for correctness");
  evaluate_cmd->add_option("--output", evaluate.output, "Metrics file to create")->required();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Export plot data as CSV");
  report_cmd->add_option("--reports", report.reports, "Report files")->required();
  report_cmd->add_option("--samples", report.samples, "Trace file for lambda trajectories");
  report_cmd->add_option("--outdir", report.outdir, "Directory for the CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sample_cmd) return cmd_sample(sample);
    if (*estimate_cmd) return cmd_estimate(estimate);
    if (*simulate_cmd) return cmd_simulate(simulate);
    if (*augment_cmd) return cmd_augment(augment);
    if (*evaluate_cmd) return cmd_evaluate(evaluate);
    if (*report_cmd) return cmd_report(report);
  } catch (const CorruptTrace& e) {
    std::cerr << "corrupt trace: " << e.what() << '\n';
    return kExitCorruptTrace;
  } catch (const TransportError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const ProtocolError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const ScoringError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const SamplingAborted& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace semsteer::cli
