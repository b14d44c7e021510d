// kbqa command-line front end: answer single questions, evaluate question
// sets, run the beam-size benchmark, generate synthetic data, train the
// question classifier, and dump linking/statistics diagnostics.

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "kbqa/config.hpp"
#include "kbqa/pipeline.hpp"
#include "kbqa/synth_gen.hpp"

namespace {

using namespace kbqa;

struct CommonArgs {
  std::string kb_path;
  std::string lexicon_path;
  std::string config_path;
  std::string model_path;
  bool lex_add_kb_subjects = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_lexicon = true) {
  cmd->add_option("--kb", args.kb_path, "KB triples file (TSV)")->required();
  if (need_lexicon)
    cmd->add_option("--lexicon", args.lexicon_path, "mention lexicon file (TSV)")->required();
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--model", args.model_path, "classifier model file");
  cmd->add_flag("--lex-add-kb-subjects", args.lex_add_kb_subjects,
                "add every KB subject to the lexicon as a mention of itself");
}

struct Loaded {
  KnowledgeBase kb;
  MentionLexicon lex;
  Config cfg;
  std::unique_ptr<LinearClassifier> model;
  std::unique_ptr<SimilarityScorer> scorer;
  std::unique_ptr<SimilarityScorer> ranker;
  std::unique_ptr<SimilarityScorer> emissions;
  PipelineComponents components;
};

std::unique_ptr<SimilarityScorer> make_scorer(const Config& cfg, const std::string& prefix) {
  std::string kind = cfg.get_string(prefix + ".kind", "ngram");
  if (kind == "ngram")
    return std::make_unique<NgramScorer>(static_cast<int>(cfg.get_int(prefix + ".ngram", 2)));
  if (kind == "external") {
    auto command = cfg.get(prefix + ".command");
    if (!command) throw std::runtime_error("config: " + prefix + ".command is required");
    return std::make_unique<ExternalScorer>(*command);
  }
  throw std::runtime_error("config: unknown scorer kind " + kind);
}

// Parses a feature-mask list like [f1, f2, f4] into keep-flags.
std::optional<std::array<bool, 5>> parse_mask(const Config& cfg, const std::string& key) {
  auto items = cfg.get_list(key);
  if (items.empty()) return std::nullopt;
  std::array<bool, 5> mask{false, false, false, false, false};
  for (const std::string& item : items) {
    if (item.size() != 2 || item[0] != 'f' || item[1] < '1' || item[1] > '5')
      throw std::runtime_error("config: " + key + " entries must be f1..f5");
    mask[item[1] - '1'] = true;
  }
  return mask;
}

Loaded load_components(const CommonArgs& args) {
  Loaded l;
  l.cfg = args.config_path.empty() ? Config{} : Config::load_file(args.config_path);
  l.kb = KnowledgeBase::load_file(args.kb_path);
  std::cerr << "[info] loaded " << l.kb.triple_count() << " triples from " << args.kb_path
            << "\n";
  bool fold = l.cfg.get_bool("lexicon.fold", false);
  l.lex = args.lexicon_path.empty() ? MentionLexicon{}
                                    : MentionLexicon::load_file(args.lexicon_path, fold);
  if (args.lex_add_kb_subjects || l.cfg.get_bool("lexicon.add_kb_subjects", false))
    l.lex.add_kb_subjects(l.kb);

  auto weights = l.cfg.get_double_list("linker.weights");
  if (!weights.empty()) {
    if (weights.size() != 5) throw std::runtime_error("config: linker.weights needs 5 values");
    for (int i = 0; i < 5; ++i) l.components.linker.weights.w[i] = weights[i];
  }
  l.components.linker.top_k = static_cast<int>(l.cfg.get_int("linker.top_k", 5));
  auto interrogatives = l.cfg.get_list("linker.interrogatives");
  if (!interrogatives.empty()) l.components.linker.interrogatives = interrogatives;
  l.components.one_entity_mask = parse_mask(l.cfg, "linker.mask.one_entity");
  l.components.multi_entity_mask = parse_mask(l.cfg, "linker.mask.multi_entity");

  l.components.enabled_schemas = l.cfg.get_list("schemas.enabled");
  l.components.beam.beam_size = static_cast<std::size_t>(l.cfg.get_int("beam.k", 16));
  auto hops = l.cfg.get_list("beam.hops");
  if (!hops.empty()) {
    l.components.beam.apply_at_hops.clear();
    for (const auto& h : hops) l.components.beam.apply_at_hops.insert(std::stoi(h));
  }

  l.scorer = make_scorer(l.cfg, "scorer");
  if (l.cfg.get("ranker.kind") || l.cfg.get("ranker.command"))
    l.ranker = make_scorer(l.cfg, "ranker");
  if (l.cfg.get_string("tagger.emissions", "lexicon") == "external") {
    auto command = l.cfg.get("tagger.external_command");
    if (!command) throw std::runtime_error("config: tagger.external_command is required");
    l.emissions = std::make_unique<ExternalScorer>(*command);
  }

  if (!args.model_path.empty())
    l.model = std::make_unique<LinearClassifier>(load_classifier(args.model_path));

  l.components.kb = &l.kb;
  l.components.lex = &l.lex;
  l.components.classifier = l.model.get();
  l.components.beam_scorer = l.scorer.get();
  l.components.rank_scorer = l.ranker.get();
  l.components.emission_scorer = l.emissions.get();
  return l;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, e] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

nlohmann::json answer_to_json(const Answer& ans) {
  nlohmann::json j;
  j["id"] = ans.id;
  std::vector<std::string> answers;
  for (const Node& n : ans.answers) answers.push_back(node_to_string(n));
  j["answers"] = answers;
  j["reason"] = to_string(ans.reason);
  if (ans.chosen) {
    j["path"] = path_to_json(ans.chosen->path);
    j["verbalization"] = ans.chosen->verbalization;
    j["score"] = ans.chosen->score;
  }
  if (!ans.candidates.empty()) {
    nlohmann::json cands = nlohmann::json::array();
    for (const ScoredPath& c : ans.candidates) {
      nlohmann::json cj;
      cj["path"] = path_to_json(c.path);
      cj["verbalization"] = c.verbalization;
      cj["score"] = c.score;
      cands.push_back(std::move(cj));
    }
    j["candidates"] = std::move(cands);
  }
  return j;
}

int run_answer(const CommonArgs& args, const std::string& question, bool show_candidates) {
  Loaded l = load_components(args);
  l.components.keep_candidates = show_candidates;
  Answer ans = answer_question(l.components, "q0", question);
  std::cout << answer_to_json(ans).dump() << "\n";
  return 0;
}

int run_eval(const CommonArgs& args, const std::string& questions_path,
             const std::string& out_path) {
  Loaded l = load_components(args);
  std::vector<QuestionRecord> questions = load_questions_jsonl(questions_path);

  std::vector<Answer> answers;
  std::map<std::string, std::set<std::string>> gold;
  for (const QuestionRecord& q : questions) {
    gold[q.id] = std::set<std::string>(q.answers.begin(), q.answers.end());
    answers.push_back(answer_question(l.components, q.id, q.question));
  }
  EvalReport report = evaluate(answers, gold);
  std::string body = eval_report_jsonl(report);
  if (out_path.empty() || out_path == "-") {
    std::cout << body;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out.is_open()) throw std::runtime_error(out_path + ": cannot write report");
    out << body;
    std::cout << "avg_f1 " << format_double(report.avg_f1) << " over "
              << report.per_question.size() << " questions\n";
  }
  return 0;
}

int run_benchmark(const CommonArgs& args, const std::string& questions_path,
                  const std::vector<std::size_t>& beam_sizes, const std::string& out_path) {
  Loaded l = load_components(args);
  std::vector<QuestionRecord> questions = load_questions_jsonl(questions_path);
  std::vector<BenchmarkQuestion> bench;
  for (QuestionRecord& q : questions) {
    if (!q.gold_path) {
      std::cerr << "[warn] question " << q.id << " has no gold path; skipped\n";
      continue;
    }
    bench.push_back(BenchmarkQuestion{q.id, q.question, *q.gold_path});
  }
  auto rows = beam_benchmark(l.kb, bench, l.lex, *l.scorer, beam_sizes, l.components.beam);
  std::string csv = benchmark_csv(rows);
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out.is_open()) throw std::runtime_error(out_path + ": cannot write CSV");
    out << csv;
  }
  return 0;
}

int run_gen_data(const CommonArgs& args, std::size_t count, const std::string& ratios_arg,
                 std::uint64_t seed, const std::string& templates_path,
                 const std::string& out_path) {
  Loaded l = load_components(args);

  std::map<std::string, double> ratios;
  std::istringstream in(ratios_arg);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--ratios expects S1=0.5,S2=0.5 style");
    ratios[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }

  SynthTemplates templates = templates_path.empty() ? SynthTemplates::builtin()
                                                    : SynthTemplates::load_file(templates_path);
  auto samples = generate_samples(l.kb, l.lex, count, ratios, seed, templates);
  export_samples_jsonl(samples, out_path);
  std::cout << "wrote " << samples.size() << " samples to " << out_path << "\n";
  return 0;
}

// Candidate count used for classifier features: the same link pathway that
// serves classification at answer time.
int candidate_count_for(const Loaded& l, const std::string& question) {
  TokenizedQuestion tq = tokenize(question, l.lex);
  auto hits = find_mentions(tq, l.lex);
  auto linked = link_entities(tq, hits, l.kb, l.lex, l.components.linker);
  return static_cast<int>(distinct_entities(linked).size());
}

std::vector<LabeledQuestion> load_labeled(const Loaded& l, const std::string& path,
                                          LabeledQuestion::Origin origin) {
  std::vector<LabeledQuestion> out;
  for (const QuestionRecord& q : load_questions_jsonl(path)) {
    if (!q.cls)
      throw std::runtime_error(path + ": question " + q.id + " has no class label");
    LabeledQuestion lq;
    lq.text = q.question;
    lq.label = *q.cls;
    lq.candidate_count = candidate_count_for(l, q.question);
    lq.origin = origin;
    out.push_back(std::move(lq));
  }
  return out;
}

int run_train(const CommonArgs& args, const std::string& real_path,
              const std::string& synth_path, double real_fraction, long synth_count,
              int preset, std::uint64_t seed, int epochs, double lr,
              const std::string& out_path) {
  Loaded l = load_components(args);
  auto real = load_labeled(l, real_path, LabeledQuestion::Origin::Real);
  std::vector<LabeledQuestion> synthetic;
  if (!synth_path.empty()) synthetic = load_labeled(l, synth_path, LabeledQuestion::Origin::Synthetic);

  if (preset > 0) {
    auto presets = mix_presets();
    std::size_t idx = preset == 10 ? 0 : preset == 50 ? 1 : preset == 100 ? 2 : 3;
    if (idx == 3) throw std::runtime_error("--preset must be 10, 50 or 100");
    real_fraction = presets[idx].real_fraction;
    synth_count = static_cast<long>(presets[idx].synth_count);
  }
  if (synth_count < 0) synth_count = 0;

  auto mixed = mix_data(real, synthetic, real_fraction, static_cast<std::size_t>(synth_count),
                        seed);
  TrainReport report;
  LinearClassifier model = train_classifier(mixed, epochs, lr, seed, 1u << 16, &report);
  save_classifier(model, out_path);

  std::cout << "trained on " << mixed.size() << " questions (" << real.size() << " real pool, "
            << synth_count << " synthetic)\n";
  for (std::size_t e = 0; e < report.epoch_error_rates.size(); ++e)
    std::cout << "epoch " << e + 1 << " error_rate "
              << format_double(report.epoch_error_rates[e]) << "\n";
  return 0;
}

// Gold topic entities for the ablation study come from each question's gold
// path (its branch roots).
int run_ablation(const CommonArgs& args, const std::string& questions_path,
                 const std::string& out_path) {
  Loaded l = load_components(args);
  std::vector<LinkingGoldQuestion> questions;
  for (const QuestionRecord& q : load_questions_jsonl(questions_path)) {
    if (!q.gold_path) {
      std::cerr << "[warn] question " << q.id << " has no gold path; skipped\n";
      continue;
    }
    LinkingGoldQuestion g;
    g.question = q.question;
    for (const Branch& b : q.gold_path->branches)
      if (std::find(g.gold_entities.begin(), g.gold_entities.end(), b.root) ==
          g.gold_entities.end())
        g.gold_entities.push_back(b.root);
    questions.push_back(std::move(g));
  }
  auto rows = ablation_harness(l.kb, l.lex, questions, l.components.linker);
  std::string csv = ablation_csv(rows);
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out.is_open()) throw std::runtime_error(out_path + ": cannot write CSV");
    out << csv;
  }
  return 0;
}

int run_link(const CommonArgs& args, const std::string& question) {
  Loaded l = load_components(args);
  TokenizedQuestion tq = tokenize(question, l.lex);
  auto hits = find_mentions(tq, l.lex);
  auto linked = link_entities(tq, hits, l.kb, l.lex, l.components.linker);
  for (const CandidateEntity& c : linked) {
    nlohmann::json j;
    j["mention"] = c.mention;
    j["begin"] = c.begin;
    j["end"] = c.end;
    j["entity"] = c.entity;
    j["f1"] = c.f[0];
    j["f2"] = c.f[1];
    j["f3"] = c.f[2];
    j["f4"] = c.f[3];
    j["f5"] = c.f[4];
    j["score"] = c.score;
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int run_stats(const CommonArgs& args, const std::vector<int>& hops,
              const std::string& entities_path) {
  KnowledgeBase kb = KnowledgeBase::load_file(args.kb_path);
  std::cerr << "[info] loaded " << kb.triple_count() << " triples from " << args.kb_path
            << "\n";
  std::vector<std::string> entities;
  if (entities_path.empty()) {
    entities = kb.entity_labels();
  } else {
    std::ifstream in(entities_path);
    if (!in.is_open()) throw std::runtime_error(entities_path + ": cannot open entity list");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) entities.push_back(line);
    }
  }
  std::cout << "hops,avg_relation_count\n";
  for (int h : hops)
    std::cout << h << "," << format_double(kb.avg_relation_count(entities, h)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-hop KBQA engine: schema-constrained query-path search over a triple store"};
  app.require_subcommand(1);

  CommonArgs answer_args, eval_args, bench_args, gen_args, train_args, link_args, stats_args;

  auto* answer_cmd = app.add_subcommand("answer", "answer a single question");
  std::string answer_question_text;
  bool show_candidates = false;
  add_common(answer_cmd, answer_args);
  answer_cmd->add_option("--question", answer_question_text, "question text")->required();
  answer_cmd->add_flag("--show-candidates", show_candidates, "include all candidate paths");

  auto* eval_cmd = app.add_subcommand("eval", "answer a question file and report averaged F1");
  std::string eval_questions, eval_out;
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--questions", eval_questions, "questions JSONL")->required();
  eval_cmd->add_option("--out", eval_out, "report JSONL path (default stdout)");

  auto* bench_cmd = app.add_subcommand("benchmark-beam", "beam-size sweep against exhaustive");
  std::string bench_questions, bench_out, bench_sizes = "1,2,4,8,16";
  add_common(bench_cmd, bench_args);
  bench_cmd->add_option("--questions", bench_questions, "questions JSONL with gold paths")
      ->required();
  bench_cmd->add_option("--beam-sizes", bench_sizes, "comma-separated beam sizes");
  bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");

  auto* gen_cmd = app.add_subcommand("gen-data", "generate synthetic labeled questions");
  std::size_t gen_count = 100;
  std::string gen_ratios = "S1=0.25,S2=0.25,S4=0.25,S8=0.25";
  std::uint64_t gen_seed = 1;
  std::string gen_templates, gen_out;
  add_common(gen_cmd, gen_args);
  gen_cmd->add_option("--count", gen_count, "number of samples")->required();
  gen_cmd->add_option("--ratios", gen_ratios, "per-schema ratios, S1=0.5,S2=0.5");
  gen_cmd->add_option("--seed", gen_seed, "random seed");
  gen_cmd->add_option("--templates", gen_templates, "question prefix table (schema<TAB>prefix)");
  gen_cmd->add_option("--out", gen_out, "output JSONL")->required();

  auto* train_cmd = app.add_subcommand("train-classifier", "train the question classifier");
  std::string train_real, train_synth, train_out;
  double train_fraction = 1.0, train_lr = 0.1;
  long train_synth_count = 0;
  int train_preset = 0, train_epochs = 20;
  std::uint64_t train_seed = 1;
  add_common(train_cmd, train_args);
  train_cmd->add_option("--real", train_real, "labeled real questions JSONL")->required();
  train_cmd->add_option("--synthetic", train_synth, "labeled synthetic questions JSONL");
  train_cmd->add_option("--real-fraction", train_fraction, "fraction of real data to keep");
  train_cmd->add_option("--synth-count", train_synth_count, "synthetic samples to add");
  train_cmd->add_option("--preset", train_preset,
                        "data regime preset: 10, 50 or 100 (percent real data)");
  train_cmd->add_option("--seed", train_seed, "random seed");
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--lr", train_lr, "learning rate");
  train_cmd->add_option("--out", train_out, "model output path")->required();

  auto* link_cmd = app.add_subcommand("link", "dump candidate entities with features");
  std::string link_question;
  add_common(link_cmd, link_args);
  link_cmd->add_option("--question", link_question, "question text")->required();

  CommonArgs ablation_args;
  auto* ablation_cmd =
      app.add_subcommand("ablation", "entity-linking recall for baseline and each "
                                     "single-feature ablation");
  std::string ablation_questions, ablation_out;
  add_common(ablation_cmd, ablation_args);
  ablation_cmd->add_option("--questions", ablation_questions, "questions JSONL with gold paths")
      ->required();
  ablation_cmd->add_option("--out", ablation_out, "CSV path (default stdout)");

  auto* stats_cmd = app.add_subcommand("stats", "average relation-path counts");
  std::vector<int> stats_hops{1};
  std::string stats_entities;
  add_common(stats_cmd, stats_args, /*need_lexicon=*/false);
  stats_cmd->add_option("--hops", stats_hops, "hop depths (repeatable)");
  stats_cmd->add_option("--entities", stats_entities, "entity list file (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*answer_cmd) return run_answer(answer_args, answer_question_text, show_candidates);
    if (*eval_cmd) return run_eval(eval_args, eval_questions, eval_out);
    if (*bench_cmd) {
      std::vector<std::size_t> sizes;
      std::istringstream in(bench_sizes);
      std::string item;
      while (std::getline(in, item, ',')) sizes.push_back(std::stoul(item));
      return run_benchmark(bench_args, bench_questions, sizes, bench_out);
    }
    if (*gen_cmd)
      return run_gen_data(gen_args, gen_count, gen_ratios, gen_seed, gen_templates, gen_out);
    if (*train_cmd)
      return run_train(train_args, train_real, train_synth, train_fraction, train_synth_count,
                       train_preset, train_seed, train_epochs, train_lr, train_out);
    if (*link_cmd) return run_link(link_args, link_question);
    if (*ablation_cmd) return run_ablation(ablation_args, ablation_questions, ablation_out);
    if (*stats_cmd) return run_stats(stats_args, stats_hops, stats_entities);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
