#pragma once

// Subcommand implementations behind the `jurisrank` binary. Each command
// reads its inputs, writes exactly one artifact and logs to `log`; failures
// surface as exceptions that main() turns into a nonzero exit status.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "jurisrank/jurisrank.hpp"

namespace jurisrank::cli {

namespace fs = std::filesystem;

struct RunConfig {
    std::optional<fs::path> cases;
    std::optional<fs::path> statutes;
    std::optional<fs::path> queries;
    std::optional<fs::path> split;
    std::optional<fs::path> index;
    std::optional<fs::path> model;
    std::optional<fs::path> qrels;
    std::optional<fs::path> run;
    std::optional<fs::path> out;
    std::optional<fs::path> stopwords;
    std::optional<fs::path> lemmas;
    std::string tag = "jurisrank";
    std::size_t cutoff = 100;
    bool include_train = false;
    bool fill_zero = true;
    bool infer = false;
    Bm25Params bm25;
    PvDmConfig pvdm;
};

inline const fs::path& require(const std::optional<fs::path>& p, const char* flag) {
    if (!p) throw std::invalid_argument(std::string("missing required flag ") + flag);
    return *p;
}

inline NormalizerConfig normalizer_for(const RunConfig& cfg) {
    NormalizerConfig n;
    if (cfg.stopwords) n.stopwords = StopwordList::load(*cfg.stopwords);
    if (cfg.lemmas) n.lemma_dictionary = LemmaDictionary::load(*cfg.lemmas);
    return n;
}

inline std::vector<SituationQuery> selected_queries(const RunConfig& cfg, const NormalizerConfig& norm) {
    auto all = load_queries(require(cfg.queries, "--queries"), norm, cfg.split);
    std::vector<SituationQuery> picked;
    for (auto& q : all) {
        if (cfg.include_train || q.split == Split::kTest) picked.push_back(std::move(q));
    }
    if (picked.empty()) throw Error("no test queries (use --include-train to search train queries)");
    return picked;
}

inline void cmd_index(const RunConfig& cfg, std::ostream& log) {
    if (cfg.cases.has_value() == cfg.statutes.has_value()) {
        throw std::invalid_argument("index needs exactly one of --cases or --statutes");
    }
    const auto& out = require(cfg.index, "--index");
    const auto norm = normalizer_for(cfg);
    const Corpus corpus = cfg.cases ? load_case_corpus(*cfg.cases, norm) : load_statutes(*cfg.statutes, norm);
    if (corpus.empty()) throw EmptyCorpusError();
    const auto index = build_index(corpus);
    save_index(index, out);
    const auto& s = corpus.stats();
    log << "docs=" << s.document_count << " terms=" << s.total_terms << " vocab=" << s.vocabulary_size
        << " avgdl=" << detail::format_fixed(index.avgdl(), 2) << '\n';
}

inline void cmd_search_bm25(const RunConfig& cfg, std::ostream& log) {
    if (cfg.cutoff == 0) throw std::invalid_argument("--cutoff must be at least 1");
    cfg.bm25.validate();
    const auto& index_path = require(cfg.index, "--index");
    const auto& run_path = require(cfg.run, "--run");
    if (!fs::exists(index_path)) throw IoError("index file not found: " + index_path.string());
    const auto index = load_index(index_path);
    const auto queries = selected_queries(cfg, normalizer_for(cfg));

    RankedRun run;
    run.tag = cfg.tag;
    std::size_t lines = 0;
    for (const auto& q : queries) {
        const auto ranking = rank(q.normalized, index, cfg.bm25, cfg.cutoff, cfg.fill_zero);
        lines += ranking.size();
        run.add(q.id.label, ranking);
    }
    write_run(run, run_path);
    log << "queries=" << queries.size() << " lines=" << lines << " k1=" << cfg.bm25.k1 << " b=" << cfg.bm25.b
        << " tag=" << cfg.tag << '\n';
}

inline void cmd_train_d2v(const RunConfig& cfg, std::ostream& log) {
    const auto& model_path = require(cfg.model, "--model");
    const auto norm = normalizer_for(cfg);
    const Corpus cases = load_case_corpus(require(cfg.cases, "--cases"), norm);
    std::vector<NormalizedDocument> docs = cases.documents();
    if (cfg.queries) {
        for (auto& q : load_queries(*cfg.queries, norm, cfg.split)) docs.push_back(std::move(q.normalized));
    }
    if (docs.empty()) throw EmptyCorpusError();
    const auto& c = cfg.pvdm;
    log << "dim=" << c.dim << " window=" << c.window << " epochs=" << c.epochs << " lr=" << c.learning_rate
        << " negatives=" << c.negatives << " min_count=" << c.min_count << " seed=" << c.seed
        << " paragraphs=" << docs.size() << '\n';
    const auto model = train(docs, c, [&log](std::size_t epoch, double loss) {
        log << "epoch=" << epoch << " loss=" << detail::format_fixed(loss, 6) << '\n';
    });
    save_model(model, model_path);
    log << "vocab=" << model.vocab.size() - 1 << " saved=" << model_path.string() << '\n';
}

inline void cmd_search_d2v(const RunConfig& cfg, std::ostream& log) {
    if (cfg.cutoff == 0) throw std::invalid_argument("--cutoff must be at least 1");
    const auto& model_path = require(cfg.model, "--model");
    const auto& run_path = require(cfg.run, "--run");
    if (!fs::exists(model_path)) throw IoError("model file not found: " + model_path.string());
    const auto model = load_model(model_path);
    const auto queries = selected_queries(cfg, normalizer_for(cfg));

    RankedRun run;
    run.tag = cfg.tag;
    std::size_t inferred = 0;
    for (const auto& q : queries) {
        std::vector<double> vec;
        const auto row = cfg.infer ? std::nullopt : model.paragraph_index(q.id);
        if (row) {
            const auto r = model.para_vecs.row(*row);
            vec.assign(r.begin(), r.end());
        } else {
            vec = infer_paragraph(model, q.normalized);
            ++inferred;
        }
        run.add(q.id.label, rank_by_cosine(vec, model, cfg.cutoff, DocKind::kCase));
    }
    write_run(run, run_path);
    log << "queries=" << queries.size() << " inferred=" << inferred << " tag=" << cfg.tag << '\n';
}

inline MetricsReport cmd_eval(const RunConfig& cfg, std::ostream& log) {
    const auto run = parse_run(require(cfg.run, "--run"));
    const auto qrels = parse_qrels(require(cfg.qrels, "--qrels"));
    const auto report = evaluate_run(run, qrels);
    const std::string machine = format_report_machine(report);
    log << format_report_table(report) << '\n' << machine;
    if (cfg.out) write_binary_file(*cfg.out, machine);
    return report;
}

}  // namespace jurisrank::cli
