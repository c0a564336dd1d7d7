#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using jurisrank::cli::RunConfig;

namespace {

CLI::Option* add_path(CLI::App* app, const std::string& name, std::optional<std::filesystem::path>& target,
                      const std::string& help) {
    return app->add_option_function<std::string>(name, [&target](const std::string& v) { target = v; }, help);
}

void add_text_options(CLI::App* app, RunConfig& cfg) {
    add_path(app, "--stopwords", cfg.stopwords, "Stopword file (one token per line); default: built-in English list");
    add_path(app, "--lemmas", cfg.lemmas, "Lemma dictionary file ('surface lemma' per line)");
}

void add_query_options(CLI::App* app, RunConfig& cfg) {
    add_path(app, "--queries", cfg.queries, "Query file, one 'label||text' per line")->required();
    add_path(app, "--split", cfg.split, "File listing train query labels; all other queries are test");
    app->add_flag("--include-train", cfg.include_train, "Also search train-split queries");
    app->add_option("--cutoff", cfg.cutoff, "Run depth per query")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--tag", cfg.tag, "Run tag written in the last column")->capture_default_str();
    add_path(app, "--run", cfg.run, "Output run file")->required();
}

void add_pvdm_options(CLI::App* app, RunConfig& cfg) {
    auto& c = cfg.pvdm;
    app->add_option("--dim", c.dim, "Vector dimension")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--window", c.window, "Preceding context words")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--epochs", c.epochs, "Training passes")->capture_default_str();
    app->add_option("--lr", c.learning_rate, "Initial learning rate (decays linearly)")->capture_default_str();
    app->add_option("--min-lr", c.min_learning_rate, "Final learning rate")->capture_default_str();
    app->add_option("--negatives", c.negatives, "Negative samples per example")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--min-count", c.min_count, "Minimum term frequency")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jurisrank: BM25 and paragraph-vector retrieval of prior cases and statutes"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* index = app.add_subcommand("index", "Build a BM25 index over a case directory or statute collection");
    add_path(index, "--cases", cfg.cases, "Directory of <label>.txt case files");
    add_path(index, "--statutes", cfg.statutes, "Statute file (label||title||description) or directory");
    add_path(index, "--index", cfg.index, "Output index file")->required();
    add_text_options(index, cfg);

    auto* search_bm25 = app.add_subcommand("search-bm25", "Rank indexed documents for each query with BM25");
    add_path(search_bm25, "--index", cfg.index, "Index file built by 'index'")->required();
    add_query_options(search_bm25, cfg);
    search_bm25->add_option("--k1", cfg.bm25.k1, "Term-frequency saturation")->capture_default_str();
    search_bm25->add_option("--b", cfg.bm25.b, "Length normalization")->capture_default_str();
    bool no_fill = false;
    search_bm25->add_flag("--no-fill", no_fill, "Do not pad short rankings with zero-score documents");
    add_text_options(search_bm25, cfg);

    auto* train = app.add_subcommand("train-d2v", "Train paragraph vectors over cases and queries");
    add_path(train, "--cases", cfg.cases, "Directory of <label>.txt case files")->required();
    add_path(train, "--queries", cfg.queries, "Query file; queries are trained as paragraphs too");
    add_path(train, "--split", cfg.split, "Train-split label file (accepted for symmetry, not used in training)");
    add_path(train, "--model", cfg.model, "Output model file")->required();
    add_pvdm_options(train, cfg);
    add_text_options(train, cfg);

    auto* search_d2v = app.add_subcommand("search-d2v", "Rank cases by cosine similarity of paragraph vectors");
    add_path(search_d2v, "--model", cfg.model, "Model file built by 'train-d2v'")->required();
    add_query_options(search_d2v, cfg);
    search_d2v->add_flag("--infer", cfg.infer, "Infer query vectors even when the model holds them");
    add_text_options(search_d2v, cfg);

    auto* eval = app.add_subcommand("eval", "Score a run file against qrels (P@10, MAP, BPREF, MRR)");
    add_path(eval, "--run", cfg.run, "Run file")->required();
    add_path(eval, "--qrels", cfg.qrels, "Qrels file")->required();
    add_path(eval, "--out", cfg.out, "Also write metric<TAB>query<TAB>value lines here");

    CLI11_PARSE(app, argc, argv);
    cfg.fill_zero = !no_fill;

    try {
        if (index->parsed()) jurisrank::cli::cmd_index(cfg, std::cout);
        if (search_bm25->parsed()) jurisrank::cli::cmd_search_bm25(cfg, std::cout);
        if (train->parsed()) jurisrank::cli::cmd_train_d2v(cfg, std::cout);
        if (search_d2v->parsed()) jurisrank::cli::cmd_search_d2v(cfg, std::cout);
        if (eval->parsed()) jurisrank::cli::cmd_eval(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
