#pragma once

// Distributed-memory paragraph vectors (PV-DM, concatenation variant).
//
// For a target position t in paragraph p the input vector is
//
//   h = [ para(p) | word(w_{t-window}) | ... | word(w_{t-1}) ]     (dim * (window + 1))
//
// with missing left context filled by a null token at vocabulary slot 0.
// Each output word w has a weight row out(w) of the same width and score
// s_w = out(w) . h. Training minimizes the negative-sampling loss
//
//   L = -ln sigma(s_target) - sum_{n in negatives} ln sigma(-s_n)
//
// by plain SGD, negatives drawn from unigram counts raised to 0.75.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "jurisrank/binary_format.hpp"
#include "jurisrank/bm25.hpp"
#include "jurisrank/document.hpp"
#include "jurisrank/errors.hpp"
#include "jurisrank/io.hpp"
#include "jurisrank/random.hpp"

namespace jurisrank {

inline const std::string kNullToken(1, '\0');

struct PvDmConfig {
    std::size_t dim = 150;
    std::size_t window = 20;
    std::size_t epochs = 50;
    double learning_rate = 0.025;
    double min_learning_rate = 1e-4;
    std::size_t negatives = 5;
    std::size_t min_count = 2;
    std::uint64_t seed = 1;
    std::size_t infer_steps = 50;
    double infer_tolerance = 1e-4;

    [[nodiscard]] std::size_t input_width() const noexcept { return dim * (window + 1); }

    void validate() const {
        if (dim == 0) throw std::invalid_argument("dim must be positive");
        if (window == 0) throw std::invalid_argument("window must be positive");
        if (negatives == 0) throw std::invalid_argument("negatives must be positive");
        if (min_count == 0) throw std::invalid_argument("min_count must be positive");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw std::invalid_argument("learning rate must be positive");
        }
        if (!(min_learning_rate >= 0.0) || min_learning_rate > learning_rate) {
            throw std::invalid_argument("minimum learning rate must lie in [0, learning_rate]");
        }
        if (!(infer_tolerance >= 0.0)) throw std::invalid_argument("inference tolerance must be >= 0");
    }

    friend bool operator==(const PvDmConfig&, const PvDmConfig&) = default;
};

/// Terms kept for training, most frequent first; slot 0 is the null token.
class Vocabulary {
public:
    Vocabulary() = default;

    Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> counts, std::size_t min_count)
        : terms_(std::move(terms)), counts_(std::move(counts)), min_count_(min_count) {
        if (terms_.empty() || terms_[0] != kNullToken) throw FormatError("vocabulary must start with the null token");
        if (terms_.size() != counts_.size()) throw FormatError("vocabulary counts do not match terms");
        for (std::uint32_t i = 0; i < terms_.size(); ++i) {
            if (i > 0 && counts_[i] < min_count_) throw FormatError("vocabulary term below min_count");
            if (!index_.emplace(terms_[i], i).second) throw FormatError("duplicate vocabulary term");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] const std::vector<std::string>& terms() const noexcept { return terms_; }
    [[nodiscard]] const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    [[nodiscard]] std::size_t min_count() const noexcept { return min_count_; }
    [[nodiscard]] const std::string& term(std::uint32_t i) const { return terms_.at(i); }

    [[nodiscard]] std::optional<std::uint32_t> find(std::string_view term) const {
        auto it = index_.find(std::string(term));
        if (it == index_.end() || it->second == 0) return std::nullopt;
        return it->second;
    }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.terms_ == b.terms_ && a.counts_ == b.counts_ && a.min_count_ == b.min_count_;
    }

private:
    std::vector<std::string> terms_;
    std::vector<std::uint64_t> counts_;
    std::size_t min_count_ = 1;
    std::unordered_map<std::string, std::uint32_t> index_;
};

inline Vocabulary build_vocab(std::span<const NormalizedDocument> documents, std::size_t min_count) {
    if (documents.empty()) throw EmptyCorpusError();
    std::map<std::string_view, std::uint64_t> freq;
    for (const auto& d : documents) {
        for (const auto& t : d.terms) ++freq[t];
    }
    std::vector<std::pair<std::string_view, std::uint64_t>> kept;
    for (const auto& [term, n] : freq) {
        if (n >= min_count) kept.emplace_back(term, n);
    }
    if (kept.empty()) {
        throw EmptyVocabularyError("vocabulary is empty after applying min_count=" + std::to_string(min_count));
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> terms{kNullToken};
    std::vector<std::uint64_t> counts{0};
    for (const auto& [term, n] : kept) {
        terms.emplace_back(term);
        counts.push_back(n);
    }
    return Vocabulary(std::move(terms), std::move(counts), min_count);
}

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::vector<double>& data() noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct PvDmModel {
    PvDmConfig config;
    Vocabulary vocab;
    std::vector<DocId> paragraphs;  // label of each para_vecs row
    Matrix word_vecs;               // |V| x dim
    Matrix para_vecs;               // |P| x dim
    Matrix out_weights;             // |V| x dim * (window + 1)

    [[nodiscard]] std::size_t input_width() const noexcept { return config.input_width(); }

    [[nodiscard]] std::optional<std::size_t> paragraph_index(const DocId& id) const {
        for (std::size_t i = 0; i < paragraphs.size(); ++i) {
            if (paragraphs[i] == id) return i;
        }
        return std::nullopt;
    }

    friend bool operator==(const PvDmModel&, const PvDmModel&) = default;
};

namespace detail {

inline void fill_uniform(std::span<double> values, std::size_t dim, Rng& rng) {
    const double scale = 1.0 / static_cast<double>(dim);
    for (auto& v : values) v = (rng.uniform_open() - 0.5) * scale;
}

}  // namespace detail

/// Word and paragraph vectors uniform on (-0.5/dim, 0.5/dim), output
/// weights zero. Deterministic in `config.seed`.
inline PvDmModel init_model(Vocabulary vocab, std::vector<DocId> paragraphs, const PvDmConfig& config) {
    config.validate();
    PvDmModel m;
    m.config = config;
    m.word_vecs = Matrix(vocab.size(), config.dim);
    m.para_vecs = Matrix(paragraphs.size(), config.dim);
    m.out_weights = Matrix(vocab.size(), config.input_width());
    m.vocab = std::move(vocab);
    m.paragraphs = std::move(paragraphs);
    Rng rng(derive_seed(config.seed, 1));
    detail::fill_uniform(m.word_vecs.data(), config.dim, rng);
    detail::fill_uniform(m.para_vecs.data(), config.dim, rng);
    return m;
}

struct TrainingExample {
    std::uint32_t paragraph = 0;
    std::vector<std::uint32_t> context;  // exactly `window` vocabulary slots, oldest first
    std::uint32_t target = 0;

    friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// Vocabulary slots of the in-vocabulary terms of `doc`, in order.
inline std::vector<std::uint32_t> encode(const NormalizedDocument& doc, const Vocabulary& vocab) {
    std::vector<std::uint32_t> ids;
    ids.reserve(doc.terms.size());
    for (const auto& t : doc.terms) {
        if (auto id = vocab.find(t)) ids.push_back(*id);
    }
    return ids;
}

namespace detail {

// Context of position t: the `window` preceding slots, null-padded on the left.
inline void context_at(std::span<const std::uint32_t> seq, std::size_t t, std::size_t window,
                       std::span<std::uint32_t> out) {
    for (std::size_t j = 0; j < window; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(window) +
                                   static_cast<std::ptrdiff_t>(j);
        out[j] = src < 0 ? 0u : seq[static_cast<std::size_t>(src)];
    }
}

}  // namespace detail

/// One example per in-vocabulary position, predicting it from the preceding
/// window. Out-of-vocabulary terms are dropped first.
inline std::vector<TrainingExample> make_examples(const NormalizedDocument& doc, std::uint32_t paragraph,
                                                  std::size_t window, const Vocabulary& vocab) {
    const auto seq = encode(doc, vocab);
    std::vector<TrainingExample> out;
    out.reserve(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        TrainingExample ex;
        ex.paragraph = paragraph;
        ex.context.resize(window);
        detail::context_at(seq, t, window, ex.context);
        ex.target = seq[t];
        out.push_back(std::move(ex));
    }
    return out;
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -ln sigma(x), evaluated without overflow.
inline double neg_log_sigmoid(double x) {
    return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

inline void build_input(const PvDmModel& m, std::span<const double> para, std::span<const std::uint32_t> context,
                        std::span<double> input) {
    const std::size_t dim = m.config.dim;
    std::copy(para.begin(), para.end(), input.begin());
    for (std::size_t j = 0; j < context.size(); ++j) {
        auto w = m.word_vecs.row(context[j]);
        std::copy(w.begin(), w.end(), input.begin() + static_cast<std::ptrdiff_t>((j + 1) * dim));
    }
}

struct NsWorkspace {
    std::vector<double> input;
    std::vector<double> input_grad;  // ascent direction w.r.t. input
    std::vector<double> coeff;
};

// One SGD step on the negative-sampling loss. All gradients are taken at the
// pre-step parameters, so repeated indices accumulate exactly. Output rows and
// word vectors are written through `shared` (null freezes them); `para` is
// always updated. Returns the pre-step loss.
inline double ns_update(const PvDmModel& m, PvDmModel* shared, std::span<double> para,
                        std::span<const std::uint32_t> context, std::uint32_t target,
                        std::span<const std::uint32_t> negatives, double lr, NsWorkspace& ws) {
    const std::size_t width = m.input_width();
    const std::size_t dim = m.config.dim;
    ws.input.resize(width);
    ws.input_grad.assign(width, 0.0);
    ws.coeff.resize(negatives.size() + 1);
    build_input(m, para, context, ws.input);

    double loss = 0.0;
    for (std::size_t i = 0; i <= negatives.size(); ++i) {
        const std::uint32_t w = i == 0 ? target : negatives[i - 1];
        const double label = i == 0 ? 1.0 : 0.0;
        const double s = dot(m.out_weights.row(w), ws.input);
        loss += i == 0 ? neg_log_sigmoid(s) : neg_log_sigmoid(-s);
        ws.coeff[i] = label - sigmoid(s);
        const auto row = m.out_weights.row(w);
        for (std::size_t c = 0; c < width; ++c) ws.input_grad[c] += ws.coeff[i] * row[c];
    }
    if (lr == 0.0) return loss;

    if (shared != nullptr) {
        for (std::size_t i = 0; i <= negatives.size(); ++i) {
            const std::uint32_t w = i == 0 ? target : negatives[i - 1];
            auto row = shared->out_weights.row(w);
            const double g = lr * ws.coeff[i];
            for (std::size_t c = 0; c < width; ++c) row[c] += g * ws.input[c];
        }
        for (std::size_t j = 0; j < context.size(); ++j) {
            if (context[j] == 0) continue;
            auto w = shared->word_vecs.row(context[j]);
            const double* g = ws.input_grad.data() + (j + 1) * dim;
            for (std::size_t c = 0; c < dim; ++c) w[c] += lr * g[c];
        }
    }
    for (std::size_t c = 0; c < dim; ++c) para[c] += lr * ws.input_grad[c];
    return loss;
}

}  // namespace detail

struct ForwardResult {
    std::vector<double> input;   // dim * (window + 1)
    std::vector<double> scores;  // one per vocabulary slot
};

inline ForwardResult forward(const PvDmModel& m, const TrainingExample& ex) {
    ForwardResult r;
    r.input.resize(m.input_width());
    detail::build_input(m, m.para_vecs.row(ex.paragraph), ex.context, r.input);
    r.scores.resize(m.vocab.size());
    for (std::size_t w = 0; w < m.vocab.size(); ++w) r.scores[w] = detail::dot(m.out_weights.row(w), r.input);
    return r;
}

inline double ns_loss(const PvDmModel& m, const TrainingExample& ex, std::span<const std::uint32_t> negatives) {
    std::vector<double> input(m.input_width());
    detail::build_input(m, m.para_vecs.row(ex.paragraph), ex.context, input);
    double loss = detail::neg_log_sigmoid(detail::dot(m.out_weights.row(ex.target), input));
    for (auto n : negatives) loss += detail::neg_log_sigmoid(-detail::dot(m.out_weights.row(n), input));
    return loss;
}

/// Gradient of ns_loss with respect to every parameter it touches. Rows
/// that appear more than once (repeated context words, repeated negatives)
/// are summed. The null token is excluded from `words`.
struct NsGradient {
    double loss = 0.0;
    std::vector<double> paragraph;
    std::map<std::uint32_t, std::vector<double>> words;
    std::map<std::uint32_t, std::vector<double>> out_rows;
};

inline NsGradient ns_gradient(const PvDmModel& m, const TrainingExample& ex,
                              std::span<const std::uint32_t> negatives) {
    const std::size_t dim = m.config.dim;
    const std::size_t width = m.input_width();
    std::vector<double> input(width);
    detail::build_input(m, m.para_vecs.row(ex.paragraph), ex.context, input);

    NsGradient g;
    std::vector<double> d_input(width, 0.0);
    for (std::size_t i = 0; i <= negatives.size(); ++i) {
        const std::uint32_t w = i == 0 ? ex.target : negatives[i - 1];
        const double label = i == 0 ? 1.0 : 0.0;
        const double s = detail::dot(m.out_weights.row(w), input);
        g.loss += i == 0 ? detail::neg_log_sigmoid(s) : detail::neg_log_sigmoid(-s);
        const double d_score = detail::sigmoid(s) - label;
        auto& row_grad = g.out_rows[w];
        row_grad.resize(width, 0.0);
        const auto row = m.out_weights.row(w);
        for (std::size_t c = 0; c < width; ++c) {
            row_grad[c] += d_score * input[c];
            d_input[c] += d_score * row[c];
        }
    }
    g.paragraph.assign(d_input.begin(), d_input.begin() + static_cast<std::ptrdiff_t>(dim));
    for (std::size_t j = 0; j < ex.context.size(); ++j) {
        const auto w = ex.context[j];
        if (w == 0) continue;
        auto& wg = g.words[w];
        wg.resize(dim, 0.0);
        for (std::size_t c = 0; c < dim; ++c) wg[c] += d_input[(j + 1) * dim + c];
    }
    return g;
}

/// Moves the target and negative output rows, the paragraph vector and the
/// non-null context word vectors by -lr * gradient. Returns the loss before
/// the step.
inline double sgd_step(PvDmModel& m, const TrainingExample& ex, std::span<const std::uint32_t> negatives,
                       double lr) {
    if (lr < 0.0) throw std::invalid_argument("learning rate must be non-negative");
    detail::NsWorkspace ws;
    return detail::ns_update(m, &m, m.para_vecs.row(ex.paragraph), ex.context, ex.target, negatives, lr, ws);
}

/// Draws negative samples from the smoothed unigram distribution, never
/// returning the null token or the current target.
class NegativeSampler {
public:
    explicit NegativeSampler(const Vocabulary& vocab) {
        cumulative_.reserve(vocab.size());
        double total = 0.0;
        for (std::size_t i = 1; i < vocab.size(); ++i) {
            total += std::pow(static_cast<double>(vocab.counts()[i]), 0.75);
            cumulative_.push_back(total);
        }
    }

    /// Number of distinct words available as negatives for some target.
    [[nodiscard]] std::size_t word_count() const noexcept { return cumulative_.size(); }

    std::uint32_t draw(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return static_cast<std::uint32_t>(it - cumulative_.begin()) + 1;
    }

    /// Fills `out` with draws different from `target`. With a single-word
    /// vocabulary there is nothing to contrast against and `out` is left empty.
    void draw_negatives(std::uint32_t target, std::size_t k, Rng& rng, std::vector<std::uint32_t>& out) const {
        out.clear();
        if (cumulative_.size() < 2) return;
        while (out.size() < k) {
            const auto w = draw(rng);
            if (w != target) out.push_back(w);
        }
    }

private:
    std::vector<double> cumulative_;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Trains paragraph and word vectors over `documents` (cases and queries
/// alike; each document becomes one paragraph). Single-threaded and
/// bit-reproducible for a given seed.
inline PvDmModel train(std::span<const NormalizedDocument> documents, const PvDmConfig& config,
                       const EpochCallback& on_epoch = {}) {
    config.validate();
    Vocabulary vocab = build_vocab(documents, config.min_count);
    std::vector<DocId> ids;
    ids.reserve(documents.size());
    for (const auto& d : documents) ids.push_back(d.id);
    {
        auto sorted = ids;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw FormatError("duplicate paragraph label in training documents");
        }
    }
    PvDmModel m = init_model(std::move(vocab), std::move(ids), config);
    if (config.epochs == 0) return m;

    std::vector<std::vector<std::uint32_t>> encoded;
    encoded.reserve(documents.size());
    std::vector<std::pair<std::uint32_t, std::uint32_t>> positions;
    for (std::uint32_t p = 0; p < documents.size(); ++p) {
        encoded.push_back(encode(documents[p], m.vocab));
        for (std::uint32_t t = 0; t < encoded.back().size(); ++t) positions.emplace_back(p, t);
    }
    if (positions.empty()) return m;

    const NegativeSampler sampler(m.vocab);
    Rng rng(derive_seed(config.seed, 2));
    detail::NsWorkspace ws;
    std::vector<std::uint32_t> context(config.window);
    std::vector<std::uint32_t> negatives;
    const double total_steps = static_cast<double>(positions.size()) * static_cast<double>(config.epochs);
    std::uint64_t step = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span(positions));
        double epoch_loss = 0.0;
        for (const auto& [p, t] : positions) {
            const double progress = static_cast<double>(step++) / total_steps;
            const double lr = config.learning_rate - (config.learning_rate - config.min_learning_rate) * progress;
            const auto& seq = encoded[p];
            detail::context_at(seq, t, config.window, context);
            sampler.draw_negatives(seq[t], config.negatives, rng, negatives);
            epoch_loss += detail::ns_update(m, &m, m.para_vecs.row(p), context, seq[t], negatives, lr, ws);
        }
        if (on_epoch) on_epoch(epoch + 1, epoch_loss / static_cast<double>(positions.size()));
    }
    return m;
}

inline PvDmModel train(const std::vector<NormalizedDocument>& documents, const PvDmConfig& config,
                       const EpochCallback& on_epoch = {}) {
    return train(std::span<const NormalizedDocument>(documents), config, on_epoch);
}

struct InferOptions {
    std::size_t steps = 50;
    double tolerance = 1e-4;
};

/// Fits a fresh paragraph vector for `doc` with word vectors and output
/// weights frozen. Stops after `steps` passes or once a pass moves the
/// vector by less than `tolerance` (Euclidean). Throws EmptyOverlapError
/// when no term of `doc` is in the vocabulary.
inline std::vector<double> infer_paragraph(const PvDmModel& model, const NormalizedDocument& doc,
                                           const InferOptions& options) {
    const auto seq = encode(doc, model.vocab);
    if (seq.empty()) {
        throw EmptyOverlapError("document '" + doc.id.label + "' has no terms in the model vocabulary");
    }
    const std::size_t dim = model.config.dim;
    Rng rng(derive_seed(model.config.seed ^ fnv1a64(doc.id.label), 3));
    std::vector<double> para(dim);
    detail::fill_uniform(para, dim, rng);
    if (options.steps == 0) return para;

    const NegativeSampler sampler(model.vocab);
    detail::NsWorkspace ws;
    std::vector<std::uint32_t> context(model.config.window);
    std::vector<std::uint32_t> negatives;
    std::vector<double> before(dim);
    const double lr0 = model.config.learning_rate;
    const double lr1 = model.config.min_learning_rate;
    const double total_steps = static_cast<double>(options.steps) * static_cast<double>(seq.size());
    std::uint64_t step = 0;

    for (std::size_t pass = 0; pass < options.steps; ++pass) {
        before = para;
        for (std::size_t t = 0; t < seq.size(); ++t) {
            const double lr = lr0 - (lr0 - lr1) * (static_cast<double>(step++) / total_steps);
            detail::context_at(seq, t, model.config.window, context);
            sampler.draw_negatives(seq[t], model.config.negatives, rng, negatives);
            detail::ns_update(model, nullptr, para, context, seq[t], negatives, lr, ws);
        }
        double moved = 0.0;
        for (std::size_t c = 0; c < dim; ++c) moved += (para[c] - before[c]) * (para[c] - before[c]);
        if (std::sqrt(moved) < options.tolerance) break;
    }
    return para;
}

inline std::vector<double> infer_paragraph(const PvDmModel& model, const NormalizedDocument& doc) {
    return infer_paragraph(model, doc, InferOptions{model.config.infer_steps, model.config.infer_tolerance});
}

/// Cosine similarity, clamped to [-1, 1]. Throws on a zero vector or a
/// width mismatch.
inline double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine: vectors differ in width");
    const double nu = std::sqrt(detail::dot(u, u));
    const double nv = std::sqrt(detail::dot(v, v));
    if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine: zero vector");
    return std::clamp(detail::dot(u, v) / (nu * nv), -1.0, 1.0);
}

/// Ranks the model's paragraphs of `candidate_kind` by cosine to `query`,
/// best first with ties broken by label, truncated to `cutoff`.
inline std::vector<ScoredDoc> rank_by_cosine(std::span<const double> query, const PvDmModel& model,
                                             std::size_t cutoff, DocKind candidate_kind = DocKind::kCase) {
    if (cutoff == 0) throw std::invalid_argument("cutoff must be at least 1");
    std::vector<ScoredDoc> scored;
    for (std::size_t i = 0; i < model.paragraphs.size(); ++i) {
        if (model.paragraphs[i].kind != candidate_kind) continue;
        const auto row = model.para_vecs.row(i);
        const bool zero = std::all_of(row.begin(), row.end(), [](double x) { return x == 0.0; });
        scored.push_back(ScoredDoc{model.paragraphs[i], zero ? -1.0 : cosine(query, row)});
    }
    if (scored.size() > cutoff) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(cutoff), scored.end(),
                          ranks_before);
        scored.resize(cutoff);
    } else {
        std::sort(scored.begin(), scored.end(), ranks_before);
    }
    return scored;
}

inline constexpr std::string_view kModelMagic = "JRPV";
inline constexpr std::uint8_t kModelVersion = 1;

inline std::string serialize_model(const PvDmModel& m) {
    ByteWriter w(kModelMagic, kModelVersion);
    const auto& c = m.config;
    w.put_u64(c.dim);
    w.put_u64(c.window);
    w.put_u64(c.epochs);
    w.put_f64(c.learning_rate);
    w.put_f64(c.min_learning_rate);
    w.put_u64(c.negatives);
    w.put_u64(c.min_count);
    w.put_u64(c.seed);
    w.put_u64(c.infer_steps);
    w.put_f64(c.infer_tolerance);

    w.put_u64(m.vocab.min_count());
    w.put_u64(m.vocab.size());
    for (std::size_t i = 0; i < m.vocab.size(); ++i) {
        w.put_string(m.vocab.terms()[i]);
        w.put_u64(m.vocab.counts()[i]);
    }
    w.put_u64(m.paragraphs.size());
    for (const auto& id : m.paragraphs) {
        w.put_u8(static_cast<std::uint8_t>(id.kind));
        w.put_string(id.label);
    }
    for (const Matrix* mat : {&m.word_vecs, &m.para_vecs, &m.out_weights}) {
        w.put_u64(mat->rows());
        w.put_u64(mat->cols());
        for (double v : mat->data()) w.put_f64(v);
    }
    return std::move(w).finish();
}

inline PvDmModel deserialize_model(std::string_view bytes, std::string source = "model") {
    ByteReader r(bytes, kModelMagic, kModelVersion, std::move(source));
    PvDmModel m;
    auto& c = m.config;
    c.dim = r.get_u64();
    c.window = r.get_u64();
    c.epochs = r.get_u64();
    c.learning_rate = r.get_f64();
    c.min_learning_rate = r.get_f64();
    c.negatives = r.get_u64();
    c.min_count = r.get_u64();
    c.seed = r.get_u64();
    c.infer_steps = r.get_u64();
    c.infer_tolerance = r.get_f64();
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        r.fail(std::string("invalid config block: ") + e.what());
    }

    const auto min_count = r.get_u64();
    const auto vocab_size = r.get_count(16);
    std::vector<std::string> terms;
    std::vector<std::uint64_t> counts;
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        terms.push_back(r.get_string());
        counts.push_back(r.get_u64());
    }
    m.vocab = Vocabulary(std::move(terms), std::move(counts), min_count);

    const auto n_para = r.get_count(9);
    for (std::uint64_t i = 0; i < n_para; ++i) {
        auto kind = doc_kind_from_byte(r.get_u8());
        if (!kind) r.fail("unknown paragraph kind");
        m.paragraphs.push_back(DocId{*kind, r.get_string()});
    }

    auto read_matrix = [&](std::size_t want_rows, std::size_t want_cols) {
        const auto rows = r.get_u64();
        const auto cols = r.get_u64();
        if (rows != want_rows || cols != want_cols) r.fail("matrix shape does not match config and vocabulary");
        if (cols != 0 && rows > r.remaining() / 8 / cols) r.fail("matrix exceeds file size");
        Matrix mat(rows, cols);
        for (auto& v : mat.data()) {
            v = r.get_f64();
            if (!std::isfinite(v)) r.fail("non-finite matrix entry");
        }
        return mat;
    };
    m.word_vecs = read_matrix(m.vocab.size(), c.dim);
    m.para_vecs = read_matrix(m.paragraphs.size(), c.dim);
    m.out_weights = read_matrix(m.vocab.size(), c.input_width());
    r.expect_end();
    return m;
}

inline void save_model(const PvDmModel& m, const std::filesystem::path& path) {
    write_binary_file(path, serialize_model(m));
}

inline PvDmModel load_model(const std::filesystem::path& path) {
    const std::string bytes = read_binary_file(path);
    return deserialize_model(bytes, path.string());
}

}  // namespace jurisrank
