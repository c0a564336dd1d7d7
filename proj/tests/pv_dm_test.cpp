#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "jurisrank/pv_dm.hpp"
#include "support/gradient_check.hpp"
#include "support/oracles.hpp"

using namespace jurisrank;

namespace {

NormalizedDocument doc(const std::string& label, std::vector<std::string> terms, DocKind kind = DocKind::kCase) {
    NormalizedDocument d;
    d.id = DocId{kind, label};
    d.raw_token_count = terms.size();
    d.terms = std::move(terms);
    return d;
}

PvDmConfig small_config(std::size_t dim, std::size_t window) {
    PvDmConfig c;
    c.dim = dim;
    c.window = window;
    c.epochs = 1;
    c.min_count = 1;
    return c;
}

// Vocabulary w1..w{n} with descending counts so slot i holds "w<i>".
Vocabulary numbered_vocab(std::size_t n) {
    std::vector<std::string> terms{kNullToken};
    std::vector<std::uint64_t> counts{0};
    for (std::size_t i = 1; i <= n; ++i) {
        terms.push_back("w" + std::to_string(i));
        counts.push_back(100 - i);
    }
    return Vocabulary(terms, counts, 1);
}

void check_gradient(const PvDmModel& m, const TrainingExample& ex, const std::vector<std::uint32_t>& negatives) {
    EXPECT_LT(jurisrank::testing::max_gradient_error(m, ex, negatives), 1e-4);
}

std::size_t self_hits_top3(const PvDmModel& model, const std::vector<NormalizedDocument>& docs, bool use_inferred) {
    std::size_t hits = 0;
    for (const auto& d : docs) {
        std::vector<double> v;
        if (use_inferred) {
            v = infer_paragraph(model, d);
        } else {
            const auto r = model.para_vecs.row(*model.paragraph_index(d.id));
            v.assign(r.begin(), r.end());
        }
        const auto ranked = rank_by_cosine(v, model, 3);
        hits += std::any_of(ranked.begin(), ranked.end(), [&](const ScoredDoc& s) { return s.doc == d.id; });
    }
    return hits;
}

}  // namespace

TEST(PvDmConfig, DefaultsAndValidation) {
    const PvDmConfig c;
    EXPECT_EQ(c.dim, 150u);
    EXPECT_EQ(c.window, 20u);
    EXPECT_EQ(c.epochs, 50u);
    EXPECT_DOUBLE_EQ(c.learning_rate, 0.025);
    EXPECT_EQ(c.negatives, 5u);
    EXPECT_EQ(c.input_width(), 150u * 21u);
    EXPECT_NO_THROW(c.validate());

    auto bad = c;
    bad.dim = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = c;
    bad.window = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = c;
    bad.learning_rate = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = c;
    bad.min_learning_rate = 0.5;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = c;
    bad.epochs = 0;
    EXPECT_NO_THROW(bad.validate());
}

TEST(BuildVocab, MinCountDropsRareTerms) {
    const std::vector docs{doc("D", {"a", "a", "b"})};
    const auto v = build_vocab(docs, 2);
    EXPECT_EQ(v.terms(), (std::vector<std::string>{kNullToken, "a"}));
    EXPECT_EQ(v.counts()[1], 2u);
    EXPECT_EQ(v.find("a"), 1u);
    EXPECT_FALSE(v.find("b"));
    EXPECT_FALSE(v.find(kNullToken));
}

TEST(BuildVocab, FrequencyThenLexicalOrder) {
    const std::vector docs{doc("D1", {"c", "b", "a", "a"}), doc("D2", {"b", "c", "a"})};
    const auto v = build_vocab(docs, 1);
    EXPECT_EQ(v.terms(), (std::vector<std::string>{kNullToken, "a", "b", "c"}));
    EXPECT_EQ(v.counts(), (std::vector<std::uint64_t>{0, 3, 2, 2}));
}

TEST(BuildVocab, AllRareIsAnError) {
    const std::vector docs{doc("D", {"x", "y", "z"})};
    EXPECT_THROW(build_vocab(docs, 2), EmptyVocabularyError);
    EXPECT_THROW(build_vocab(std::vector<NormalizedDocument>{}, 1), EmptyCorpusError);
}

TEST(InitModel, ShapesRangeAndZeroOutput) {
    auto cfg = small_config(8, 3);
    const auto m = init_model(numbered_vocab(5), {DocId{DocKind::kCase, "A"}, DocId{DocKind::kQuery, "Q"}}, cfg);
    EXPECT_EQ(m.word_vecs.rows(), 6u);
    EXPECT_EQ(m.word_vecs.cols(), 8u);
    EXPECT_EQ(m.para_vecs.rows(), 2u);
    EXPECT_EQ(m.out_weights.cols(), 32u);
    for (double v : m.out_weights.data()) EXPECT_EQ(v, 0.0);
    for (const auto* mat : {&m.word_vecs, &m.para_vecs}) {
        for (double v : mat->data()) {
            EXPECT_GT(v, -0.5 / 8.0);
            EXPECT_LT(v, 0.5 / 8.0);
        }
    }
    EXPECT_EQ(m.paragraph_index(DocId{DocKind::kQuery, "Q"}), 1u);
    EXPECT_FALSE(m.paragraph_index(DocId{DocKind::kCase, "Q"}));
}

TEST(InitModel, DeterministicInSeed) {
    auto cfg = small_config(8, 3);
    const std::vector<DocId> ids{DocId{DocKind::kCase, "A"}};
    EXPECT_EQ(init_model(numbered_vocab(4), ids, cfg), init_model(numbered_vocab(4), ids, cfg));
    auto other = cfg;
    other.seed = 2;
    EXPECT_NE(init_model(numbered_vocab(4), ids, cfg).word_vecs, init_model(numbered_vocab(4), ids, other).word_vecs);
}

TEST(MakeExamples, LeftPaddedWithNull) {
    const std::vector docs{doc("D", {"a", "b", "c", "a", "b"})};
    const auto v = build_vocab(docs, 1);  // a=1, b=2, c=3
    const auto ex = make_examples(docs[0], 0, 2, v);
    ASSERT_EQ(ex.size(), 5u);
    EXPECT_EQ(ex[0], (TrainingExample{0, {0, 0}, 1}));
    EXPECT_EQ(ex[1], (TrainingExample{0, {0, 1}, 2}));
    EXPECT_EQ(ex[2], (TrainingExample{0, {1, 2}, 3}));
    EXPECT_EQ(ex[4], (TrainingExample{0, {3, 1}, 2}));
}

TEST(MakeExamples, OutOfVocabularyTermsSkipped) {
    const std::vector docs{doc("D", {"a", "a", "rare", "b", "b"})};
    const auto v = build_vocab(docs, 2);
    const auto ex = make_examples(docs[0], 3, 3, v);
    ASSERT_EQ(ex.size(), 4u);
    EXPECT_EQ(ex[2], (TrainingExample{3, {0, 1, 1}, 2}));
    EXPECT_TRUE(make_examples(doc("E", {"rare"}), 0, 3, v).empty());
}

TEST(Forward, InputConcatenationAndScores) {
    auto m = init_model(numbered_vocab(2), {DocId{DocKind::kCase, "P"}}, small_config(1, 2));
    m.para_vecs(0, 0) = 2.0;
    m.word_vecs(0, 0) = 7.0;  // null slot
    m.word_vecs(1, 0) = 3.0;
    m.word_vecs(2, 0) = 5.0;
    m.out_weights(1, 0) = 1.0;
    m.out_weights(1, 1) = -1.0;
    m.out_weights(1, 2) = 0.0;
    m.out_weights(2, 2) = -0.2;
    const auto r = forward(m, TrainingExample{0, {0, 1}, 2});
    EXPECT_EQ(r.input, (std::vector<double>{2.0, 7.0, 3.0}));
    ASSERT_EQ(r.scores.size(), 3u);
    EXPECT_DOUBLE_EQ(r.scores[0], 0.0);
    EXPECT_DOUBLE_EQ(r.scores[1], 2.0 - 7.0);
    EXPECT_DOUBLE_EQ(r.scores[2], -0.6);

    m.out_weights(1, 0) = 0.0;
    m.out_weights(1, 1) = 0.0;
    m.out_weights(1, 2) = 1.0;
    m.word_vecs(1, 0) = -1.0;
    EXPECT_DOUBLE_EQ(forward(m, TrainingExample{0, {0, 1}, 2}).scores[1], -1.0);
}

TEST(NsLoss, ZeroWeightsGiveLn2PerTerm) {
    const auto m = init_model(numbered_vocab(6), {DocId{DocKind::kCase, "P"}}, small_config(4, 2));
    const TrainingExample ex{0, {1, 2}, 3};
    const std::vector<std::uint32_t> negs{1, 2, 4, 5, 6};
    EXPECT_NEAR(ns_loss(m, ex, negs), 6.0 * std::log(2.0), 1e-12);
}

TEST(NsLoss, ConfidentCorrectScoresNearZero) {
    auto m = init_model(numbered_vocab(3), {DocId{DocKind::kCase, "P"}}, small_config(1, 1));
    m.para_vecs(0, 0) = 1.0;
    m.word_vecs(1, 0) = 0.0;
    m.out_weights(2, 0) = 20.0;
    m.out_weights(3, 0) = -20.0;
    EXPECT_LT(ns_loss(m, TrainingExample{0, {1}, 2}, std::vector<std::uint32_t>{3}), 1e-3);
    // And the reverse is heavily penalized.
    EXPECT_GT(ns_loss(m, TrainingExample{0, {1}, 3}, std::vector<std::uint32_t>{2}), 39.0);
}

TEST(NsLoss, MatchesClosedForm) {
    const auto m = jurisrank::testing::random_model(3, 2, 6, 2, 11);
    const TrainingExample ex{1, {4, 0}, 2};
    const std::vector<std::uint32_t> negs{5, 1, 5};
    const auto fwd = forward(m, ex);
    auto nls = [](double x) { return std::log(1.0 + std::exp(-x)); };
    const double expected = nls(fwd.scores[2]) + 2.0 * nls(-fwd.scores[5]) + nls(-fwd.scores[1]);
    EXPECT_NEAR(ns_loss(m, ex, negs), expected, 1e-12);
}

TEST(NsGradient, FiniteDifferenceSmallModel) {
    const auto m = jurisrank::testing::random_model(3, 2, 6, 2, 3);
    check_gradient(m, TrainingExample{1, {2, 4}, 3}, {1, 5, 6});
    check_gradient(m, TrainingExample{0, {0, 2}, 2}, {2, 2, 6});  // target repeated as negative
    check_gradient(m, TrainingExample{0, {4, 4}, 1}, {4});        // repeated context word
}

TEST(NsGradient, FiniteDifferenceRandomConfigs) {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 1 + rng.below(4);
        const std::size_t window = 1 + rng.below(3);
        const std::size_t words = 2 + rng.below(7);
        const auto m = jurisrank::testing::random_model(dim, window, words, 3, 100 + static_cast<std::uint64_t>(trial));
        const auto [ex, negs] = jurisrank::testing::random_example(rng, m);
        SCOPED_TRACE(trial);
        check_gradient(m, ex, negs);
    }
}

TEST(SgdStep, ZeroLearningRateIsNoOp) {
    auto m = jurisrank::testing::random_model(4, 2, 5, 2, 9);
    const auto before = m;
    sgd_step(m, TrainingExample{0, {1, 2}, 3}, std::vector<std::uint32_t>{4, 5}, 0.0);
    EXPECT_EQ(m, before);
    EXPECT_THROW(sgd_step(m, TrainingExample{0, {1, 2}, 3}, std::vector<std::uint32_t>{4}, -1.0),
                 std::invalid_argument);
}

TEST(SgdStep, EqualsGradientStep) {
    auto m = jurisrank::testing::random_model(3, 3, 6, 2, 21);
    const TrainingExample ex{1, {0, 2, 2}, 4};
    const std::vector<std::uint32_t> negs{1, 4, 6, 1};
    const auto g = ns_gradient(m, ex, negs);
    const double lr = 0.05;
    auto expected = m;
    for (std::size_t c = 0; c < 3; ++c) expected.para_vecs(1, c) -= lr * g.paragraph[c];
    for (const auto& [w, grad] : g.words)
        for (std::size_t c = 0; c < 3; ++c) expected.word_vecs(w, c) -= lr * grad[c];
    for (const auto& [w, grad] : g.out_rows)
        for (std::size_t c = 0; c < grad.size(); ++c) expected.out_weights(w, c) -= lr * grad[c];

    const double loss = sgd_step(m, ex, negs, lr);
    EXPECT_NEAR(loss, g.loss, 1e-12);
    for (auto [got, want] : {std::pair{&m.para_vecs, &expected.para_vecs}, {&m.word_vecs, &expected.word_vecs},
                             {&m.out_weights, &expected.out_weights}}) {
        for (std::size_t i = 0; i < got->data().size(); ++i) ASSERT_NEAR(got->data()[i], want->data()[i], 1e-12);
    }
    EXPECT_EQ(m.word_vecs.row(0)[0], expected.word_vecs.row(0)[0]);
}

TEST(SgdStep, SmallStepReducesLoss) {
    auto m = jurisrank::testing::random_model(4, 2, 6, 1, 5);
    const TrainingExample ex{0, {1, 2}, 3};
    const std::vector<std::uint32_t> negs{4, 5, 6};
    const double before = ns_loss(m, ex, negs);
    sgd_step(m, ex, negs, 0.01);
    EXPECT_LT(ns_loss(m, ex, negs), before);
}

TEST(NegativeSampler, NeverNullOrTarget) {
    const auto v = numbered_vocab(5);
    const NegativeSampler sampler(v);
    Rng rng(4);
    std::vector<std::uint32_t> out;
    std::vector<int> hist(6, 0);
    for (int i = 0; i < 2000; ++i) {
        sampler.draw_negatives(2, 5, rng, out);
        ASSERT_EQ(out.size(), 5u);
        for (auto w : out) {
            ASSERT_NE(w, 0u);
            ASSERT_NE(w, 2u);
            ASSERT_LE(w, 5u);
            ++hist[w];
        }
    }
    EXPECT_GT(hist[1], hist[5]);  // counts 99 vs 95, smoothed but still ordered in expectation
    EXPECT_GT(hist[5], 0);
}

TEST(NegativeSampler, SingleWordVocabularyHasNoNegatives) {
    const NegativeSampler sampler(numbered_vocab(1));
    Rng rng(1);
    std::vector<std::uint32_t> out{9};
    sampler.draw_negatives(1, 5, rng, out);
    EXPECT_TRUE(out.empty());
}

TEST(Train, LossDecreasesOnToyCorpus) {
    const auto docs = jurisrank::testing::toy_corpus();
    PvDmConfig cfg;
    cfg.dim = 16;
    cfg.window = 3;
    cfg.epochs = 20;
    cfg.min_count = 1;
    std::vector<double> losses;
    train(docs, cfg, [&](std::size_t epoch, double loss) {
        EXPECT_EQ(epoch, losses.size() + 1);
        losses.push_back(loss);
    });
    ASSERT_EQ(losses.size(), 20u);
    EXPECT_LT(losses.back(), losses.front());
    EXPECT_LT(losses.back(), 0.9 * losses.front());
}

TEST(Train, SeedDeterminism) {
    const auto docs = jurisrank::testing::toy_corpus();
    PvDmConfig cfg;
    cfg.dim = 8;
    cfg.window = 2;
    cfg.epochs = 3;
    cfg.min_count = 1;
    const auto a = train(docs, cfg);
    const auto b = train(docs, cfg);
    EXPECT_EQ(a, b);
    EXPECT_EQ(serialize_model(a), serialize_model(b));
    cfg.seed = 2;
    EXPECT_NE(train(docs, cfg).para_vecs, a.para_vecs);
}

TEST(Train, ZeroEpochsEqualsInit) {
    const auto docs = jurisrank::testing::toy_corpus();
    PvDmConfig cfg;
    cfg.dim = 8;
    cfg.window = 2;
    cfg.epochs = 0;
    cfg.min_count = 1;
    const auto m = train(docs, cfg);
    std::vector<DocId> ids;
    for (const auto& d : docs) ids.push_back(d.id);
    EXPECT_EQ(m, init_model(build_vocab(docs, 1), ids, cfg));
}

TEST(Train, NullVectorStaysFrozen) {
    const auto docs = jurisrank::testing::toy_corpus();
    PvDmConfig cfg;
    cfg.dim = 8;
    cfg.window = 4;
    cfg.epochs = 2;
    cfg.min_count = 1;
    auto zero = cfg;
    zero.epochs = 0;
    const auto trained = train(docs, cfg);
    const auto initial = train(docs, zero);
    const auto a = trained.word_vecs.row(0);
    const auto b = initial.word_vecs.row(0);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
}

TEST(Train, DuplicateParagraphLabelsRejected) {
    const std::vector docs{doc("A", {"x", "y"}), doc("A", {"y", "x"})};
    auto cfg = small_config(4, 2);
    EXPECT_THROW(train(docs, cfg), FormatError);
}

class TrainedToyModel : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        docs_ = jurisrank::testing::toy_corpus();
        PvDmConfig cfg;
        cfg.dim = 16;
        cfg.window = 3;
        cfg.epochs = 40;
        cfg.min_count = 1;
        model_ = train(docs_, cfg);
    }
    static inline std::vector<NormalizedDocument> docs_;
    static inline PvDmModel model_;
};

TEST_F(TrainedToyModel, TrainedVectorsRetrieveThemselves) {
    EXPECT_EQ(self_hits_top3(model_, docs_, false), docs_.size());
}

TEST_F(TrainedToyModel, InferredVectorsRetrieveSource) {
    const auto hits = self_hits_top3(model_, docs_, true);
    EXPECT_GE(hits * 10, docs_.size() * 8) << hits << " of " << docs_.size();
}

TEST_F(TrainedToyModel, InferenceIsDeterministicAndLeavesModelAlone) {
    const auto before = model_;
    const auto a = infer_paragraph(model_, docs_[3]);
    const auto b = infer_paragraph(model_, docs_[3]);
    EXPECT_EQ(a, b);
    EXPECT_EQ(model_, before);
    EXPECT_EQ(a.size(), 16u);
}

TEST_F(TrainedToyModel, InferenceWithZeroStepsReturnsInitialVector) {
    const auto v = infer_paragraph(model_, docs_[0], InferOptions{0, 0.0});
    ASSERT_EQ(v.size(), 16u);
    for (double x : v) {
        EXPECT_GT(x, -0.5 / 16.0);
        EXPECT_LT(x, 0.5 / 16.0);
    }
    EXPECT_NE(v, infer_paragraph(model_, docs_[0], InferOptions{1, 0.0}));
}

TEST_F(TrainedToyModel, InferenceWithoutOverlapFails) {
    EXPECT_THROW(infer_paragraph(model_, doc("Q", {"unseen", "words"}, DocKind::kQuery)), EmptyOverlapError);
    EXPECT_THROW(infer_paragraph(model_, doc("Q", {}, DocKind::kQuery)), EmptyOverlapError);
}

TEST_F(TrainedToyModel, RankByCosineOrderedAndCut) {
    const auto q = infer_paragraph(model_, docs_[5]);
    const auto r = rank_by_cosine(q, model_, 7);
    ASSERT_EQ(r.size(), 7u);
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_GE(r[i].score, -1.0);
        EXPECT_LE(r[i].score, 1.0);
        if (i > 0) {
            EXPECT_TRUE(ranks_before(r[i - 1], r[i]));
        }
    }
    EXPECT_EQ(rank_by_cosine(q, model_, 100).size(), docs_.size());
    EXPECT_TRUE(rank_by_cosine(q, model_, 5, DocKind::kQuery).empty());
    EXPECT_THROW(rank_by_cosine(q, model_, 0), std::invalid_argument);
}

TEST(Cosine, Properties) {
    const std::vector<double> u{1.0, 2.0, -3.0};
    const std::vector<double> v{-2.0, 0.5, 4.0};
    EXPECT_NEAR(cosine(u, u), 1.0, 1e-12);
    EXPECT_NEAR(cosine(u, v), cosine(v, u), 1e-15);
    const std::vector<double> scaled{3.0, 6.0, -9.0};
    EXPECT_NEAR(cosine(u, scaled), 1.0, 1e-12);
    const std::vector<double> neg{-1.0, -2.0, 3.0};
    EXPECT_NEAR(cosine(u, neg), -1.0, 1e-12);
    const std::vector<double> zero{0.0, 0.0, 0.0};
    EXPECT_THROW(cosine(u, zero), std::invalid_argument);
    EXPECT_THROW(cosine(u, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Cosine, RandomVectorsBounded) {
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> a(6), b(6);
        for (auto& x : a) x = rng.uniform() - 0.5;
        for (auto& x : b) x = rng.uniform() - 0.5;
        const double c = cosine(a, b);
        ASSERT_GE(c, -1.0);
        ASSERT_LE(c, 1.0);
    }
}

TEST(RankByCosine, TiesByLabelAndZeroRowsLast) {
    auto m = init_model(numbered_vocab(2),
                        {DocId{DocKind::kCase, "B"}, DocId{DocKind::kCase, "A"}, DocId{DocKind::kCase, "Z"},
                         DocId{DocKind::kQuery, "Q"}},
                        small_config(2, 1));
    m.para_vecs(0, 0) = 1.0;
    m.para_vecs(0, 1) = 0.0;
    m.para_vecs(1, 0) = 2.0;
    m.para_vecs(1, 1) = 0.0;
    m.para_vecs(2, 0) = 0.0;
    m.para_vecs(2, 1) = 0.0;
    const std::vector<double> q{1.0, 0.0};
    const auto r = rank_by_cosine(q, m, 10);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].doc.label, "A");
    EXPECT_EQ(r[1].doc.label, "B");
    EXPECT_EQ(r[2].doc.label, "Z");
    EXPECT_EQ(r[2].score, -1.0);
}

TEST(ModelFile, RoundTripIsBitExact) {
    const auto docs = jurisrank::testing::toy_corpus();
    PvDmConfig cfg;
    cfg.dim = 6;
    cfg.window = 2;
    cfg.epochs = 2;
    cfg.min_count = 1;
    const auto m = train(docs, cfg);
    const auto path = std::filesystem::temp_directory_path() / "jurisrank_pvdm_roundtrip.bin";
    save_model(m, path);
    const auto loaded = load_model(path);
    EXPECT_EQ(loaded, m);
    EXPECT_EQ(serialize_model(loaded), serialize_model(m));
    EXPECT_EQ(infer_paragraph(loaded, docs[2]), infer_paragraph(m, docs[2]));
}

TEST(ModelFile, CorruptionDetected) {
    auto cfg = small_config(3, 2);
    cfg.epochs = 0;
    const auto bytes = serialize_model(train(std::vector{doc("A", {"x", "y", "x"})}, cfg));
    EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 3)), ChecksumError);
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 1;
    EXPECT_THROW(deserialize_model(flipped), ChecksumError);
    auto version = bytes;
    version[4] = 2;
    EXPECT_THROW(deserialize_model(version), VersionError);
    auto magic = bytes;
    magic[1] = 'X';
    EXPECT_THROW(deserialize_model(magic), FormatError);
    EXPECT_THROW(load_model("/nonexistent/jurisrank/model.bin"), IoError);
}
