#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "linr/error.hpp"
#include "linr/retrieval.hpp"
#include "linr/scoring.hpp"
#include "linr/weights.hpp"
#include "test_util.hpp"

namespace linr {
namespace {

Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  std::normal_distribution<float> normal(0.0f, 0.5f);
  for (auto& v : m.data) v = normal(gen);
  return m;
}

DenseLayer layer(Matrix w, Activation act) {
  DenseLayer l;
  l.bias.assign(w.rows, 0.0f);
  l.weight = std::move(w);
  l.activation = act;
  return l;
}

Matrix identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.data[i * n + i] = 1.0f;
  return m;
}

Matrix ones_row(std::size_t n) {
  Matrix m(1, n);
  std::fill(m.data.begin(), m.data.end(), 1.0f);
  return m;
}

TEST(Cosine, Basics) {
  const std::vector<float> a = {3, 4};
  const std::vector<float> b = {6, 8};
  const std::vector<float> z = {0, 0};
  EXPECT_FLOAT_EQ(cosine(a, b), 1.0f);
  EXPECT_EQ(cosine(a, z), 0.0f);
  EXPECT_FLOAT_EQ(norm(a), 5.0f);
}

TEST(Mlp, HandComputedForward) {
  // [[1, -1], [2, 0.5]] x + [0.5, -10], ReLU, then [1, 1] h
  Matrix w1(2, 2);
  w1.data = {1, -1, 2, 0.5f};
  DenseLayer l1 = layer(w1, Activation::kReLU);
  l1.bias = {0.5f, -10.0f};
  Mlp mlp({l1, layer(ones_row(2), Activation::kIdentity)});
  // x = (3, 1): pre = (2.5, -3.5) -> relu (2.5, 0) -> 2.5
  EXPECT_EQ(mlp.forward(std::vector<float>{3, 1}), std::vector<float>{2.5f});
  // x = (1, 4): pre = (-2.5, -6) -> 0
  EXPECT_EQ(mlp.forward(std::vector<float>{1, 4}), std::vector<float>{0.0f});
  EXPECT_THROW(mlp.forward(std::vector<float>{1}), Error);
}

TEST(Mlp, EmptyIsIdentityAndShapesChain) {
  Mlp id;
  EXPECT_EQ(id.forward(std::vector<float>{1, 2, 3}), (std::vector<float>{1, 2, 3}));
  EXPECT_THROW(Mlp({layer(Matrix(2, 3), Activation::kIdentity), layer(Matrix(1, 3), Activation::kIdentity)}), Error);
  DenseLayer bad = layer(Matrix(2, 3), Activation::kIdentity);
  bad.bias.resize(1);
  EXPECT_THROW(Mlp({bad}), Error);
}

TEST(Mlp, WeightsRoundTripAndDefaultActivations) {
  std::mt19937_64 gen(1);
  Mlp mlp({layer(random_matrix(gen, 4, 3), Activation::kReLU), layer(random_matrix(gen, 2, 4), Activation::kIdentity)});
  WeightSet w;
  store_mlp(w, "m", mlp);
  const Mlp back = load_mlp(decode_weights(encode_weights(w)), "m");
  const std::vector<float> x = {0.3f, -1.0f, 2.0f};
  EXPECT_EQ(back.forward(x), mlp.forward(x));

  WeightSet bare;
  bare["p.0.weight"] = NamedArray{{2, 2}, {1, 0, 0, 1}};
  bare["p.1.weight"] = NamedArray{{1, 2}, {1, 1}};
  const Mlp defaults = load_mlp(bare, "p");
  EXPECT_EQ(defaults.layers()[0].activation, Activation::kReLU);
  EXPECT_EQ(defaults.layers()[1].activation, Activation::kIdentity);
  EXPECT_EQ(defaults.forward(std::vector<float>{-1, 2}), std::vector<float>{2.0f});
  EXPECT_TRUE(load_mlp(bare, "absent").is_identity());
}

TEST(HadamardMlp, IdentityWeightsReproduceDotExactly) {
  std::mt19937_64 gen(2);
  const std::size_t dim = 24;
  Matrix items = random_matrix(gen, 500, dim);
  const auto q = testing::random_vector(gen, dim);
  const HadamardMlp implicit{Mlp(), Mlp(), Mlp({layer(ones_row(dim), Activation::kIdentity)})};
  const HadamardMlp explicit_id{Mlp({layer(identity(dim), Activation::kIdentity)}),
                                Mlp({layer(identity(dim), Activation::kIdentity)}),
                                Mlp({layer(ones_row(dim), Activation::kIdentity)})};
  const auto expected = dot_scores(q, items);
  EXPECT_EQ(hadamard_mlp_score(implicit, q, items), expected);
  EXPECT_EQ(hadamard_mlp_score(explicit_id, q, items), expected);
}

TEST(HadamardMlp, HandComputedScore) {
  // member doubles, item identity, head sums: 2 * (1*3 + 2*4) = 22
  Matrix twice = identity(2);
  for (auto& v : twice.data) v *= 2.0f;
  const HadamardMlp m{Mlp({layer(twice, Activation::kIdentity)}), Mlp(),
                      Mlp({layer(ones_row(2), Activation::kIdentity)})};
  Matrix items(1, 2);
  items.data = {3, 4};
  EXPECT_EQ(hadamard_mlp_score(m, std::vector<float>{1, 2}, items), std::vector<float>{22.0f});
}

TEST(HadamardMlp, ValidationAndWeights) {
  const HadamardMlp no_head{Mlp(), Mlp(), Mlp()};
  EXPECT_THROW(no_head.validate(4), Error);
  const HadamardMlp mismatch{Mlp({layer(Matrix(3, 4), Activation::kIdentity)}), Mlp(),
                             Mlp({layer(ones_row(3), Activation::kIdentity)})};
  EXPECT_THROW(mismatch.validate(4), Error);
  std::mt19937_64 gen(3);
  const HadamardMlp m{Mlp({layer(random_matrix(gen, 5, 4), Activation::kReLU)}),
                      Mlp({layer(random_matrix(gen, 5, 4), Activation::kReLU)}),
                      Mlp({layer(random_matrix(gen, 1, 5), Activation::kIdentity)})};
  EXPECT_NO_THROW(m.validate(4));
  const auto back = HadamardMlp::from_weights(m.to_weights());
  Matrix items = random_matrix(gen, 10, 4);
  const std::vector<float> q = {1, -1, 0.5f, 2};
  EXPECT_EQ(hadamard_mlp_score(back, q, items), hadamard_mlp_score(m, q, items));
}

MolModel two_component_model(std::mt19937_64& gen, std::size_t dim, std::size_t clusters) {
  MolModel m;
  m.components.push_back({"embedding", Mlp({layer(random_matrix(gen, 6, dim), Activation::kIdentity)}),
                          Mlp({layer(random_matrix(gen, 6, dim), Activation::kIdentity)}), true});
  m.components.push_back({kClusterSource, Mlp(), Mlp(), false});
  m.cluster_centers = random_matrix(gen, clusters, dim);
  m.cluster_embeddings = random_matrix(gen, clusters, 3);
  const std::size_t gate_in = 2 * (dim + 3);
  m.gate = Mlp({layer(random_matrix(gen, 8, gate_in), Activation::kReLU),
                layer(random_matrix(gen, 2, 8), Activation::kIdentity)});
  return m;
}

TEST(MoL, GateRowsSumToOne) {
  std::mt19937_64 gen(4);
  const std::size_t dim = 8;
  const MolModel m = two_component_model(gen, dim, 5);
  m.validate(dim);
  for (int t = 0; t < 1000; ++t) {
    const auto qf = m.derive_features(testing::random_vector(gen, dim), nullptr);
    const auto xf = m.derive_features(testing::random_vector(gen, dim), nullptr);
    const auto pi = m.gate_weights(qf, xf);
    ASSERT_EQ(pi.size(), 2u);
    EXPECT_NEAR(pi[0] + pi[1], 1.0, 1e-6);
    EXPECT_GE(pi[0], 0.0);
    EXPECT_GE(pi[1], 0.0);
  }
}

TEST(MoL, ScoreIsGateWeightedSum) {
  std::mt19937_64 gen(5);
  const MolModel m = two_component_model(gen, 8, 4);
  const auto qf = m.derive_features(testing::random_vector(gen, 8), nullptr);
  const auto xf = m.derive_features(testing::random_vector(gen, 8), nullptr);
  const auto pi = m.gate_weights(qf, xf);
  const auto delta = m.component_logits(qf, xf);
  EXPECT_FLOAT_EQ(m.score(qf, xf), static_cast<float>(pi[0] * delta[0] + pi[1] * delta[1]));
  // cluster component uses a dot product of the looked-up cluster embeddings
  const auto& cq = qf.at(kClusterSource);
  const auto& cx = xf.at(kClusterSource);
  EXPECT_EQ(delta[1], dot(cq, cx));
}

TEST(MoL, SingleComponentRankingEqualsComponentRanking) {
  std::mt19937_64 gen(6);
  const std::size_t dim = 16;
  MolModel m;
  m.components.push_back({"embedding", Mlp({layer(random_matrix(gen, 8, dim), Activation::kReLU)}),
                          Mlp({layer(random_matrix(gen, 8, dim), Activation::kReLU)}), true});
  auto index = create_index(IndexConfig{.capacity = 300, .dim = dim});
  for (std::uint64_t id = 0; id < 300; ++id) index->upsert(id, testing::random_vector(gen, dim), {});
  const auto scorer = make_mol_scorer(m, dim);
  for (int t = 0; t < 20; ++t) {
    const auto q = testing::random_vector(gen, dim);
    Query query;
    query.embedding = q;
    query.k = 25;
    const auto got = run_query(*index, query, *scorer);
    // component-only ranking computed directly
    const auto fq = m.components[0].query_proj.forward(q);
    std::vector<std::pair<float, std::uint64_t>> ranked;
    for (const auto& item : index->export_live()) {
      ranked.push_back({cosine(fq, m.components[0].item_proj.forward(item.embedding)), item.id});
    }
    std::sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    ASSERT_EQ(got.items.size(), 25u);
    for (std::size_t i = 0; i < 25; ++i) {
      EXPECT_EQ(got.items[i].id, ranked[i].second);
      EXPECT_EQ(got.items[i].score, ranked[i].first);
    }
  }
}

TEST(MoL, WeightsRoundTripAndMissingFeatures) {
  std::mt19937_64 gen(7);
  const MolModel m = two_component_model(gen, 8, 3);
  const auto back = MolModel::from_weights(decode_weights(encode_weights(m.to_weights())),
                                           {"embedding", kClusterSource});
  const auto q = testing::random_vector(gen, 8);
  const auto x = testing::random_vector(gen, 8);
  EXPECT_EQ(back.score(back.derive_features(q, nullptr), back.derive_features(x, nullptr)),
            m.score(m.derive_features(q, nullptr), m.derive_features(x, nullptr)));

  MolModel custom;
  custom.components.push_back({"profile", Mlp(), Mlp(), true});
  EXPECT_THROW(custom.derive_features(q, nullptr), Error);
  FeatureBundle provided{{"profile", {1, 2}}};
  EXPECT_EQ(custom.derive_features(q, &provided).at("profile"), (std::vector<float>{1, 2}));
}

TEST(MoL, ValidationCatchesGateWidth) {
  std::mt19937_64 gen(8);
  MolModel m = two_component_model(gen, 8, 3);
  m.gate = Mlp({layer(random_matrix(gen, 2, 5), Activation::kIdentity)});
  EXPECT_THROW(m.validate(8), Error);
  m.gate = Mlp();
  EXPECT_THROW(m.validate(8), Error);
}

TEST(AssignCluster, ArgmaxCosineLowestIndexOnTies) {
  Matrix centers(3, 2);
  centers.data = {1, 0, 0, 1, 0, 2};
  EXPECT_EQ(assign_cluster(centers, std::vector<float>{5, 1}), 0u);
  EXPECT_EQ(assign_cluster(centers, std::vector<float>{0.1f, 3}), 1u);  // ties with row 2
  try {
    assign_cluster(centers, std::vector<float>{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedDirection);
  }
}

TEST(KMeans, ObjectiveNeverIncreases) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(seed);
    const Matrix points = random_matrix(gen, 400, 12);
    const auto r = kmeans(points, 8, seed, 50);
    ASSERT_FALSE(r.objective.empty());
    for (std::size_t i = 1; i < r.objective.size(); ++i) {
      EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-12) << "seed " << seed << " step " << i;
    }
    for (std::size_t c = 0; c < r.centers.rows; ++c) EXPECT_NEAR(norm(r.centers.row(c)), 1.0f, 1e-5f);
  }
}

TEST(KMeans, RecoversSeparatedClusters) {
  std::mt19937_64 gen(9);
  Matrix points(90, 3);
  for (std::size_t i = 0; i < 90; ++i) {
    const std::size_t c = i % 3;
    for (std::size_t j = 0; j < 3; ++j) points.data[i * 3 + j] = (j == c ? 10.0f : 0.0f) + testing::random_vector(gen, 1)[0] * 0.1f;
  }
  const auto r = kmeans(points, 3, 1, 20);
  for (std::size_t i = 3; i < 90; ++i) EXPECT_EQ(r.assignment[i], r.assignment[i % 3]);
  EXPECT_NE(r.assignment[0], r.assignment[1]);
  EXPECT_NE(r.assignment[1], r.assignment[2]);
  EXPECT_NE(r.assignment[0], r.assignment[2]);
  EXPECT_LT(r.objective.back(), 1e-3);
}

TEST(KMeans, DeterministicAndValidated) {
  std::mt19937_64 gen(10);
  const Matrix points = random_matrix(gen, 50, 4);
  EXPECT_EQ(kmeans(points, 5, 3, 30).centers, kmeans(points, 5, 3, 30).centers);
  EXPECT_THROW(kmeans(points, 0, 1, 10), Error);
  EXPECT_THROW(kmeans(points, 51, 1, 10), Error);
  Matrix with_zero = points;
  std::fill(with_zero.data.begin(), with_zero.data.begin() + 4, 0.0f);
  EXPECT_THROW(kmeans(with_zero, 2, 1, 10), Error);
  // k == n with duplicate points still seeds distinct indices
  Matrix dup(3, 2);
  dup.data = {1, 0, 1, 0, 0, 1};
  EXPECT_EQ(kmeans(dup, 3, 2, 10).centers.rows, 3u);
}

TEST(ScorerFactory, BuildsFromSpecAndWeightsFile) {
  testing::TempDir dir;
  std::mt19937_64 gen(11);
  const HadamardMlp h{Mlp(), Mlp(), Mlp({layer(ones_row(4), Activation::kIdentity)})};
  write_weights(dir / "h.lnrw", h.to_weights());
  ScorerSpec spec{ScorerKind::kHadamardMlp, (dir / "h.lnrw").string()};
  const auto scorer = make_scorer(spec, 4);
  const std::vector<float> q = {1, 2, 3, 4};
  const std::vector<float> x = {0.5f, -1, 2, 0};
  EXPECT_EQ(scorer->prepare(q, nullptr)->score(x), dot(q, x));
  EXPECT_EQ(make_scorer(ScorerSpec{}, 4)->kind(), ScorerKind::kDot);
  EXPECT_THROW(make_scorer(ScorerSpec{ScorerKind::kMoL}, 4), Error);

  const MolModel m = two_component_model(gen, 4, 3);
  write_weights(dir / "m.lnrw", m.to_weights());
  ScorerSpec mol{ScorerKind::kMoL, (dir / "m.lnrw").string(), {"embedding", kClusterSource}, 3};
  EXPECT_EQ(make_scorer(mol, 4)->kind(), ScorerKind::kMoL);
  mol.num_clusters = 4;
  EXPECT_THROW(make_scorer(mol, 4), Error);
  EXPECT_EQ(parse_scorer_kind(scorer_kind_name(ScorerKind::kCosine)), ScorerKind::kCosine);
}

TEST(Weights, RejectsCorruptFiles) {
  WeightSet w;
  w["a"] = NamedArray{{2}, {1, 2}};
  auto bytes = encode_weights(w);
  EXPECT_EQ(decode_weights(bytes).at("a").data, (std::vector<float>{1, 2}));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_weights(truncated), Error);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_weights(trailing), Error);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_weights(magic), Error);
}

}  // namespace
}  // namespace linr
