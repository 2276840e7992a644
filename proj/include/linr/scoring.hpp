#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linr/weights.hpp"

namespace linr {

/// Dense row-major float matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// Sequential single-precision inner product.
inline float dot(std::span<const float> a, std::span<const float> b) {
  float sum = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

float norm(std::span<const float> v);

/// Cosine similarity; 0 when either side has zero norm.
float cosine(std::span<const float> a, std::span<const float> b);

std::vector<float> dot_scores(std::span<const float> query, const Matrix& items);

// -- MLPs -------------------------------------------------------------------

enum class Activation : std::uint8_t { kIdentity = 0, kReLU = 1 };

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<float> bias;
  Activation activation = Activation::kIdentity;
};

/// Feed-forward stack. An MLP without layers is the identity map.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  bool is_identity() const { return layers_.empty(); }
  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols; }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::vector<float> forward(std::span<const float> x) const;

  /// Output width for an input of width `in` (identity passes it through).
  std::size_t output_dim_for(std::size_t in) const { return is_identity() ? in : output_dim(); }

 private:
  std::vector<DenseLayer> layers_;
};

/// Reads `<prefix>.<i>.weight` [out, in], `<prefix>.<i>.bias` [out] and the
/// optional `<prefix>.<i>.activation` [1] (0 identity, 1 ReLU) for i = 0, 1, ...
/// Without an activation entry hidden layers use ReLU and the last is linear.
/// A prefix with no layers yields the identity.
Mlp load_mlp(const WeightSet& weights, const std::string& prefix);

void store_mlp(WeightSet& weights, const std::string& prefix, const Mlp& mlp);

// -- Hadamard MLP -----------------------------------------------------------

/// head(member(q) ⊙ item(x)) -> scalar.
struct HadamardMlp {
  Mlp member;
  Mlp item;
  Mlp head;

  /// Throws kShape unless member/item widths agree for input width `dim`
  /// and the head maps them to one output.
  void validate(std::size_t dim) const;

  static HadamardMlp from_weights(const WeightSet& weights);
  WeightSet to_weights() const;
};

std::vector<float> hadamard_mlp_score(const HadamardMlp& model, std::span<const float> query,
                                      const Matrix& items);

// -- Mixture of logits -------------------------------------------------------

/// Named embedding components of one side of a (query, item) pair.
using FeatureBundle = std::map<std::string, std::vector<float>>;

/// Component source resolved through nearest-cluster lookup of the base
/// embedding.
inline constexpr const char* kClusterSource = "cluster_id";

struct MolComponent {
  std::string source;
  Mlp query_proj;
  Mlp item_proj;
  bool cosine = true;
};

/// phi(x, u) = sum_k pi_k(x, u) * delta_k(x, u) with a softmax gate over the
/// concatenation [query components..., item components...].
struct MolModel {
  std::vector<MolComponent> components;
  Mlp gate;
  Matrix cluster_centers;     // num_clusters x dim
  Matrix cluster_embeddings;  // num_clusters x dim'
  bool trainable_clusters = false;  // metadata only

  /// Throws kShape if gate / projection widths do not chain for `dim`.
  void validate(std::size_t dim) const;

  bool uses_clusters() const;

  /// Component map for one side: every non-cluster source must be present in
  /// `provided` or be the base embedding (sources "embedding" / "two_tower").
  /// Throws kShape naming a missing component.
  FeatureBundle derive_features(std::span<const float> base, const FeatureBundle* provided) const;

  /// Gate probabilities for one pair; sums to one.
  std::vector<double> gate_weights(const FeatureBundle& query, const FeatureBundle& item) const;

  /// Per-component logits delta_k for one pair.
  std::vector<float> component_logits(const FeatureBundle& query, const FeatureBundle& item) const;

  float score(const FeatureBundle& query, const FeatureBundle& item) const;

  /// Weight names: `mol.<k>.query.*`, `mol.<k>.item.*` (MLP layers),
  /// `mol.<k>.cosine` [1], `gate.*`, `cluster.centers`, `cluster.embeddings`,
  /// `cluster.trainable` [1]. The component count comes from `sources`.
  static MolModel from_weights(const WeightSet& weights, const std::vector<std::string>& sources);
  WeightSet to_weights() const;
};

std::vector<float> mol_score(const MolModel& model, const FeatureBundle& query,
                             const std::vector<FeatureBundle>& items);

// -- clustering -------------------------------------------------------------

/// Index of the center with the highest cosine to `embedding`, lowest index
/// on ties. Throws kUndefinedDirection for a zero embedding.
std::size_t assign_cluster(const Matrix& centers, std::span<const float> embedding);

struct KMeansResult {
  Matrix centers;                        // unit-norm rows
  std::vector<std::uint32_t> assignment;
  std::vector<double> objective;         // mean cosine distance after each assignment step
  int iterations = 0;
};

/// Spherical k-means: k-means++ seeding, then Lloyd iterations on normalized
/// vectors until the assignment is a fixpoint or `max_iters` is reached.
/// Empty clusters are reseeded with the point farthest from its center.
KMeansResult kmeans(const Matrix& embeddings, std::size_t k, std::uint64_t seed, int max_iters);

inline Matrix kmeans_init(const Matrix& embeddings, std::size_t k, std::uint64_t seed,
                          int max_iters) {
  return kmeans(embeddings, k, seed, max_iters).centers;
}

// -- scorer plumbing --------------------------------------------------------

enum class ScorerKind : std::uint8_t { kDot, kCosine, kHadamardMlp, kMoL };

std::string_view scorer_kind_name(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view name);

struct ScorerSpec {
  ScorerKind kind = ScorerKind::kDot;
  std::optional<std::string> weights_path;
  std::vector<std::string> components;  // MoL component sources
  std::optional<std::size_t> num_clusters;

  void validate() const;
};

/// Scorer bound to one query; item-side work only.
class PreparedScorer {
 public:
  virtual ~PreparedScorer() = default;
  virtual float score(std::span<const float> item_embedding) const = 0;
};

/// Immutable after construction and safe to share across threads.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScorerKind kind() const = 0;
  virtual std::unique_ptr<PreparedScorer> prepare(std::span<const float> query,
                                                  const FeatureBundle* features) const = 0;
};

std::shared_ptr<const Scorer> make_dot_scorer();
std::shared_ptr<const Scorer> make_cosine_scorer();
std::shared_ptr<const Scorer> make_hadamard_scorer(HadamardMlp model, std::size_t dim);
std::shared_ptr<const Scorer> make_mol_scorer(MolModel model, std::size_t dim);

/// Builds a scorer from its spec, reading the weights file when needed.
std::shared_ptr<const Scorer> make_scorer(const ScorerSpec& spec, std::size_t dim);

}  // namespace linr
