#include "linr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linr/error.hpp"
#include "linr/rng.hpp"

namespace linr {

float norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

float cosine(std::span<const float> a, std::span<const float> b) {
  const float na = norm(a);
  const float nb = norm(b);
  if (na == 0.0f || nb == 0.0f) return 0.0f;
  return dot(a, b) / (na * nb);
}

std::vector<float> dot_scores(std::span<const float> query, const Matrix& items) {
  if (query.size() != items.cols) {
    fail(ErrorCode::kShape, "dot_scores: query dim " + std::to_string(query.size()) +
                                " vs item dim " + std::to_string(items.cols));
  }
  std::vector<float> scores(items.rows);
  for (std::size_t i = 0; i < items.rows; ++i) scores[i] = dot(query, items.row(i));
  return scores;
}

// -- Mlp --------------------------------------------------------------------

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weight.rows) {
      fail(ErrorCode::kShape, "mlp layer " + std::to_string(l) + ": bias length mismatch");
    }
    if (l > 0 && layer.weight.cols != layers_[l - 1].weight.rows) {
      fail(ErrorCode::kShape, "mlp layer " + std::to_string(l) + ": input width does not chain");
    }
  }
}

std::vector<float> Mlp::forward(std::span<const float> x) const {
  std::vector<float> cur(x.begin(), x.end());
  if (layers_.empty()) return cur;
  if (x.size() != input_dim()) {
    fail(ErrorCode::kShape, "mlp: input width " + std::to_string(x.size()) + ", expected " +
                                std::to_string(input_dim()));
  }
  std::vector<float> next;
  for (const auto& layer : layers_) {
    next.resize(layer.weight.rows);
    for (std::size_t o = 0; o < layer.weight.rows; ++o) {
      float s = layer.bias[o];
      const auto w = layer.weight.row(o);
      for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * cur[i];
      if (layer.activation == Activation::kReLU && s < 0.0f) s = 0.0f;
      next[o] = s;
    }
    cur.swap(next);
  }
  return cur;
}

Mlp load_mlp(const WeightSet& weights, const std::string& prefix) {
  std::vector<DenseLayer> layers;
  std::vector<bool> explicit_act;
  for (std::size_t i = 0;; ++i) {
    const std::string base = prefix + "." + std::to_string(i);
    auto w = weights.find(base + ".weight");
    if (w == weights.end()) break;
    if (w->second.shape.size() != 2) fail(ErrorCode::kShape, base + ".weight must be rank 2");
    DenseLayer layer;
    layer.weight = Matrix(w->second.shape[0], w->second.shape[1]);
    layer.weight.data = w->second.data;
    if (auto b = weights.find(base + ".bias"); b != weights.end()) {
      layer.bias = b->second.data;
    } else {
      layer.bias.assign(layer.weight.rows, 0.0f);
    }
    auto a = weights.find(base + ".activation");
    explicit_act.push_back(a != weights.end());
    if (a != weights.end()) {
      if (a->second.data.size() != 1) fail(ErrorCode::kShape, base + ".activation must hold one value");
      layer.activation = a->second.data[0] != 0.0f ? Activation::kReLU : Activation::kIdentity;
    }
    layers.push_back(std::move(layer));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!explicit_act[i]) {
      layers[i].activation = i + 1 < layers.size() ? Activation::kReLU : Activation::kIdentity;
    }
  }
  return Mlp(std::move(layers));
}

void store_mlp(WeightSet& weights, const std::string& prefix, const Mlp& mlp) {
  for (std::size_t i = 0; i < mlp.layers().size(); ++i) {
    const auto& layer = mlp.layers()[i];
    const std::string base = prefix + "." + std::to_string(i);
    weights[base + ".weight"] = NamedArray{
        {static_cast<std::uint32_t>(layer.weight.rows), static_cast<std::uint32_t>(layer.weight.cols)},
        layer.weight.data};
    weights[base + ".bias"] =
        NamedArray{{static_cast<std::uint32_t>(layer.bias.size())}, layer.bias};
    weights[base + ".activation"] =
        NamedArray{{1}, {layer.activation == Activation::kReLU ? 1.0f : 0.0f}};
  }
}

// -- Hadamard MLP -----------------------------------------------------------

void HadamardMlp::validate(std::size_t dim) const {
  if (!member.is_identity() && member.input_dim() != dim) {
    fail(ErrorCode::kShape, "hadamard: member branch expects width " +
                                std::to_string(member.input_dim()) + ", embeddings have " +
                                std::to_string(dim));
  }
  if (!item.is_identity() && item.input_dim() != dim) {
    fail(ErrorCode::kShape, "hadamard: item branch input width mismatch");
  }
  const std::size_t width = member.output_dim_for(dim);
  if (item.output_dim_for(dim) != width) {
    fail(ErrorCode::kShape, "hadamard: member and item branches have different output widths");
  }
  if (!head.is_identity() && head.input_dim() != width) {
    fail(ErrorCode::kShape, "hadamard: head input width mismatch");
  }
  if (head.output_dim_for(width) != 1) fail(ErrorCode::kShape, "hadamard: head must emit one logit");
}

HadamardMlp HadamardMlp::from_weights(const WeightSet& weights) {
  return HadamardMlp{load_mlp(weights, "member"), load_mlp(weights, "item"), load_mlp(weights, "head")};
}

WeightSet HadamardMlp::to_weights() const {
  WeightSet w;
  store_mlp(w, "member", member);
  store_mlp(w, "item", item);
  store_mlp(w, "head", head);
  return w;
}

namespace {

float hadamard_item(const HadamardMlp& model, std::span<const float> member_out,
                    std::span<const float> item) {
  auto h = model.item.forward(item);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = member_out[i] * h[i];
  return model.head.forward(h)[0];
}

}  // namespace

std::vector<float> hadamard_mlp_score(const HadamardMlp& model, std::span<const float> query,
                                      const Matrix& items) {
  model.validate(items.cols);
  if (query.size() != items.cols) fail(ErrorCode::kShape, "hadamard: query dim mismatch");
  const auto member_out = model.member.forward(query);
  std::vector<float> scores(items.rows);
  for (std::size_t i = 0; i < items.rows; ++i) scores[i] = hadamard_item(model, member_out, items.row(i));
  return scores;
}

// -- Mixture of logits -------------------------------------------------------

namespace {

bool is_base_source(const std::string& source) {
  return source == "embedding" || source == "two_tower";
}

const std::vector<float>& component(const FeatureBundle& bundle, const std::string& source) {
  auto it = bundle.find(source);
  if (it == bundle.end()) fail(ErrorCode::kShape, "missing component feature '" + source + "'");
  return it->second;
}

float component_logit(const MolComponent& c, std::span<const float> fq, std::span<const float> gx) {
  if (fq.size() != gx.size()) {
    fail(ErrorCode::kShape, "mol component '" + c.source + "': projected widths differ");
  }
  return c.cosine ? cosine(fq, gx) : dot(fq, gx);
}

std::vector<double> softmax(std::span<const float> logits) {
  double hi = -std::numeric_limits<double>::infinity();
  for (float l : logits) hi = std::max(hi, static_cast<double>(l));
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - hi);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

bool MolModel::uses_clusters() const {
  return std::any_of(components.begin(), components.end(),
                     [](const MolComponent& c) { return c.source == kClusterSource; });
}

void MolModel::validate(std::size_t dim) const {
  if (components.empty()) fail(ErrorCode::kShape, "mol: at least one component is required");
  if (uses_clusters()) {
    if (cluster_centers.rows == 0 || cluster_centers.cols != dim) {
      fail(ErrorCode::kShape, "mol: cluster centers must be num_clusters x " + std::to_string(dim));
    }
    if (cluster_embeddings.rows != cluster_centers.rows) {
      fail(ErrorCode::kShape, "mol: cluster embeddings and centers disagree on cluster count");
    }
  }
  if (components.size() > 1) {
    if (gate.is_identity() || gate.output_dim() != components.size()) {
      fail(ErrorCode::kShape, "mol: gate must emit one logit per component");
    }
    std::size_t width = 0;
    bool known = true;
    for (const auto& c : components) {
      if (is_base_source(c.source)) {
        width += dim;
      } else if (c.source == kClusterSource) {
        width += cluster_embeddings.cols;
      } else {
        known = false;
      }
    }
    if (known && gate.input_dim() != 2 * width) {
      fail(ErrorCode::kShape, "mol: gate input width " + std::to_string(gate.input_dim()) +
                                  ", features concatenate to " + std::to_string(2 * width));
    }
  }
}

FeatureBundle MolModel::derive_features(std::span<const float> base,
                                        const FeatureBundle* provided) const {
  FeatureBundle out;
  for (const auto& c : components) {
    if (out.contains(c.source)) continue;
    if (provided) {
      if (auto it = provided->find(c.source); it != provided->end()) {
        out.emplace(c.source, it->second);
        continue;
      }
    }
    if (c.source == kClusterSource) {
      const auto row = cluster_embeddings.row(assign_cluster(cluster_centers, base));
      out.emplace(c.source, std::vector<float>(row.begin(), row.end()));
    } else if (is_base_source(c.source)) {
      out.emplace(c.source, std::vector<float>(base.begin(), base.end()));
    } else {
      fail(ErrorCode::kShape, "missing component feature '" + c.source + "'");
    }
  }
  return out;
}

std::vector<double> MolModel::gate_weights(const FeatureBundle& query,
                                           const FeatureBundle& item) const {
  if (components.size() == 1) return {1.0};
  std::vector<float> input;
  for (const auto& c : components) {
    const auto& q = component(query, c.source);
    input.insert(input.end(), q.begin(), q.end());
  }
  for (const auto& c : components) {
    const auto& x = component(item, c.source);
    input.insert(input.end(), x.begin(), x.end());
  }
  const auto logits = gate.forward(input);
  if (logits.size() != components.size()) fail(ErrorCode::kShape, "mol: gate output width mismatch");
  return softmax(logits);
}

std::vector<float> MolModel::component_logits(const FeatureBundle& query,
                                              const FeatureBundle& item) const {
  std::vector<float> out;
  out.reserve(components.size());
  for (const auto& c : components) {
    const auto fq = c.query_proj.forward(component(query, c.source));
    const auto gx = c.item_proj.forward(component(item, c.source));
    out.push_back(component_logit(c, fq, gx));
  }
  return out;
}

float MolModel::score(const FeatureBundle& query, const FeatureBundle& item) const {
  const auto pi = gate_weights(query, item);
  const auto delta = component_logits(query, item);
  if (components.size() == 1) return delta[0];
  double s = 0.0;
  for (std::size_t k = 0; k < delta.size(); ++k) s += pi[k] * delta[k];
  return static_cast<float>(s);
}

MolModel MolModel::from_weights(const WeightSet& weights, const std::vector<std::string>& sources) {
  MolModel model;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const std::string base = "mol." + std::to_string(k);
    MolComponent c;
    c.source = sources[k];
    c.query_proj = load_mlp(weights, base + ".query");
    c.item_proj = load_mlp(weights, base + ".item");
    if (auto it = weights.find(base + ".cosine"); it != weights.end() && !it->second.data.empty()) {
      c.cosine = it->second.data[0] != 0.0f;
    }
    model.components.push_back(std::move(c));
  }
  model.gate = load_mlp(weights, "gate");
  auto load_matrix = [&](const char* name, Matrix& out) {
    auto it = weights.find(name);
    if (it == weights.end()) return;
    if (it->second.shape.size() != 2) fail(ErrorCode::kShape, std::string(name) + " must be rank 2");
    out = Matrix(it->second.shape[0], it->second.shape[1]);
    out.data = it->second.data;
  };
  load_matrix("cluster.centers", model.cluster_centers);
  load_matrix("cluster.embeddings", model.cluster_embeddings);
  if (auto it = weights.find("cluster.trainable"); it != weights.end() && !it->second.data.empty()) {
    model.trainable_clusters = it->second.data[0] != 0.0f;
  }
  return model;
}

WeightSet MolModel::to_weights() const {
  WeightSet w;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const std::string base = "mol." + std::to_string(k);
    store_mlp(w, base + ".query", components[k].query_proj);
    store_mlp(w, base + ".item", components[k].item_proj);
    w[base + ".cosine"] = NamedArray{{1}, {components[k].cosine ? 1.0f : 0.0f}};
  }
  store_mlp(w, "gate", gate);
  auto put = [&](const char* name, const Matrix& m) {
    if (m.rows == 0) return;
    w[name] = NamedArray{{static_cast<std::uint32_t>(m.rows), static_cast<std::uint32_t>(m.cols)}, m.data};
  };
  put("cluster.centers", cluster_centers);
  put("cluster.embeddings", cluster_embeddings);
  w["cluster.trainable"] = NamedArray{{1}, {trainable_clusters ? 1.0f : 0.0f}};
  return w;
}

std::vector<float> mol_score(const MolModel& model, const FeatureBundle& query,
                             const std::vector<FeatureBundle>& items) {
  std::vector<float> scores;
  scores.reserve(items.size());
  for (const auto& item : items) scores.push_back(model.score(query, item));
  return scores;
}

// -- clustering -------------------------------------------------------------

std::size_t assign_cluster(const Matrix& centers, std::span<const float> embedding) {
  if (centers.rows == 0) fail(ErrorCode::kInvalidArgument, "assign_cluster: no centers");
  if (centers.cols != embedding.size()) fail(ErrorCode::kShape, "assign_cluster: dim mismatch");
  if (norm(embedding) == 0.0f) {
    fail(ErrorCode::kUndefinedDirection, "assign_cluster: zero embedding has no direction");
  }
  std::size_t best = 0;
  float best_cos = -std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < centers.rows; ++c) {
    const auto center = centers.row(c);
    if (norm(center) == 0.0f) continue;
    const float cs = cosine(center, embedding);
    if (cs > best_cos) {
      best_cos = cs;
      best = c;
    }
  }
  return best;
}

namespace {

using DVec = std::vector<double>;

double ddot(const DVec& a, const DVec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool normalize_in_place(DVec& v) {
  const double n = std::sqrt(ddot(v, v));
  if (n == 0.0) return false;
  for (auto& x : v) x /= n;
  return true;
}

}  // namespace

KMeansResult kmeans(const Matrix& embeddings, std::size_t k, std::uint64_t seed, int max_iters) {
  const std::size_t n = embeddings.rows;
  const std::size_t d = embeddings.cols;
  if (k == 0) fail(ErrorCode::kInvalidArgument, "kmeans: k must be >= 1");
  if (k > n) {
    fail(ErrorCode::kInvalidArgument, "kmeans: k = " + std::to_string(k) + " exceeds " +
                                          std::to_string(n) + " points");
  }
  std::vector<DVec> points(n, DVec(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = embeddings.row(i);
    std::copy(row.begin(), row.end(), points[i].begin());
    if (!normalize_in_place(points[i])) {
      fail(ErrorCode::kUndefinedDirection, "kmeans: point " + std::to_string(i) + " is zero");
    }
  }

  Rng rng(seed);
  std::vector<DVec> centers;
  std::vector<bool> chosen(n, false);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  auto take = [&](std::size_t i) {
    chosen[i] = true;
    centers.push_back(points[i]);
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = chosen[j] ? 0.0 : std::min(dist[j], std::max(0.0, 1.0 - ddot(points[j], points[i])));
    }
  };
  take(rng.below(n));
  while (centers.size() < k) {
    double total = 0.0;
    for (double v : dist) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (dist[j] <= 0.0) continue;
        acc += dist[j];
        pick = j;
        if (acc > r) break;
      }
    } else {
      for (std::size_t j = 0; j < n && pick == n; ++j) {
        if (!chosen[j]) pick = j;
      }
    }
    take(pick);
  }

  KMeansResult result;
  std::vector<std::uint32_t> assignment(n, 0);
  std::vector<double> best_cos(n, 0.0);
  for (int iter = 0; iter < std::max(1, max_iters); ++iter) {
    std::vector<std::uint32_t> next(n, 0);
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double cs = ddot(points[i], centers[c]);
        if (cs > best) {
          best = cs;
          next[i] = static_cast<std::uint32_t>(c);
        }
      }
      best_cos[i] = best;
      objective += 1.0 - best;
    }
    result.objective.push_back(objective / static_cast<double>(n));
    result.iterations = iter + 1;
    const bool fixpoint = iter > 0 && next == assignment;
    assignment = std::move(next);
    if (fixpoint) break;

    std::vector<DVec> sums(k, DVec(d, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[assignment[i]];
      for (std::size_t j = 0; j < d; ++j) s[j] += points[i][j];
      ++sizes[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0 && normalize_in_place(sums[c])) centers[c] = std::move(sums[c]);
    }
    std::vector<bool> reseeded(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (reseeded[i]) continue;
        const double di = 1.0 - ddot(points[i], centers[assignment[i]]);
        if (di > far_dist) {
          far_dist = di;
          far = i;
        }
      }
      reseeded[far] = true;
      centers[c] = points[far];
    }
  }

  result.centers = Matrix(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    auto row = result.centers.row(c);
    for (std::size_t j = 0; j < d; ++j) row[j] = static_cast<float>(centers[c][j]);
  }
  result.assignment = std::move(assignment);
  return result;
}

// -- scorer plumbing --------------------------------------------------------

std::string_view scorer_kind_name(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kDot: return "dot";
    case ScorerKind::kCosine: return "cosine";
    case ScorerKind::kHadamardMlp: return "hadamard_mlp";
    case ScorerKind::kMoL: return "mol";
  }
  return "dot";
}

ScorerKind parse_scorer_kind(std::string_view name) {
  if (name == "dot") return ScorerKind::kDot;
  if (name == "cosine") return ScorerKind::kCosine;
  if (name == "hadamard_mlp" || name == "hadamard") return ScorerKind::kHadamardMlp;
  if (name == "mol") return ScorerKind::kMoL;
  fail(ErrorCode::kInvalidArgument, "unknown scorer kind '" + std::string(name) + "'");
}

void ScorerSpec::validate() const {
  if ((kind == ScorerKind::kHadamardMlp || kind == ScorerKind::kMoL) && !weights_path) {
    fail(ErrorCode::kInvalidArgument,
         std::string(scorer_kind_name(kind)) + " scorer requires weights_path");
  }
  if (kind == ScorerKind::kMoL && components.empty()) {
    fail(ErrorCode::kInvalidArgument, "mol scorer requires at least one component");
  }
}

namespace {

class DotPrepared final : public PreparedScorer {
 public:
  explicit DotPrepared(std::span<const float> q) : q_(q.begin(), q.end()) {}
  float score(std::span<const float> item) const override { return dot(q_, item); }

 private:
  std::vector<float> q_;
};

class DotScorer final : public Scorer {
 public:
  ScorerKind kind() const override { return ScorerKind::kDot; }
  std::unique_ptr<PreparedScorer> prepare(std::span<const float> q, const FeatureBundle*) const override {
    return std::make_unique<DotPrepared>(q);
  }
};

class CosinePrepared final : public PreparedScorer {
 public:
  explicit CosinePrepared(std::span<const float> q) : q_(q.begin(), q.end()) {}
  float score(std::span<const float> item) const override { return cosine(q_, item); }

 private:
  std::vector<float> q_;
};

class CosineScorer final : public Scorer {
 public:
  ScorerKind kind() const override { return ScorerKind::kCosine; }
  std::unique_ptr<PreparedScorer> prepare(std::span<const float> q, const FeatureBundle*) const override {
    return std::make_unique<CosinePrepared>(q);
  }
};

class HadamardPrepared final : public PreparedScorer {
 public:
  HadamardPrepared(const HadamardMlp& model, std::vector<float> member_out)
      : model_(model), member_out_(std::move(member_out)) {}
  float score(std::span<const float> item) const override {
    return hadamard_item(model_, member_out_, item);
  }

 private:
  const HadamardMlp& model_;
  std::vector<float> member_out_;
};

class HadamardScorer final : public Scorer {
 public:
  HadamardScorer(HadamardMlp model, std::size_t dim) : model_(std::move(model)), dim_(dim) {
    model_.validate(dim_);
  }
  ScorerKind kind() const override { return ScorerKind::kHadamardMlp; }
  std::unique_ptr<PreparedScorer> prepare(std::span<const float> q, const FeatureBundle*) const override {
    if (q.size() != dim_) fail(ErrorCode::kShape, "hadamard: query dim mismatch");
    return std::make_unique<HadamardPrepared>(model_, model_.member.forward(q));
  }

 private:
  HadamardMlp model_;
  std::size_t dim_;
};

class MolPrepared final : public PreparedScorer {
 public:
  MolPrepared(const MolModel& model, FeatureBundle query) : model_(model), query_(std::move(query)) {}
  float score(std::span<const float> item) const override {
    return model_.score(query_, model_.derive_features(item, nullptr));
  }

 private:
  const MolModel& model_;
  FeatureBundle query_;
};

class MolScorer final : public Scorer {
 public:
  MolScorer(MolModel model, std::size_t dim) : model_(std::move(model)), dim_(dim) {
    model_.validate(dim_);
  }
  ScorerKind kind() const override { return ScorerKind::kMoL; }
  std::unique_ptr<PreparedScorer> prepare(std::span<const float> q,
                                          const FeatureBundle* features) const override {
    if (q.size() != dim_) fail(ErrorCode::kShape, "mol: query dim mismatch");
    return std::make_unique<MolPrepared>(model_, model_.derive_features(q, features));
  }

 private:
  MolModel model_;
  std::size_t dim_;
};

}  // namespace

std::shared_ptr<const Scorer> make_dot_scorer() { return std::make_shared<DotScorer>(); }
std::shared_ptr<const Scorer> make_cosine_scorer() { return std::make_shared<CosineScorer>(); }

std::shared_ptr<const Scorer> make_hadamard_scorer(HadamardMlp model, std::size_t dim) {
  return std::make_shared<HadamardScorer>(std::move(model), dim);
}

std::shared_ptr<const Scorer> make_mol_scorer(MolModel model, std::size_t dim) {
  return std::make_shared<MolScorer>(std::move(model), dim);
}

std::shared_ptr<const Scorer> make_scorer(const ScorerSpec& spec, std::size_t dim) {
  spec.validate();
  switch (spec.kind) {
    case ScorerKind::kDot: return make_dot_scorer();
    case ScorerKind::kCosine: return make_cosine_scorer();
    case ScorerKind::kHadamardMlp:
      return make_hadamard_scorer(HadamardMlp::from_weights(read_weights(*spec.weights_path)), dim);
    case ScorerKind::kMoL: {
      auto model = MolModel::from_weights(read_weights(*spec.weights_path), spec.components);
      if (spec.num_clusters && model.uses_clusters() && model.cluster_centers.rows != *spec.num_clusters) {
        fail(ErrorCode::kShape, "mol: weights hold " + std::to_string(model.cluster_centers.rows) +
                                    " clusters, spec expects " + std::to_string(*spec.num_clusters));
      }
      return make_mol_scorer(std::move(model), dim);
    }
  }
  fail(ErrorCode::kUnsupported, "unknown scorer kind");
}

}  // namespace linr
