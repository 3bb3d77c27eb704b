#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "vrdre/errors.hpp"
#include "vrdre/param.hpp"
#include "vrdre/preprocess.hpp"

namespace vrdre {

// Per-token hidden states for a window. Implementations must be
// deterministic given parameters and input. image_features is reserved for
// providers with a visual branch; the bundled encoder ignores it.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int hidden_dim() const = 0;
  virtual Matrix encode(const Window& win,
                        const Matrix* image_features = nullptr) = 0;
};

struct ToyEncoderConfig {
  int d = 128;
  int layers = 2;
  int heads = 4;
  int ffn = 256;
  int vocab = 32768;
  int max_len = 512;

  bool operator==(const ToyEncoderConfig&) const = default;
};

inline constexpr int kCoordBuckets = 1001;  // normalized coords 0..1000
inline constexpr double kLnEps = 1e-5;

namespace detail {

struct LayerNormCache {
  Matrix xhat;    // T x d
  Vector rstd;    // T
};

// Row-wise layer norm; caches what backward needs.
inline Matrix layernorm_fwd(const Matrix& x, const Param& gain,
                            const Param& bias, LayerNormCache& cache) {
  const auto T = x.rows();
  const auto d = x.cols();
  cache.xhat.resize(T, d);
  cache.rstd.resize(T);
  Matrix out(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double mu = x.row(t).mean();
    const double var = (x.row(t).array() - mu).square().mean();
    const double rstd = 1.0 / std::sqrt(var + kLnEps);
    cache.rstd(t) = rstd;
    cache.xhat.row(t) = (x.row(t).array() - mu) * rstd;
    out.row(t) = cache.xhat.row(t).cwiseProduct(gain.v.row(0)) + bias.v.row(0);
  }
  return out;
}

inline Matrix layernorm_bwd(const Matrix& dout, const LayerNormCache& cache,
                            Param& gain, Param& bias) {
  const auto T = dout.rows();
  const auto d = dout.cols();
  Matrix dx(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto dy = dout.row(t);
    gain.g.row(0) += dy.cwiseProduct(cache.xhat.row(t));
    bias.g.row(0) += dy;
    const auto dyg = dy.cwiseProduct(gain.v.row(0));
    const double m1 = dyg.mean();
    const double m2 = dyg.cwiseProduct(cache.xhat.row(t)).mean();
    dx.row(t) = (dyg.array() - m1 - cache.xhat.row(t).array() * m2) *
                cache.rstd(t);
  }
  return dx;
}

struct LayerParams {
  Param wq, wk, wv, wo;      // d x d
  Param bq, bk, bv, bo;      // 1 x d
  Param ln1_g, ln1_b;        // 1 x d
  Param w1, c1;              // d x f, 1 x f
  Param w2, c2;              // f x d, 1 x d
  Param ln2_g, ln2_b;        // 1 x d
};

struct LayerCache {
  Matrix x;                   // layer input, T x d
  Matrix q, k, v;             // T x d
  std::vector<Matrix> attn;   // per head, T x T softmax weights
  Matrix heads_out;           // T x d, concatenated head outputs
  Matrix r1;                  // x + attention output
  LayerNormCache ln1;
  Matrix h1;                  // post-LN1
  Matrix ffn_pre;             // T x f, pre-ReLU
  Matrix ffn_act;             // T x f
  Matrix r2;                  // h1 + ffn output
  LayerNormCache ln2;
};

}  // namespace detail

struct EncodeCache {
  Matrix input;                         // embedded input, T x d
  std::vector<detail::LayerCache> layers;
  std::vector<int> token_ids;
  std::vector<BBox> boxes;
};

// Desk-scale transformer encoder over token, 1D-position, and coordinate
// bucket embeddings. Double precision throughout so analytic gradients can
// be checked against finite differences.
class ToyEncoder : public EmbeddingProvider {
 public:
  explicit ToyEncoder(const ToyEncoderConfig& cfg, uint64_t seed = 0)
      : cfg_(cfg) {
    if (cfg.d % cfg.heads != 0)
      throw ConfigError("hidden dim must divide evenly into heads");
    tok_emb_ = Param("tok_emb", cfg.vocab, cfg.d);
    pos_emb_ = Param("pos_emb", cfg.max_len, cfg.d);
    const char* coord_names[4] = {"x0_emb", "y0_emb", "x1_emb", "y1_emb"};
    for (int c = 0; c < 4; ++c)
      coord_emb_[c] = Param(coord_names[c], kCoordBuckets, cfg.d);
    layers_.resize(cfg.layers);
    for (int l = 0; l < cfg.layers; ++l) {
      auto& L = layers_[l];
      const std::string p = "layer" + std::to_string(l) + ".";
      L.wq = Param(p + "wq", cfg.d, cfg.d);
      L.wk = Param(p + "wk", cfg.d, cfg.d);
      L.wv = Param(p + "wv", cfg.d, cfg.d);
      L.wo = Param(p + "wo", cfg.d, cfg.d);
      L.bq = Param(p + "bq", 1, cfg.d);
      L.bk = Param(p + "bk", 1, cfg.d);
      L.bv = Param(p + "bv", 1, cfg.d);
      L.bo = Param(p + "bo", 1, cfg.d);
      L.ln1_g = Param(p + "ln1_g", 1, cfg.d);
      L.ln1_b = Param(p + "ln1_b", 1, cfg.d);
      L.w1 = Param(p + "w1", cfg.d, cfg.ffn);
      L.c1 = Param(p + "c1", 1, cfg.ffn);
      L.w2 = Param(p + "w2", cfg.ffn, cfg.d);
      L.c2 = Param(p + "c2", 1, cfg.d);
      L.ln2_g = Param(p + "ln2_g", 1, cfg.d);
      L.ln2_b = Param(p + "ln2_b", 1, cfg.d);
    }
    init(seed);
  }

  const ToyEncoderConfig& config() const { return cfg_; }
  int hidden_dim() const override { return cfg_.d; }

  void init(uint64_t seed) {
    std::mt19937_64 rng(seed);
    init_uniform_fanin(tok_emb_, rng, cfg_.d);
    init_uniform_fanin(pos_emb_, rng, cfg_.d);
    for (auto& c : coord_emb_) init_uniform_fanin(c, rng, cfg_.d);
    for (auto& L : layers_) {
      for (Param* w : {&L.wq, &L.wk, &L.wv, &L.wo})
        init_uniform_fanin(*w, rng, cfg_.d);
      init_uniform_fanin(L.w1, rng, cfg_.d);
      init_uniform_fanin(L.w2, rng, cfg_.ffn);
      L.ln1_g.v.setOnes();
      L.ln2_g.v.setOnes();
    }
  }

  void visit_params(const ParamVisitor& fn) {
    fn(tok_emb_);
    fn(pos_emb_);
    for (auto& c : coord_emb_) fn(c);
    for (auto& L : layers_) {
      for (Param* p : {&L.wq, &L.bq, &L.wk, &L.bk, &L.wv, &L.bv, &L.wo, &L.bo,
                       &L.ln1_g, &L.ln1_b, &L.w1, &L.c1, &L.w2, &L.c2,
                       &L.ln2_g, &L.ln2_b})
        fn(*p);
    }
  }

  Matrix encode(const Window& win, const Matrix* = nullptr) override {
    EncodeCache cache;
    return forward(win, cache);
  }

  Matrix forward(const Window& win, EncodeCache& cache) {
    const int T = static_cast<int>(win.token_ids.size());
    if (T == 0) throw InputError("empty window");
    if (T > cfg_.max_len) throw InputError("window exceeds max_len");
    cache.token_ids = win.token_ids;
    cache.boxes = win.token_boxes;

    Matrix x(T, cfg_.d);
    for (int t = 0; t < T; ++t) {
      const int id = win.token_ids[t];
      if (id < 0 || id >= cfg_.vocab) throw InputError("token id out of range");
      const BBox& b = win.token_boxes[t];
      if (!b.valid()) throw InputError("token box outside [0,1000]");
      x.row(t) = tok_emb_.v.row(id) + pos_emb_.v.row(t) +
                 coord_emb_[0].v.row(b.x0) + coord_emb_[1].v.row(b.y0) +
                 coord_emb_[2].v.row(b.x1) + coord_emb_[3].v.row(b.y1);
    }
    cache.input = x;

    cache.layers.resize(cfg_.layers);
    for (int l = 0; l < cfg_.layers; ++l)
      x = layer_forward(layers_[l], x, cache.layers[l]);
    if (!x.allFinite()) throw InputError("non-finite encoder output");
    return x;
  }

  // Accumulates parameter gradients for a cached forward pass.
  void backward(const EncodeCache& cache, const Matrix& d_out) {
    Matrix dx = d_out;
    for (int l = cfg_.layers - 1; l >= 0; --l)
      dx = layer_backward(layers_[l], cache.layers[l], dx);
    const int T = static_cast<int>(cache.token_ids.size());
    for (int t = 0; t < T; ++t) {
      const BBox& b = cache.boxes[t];
      tok_emb_.g.row(cache.token_ids[t]) += dx.row(t);
      pos_emb_.g.row(t) += dx.row(t);
      coord_emb_[0].g.row(b.x0) += dx.row(t);
      coord_emb_[1].g.row(b.y0) += dx.row(t);
      coord_emb_[2].g.row(b.x1) += dx.row(t);
      coord_emb_[3].g.row(b.y1) += dx.row(t);
    }
  }

 private:
  Matrix layer_forward(detail::LayerParams& L, const Matrix& x,
                       detail::LayerCache& c) {
    const auto T = x.rows();
    const int H = cfg_.heads;
    const int dh = cfg_.d / H;
    const double scale = 1.0 / std::sqrt(double(dh));
    c.x = x;
    c.q = (x * L.wq.v).rowwise() + L.bq.v.row(0);
    c.k = (x * L.wk.v).rowwise() + L.bk.v.row(0);
    c.v = (x * L.wv.v).rowwise() + L.bv.v.row(0);
    c.attn.assign(H, Matrix());
    c.heads_out.resize(T, cfg_.d);
    for (int h = 0; h < H; ++h) {
      auto qh = c.q.middleCols(h * dh, dh);
      auto kh = c.k.middleCols(h * dh, dh);
      auto vh = c.v.middleCols(h * dh, dh);
      Matrix s = qh * kh.transpose() * scale;
      Matrix& a = c.attn[h];
      a.resize(T, T);
      for (Eigen::Index t = 0; t < T; ++t) {
        const double mx = s.row(t).maxCoeff();
        a.row(t) = (s.row(t).array() - mx).exp();
        a.row(t) /= a.row(t).sum();
      }
      c.heads_out.middleCols(h * dh, dh) = a * vh;
    }
    Matrix attn_out = (c.heads_out * L.wo.v).rowwise() + L.bo.v.row(0);
    c.r1 = x + attn_out;
    c.h1 = detail::layernorm_fwd(c.r1, L.ln1_g, L.ln1_b, c.ln1);
    c.ffn_pre = (c.h1 * L.w1.v).rowwise() + L.c1.v.row(0);
    c.ffn_act = c.ffn_pre.cwiseMax(0.0);
    c.r2 = c.h1 + ((c.ffn_act * L.w2.v).rowwise() + L.c2.v.row(0));
    return detail::layernorm_fwd(c.r2, L.ln2_g, L.ln2_b, c.ln2);
  }

  Matrix layer_backward(detail::LayerParams& L, const detail::LayerCache& c,
                        const Matrix& dout) {
    const int H = cfg_.heads;
    const int dh = cfg_.d / H;
    const double scale = 1.0 / std::sqrt(double(dh));

    Matrix dr2 = detail::layernorm_bwd(dout, c.ln2, L.ln2_g, L.ln2_b);
    Matrix dh1 = dr2;
    Matrix dffn = dr2;  // gradient at the FFN output
    L.w2.g += c.ffn_act.transpose() * dffn;
    L.c2.g.row(0) += dffn.colwise().sum();
    Matrix dact = dffn * L.w2.v.transpose();
    Matrix dpre = (c.ffn_pre.array() > 0.0).select(dact, 0.0);
    L.w1.g += c.h1.transpose() * dpre;
    L.c1.g.row(0) += dpre.colwise().sum();
    dh1 += dpre * L.w1.v.transpose();

    Matrix dr1 = detail::layernorm_bwd(dh1, c.ln1, L.ln1_g, L.ln1_b);
    Matrix dx = dr1;
    Matrix dattn_out = dr1;
    L.wo.g += c.heads_out.transpose() * dattn_out;
    L.bo.g.row(0) += dattn_out.colwise().sum();
    Matrix dheads = dattn_out * L.wo.v.transpose();

    Matrix dq = Matrix::Zero(c.q.rows(), cfg_.d);
    Matrix dk = Matrix::Zero(c.q.rows(), cfg_.d);
    Matrix dv = Matrix::Zero(c.q.rows(), cfg_.d);
    for (int h = 0; h < H; ++h) {
      auto qh = c.q.middleCols(h * dh, dh);
      auto kh = c.k.middleCols(h * dh, dh);
      auto vh = c.v.middleCols(h * dh, dh);
      const Matrix& a = c.attn[h];
      Matrix doh = dheads.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh) = a.transpose() * doh;
      Matrix da = doh * vh.transpose();
      // softmax backward, row-wise
      Matrix ds = a.cwiseProduct(da);
      Vector rows = ds.rowwise().sum();
      ds -= (a.array().colwise() * rows.array()).matrix();
      ds *= scale;
      dq.middleCols(h * dh, dh) = ds * kh;
      dk.middleCols(h * dh, dh) = ds.transpose() * qh;
    }
    L.wq.g += c.x.transpose() * dq;
    L.bq.g.row(0) += dq.colwise().sum();
    L.wk.g += c.x.transpose() * dk;
    L.bk.g.row(0) += dk.colwise().sum();
    L.wv.g += c.x.transpose() * dv;
    L.bv.g.row(0) += dv.colwise().sum();
    dx += dq * L.wq.v.transpose() + dk * L.wk.v.transpose() +
          dv * L.wv.v.transpose();
    return dx;
  }

  ToyEncoderConfig cfg_;
  Param tok_emb_, pos_emb_;
  Param coord_emb_[4];
  std::vector<detail::LayerParams> layers_;
};

// --- layout concatenation (LC) -------------------------------------------

// Appends each token's 4 normalized coordinates (divided by 1000) to its
// hidden state. Pure skip connection, no learned transform.
inline Matrix concat_layout_lc(const Matrix& hidden,
                               const std::vector<BBox>& boxes) {
  if (hidden.rows() != static_cast<Eigen::Index>(boxes.size()))
    throw InputError("hidden/boxes length mismatch");
  Matrix out(hidden.rows(), hidden.cols() + 4);
  out.leftCols(hidden.cols()) = hidden;
  for (Eigen::Index t = 0; t < hidden.rows(); ++t) {
    const BBox& b = boxes[size_t(t)];
    out(t, hidden.cols() + 0) = b.x0 / 1000.0;
    out(t, hidden.cols() + 1) = b.y0 / 1000.0;
    out(t, hidden.cols() + 2) = b.x1 / 1000.0;
    out(t, hidden.cols() + 3) = b.y1 / 1000.0;
  }
  return out;
}

// --- entity pooling -------------------------------------------------------

enum class PoolMode { FIRST, MEAN };

struct EntityEmbedding {
  Vector vec;
  PoolMode mode = PoolMode::FIRST;
};

inline EntityEmbedding pool_entity(const Matrix& hidden, int first_token,
                                   int last_token, PoolMode mode) {
  if (first_token < 0 || last_token < first_token ||
      last_token >= hidden.rows())
    throw InputError("entity span outside window");
  EntityEmbedding e;
  e.mode = mode;
  if (mode == PoolMode::FIRST) {
    e.vec = hidden.row(first_token).transpose();
  } else {
    e.vec = hidden.middleRows(first_token, last_token - first_token + 1)
                .colwise()
                .mean()
                .transpose();
  }
  return e;
}

// Scatters an entity-embedding gradient back onto token rows.
inline void pool_entity_backward(Matrix& d_hidden, int first_token,
                                 int last_token, PoolMode mode,
                                 const Vector& d_vec) {
  if (mode == PoolMode::FIRST) {
    d_hidden.row(first_token) += d_vec.transpose();
  } else {
    const int len = last_token - first_token + 1;
    for (int t = first_token; t <= last_token; ++t)
      d_hidden.row(t) += d_vec.transpose() / double(len);
  }
}

}  // namespace vrdre
