#include "pathforge/transformer_policy.hpp"

#include <cmath>

namespace pathforge {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMat = Eigen::Map<const RowMat>;
using MutMat = Eigen::Map<RowMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

constexpr double kLnEps = 1e-5;

// Row-wise layer norm with learnable gain and bias; keeps the normalized
// activations and reciprocal standard deviations for the backward pass.
void layer_norm(const RowMat& x, ConstVec g, ConstVec b, RowMat& out, RowMat& xhat,
                Eigen::VectorXd& rstd) {
  const Eigen::Index s = x.rows(), d = x.cols();
  out.resize(s, d);
  xhat.resize(s, d);
  rstd.resize(s);
  for (Eigen::Index r = 0; r < s; ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().mean();
    double rs = 1.0 / std::sqrt(var + kLnEps);
    rstd[r] = rs;
    xhat.row(r) = (x.row(r).array() - mu) * rs;
    out.row(r) = xhat.row(r).cwiseProduct(g.transpose()) + b.transpose();
  }
}

RowMat layer_norm_backward(const RowMat& dout, const RowMat& xhat, const Eigen::VectorXd& rstd,
                           ConstVec g, MutVec dg, MutVec db) {
  const Eigen::Index s = dout.rows(), d = dout.cols();
  RowMat dx(s, d);
  for (Eigen::Index r = 0; r < s; ++r) {
    Eigen::RowVectorXd dxhat = dout.row(r).cwiseProduct(g.transpose());
    double m1 = dxhat.mean();
    double m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
    dx.row(r) = (rstd[r] * (dxhat.array() - m1 - xhat.row(r).array() * m2)).matrix();
    dg += dout.row(r).cwiseProduct(xhat.row(r)).transpose();
    db += dout.row(r).transpose();
  }
  return dx;
}

Eigen::VectorXd layer_norm_vec(const Eigen::VectorXd& x, ConstVec g, ConstVec b) {
  double mu = x.mean();
  double var = (x.array() - mu).square().mean();
  double rs = 1.0 / std::sqrt(var + kLnEps);
  return (((x.array() - mu) * rs) * g.array() + b.array()).matrix();
}

}  // namespace

struct TransformerPolicy::Cache {
  std::vector<int> seq;
  RowMat x0;
  struct Layer {
    RowMat x_in;
    RowMat ln1_out, ln1_xhat;
    Eigen::VectorXd ln1_rstd;
    RowMat q, k, v;
    std::vector<RowMat> probs;  // per head, causal row softmax
    RowMat attn_concat;         // heads side by side, before the output projection
    RowMat x_mid;               // after the attention residual
    RowMat ln2_out, ln2_xhat;
    Eigen::VectorXd ln2_rstd;
    RowMat mlp_pre, mlp_relu;
    RowMat x_out;
  };
  std::vector<Layer> layers;
  RowMat lnf_out, lnf_xhat;
  Eigen::VectorXd lnf_rstd;
  RowMat logits;
};

TransformerPolicy::TransformerPolicy(const TransformerConfig& config, uint64_t init_seed)
    : cfg_(config) {
  if (cfg_.layers <= 0 || cfg_.d_model <= 0 || cfg_.n_heads <= 0 || cfg_.d_mlp <= 0 ||
      cfg_.context <= 0) {
    throw policy_error("transformer dimensions must be positive");
  }
  if (cfg_.d_model % cfg_.n_heads != 0) {
    throw policy_error("d_model must be divisible by n_heads");
  }
  build_layout();
  init_params(init_seed);
}

void TransformerPolicy::build_layout() {
  layout_.clear();
  loff_.clear();
  int off = 0;
  auto block = [&](const std::string& name, int size) {
    layout_.push_back(ParamBlock{name, off, size});
    int at = off;
    off += size;
    return at;
  };
  const int v = vocab_.size(), d = cfg_.d_model, f = cfg_.d_mlp, n = cfg_.context;
  tok_emb_ = block("tok_emb", v * d);
  pos_emb_ = block("pos_emb", n * d);
  for (int l = 0; l < cfg_.layers; ++l) {
    std::string p = "l" + std::to_string(l) + ".";
    LayerOffsets lo;
    lo.ln1g = block(p + "ln1.g", d);
    lo.ln1b = block(p + "ln1.b", d);
    lo.wq = block(p + "attn.wq", d * d);
    lo.bq = block(p + "attn.bq", d);
    lo.wk = block(p + "attn.wk", d * d);
    lo.bk = block(p + "attn.bk", d);
    lo.wv = block(p + "attn.wv", d * d);
    lo.bv = block(p + "attn.bv", d);
    lo.wo = block(p + "attn.wo", d * d);
    lo.bo = block(p + "attn.bo", d);
    lo.ln2g = block(p + "ln2.g", d);
    lo.ln2b = block(p + "ln2.b", d);
    lo.w1 = block(p + "mlp.w1", f * d);
    lo.b1 = block(p + "mlp.b1", f);
    lo.w2 = block(p + "mlp.w2", d * f);
    lo.b2 = block(p + "mlp.b2", d);
    loff_.push_back(lo);
  }
  lnfg_ = block("lnf.g", d);
  lnfb_ = block("lnf.b", d);
  headw_ = block("head.w", v * d);
  headb_ = block("head.b", v);
  params_ = Eigen::VectorXd::Zero(off);
}

void TransformerPolicy::init_params(uint64_t seed) {
  Rng rng(seed);
  auto fill_uniform = [&](int off, int count, int fan_in) {
    double scale = 0.05 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < count; ++i) {
      params_[off + i] = (2.0 * rng.uniform01() - 1.0) * scale;
    }
  };
  const int v = vocab_.size(), d = cfg_.d_model, f = cfg_.d_mlp, n = cfg_.context;
  fill_uniform(tok_emb_, v * d, 1);
  fill_uniform(pos_emb_, n * d, 1);
  for (const LayerOffsets& lo : loff_) {
    params_.segment(lo.ln1g, d).setOnes();
    params_.segment(lo.ln2g, d).setOnes();
    fill_uniform(lo.wq, d * d, d);
    fill_uniform(lo.wk, d * d, d);
    fill_uniform(lo.wv, d * d, d);
    fill_uniform(lo.wo, d * d, d);
    fill_uniform(lo.w1, f * d, d);
    fill_uniform(lo.w2, d * f, f);
  }
  params_.segment(lnfg_, d).setOnes();
  fill_uniform(headw_, v * d, d);
}

void TransformerPolicy::forward(const std::vector<int>& seq, Cache& cache) const {
  const int s = static_cast<int>(seq.size());
  if (s == 0) throw policy_error("cannot run the model on an empty sequence");
  if (s > cfg_.context) {
    throw policy_error("context overflow: sequence length " + std::to_string(s) + " exceeds " +
                       std::to_string(cfg_.context));
  }
  const int v = vocab_.size(), d = cfg_.d_model, f = cfg_.d_mlp, h = cfg_.n_heads, dh = d / h;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double* pp = params_.data();

  cache.seq = seq;
  ConstMat tok(pp + tok_emb_, v, d);
  ConstMat posm(pp + pos_emb_, cfg_.context, d);
  cache.x0.resize(s, d);
  for (int t = 0; t < s; ++t) cache.x0.row(t) = tok.row(seq[t]) + posm.row(t);

  cache.layers.assign(static_cast<size_t>(cfg_.layers), Cache::Layer{});
  RowMat x = cache.x0;
  for (int l = 0; l < cfg_.layers; ++l) {
    const LayerOffsets& lo = loff_[l];
    Cache::Layer& lc = cache.layers[static_cast<size_t>(l)];
    lc.x_in = x;
    layer_norm(lc.x_in, ConstVec(pp + lo.ln1g, d), ConstVec(pp + lo.ln1b, d), lc.ln1_out,
               lc.ln1_xhat, lc.ln1_rstd);
    ConstMat wq(pp + lo.wq, d, d), wk(pp + lo.wk, d, d), wv(pp + lo.wv, d, d),
        wo(pp + lo.wo, d, d);
    lc.q = lc.ln1_out * wq.transpose();
    lc.q.rowwise() += ConstVec(pp + lo.bq, d).transpose();
    lc.k = lc.ln1_out * wk.transpose();
    lc.k.rowwise() += ConstVec(pp + lo.bk, d).transpose();
    lc.v = lc.ln1_out * wv.transpose();
    lc.v.rowwise() += ConstVec(pp + lo.bv, d).transpose();
    lc.probs.assign(static_cast<size_t>(h), RowMat());
    lc.attn_concat.resize(s, d);
    for (int hd = 0; hd < h; ++hd) {
      auto qh = lc.q.middleCols(hd * dh, dh);
      auto kh = lc.k.middleCols(hd * dh, dh);
      auto vh = lc.v.middleCols(hd * dh, dh);
      RowMat scores = qh * kh.transpose() * att_scale;
      RowMat& p = lc.probs[static_cast<size_t>(hd)];
      p = RowMat::Zero(s, s);
      for (int i = 0; i < s; ++i) {
        double m = scores.row(i).head(i + 1).maxCoeff();
        Eigen::RowVectorXd e = (scores.row(i).head(i + 1).array() - m).exp();
        p.row(i).head(i + 1) = e / e.sum();
      }
      lc.attn_concat.middleCols(hd * dh, dh) = p * vh;
    }
    RowMat attn_out = lc.attn_concat * wo.transpose();
    attn_out.rowwise() += ConstVec(pp + lo.bo, d).transpose();
    lc.x_mid = lc.x_in + attn_out;
    layer_norm(lc.x_mid, ConstVec(pp + lo.ln2g, d), ConstVec(pp + lo.ln2b, d), lc.ln2_out,
               lc.ln2_xhat, lc.ln2_rstd);
    ConstMat w1(pp + lo.w1, f, d), w2(pp + lo.w2, d, f);
    lc.mlp_pre = lc.ln2_out * w1.transpose();
    lc.mlp_pre.rowwise() += ConstVec(pp + lo.b1, f).transpose();
    lc.mlp_relu = lc.mlp_pre.cwiseMax(0.0);
    RowMat mlp_out = lc.mlp_relu * w2.transpose();
    mlp_out.rowwise() += ConstVec(pp + lo.b2, d).transpose();
    lc.x_out = lc.x_mid + mlp_out;
    x = lc.x_out;
  }
  layer_norm(x, ConstVec(pp + lnfg_, d), ConstVec(pp + lnfb_, d), cache.lnf_out, cache.lnf_xhat,
             cache.lnf_rstd);
  ConstMat hw(pp + headw_, v, d);
  cache.logits = cache.lnf_out * hw.transpose();
  cache.logits.rowwise() += ConstVec(pp + headb_, v).transpose();
}

Eigen::MatrixXd TransformerPolicy::full_logits(const std::vector<int>& seq) const {
  check_tokens(seq);
  Cache cache;
  forward(seq, cache);
  return cache.logits;
}

void TransformerPolicy::accumulate_logprob_gradient(const std::vector<int>& x,
                                                    const std::vector<int>& y, double weight,
                                                    Eigen::VectorXd& grad) const {
  check_tokens(x);
  check_tokens(y);
  if (y.empty() || y.back() != vocab_.eos_id()) {
    throw policy_error("gradient target must end with <eos>");
  }
  if (grad.size() != params_.size()) throw policy_error("gradient size mismatch");

  std::vector<int> seq;
  seq.reserve(1 + x.size() + y.size());
  seq.push_back(vocab_.bos_id());
  seq.insert(seq.end(), x.begin(), x.end());
  seq.insert(seq.end(), y.begin(), y.end());

  Cache cache;
  forward(seq, cache);
  const int s = static_cast<int>(seq.size());
  const int v = vocab_.size(), d = cfg_.d_model, f = cfg_.d_mlp, h = cfg_.n_heads, dh = d / h;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double* pp = params_.data();
  double* gp = grad.data();

  // weight * d/dlogits of sum-over-targets log softmax(logits_p)[seq_{p+1}].
  // Positions before the first target token carry no loss.
  RowMat dlogits = RowMat::Zero(s, v);
  for (int p = static_cast<int>(x.size()); p <= s - 2; ++p) {
    Eigen::VectorXd pr = softmax(cache.logits.row(p).transpose());
    dlogits.row(p) = (-weight) * pr.transpose();
    dlogits(p, seq[static_cast<size_t>(p) + 1]) += weight;
  }

  ConstMat hw(pp + headw_, v, d);
  MutMat dhw(gp + headw_, v, d);
  MutVec dhb(gp + headb_, v);
  dhw += dlogits.transpose() * cache.lnf_out;
  dhb += dlogits.colwise().sum().transpose();
  RowMat dlnf = dlogits * hw;
  MutVec dlnfg(gp + lnfg_, d), dlnfb(gp + lnfb_, d);
  RowMat dx = layer_norm_backward(dlnf, cache.lnf_xhat, cache.lnf_rstd, ConstVec(pp + lnfg_, d),
                                  dlnfg, dlnfb);

  for (int l = cfg_.layers - 1; l >= 0; --l) {
    const LayerOffsets& lo = loff_[l];
    const Cache::Layer& lc = cache.layers[static_cast<size_t>(l)];

    ConstMat w1(pp + lo.w1, f, d), w2(pp + lo.w2, d, f);
    MutMat dw1(gp + lo.w1, f, d), dw2(gp + lo.w2, d, f);
    MutVec db1(gp + lo.b1, f), db2(gp + lo.b2, d);
    dw2 += dx.transpose() * lc.mlp_relu;
    db2 += dx.colwise().sum().transpose();
    RowMat drelu = dx * w2;
    RowMat dpre = (drelu.array() * (lc.mlp_pre.array() > 0.0).cast<double>()).matrix();
    dw1 += dpre.transpose() * lc.ln2_out;
    db1 += dpre.colwise().sum().transpose();
    RowMat dln2 = dpre * w1;
    MutVec dln2g(gp + lo.ln2g, d), dln2b(gp + lo.ln2b, d);
    RowMat dx_mid = layer_norm_backward(dln2, lc.ln2_xhat, lc.ln2_rstd, ConstVec(pp + lo.ln2g, d),
                                        dln2g, dln2b);
    dx_mid += dx;  // residual around the MLP

    ConstMat wq(pp + lo.wq, d, d), wk(pp + lo.wk, d, d), wv(pp + lo.wv, d, d),
        wo(pp + lo.wo, d, d);
    MutMat dwq(gp + lo.wq, d, d), dwk(gp + lo.wk, d, d), dwv(gp + lo.wv, d, d),
        dwo(gp + lo.wo, d, d);
    MutVec dbq(gp + lo.bq, d), dbk(gp + lo.bk, d), dbv(gp + lo.bv, d), dbo(gp + lo.bo, d);
    dwo += dx_mid.transpose() * lc.attn_concat;
    dbo += dx_mid.colwise().sum().transpose();
    RowMat dconcat = dx_mid * wo;
    RowMat dq = RowMat::Zero(s, d), dk = RowMat::Zero(s, d), dv = RowMat::Zero(s, d);
    for (int hd = 0; hd < h; ++hd) {
      auto doh = dconcat.middleCols(hd * dh, dh);
      auto qh = lc.q.middleCols(hd * dh, dh);
      auto kh = lc.k.middleCols(hd * dh, dh);
      auto vh = lc.v.middleCols(hd * dh, dh);
      const RowMat& p = lc.probs[static_cast<size_t>(hd)];
      RowMat dp = doh * vh.transpose();
      dv.middleCols(hd * dh, dh) += p.transpose() * doh;
      RowMat ds = RowMat::Zero(s, s);
      for (int i = 0; i < s; ++i) {
        double dot = dp.row(i).head(i + 1).cwiseProduct(p.row(i).head(i + 1)).sum();
        ds.row(i).head(i + 1) =
            (p.row(i).head(i + 1).array() * (dp.row(i).head(i + 1).array() - dot)).matrix();
      }
      dq.middleCols(hd * dh, dh) += ds * kh * att_scale;
      dk.middleCols(hd * dh, dh) += ds.transpose() * qh * att_scale;
    }
    dwq += dq.transpose() * lc.ln1_out;
    dbq += dq.colwise().sum().transpose();
    dwk += dk.transpose() * lc.ln1_out;
    dbk += dk.colwise().sum().transpose();
    dwv += dv.transpose() * lc.ln1_out;
    dbv += dv.colwise().sum().transpose();
    RowMat dln1 = dq * wq + dk * wk + dv * wv;
    MutVec dln1g(gp + lo.ln1g, d), dln1b(gp + lo.ln1b, d);
    RowMat dx_in = layer_norm_backward(dln1, lc.ln1_xhat, lc.ln1_rstd, ConstVec(pp + lo.ln1g, d),
                                       dln1g, dln1b);
    dx = dx_in + dx_mid;  // residual into the block input
  }

  MutMat dtok(gp + tok_emb_, v, d);
  MutMat dpos(gp + pos_emb_, cfg_.context, d);
  for (int t = 0; t < s; ++t) {
    dtok.row(seq[static_cast<size_t>(t)]) += dx.row(t);
    dpos.row(t) += dx.row(t);
  }
}

class TransformerStream : public PolicyStream {
 public:
  explicit TransformerStream(const TransformerPolicy& p) : p_(p) {
    kcache_.assign(static_cast<size_t>(p.cfg_.layers),
                   RowMat::Zero(p.cfg_.context, p.cfg_.d_model));
    vcache_ = kcache_;
  }

  Eigen::VectorXd logits() const override {
    if (pos_ == 0) throw policy_error("stream has no context to condition on");
    const int d = p_.cfg_.d_model, v = p_.vocab_.size();
    const double* pp = p_.params_.data();
    Eigen::VectorXd f =
        layer_norm_vec(h_last_, ConstVec(pp + p_.lnfg_, d), ConstVec(pp + p_.lnfb_, d));
    return ConstMat(pp + p_.headw_, v, d) * f + ConstVec(pp + p_.headb_, v);
  }

  void push(int token) override {
    const TransformerConfig& cfg = p_.cfg_;
    const int d = cfg.d_model, h = cfg.n_heads, dh = d / h, f = cfg.d_mlp;
    if (token < 0 || token >= p_.vocab_.size()) {
      throw unknown_token("token id out of range: " + std::to_string(token));
    }
    if (pos_ >= cfg.context) throw policy_error("context overflow in stream");
    const double* pp = p_.params_.data();
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const int t = pos_;
    ConstMat tok(pp + p_.tok_emb_, p_.vocab_.size(), d);
    ConstMat posm(pp + p_.pos_emb_, cfg.context, d);
    Eigen::VectorXd x = tok.row(token).transpose() + posm.row(t).transpose();
    for (int l = 0; l < cfg.layers; ++l) {
      const TransformerPolicy::LayerOffsets& lo = p_.loff_[static_cast<size_t>(l)];
      Eigen::VectorXd a = layer_norm_vec(x, ConstVec(pp + lo.ln1g, d), ConstVec(pp + lo.ln1b, d));
      Eigen::VectorXd q = ConstMat(pp + lo.wq, d, d) * a + ConstVec(pp + lo.bq, d);
      kcache_[static_cast<size_t>(l)].row(t) =
          (ConstMat(pp + lo.wk, d, d) * a + ConstVec(pp + lo.bk, d)).transpose();
      vcache_[static_cast<size_t>(l)].row(t) =
          (ConstMat(pp + lo.wv, d, d) * a + ConstVec(pp + lo.bv, d)).transpose();
      Eigen::VectorXd o(d);
      for (int hd = 0; hd < h; ++hd) {
        auto kh = kcache_[static_cast<size_t>(l)].topRows(t + 1).middleCols(hd * dh, dh);
        auto vh = vcache_[static_cast<size_t>(l)].topRows(t + 1).middleCols(hd * dh, dh);
        Eigen::VectorXd scores = kh * q.segment(hd * dh, dh) * att_scale;
        double m = scores.maxCoeff();
        Eigen::VectorXd e = (scores.array() - m).exp();
        o.segment(hd * dh, dh) = vh.transpose() * (e / e.sum()).matrix();
      }
      x += ConstMat(pp + lo.wo, d, d) * o + ConstVec(pp + lo.bo, d);
      Eigen::VectorXd m2 = layer_norm_vec(x, ConstVec(pp + lo.ln2g, d), ConstVec(pp + lo.ln2b, d));
      Eigen::VectorXd relu =
          (ConstMat(pp + lo.w1, f, d) * m2 + ConstVec(pp + lo.b1, f)).cwiseMax(0.0);
      x += ConstMat(pp + lo.w2, d, f) * relu + ConstVec(pp + lo.b2, d);
    }
    h_last_ = x;
    pos_ = t + 1;
  }

  std::unique_ptr<PolicyStream> clone() const override {
    return std::make_unique<TransformerStream>(*this);
  }

 private:
  const TransformerPolicy& p_;
  int pos_ = 0;
  Eigen::VectorXd h_last_;
  std::vector<RowMat> kcache_, vcache_;
};

nlohmann::json TransformerPolicy::hyperparams() const {
  return nlohmann::json{{"layers", cfg_.layers},
                        {"d_model", cfg_.d_model},
                        {"n_heads", cfg_.n_heads},
                        {"d_mlp", cfg_.d_mlp},
                        {"context", cfg_.context}};
}

std::unique_ptr<Policy> TransformerPolicy::clone() const {
  return std::make_unique<TransformerPolicy>(*this);
}

std::unique_ptr<PolicyStream> TransformerPolicy::open_stream() const {
  auto stream = std::make_unique<TransformerStream>(*this);
  stream->push(vocab_.bos_id());
  return stream;
}

std::unique_ptr<TransformerPolicy> TransformerPolicy::from_hyperparams(const nlohmann::json& h) {
  TransformerConfig cfg;
  cfg.layers = h.at("layers").get<int>();
  cfg.d_model = h.at("d_model").get<int>();
  cfg.n_heads = h.at("n_heads").get<int>();
  cfg.d_mlp = h.at("d_mlp").get<int>();
  cfg.context = h.at("context").get<int>();
  return std::make_unique<TransformerPolicy>(cfg, 0);
}

}  // namespace pathforge
