#include "ppse/encsets/encsets.hpp"

#include <algorithm>
#include <string>

#include "ppse/error.hpp"
#include "ppse/phe/wire.hpp"
#include "ppse/sets/intersect.hpp"
#include "ppse/sets/json.hpp"
#include "ppse/sets/reduce.hpp"

namespace ppse::encsets {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}

int max_scale(const EncVector& v) {
  int s = 0;
  for (const auto& e : v) s = std::max(s, e.scale_exp);
  return s;
}

EncVector concat(EncVector a, const EncVector& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

sets::Zonotoped shape_of(const MatrixXd& G) { return sets::Zonotoped(VectorXd::Zero(G.rows()), G); }

}  // namespace

void check(const EncStrip& s) {
  require(Index(s.enc_y.size()) == s.H.rows() && s.R.size() == s.H.rows(), "encrypted strip sizes differ");
  phe::uniform_scale(s.enc_y);
}

void check(const EncZonotope& z) {
  require(Index(z.enc_c.size()) == z.G.rows(), "encrypted center and generator rows differ");
  phe::uniform_scale(z.enc_c);
}

void check(const EncConsZonotope& z) {
  require(Index(z.enc_c.size()) == z.G.rows(), "encrypted center and generator rows differ");
  require(z.A.cols() == z.G.cols(), "constraint and generator column counts differ");
  require(Index(z.enc_b.size()) == z.A.rows(), "constraint rows and encrypted offsets differ");
  phe::uniform_scale(z.enc_c);
  phe::uniform_scale(z.enc_b);
}

EncVector encrypt_vector(const PublicContext& ctx, const VectorXd& v, phe::Rng& rng) {
  EncVector out;
  out.reserve(std::size_t(v.size()));
  for (Index i = 0; i < v.size(); ++i) out.push_back(phe::encrypt_real(ctx, v(i), rng));
  return out;
}

VectorXd decrypt_vector(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec, const EncVector& v) {
  VectorXd out(Index(v.size()));
  for (Index i = 0; i < out.size(); ++i) out(i) = phe::decrypt_real(sk, codec, v[std::size_t(i)]);
  return out;
}

EncVector rescale(const PublicContext& ctx, const EncVector& v, int target) {
  EncVector out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(phe::rescale(ctx, e, target));
  return out;
}

EncVector mat_vec(const PublicContext& ctx, const MatrixXd& M, const EncVector& v) {
  require(M.cols() == Index(v.size()), "plaintext matrix width differs from encrypted vector");
  const int s = phe::uniform_scale(v);
  const int out_scale = (v.empty() ? 1 : s) + 1;
  if (out_scale > ctx.codec.max_scale_exp()) {
    throw ScaleOverflow("plaintext product would reach scale " + std::to_string(out_scale) + " above the budget " +
                        std::to_string(ctx.codec.max_scale_exp()) + "; a refresh is required");
  }
  EncVector out;
  out.reserve(std::size_t(M.rows()));
  for (Index i = 0; i < M.rows(); ++i) {
    EncScalar acc = phe::enc_trivial(ctx.pk, 0, out_scale);
    for (Index j = 0; j < M.cols(); ++j) {
      if (M(i, j) == 0.0) continue;
      acc = phe::add_ct(ctx.pk, acc, phe::mul_real(ctx, M(i, j), v[std::size_t(j)]));
    }
    out.push_back(std::move(acc));
  }
  return out;
}

EncVector add(const PublicContext& ctx, const EncVector& a, const EncVector& b) {
  require(a.size() == b.size(), "encrypted vectors differ in length");
  EncVector out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(phe::add_ct(ctx.pk, a[i], b[i]));
  return out;
}

EncVector sub(const PublicContext& ctx, const EncVector& a, const EncVector& b) {
  require(a.size() == b.size(), "encrypted vectors differ in length");
  EncVector out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(phe::sub_ct(ctx.pk, a[i], b[i]));
  return out;
}

EncStrip encrypt_strip(const PublicContext& ctx, const sets::Stripd& s, phe::Rng& rng) {
  return EncStrip{encrypt_vector(ctx, s.y, rng), s.H, s.R};
}

EncZonotope encrypt_zono(const PublicContext& ctx, const sets::Zonotoped& z, phe::Rng& rng) {
  return EncZonotope{encrypt_vector(ctx, z.c, rng), z.G};
}

EncConsZonotope encrypt_cons(const PublicContext& ctx, const sets::ConstrainedZonotoped& z, phe::Rng& rng) {
  EncVector c = encrypt_vector(ctx, z.c, rng);
  return EncConsZonotope{std::move(c), z.G, z.A, encrypt_vector(ctx, z.b, rng)};
}

sets::Stripd decrypt_strip(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec, const EncStrip& s) {
  check(s);
  return sets::Stripd(s.H, decrypt_vector(sk, codec, s.enc_y), s.R);
}

sets::Zonotoped decrypt_zono(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec, const EncZonotope& z) {
  check(z);
  return sets::Zonotoped(decrypt_vector(sk, codec, z.enc_c), z.G);
}

sets::ConstrainedZonotoped decrypt_cons(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec,
                                        const EncConsZonotope& z) {
  check(z);
  return sets::ConstrainedZonotoped(decrypt_vector(sk, codec, z.enc_c), z.G, z.A, decrypt_vector(sk, codec, z.enc_b));
}

std::vector<sets::Stripd> strip_shapes(const std::vector<EncStrip>& strips) {
  std::vector<sets::Stripd> out;
  out.reserve(strips.size());
  for (const auto& s : strips) {
    check(s);
    out.emplace_back(s.H, VectorXd::Zero(s.rows()), s.R);
  }
  return out;
}

namespace {

// (I - Σ λ_j H_j) ⊗ ⟦ĉ⟧ ⊕ Σ λ_j ⊗ ⟦y_j⟧ with y lifted to the center's scale.
EncVector updated_center(const PublicContext& ctx, const EncVector& enc_c, const std::vector<EncStrip>& strips,
                         const std::vector<sets::Stripd>& shapes, const sets::LambdaGaind& lambda) {
  const Index n = Index(enc_c.size());
  const int sc = phe::uniform_scale(enc_c);
  EncVector c = mat_vec(ctx, sets::gain_complement(n, shapes, lambda), enc_c);
  for (std::size_t j = 0; j < strips.size(); ++j) {
    const int sy = phe::uniform_scale(strips[j].enc_y);
    if (sy > sc) {
      throw ScaleMismatch("measurement scale " + std::to_string(sy) + " exceeds the center scale " +
                          std::to_string(sc));
    }
    const EncVector y = rescale(ctx, strips[j].enc_y, sc);
    c = add(ctx, c, mat_vec(ctx, lambda.block(Index(j)), y));
  }
  return c;
}

}  // namespace

EncZonotope enc_meas_update_zono(const PublicContext& ctx, const EncZonotope& z, const std::vector<EncStrip>& strips,
                                 const sets::LambdaGaind& lambda) {
  check(z);
  const std::vector<sets::Stripd> shapes = strip_shapes(strips);
  MatrixXd G = sets::strip_generators(z.G, shapes, lambda);
  return EncZonotope{updated_center(ctx, z.enc_c, strips, shapes, lambda), std::move(G)};
}

EncConsZonotope enc_meas_update_cons(const PublicContext& ctx, const EncConsZonotope& z,
                                     const std::vector<EncStrip>& strips, const sets::LambdaGaind& lambda) {
  check(z);
  if (strips.empty()) return z;
  const std::vector<sets::Stripd> shapes = strip_shapes(strips);
  MatrixXd G = sets::strip_generators(z.G, shapes, lambda);
  MatrixXd A = sets::strip_constraints(z.G, z.A, shapes);

  const int sc = phe::uniform_scale(z.enc_c);
  EncVector rows;
  for (const auto& s : strips) {
    const EncVector hc = mat_vec(ctx, s.H, z.enc_c);  // scale sc + 1
    rows = concat(std::move(rows), sub(ctx, rescale(ctx, s.enc_y, sc + 1), hc));
  }
  const int target = std::max(phe::uniform_scale(z.enc_b), sc + 1);
  EncVector b = concat(rescale(ctx, z.enc_b, target), rescale(ctx, rows, target));
  return EncConsZonotope{updated_center(ctx, z.enc_c, strips, shapes, lambda), std::move(G), std::move(A),
                         std::move(b)};
}

EncZonotope enc_time_update(const PublicContext& ctx, const EncZonotope& z, const sets::SystemModeld& model,
                            int order) {
  check(z);
  require(model.dim() == z.dim(), "model dimension differs from set dimension");
  const sets::Zonotoped shape = sets::time_update(shape_of(z.G), model, order);
  return EncZonotope{mat_vec(ctx, model.F, z.enc_c), shape.G};
}

EncConsZonotope enc_time_update(const PublicContext& ctx, const EncConsZonotope& z, const sets::SystemModeld& model,
                                int order) {
  check(z);
  require(model.dim() == z.dim(), "model dimension differs from set dimension");
  const sets::ConstrainedZonotoped shape = sets::time_update(
      sets::ConstrainedZonotoped(VectorXd::Zero(z.dim()), z.G, z.A, VectorXd::Zero(z.num_constraints())), model,
      order);
  return EncConsZonotope{mat_vec(ctx, model.F, z.enc_c), shape.G, shape.A, z.enc_b};
}

sets::WeightVectord weights_of(const std::vector<EncZonotope>& zs) {
  std::vector<sets::Zonotoped> shapes;
  shapes.reserve(zs.size());
  for (const auto& z : zs) shapes.push_back(shape_of(z.G));
  return sets::compute_weights(shapes);
}

EncZonotope enc_diffusion_zono(const PublicContext& ctx, const std::vector<EncZonotope>& zs,
                               const sets::WeightVectord& w) {
  require(!zs.empty(), "fusion needs at least one set");
  std::vector<MatrixXd> Gs;
  Gs.reserve(zs.size());
  for (const auto& z : zs) {
    check(z);
    Gs.push_back(z.G);
  }
  MatrixXd G = sets::weighted_generators(Gs, w);
  const int s = phe::uniform_scale(zs.front().enc_c);
  const double total = w.w.sum();
  EncVector c;
  for (std::size_t j = 0; j < zs.size(); ++j) {
    if (phe::uniform_scale(zs[j].enc_c) != s) throw ScaleMismatch("fused sets carry different center scales");
    const MatrixXd scaled = MatrixXd::Identity(zs[j].dim(), zs[j].dim()) * (w.w(Index(j)) / total);
    EncVector term = mat_vec(ctx, scaled, zs[j].enc_c);
    c = c.empty() ? std::move(term) : add(ctx, c, term);
  }
  return EncZonotope{std::move(c), std::move(G)};
}

EncConsZonotope enc_diffusion_cons(const PublicContext& ctx, const std::vector<EncConsZonotope>& cs) {
  require(!cs.empty(), "fusion needs at least one set");
  std::vector<sets::ConstrainedZonotoped> shapes;
  shapes.reserve(cs.size());
  for (const auto& c : cs) {
    check(c);
    shapes.emplace_back(VectorXd::Zero(c.dim()), c.G, c.A, VectorXd::Zero(c.num_constraints()));
  }
  if (cs.size() == 1) return cs.front();
  MatrixXd G;
  MatrixXd A;
  sets::fusion_shapes(shapes, G, A);

  const int sc = phe::uniform_scale(cs.front().enc_c);
  int target = sc;
  for (const auto& c : cs) {
    if (phe::uniform_scale(c.enc_c) != sc) throw ScaleMismatch("fused sets carry different center scales");
    target = std::max(target, max_scale(c.enc_b));
  }
  EncVector b;
  for (const auto& c : cs) b = concat(std::move(b), rescale(ctx, c.enc_b, target));
  for (std::size_t j = 1; j < cs.size(); ++j) {
    b = concat(std::move(b), rescale(ctx, sub(ctx, cs[j].enc_c, cs.front().enc_c), target));
  }
  return EncConsZonotope{cs.front().enc_c, std::move(G), std::move(A), std::move(b)};
}

json to_json(const EncVector& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back(phe::to_base64(e));
  return out;
}

EncVector enc_vector_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("ciphertext vector must be an array");
  EncVector out;
  for (const auto& e : j) {
    if (!e.is_string()) throw ParseError("ciphertext must be a base64 string");
    out.push_back(phe::from_base64(e.get<std::string>()));
  }
  return out;
}

json to_json(const EncStrip& s, bool with_R) {
  json out{{"y", to_json(s.enc_y)}, {"H", sets::matrix_to_json(s.H)}};
  if (with_R) out["R"] = sets::vector_to_json(s.R);
  return out;
}

json to_json(const EncZonotope& z) { return json{{"c", to_json(z.enc_c)}, {"G", sets::matrix_to_json(z.G)}}; }

json to_json(const EncConsZonotope& z) {
  return json{{"c", to_json(z.enc_c)},
              {"G", sets::matrix_to_json(z.G)},
              {"A", sets::matrix_to_json(z.A)},
              {"b", to_json(z.enc_b)}};
}

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ParseError(std::string("missing field ") + name);
  return j.at(name);
}

}  // namespace

EncStrip enc_strip_from_json(const json& j) {
  EncStrip s{enc_vector_from_json(field(j, "y")), sets::matrix_from_json(field(j, "H")), VectorXd()};
  s.R = j.contains("R") ? sets::vector_from_json(j.at("R")) : VectorXd::Zero(s.H.rows());
  check(s);
  return s;
}

EncZonotope enc_zono_from_json(const json& j) {
  EncZonotope z{enc_vector_from_json(field(j, "c")), sets::matrix_from_json(field(j, "G"))};
  check(z);
  return z;
}

EncConsZonotope enc_cons_from_json(const json& j) {
  EncConsZonotope z{enc_vector_from_json(field(j, "c")), sets::matrix_from_json(field(j, "G")), MatrixXd(),
                    enc_vector_from_json(field(j, "b"))};
  z.A = sets::matrix_from_json(field(j, "A"), z.G.cols());
  check(z);
  return z;
}

}  // namespace ppse::encsets
