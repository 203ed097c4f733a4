#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <vector>

#include "ppse/phe/codec.hpp"
#include "ppse/phe/paillier.hpp"
#include "ppse/sets/types.hpp"

namespace ppse::encsets {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using phe::EncScalar;
using phe::EncVector;
using phe::PublicContext;
using sets::Index;

/// ⟨⟦y⟧, H, R⟩: encrypted measurement, plaintext shape.
struct EncStrip {
  EncVector enc_y;
  MatrixXd H;
  VectorXd R;

  Index rows() const { return H.rows(); }
};

/// ⟨⟦c⟧, G⟩.
struct EncZonotope {
  EncVector enc_c;
  MatrixXd G;

  Index dim() const { return G.rows(); }
  Index num_generators() const { return G.cols(); }
};

/// ⟨⟦c⟧, G, A, ⟦b⟧⟩. c and b may sit at different scales.
struct EncConsZonotope {
  EncVector enc_c;
  MatrixXd G;
  MatrixXd A;
  EncVector enc_b;

  Index dim() const { return G.rows(); }
  Index num_generators() const { return G.cols(); }
  Index num_constraints() const { return A.rows(); }
};

// Validation of sizes and scale uniformity; throw DimensionMismatch / ScaleMismatch.
void check(const EncStrip& s);
void check(const EncZonotope& z);
void check(const EncConsZonotope& z);

// ---- vectors -------------------------------------------------------------

EncVector encrypt_vector(const PublicContext& ctx, const VectorXd& v, phe::Rng& rng);
VectorXd decrypt_vector(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec, const EncVector& v);

/// Lifts every entry to `target` scale.
EncVector rescale(const PublicContext& ctx, const EncVector& v, int target);

/// M ⊗ ⟦v⟧ row by row; result scale is scale(v) + 1.
EncVector mat_vec(const PublicContext& ctx, const MatrixXd& M, const EncVector& v);

EncVector add(const PublicContext& ctx, const EncVector& a, const EncVector& b);
EncVector sub(const PublicContext& ctx, const EncVector& a, const EncVector& b);

// ---- sets ------------------------------------------------------------------

EncStrip encrypt_strip(const PublicContext& ctx, const sets::Stripd& s, phe::Rng& rng);
EncZonotope encrypt_zono(const PublicContext& ctx, const sets::Zonotoped& z, phe::Rng& rng);
EncConsZonotope encrypt_cons(const PublicContext& ctx, const sets::ConstrainedZonotoped& z, phe::Rng& rng);

sets::Stripd decrypt_strip(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec, const EncStrip& s);
sets::Zonotoped decrypt_zono(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec, const EncZonotope& z);
sets::ConstrainedZonotoped decrypt_cons(const phe::PrivateKey& sk, const phe::FixedPointCodec& codec,
                                        const EncConsZonotope& z);

/// Plaintext shapes of encrypted strips with y set to zero, for gain and
/// generator computations that never read y.
std::vector<sets::Stripd> strip_shapes(const std::vector<EncStrip>& strips);

// ---- estimation updates ----------------------------------------------------

/// Zonotope-strip intersection over ciphertexts:
/// ⟦c̄⟧ = (I - Σ λ_j H_j) ⊗ ⟦ĉ⟧ ⊕ Σ λ_j ⊗ ⟦y_j⟧; Ḡ in plaintext.
/// Measurements are lifted to the center's scale first; result scale is one above.
EncZonotope enc_meas_update_zono(const PublicContext& ctx, const EncZonotope& z, const std::vector<EncStrip>& strips,
                                 const sets::LambdaGaind& lambda);

/// Exact constrained-zonotope strip intersection over ciphertexts. New offset
/// rows are ⟦y_j⟧ ⊖ H_j ⊗ ⟦ĉ⟧; all offsets are aligned to one scale.
EncConsZonotope enc_meas_update_cons(const PublicContext& ctx, const EncConsZonotope& z,
                                     const std::vector<EncStrip>& strips, const sets::LambdaGaind& lambda);

/// ⟦c⟧ ← F ⊗ ⟦c⟧, G ← ↓q [F G, Q].
EncZonotope enc_time_update(const PublicContext& ctx, const EncZonotope& z, const sets::SystemModeld& model,
                            int order);
/// ⟦c⟧ ← F ⊗ ⟦c⟧, {G, A} ← lifted ↓q {[F G, Q], [A, 0]}, ⟦b⟧ unchanged.
EncConsZonotope enc_time_update(const PublicContext& ctx, const EncConsZonotope& z, const sets::SystemModeld& model,
                                int order);

/// ⟦ć⟧ = Σ (w_j / Σw) ⊗ ⟦c_j⟧; generators per the weighted fusion. Inputs must share a scale.
EncZonotope enc_diffusion_zono(const PublicContext& ctx, const std::vector<EncZonotope>& zs,
                               const sets::WeightVectord& w);

/// Exact fusion: ⟦ć⟧ = ⟦c_1⟧; offsets stack every ⟦b_j⟧ and ⟦c_j⟧ ⊖ ⟦c_1⟧.
EncConsZonotope enc_diffusion_cons(const PublicContext& ctx, const std::vector<EncConsZonotope>& cs);

/// Weights from the plaintext generator matrices only.
sets::WeightVectord weights_of(const std::vector<EncZonotope>& zs);

// ---- wire ------------------------------------------------------------------

nlohmann::json to_json(const EncVector& v);
EncVector enc_vector_from_json(const nlohmann::json& j);

/// {y, H, R}; R omitted when `with_R` is false.
nlohmann::json to_json(const EncStrip& s, bool with_R = true);
/// {c, G}
nlohmann::json to_json(const EncZonotope& z);
/// {c, G, A, b}
nlohmann::json to_json(const EncConsZonotope& z);

EncStrip enc_strip_from_json(const nlohmann::json& j);
EncZonotope enc_zono_from_json(const nlohmann::json& j);
EncConsZonotope enc_cons_from_json(const nlohmann::json& j);

}  // namespace ppse::encsets
