//! Orientation and index-order choices shared by every module.
//!
//! Sign and slot conventions are the dominant failure mode in curvature
//! code, so they are collected here once, as data. The digest of the table
//! is embedded in every report, which lets archived numbers be matched to
//! the exact conventions that produced them.

/// Sign relating the spray-side curvature to the connection-side one:
/// `g_im R^m_k = HH_BRIDGE_SIGN * y^j R_jikl y^l`.
///
/// Pinned by measurement on the Riemannian control chart (round sphere),
/// where both sides reduce to the classical curvature operator; the same
/// sign is then required to work unchanged on every catalog chart.
pub const HH_BRIDGE_SIGN: f64 = 1.0;

/// The convention table. Each entry is `(name, formula)`, stated in plain
/// index notation with `d_j = d/dx^j - N^m_j d/dy^m` and `Gs` the
/// horizontal connection coefficients.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("metric", "g_ij = 1/2 d^2(F^2)/dy^i dy^j"),
    ("cartan-torsion", "C_ijk = 1/4 d^3(F^2)/dy^i dy^j dy^k"),
    ("mean-cartan", "I_i = g^{jk} C_ijk"),
    (
        "spray",
        "G^i = 1/4 g^{il} ((F^2)_{x^k y^l} y^k - (F^2)_{x^l})",
    ),
    ("nonlinear-connection", "N^i_j = dG^i/dy^j"),
    ("berwald", "B^i_jkl = d^3 G^i / dy^j dy^k dy^l"),
    ("landsberg", "L_ijk = -1/2 y_m B^m_ijk"),
    ("mean-landsberg", "J_i = g^{jk} L_ijk"),
    (
        "riemann-map",
        "R^i_k = 2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k + 2 G^j d^2G^i/dy^j dy^k - N^i_j N^j_k",
    ),
    (
        "flag-curvature",
        "K(y,v) = R_ik v^i v^k / (F^2 g(v,v) - g(y,v)^2) with R_ik = g_im R^m_k",
    ),
    (
        "horizontal-connection",
        "Gs^i_jk = 1/2 g^{is} (d_j g_sk + d_k g_js - d_s g_jk)",
    ),
    (
        "hh-curvature",
        "R_j^i_kl = d_k Gs^i_jl - d_l Gs^i_jk + Gs^i_mk Gs^m_jl - Gs^i_ml Gs^m_jk + C^i_jm R^m_kl",
    ),
    ("nonlinear-curvature", "R^m_kl = d_k N^m_l - d_l N^m_k"),
    ("lowered-hh", "R_jikl = g_im R_j^m_kl"),
    (
        "ricci",
        "Ric_ij = sum_r R_i^r_rj (upper slot against the first antisymmetric slot; positive on the round sphere)",
    ),
    (
        "three-index-curvature",
        "R^i_jk = 1/3 (dR^i_k/dy^j - dR^i_j/dy^k), lowered R_ijk = g_im R^m_jk, contraction R_i0k = R_ijk y^j",
    ),
    (
        "bridge-sign",
        "g_im R^m_k = HH_BRIDGE_SIGN * y^j R_jikl y^l, HH_BRIDGE_SIGN = +1",
    ),
    (
        "contracted-curvature",
        "Nf_ik = Ric_ik - (I^m R_ikm + I^m R_mki + (1/F) l_i I^m R_m0k + I_i R_0k) / (n+1)",
    ),
];

/// FNV-1a 64-bit digest of the convention table, one `name=formula` line
/// per entry.
pub fn conventions_digest() -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for (name, formula) in CONVENTIONS {
        for byte in name
            .bytes()
            .chain([b'='])
            .chain(formula.bytes())
            .chain([b'\n'])
        {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_nonzero() {
        let d1 = conventions_digest();
        let d2 = conventions_digest();
        assert_eq!(d1, d2);
        assert_ne!(d1, 0);
    }

    #[test]
    fn fnv_reference_vector() {
        // FNV-1a 64 of "a" is a published reference value; replicate the
        // inner loop on a one-entry table without the separator bytes.
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        hash ^= u64::from(b'a');
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        assert_eq!(hash, 0xaf63_dc4c_8601_ec8c);
    }
}
