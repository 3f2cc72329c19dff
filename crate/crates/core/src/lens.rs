//! Lens-space links, mapping-class generators, Milnor lattices and the
//! isometric-embedding obstructions used to rule out degenerations.
//!
//! The two mapping classes tracked here are the conjugation `tau`, always
//! defined on `L(p,q)`, and the coordinate swap `sigma`, which descends
//! exactly when `q^2 = 1 mod p` (and is treated as the identity
//! otherwise). `sigma` is isotopic to the identity when `q = 1` and
//! `sigma tau` is when `q = -1`.

use crate::sing::{hj, y_family_by_type, CyclicSing, HJChain, NormalForm};
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LensError {
    #[error("L({p},{q}) is not a lens space: need gcd(p,q)=1 and q<p")]
    BadLensSpace { p: u64, q: u64 },
    #[error("unknown Milnor lattice kind: {0}")]
    UnknownKind(String),
    #[error("source lattice is not negative definite")]
    NotNegativeDefinite,
    #[error("source has no intersection form on record")]
    NoGram,
    #[error("search bound overflow: {0}")]
    SearchOverflow(String),
}

/// The lens space `L(p,q)`, the link of `1/p (1,q)`; `p = 1` is the
/// 3-sphere sentinel (with `q = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LensSpace {
    pub p: u64,
    pub q: u64,
}

impl LensSpace {
    pub fn new(p: u64, q: u64) -> Result<Self, LensError> {
        let ok = (p == 1 && q == 0) || (p >= 2 && q >= 1 && q < p && p.gcd(&q) == 1);
        if !ok {
            return Err(LensError::BadLensSpace { p, q });
        }
        Ok(LensSpace { p, q })
    }

    pub fn sphere() -> Self {
        LensSpace { p: 1, q: 0 }
    }

    pub fn is_sphere(&self) -> bool {
        self.p == 1
    }
}

/// The link of a normalized cyclic germ is `L(p,q)` on the nose.
pub fn link_of(germ: &NormalForm) -> LensSpace {
    match germ {
        NormalForm::Smooth => LensSpace::sphere(),
        NormalForm::Cyclic(s) => LensSpace { p: s.p, q: s.q },
    }
}

/// Mapping-class bookkeeping for `Diff+ / Diff0+` of a lens space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCGReport {
    pub space: LensSpace,
    /// `q^2 = 1 mod p`: the swap descends to the quotient.
    pub sigma_defined: bool,
    /// `q = 1 mod p`: sigma is conjugate to a rotation, hence isotopically trivial.
    pub sigma_isotopic_to_id: bool,
    /// `q = -1 mod p`: sigma tau is isotopically trivial.
    pub sigma_tau_isotopic_to_id: bool,
    /// Effective generating set of `Diff+/Diff0+` among {tau, sigma}.
    pub generators: Vec<String>,
}

pub fn mcg(space: LensSpace) -> MCGReport {
    let (p, q) = (space.p as u128, space.q as u128);
    let sigma_defined = (q * q) % p == 1 % p;
    let sigma_isotopic_to_id = q % p == 1 % p;
    let sigma_tau_isotopic_to_id = (q + 1) % p == 0 || p == 1;
    // structural implication: q = 1 forces q^2 = 1
    debug_assert!(!sigma_isotopic_to_id || sigma_defined);
    let mut generators = vec!["tau".to_string()];
    if sigma_defined && !sigma_isotopic_to_id && !sigma_tau_isotopic_to_id {
        generators.push("sigma".to_string());
    }
    MCGReport {
        space,
        sigma_defined,
        sigma_isotopic_to_id,
        sigma_tau_isotopic_to_id,
        generators,
    }
}

/// `H_2` of a Milnor fibre: an integral symmetric form, when known, plus
/// the canonical-class 2-torsion flag. For the Q-Gorenstein smoothing of
/// the Y family only the torsion flag is on record; its free rank is not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilnorLattice {
    pub gram: Option<Vec<Vec<i64>>>,
    pub torsion_canonical_two: bool,
}

/// Named smoothing components with known Milnor lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MilnorKind {
    A {
        n: u64,
    },
    D {
        n: u64,
    },
    E {
        n: u64,
    },
    B {
        n: u64,
    },
    /// Simultaneous-resolution component of the Y-type singularity
    /// `1/(4n)(1, 2n-1)`, indexed by type.
    YRes {
        n: u64,
    },
    /// Q-Gorenstein component of the Y family.
    YQGorenstein,
}

impl std::fmt::Display for MilnorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MilnorKind::A { n } => write!(f, "A({n})"),
            MilnorKind::D { n } => write!(f, "D({n})"),
            MilnorKind::E { n } => write!(f, "E({n})"),
            MilnorKind::B { n } => write!(f, "B({n})"),
            MilnorKind::YRes { n } => write!(f, "Y-res({n})"),
            MilnorKind::YQGorenstein => write!(f, "Y-QGorenstein"),
        }
    }
}

fn gram_from_tree(diag: &[i64], edges: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let n = diag.len();
    let mut m = vec![vec![0i64; n]; n];
    for (i, &d) in diag.iter().enumerate() {
        m[i][i] = d;
    }
    for &(i, j) in edges {
        m[i][j] = 1;
        m[j][i] = 1;
    }
    m
}

fn gram_from_chain(chain: &HJChain) -> Vec<Vec<i64>> {
    let diag: Vec<i64> = chain.0.iter().map(|&b| -(b as i64)).collect();
    let edges: Vec<(usize, usize)> = (0..chain.0.len().saturating_sub(1))
        .map(|i| (i, i + 1))
        .collect();
    gram_from_tree(&diag, &edges)
}

/// The Milnor lattice of the named smoothing. A/D/E and B admit
/// simultaneous resolution, so the lattice is read off the resolution
/// diagram; the Y Q-Gorenstein fibre carries the torsion flag instead.
pub fn milnor_lattice(kind: MilnorKind) -> Result<MilnorLattice, LensError> {
    let gram = match kind {
        MilnorKind::A { n } => {
            if n < 1 {
                return Err(LensError::UnknownKind(kind.to_string()));
            }
            gram_from_chain(&HJChain(vec![2; n as usize]))
        }
        MilnorKind::D { n } => {
            if n < 3 {
                return Err(LensError::UnknownKind(kind.to_string()));
            }
            // path 0..n-2 with the last vertex attached to vertex n-3
            let n = n as usize;
            let mut edges: Vec<(usize, usize)> = (0..n - 2).map(|i| (i, i + 1)).collect();
            edges.push((n - 3, n - 1));
            gram_from_tree(&vec![-2; n], &edges)
        }
        MilnorKind::E { n } => {
            if !(6..=8).contains(&n) {
                return Err(LensError::UnknownKind(kind.to_string()));
            }
            let n = n as usize;
            let mut edges: Vec<(usize, usize)> = (0..n - 2).map(|i| (i, i + 1)).collect();
            edges.push((2, n - 1));
            gram_from_tree(&vec![-2; n], &edges)
        }
        MilnorKind::B { n } => {
            if n < 1 {
                return Err(LensError::UnknownKind(kind.to_string()));
            }
            let mut entries = vec![2u64; (n - 1) as usize];
            entries.push(3);
            gram_from_chain(&HJChain(entries))
        }
        MilnorKind::YRes { n } => {
            if n < 1 {
                return Err(LensError::UnknownKind(kind.to_string()));
            }
            let (_, chain) = y_family_by_type(n);
            gram_from_chain(&chain)
        }
        MilnorKind::YQGorenstein => {
            return Ok(MilnorLattice {
                gram: None,
                torsion_canonical_two: true,
            });
        }
    };
    Ok(MilnorLattice {
        gram: Some(gram),
        torsion_canonical_two: false,
    })
}

/// The fixed ambient catalogue of Lemmas on topological obstructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientModel {
    /// `C^2`: `H_2 = 0`.
    PlaneC2,
    /// Blow-up of `C^2` at a point: `H_2 = Z e`, `e^2 = -1`.
    BlowupC2,
    /// Blow-up of `C x P^1` at two points: form `diag(0, -1, -1)`.
    BlowupCxP1TwoPoints,
}

impl AmbientModel {
    /// Rank of the definite quotient actually searched. The degenerate
    /// direction of `diag(0,-1,-1)` pairs to zero with everything, so
    /// embeddings are decided in the rank-2 `(-1) + (-1)` quotient.
    pub fn definite_rank(&self) -> usize {
        match self {
            AmbientModel::PlaneC2 => 0,
            AmbientModel::BlowupC2 => 1,
            AmbientModel::BlowupCxP1TwoPoints => 2,
        }
    }

    pub fn degenerate_rank(&self) -> usize {
        match self {
            AmbientModel::BlowupCxP1TwoPoints => 1,
            _ => 0,
        }
    }

    pub fn full_gram(&self) -> Vec<Vec<i64>> {
        match self {
            AmbientModel::PlaneC2 => vec![],
            AmbientModel::BlowupC2 => vec![vec![-1]],
            AmbientModel::BlowupCxP1TwoPoints => {
                vec![vec![0, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]
            }
        }
    }
}

impl std::fmt::Display for AmbientModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AmbientModel::PlaneC2 => write!(f, "C^2"),
            AmbientModel::BlowupC2 => write!(f, "Bl_1 C^2"),
            AmbientModel::BlowupCxP1TwoPoints => write!(f, "Bl_2 (C x P^1)"),
        }
    }
}

/// Outcome of the exhaustive isometric-embedding search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedResult {
    pub embeds: bool,
    /// Image vectors in the full ambient coordinates, when found.
    pub witness: Option<Vec<Vec<i64>>>,
    /// Per-source-vector coordinate bounds of the searched box, when the
    /// search was exhausted.
    pub exhausted_box: Option<Vec<i64>>,
    /// Reason when decided without a search.
    pub obstruction: Option<String>,
}

fn leading_minors_alternate(gram: &[Vec<i64>]) -> bool {
    // negative definite iff (-1)^k det(A_k) > 0 for all k; fraction-free
    // Gaussian elimination in i128.
    let n = gram.len();
    let mut m: Vec<Vec<i128>> = gram
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut prev = 1i128;
    for k in 0..n {
        // Bareiss step determinant of leading k+1 minor ends up in m[k][k]
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        let det_k = m[k][k];
        if det_k == 0 {
            return false;
        }
        // Bareiss keeps m[k][k] equal to det of the leading (k+1)-minor
        let sign_ok = if (k + 1) % 2 == 0 {
            det_k > 0
        } else {
            det_k < 0
        };
        if !sign_ok {
            return false;
        }
        prev = m[k][k];
    }
    true
}

/// All vectors in `Z^m` of given square norm under `-sum c^2`, enumerated
/// coordinate-wise in the value order `0, 1, -1, 2, -2, ...`.
fn vectors_of_norm(m: usize, norm: u64, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; m];
    fn value_order(bound: i64) -> Vec<i64> {
        let mut v = vec![0];
        for x in 1..=bound {
            v.push(x);
            v.push(-x);
        }
        v
    }
    fn rec(cur: &mut Vec<i64>, idx: usize, remaining: i64, order: &[i64], out: &mut Vec<Vec<i64>>) {
        if idx == cur.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for &v in order {
            if v * v <= remaining {
                cur[idx] = v;
                rec(cur, idx + 1, remaining - v * v, order, out);
            }
        }
        cur[idx] = 0;
    }
    rec(&mut cur, 0, norm as i64, &value_order(bound), &mut out);
    out
}

/// Exhaustive search for an isometry of the source Milnor lattice into the
/// ambient model. Sound and complete: for the definite part, coefficients
/// are bounded by the source norms, and the degenerate direction carries
/// no pairing information. Sources flagged with 2-torsion canonical class
/// never embed in these torsion-free ambients.
pub fn embeds(source: &MilnorLattice, ambient: AmbientModel) -> Result<EmbedResult, LensError> {
    if source.torsion_canonical_two {
        return Ok(EmbedResult {
            embeds: false,
            witness: None,
            exhausted_box: None,
            obstruction: Some(
                "canonical class of the fibre is 2-torsion but the ambient H^2 is torsion free"
                    .to_string(),
            ),
        });
    }
    let gram = source.gram.as_ref().ok_or(LensError::NoGram)?;
    let k = gram.len();
    if k == 0 {
        return Ok(EmbedResult {
            embeds: true,
            witness: Some(vec![]),
            exhausted_box: None,
            obstruction: None,
        });
    }
    if !leading_minors_alternate(gram) {
        return Err(LensError::NotNegativeDefinite);
    }
    let m = ambient.definite_rank();
    let bounds: Vec<i64> = gram
        .iter()
        .enumerate()
        .map(|(i, row)| isqrt(-row[i]))
        .collect();
    if bounds.iter().any(|&b| b > 1_000) {
        return Err(LensError::SearchOverflow(format!("bounds {bounds:?}")));
    }
    // rank 0 ambient: only the empty source embeds (handled above)
    if m == 0 {
        return Ok(EmbedResult {
            embeds: false,
            witness: None,
            exhausted_box: Some(vec![0; k]),
            obstruction: Some("no nonzero classes in H_2 of the ambient".to_string()),
        });
    }
    // DFS over source basis vectors; candidates for vector i are the
    // lattice points of norm -gram[i][i] in the definite quotient.
    let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(k);
    fn dfs(gram: &[Vec<i64>], m: usize, bounds: &[i64], chosen: &mut Vec<Vec<i64>>) -> bool {
        let i = chosen.len();
        if i == gram.len() {
            return true;
        }
        for cand in vectors_of_norm(m, (-gram[i][i]) as u64, bounds[i]) {
            let ok = chosen.iter().enumerate().all(|(j, prev)| {
                let dot: i64 = -prev.iter().zip(&cand).map(|(a, b)| a * b).sum::<i64>();
                dot == gram[i][j]
            });
            if ok {
                chosen.push(cand);
                if dfs(gram, m, bounds, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if dfs(gram, m, &bounds, &mut chosen) {
        // lift through the degenerate directions as zero coordinates
        let pad = ambient.degenerate_rank();
        let witness: Vec<Vec<i64>> = chosen
            .iter()
            .map(|v| {
                let mut full = vec![0i64; pad];
                full.extend(v);
                full
            })
            .collect();
        // recompute the Gram matrix in the full ambient and assert
        let amb = ambient.full_gram();
        for (i, vi) in witness.iter().enumerate() {
            for (j, vj) in witness.iter().enumerate() {
                let mut acc = 0i64;
                for (r, x) in vi.iter().enumerate() {
                    for (c, y) in vj.iter().enumerate() {
                        acc += x * amb[r][c] * y;
                    }
                }
                assert_eq!(acc, gram[i][j], "witness fails to reproduce the form");
            }
        }
        return Ok(EmbedResult {
            embeds: true,
            witness: Some(witness),
            exhausted_box: None,
            obstruction: None,
        });
    }
    Ok(EmbedResult {
        embeds: false,
        witness: None,
        exhausted_box: Some(bounds),
        obstruction: None,
    })
}

fn isqrt(x: i64) -> i64 {
    if x <= 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as i64;
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    while r * r > x {
        r -= 1;
    }
    r
}

/// One row of the lemma-verdict report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub source: String,
    pub ambient: AmbientModel,
    pub expected_embeds: bool,
    pub computed_embeds: bool,
    pub agrees: bool,
    pub witness: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub verdicts: Vec<LemmaVerdict>,
    pub all_agree: bool,
}

/// Reproduces the negative embedding verdicts: A/D/E/B fibres never sit in
/// the one-point blow-up of `C^2`; neither smoothing component of the Y
/// family sits in `C^2`; `A_n` fibres with `n >= 2` never sit in the
/// two-point blow-up of `C x P^1`, while `A_1` does.
pub fn lemma_verdicts(max_n: u64) -> Result<LemmaReport, LensError> {
    let mut verdicts = Vec::new();
    let mut push =
        |kind: MilnorKind, ambient: AmbientModel, expected: bool| -> Result<(), LensError> {
            let lat = milnor_lattice(kind)?;
            let res = embeds(&lat, ambient)?;
            verdicts.push(LemmaVerdict {
                source: kind.to_string(),
                ambient,
                expected_embeds: expected,
                computed_embeds: res.embeds,
                agrees: res.embeds == expected,
                witness: res.witness,
            });
            Ok(())
        };
    // blow-up of C^2 at one point
    for n in 1..=max_n {
        push(MilnorKind::A { n }, AmbientModel::BlowupC2, false)?;
        push(MilnorKind::B { n }, AmbientModel::BlowupC2, false)?;
        if n >= 3 {
            push(MilnorKind::D { n }, AmbientModel::BlowupC2, false)?;
        }
        if (6..=8).contains(&n) {
            push(MilnorKind::E { n }, AmbientModel::BlowupC2, false)?;
        }
    }
    // both smoothing components of the Y family vs C^2
    for n in 1..=max_n {
        push(MilnorKind::YRes { n }, AmbientModel::PlaneC2, false)?;
    }
    push(MilnorKind::YQGorenstein, AmbientModel::PlaneC2, false)?;
    // A_n vs the two-point blow-up of C x P^1
    push(
        MilnorKind::A { n: 1 },
        AmbientModel::BlowupCxP1TwoPoints,
        true,
    )?;
    for n in 2..=max_n {
        push(
            MilnorKind::A { n },
            AmbientModel::BlowupCxP1TwoPoints,
            false,
        )?;
    }
    let all_agree = verdicts.iter().all(|v| v.agrees);
    Ok(LemmaReport {
        verdicts,
        all_agree,
    })
}

/// Link report pairing a germ with its lens space and the inverse normal
/// form giving the same link up to isomorphism of germs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkReport {
    pub space: LensSpace,
    pub iso_companion_q: Option<u64>,
}

pub fn link_report(germ: &NormalForm) -> LinkReport {
    let space = link_of(germ);
    let iso_companion_q = match germ {
        NormalForm::Cyclic(s) => Some(s.q_inverse()),
        NormalForm::Smooth => None,
    };
    LinkReport {
        space,
        iso_companion_q,
    }
}

/// Resolution chain of a cyclic germ, for cross-checks.
pub fn resolution_gram(s: &CyclicSing) -> Vec<Vec<i64>> {
    gram_from_chain(&hj(s))
}
