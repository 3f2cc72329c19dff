//! Building data `(L, D)` for flat `(Z/2)^r` covers.
//!
//! A pair of maps `D: G -> Pic(S)`, `L: G^dual -> Pic(S)` satisfies the
//! cover condition when `D_0 = L_0 = 0` and
//! `L_chi + L_eta = L_{chi+eta} + sum_{chi(s)=eta(s)=1} D_s` for all
//! characters. `L` is determined on a chosen dual basis by the equations
//! `2 L_{chi_i} = sum_{chi_i(s)=1} D_s` and extends uniquely; values off
//! the basis are always computed through that closed form, never stored,
//! so groups far beyond enumerable rank stay representable.

use crate::f2::{dual_basis, is_independent, GCharacter, GVector, GroupF2, Subspace};
use crate::lattice::{
    intersect, is_comb_ample, rr_chi, BlownQuadricLattice, DivClass, LatticeError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("branch sum for basis character {basis_index} is not 2-divisible at {odd_coords:?}")]
    Parity {
        basis_index: usize,
        odd_coords: Vec<String>,
    },
    #[error("the chosen vectors do not form a basis of the group")]
    BasisInvalid,
    #[error("class size {0} does not match the lattice ({1} exceptional classes)")]
    LatticeMismatch(usize, usize),
    #[error("rank {rank} exceeds the enumeration cap {cap}; use sampled or bounded mode")]
    RankCap { rank: usize, cap: usize },
    #[error("elementary solutions need a nonzero subspace")]
    ZeroSubspace,
    #[error("lifted branch map does not project onto the original")]
    ProjectionMismatch,
    #[error("invariant routes disagree: {0}")]
    DualPathMismatch(String),
    #[error("extension construction needs dim G >= 4, got {0}")]
    GroupTooSmall(usize),
    #[error("extension construction needs a proper subspace")]
    SubspaceNotProper,
    #[error("the functional must be positive on the seed class")]
    FunctionalNotPositive,
    #[error("no q <= {0} satisfies the bounds")]
    QCapExceeded(u32),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    F2(#[from] crate::f2::F2Error),
}

/// Sparse branch map plus line-bundle data on a dual basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildingData {
    group: GroupF2,
    lattice: BlownQuadricLattice,
    d: BTreeMap<GVector, DivClass>,
    basis: Vec<GVector>,
    dual: Vec<GCharacter>,
    l_basis: Vec<DivClass>,
}

impl BuildingData {
    /// Assembles the data, validating the basis and lattice sizes.
    /// Zero branch classes are dropped; an entry at 0 is rejected by the
    /// `D_0 = 0` convention.
    pub fn assemble(
        group: GroupF2,
        lattice: BlownQuadricLattice,
        d: BTreeMap<GVector, DivClass>,
        basis: Vec<GVector>,
        l_basis: Vec<DivClass>,
    ) -> Result<Self, CoverError> {
        if basis.len() != group.rank()
            || basis.iter().any(|v| v.rank() != group.rank())
            || !is_independent(&basis)
        {
            return Err(CoverError::BasisInvalid);
        }
        if l_basis.len() != basis.len() {
            return Err(CoverError::BasisInvalid);
        }
        let mut clean = BTreeMap::new();
        for (sigma, class) in d {
            if sigma.rank() != group.rank() {
                return Err(CoverError::BasisInvalid);
            }
            if class.n() != lattice.points() {
                return Err(CoverError::LatticeMismatch(class.n(), lattice.points()));
            }
            if sigma.is_zero() || class.is_zero() {
                continue;
            }
            clean.insert(sigma, class);
        }
        for class in &l_basis {
            if class.n() != lattice.points() {
                return Err(CoverError::LatticeMismatch(class.n(), lattice.points()));
            }
        }
        let dual = dual_basis(&basis).map_err(|_| CoverError::BasisInvalid)?;
        Ok(BuildingData {
            group,
            lattice,
            d: clean,
            basis,
            dual,
            l_basis,
        })
    }

    pub fn group(&self) -> GroupF2 {
        self.group
    }

    pub fn lattice(&self) -> BlownQuadricLattice {
        self.lattice
    }

    pub fn branch_map(&self) -> &BTreeMap<GVector, DivClass> {
        &self.d
    }

    pub fn basis(&self) -> &[GVector] {
        &self.basis
    }

    pub fn dual_characters(&self) -> &[GCharacter] {
        &self.dual
    }

    pub fn l_basis(&self) -> &[DivClass] {
        &self.l_basis
    }

    /// `D_sigma`, zero off the stored support.
    pub fn d_of(&self, sigma: &GVector) -> DivClass {
        self.d
            .get(sigma)
            .cloned()
            .unwrap_or_else(|| self.lattice.zero())
    }

    /// Coordinates of `chi` in the stored dual basis: `chi = sum_{j in S} chi_j`
    /// with `j in S` iff `chi(basis_j) = 1`.
    fn dual_support(&self, chi: &GCharacter) -> Vec<usize> {
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, b)| chi.0.dot(&b.0) == 1)
            .map(|(j, _)| j)
            .collect()
    }

    /// `L_chi` through the closed form
    /// `sum_{j in S} L_j - sum_s floor(m_S(s)/2) D_s`, where `m_S(s)` counts
    /// the dual-basis components of `chi` that are nonzero on `s`.
    pub fn l_of(&self, chi: &GCharacter) -> DivClass {
        let support = self.dual_support(chi);
        let mut acc = self.lattice.zero();
        for &j in &support {
            acc = acc.add(&self.l_basis[j]);
        }
        for (sigma, class) in &self.d {
            let m = support
                .iter()
                .filter(|&&j| self.dual[j].0.dot(&sigma.0) == 1)
                .count();
            let f = (m / 2) as i64;
            if f != 0 {
                acc = acc.sub(&class.scale(f));
            }
        }
        acc
    }

    /// Defect of the pair condition:
    /// `L_chi + L_eta - L_{chi+eta} - sum_{chi(s)=eta(s)=1} D_s`.
    pub fn verify_pair(&self, chi: &GCharacter, eta: &GCharacter) -> DivClass {
        let mut defect = self
            .l_of(chi)
            .add(&self.l_of(eta))
            .sub(&self.l_of(&chi.add(eta)));
        for (sigma, class) in &self.d {
            if chi.0.dot(&sigma.0) == 1 && eta.0.dot(&sigma.0) == 1 {
                defect = defect.sub(class);
            }
        }
        defect
    }

    /// Defect of the k-fold identity
    /// `sum L_{chi_j} - L_{sum chi_j} - sum_s floor(sum_j chi_j(s) / 2) D_s`.
    pub fn kfold_defect(&self, chis: &[GCharacter]) -> DivClass {
        let mut acc = self.lattice.zero();
        let mut total = self.group.zero_character();
        for chi in chis {
            acc = acc.add(&self.l_of(chi));
            total = total.add(chi);
        }
        acc = acc.sub(&self.l_of(&total));
        for (sigma, class) in &self.d {
            let m = chis.iter().filter(|chi| chi.0.dot(&sigma.0) == 1).count();
            let f = (m / 2) as i64;
            if f != 0 {
                acc = acc.sub(&class.scale(f));
            }
        }
        acc
    }

    /// Residual of the `i`-th basis equation,
    /// `2 L_{chi_i} - sum_{chi_i(s)=1} D_s`; zero for valid data.
    pub fn basis_residual(&self, i: usize) -> DivClass {
        let mut acc = self.l_basis[i].scale(2);
        for (sigma, class) in &self.d {
            if self.dual[i].0.dot(&sigma.0) == 1 {
                acc = acc.sub(class);
            }
        }
        acc
    }

    /// Pointwise sum; the set of valid pairs over a fixed group and basis
    /// is closed under this.
    pub fn add(&self, other: &BuildingData) -> Result<BuildingData, CoverError> {
        if self.group != other.group || self.basis != other.basis {
            return Err(CoverError::BasisInvalid);
        }
        if self.lattice != other.lattice {
            return Err(CoverError::LatticeMismatch(
                self.lattice.points(),
                other.lattice.points(),
            ));
        }
        let mut d = self.d.clone();
        for (sigma, class) in &other.d {
            let entry = d
                .entry(sigma.clone())
                .or_insert_with(|| self.lattice.zero());
            *entry = entry.add(class);
        }
        d.retain(|_, c| !c.is_zero());
        let l_basis = self
            .l_basis
            .iter()
            .zip(&other.l_basis)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(BuildingData {
            group: self.group,
            lattice: self.lattice,
            d,
            basis: self.basis.clone(),
            dual: self.dual.clone(),
            l_basis,
        })
    }
}

/// Solves `2 L_{chi_i} = sum_{chi_i(s)=1} D_s` for each basis character;
/// the failure report names the first offending character and its odd
/// coordinates.
pub fn solve_basis_l(
    group: GroupF2,
    lattice: BlownQuadricLattice,
    d: &BTreeMap<GVector, DivClass>,
    basis: &[GVector],
) -> Result<Vec<DivClass>, CoverError> {
    if basis.len() != group.rank() || !is_independent(basis) {
        return Err(CoverError::BasisInvalid);
    }
    let dual = dual_basis(basis).map_err(|_| CoverError::BasisInvalid)?;
    let mut out = Vec::with_capacity(basis.len());
    for (i, chi) in dual.iter().enumerate() {
        let mut sum = lattice.zero();
        for (sigma, class) in d {
            if sigma.is_zero() {
                continue;
            }
            if chi.0.dot(&sigma.0) == 1 {
                sum = sum.add(class);
            }
        }
        match sum.halve() {
            Ok(half) => out.push(half),
            Err(LatticeError::NotHalvable(odd_coords)) => {
                return Err(CoverError::Parity {
                    basis_index: i,
                    odd_coords,
                })
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Convenience: branch map in, fully solved data out.
pub fn data_from_branch_map(
    group: GroupF2,
    lattice: BlownQuadricLattice,
    d: BTreeMap<GVector, DivClass>,
    basis: Vec<GVector>,
) -> Result<BuildingData, CoverError> {
    let l_basis = solve_basis_l(group, lattice, &d, &basis)?;
    BuildingData::assemble(group, lattice, d, basis, l_basis)
}

/// Verification strategy for the pair conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// Every unordered character pair; requires `2^r` within the cap.
    Exhaustive,
    /// All basis pairs plus a seeded random sample.
    Sampled { samples: u32, seed: u64 },
    /// Per-coordinate residuals of the basis equations; a pass implies all
    /// pairs pass because the extension off the basis is unique.
    Bounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFailure {
    pub chi: GCharacter,
    pub eta: GCharacter,
    pub defect: DivClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverReport {
    pub schema_version: u32,
    pub mode: VerifyMode,
    pub verified_pairs: u64,
    pub failures: Vec<PairFailure>,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the cover condition in the selected mode. Failures are reported
/// in lexicographic order regardless of schedule.
pub fn verify_all(
    data: &BuildingData,
    mode: VerifyMode,
    rank_cap: usize,
) -> Result<CoverReport, CoverError> {
    let r = data.group.rank();
    let mut failures = Vec::new();
    let mut verified = 0u64;
    match mode {
        VerifyMode::Exhaustive => {
            if r > rank_cap {
                return Err(CoverError::RankCap {
                    rank: r,
                    cap: rank_cap,
                });
            }
            let chars: Vec<GCharacter> = data
                .group
                .characters(rank_cap)
                .map_err(|_| CoverError::RankCap {
                    rank: r,
                    cap: rank_cap,
                })?
                .collect();
            // L-table once, pairs after
            let ltab: Vec<DivClass> = chars.iter().map(|c| data.l_of(c)).collect();
            let row = |i: usize| -> Vec<PairFailure> {
                let chi = &chars[i];
                let mut out = Vec::new();
                for (j, eta) in chars.iter().enumerate().skip(i) {
                    let sum_idx = chi.add(eta).0.lex_index() as usize;
                    let mut defect = ltab[i].add(&ltab[j]).sub(&ltab[sum_idx]);
                    for (sigma, class) in &data.d {
                        if chi.0.dot(&sigma.0) == 1 && eta.0.dot(&sigma.0) == 1 {
                            defect = defect.sub(class);
                        }
                    }
                    if !defect.is_zero() {
                        out.push(PairFailure {
                            chi: chi.clone(),
                            eta: eta.clone(),
                            defect,
                        });
                    }
                }
                out
            };
            failures = if crate::parallel_enabled() {
                use rayon::prelude::*;
                (0..chars.len()).into_par_iter().flat_map(row).collect()
            } else {
                (0..chars.len()).flat_map(row).collect()
            };
            let c = chars.len() as u64;
            verified = c * (c + 1) / 2;
        }
        VerifyMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let check = |chi: &GCharacter, eta: &GCharacter, failures: &mut Vec<PairFailure>| {
                let defect = data.verify_pair(chi, eta);
                if !defect.is_zero() {
                    failures.push(PairFailure {
                        chi: chi.clone(),
                        eta: eta.clone(),
                        defect,
                    });
                }
            };
            for i in 0..r {
                for j in i..r {
                    check(&data.dual[i].clone(), &data.dual[j].clone(), &mut failures);
                    verified += 1;
                }
            }
            for _ in 0..samples {
                let mut chi = data.group.zero_character();
                let mut eta = data.group.zero_character();
                for j in 0..r {
                    if rng.gen::<bool>() {
                        chi.0.set(j, true);
                    }
                    if rng.gen::<bool>() {
                        eta.0.set(j, true);
                    }
                }
                check(&chi, &eta, &mut failures);
                verified += 1;
            }
        }
        VerifyMode::Bounded => {
            // Exact per-coordinate residuals of the r basis equations.
            for i in 0..r {
                let residual = data.basis_residual(i);
                verified += 1;
                if !residual.is_zero() {
                    failures.push(PairFailure {
                        chi: data.dual[i].clone(),
                        eta: data.dual[i].clone(),
                        defect: residual,
                    });
                }
            }
        }
    }
    failures.sort_by(|a, b| (&a.chi, &a.eta).cmp(&(&b.chi, &b.eta)));
    Ok(CoverReport {
        schema_version: 1,
        mode,
        verified_pairs: verified,
        failures,
    })
}

/// The elementary solution attached to a nonzero subspace `H` and a class
/// `v`: branch classes on `H - 0` (doubled when `dim H = 1`), line-bundle
/// classes supported off the annihilator of `H` (scaled by `2^{dim H - 2}`
/// when `dim H >= 2`).
pub fn elementary_solution(
    group: GroupF2,
    lattice: BlownQuadricLattice,
    h: &Subspace,
    v: &DivClass,
) -> Result<BuildingData, CoverError> {
    if h.dim() == 0 {
        return Err(CoverError::ZeroSubspace);
    }
    if v.n() != lattice.points() {
        return Err(CoverError::LatticeMismatch(v.n(), lattice.points()));
    }
    let (d_value, l_value) = if h.dim() == 1 {
        (v.scale(2), v.clone())
    } else {
        (v.clone(), v.scale(1i64 << (h.dim() - 2)))
    };
    let mut d = BTreeMap::new();
    for sigma in h.elements() {
        if !sigma.is_zero() {
            d.insert(sigma, d_value.clone());
        }
    }
    let basis = group.standard_basis();
    let l_basis = basis
        .iter()
        .map(|b| {
            // standard dual character of b is b's own bit pattern
            let chi = GCharacter(b.0.clone());
            if h.annihilates(&chi) {
                lattice.zero()
            } else {
                l_value.clone()
            }
        })
        .collect();
    BuildingData::assemble(group, lattice, d, basis, l_basis)
}

/// Ramification combinatorics of the branch set `I = supp D`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RamificationProfile {
    pub branch_set: Vec<GVector>,
    pub totally_ramified: bool,
    pub simple: bool,
    /// Documentation flags: geometric smoothness/Gorenstein statements
    /// that are not decidable from lattice data alone.
    pub notes: Vec<String>,
}

pub fn ramification_profile(data: &BuildingData) -> RamificationProfile {
    let branch_set: Vec<GVector> = data.d.keys().cloned().collect();
    let r = data.group.rank();
    let span = Subspace::span(r, &branch_set).expect("branch set lives in G");
    let totally_ramified = span.dim() == r;
    let simple = branch_set.len() == r && is_independent(&branch_set);
    let mut notes = vec![
        "flat covers over a smooth base are Gorenstein iff locally simple iff locally complete intersections".to_string(),
    ];
    if simple {
        notes.push("a simple branch set forces local simplicity everywhere".to_string());
    }
    notes.push(
        "smoothness of the total space additionally needs smooth transverse branch divisors; that is geometric data, not lattice data".to_string(),
    );
    RamificationProfile {
        branch_set,
        totally_ramified,
        simple,
        notes,
    }
}

/// Numeric invariants of the covering surface, each computed along two
/// independent routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    pub k2: i128,
    pub chi: i128,
}

/// `K^2 = g (K_Y + sum D / 2)^2` and
/// `chi = g + (1/2) sum_{chi != 0} L_chi.(L_chi + K_Y)`, with `g = 2^r`.
/// The cross-check recomputes `K^2` by expanding the pullback of
/// `K_X = pi^* K_Y + sum R_s` with the push-pull rules
/// (`pi^*A.pi^*B = g A.B`, `R_s.pi^*A = g D_s.A / 2`,
/// `R_s.R_t = g D_s.D_t / 4`) and `chi` as `sum_chi chi(O(-L_chi))`.
pub fn invariants(data: &BuildingData, rank_cap: usize) -> Result<Invariants, CoverError> {
    let r = data.group.rank();
    let g: i128 = 1i128 << r;
    let k = data.lattice.canonical_class();

    // route 1 for K^2: half-class square, doubled coordinates
    let mut sum_d = data.lattice.zero();
    for class in data.d.values() {
        sum_d = sum_d.add(class);
    }
    let twice = k.scale(2).add(&sum_d);
    let num = g
        .checked_mul(intersect(&twice, &twice)?)
        .expect("invariant arithmetic exceeds 128 bits");
    if num % 4 != 0 {
        return Err(CoverError::DualPathMismatch(format!(
            "K^2 numerator {num} not divisible by 4"
        )));
    }
    let k2 = num / 4;

    // route 2 for K^2: push-pull expansion with the pairwise branch sum
    let mut pairwise = 0i128;
    for a in data.d.values() {
        for b in data.d.values() {
            pairwise += intersect(a, b)?;
        }
    }
    let num2 = g
        .checked_mul(4 * intersect(&k, &k)? + 4 * intersect(&sum_d, &k)? + pairwise)
        .expect("invariant arithmetic exceeds 128 bits");
    if num2 % 4 != 0 {
        return Err(CoverError::DualPathMismatch(format!(
            "push-pull K^2 numerator {num2} not divisible by 4"
        )));
    }
    let k2_alt = num2 / 4;
    if k2 != k2_alt {
        return Err(CoverError::DualPathMismatch(format!(
            "K^2 routes disagree: {k2} vs {k2_alt}"
        )));
    }

    // chi route 1: the character sum of L.(L+K)
    let chars: Vec<GCharacter> = data
        .group
        .characters(rank_cap)
        .map_err(|_| CoverError::RankCap {
            rank: r,
            cap: rank_cap,
        })?
        .collect();
    let mut t = 0i128;
    for chi in &chars {
        if chi.is_zero() {
            continue;
        }
        let l = data.l_of(chi);
        t = t
            .checked_add(intersect(&l, &l.add(&k))?)
            .expect("invariant arithmetic exceeds 128 bits");
    }
    if t % 2 != 0 {
        return Err(CoverError::DualPathMismatch(format!(
            "chi numerator {t} is odd"
        )));
    }
    let chi_val = g + t / 2;

    // chi route 2: Riemann-Roch on each inverse line bundle
    let mut chi_alt = 0i128;
    for chi in &chars {
        let l = data.l_of(chi);
        chi_alt += rr_chi(&data.lattice, &l.neg())?;
    }
    if chi_val != chi_alt {
        return Err(CoverError::DualPathMismatch(format!(
            "chi routes disagree: {chi_val} vs {chi_alt}"
        )));
    }

    Ok(Invariants { k2, chi: chi_val })
}

/// One obligation of the sufficient-condition check: a class that must be
/// combinatorially ample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Obligation {
    pub chi: GCharacter,
    pub sigma: Option<GVector>,
    pub class: DivClass,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaloisCompletenessReport {
    pub schema_version: u32,
    pub mode: VerifyMode,
    /// `L_chi` combinatorially ample for all `chi != 0` (gives
    /// `Ext^1(Omega^1, L^{-1}) = H^1(L^{-1}) = 0`).
    pub bundle_obligations_ok: bool,
    /// `L_chi - D_sigma` combinatorially ample for `chi != 0`,
    /// `sigma in chi^perp` with `D_sigma != 0` (gives `H^0(D_s - L_chi) = 0`:
    /// the negative of an ample class has no sections).
    pub branch_obligations_ok: bool,
    pub failures: Vec<Obligation>,
    pub checked: u64,
}

impl GaloisCompletenessReport {
    pub fn passed(&self) -> bool {
        self.bundle_obligations_ok && self.branch_obligations_ok
    }
}

/// Sufficient-condition check for the unobstructed-Galois-deformation
/// statement, via combinatorial ampleness.
pub fn check_galois_completeness(
    data: &BuildingData,
    mode: VerifyMode,
    rank_cap: usize,
) -> Result<GaloisCompletenessReport, CoverError> {
    let r = data.group.rank();
    let mut failures: Vec<Obligation> = Vec::new();
    let mut checked = 0u64;
    let mut ii_ok = true;
    let mut iii_ok = true;

    let handle_char = |chi: &GCharacter,
                       failures: &mut Vec<Obligation>,
                       checked: &mut u64,
                       ii_ok: &mut bool,
                       iii_ok: &mut bool| {
        if chi.is_zero() {
            return;
        }
        let l = data.l_of(chi);
        *checked += 1;
        if !is_comb_ample(&l) {
            *ii_ok = false;
            failures.push(Obligation {
                chi: chi.clone(),
                sigma: None,
                class: l.clone(),
                ok: false,
            });
        }
        for (sigma, class) in &data.d {
            if chi.0.dot(&sigma.0) == 0 {
                let c = l.sub(class);
                *checked += 1;
                if !is_comb_ample(&c) {
                    *iii_ok = false;
                    failures.push(Obligation {
                        chi: chi.clone(),
                        sigma: Some(sigma.clone()),
                        class: c,
                        ok: false,
                    });
                }
            }
        }
    };

    match mode {
        VerifyMode::Exhaustive => {
            let chars = data
                .group
                .characters(rank_cap)
                .map_err(|_| CoverError::RankCap {
                    rank: r,
                    cap: rank_cap,
                })?;
            for chi in chars {
                handle_char(&chi, &mut failures, &mut checked, &mut ii_ok, &mut iii_ok);
            }
        }
        VerifyMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for chi in data.dual.clone() {
                handle_char(&chi, &mut failures, &mut checked, &mut ii_ok, &mut iii_ok);
            }
            for _ in 0..samples {
                let mut chi = data.group.zero_character();
                for j in 0..r {
                    if rng.gen::<bool>() {
                        chi.0.set(j, true);
                    }
                }
                handle_char(&chi, &mut failures, &mut checked, &mut ii_ok, &mut iii_ok);
            }
        }
        VerifyMode::Bounded => {
            // Sound per-coordinate interval bounds over the whole character
            // family: a pass implies every obligation passes; a failure here
            // is inconclusive and reported as a bound failure on the worst
            // corner, tagged with the zero character.
            let (ok_ii, ok_iii) = bounded_completeness(data);
            ii_ok = ok_ii;
            iii_ok = ok_iii;
            checked = 1 + data.d.len() as u64;
            if !ii_ok || !iii_ok {
                failures.push(Obligation {
                    chi: data.group.zero_character(),
                    sigma: None,
                    class: data.lattice.zero(),
                    ok: false,
                });
            }
        }
    }
    failures.sort_by(|a, b| (&a.chi, &a.sigma).cmp(&(&b.chi, &b.sigma)));
    Ok(GaloisCompletenessReport {
        schema_version: 1,
        mode,
        bundle_obligations_ok: ii_ok,
        branch_obligations_ok: iii_ok,
        failures,
        checked,
    })
}

/// Per-coordinate lower bounds of `L_chi` over all characters: the closed
/// form is a signed sum of basis values minus floor-weighted branch
/// classes, so coordinatewise minima over all dual supports are sound.
fn bounded_completeness(data: &BuildingData) -> (bool, bool) {
    let r = data.group.rank();
    let n = data.lattice.points();
    let coords = n + 2;
    let coord = |c: &DivClass, i: usize| -> i128 {
        match i {
            0 => c.r as i128,
            1 => c.s as i128,
            _ => c.a[i - 2] as i128,
        }
    };
    // min and max of L over all chi, coordinatewise
    let mut lmin = vec![0i128; coords];
    let mut lmax = vec![0i128; coords];
    for i in 0..coords {
        for lb in &data.l_basis {
            let v = coord(lb, i);
            if v > 0 {
                lmax[i] += v;
            } else {
                lmin[i] += v;
            }
        }
        let ub = (r / 2) as i128;
        for class in data.d.values() {
            let v = coord(class, i);
            if v > 0 {
                lmin[i] -= ub * v;
            } else {
                lmax[i] -= ub * v;
            }
        }
    }
    // condition ii: every a-coordinate min >= 2 and
    // min(r), min(s) > max over chi of sum(a_i + 1)
    let sum_a_max: i128 = (2..coords).map(|i| lmax[i] + 1).sum();
    let ii = (2..coords).all(|i| lmin[i] >= 2) && lmin[0] > sum_a_max && lmin[1] > sum_a_max;
    // condition iii: same for L - D over every branch class
    let mut iii = true;
    for class in data.d.values() {
        let da: Vec<i128> = (0..coords).map(|i| coord(class, i)).collect();
        let sum_a_max_d: i128 = (2..coords).map(|i| lmax[i] - da[i] + 1).sum();
        let ok = (2..coords).all(|i| lmin[i] - da[i] >= 2)
            && lmin[0] - da[0] > sum_a_max_d
            && lmin[1] - da[1] > sum_a_max_d;
        if !ok {
            iii = false;
        }
    }
    (ii, iii)
}

/// Lifts the data along the projection that forgets `m` appended
/// exceptional coordinates: the lifted branch map is given, the lifted
/// line-bundle data is the unique solution of the basis equations in the
/// enlarged lattice.
pub fn lift(
    data: &BuildingData,
    m: usize,
    d_lift: BTreeMap<GVector, DivClass>,
) -> Result<BuildingData, CoverError> {
    let big = BlownQuadricLattice::new(data.lattice.points() + m);
    // the lift must project onto the original branch map
    let mut projected: BTreeMap<GVector, DivClass> = BTreeMap::new();
    for (sigma, class) in &d_lift {
        if class.n() != big.points() {
            return Err(CoverError::LatticeMismatch(class.n(), big.points()));
        }
        let p = class.projected(m);
        if !p.is_zero() {
            projected.insert(sigma.clone(), p);
        }
    }
    if projected != data.d {
        return Err(CoverError::ProjectionMismatch);
    }
    let lifted = data_from_branch_map(data.group, big, d_lift, data.basis.clone())?;
    // the projection of the solved values recovers the originals
    for (a, b) in lifted.l_basis.iter().zip(&data.l_basis) {
        debug_assert_eq!(&a.projected(m), b);
    }
    Ok(lifted)
}

/// Integral linear functional on the lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Functional {
    pub wr: i64,
    pub ws: i64,
    pub wa: Vec<i64>,
}

impl Functional {
    pub fn eval(&self, c: &DivClass) -> i128 {
        let mut acc = self.wr as i128 * c.r as i128 + self.ws as i128 * c.s as i128;
        for (w, a) in self.wa.iter().zip(&c.a) {
            acc += *w as i128 * *a as i128;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.wr == 0 && self.ws == 0 && self.wa.iter().all(|&w| w == 0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmpleExtension {
    pub q: u32,
    pub min_l_margin: i128,
    pub min_d_margin: i128,
}

/// Extends a branch map on a proper subspace `H` to all of `G` so that the
/// functional is at least `N` on every `L_chi - D_sigma` and on every
/// `D_sigma` off `H`. The output is the sum over `tau in G` of elementary
/// pieces: for `tau in H - 0` the dim-2 solution on `span{tau, eta}` with
/// value `D_tau`, for `tau` off `H` the dim-1 solution with value `q v`;
/// `q` is found by upward search.
#[allow(clippy::too_many_arguments)]
pub fn ample_extension(
    group: GroupF2,
    lattice: BlownQuadricLattice,
    h: &Subspace,
    d_on_h: &BTreeMap<GVector, DivClass>,
    eta: &GVector,
    v: &DivClass,
    alpha: &Functional,
    n_bound: i128,
    q_cap: u32,
    rank_cap: usize,
) -> Result<(BuildingData, AmpleExtension), CoverError> {
    let r = group.rank();
    if r < 4 {
        return Err(CoverError::GroupTooSmall(r));
    }
    if !h.is_proper() || h.contains(eta) {
        return Err(CoverError::SubspaceNotProper);
    }
    if alpha.is_zero() || alpha.eval(v) <= 0 {
        return Err(CoverError::FunctionalNotPositive);
    }
    if eta.rank() != r || v.n() != lattice.points() || alpha.wa.len() != lattice.points() {
        return Err(CoverError::LatticeMismatch(v.n(), lattice.points()));
    }
    for (sigma, class) in d_on_h {
        if sigma.is_zero() && !class.is_zero() {
            return Err(CoverError::BasisInvalid);
        }
        if !h.contains(sigma) {
            return Err(CoverError::SubspaceNotProper);
        }
    }

    // the tau-in-H pieces do not depend on q; build them once
    let mut fixed: Option<BuildingData> = None;
    for (tau, class) in d_on_h {
        if tau.is_zero() || class.is_zero() {
            continue;
        }
        let span = Subspace::span(r, &[tau.clone(), eta.clone()]).expect("rank checked");
        debug_assert_eq!(span.dim(), 2);
        let piece = elementary_solution(group, lattice, &span, class)?;
        fixed = Some(match fixed {
            None => piece,
            Some(acc) => acc.add(&piece)?,
        });
    }

    let complement = h.complement_elements(rank_cap)?;
    for q in 1..=q_cap {
        let mut acc = fixed.clone();
        let qv = v.scale(q as i64);
        for tau in &complement {
            let line = Subspace::span(r, std::slice::from_ref(tau)).expect("rank checked");
            let piece = elementary_solution(group, lattice, &line, &qv)?;
            acc = Some(match acc {
                None => piece,
                Some(a) => a.add(&piece)?,
            });
        }
        let data = acc.expect("complement of a proper subspace is nonempty");
        // evaluate the two families of bounds
        let max_d = data
            .branch_map()
            .values()
            .map(|c| alpha.eval(c))
            .max()
            .unwrap_or(0)
            .max(0);
        let min_l = data
            .group()
            .characters(rank_cap)
            .map_err(|_| CoverError::RankCap {
                rank: r,
                cap: rank_cap,
            })?
            .filter(|chi| !chi.is_zero())
            .map(|chi| alpha.eval(&data.l_of(&chi)))
            .min()
            .expect("r >= 4 has nonzero characters");
        let min_d_off_h = complement
            .iter()
            .map(|sigma| alpha.eval(&data.d_of(sigma)))
            .min()
            .expect("nonempty");
        let l_margin = min_l - max_d;
        if l_margin >= n_bound && min_d_off_h >= n_bound {
            let ext = AmpleExtension {
                q,
                min_l_margin: l_margin,
                min_d_margin: min_d_off_h,
            };
            return Ok((data, ext));
        }
    }
    Err(CoverError::QCapExceeded(q_cap))
}

/// Serialized form of [`BuildingData`]; branch entries are sorted
/// lexicographically by group element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildingDataJson {
    pub schema_version: u32,
    pub group_rank: usize,
    pub lattice_points: usize,
    pub basis: Vec<GVector>,
    pub d: Vec<BranchEntry>,
    pub l_basis: Vec<LBasisEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchEntry {
    pub sigma: GVector,
    pub class: DivClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LBasisEntry {
    pub chi: GCharacter,
    pub class: DivClass,
}

impl From<&BuildingData> for BuildingDataJson {
    fn from(data: &BuildingData) -> Self {
        BuildingDataJson {
            schema_version: 1,
            group_rank: data.group.rank(),
            lattice_points: data.lattice.points(),
            basis: data.basis.clone(),
            d: data
                .d
                .iter()
                .map(|(sigma, class)| BranchEntry {
                    sigma: sigma.clone(),
                    class: class.clone(),
                })
                .collect(),
            l_basis: data
                .dual
                .iter()
                .zip(&data.l_basis)
                .map(|(chi, class)| LBasisEntry {
                    chi: chi.clone(),
                    class: class.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<BuildingDataJson> for BuildingData {
    type Error = CoverError;
    fn try_from(json: BuildingDataJson) -> Result<Self, CoverError> {
        let group = GroupF2::new(json.group_rank);
        let lattice = BlownQuadricLattice::new(json.lattice_points);
        let d = json
            .d
            .into_iter()
            .map(|e| (e.sigma, e.class))
            .collect::<BTreeMap<_, _>>();
        let data = BuildingData::assemble(
            group,
            lattice,
            d,
            json.basis,
            json.l_basis.into_iter().map(|e| e.class).collect(),
        )?;
        Ok(data)
    }
}
