//! Linear algebra over the two-element field.
//!
//! The group `G = (Z/2)^r` is treated throughout as an `r`-dimensional
//! vector space over F2. Group elements and characters share the same bit
//! representation; the pairing `chi(sigma)` is the parity of the bitwise
//! AND. Enumeration of all `2^r` elements is lexicographic on the bit
//! sequence (bit 0 is the most significant position) and is guarded by a
//! configurable rank cap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default guard for exhaustive enumeration of `2^r` elements.
pub const DEFAULT_RANK_CAP: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum F2Error {
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("the given vectors do not form a basis of (Z/2)^{rank}")]
    NotABasis { rank: usize },
    #[error("rank {rank} exceeds the enumeration cap {cap}")]
    RankCapExceeded { rank: usize, cap: usize },
}

/// The group `(Z/2)^r`, identified by its rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupF2 {
    rank: usize,
}

/// Packed bit sequence of fixed length. Backs both [`GVector`] and
/// [`GCharacter`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

/// Lexicographic order on the bit sequence, bit 0 most significant; this
/// matches the enumeration order of [`GroupF2::elements`].
impl Ord for Bits {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            let ord = a.reverse_bits().cmp(&b.reverse_bits());
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Bits {
    pub fn zero(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut b = Bits::zero(bits.len());
        for (j, &v) in bits.iter().enumerate() {
            if v != 0 {
                b.set(j, true);
            }
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, j: usize, v: bool) {
        debug_assert!(j < self.len);
        if v {
            self.words[j / 64] |= 1 << (j % 64);
        } else {
            self.words[j / 64] &= !(1 << (j % 64));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &Bits) -> u8 {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        (acc & 1) as u8
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        for (w, word) in self.words.iter().enumerate() {
            if *word != 0 {
                return Some(w * 64 + word.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&j| self.get(j))
    }

    pub fn to_u8s(&self) -> Vec<u8> {
        (0..self.len).map(|j| self.get(j) as u8).collect()
    }

    /// Element at position `index` in the lexicographic order on bit
    /// sequences (bit 0 most significant).
    pub fn from_lex_index(len: usize, index: u64) -> Self {
        let mut b = Bits::zero(len);
        for j in 0..len {
            if (index >> (len - 1 - j)) & 1 == 1 {
                b.set(j, true);
            }
        }
        b
    }

    pub fn lex_index(&self) -> u64 {
        debug_assert!(self.len <= 64);
        let mut idx = 0u64;
        for j in 0..self.len {
            idx = (idx << 1) | self.get(j) as u64;
        }
        idx
    }
}

impl Serialize for Bits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_u8s().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<u8>::deserialize(d)?;
        Ok(Bits::from_bits(&v))
    }
}

/// An element `sigma` of `G = (Z/2)^r`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GVector(pub Bits);

/// A character `chi` in the dual of `G`, acting by `(-1)^{chi(sigma)}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GCharacter(pub Bits);

macro_rules! bits_newtype {
    ($t:ident) => {
        impl $t {
            pub fn zero(rank: usize) -> Self {
                $t(Bits::zero(rank))
            }
            pub fn from_bits(bits: &[u8]) -> Self {
                $t(Bits::from_bits(bits))
            }
            pub fn rank(&self) -> usize {
                self.0.len()
            }
            pub fn is_zero(&self) -> bool {
                self.0.is_zero()
            }
            pub fn bit(&self, j: usize) -> bool {
                self.0.get(j)
            }
            pub fn with_bit(mut self, j: usize) -> Self {
                self.0.set(j, true);
                self
            }
            pub fn add(&self, other: &Self) -> Self {
                $t(self.0.xor(&other.0))
            }
        }
    };
}

bits_newtype!(GVector);
bits_newtype!(GCharacter);

impl GroupF2 {
    pub fn new(rank: usize) -> Self {
        GroupF2 { rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> u64 {
        1u64 << self.rank
    }

    pub fn zero_vector(&self) -> GVector {
        GVector::zero(self.rank)
    }

    pub fn zero_character(&self) -> GCharacter {
        GCharacter::zero(self.rank)
    }

    pub fn standard_basis(&self) -> Vec<GVector> {
        (0..self.rank)
            .map(|j| GVector::zero(self.rank).with_bit(j))
            .collect()
    }

    /// All `2^r` elements in lexicographic bit order, or an error above the
    /// cap.
    pub fn elements(&self, rank_cap: usize) -> Result<impl Iterator<Item = GVector>, F2Error> {
        self.check_cap(rank_cap)?;
        let rank = self.rank;
        Ok((0..self.order()).map(move |i| GVector(Bits::from_lex_index(rank, i))))
    }

    /// All `2^r` characters in lexicographic bit order.
    pub fn characters(&self, rank_cap: usize) -> Result<impl Iterator<Item = GCharacter>, F2Error> {
        self.check_cap(rank_cap)?;
        let rank = self.rank;
        Ok((0..self.order()).map(move |i| GCharacter(Bits::from_lex_index(rank, i))))
    }

    fn check_cap(&self, rank_cap: usize) -> Result<(), F2Error> {
        if self.rank > rank_cap {
            return Err(F2Error::RankCapExceeded {
                rank: self.rank,
                cap: rank_cap,
            });
        }
        Ok(())
    }
}

/// The pairing `chi(sigma)` in F2.
pub fn pairing(chi: &GCharacter, sigma: &GVector) -> Result<u8, F2Error> {
    if chi.rank() != sigma.rank() {
        return Err(F2Error::RankMismatch {
            expected: chi.rank(),
            got: sigma.rank(),
        });
    }
    Ok(chi.0.dot(&sigma.0))
}

/// Row echelon form over F2. Returns the echelon rows (nonzero, with
/// strictly increasing pivot positions) of the span of the input.
fn echelonize(vs: &[Bits]) -> Vec<Bits> {
    let mut rows: Vec<Bits> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for row in &rows {
            let p = row.first_one().expect("echelon rows are nonzero");
            if w.get(p) {
                w.xor_assign(row);
            }
        }
        if !w.is_zero() {
            rows.push(w);
            rows.sort_by_key(|r| r.first_one());
        }
    }
    // Back-substitute to reduced form.
    let pivots: Vec<usize> = rows.iter().map(|r| r.first_one().unwrap()).collect();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if rows[i].get(pivots[j]) {
                let rj = rows[j].clone();
                rows[i].xor_assign(&rj);
            }
        }
    }
    rows
}

/// True iff the vectors are linearly independent over F2.
pub fn is_independent(vs: &[GVector]) -> bool {
    let bits: Vec<Bits> = vs.iter().map(|v| v.0.clone()).collect();
    echelonize(&bits).len() == vs.len()
}

/// The dual basis: characters with `chi_i(v_j) = delta_ij`.
///
/// Solves `B X^T = I` over F2 by Gauss-Jordan on the augmented matrix,
/// where the rows of `B` are the given basis vectors.
pub fn dual_basis(basis: &[GVector]) -> Result<Vec<GCharacter>, F2Error> {
    let r = match basis.first() {
        Some(v) => v.rank(),
        None => return Ok(Vec::new()),
    };
    if basis.len() != r || basis.iter().any(|v| v.rank() != r) {
        return Err(F2Error::NotABasis { rank: r });
    }
    let mut rows: Vec<Bits> = basis.iter().map(|v| v.0.clone()).collect();
    let mut inv: Vec<Bits> = (0..r).map(|i| Bits::zero(r).tap_set(i)).collect();
    for col in 0..r {
        let pivot = (col..r).find(|&i| rows[i].get(col));
        let Some(pivot) = pivot else {
            return Err(F2Error::NotABasis { rank: r });
        };
        rows.swap(col, pivot);
        inv.swap(col, pivot);
        for i in 0..r {
            if i != col && rows[i].get(col) {
                let (rc, ic) = (rows[col].clone(), inv[col].clone());
                rows[i].xor_assign(&rc);
                inv[i].xor_assign(&ic);
            }
        }
    }
    // inv is now B^{-1}; chi_i is its i-th column.
    let mut duals = Vec::with_capacity(r);
    for i in 0..r {
        let mut chi = Bits::zero(r);
        for (j, row) in inv.iter().enumerate() {
            if row.get(i) {
                chi.set(j, true);
            }
        }
        duals.push(GCharacter(chi));
    }
    Ok(duals)
}

trait TapSet {
    fn tap_set(self, j: usize) -> Self;
}
impl TapSet for Bits {
    fn tap_set(mut self, j: usize) -> Self {
        self.set(j, true);
        self
    }
}

/// A subspace `H` of `(Z/2)^r`, stored by a reduced echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient_rank: usize,
    echelon: Vec<Bits>,
}

impl Subspace {
    pub fn span(ambient_rank: usize, vs: &[GVector]) -> Result<Self, F2Error> {
        for v in vs {
            if v.rank() != ambient_rank {
                return Err(F2Error::RankMismatch {
                    expected: ambient_rank,
                    got: v.rank(),
                });
            }
        }
        let bits: Vec<Bits> = vs.iter().map(|v| v.0.clone()).collect();
        Ok(Subspace {
            ambient_rank,
            echelon: echelonize(&bits),
        })
    }

    pub fn zero(ambient_rank: usize) -> Self {
        Subspace {
            ambient_rank,
            echelon: Vec::new(),
        }
    }

    pub fn full(ambient_rank: usize) -> Self {
        let g = GroupF2::new(ambient_rank);
        Subspace::span(ambient_rank, &g.standard_basis()).expect("standard basis spans")
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn dim(&self) -> usize {
        self.echelon.len()
    }

    pub fn basis(&self) -> Vec<GVector> {
        self.echelon.iter().map(|b| GVector(b.clone())).collect()
    }

    pub fn is_proper(&self) -> bool {
        self.dim() < self.ambient_rank
    }

    pub fn contains(&self, v: &GVector) -> bool {
        let mut w = v.0.clone();
        for row in &self.echelon {
            let p = row.first_one().unwrap();
            if w.get(p) {
                w.xor_assign(row);
            }
        }
        w.is_zero()
    }

    /// True iff `chi` vanishes on all of `H`, i.e. `chi` lies in the
    /// annihilator `H^perp`.
    pub fn annihilates(&self, chi: &GCharacter) -> bool {
        self.echelon.iter().all(|b| chi.0.dot(b) == 0)
    }

    /// All `2^dim` elements of the subspace, in lexicographic order on the
    /// echelon-basis coefficients.
    pub fn elements(&self) -> Vec<GVector> {
        let d = self.dim();
        assert!(d <= DEFAULT_RANK_CAP, "subspace too large to enumerate");
        let mut out = Vec::with_capacity(1 << d);
        for mask in 0..(1u64 << d) {
            let mut v = Bits::zero(self.ambient_rank);
            for (i, row) in self.echelon.iter().enumerate() {
                if (mask >> (d - 1 - i)) & 1 == 1 {
                    v.xor_assign(row);
                }
            }
            out.push(GVector(v));
        }
        out
    }

    /// Elements of `G - H`, enumerated lexicographically; guarded by the cap.
    pub fn complement_elements(&self, rank_cap: usize) -> Result<Vec<GVector>, F2Error> {
        let g = GroupF2::new(self.ambient_rank);
        Ok(g.elements(rank_cap)?
            .filter(|v| !self.contains(v))
            .collect())
    }

    /// `|G - H| = 2^r - 2^dim`.
    pub fn complement_size(&self) -> u64 {
        (1u64 << self.ambient_rank) - (1u64 << self.dim())
    }
}

/// Every subspace of `(Z/2)^rank`, by enumerating reduced echelon bases.
/// Intended for small ranks (tests and exhaustive verification).
pub fn all_subspaces(rank: usize) -> Vec<Subspace> {
    assert!(rank <= 12, "subspace enumeration is for small ranks");
    let mut out = Vec::new();
    // Choose pivot columns as a bitmask, then fill the free positions.
    for pivot_mask in 0u32..(1 << rank) {
        let pivots: Vec<usize> = (0..rank).filter(|&j| (pivot_mask >> j) & 1 == 1).collect();
        let d = pivots.len();
        // Free entries: row i may have arbitrary bits in columns beyond
        // pivots[i] that are not pivot columns themselves.
        let mut free_slots: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for j in (p + 1)..rank {
                if !pivots.contains(&j) {
                    free_slots.push((i, j));
                }
            }
        }
        let nfree = free_slots.len();
        for fill in 0u64..(1 << nfree) {
            let mut rows: Vec<Bits> = pivots
                .iter()
                .map(|&p| Bits::zero(rank).tap_set(p))
                .collect();
            for (s, &(i, j)) in free_slots.iter().enumerate() {
                if (fill >> s) & 1 == 1 {
                    rows[i].set(j, true);
                }
            }
            out.push(Subspace {
                ambient_rank: rank,
                echelon: rows,
            });
        }
        if d == 0 {
            // the loop above already pushed the zero subspace once
        }
    }
    out
}
