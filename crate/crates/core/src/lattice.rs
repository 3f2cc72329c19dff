//! The Picard lattice of `P^1 x P^1` blown up at `n` points.
//!
//! A class is written `r*F1 + s*F2 - sum a_i E_i` where `F1, F2` are the
//! two ruling fibres and `E_i` the exceptional curves; the intersection
//! form is `A.B = r_A s_B + r_B s_A - sum a_i b_i`. The canonical class is
//! `(-2,-2) + sum E_i`, i.e. has `a_i = -1` in this sign convention.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice size mismatch: {0} vs {1} exceptional classes")]
    SizeMismatch(usize, usize),
    #[error("parity violation: L.(L-K) = {0} is odd (intersection-form bug)")]
    RrParity(i128),
    #[error("class is not combinatorially ample")]
    NotCombAmple,
    #[error("class is not 2-divisible in coordinates {0:?}")]
    NotHalvable(Vec<String>),
}

/// The lattice `Pic(S)` for `S -> Q` the blow-up at `n` points;
/// `rank = n + 2`, signature `(1, n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlownQuadricLattice {
    n: usize,
}

impl BlownQuadricLattice {
    pub fn new(n: usize) -> Self {
        BlownQuadricLattice { n }
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.n + 2
    }

    pub fn zero(&self) -> DivClass {
        DivClass::new(0, 0, vec![0; self.n])
    }

    /// Class of a fibre of the first ruling, `(1,0;0,...)`.
    pub fn fibre1(&self) -> DivClass {
        DivClass::new(1, 0, vec![0; self.n])
    }

    /// Class of a fibre of the second ruling, `(0,1;0,...)`.
    pub fn fibre2(&self) -> DivClass {
        DivClass::new(0, 1, vec![0; self.n])
    }

    /// The exceptional class `E_i`, with `a_i = -1` in this convention.
    pub fn exceptional(&self, i: usize) -> DivClass {
        assert!(i < self.n);
        let mut a = vec![0; self.n];
        a[i] = -1;
        DivClass::new(0, 0, a)
    }

    /// `K_S = (-2,-2) + sum E_i`.
    pub fn canonical_class(&self) -> DivClass {
        DivClass::new(-2, -2, vec![-1; self.n])
    }

    /// Gram matrix in the basis `F1, F2, E_1..E_n`.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let r = self.rank();
        let mut m = vec![vec![0i64; r]; r];
        m[0][1] = 1;
        m[1][0] = 1;
        for i in 0..self.n {
            m[2 + i][2 + i] = -1;
        }
        m
    }
}

/// An element of the Picard lattice: `r*F1 + s*F2 - sum a_i E_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DivClass {
    pub r: i64,
    pub s: i64,
    pub a: Vec<i64>,
}

impl DivClass {
    pub fn new(r: i64, s: i64, a: Vec<i64>) -> Self {
        DivClass { r, s, a }
    }

    pub fn bidegree(r: i64, s: i64, n: usize) -> Self {
        DivClass::new(r, s, vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn is_zero(&self) -> bool {
        self.r == 0 && self.s == 0 && self.a.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &DivClass) -> DivClass {
        debug_assert_eq!(self.n(), other.n());
        DivClass::new(
            self.r + other.r,
            self.s + other.s,
            self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        )
    }

    pub fn sub(&self, other: &DivClass) -> DivClass {
        debug_assert_eq!(self.n(), other.n());
        DivClass::new(
            self.r - other.r,
            self.s - other.s,
            self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
        )
    }

    pub fn neg(&self) -> DivClass {
        DivClass::new(-self.r, -self.s, self.a.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, k: i64) -> DivClass {
        DivClass::new(
            self.r * k,
            self.s * k,
            self.a.iter().map(|x| x * k).collect(),
        )
    }

    /// Exact halving; on failure lists the odd coordinates by name.
    pub fn halve(&self) -> Result<DivClass, LatticeError> {
        let mut odd = Vec::new();
        if self.r % 2 != 0 {
            odd.push("r".to_string());
        }
        if self.s % 2 != 0 {
            odd.push("s".to_string());
        }
        for (i, &x) in self.a.iter().enumerate() {
            if x % 2 != 0 {
                odd.push(format!("a[{i}]"));
            }
        }
        if !odd.is_empty() {
            return Err(LatticeError::NotHalvable(odd));
        }
        Ok(DivClass::new(
            self.r / 2,
            self.s / 2,
            self.a.iter().map(|x| x / 2).collect(),
        ))
    }

    /// Appends `m` zero exceptional coordinates.
    pub fn extended(&self, m: usize) -> DivClass {
        let mut a = self.a.clone();
        a.extend(std::iter::repeat_n(0, m));
        DivClass::new(self.r, self.s, a)
    }

    /// Forgets the last `m` exceptional coordinates.
    pub fn projected(&self, m: usize) -> DivClass {
        assert!(m <= self.a.len());
        DivClass::new(self.r, self.s, self.a[..self.a.len() - m].to_vec())
    }
}

impl fmt::Display for DivClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};", self.r, self.s)?;
        for (i, x) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// `A.B = r_A s_B + r_B s_A - sum a_i b_i`, accumulated in i128.
pub fn intersect(a: &DivClass, b: &DivClass) -> Result<i128, LatticeError> {
    if a.n() != b.n() {
        return Err(LatticeError::SizeMismatch(a.n(), b.n()));
    }
    let mut acc = a.r as i128 * b.s as i128 + b.r as i128 * a.s as i128;
    for (x, y) in a.a.iter().zip(&b.a) {
        acc -= *x as i128 * *y as i128;
    }
    Ok(acc)
}

/// Self-intersection.
pub fn self_intersect(a: &DivClass) -> i128 {
    intersect(a, a).expect("same lattice")
}

/// Combinatorial ampleness: `a_i >= 2` for all `i` and `r, s > sum(a_i+1)`.
pub fn is_comb_ample(l: &DivClass) -> bool {
    let bound: i128 = l.a.iter().map(|&x| x as i128 + 1).sum();
    l.a.iter().all(|&x| x >= 2) && (l.r as i128) > bound && (l.s as i128) > bound
}

/// `chi(L) = 1 + L.(L-K)/2` by Riemann-Roch; errors if the pairing is odd.
pub fn rr_chi(lattice: &BlownQuadricLattice, l: &DivClass) -> Result<i128, LatticeError> {
    let k = lattice.canonical_class();
    let t = intersect(l, &l.sub(&k))?;
    if t.rem_euclid(2) != 0 {
        return Err(LatticeError::RrParity(t));
    }
    Ok(1 + t / 2)
}

/// Cohomological facts certified by combinatorial ampleness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmpleFact {
    Ample,
    BasePointFree,
    H1VanishesBothSigns,
    H0ThetaMinusVanishes,
    H1ThetaMinusVanishes,
}

/// The full fact set for a combinatorially ample class, or an error.
pub fn comb_ample_certificate(l: &DivClass) -> Result<Vec<AmpleFact>, LatticeError> {
    if !is_comb_ample(l) {
        return Err(LatticeError::NotCombAmple);
    }
    Ok(vec![
        AmpleFact::Ample,
        AmpleFact::BasePointFree,
        AmpleFact::H1VanishesBothSigns,
        AmpleFact::H0ThetaMinusVanishes,
        AmpleFact::H1ThetaMinusVanishes,
    ])
}

/// Smallest `alpha <= cap` with `d + alpha*l` combinatorially ample, for
/// `l` itself combinatorially ample; any class escalates eventually.
pub fn comb_ample_escalation(d: &DivClass, l: &DivClass, cap: u32) -> Option<u32> {
    if !is_comb_ample(l) {
        return None;
    }
    (0..=cap).find(|&alpha| is_comb_ample(&d.add(&l.scale(alpha as i64))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_form() {
        let lat = BlownQuadricLattice::new(2);
        let f1 = lat.fibre1();
        let f2 = lat.fibre2();
        assert_eq!(intersect(&f1, &f2).unwrap(), 1);
        assert_eq!(intersect(&f1, &f1).unwrap(), 0);
        let e0 = lat.exceptional(0);
        assert_eq!(intersect(&e0, &e0).unwrap(), -1);
        assert_eq!(intersect(&e0, &f1).unwrap(), 0);
        // mismatched lattices
        let other = BlownQuadricLattice::new(3).zero();
        assert!(intersect(&f1, &other).is_err());
    }

    #[test]
    fn canonical_class_squares() {
        // K^2 = 8 - n
        for n in [0usize, 1, 6] {
            let lat = BlownQuadricLattice::new(n);
            let k = lat.canonical_class();
            assert_eq!(self_intersect(&k), 8 - n as i128);
        }
    }

    #[test]
    fn adjunction_on_bidegree_curves() {
        // C = (a,b): C.(C+K) = 2(a-1)(b-1) - 2, i.e. g(C) = (a-1)(b-1)
        let lat = BlownQuadricLattice::new(0);
        let k = lat.canonical_class();
        for a in 0..8i64 {
            for b in 0..8i64 {
                let c = DivClass::bidegree(a, b, 0);
                let lhs = intersect(&c, &c.add(&k)).unwrap();
                assert_eq!(lhs, 2 * (a as i128 - 1) * (b as i128 - 1) - 2);
            }
        }
    }

    #[test]
    fn comb_ample_examples() {
        assert!(is_comb_ample(&DivClass::new(7, 7, vec![2, 2])));
        assert!(!is_comb_ample(&DivClass::new(6, 7, vec![2, 2])));
        assert!(!is_comb_ample(&DivClass::new(10, 10, vec![1])));
    }

    #[test]
    fn comb_ample_monotone_in_hyperplane_direction() {
        let l = DivClass::new(7, 7, vec![2, 2]);
        assert!(is_comb_ample(&l.add(&DivClass::new(1, 1, vec![0, 0]))));
    }

    #[test]
    fn rr_chi_values() {
        let lat0 = BlownQuadricLattice::new(0);
        assert_eq!(rr_chi(&lat0, &lat0.zero()).unwrap(), 1);
        // chi((a,b)) = (a+1)(b+1) on Q, matching the monomial count
        for a in 0..=20i64 {
            for b in 0..=20i64 {
                let monomials = (0..=a).flat_map(|_| 0..=b).count() as i128;
                assert_eq!(
                    rr_chi(&lat0, &DivClass::bidegree(a, b, 0)).unwrap(),
                    monomials
                );
                assert_eq!(monomials, (a as i128 + 1) * (b as i128 + 1));
            }
        }
        // chi((c,0)) = c+1
        for c in 0..10i64 {
            assert_eq!(
                rr_chi(&lat0, &DivClass::bidegree(c, 0, 0)).unwrap(),
                c as i128 + 1
            );
        }
    }

    #[test]
    fn rr_serre_shaped_identity() {
        // chi(L) + chi(K-L) = 2 + L.(L-K)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(0..6);
            let lat = BlownQuadricLattice::new(n);
            let k = lat.canonical_class();
            let l = DivClass::new(
                rng.gen_range(-9..9),
                rng.gen_range(-9..9),
                (0..n).map(|_| rng.gen_range(-9..9)).collect(),
            );
            let lhs = rr_chi(&lat, &l).unwrap() + rr_chi(&lat, &k.sub(&l)).unwrap();
            let rhs = 2 + intersect(&l, &l.sub(&k)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn intersect_symmetric_bilinear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let lat = BlownQuadricLattice::new(4);
        let rand_class = |rng: &mut rand_chacha::ChaCha8Rng| {
            DivClass::new(
                rng.gen_range(-20..20),
                rng.gen_range(-20..20),
                (0..4).map(|_| rng.gen_range(-20..20)).collect(),
            )
        };
        for _ in 0..100 {
            let (a, b, c) = (
                rand_class(&mut rng),
                rand_class(&mut rng),
                rand_class(&mut rng),
            );
            assert_eq!(intersect(&a, &b).unwrap(), intersect(&b, &a).unwrap());
            assert_eq!(
                intersect(&a.add(&b), &c).unwrap(),
                intersect(&a, &c).unwrap() + intersect(&b, &c).unwrap()
            );
        }
        let _ = lat;
    }

    #[test]
    fn certificate_and_escalation() {
        let l = DivClass::new(7, 7, vec![2, 2]);
        assert_eq!(comb_ample_certificate(&l).unwrap().len(), 5);
        assert!(comb_ample_certificate(&DivClass::new(1, 1, vec![0, 0])).is_err());
        // any class becomes comb ample after adding enough copies of l
        let d = DivClass::new(-3, 0, vec![-1, 5]);
        let alpha = comb_ample_escalation(&d, &l, 64).unwrap();
        assert!(is_comb_ample(&d.add(&l.scale(alpha as i64))));
        assert!(alpha == 0 || !is_comb_ample(&d.add(&l.scale(alpha as i64 - 1))));
    }

    #[test]
    fn halving() {
        assert_eq!(
            DivClass::new(2, 2, vec![4]).halve().unwrap(),
            DivClass::new(1, 1, vec![2])
        );
        match DivClass::new(1, 0, vec![2]).halve() {
            Err(LatticeError::NotHalvable(coords)) => assert_eq!(coords, vec!["r"]),
            other => panic!("expected parity error, got {other:?}"),
        }
    }

    /// Exact congruence diagonalization over Q, as (num, den) pairs.
    #[allow(clippy::needless_range_loop)]
    fn signature(gram: &[Vec<i64>]) -> (usize, usize, usize) {
        let n = gram.len();
        let mut m: Vec<Vec<(i128, i128)>> = gram
            .iter()
            .map(|row| row.iter().map(|&x| (x as i128, 1)).collect())
            .collect();
        fn sub_scaled(row: &mut [(i128, i128)], other: &[(i128, i128)], num: (i128, i128)) {
            for (x, y) in row.iter_mut().zip(other) {
                // x -= num * y, with naive fraction arithmetic + reduction
                let n1 = x.0 * num.1 * y.1 - num.0 * y.0 * x.1;
                let d1 = x.1 * num.1 * y.1;
                let g = gcd(n1.abs().max(1), d1.abs());
                *x = (n1 / g, d1 / g);
            }
        }
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 {
                a.max(1)
            } else {
                gcd(b, a % b)
            }
        }
        let (mut pos, mut neg, mut zero) = (0, 0, 0);
        let mut rows: Vec<usize> = (0..n).collect();
        while let Some(&i) = rows.first() {
            rows.remove(0);
            if m[i][i].0 == 0 {
                // find j with m[i][j] != 0 and mix: replace row/col j by j + i
                let j = rows.iter().copied().find(|&j| m[i][j].0 != 0);
                match j {
                    None => {
                        zero += 1;
                        continue;
                    }
                    Some(j) => {
                        for c in 0..n {
                            let add = m[j][c];
                            let (num, den) =
                                (m[i][c].0 * add.1 + add.0 * m[i][c].1, m[i][c].1 * add.1);
                            let g = gcd(num.abs().max(1), den.abs());
                            m[i][c] = (num / g, den / g);
                        }
                        for r in 0..n {
                            let add = m[r][j];
                            let (num, den) =
                                (m[r][i].0 * add.1 + add.0 * m[r][i].1, m[r][i].1 * add.1);
                            let g = gcd(num.abs().max(1), den.abs());
                            m[r][i] = (num / g, den / g);
                        }
                    }
                }
            }
            let pivot = m[i][i];
            if pivot.0 > 0 {
                pos += 1;
            } else {
                neg += 1;
            }
            let others: Vec<usize> = rows.clone();
            for &j in &others {
                // coefficient m[j][i] / pivot
                let coeff = (m[j][i].0 * pivot.1, m[j][i].1 * pivot.0);
                if coeff.0 == 0 {
                    continue;
                }
                let row_i: Vec<(i128, i128)> = m[i].clone();
                sub_scaled(&mut m[j], &row_i, coeff);
                for r in 0..n {
                    let y = m[r][i];
                    let x = m[r][j];
                    let n1 = x.0 * coeff.1 * y.1 - coeff.0 * y.0 * x.1;
                    let d1 = x.1 * coeff.1 * y.1;
                    let g = gcd(n1.abs().max(1), d1.abs());
                    m[r][j] = (n1 / g, d1 / g);
                }
            }
        }
        (pos, neg, zero)
    }

    #[test]
    fn lattice_signature() {
        for n in 0..6 {
            let lat = BlownQuadricLattice::new(n);
            assert_eq!(lat.rank(), n + 2);
            let (pos, neg, zero) = signature(&lat.gram());
            assert_eq!((pos, neg, zero), (1, n + 1, 0), "n = {n}");
        }
    }
}
