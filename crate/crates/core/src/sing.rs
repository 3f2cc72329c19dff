//! Cyclic quotient singularities: normal forms, Hirzebruch-Jung chains,
//! class-T detection, the `B_n`/`Y`-type families and fundamental cycles.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SingError {
    #[error("p must be positive")]
    NonPositiveOrder,
    #[error("non-isolated singularity: gcd(p,{0}) > 1 after reduction")]
    NonIsolated(String),
    #[error("Hirzebruch-Jung entries must all be >= 2, got {0}")]
    BadChainEntry(i64),
    #[error("resolution graph is not a tree")]
    NotATree,
    #[error("self-intersection {0} is not <= -2")]
    BadSelfIntersection(i64),
    #[error("fundamental cycle does not stabilize (graph is not negative definite)")]
    NotNegativeDefinite,
}

/// A cyclic quotient singularity in the normal form `1/p (1, q)`,
/// `gcd(p,q) = 1`, `1 <= q < p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicSing {
    pub p: u64,
    pub q: u64,
    /// Raw triple this normal form came from, when produced by [`normalize`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub origin: Option<(u64, i64, i64)>,
}

impl CyclicSing {
    pub fn new(p: u64, q: u64) -> Self {
        assert!(
            p >= 2 && q >= 1 && q < p && p.gcd(&q) == 1,
            "1/{p}({q}) not in normal form"
        );
        CyclicSing { p, q, origin: None }
    }

    /// `q^{-1} mod p`, the other normal form of the same germ.
    pub fn q_inverse(&self) -> u64 {
        mod_inverse(self.q, self.p).expect("q is a unit mod p")
    }

    /// Rational double point `A_{p-1}` has `q = p - 1`.
    pub fn is_rdp(&self) -> bool {
        self.q == self.p - 1
    }
}

/// Result of putting a quotient germ in normal form: either smooth or a
/// genuine cyclic singularity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalForm {
    Smooth,
    Cyclic(CyclicSing),
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    // extended Euclid on (a, m)
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Normal form of the quotient of `C^2` by `mu_p` acting with weights
/// `(a, b)`: common factors of the triple are removed (the action factors
/// through the faithful quotient), isolatedness demands the reduced
/// weights be units mod `p`, and the normal form is `1/p (1, a^{-1} b)`.
pub fn normalize(p: u64, a: i64, b: i64) -> Result<NormalForm, SingError> {
    if p == 0 {
        return Err(SingError::NonPositiveOrder);
    }
    let a0 = a.rem_euclid(p as i64) as u64;
    let b0 = b.rem_euclid(p as i64) as u64;
    let k = p.gcd(&a0).gcd(&b0);
    let (p1, a1, b1) = (p / k, a0 / k, b0 / k);
    if p1 == 1 {
        return Ok(NormalForm::Smooth);
    }
    if p1.gcd(&a1) != 1 {
        return Err(SingError::NonIsolated(format!("a = {a1}")));
    }
    if p1.gcd(&b1) != 1 {
        return Err(SingError::NonIsolated(format!("b = {b1}")));
    }
    let a_inv = mod_inverse(a1 % p1, p1).expect("a is a unit mod p");
    let q = (a_inv as u128 * b1 as u128 % p1 as u128) as u64;
    debug_assert!(q >= 1 && q < p1);
    Ok(NormalForm::Cyclic(CyclicSing {
        p: p1,
        q,
        origin: Some((p, a, b)),
    }))
}

/// True iff the two normal forms present isomorphic germs:
/// same `p` and `q2 in {q1, q1^{-1} mod p}`.
pub fn is_iso(s1: &CyclicSing, s2: &CyclicSing) -> bool {
    s1.p == s2.p && (s1.q == s2.q || s2.q == s1.q_inverse())
}

/// A Hirzebruch-Jung chain `[b_1, ..., b_k]`, all entries `>= 2`; the
/// minimal resolution of `1/p (1,q)` is a chain of rational curves with
/// self-intersections `-b_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HJChain(pub Vec<u64>);

impl HJChain {
    pub fn new(entries: Vec<u64>) -> Result<Self, SingError> {
        if let Some(&bad) = entries.iter().find(|&&b| b < 2) {
            return Err(SingError::BadChainEntry(bad as i64));
        }
        Ok(HJChain(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Continued fraction expansion `p/q = b_1 - 1/(b_2 - ...)`.
pub fn hj(s: &CyclicSing) -> HJChain {
    let (mut p, mut q) = (s.p, s.q);
    let mut out = Vec::new();
    while q > 0 {
        let b = p.div_ceil(q);
        out.push(b);
        (p, q) = (q, b * q - p);
    }
    HJChain(out)
}

/// Reconstructs `1/p (1,q)` from its chain; inverse of [`hj`].
pub fn from_chain(chain: &HJChain) -> CyclicSing {
    assert!(!chain.0.is_empty(), "empty chain has no singularity");
    let (mut num, mut den) = (*chain.0.last().unwrap() as u128, 1u128);
    for &b in chain.0.iter().rev().skip(1) {
        (num, den) = (b as u128 * num - den, num);
    }
    CyclicSing::new(num as u64, den as u64)
}

/// Witness that `1/p (1,q)` is the class-T type `1/(d n^2) (1, dna - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTWitness {
    pub d: u64,
    pub n: u64,
    pub a: u64,
}

impl ClassTWitness {
    /// Checks `p = d n^2` and `dna - 1 = q` or `(dna-1) q = 1 mod p`.
    pub fn certifies(&self, p: u64, q: u64) -> bool {
        if self.d * self.n * self.n != p {
            return false;
        }
        let c = (self.d as u128 * self.n as u128 * self.a as u128 - 1) % p as u128;
        c == q as u128 || (c * q as u128) % p as u128 == 1
    }
}

/// Class-T detection for a normalized germ. Smooth points and rational
/// double points are always of class T; otherwise search `n >= 2` with
/// `n^2 | p` and `a in [1, n]` coprime to `n`. Returns the witness with
/// smallest `(n, a)`.
pub fn class_t_witness(germ: &NormalForm) -> Option<ClassTWitness> {
    let s = match germ {
        NormalForm::Smooth => return Some(ClassTWitness { d: 1, n: 1, a: 1 }),
        NormalForm::Cyclic(s) => s,
    };
    if s.is_rdp() {
        return Some(ClassTWitness { d: s.p, n: 1, a: 1 });
    }
    let mut n = 2u64;
    while n * n <= s.p {
        if s.p % (n * n) == 0 {
            let d = s.p / (n * n);
            for a in 1..=n {
                if a.gcd(&n) != 1 {
                    continue;
                }
                let w = ClassTWitness { d, n, a };
                if w.certifies(s.p, s.q) {
                    return Some(w);
                }
            }
        }
        n += 1;
    }
    None
}

/// `(dna - 1)^2 = 1 mod d n^2`; closed criterion: `a = 1` and `n <= 2`
/// within the canonical range `a in [1, n]`, `gcd(a, n) = 1`.
pub fn q2_criterion(d: u64, n: u64, a: u64) -> bool {
    debug_assert!(d > 0 && n > 0 && a > 0 && a.gcd(&n) == 1);
    let p = d as u128 * n as u128 * n as u128;
    let q = (d as u128 * n as u128 * a as u128 - 1) % p;
    (q * q) % p == 1 % p
}

/// `B_n`: quotient of `A_{2n}` by the involution exchanging the two
/// branches; cyclic of type `1/(2n+1) (1, 2n-1)` with resolution chain
/// `[2, ..., 2, 3]` on `n` vertices.
pub fn b_family(n: u64) -> (CyclicSing, HJChain) {
    assert!(n >= 1);
    let s = CyclicSing::new(2 * n + 1, 2 * n - 1);
    let mut entries = vec![2u64; (n - 1) as usize];
    entries.push(3);
    let chain = HJChain(entries);
    debug_assert_eq!(hj(&s), chain);
    (s, chain)
}

/// The Y-type family indexed by type: `1/(4n) (1, 2n-1)`, chain `[4]` for
/// `n = 1` and `[3, 2, ..., 2, 3]` on `n` vertices for `n >= 2`. Indexing
/// is by type because the subscript conventions for this family are
/// shifted between sources.
pub fn y_family_by_type(n: u64) -> (CyclicSing, HJChain) {
    assert!(n >= 1);
    let s = CyclicSing::new(4 * n, 2 * n - 1);
    let chain = if n == 1 {
        HJChain(vec![4])
    } else {
        let mut entries = vec![3u64];
        entries.extend(vec![2u64; (n - 2) as usize]);
        entries.push(3);
        HJChain(entries)
    };
    debug_assert_eq!(hj(&s), chain);
    (s, chain)
}

/// A resolution graph: a tree of rational curves with self-intersections
/// `<= -2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionGraph {
    pub self_intersections: Vec<i64>,
    pub edges: Vec<(usize, usize)>,
}

impl ResolutionGraph {
    pub fn chain(chain: &HJChain) -> Self {
        let n = chain.0.len();
        ResolutionGraph {
            self_intersections: chain.0.iter().map(|&b| -(b as i64)).collect(),
            edges: (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }

    fn validate(&self) -> Result<(), SingError> {
        let n = self.self_intersections.len();
        if let Some(&bad) = self.self_intersections.iter().find(|&&b| b > -2) {
            return Err(SingError::BadSelfIntersection(bad));
        }
        if n == 0 {
            return Err(SingError::NotATree);
        }
        if self.edges.len() != n - 1 {
            return Err(SingError::NotATree);
        }
        // connectivity by union-find
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let root = find(parent, parent[i]);
                parent[i] = root;
            }
            parent[i]
        }
        for &(i, j) in &self.edges {
            if i >= n || j >= n || i == j {
                return Err(SingError::NotATree);
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri == rj {
                return Err(SingError::NotATree);
            }
            parent[ri] = rj;
        }
        Ok(())
    }
}

/// Laufer's incremental algorithm: the smallest effective cycle
/// `Z >= sum E_i` with `Z.E_i <= 0` for all `i`. Returns the coefficients
/// and `Z^2`.
pub fn fundamental_cycle(graph: &ResolutionGraph) -> Result<(Vec<u64>, i128), SingError> {
    graph.validate()?;
    let n = graph.self_intersections.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &graph.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut z = vec![1i128; n];
    let dot = |z: &[i128], i: usize| -> i128 {
        graph.self_intersections[i] as i128 * z[i] + adj[i].iter().map(|&j| z[j]).sum::<i128>()
    };
    // On a negative-definite graph this stabilizes; the cap catches
    // degenerate inputs like affine diagrams.
    let cap = 1i128 << 20;
    loop {
        let mut bumped = false;
        for i in 0..n {
            if dot(&z, i) > 0 {
                z[i] += 1;
                if z[i] > cap {
                    return Err(SingError::NotNegativeDefinite);
                }
                bumped = true;
            }
        }
        if !bumped {
            break;
        }
    }
    let z2: i128 = (0..n).map(|i| z[i] * dot(&z, i)).sum();
    Ok((z.iter().map(|&x| x as u64).collect(), z2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize(4, 1, 1).unwrap(),
            NormalForm::Cyclic(CyclicSing {
                p: 4,
                q: 1,
                origin: Some((4, 1, 1))
            })
        );
        // 2^{-1} = 3 mod 5
        match normalize(5, 2, 1).unwrap() {
            NormalForm::Cyclic(s) => assert_eq!((s.p, s.q), (5, 3)),
            _ => panic!(),
        }
        assert_eq!(normalize(1, 1, 1).unwrap(), NormalForm::Smooth);
        // common factor of the whole triple is removed
        match normalize(4, 2, 2).unwrap() {
            NormalForm::Cyclic(s) => assert_eq!((s.p, s.q), (2, 1)),
            _ => panic!(),
        }
        // non-isolated
        assert!(matches!(normalize(4, 2, 1), Err(SingError::NonIsolated(_))));
        assert!(matches!(
            normalize(0, 1, 1),
            Err(SingError::NonPositiveOrder)
        ));
        // negative weights reduce mod p: 1/p(1,-1) = A_{p-1}
        match normalize(6, 1, -1).unwrap() {
            NormalForm::Cyclic(s) => {
                assert_eq!((s.p, s.q), (6, 5));
                assert!(s.is_rdp());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rdp_recognition() {
        // A_{dn-1} = 1/(dn) (1, dn-1)
        for d in 1..8u64 {
            for n in 1..8u64 {
                if d * n < 2 {
                    continue;
                }
                match normalize(d * n, 1, (d * n - 1) as i64).unwrap() {
                    NormalForm::Cyclic(s) => assert!(s.is_rdp()),
                    _ => panic!(),
                }
            }
        }
    }

    #[test]
    fn hj_examples() {
        assert_eq!(hj(&CyclicSing::new(4, 1)).0, vec![4]);
        assert_eq!(hj(&CyclicSing::new(5, 3)).0, vec![2, 3]);
        assert_eq!(hj(&CyclicSing::new(7, 5)).0, vec![2, 2, 3]);
        assert_eq!(hj(&CyclicSing::new(8, 3)).0, vec![3, 3]);
    }

    #[test]
    fn hj_round_trip() {
        for p in 2..=500u64 {
            for q in 1..p {
                if p.gcd(&q) != 1 {
                    continue;
                }
                let s = CyclicSing::new(p, q);
                let chain = hj(&s);
                assert!(chain.0.iter().all(|&b| b >= 2));
                let back = from_chain(&chain);
                assert_eq!((back.p, back.q), (p, q));
            }
        }
    }

    #[test]
    fn hj_chains_of_iso_pair_are_reverses() {
        // standard duality, checked empirically
        let mut checked = 0;
        for p in 2..200u64 {
            for q in 1..p {
                if p.gcd(&q) != 1 {
                    continue;
                }
                let s = CyclicSing::new(p, q);
                let t = CyclicSing::new(p, s.q_inverse());
                assert!(is_iso(&s, &t));
                let mut rev = hj(&t).0;
                rev.reverse();
                assert_eq!(hj(&s).0, rev);
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn class_t_examples() {
        let w = class_t_witness(&normalize(4, 1, 1).unwrap()).unwrap();
        assert_eq!((w.d, w.n, w.a), (1, 2, 1));
        let w = class_t_witness(&NormalForm::Cyclic(CyclicSing::new(9, 2))).unwrap();
        assert_eq!((w.d, w.n, w.a), (1, 3, 1));
        assert_eq!(
            class_t_witness(&NormalForm::Cyclic(CyclicSing::new(5, 3))),
            None
        );
        assert!(class_t_witness(&NormalForm::Smooth).is_some());
        // RDPs always accepted
        let w = class_t_witness(&NormalForm::Cyclic(CyclicSing::new(7, 6))).unwrap();
        assert!(w.certifies(7, 6));
    }

    #[test]
    fn class_t_brute_force_small() {
        // forward generation vs backward detection, p <= 300
        let bound = 300u64;
        let mut table = std::collections::HashSet::new();
        for n in 1..=17u64 {
            for d in 1..=bound / (n * n).max(1) {
                let p = d * n * n;
                if p > bound || p < 2 {
                    continue;
                }
                for a in 1..=n {
                    if a.gcd(&n) != 1 {
                        continue;
                    }
                    let c = (d * n * a - 1) % p;
                    if c == 0 || p.gcd(&c) != 1 {
                        continue;
                    }
                    table.insert((p, c));
                    table.insert((p, mod_inverse(c, p).unwrap()));
                }
            }
        }
        for p in 2..=bound {
            for q in 1..p {
                if p.gcd(&q) != 1 {
                    continue;
                }
                let got = class_t_witness(&NormalForm::Cyclic(CyclicSing::new(p, q)));
                assert_eq!(
                    got.is_some(),
                    table.contains(&(p, q)),
                    "disagreement at 1/{p}({q})"
                );
                if let Some(w) = got {
                    assert!(w.certifies(p, q));
                }
            }
        }
    }

    #[test]
    fn iso_examples() {
        let s = CyclicSing::new(7, 3);
        assert!(is_iso(&s, &CyclicSing::new(7, 5)));
        assert!(!is_iso(&s, &CyclicSing::new(7, 2)));
        assert!(is_iso(&s, &s));
    }

    #[test]
    fn q2_criterion_examples() {
        assert!(q2_criterion(1, 2, 1));
        assert!(q2_criterion(2, 2, 1));
        assert!(!q2_criterion(1, 3, 1));
    }

    #[test]
    fn families() {
        let (s, chain) = b_family(1);
        assert_eq!((s.p, s.q), (3, 1));
        assert_eq!(chain.0, vec![3]);
        let (s, chain) = b_family(3);
        assert_eq!((s.p, s.q), (7, 5));
        assert_eq!(chain.0, vec![2, 2, 3]);
        let (s, chain) = y_family_by_type(2);
        assert_eq!((s.p, s.q), (8, 3));
        assert_eq!(chain.0, vec![3, 3]);
        let (s, chain) = y_family_by_type(1);
        assert_eq!((s.p, s.q), (4, 1));
        assert_eq!(chain.0, vec![4]);
    }

    #[test]
    fn fundamental_cycles() {
        for n in 1..=10 {
            let (_, chain) = b_family(n);
            let (_, z2) = fundamental_cycle(&ResolutionGraph::chain(&chain)).unwrap();
            assert_eq!(z2, -3, "B_{n}");
            let (_, chain) = y_family_by_type(n);
            let (_, z2) = fundamental_cycle(&ResolutionGraph::chain(&chain)).unwrap();
            assert_eq!(z2, -4, "Y type index {n}");
        }
        // A_n chains: Z = sum E_i, Z^2 = -2
        for n in 1..=10usize {
            let chain = HJChain(vec![2; n]);
            let (z, z2) = fundamental_cycle(&ResolutionGraph::chain(&chain)).unwrap();
            assert_eq!(z, vec![1; n]);
            assert_eq!(z2, -2);
        }
        // a fork: D_4 shape, all -2
        let d4 = ResolutionGraph {
            self_intersections: vec![-2, -2, -2, -2],
            edges: vec![(0, 1), (1, 2), (1, 3)],
        };
        let (z, z2) = fundamental_cycle(&d4).unwrap();
        assert_eq!(z, vec![1, 2, 1, 1]);
        assert_eq!(z2, -2);
        // degenerate affine-type star is rejected
        let star5 = ResolutionGraph {
            self_intersections: vec![-2; 6],
            edges: vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)],
        };
        assert!(matches!(
            fundamental_cycle(&star5),
            Err(SingError::NotNegativeDefinite)
        ));
        // invalid graphs
        let cycle = ResolutionGraph {
            self_intersections: vec![-2, -2, -2],
            edges: vec![(0, 1), (1, 2), (2, 0)],
        };
        assert!(matches!(
            fundamental_cycle(&cycle),
            Err(SingError::NotATree)
        ));
        let shallow = ResolutionGraph {
            self_intersections: vec![-1],
            edges: vec![],
        };
        assert!(matches!(
            fundamental_cycle(&shallow),
            Err(SingError::BadSelfIntersection(-1))
        ));
    }

    #[test]
    fn q2_matches_closed_criterion() {
        for d in 1..=20u64 {
            for n in 1..=12u64 {
                for a in 1..=n {
                    if a.gcd(&n) != 1 {
                        continue;
                    }
                    assert_eq!(q2_criterion(d, n, a), a == 1 && n <= 2, "d={d} n={n} a={a}");
                }
            }
        }
    }
}
