//! Bundled demo covers.
//!
//! `three_branch_cover` is the smallest interesting instance: a rank-2
//! group acting with all three nonzero branch classes equal to one curve
//! class of bidegree (3,3) through six blown-up points. Its invariants
//! are `K^2 = 44`, `chi = 13`.
//!
//! `pascal_cover` records the divisor bookkeeping of a rank-9 cover over
//! the plane blown up at nine special points: a smooth conic with an
//! inscribed hexagon of six lines, where the three "diagonal" intersection
//! points of opposite lines are collinear, so a conic through them exists
//! in a pencil. The plane blown up at nine points embeds in the quadric
//! lattice with eight exceptional classes (`h = F1 + F2 - E_1`,
//! `e_1 = F1 - E_1`, `e_2 = F2 - E_1`, later points to `E_2, ...`), and
//! the eight named branch classes below are the translated strict
//! transforms: six lines (each through two hexagon vertices and one
//! diagonal point), the conic through the six vertices, and a conic
//! through the three diagonal points. The collinearity of the diagonal
//! points has no lattice expression and is not checked here; what is
//! checked is that the branch assignment extends to valid building data
//! with ample padding on the complement of the named subspace.

use crate::cover::{data_from_branch_map, BuildingData};
use crate::f2::{GVector, GroupF2};
use crate::lattice::{BlownQuadricLattice, DivClass};
use std::collections::BTreeMap;

/// Three equal branch classes `(3,3;1,...,1)` over six points; every
/// nonzero line-bundle class equals the branch class.
pub fn three_branch_cover() -> BuildingData {
    let group = GroupF2::new(2);
    let lattice = BlownQuadricLattice::new(6);
    let class = DivClass::new(3, 3, vec![1; 6]);
    let mut d = BTreeMap::new();
    for bits in [[0u8, 1], [1, 0], [1, 1]] {
        d.insert(GVector::from_bits(&bits), class.clone());
    }
    data_from_branch_map(group, lattice, d, group.standard_basis())
        .expect("three-branch data solves")
}

/// The translated strict transforms of the Pascal configuration, indexed
/// by the eight generators of the named subspace.
pub fn pascal_branch_classes() -> Vec<DivClass> {
    vec![
        // lines through (p6, p1, q1), ..., (p5, p6, q3)
        DivClass::new(0, 1, vec![0, 0, 0, 0, 1, 1, 0, 0]),
        DivClass::new(0, 0, vec![-1, 0, 0, 0, 0, 0, 1, 0]),
        DivClass::new(1, 0, vec![0, 1, 0, 0, 0, 0, 0, 1]),
        DivClass::new(1, 1, vec![1, 1, 1, 0, 0, 1, 0, 0]),
        DivClass::new(1, 1, vec![1, 0, 1, 1, 0, 0, 1, 0]),
        DivClass::new(1, 1, vec![1, 0, 0, 1, 1, 0, 0, 1]),
        // conic through the six hexagon vertices
        DivClass::new(1, 1, vec![0, 1, 1, 1, 1, 0, 0, 0]),
        // conic through the three diagonal points
        DivClass::new(2, 2, vec![2, 0, 0, 0, 0, 1, 1, 1]),
    ]
}

/// Rank-9 cover data: the eight named branch classes on the subspace
/// generated by the first eight basis vectors, and ample padding on the
/// complement, corrected on the translates of the named generators so the
/// basis equations stay 2-divisible.
pub fn pascal_cover() -> BuildingData {
    let group = GroupF2::new(9);
    let lattice = BlownQuadricLattice::new(8);
    let named = pascal_branch_classes();
    let mut d = BTreeMap::new();
    for (i, class) in named.iter().enumerate() {
        let mut sigma = GVector::zero(9);
        sigma.0.set(i, true);
        d.insert(sigma, class.clone());
    }
    // every strict transform of a line or of the hexagon conic has square -2
    for class in named.iter().take(7) {
        debug_assert_eq!(crate::lattice::self_intersect(class), -2);
    }
    let uniform = DivClass::new(80, 80, vec![4; 8]);
    let mut named_sum = lattice.zero();
    for class in &named {
        named_sum = named_sum.add(class);
    }
    for mask in 0u16..256 {
        let mut sigma = GVector::zero(9);
        for (i, _) in named.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                sigma.0.set(i, true);
            }
        }
        sigma.0.set(8, true);
        let correction = if mask == 0 {
            named_sum.clone()
        } else if mask.count_ones() == 1 {
            named[mask.trailing_zeros() as usize].clone()
        } else {
            lattice.zero()
        };
        d.insert(sigma, uniform.add(&correction));
    }
    data_from_branch_map(group, lattice, d, group.standard_basis()).expect("pascal data solves")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{
        check_galois_completeness, invariants, verify_all, BuildingDataJson, VerifyMode,
    };

    #[test]
    fn three_branch_cover_is_valid() {
        let data = three_branch_cover();
        assert!(verify_all(&data, VerifyMode::Exhaustive, 24)
            .unwrap()
            .passed());
        let inv = invariants(&data, 24).unwrap();
        assert_eq!((inv.k2, inv.chi), (44, 13));
    }

    #[test]
    fn pascal_cover_is_valid() {
        let data = pascal_cover();
        assert!(verify_all(&data, VerifyMode::Exhaustive, 24)
            .unwrap()
            .passed());
        // the padded data satisfies the deformation-completeness conditions
        let report = check_galois_completeness(&data, VerifyMode::Exhaustive, 24).unwrap();
        assert!(report.passed(), "failures: {}", report.failures.len());
        // invariants exist and the routes agree
        let inv = invariants(&data, 24).unwrap();
        assert!(inv.k2 > 0 && inv.chi > 0);
    }

    #[test]
    fn golden_files_match_builders() {
        for (file, data) in [
            (
                include_str!("../data/demo/three_branch_cover.json"),
                three_branch_cover(),
            ),
            (
                include_str!("../data/demo/pascal_cover.json"),
                pascal_cover(),
            ),
        ] {
            let expected = serde_json::to_string_pretty(&BuildingDataJson::from(&data)).unwrap();
            assert_eq!(file.trim_end(), expected.trim_end());
            // and the checked-in file round-trips into valid data
            let parsed: BuildingDataJson = serde_json::from_str(file).unwrap();
            let loaded = BuildingData::try_from(parsed).unwrap();
            assert_eq!(loaded, data);
        }
    }
}
