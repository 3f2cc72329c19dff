//! The catalogue of `(Z/2)^r`-actions on rational double points, shipped
//! as a checked-in data file and validated against exact monomial
//! substitution, root-of-unity weights and the quotient-singularity
//! arithmetic.
//!
//! RDP equations live in one of two charts: `x, y, z` with the double
//! point written `z^2 + ...`, or `u, v, y` with `u = z + ix`,
//! `v = z - ix`, where the `A` series reads `uv + y^{m+1}`. The six
//! canonical involutions a-f act by signed monomial maps in whichever
//! chart makes them monomial.

use crate::sing::{b_family, fundamental_cycle, y_family_by_type, ResolutionGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("malformed action table: {0}")]
    BadTable(String),
    #[error("form {form} is not monomial in the {chart} chart")]
    FormNotInChart { form: char, chart: String },
    #[error("variable set of the map does not cover the polynomial")]
    VariableMismatch,
    #[error("row {row}: {check} failed: {detail}")]
    RowCheck {
        row: u32,
        check: String,
        detail: String,
    },
}

/// Sparse polynomial with integer coefficients over a named variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySparse {
    pub vars: Vec<String>,
    pub terms: BTreeMap<Vec<u32>, i64>,
}

impl PolySparse {
    pub fn new(vars: &[&str]) -> Self {
        PolySparse {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn with_term(mut self, exponents: &[u32], coeff: i64) -> Self {
        assert_eq!(exponents.len(), self.vars.len());
        if coeff != 0 {
            let e = exponents.to_vec();
            let c = self.terms.entry(e).or_insert(0);
            *c += coeff;
            if *c == 0 {
                self.terms.remove(exponents);
            }
        }
        self
    }

    pub fn neg(&self) -> PolySparse {
        PolySparse {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

/// A signed monomial map: each variable goes to `sign * (another
/// variable)`; the underlying permutation together with the signs must
/// square to the identity for the involution catalogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedMonomialMap {
    /// `images[i] = (j, sign)` means variable `i` maps to `sign * var_j`.
    pub images: Vec<(usize, i8)>,
}

impl SignedMonomialMap {
    pub fn identity(nvars: usize) -> Self {
        SignedMonomialMap {
            images: (0..nvars).map(|i| (i, 1)).collect(),
        }
    }

    pub fn compose(&self, other: &SignedMonomialMap) -> SignedMonomialMap {
        // self after other
        SignedMonomialMap {
            images: other
                .images
                .iter()
                .map(|&(j, s)| {
                    let (k, t) = self.images[j];
                    (k, s * t)
                })
                .collect(),
        }
    }

    pub fn is_involution(&self) -> bool {
        self.compose(self) == SignedMonomialMap::identity(self.images.len())
    }
}

/// Exact substitution of a signed monomial map into a polynomial.
pub fn act(map: &SignedMonomialMap, f: &PolySparse) -> Result<PolySparse, ActionError> {
    if map.images.len() != f.vars.len() {
        return Err(ActionError::VariableMismatch);
    }
    let mut out = PolySparse {
        vars: f.vars.clone(),
        terms: BTreeMap::new(),
    };
    for (exps, &coeff) in &f.terms {
        let mut new_exps = vec![0u32; f.vars.len()];
        let mut sign = 1i64;
        for (i, &e) in exps.iter().enumerate() {
            let (j, s) = map.images[i];
            new_exps[j] += e;
            if s < 0 && e % 2 == 1 {
                sign = -sign;
            }
        }
        let c = out.terms.entry(new_exps.clone()).or_insert(0);
        *c += sign * coeff;
        if *c == 0 {
            out.terms.remove(&new_exps);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivariance {
    Invariant,
    AntiInvariant,
    Neither,
}

/// Compares `f` with its image: invariant, anti-invariant (the zero set is
/// still preserved), or neither.
pub fn is_invariant(map: &SignedMonomialMap, f: &PolySparse) -> Result<Equivariance, ActionError> {
    let image = act(map, f)?;
    if image == *f {
        Ok(Equivariance::Invariant)
    } else if image == f.neg() {
        Ok(Equivariance::AntiInvariant)
    } else {
        Ok(Equivariance::Neither)
    }
}

/// Root-of-unity weight data for `mu_n` checks: a monomial
/// `prod x_i^{e_i}` is invariant iff `sum e_i w_i = 0 mod n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuWeights {
    pub n: u64,
    pub weights: Vec<i64>,
}

pub fn mu_invariant(weights: &MuWeights, f: &PolySparse) -> Result<bool, ActionError> {
    if weights.weights.len() != f.vars.len() {
        return Err(ActionError::VariableMismatch);
    }
    let n = weights.n as i128;
    Ok(f.terms.keys().all(|exps| {
        let w: i128 = exps
            .iter()
            .zip(&weights.weights)
            .map(|(&e, &w)| e as i128 * w as i128)
            .sum();
        w.rem_euclid(n) == 0
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Xyz,
    Uvy,
}

/// The canonical involutions in a chart where they are signed monomial
/// maps. In the `u,v,y` chart the rules `u = z + ix`, `v = z - ix` turn
/// the sign flips of `x` and `z` into (possibly signed) swaps of `u, v`.
pub fn form_map(form: char, chart: Chart, nvars: usize) -> Result<SignedMonomialMap, ActionError> {
    // images on the leading three variables; extras are fixed
    let head: Vec<(usize, i8)> = match (chart, form) {
        (Chart::Xyz, 'a') => vec![(0, 1), (1, -1), (2, 1)],
        (Chart::Xyz, 'b') => vec![(0, 1), (1, -1), (2, -1)],
        (Chart::Xyz, 'd') => vec![(0, -1), (1, 1), (2, -1)],
        (Chart::Xyz, 'f') => vec![(0, 1), (1, 1), (2, -1)],
        (Chart::Uvy, 'a') => vec![(0, 1), (1, 1), (2, -1)],
        (Chart::Uvy, 'b') => vec![(1, -1), (0, -1), (2, -1)],
        (Chart::Uvy, 'c') => vec![(0, -1), (1, 1), (2, -1)],
        (Chart::Uvy, 'd') => vec![(0, -1), (1, -1), (2, 1)],
        (Chart::Uvy, 'e') => vec![(0, -1), (1, -1), (2, -1)],
        (Chart::Uvy, 'f') => vec![(1, -1), (0, -1), (2, 1)],
        (Chart::Xyz, 'c') | (Chart::Xyz, 'e') => {
            return Err(ActionError::FormNotInChart {
                form,
                chart: "xyz".to_string(),
            })
        }
        _ => return Err(ActionError::BadTable(format!("unknown form {form}"))),
    };
    let mut images = head;
    for i in 3..nvars {
        images.push((i, 1));
    }
    Ok(SignedMonomialMap { images })
}

/// RDP family with an affine index `coeff * n + offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub family: String,
    #[serde(default)]
    pub coeff: i64,
    #[serde(default)]
    pub offset: i64,
}

impl Family {
    pub fn index(&self, n: i64) -> i64 {
        self.coeff * n + self.offset
    }

    pub fn label(&self) -> String {
        let idx = match (self.coeff, self.offset) {
            (0, k) => format!("{k}"),
            (1, 0) => "n".to_string(),
            (c, 0) => format!("{c}n"),
            (1, k) if k > 0 => format!("n+{k}"),
            (1, k) => format!("n-{}", -k),
            (c, k) if k > 0 => format!("{c}n+{k}"),
            (c, k) => format!("{c}n-{}", -k),
        };
        match self.family.as_str() {
            "All" => "all RDPs".to_string(),
            fam => format!("{fam}_{{{idx}}}"),
        }
    }

    /// Equation instances at index `m` in the requested chart. `All`
    /// expands to the whole catalogue.
    pub fn equations(&self, n: i64, chart: Chart) -> Vec<PolySparse> {
        match self.family.as_str() {
            "All" => vec![
                rdp_equation("E", 6, chart),
                rdp_equation("E", 7, chart),
                rdp_equation("E", 8, chart),
                rdp_equation("D", 4, chart),
                rdp_equation("A", 3, chart),
            ]
            .into_iter()
            .flatten()
            .collect(),
            fam => rdp_equation(fam, self.index(n), chart)
                .into_iter()
                .collect(),
        }
    }
}

/// Table of RDP equations. `A_m` is `uv + y^{m+1}` or `z^2 + x^2 +
/// y^{m+1}`; `D_m` (for `m >= 3`) is `z^2 + x y^2 + x^{m-1}`; `E_6, E_7,
/// E_8` as usual. Out-of-domain indices yield no instance.
pub fn rdp_equation(family: &str, m: i64, chart: Chart) -> Option<PolySparse> {
    match (family, chart) {
        ("A", Chart::Uvy) if m >= 0 => Some(
            PolySparse::new(&["u", "v", "y"])
                .with_term(&[1, 1, 0], 1)
                .with_term(&[0, 0, (m + 1) as u32], 1),
        ),
        ("A", Chart::Xyz) if m >= 0 => Some(
            PolySparse::new(&["x", "y", "z"])
                .with_term(&[0, 0, 2], 1)
                .with_term(&[2, 0, 0], 1)
                .with_term(&[0, (m + 1) as u32, 0], 1),
        ),
        ("D", Chart::Xyz) if m >= 3 => Some(
            PolySparse::new(&["x", "y", "z"])
                .with_term(&[0, 0, 2], 1)
                .with_term(&[1, 2, 0], 1)
                .with_term(&[(m - 1) as u32, 0, 0], 1),
        ),
        ("E", Chart::Xyz) => match m {
            6 => Some(
                PolySparse::new(&["x", "y", "z"])
                    .with_term(&[0, 0, 2], 1)
                    .with_term(&[3, 0, 0], 1)
                    .with_term(&[0, 4, 0], 1),
            ),
            7 => Some(
                PolySparse::new(&["x", "y", "z"])
                    .with_term(&[0, 0, 2], 1)
                    .with_term(&[1, 3, 0], 1)
                    .with_term(&[3, 0, 0], 1),
            ),
            8 => Some(
                PolySparse::new(&["x", "y", "z"])
                    .with_term(&[0, 0, 2], 1)
                    .with_term(&[3, 0, 0], 1)
                    .with_term(&[0, 5, 0], 1),
            ),
            _ => None,
        },
        ("B" | "Y", _) => None, // quotients, not RDPs
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XYCase {
    pub x: Family,
    pub y: Family,
}

/// One row of the action table as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub id: u32,
    pub r: u32,
    pub basis_forms: Vec<char>,
    pub i_x_size: u32,
    pub simple: bool,
    pub smoothable: bool,
    pub chart: Chart,
    pub cases: Vec<XYCase>,
    pub expected: BTreeMap<char, Equivariance>,
    pub n_values: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionTable {
    pub schema_version: u32,
    pub rows: Vec<TableRow>,
}

/// One flattened record: rows with several distinguishable quotients
/// (rows 1 and 2) expand to one record per X/Y pairing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionRecord {
    pub row: u32,
    pub r: u32,
    pub x_family: String,
    pub basis_forms: Vec<char>,
    pub y_family: String,
    pub i_x_size: u32,
    pub simple: bool,
    pub smoothable: bool,
    pub almost_simple: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

pub const TABLE_JSON: &str = include_str!("../data/rdp_actions.json");

pub fn load_table() -> Result<ActionTable, ActionError> {
    let table: ActionTable =
        serde_json::from_str(TABLE_JSON).map_err(|e| ActionError::BadTable(e.to_string()))?;
    if table.rows.len() != 13 {
        return Err(ActionError::BadTable(format!(
            "expected 13 rows, found {}",
            table.rows.len()
        )));
    }
    Ok(table)
}

pub fn load_table_from_str(text: &str) -> Result<ActionTable, ActionError> {
    serde_json::from_str(text).map_err(|e| ActionError::BadTable(e.to_string()))
}

/// The flattened record list; every action in the catalogue is almost
/// simple.
pub fn table() -> Result<Vec<ActionRecord>, ActionError> {
    let table = load_table()?;
    let mut out = Vec::new();
    for row in &table.rows {
        let expand = row.id <= 2;
        if expand {
            for case in &row.cases {
                out.push(ActionRecord {
                    row: row.id,
                    r: row.r,
                    x_family: case.x.label(),
                    basis_forms: row.basis_forms.clone(),
                    y_family: case.y.label(),
                    i_x_size: row.i_x_size,
                    simple: row.simple,
                    smoothable: row.smoothable,
                    almost_simple: true,
                    note: row.note.clone(),
                });
            }
        } else {
            let xs: Vec<String> = row.cases.iter().map(|c| c.x.label()).collect();
            let ys: Vec<String> = {
                let mut v: Vec<String> = row.cases.iter().map(|c| c.y.label()).collect();
                v.dedup();
                v
            };
            out.push(ActionRecord {
                row: row.id,
                r: row.r,
                x_family: xs.join(", "),
                basis_forms: row.basis_forms.clone(),
                y_family: ys.join(", "),
                i_x_size: row.i_x_size,
                simple: row.simple,
                smoothable: row.smoothable,
                almost_simple: true,
                note: row.note.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub schema_version: u32,
    pub items: Vec<CheckItem>,
    pub passed: bool,
}

/// Validates the shipped table: structural column facts, involution and
/// substitution checks for every listed form, weight checks for the
/// one-parameter smoothing families, and quotient cross-checks against
/// the singularity arithmetic.
pub fn consistency_check() -> Result<ConsistencyReport, ActionError> {
    let table = load_table()?;
    let mut items: Vec<CheckItem> = Vec::new();
    let mut push = |name: String, ok: bool, detail: String| {
        items.push(CheckItem { name, ok, detail });
    };

    // column facts
    let simple_rows: Vec<u32> = table
        .rows
        .iter()
        .filter(|r| r.simple)
        .map(|r| r.id)
        .collect();
    push(
        "simple rows".to_string(),
        simple_rows == vec![1, 6, 7, 8, 13],
        format!("{simple_rows:?}"),
    );
    let unsmoothable: Vec<u32> = table
        .rows
        .iter()
        .filter(|r| !r.smoothable)
        .map(|r| r.id)
        .collect();
    push(
        "non-smoothable rows".to_string(),
        unsmoothable == vec![2, 4, 9, 10, 11],
        format!("{unsmoothable:?}"),
    );
    for row in &table.rows {
        if row.simple {
            push(
                format!("row {}: simple => |I_x| = r", row.id),
                row.i_x_size == row.r,
                format!("|I_x| = {}, r = {}", row.i_x_size, row.r),
            );
            push(
                format!("row {}: simple => smoothable", row.id),
                row.smoothable,
                format!("{}", row.smoothable),
            );
        }
        push(
            format!("row {}: almost simple", row.id),
            row.i_x_size <= row.r,
            format!("|I_x| = {} <= r = {}", row.i_x_size, row.r),
        );
    }

    // involutions square to the identity in both charts
    for form in ['a', 'b', 'd', 'f'] {
        let m = form_map(form, Chart::Xyz, 3)?;
        push(
            format!("form {form} (xyz) is an involution"),
            m.is_involution(),
            String::new(),
        );
    }
    for form in ['a', 'b', 'c', 'd', 'e', 'f'] {
        let m = form_map(form, Chart::Uvy, 3)?;
        push(
            format!("form {form} (uvy) is an involution"),
            m.is_involution(),
            String::new(),
        );
    }

    // substitution checks per row
    for row in &table.rows {
        for form in &row.basis_forms {
            let expected = row.expected.get(form).copied().ok_or_else(|| {
                ActionError::BadTable(format!("row {} missing verdict for {form}", row.id))
            })?;
            for case in &row.cases {
                for &n in &row.n_values {
                    for eq in case.x.equations(n, row.chart) {
                        let map = form_map(*form, row.chart, eq.vars.len())?;
                        let verdict = is_invariant(&map, &eq)?;
                        push(
                            format!("row {}: {} under {form} at n={n}", row.id, case.x.label()),
                            verdict == expected,
                            format!("{verdict:?}, expected {expected:?}"),
                        );
                    }
                }
            }
        }
    }

    // the one-parameter family over the A_{2n} point stays anti-invariant
    // under c once the deformation parameter is carried along
    for n in 1..=5u32 {
        let family = PolySparse::new(&["u", "v", "y", "t"])
            .with_term(&[1, 1, 0, 0], 1)
            .with_term(&[0, 0, 2 * n + 1, 0], 1)
            .with_term(&[0, 0, 1, 1], 1);
        let map = form_map('c', Chart::Uvy, 4)?;
        let verdict = is_invariant(&map, &family)?;
        push(
            format!("smoothing family uv + y^{} + ty under c", 2 * n + 1),
            verdict == Equivariance::AntiInvariant,
            format!("{verdict:?}"),
        );
    }

    // weight check: the universal Q-Gorenstein family of 1/(dn^2)(1,dna-1)
    // is mu_n-invariant monomial by monomial with weights (1, -1, a, 0...)
    for d in 1..=4u64 {
        for n in 1..=5u64 {
            for a in 1..=n {
                if num_integer::Integer::gcd(&a, &n) != 1 {
                    continue;
                }
                let mut vars: Vec<String> = vec!["u".into(), "v".into(), "y".into()];
                for k in 0..d {
                    vars.push(format!("t{k}"));
                }
                let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
                let mut poly = PolySparse::new(&var_refs);
                let nv = vars.len();
                let mut exp = vec![0u32; nv];
                exp[0] = 1;
                exp[1] = 1;
                poly = poly.with_term(&exp, 1);
                let mut exp = vec![0u32; nv];
                exp[2] = (d * n) as u32;
                poly = poly.with_term(&exp, -1);
                for k in 0..d {
                    let mut exp = vec![0u32; nv];
                    exp[2] = (k * n) as u32;
                    exp[3 + k as usize] = 1;
                    poly = poly.with_term(&exp, -1);
                }
                let mut weights = vec![1i64, -1, a as i64];
                weights.extend(std::iter::repeat_n(0, d as usize));
                let ok = mu_invariant(&MuWeights { n, weights }, &poly)?;
                push(
                    format!("mu_{n} weights on the universal family d={d} a={a}"),
                    ok,
                    String::new(),
                );
            }
        }
    }

    // quotient cross-checks against the singularity arithmetic
    for n in 1..=6u64 {
        let (_, chain) = b_family(n);
        let (_, z2) = fundamental_cycle(&ResolutionGraph::chain(&chain))
            .map_err(|e| ActionError::BadTable(e.to_string()))?;
        push(
            format!("row 3 quotient B_{n}: Z^2"),
            z2 == -3,
            format!("Z^2 = {z2}"),
        );
        let (_, chain) = y_family_by_type(n);
        let (_, z2) = fundamental_cycle(&ResolutionGraph::chain(&chain))
            .map_err(|e| ActionError::BadTable(e.to_string()))?;
        push(
            format!(
                "row 5 quotient of type 1/({}) (1,{}): Z^2",
                4 * n,
                2 * n - 1
            ),
            z2 == -4,
            format!("Z^2 = {z2}"),
        );
    }

    let passed = items.iter().all(|i| i.ok);
    Ok(ConsistencyReport {
        schema_version: 1,
        items,
        passed,
    })
}
