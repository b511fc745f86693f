//! Integer lattices in Z^4, their Hermite normal form, and the cells of the
//! quotient torus R^4 / Λ.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Point = [i64; 4];

/// Upper-triangular lattice basis in Hermite normal form. Rows generate Λ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(into = "[[i64; 4]; 4]", try_from = "[[i64; 4]; 4]")]
pub struct HnfMatrix {
    a: [[i64; 4]; 4],
}

impl From<HnfMatrix> for [[i64; 4]; 4] {
    fn from(h: HnfMatrix) -> Self {
        h.a
    }
}

impl TryFrom<[[i64; 4]; 4]> for HnfMatrix {
    type Error = Error;

    fn try_from(a: [[i64; 4]; 4]) -> Result<Self> {
        HnfMatrix::new(a)
    }
}

impl HnfMatrix {
    /// Wraps a matrix that must already satisfy the HNF invariants.
    pub fn new(a: [[i64; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            if a[i][i] < 1 {
                return Err(Error::Invalid(format!("diagonal entry a{}{} = {} must be positive", i + 1, i + 1, a[i][i])));
            }
            for j in 0..4 {
                if i > j && a[i][j] != 0 {
                    return Err(Error::Invalid(format!("entry a{}{} below the diagonal must be zero", i + 1, j + 1)));
                }
                if i < j && !(0..a[j][j]).contains(&a[i][j]) {
                    return Err(Error::Invalid(format!(
                        "entry a{}{} = {} must lie in [0, {})",
                        i + 1,
                        j + 1,
                        a[i][j],
                        a[j][j]
                    )));
                }
            }
        }
        let h = Self { a };
        if h.determinant() == 1 {
            log::warn!("lattice has determinant 1: single-vertex torus, code is [[6,6,1]]");
        }
        Ok(h)
    }

    /// Builds from the ten upper-triangular entries in row order
    /// `a11 a12 a13 a14 a22 a23 a24 a33 a34 a44`.
    pub fn from_upper(e: [i64; 10]) -> Result<Self> {
        Self::new([[e[0], e[1], e[2], e[3]], [0, e[4], e[5], e[6]], [0, 0, e[7], e[8]], [0, 0, 0, e[9]]])
    }

    pub fn upper(&self) -> [i64; 10] {
        let a = &self.a;
        [a[0][0], a[0][1], a[0][2], a[0][3], a[1][1], a[1][2], a[1][3], a[2][2], a[2][3], a[3][3]]
    }

    pub fn identity() -> Self {
        Self { a: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]] }
    }

    pub fn rows(&self) -> &[[i64; 4]; 4] {
        &self.a
    }

    pub fn row(&self, i: usize) -> Point {
        self.a[i]
    }

    pub fn diag(&self, i: usize) -> i64 {
        self.a[i][i]
    }

    pub fn determinant(&self) -> i64 {
        (0..4).map(|i| self.a[i][i]).product()
    }

    /// Number of torus vertices, `Det(L)`.
    pub fn num_points(&self) -> usize {
        self.determinant() as usize
    }

    pub fn canonicalize(&self, p: Point) -> Point {
        canonicalize_point(p, self)
    }

    pub fn contains(&self, v: Point) -> bool {
        self.canonicalize(v) == [0; 4]
    }

    /// Mixed-radix index of a canonical point; lexicographic order.
    pub fn point_index(&self, p: &Point) -> usize {
        let mut idx = 0i64;
        for i in 0..4 {
            debug_assert!((0..self.a[i][i]).contains(&p[i]), "point {p:?} is not canonical");
            idx = idx * self.a[i][i] + p[i];
        }
        idx as usize
    }

    pub fn point_at(&self, mut idx: usize) -> Point {
        let mut p = [0; 4];
        for i in (0..4).rev() {
            let r = self.a[i][i] as usize;
            p[i] = (idx % r) as i64;
            idx /= r;
        }
        p
    }

    /// All canonical points in index order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.num_points()).map(|i| self.point_at(i))
    }

    /// Whether some unit vector lies in Λ. On such lattices opposite faces of
    /// a cell are identified and stabilizer weights collapse below 6.
    pub fn has_unit_period(&self) -> bool {
        (0..4).any(|d| self.contains(unit(d)))
    }
}

impl fmt::Display for HnfMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = self.upper();
        let parts: Vec<String> = u.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn unit(d: usize) -> Point {
    let mut p = [0; 4];
    p[d] = 1;
    p
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// Reduces an arbitrary integer basis to Hermite normal form.
pub fn hnf_reduce(basis: [[i64; 4]; 4]) -> Result<HnfMatrix> {
    let mut a: Vec<[i128; 4]> = basis.iter().map(|r| r.map(i128::from)).collect();
    for col in 0..4 {
        // Euclid on column `col` among rows col..4 until a single nonzero remains.
        loop {
            let nonzero: Vec<usize> = (col..4).filter(|&r| a[r][col] != 0).collect();
            if nonzero.is_empty() {
                return Err(Error::DegenerateLattice);
            }
            let pivot = *nonzero.iter().min_by_key(|&&r| a[r][col].abs()).unwrap();
            if nonzero.len() == 1 {
                a.swap(col, pivot);
                break;
            }
            for &r in &nonzero {
                if r != pivot {
                    let q = a[r][col].div_euclid(a[pivot][col]);
                    let prow = a[pivot];
                    for c in 0..4 {
                        a[r][c] -= q * prow[c];
                    }
                }
            }
        }
        if a[col][col] < 0 {
            for c in 0..4 {
                a[col][c] = -a[col][c];
            }
        }
        let prow = a[col];
        for r in 0..col {
            let q = a[r][col].div_euclid(prow[col]);
            for c in 0..4 {
                a[r][c] -= q * prow[c];
            }
        }
    }
    let mut out = [[0i64; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = i64::try_from(a[r][c]).map_err(|_| Error::Invalid("lattice entries overflow i64".into()))?;
        }
    }
    HnfMatrix::new(out)
}

pub fn determinant(h: &HnfMatrix) -> i64 {
    h.determinant()
}

/// Canonical coset representative with `0 <= x_i < a_ii`.
pub fn canonicalize_point(mut p: Point, h: &HnfMatrix) -> Point {
    for i in 0..4 {
        let q = p[i].div_euclid(h.a[i][i]);
        if q != 0 {
            for (j, x) in p.iter_mut().enumerate().skip(i) {
                *x -= q * h.a[i][j];
            }
        }
    }
    p
}

/// Direction subsets of size `k` in lexicographic combination order,
/// encoded as 4-bit masks.
pub fn dir_subsets(k: usize) -> &'static [u8] {
    const S0: [u8; 1] = [0b0000];
    const S1: [u8; 4] = [0b0001, 0b0010, 0b0100, 0b1000];
    const S2: [u8; 6] = [0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100];
    const S3: [u8; 4] = [0b0111, 0b1011, 0b1101, 0b1110];
    const S4: [u8; 1] = [0b1111];
    match k {
        0 => &S0,
        1 => &S1,
        2 => &S2,
        3 => &S3,
        4 => &S4,
        _ => &[],
    }
}

pub fn dir_subset_index(dirs: u8) -> usize {
    let k = dirs.count_ones() as usize;
    dir_subsets(k).iter().position(|&d| d == dirs).expect("valid direction mask")
}

/// A k-cell: canonical base point plus its free directions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Cell {
    pub base: Point,
    pub dirs: u8,
}

impl Cell {
    pub fn new(base: Point, dirs: u8, h: &HnfMatrix) -> Self {
        Self { base: h.canonicalize(base), dirs }
    }

    pub fn dim(&self) -> usize {
        self.dirs.count_ones() as usize
    }

    pub fn has_dir(&self, d: usize) -> bool {
        self.dirs >> d & 1 == 1
    }

    /// Index within the list of cells of the same dimension.
    pub fn index(&self, h: &HnfMatrix) -> usize {
        dir_subset_index(self.dirs) * h.num_points() + h.point_index(&self.base)
    }

    pub fn from_index(k: usize, idx: usize, h: &HnfMatrix) -> Self {
        let det = h.num_points();
        Self { base: h.point_at(idx % det), dirs: dir_subsets(k)[idx / det] }
    }

    /// Cell label in the `(⊔⊔00)_p` style with `_` for free directions.
    pub fn label(&self) -> String {
        let holes: String = (0..4).map(|d| if self.has_dir(d) { '_' } else { '0' }).collect();
        format!("({holes})@{:?}", self.base)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn num_cells(h: &HnfMatrix, k: usize) -> usize {
    dir_subsets(k).len() * h.num_points()
}

pub fn enumerate_cells(h: &HnfMatrix, k: usize) -> Result<Vec<Cell>> {
    if k > 4 {
        return Err(Error::DimensionOutOfRange { dim: k });
    }
    Ok(dir_subsets(k).iter().flat_map(|&dirs| h.points().map(move |base| Cell { base, dirs })).collect())
}

/// Boundary (`delta = -1`) or coboundary (`delta = +1`) cells, with
/// multiplicity; coinciding pairs are not cancelled here.
pub fn incident_cells(c: &Cell, h: &HnfMatrix, delta: i32) -> Result<Vec<Cell>> {
    let dim = c.dim();
    match delta {
        -1 => {
            if dim == 0 {
                return Err(Error::DimensionOutOfRange { dim });
            }
            let mut out = Vec::with_capacity(2 * dim);
            for d in (0..4).filter(|&d| c.has_dir(d)) {
                let dirs = c.dirs & !(1 << d);
                out.push(Cell { base: c.base, dirs });
                out.push(Cell::new(add(c.base, unit(d)), dirs, h));
            }
            Ok(out)
        }
        1 => {
            if dim == 4 {
                return Err(Error::DimensionOutOfRange { dim });
            }
            let mut out = Vec::with_capacity(2 * (4 - dim));
            for d in (0..4).filter(|&d| !c.has_dir(d)) {
                let dirs = c.dirs | (1 << d);
                out.push(Cell { base: c.base, dirs });
                out.push(Cell::new(sub(c.base, unit(d)), dirs, h));
            }
            Ok(out)
        }
        _ => Err(Error::Invalid(format!("delta must be +1 or -1, got {delta}"))),
    }
}

/// All HNFs with the given determinant, in lexicographic order of their
/// upper entries. Intended for small determinants.
pub fn hnfs_with_determinant(det: i64) -> impl Iterator<Item = HnfMatrix> {
    let divisors: Vec<i64> = (1..=det.max(0)).filter(|d| det % d == 0).collect();
    let mut diags = Vec::new();
    for &a in &divisors {
        for &b in &divisors {
            for &c in &divisors {
                if (a * b * c) != 0 && det % (a * b * c) == 0 {
                    diags.push([a, b, c, det / (a * b * c)]);
                }
            }
        }
    }
    diags.into_iter().flat_map(|dg| {
        let [a, b, c, d] = dg;
        let mut v = Vec::new();
        for a12 in 0..b {
            for a13 in 0..c {
                for a23 in 0..c {
                    for a14 in 0..d {
                        for a24 in 0..d {
                            for a34 in 0..d {
                                v.push(HnfMatrix { a: [[a, a12, a13, a14], [0, b, a23, a24], [0, 0, c, a34], [0, 0, 0, d]] });
                            }
                        }
                    }
                }
            }
        }
        v
    })
}

/// User-facing lattice description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum LatticeSpec {
    #[serde(rename = "basis")]
    Basis([[i64; 4]; 4]),
    #[serde(rename = "hnf")]
    Hnf([[i64; 4]; 4]),
}

impl LatticeSpec {
    pub fn to_hnf(&self) -> Result<HnfMatrix> {
        match self {
            LatticeSpec::Basis(b) => hnf_reduce(*b),
            LatticeSpec::Hnf(a) => HnfMatrix::new(*a),
        }
    }
}

/// Parses `a11,a12,a13,a14,a22,a23,a24,a33,a34,a44`.
pub fn parse_hnf_shorthand(s: &str) -> Result<HnfMatrix> {
    let nums: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Invalid(format!("bad HNF entry {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    let arr: [i64; 10] =
        nums.try_into().map_err(|v: Vec<i64>| Error::Invalid(format!("expected 10 HNF entries, got {}", v.len())))?;
    HnfMatrix::from_upper(arr)
}

/// A named lattice with its published distance (an upper bound when
/// `distance_is_bound`).
#[derive(Clone, Copy, Debug)]
pub struct NamedLattice {
    pub name: &'static str,
    pub upper: [i64; 10],
    pub distance: usize,
    pub distance_is_bound: bool,
}

impl NamedLattice {
    pub fn hnf(&self) -> HnfMatrix {
        HnfMatrix::from_upper(self.upper).expect("catalog entry is in HNF")
    }
}

/// Lattices with optimal known parameters for their determinant.
pub const PARAMETER_LATTICES: [NamedLattice; 10] = [
    NamedLattice { name: "Det2", upper: [1, 0, 0, 1, 1, 0, 1, 1, 0, 2], distance: 2, distance_is_bound: false },
    NamedLattice { name: "Det3", upper: [1, 0, 0, 1, 1, 0, 1, 1, 1, 3], distance: 3, distance_is_bound: false },
    NamedLattice { name: "Det5", upper: [1, 0, 0, 1, 1, 0, 2, 1, 3, 5], distance: 4, distance_is_bound: false },
    NamedLattice { name: "Det9", upper: [1, 0, 0, 5, 1, 0, 6, 1, 7, 9], distance: 6, distance_is_bound: false },
    NamedLattice { name: "Hadamard", upper: [1, 1, 1, 1, 2, 0, 2, 2, 2, 4], distance: 8, distance_is_bound: false },
    NamedLattice { name: "Det16", upper: [1, 0, 0, 3, 1, 0, 5, 1, 7, 16], distance: 8, distance_is_bound: false },
    NamedLattice { name: "Det18", upper: [1, 0, 0, 3, 1, 0, 5, 1, 7, 18], distance: 9, distance_is_bound: false },
    NamedLattice { name: "Det45", upper: [1, 0, 1, 6, 1, 0, 11, 3, 9, 15], distance: 15, distance_is_bound: false },
    NamedLattice { name: "Det68", upper: [1, 0, 0, 21, 1, 1, 24, 2, 30, 34], distance: 18, distance_is_bound: true },
    NamedLattice { name: "Det152", upper: [1, 0, 0, 115, 1, 0, 124, 1, 136, 152], distance: 30, distance_is_bound: true },
];

/// Lattices used for circuit-level simulation.
pub const SIMULATION_LATTICES: [NamedLattice; 6] = [
    NamedLattice { name: "Det3", upper: [1, 0, 0, 1, 1, 0, 1, 1, 1, 3], distance: 3, distance_is_bound: false },
    NamedLattice { name: "Det9a", upper: [1, 0, 0, 5, 1, 0, 6, 1, 7, 9], distance: 6, distance_is_bound: false },
    NamedLattice { name: "Det9b", upper: [1, 0, 0, 4, 1, 0, 6, 1, 7, 9], distance: 6, distance_is_bound: false },
    NamedLattice { name: "Hadamard", upper: [1, 1, 1, 1, 2, 0, 2, 2, 2, 4], distance: 8, distance_is_bound: false },
    NamedLattice { name: "Det16", upper: [1, 0, 0, 3, 1, 0, 5, 1, 7, 16], distance: 8, distance_is_bound: false },
    NamedLattice { name: "Det45", upper: [1, 0, 1, 6, 1, 0, 11, 3, 9, 15], distance: 15, distance_is_bound: false },
];

pub fn named_lattice(name: &str) -> Option<NamedLattice> {
    PARAMETER_LATTICES.iter().chain(SIMULATION_LATTICES.iter()).find(|l| l.name.eq_ignore_ascii_case(name)).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hadamard_basis() -> [[i64; 4]; 4] {
        [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]]
    }

    #[test]
    fn hadamard_reduces_to_expected_hnf() {
        let h = hnf_reduce(hadamard_basis()).unwrap();
        assert_eq!(h.rows(), &[[1, 1, 1, 1], [0, 2, 0, 2], [0, 0, 2, 2], [0, 0, 0, 4]]);
        assert_eq!(h.determinant(), 16);
        assert_eq!(h, named_lattice("Hadamard").unwrap().hnf());
    }

    #[test]
    fn catalog_determinants() {
        for l in PARAMETER_LATTICES {
            let det: i64 = l.name.trim_start_matches("Det").parse().unwrap_or(16);
            assert_eq!(l.hnf().determinant(), det, "{}", l.name);
        }
    }

    #[test]
    fn singular_basis_rejected() {
        let b = [[1, 2, 3, 4], [2, 4, 6, 8], [0, 0, 1, 0], [0, 0, 0, 1]];
        assert!(matches!(hnf_reduce(b), Err(Error::DegenerateLattice)));
    }

    #[test]
    fn identity_is_fixed() {
        assert_eq!(hnf_reduce(*HnfMatrix::identity().rows()).unwrap(), HnfMatrix::identity());
    }

    /// Brute-force coset oracle: search integer combinations in a box for the
    /// unique representative inside the fundamental box.
    fn brute_canonical(p: Point, h: &HnfMatrix) -> Point {
        let r = 6;
        let mut found = None;
        for c0 in -r..=r {
            for c1 in -r..=r {
                for c2 in -r..=r {
                    for c3 in -r..=r {
                        let c = [c0, c1, c2, c3];
                        let mut q = p;
                        for i in 0..4 {
                            for j in 0..4 {
                                q[j] -= c[i] * h.row(i)[j];
                            }
                        }
                        if (0..4).all(|i| (0..h.diag(i)).contains(&q[i])) {
                            assert!(found.is_none() || found == Some(q), "two representatives");
                            found = Some(q);
                        }
                    }
                }
            }
        }
        found.expect("representative within search box")
    }

    #[test]
    fn det3_canonicalize_matches_brute_force() {
        let h = named_lattice("Det3").unwrap().hnf();
        assert_eq!(canonicalize_point([2, 0, 0, 0], &h), brute_canonical([2, 0, 0, 0], &h));
        for p in [[0, 0, 0, 0], [1, -1, 2, 5], [-3, 2, 0, -1], [0, 0, 0, 7]] {
            assert_eq!(canonicalize_point(p, &h), brute_canonical(p, &h));
        }
        for i in 0..4 {
            assert_eq!(canonicalize_point(h.row(i), &h), [0; 4]);
        }
    }

    #[test]
    fn cell_counts() {
        let had = named_lattice("Hadamard").unwrap().hnf();
        assert_eq!(enumerate_cells(&had, 2).unwrap().len(), 96);
        let det3 = named_lattice("Det3").unwrap().hnf();
        let edges = enumerate_cells(&det3, 1).unwrap();
        assert_eq!(edges.len(), 12);
        // Cross-check by exhaustive enumeration of canonical points in a box.
        let mut seen = std::collections::HashSet::new();
        for x in -3..3 {
            for y in -3..3 {
                for z in -3..3 {
                    for w in -3..6 {
                        for d in 0..4 {
                            seen.insert(Cell::new([x, y, z, w], 1 << d, &det3));
                        }
                    }
                }
            }
        }
        assert_eq!(seen.len(), 12);
        assert!(enumerate_cells(&det3, 5).is_err());
        for k in 0..=4 {
            let cells = enumerate_cells(&had, k).unwrap();
            for (i, c) in cells.iter().enumerate() {
                assert_eq!(c.index(&had), i);
                assert_eq!(Cell::from_index(k, i, &had), *c);
            }
        }
    }

    #[test]
    fn incidence_counts() {
        let h = named_lattice("Hadamard").unwrap().hnf();
        let c4 = enumerate_cells(&h, 4).unwrap()[0];
        let b: std::collections::HashSet<_> = incident_cells(&c4, &h, -1).unwrap().into_iter().collect();
        assert_eq!(b.len(), 8);
        let e = enumerate_cells(&h, 1).unwrap()[5];
        assert_eq!(incident_cells(&e, &h, 1).unwrap().len(), 6);
        let v = enumerate_cells(&h, 0).unwrap()[3];
        let cb: std::collections::HashSet<_> = incident_cells(&v, &h, 1).unwrap().into_iter().collect();
        assert_eq!(cb.len(), 8);
        assert!(incident_cells(&v, &h, -1).is_err());
        assert!(incident_cells(&c4, &h, 1).is_err());
    }

    #[test]
    fn incidence_round_trip() {
        for l in SIMULATION_LATTICES {
            let h = l.hnf();
            for k in 1..=4 {
                for c in enumerate_cells(&h, k).unwrap() {
                    for f in incident_cells(&c, &h, -1).unwrap() {
                        assert!(incident_cells(&f, &h, 1).unwrap().contains(&c));
                    }
                }
            }
        }
    }

    #[test]
    fn hnf_enumeration_small() {
        // Number of sublattices of index n in Z^4 is multiplicative; for n = 2
        // it is 2^4 - 1 = 15.
        assert_eq!(hnfs_with_determinant(2).count(), 15);
        assert_eq!(hnfs_with_determinant(1).count(), 1);
    }

    #[test]
    fn shorthand_and_json() {
        let h = parse_hnf_shorthand("1,0,0,1,1,0,1,1,0,2").unwrap();
        assert_eq!(h.determinant(), 2);
        assert!(parse_hnf_shorthand("1,0,0").is_err());
        let spec: LatticeSpec = serde_json::from_str(r#"{"basis": [[1,1,1,1],[1,-1,1,-1],[1,1,-1,-1],[1,-1,-1,1]]}"#).unwrap();
        assert_eq!(spec.to_hnf().unwrap().determinant(), 16);
        assert!(serde_json::from_str::<LatticeSpec>(r#"{"lattice": []}"#).is_err());
        let bad: LatticeSpec = serde_json::from_str(r#"{"hnf": [[1,5,0,0],[0,2,0,0],[0,0,1,0],[0,0,0,1]]}"#).unwrap();
        assert!(bad.to_hnf().is_err());
    }

    fn arb_basis() -> impl Strategy<Value = [[i64; 4]; 4]> {
        proptest::array::uniform4(proptest::array::uniform4(-4i64..=4))
    }

    fn int_det(m: &[[i64; 4]; 4]) -> i64 {
        // Laplace expansion is fine for 4x4.
        fn det(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|c| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                        .collect();
                    let s = if c % 2 == 0 { 1 } else { -1 };
                    s * m[0][c] * det(&minor)
                })
                .sum()
        }
        det(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    proptest! {
        #[test]
        fn hnf_preserves_lattice(b in arb_basis()) {
            let d = int_det(&b);
            match hnf_reduce(b) {
                Err(_) => prop_assert_eq!(d, 0),
                Ok(h) => {
                    prop_assert_eq!(h.determinant(), d.abs());
                    // Each input row lies in the HNF lattice; equal determinants
                    // then force equality of lattices.
                    for r in &b {
                        prop_assert!(h.contains(*r));
                    }
                    prop_assert_eq!(hnf_reduce(*h.rows()).unwrap(), h);
                }
            }
        }

        #[test]
        fn canonicalize_is_retraction(p in proptest::array::uniform4(-50i64..50), c in proptest::array::uniform4(-5i64..5)) {
            let h = named_lattice("Det45").unwrap().hnf();
            let q = canonicalize_point(p, &h);
            prop_assert_eq!(canonicalize_point(q, &h), q);
            let mut shifted = p;
            for i in 0..4 {
                for j in 0..4 {
                    shifted[j] += c[i] * h.row(i)[j];
                }
            }
            prop_assert_eq!(canonicalize_point(shifted, &h), q);
            for i in 0..4 {
                prop_assert!((0..h.diag(i)).contains(&q[i]));
            }
        }
    }
}
