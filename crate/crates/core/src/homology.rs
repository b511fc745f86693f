//! Logical operators and code distance.
//!
//! X-logicals live in `ker(hz)`, which on the torus is the space of
//! 2-cocycles; Z-logicals live in `ker(hx)`, the 2-cycles. Stabilizers are
//! the coboundaries and boundaries respectively.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{boundary_matrix, CssCode};
use crate::f2::{BitMatrix, BitVec, F2Matrix, RowBasis};
use crate::lattice::{add, dir_subset_index, enumerate_cells, unit, Cell, HnfMatrix};
use crate::{Error, Result};

/// Labels of the six logical qubits, one per pair of torus directions.
pub const LOGICAL_LABELS: [&str; 6] = ["01", "02", "03", "12", "13", "23"];

/// Pauli type of an operator or error.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Sector {
    X,
    Z,
}

impl Sector {
    pub fn other(self) -> Sector {
        match self {
            Sector::X => Sector::Z,
            Sector::Z => Sector::X,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub dim: usize,
    pub support: BitVec,
}

#[derive(Clone, Debug)]
pub struct LogicalBasis {
    pub lx: Vec<BitVec>,
    pub lz: Vec<BitVec>,
    /// `pairing[i][j] = lx_i · lz_j`.
    pub pairing: BitMatrix,
}

impl LogicalBasis {
    pub fn k(&self) -> usize {
        self.lx.len()
    }

    pub fn ops(&self, s: Sector) -> &[BitVec] {
        match s {
            Sector::X => &self.lx,
            Sector::Z => &self.lz,
        }
    }

    /// Logical flips caused by an error of type `s`: bit `j` is set when the
    /// error anticommutes with the j-th logical of the opposite type.
    pub fn flips(&self, s: Sector, err: &BitVec) -> u8 {
        let mut m = 0u8;
        for (j, l) in self.ops(s.other()).iter().enumerate() {
            if l.dot(err) {
                m |= 1 << j;
            }
        }
        m
    }

    fn with_pairing(lx: Vec<BitVec>, lz: Vec<BitVec>) -> Self {
        let k = lx.len();
        let mut pairing = BitMatrix::zeros(k, lz.len());
        for (i, a) in lx.iter().enumerate() {
            for (j, b) in lz.iter().enumerate() {
                pairing.set(i, j, a.dot(b));
            }
        }
        Self { lx, lz, pairing }
    }

    /// Checks kernel membership, nontriviality and the identity pairing.
    pub fn verify(&self, code: &CssCode) -> Result<()> {
        let hx = code.hx.to_dense();
        let hz = code.hz.to_dense();
        let sx = RowBasis::from_rows(code.n, hx.rows());
        let sz = RowBasis::from_rows(code.n, hz.rows());
        for (i, l) in self.lx.iter().enumerate() {
            if !hz.mul_vec(l).is_zero() || sx.contains(l) {
                return Err(Error::Invalid(format!("X-logical {i} is not a nontrivial element of ker(hz)")));
            }
        }
        for (i, l) in self.lz.iter().enumerate() {
            if !hx.mul_vec(l).is_zero() || sz.contains(l) {
                return Err(Error::Invalid(format!("Z-logical {i} is not a nontrivial element of ker(hx)")));
            }
        }
        if self.pairing != BitMatrix::identity(self.k()) {
            return Err(Error::Invalid("logical pairing is not the identity".into()));
        }
        Ok(())
    }
}

/// Vectors of `candidates` that extend the span of `base`, in order.
fn extend_span(base: &mut RowBasis, candidates: impl IntoIterator<Item = BitVec>) -> Vec<BitVec> {
    candidates.into_iter().filter(|v| base.insert(v.clone())).collect()
}

/// For each target unit vector `e_j` (j < targets), a combination of
/// `vectors` whose `key` equals `e_j`. `keys[i]` is the key of `vectors[i]`.
fn solve_unit_keys(vectors: &[BitVec], keys: &[u64], targets: usize) -> Option<Vec<BitVec>> {
    // Echelon over key bits, tracking the combined vector.
    let mut rows: Vec<(u64, BitVec)> = Vec::new();
    for (v, &k) in vectors.iter().zip(keys) {
        let mut key = k;
        let mut vec = v.clone();
        for (rk, rv) in &rows {
            let pivot = 1u64 << rk.trailing_zeros();
            if key & pivot != 0 {
                key ^= rk;
                vec.xor_assign(rv);
            }
        }
        if key != 0 {
            // Keep rows fully reduced on each other's pivots.
            let pivot = 1u64 << key.trailing_zeros();
            for (rk, rv) in rows.iter_mut() {
                if *rk & pivot != 0 {
                    *rk ^= key;
                    rv.xor_assign(&vec);
                }
            }
            rows.push((key, vec));
        }
    }
    (0..targets)
        .map(|j| rows.iter().find(|(k, _)| *k == 1u64 << j).map(|(_, v)| v.clone()))
        .collect()
}

/// Symplectic extraction: nontrivial kernel vectors on each side, then a
/// change of Z-basis making the pairing the identity.
pub fn logical_basis_linear(code: &CssCode) -> LogicalBasis {
    let hx = code.hx.to_dense();
    let hz = code.hz.to_dense();
    let mut sx = RowBasis::from_rows(code.n, hx.rows());
    let mut sz = RowBasis::from_rows(code.n, hz.rows());
    let lx = extend_span(&mut sx, hz.kernel());
    let lz_raw = extend_span(&mut sz, hx.kernel());
    let keys: Vec<u64> = lz_raw
        .iter()
        .map(|z| lx.iter().enumerate().fold(0u64, |m, (i, x)| m | (u64::from(x.dot(z)) << i)))
        .collect();
    let lz = solve_unit_keys(&lz_raw, &keys, lx.len()).expect("symplectic pairing between logical spaces is perfect");
    LogicalBasis::with_pairing(lx, lz)
}

/// Edges of the closed walk from the origin along the lattice vector
/// `row`, stepping through axes 0..4 in order. Entries must be nonnegative.
pub fn row_cycle(h: &HnfMatrix, row: [i64; 4]) -> BitVec {
    let mut v = BitVec::zeros(4 * h.num_points());
    let mut p = [0i64; 4];
    for (d, &steps) in row.iter().enumerate() {
        assert!(steps >= 0, "walk requires nonnegative steps");
        for _ in 0..steps {
            v.flip(Cell::new(p, 1 << d, h).index(h));
            p = add(p, unit(d));
        }
    }
    v
}

/// Four 1-cocycles `α_i` with `α_i` evaluating to `δ_ij` on the walk along
/// row `j` of the HNF.
pub fn one_cocycle_basis(h: &HnfMatrix) -> Vec<Cochain> {
    // δ_1 = ∂_2^T: rows are faces, columns edges.
    let delta1 = boundary_matrix(h, 2).expect("k in range").transpose().to_dense();
    let kernel = delta1.kernel();
    let cycles: Vec<BitVec> = (0..4).map(|j| row_cycle(h, h.row(j))).collect();
    let keys: Vec<u64> = kernel
        .iter()
        .map(|a| cycles.iter().enumerate().fold(0u64, |m, (j, c)| m | (u64::from(a.dot(c)) << j)))
        .collect();
    solve_unit_keys(&kernel, &keys, 4)
        .expect("walks along HNF rows generate first homology")
        .into_iter()
        .map(|support| Cochain { dim: 1, support })
        .collect()
}

pub fn is_cocycle(c: &Cochain, h: &HnfMatrix) -> bool {
    if c.dim >= 4 {
        return true;
    }
    let delta = boundary_matrix(h, c.dim + 1).expect("k in range").transpose();
    delta.mul_vec(&c.support).is_zero()
}

/// Cup-product formula on 1-cocycles.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub enum CupConvention {
    /// `α(p, i) β(p + e_i, j)` on the face `(p, {i < j})`.
    SingleTerm,
    /// Sum over both two-edge paths from `p` to `p + e_i + e_j`:
    /// `α(p, i) β(p + e_i, j) + α(p, j) β(p + e_j, i)`.
    #[default]
    TwoPath,
}

pub fn cup_product(a: &Cochain, b: &Cochain, h: &HnfMatrix, convention: CupConvention) -> Result<Cochain> {
    if a.dim != 1 || b.dim != 1 {
        return Err(Error::DimensionOutOfRange { dim: a.dim.max(b.dim) });
    }
    if !is_cocycle(a, h) || !is_cocycle(b, h) {
        return Err(Error::NotCocycle);
    }
    Ok(cup_unchecked(a, b, h, convention))
}

fn cup_unchecked(a: &Cochain, b: &Cochain, h: &HnfMatrix, convention: CupConvention) -> Cochain {
    let det = h.num_points();
    let edge = |p: [i64; 4], d: usize| Cell::new(p, 1 << d, h).index(h);
    let faces = enumerate_cells(h, 2).expect("k in range");
    let mut support = BitVec::zeros(faces.len());
    for (idx, f) in faces.iter().enumerate() {
        let dirs: Vec<usize> = (0..4).filter(|&d| f.has_dir(d)).collect();
        let (i, j) = (dirs[0], dirs[1]);
        let p = f.base;
        let mut val = a.support.get(edge(p, i)) && b.support.get(edge(add(p, unit(i)), j));
        if convention == CupConvention::TwoPath {
            val ^= a.support.get(edge(p, j)) && b.support.get(edge(add(p, unit(j)), i));
        }
        support.set(idx, val);
    }
    debug_assert_eq!(support.len(), 6 * det);
    Cochain { dim: 2, support }
}

/// Logical basis whose X-logicals are the cups `α_i ∪ α_j` (i < j, in label
/// order) and whose Z-logicals are chosen in `ker(hx)` dual to them.
pub fn cup_logical_basis(h: &HnfMatrix, code: &CssCode, convention: CupConvention) -> Result<LogicalBasis> {
    let alphas = one_cocycle_basis(h);
    let hx = code.hx.to_dense();
    let mut sx = RowBasis::from_rows(code.n, hx.rows());
    let mut lx = Vec::with_capacity(6);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let c = cup_product(&alphas[i], &alphas[j], h, convention)?;
            if !code.hz.mul_vec(&c.support).is_zero() || !sx.insert(c.support.clone()) {
                return Err(Error::DegenerateCup(i, j));
            }
            lx.push(c.support);
        }
    }
    let kernel = hx.kernel();
    let keys: Vec<u64> = kernel
        .iter()
        .map(|z| lx.iter().enumerate().fold(0u64, |m, (i, x)| m | (u64::from(x.dot(z)) << i)))
        .collect();
    let lz = solve_unit_keys(&kernel, &keys, 6).ok_or(Error::DegenerateCup(0, 0))?;
    Ok(LogicalBasis::with_pairing(lx, lz))
}

/// Whether two bases span the same logical classes on both sides.
pub fn same_logical_span(code: &CssCode, a: &LogicalBasis, b: &LogicalBasis) -> bool {
    let side = |stab: &F2Matrix, x: &[BitVec], y: &[BitVec]| {
        let dense = stab.to_dense();
        let base = RowBasis::from_rows(code.n, dense.rows());
        let mut with_x = base.clone();
        x.iter().for_each(|v| {
            with_x.insert(v.clone());
        });
        let mut with_y = base;
        y.iter().for_each(|v| {
            with_y.insert(v.clone());
        });
        with_x.rank() == with_y.rank() && y.iter().all(|v| with_x.contains(v))
    };
    side(&code.hx, &a.lx, &b.lx) && side(&code.hz, &a.lz, &b.lz)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMethod {
    Exact,
    Probabilistic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceReport {
    pub dx: usize,
    pub dz: usize,
    pub d: usize,
    pub method: DistanceMethod,
    /// Minimum-weight X-logical found, as qubit indices.
    pub certificate_x: Vec<usize>,
    pub certificate_z: Vec<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// Best `(dx, dz)` after every 1000 trials.
    pub trace: Vec<(usize, usize)>,
}

impl DistanceReport {
    pub fn verify(&self, code: &CssCode, basis: &LogicalBasis) -> Result<()> {
        for (s, cert, w) in [(Sector::X, &self.certificate_x, self.dx), (Sector::Z, &self.certificate_z, self.dz)] {
            let v = BitVec::from_indices(code.n, cert.iter().copied());
            if v.weight() != w || !is_nontrivial_logical(code, basis, s, &v) {
                return Err(Error::Invalid(format!("{s:?} distance certificate does not verify")));
            }
        }
        Ok(())
    }
}

/// Kernel membership plus nonzero pairing with the opposite logicals.
pub fn is_nontrivial_logical(code: &CssCode, basis: &LogicalBasis, s: Sector, v: &BitVec) -> bool {
    let checks = match s {
        Sector::X => &code.hz,
        Sector::Z => &code.hx,
    };
    checks.mul_vec(v).is_zero() && basis.flips(s, v) != 0
}

struct ExactSearch {
    /// Check-syndrome of each column, packed into `u128`.
    cols: Vec<u128>,
    /// Pairing of each column with the opposite logicals.
    logical: Vec<u8>,
    max_col_weight: u32,
}

impl ExactSearch {
    fn new(code: &CssCode, basis: &LogicalBasis, s: Sector) -> Result<Self> {
        let checks = match s {
            Sector::X => &code.hz,
            Sector::Z => &code.hx,
        };
        if checks.num_rows() > 128 {
            return Err(Error::Invalid("exact distance search supports at most 128 checks".into()));
        }
        let mut cols = vec![0u128; code.n];
        for (r, supp) in checks.row_supports().iter().enumerate() {
            for &c in supp {
                cols[c] ^= 1 << r;
            }
        }
        let logical = (0..code.n)
            .map(|q| {
                basis.ops(s.other()).iter().enumerate().fold(0u8, |m, (j, l)| m | (u8::from(l.get(q)) << j))
            })
            .collect();
        let max_col_weight = cols.iter().map(|c| c.count_ones()).max().unwrap_or(0).max(1);
        Ok(Self { cols, logical, max_col_weight })
    }

    fn search(&self, start: usize, remaining: usize, syn: u128, log: u8, chosen: &mut Vec<usize>) -> bool {
        if remaining == 0 {
            return syn == 0 && log != 0;
        }
        if syn.count_ones() > remaining as u32 * self.max_col_weight {
            return false;
        }
        let n = self.cols.len();
        for c in start..=(n - remaining) {
            chosen.push(c);
            if self.search(c + 1, remaining - 1, syn ^ self.cols[c], log ^ self.logical[c], chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    fn min_weight(&self, w_max: usize) -> Option<Vec<usize>> {
        let n = self.cols.len();
        for w in 1..=w_max.min(n) {
            // Split on the first support element so blocks run in parallel.
            let found = (0..=(n - w)).into_par_iter().find_map_first(|first| {
                let mut chosen = vec![first];
                self.search(first + 1, w - 1, self.cols[first], self.logical[first], &mut chosen).then_some(chosen)
            });
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// Exhaustive search over supports of weight up to `w_max`. Returns `None`
/// when either side has no logical of weight `<= w_max`.
pub fn distance_exact(code: &CssCode, basis: &LogicalBasis, w_max: usize) -> Result<Option<DistanceReport>> {
    let x = ExactSearch::new(code, basis, Sector::X)?.min_weight(w_max);
    let z = ExactSearch::new(code, basis, Sector::Z)?.min_weight(w_max);
    let (Some(cx), Some(cz)) = (x, z) else {
        return Ok(None);
    };
    Ok(Some(DistanceReport {
        dx: cx.len(),
        dz: cz.len(),
        d: cx.len().min(cz.len()),
        method: DistanceMethod::Exact,
        certificate_x: cx,
        certificate_z: cz,
        trials: None,
        seed: None,
        trace: Vec::new(),
    }))
}

/// Randomized search for low-weight logicals of one type.
struct RandomSearch<'a> {
    n: usize,
    /// Generators of the full logical-plus-stabilizer space.
    generators: Vec<BitVec>,
    /// Stabilizers of the same type, used for local weight descent.
    stabilizers: Vec<Vec<usize>>,
    stab_of_qubit: Vec<Vec<usize>>,
    basis: &'a LogicalBasis,
    sector: Sector,
}

impl<'a> RandomSearch<'a> {
    fn new(code: &CssCode, basis: &'a LogicalBasis, sector: Sector) -> Self {
        let stab = match sector {
            Sector::X => &code.hx,
            Sector::Z => &code.hz,
        };
        let dense = stab.to_dense();
        let mut rb = RowBasis::from_rows(code.n, dense.rows());
        for l in basis.ops(sector) {
            rb.insert(l.clone());
        }
        let stabilizers: Vec<Vec<usize>> = stab.row_supports().to_vec();
        let mut stab_of_qubit = vec![Vec::new(); code.n];
        for (r, s) in stabilizers.iter().enumerate() {
            for &q in s {
                stab_of_qubit[q].push(r);
            }
        }
        Self { n: code.n, generators: rb.rows().to_vec(), stabilizers, stab_of_qubit, basis, sector }
    }

    fn nontrivial(&self, v: &BitVec) -> bool {
        self.basis.flips(self.sector, v) != 0
    }

    /// Greedy weight reduction by stabilizer multiplication, interleaved
    /// with random weight-preserving moves to escape plateaus.
    fn descend(&self, v: &BitVec, rng: &mut ChaCha8Rng, plateau_moves: usize) -> BitVec {
        let mut cur = v.clone();
        let mut overlap: Vec<usize> = self.stabilizers.iter().map(|s| s.iter().filter(|&&q| cur.get(q)).count()).collect();
        let mut best = cur.clone();
        let apply = |cur: &mut BitVec, overlap: &mut Vec<usize>, r: usize| {
            for &q in &self.stabilizers[r] {
                let was = cur.get(q);
                cur.flip(q);
                for &r2 in &self.stab_of_qubit[q] {
                    if was {
                        overlap[r2] -= 1;
                    } else {
                        overlap[r2] += 1;
                    }
                }
            }
        };
        let mut moves_left = plateau_moves;
        loop {
            let mut improved = true;
            while improved {
                improved = false;
                for r in 0..self.stabilizers.len() {
                    if 2 * overlap[r] > self.stabilizers[r].len() {
                        apply(&mut cur, &mut overlap, r);
                        improved = true;
                    }
                }
            }
            if cur.weight() < best.weight() {
                best = cur.clone();
            }
            if moves_left == 0 {
                break;
            }
            let flat: Vec<usize> =
                (0..self.stabilizers.len()).filter(|&r| overlap[r] > 0 && 2 * overlap[r] == self.stabilizers[r].len()).collect();
            if flat.is_empty() {
                break;
            }
            let steps = flat.len().min(moves_left);
            for _ in 0..steps {
                let r = flat[rng.gen_range(0..flat.len())];
                if overlap[r] > 0 && 2 * overlap[r] == self.stabilizers[r].len() {
                    apply(&mut cur, &mut overlap, r);
                }
            }
            moves_left -= steps;
        }
        best
    }

    /// One trial: random information set, harvest the lightest nontrivial
    /// rows, polish them by descent.
    fn trial(&self, seed: u64, trial: u64) -> BitVec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(&mut rng);
        let mut m = BitMatrix::from_rows(self.n, self.generators.clone());
        m.rref_with_order(&order);
        let mut rows: Vec<BitVec> = m.into_rows().into_iter().filter(|r| self.nontrivial(r)).collect();
        rows.sort_by_key(BitVec::weight);
        let mut best: Option<BitVec> = None;
        for r in rows.iter().take(4) {
            let polished = self.descend(r, &mut rng, 2 * self.n);
            if best.as_ref().is_none_or(|b| polished.weight() < b.weight()) {
                best = Some(polished);
            }
        }
        best.expect("every information set yields a nontrivial logical row")
    }

    /// Best vector over `trials`, plus the best weight after each block of
    /// 1000 trials. Deterministic for fixed seed.
    fn run(&self, trials: usize, seed: u64) -> (BitVec, Vec<usize>) {
        let mut best: Option<BitVec> = None;
        let mut trace = Vec::new();
        for block_start in (0..trials).step_by(1000) {
            let block_end = (block_start + 1000).min(trials);
            let block_best = (block_start..block_end)
                .into_par_iter()
                .map(|t| (t, self.trial(seed, t as u64)))
                .reduce_with(|a, b| if (b.1.weight(), b.0) < (a.1.weight(), a.0) { b } else { a })
                .map(|(_, v)| v);
            if let Some(v) = block_best {
                if best.as_ref().is_none_or(|b| v.weight() < b.weight()) {
                    best = Some(v);
                }
            }
            trace.push(best.as_ref().map_or(usize::MAX, BitVec::weight));
        }
        (best.expect("trials >= 1"), trace)
    }
}

/// Probabilistic upper bound on the distance via information-set sampling
/// and stabilizer descent. Nonincreasing in `trials` for a fixed seed.
pub fn distance_upper_bound(code: &CssCode, basis: &LogicalBasis, trials: usize, seed: u64) -> DistanceReport {
    let trials = trials.max(1);
    let (vx, tx) = RandomSearch::new(code, basis, Sector::X).run(trials, seed);
    let (vz, tz) = RandomSearch::new(code, basis, Sector::Z).run(trials, seed ^ 0x5a5a_5a5a_5a5a_5a5a);
    DistanceReport {
        dx: vx.weight(),
        dz: vz.weight(),
        d: vx.weight().min(vz.weight()),
        method: DistanceMethod::Probabilistic,
        certificate_x: vx.to_indices(),
        certificate_z: vz.to_indices(),
        trials: Some(trials),
        seed: Some(seed),
        trace: tx.into_iter().zip(tz).collect(),
    }
}

/// Direction-pair index of a 2-cell, matching [`LOGICAL_LABELS`].
pub fn face_label_index(c: &Cell) -> usize {
    dir_subset_index(c.dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::css_from_lattice;
    use crate::lattice::{named_lattice, PARAMETER_LATTICES, SIMULATION_LATTICES};

    fn code(name: &str) -> (HnfMatrix, CssCode) {
        let h = named_lattice(name).unwrap().hnf();
        (h, css_from_lattice(&h))
    }

    #[test]
    fn linear_basis_is_valid() {
        for l in PARAMETER_LATTICES[..6].iter() {
            let h = l.hnf();
            let c = css_from_lattice(&h);
            let b = logical_basis_linear(&c);
            assert_eq!(b.k(), 6);
            b.verify(&c).unwrap();
        }
    }

    #[test]
    fn identity_lattice_logicals_are_single_faces() {
        let c = css_from_lattice(&HnfMatrix::identity());
        let b = logical_basis_linear(&c);
        assert!(b.lx.iter().chain(b.lz.iter()).all(|v| v.weight() == 1));
    }

    #[test]
    fn cocycles_pair_with_row_walks() {
        for l in SIMULATION_LATTICES {
            let h = l.hnf();
            let alphas = one_cocycle_basis(&h);
            let (_, xrel) = (0, boundary_matrix(&h, 1).unwrap());
            // Classes stay independent modulo coboundaries of 0-cochains.
            let mut rb = RowBasis::from_rows(4 * h.num_points(), xrel.to_dense().rows());
            let base_rank = rb.rank();
            for a in &alphas {
                assert!(is_cocycle(a, &h));
                rb.insert(a.support.clone());
            }
            assert_eq!(rb.rank(), base_rank + 4, "{}", l.name);
            // Independent walk evaluation: follow each row and count hits.
            for (i, a) in alphas.iter().enumerate() {
                for j in 0..4 {
                    let row = h.row(j);
                    let mut p = [0i64; 4];
                    let mut parity = false;
                    for d in 0..4 {
                        for _ in 0..row[d] {
                            let e = Cell::new(p, 1 << d, &h);
                            parity ^= a.support.get(e.index(&h));
                            p[d] += 1;
                        }
                    }
                    assert_eq!(parity, i == j);
                }
            }
        }
    }

    #[test]
    fn cup_conventions() {
        // Both conventions are checked; the two-path form must produce
        // cocycles spanning all of the second cohomology.
        for name in ["Det3", "Det9a", "Hadamard"] {
            let (h, c) = code(name);
            let lin = logical_basis_linear(&c);
            let cup = cup_logical_basis(&h, &c, CupConvention::TwoPath).unwrap();
            cup.verify(&c).unwrap();
            assert!(same_logical_span(&c, &lin, &cup), "{name}");
        }
    }

    #[test]
    fn cup_is_bilinear_and_rejects_non_cocycles() {
        let (h, _) = code("Det9a");
        let a = one_cocycle_basis(&h);
        let zero = Cochain { dim: 1, support: BitVec::zeros(4 * 9) };
        assert!(cup_product(&zero, &a[1], &h, CupConvention::TwoPath).unwrap().support.is_zero());
        let sum = Cochain { dim: 1, support: a[0].support.xor(&a[2].support) };
        for conv in [CupConvention::SingleTerm, CupConvention::TwoPath] {
            let lhs = cup_unchecked(&sum, &a[1], &h, conv).support;
            let rhs = cup_unchecked(&a[0], &a[1], &h, conv).support.xor(&cup_unchecked(&a[2], &a[1], &h, conv).support);
            assert_eq!(lhs, rhs);
        }
        let mut bad = a[0].clone();
        bad.support.flip(0);
        assert!(matches!(cup_product(&bad, &a[1], &h, CupConvention::TwoPath), Err(Error::NotCocycle)));
    }

    #[test]
    fn exact_distances_small() {
        for (name, d) in [("Det2", 2), ("Det3", 3), ("Det5", 4)] {
            let (_, c) = code(name);
            let b = logical_basis_linear(&c);
            let r = distance_exact(&c, &b, 8).unwrap().unwrap();
            assert_eq!(r.d, d, "{name}");
            r.verify(&c, &b).unwrap();
        }
        let c = css_from_lattice(&HnfMatrix::identity());
        let b = logical_basis_linear(&c);
        assert_eq!(distance_exact(&c, &b, 3).unwrap().unwrap().d, 1);
    }

    #[test]
    fn exact_reports_inconclusive_beyond_budget() {
        let (_, c) = code("Det5");
        let b = logical_basis_linear(&c);
        assert!(distance_exact(&c, &b, 3).unwrap().is_none());
    }

    #[test]
    fn probabilistic_bound_matches_exact_on_small() {
        let (_, c) = code("Det5");
        let b = logical_basis_linear(&c);
        let r = distance_upper_bound(&c, &b, 200, 7);
        r.verify(&c, &b).unwrap();
        assert_eq!(r.d, 4);
        let again = distance_upper_bound(&c, &b, 200, 7);
        assert_eq!(again.certificate_x, r.certificate_x);
    }
}
