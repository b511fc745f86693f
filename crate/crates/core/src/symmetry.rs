//! Lattice automorphisms, ZX dualities, fold-transversal gates and their
//! logical Clifford action.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::complex::CssCode;
use crate::f2::{BitMatrix, BitVec, RowBasis};
use crate::homology::LogicalBasis;
use crate::lattice::{dir_subsets, num_cells, Cell, HnfMatrix, Point};
use crate::pauli::{conjugate_all, Pauli, PhysOp};
use crate::{Error, Result};

/// Number of logical qubits the logical-action machinery is built for.
pub const LOGICAL_QUBITS: usize = 6;
const NG: usize = 2 * LOGICAL_QUBITS;

/// Point-group element `M` (signed permutation, acting on row vectors)
/// followed by translation `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceGroupElement {
    pub m: [[i8; 4]; 4],
    pub b: Point,
}

impl SpaceGroupElement {
    pub fn identity() -> Self {
        let mut m = [[0i8; 4]; 4];
        for (d, row) in m.iter_mut().enumerate() {
            row[d] = 1;
        }
        Self { m, b: [0; 4] }
    }

    /// `(π(d), s_d)` with `e_d M = s_d e_{π(d)}`.
    fn image_dir(&self, d: usize) -> (usize, i8) {
        let j = (0..4).find(|&j| self.m[d][j] != 0).expect("signed permutation row");
        (j, self.m[d][j])
    }

    pub fn is_signed_permutation(&self) -> bool {
        let mut cols = [0u8; 4];
        for row in &self.m {
            let nz: Vec<usize> = (0..4).filter(|&j| row[j] != 0).collect();
            if nz.len() != 1 || row[nz[0]].abs() != 1 {
                return false;
            }
            cols[nz[0]] += 1;
        }
        cols == [1; 4]
    }

    pub fn map_point(&self, p: Point) -> Point {
        let mut q = self.b;
        for d in 0..4 {
            for j in 0..4 {
                q[j] += p[d] * i64::from(self.m[d][j]);
            }
        }
        q
    }

    /// Image of the unit cell `base + [0,1]^D`.
    pub fn map_cell(&self, c: &Cell, h: &HnfMatrix) -> Cell {
        let mut base = self.map_point(c.base);
        let mut dirs = 0u8;
        for d in (0..4).filter(|&d| c.has_dir(d)) {
            let (j, s) = self.image_dir(d);
            dirs |= 1 << j;
            if s < 0 {
                base[j] -= 1;
            }
        }
        Cell::new(base, dirs, h)
    }

    /// `ΛM ⊆ Λ`; equality follows from `|det M| = 1`.
    pub fn preserves(&self, h: &HnfMatrix) -> bool {
        let lin = Self { b: [0; 4], ..*self };
        (0..4).all(|i| h.contains(lin.map_point(h.row(i))))
    }

    /// Qubit `q` moves to `perm[q]`.
    pub fn qubit_permutation(&self, h: &HnfMatrix) -> Vec<usize> {
        (0..num_cells(h, 2)).map(|q| self.map_cell(&Cell::from_index(2, q, h), h).index(h)).collect()
    }
}

/// All 384 signed permutation matrices.
pub fn signed_permutations() -> Vec<[[i8; 4]; 4]> {
    let mut out = Vec::with_capacity(384);
    let mut perm = [0usize, 1, 2, 3];
    let mut perms = Vec::new();
    permutations(&mut perm, 0, &mut perms);
    for p in perms {
        for signs in 0..16u8 {
            let mut m = [[0i8; 4]; 4];
            for d in 0..4 {
                m[d][p[d]] = if signs >> d & 1 == 1 { -1 } else { 1 };
            }
            out.push(m);
        }
    }
    out
}

fn permutations(a: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
    if k == 4 {
        out.push(*a);
        return;
    }
    for i in k..4 {
        a.swap(k, i);
        permutations(a, k + 1, out);
        a.swap(k, i);
    }
}

/// Point-group elements (zero translation) preserving the lattice.
pub fn lattice_automorphisms(h: &HnfMatrix) -> Vec<SpaceGroupElement> {
    signed_permutations()
        .into_iter()
        .map(|m| SpaceGroupElement { m, b: [0; 4] })
        .filter(|g| g.preserves(h))
        .collect()
}

/// Automorphisms combined with translations by every canonical point,
/// deduplicated by their action on qubits.
pub fn space_group(h: &HnfMatrix, autos: &[SpaceGroupElement]) -> Vec<SpaceGroupElement> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in autos {
        for b in h.points() {
            let g = SpaceGroupElement { m: a.m, b };
            if seen.insert(g.qubit_permutation(h)) {
                out.push(g);
            }
        }
    }
    out
}

/// Direct/dual cell identification on faces: `(p, D) ↦ (p + Σ_{d∈D} e_d, D^c)`.
/// It is an involution when `(1,1,1,1) ∈ Λ`.
pub fn face_duality(h: &HnfMatrix) -> Vec<usize> {
    (0..num_cells(h, 2))
        .map(|q| {
            let c = Cell::from_index(2, q, h);
            let mut base = c.base;
            for d in (0..4).filter(|&d| c.has_dir(d)) {
                base[d] += 1;
            }
            Cell::new(base, !c.dirs & 0xf, h).index(h)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZxDuality {
    /// Qubit `q` moves to `tau[q]`.
    pub tau: Vec<usize>,
    pub order2: bool,
    /// Space-group element applied after the face duality.
    pub provenance: Option<SpaceGroupElement>,
}

fn row_support_set(m: &crate::f2::F2Matrix, perm: Option<&[usize]>) -> HashSet<Vec<usize>> {
    (0..m.num_rows())
        .map(|r| {
            let mut s: Vec<usize> = m.row(r).iter().map(|&q| perm.map_or(q, |p| p[q])).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

/// X- and Z-check supports are exchanged by `tau`, as sets.
pub fn is_zx_duality(code: &CssCode, tau: &[usize]) -> bool {
    tau.len() == code.n
        && code.hx.num_rows() == code.hz.num_rows()
        && row_support_set(&code.hx, Some(tau)) == row_support_set(&code.hz, None)
        && row_support_set(&code.hz, Some(tau)) == row_support_set(&code.hx, None)
}

pub fn is_involution(tau: &[usize]) -> bool {
    tau.iter().enumerate().all(|(i, &j)| tau[j] == i)
}

/// ZX dualities of the form `g ∘ δ` for `g` in the space group and `δ` the
/// face duality, each verified; deduplicated by permutation.
pub fn find_zx_dualities(code: &CssCode, autos: &[SpaceGroupElement]) -> Vec<ZxDuality> {
    let h = &code.lattice;
    let delta = face_duality(h);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in space_group(h, autos) {
        let pg = g.qubit_permutation(h);
        let tau: Vec<usize> = delta.iter().map(|&q| pg[q]).collect();
        if seen.contains(&tau) || !is_zx_duality(code, &tau) {
            continue;
        }
        seen.insert(tau.clone());
        let order2 = is_involution(&tau);
        out.push(ZxDuality { tau, order2, provenance: Some(g) });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldKind {
    HadamardType,
    PhaseType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldGate {
    pub kind: FoldKind,
    pub duality: ZxDuality,
    pub ops: Vec<PhysOp>,
}

/// `H_τ = τ ∘ ⊗H` or `S_τ = ⊗_{fixed} S ⊗_{pairs} CZ`, verified against
/// the stabilizer group.
pub fn fold_gate(code: &CssCode, kind: FoldKind, duality: &ZxDuality) -> Result<FoldGate> {
    let ops = match kind {
        FoldKind::HadamardType => vec![PhysOp::HadamardAll, PhysOp::Permute(duality.tau.clone())],
        FoldKind::PhaseType => {
            if !duality.order2 || !is_involution(&duality.tau) {
                return Err(Error::NotInvolution);
            }
            let fixed: Vec<usize> = (0..duality.tau.len()).filter(|&i| duality.tau[i] == i).collect();
            let pairs: Vec<(usize, usize)> =
                (0..duality.tau.len()).filter(|&i| duality.tau[i] > i).map(|i| (i, duality.tau[i])).collect();
            let mut ops = vec![PhysOp::S(fixed), PhysOp::Cz(pairs)];
            if let Some(c) = sign_correction(code, &ops)? {
                ops.push(PhysOp::PauliZ(c));
            }
            ops
        }
    };
    check_preserves(code, &ops)?;
    Ok(FoldGate { kind, duality: duality.clone(), ops })
}

struct StabilizerSpace {
    sx: RowBasis,
    sz: RowBasis,
}

impl StabilizerSpace {
    fn new(code: &CssCode) -> Self {
        Self {
            sx: RowBasis::from_rows(code.n, code.hx.to_dense().rows()),
            sz: RowBasis::from_rows(code.n, code.hz.to_dense().rows()),
        }
    }

    /// `P` equals `+X^x Z^z` with both parts stabilizers.
    fn is_positive_stabilizer(&self, p: &Pauli) -> bool {
        p.r == 0 && self.sx.contains(&p.x) && self.sz.contains(&p.z)
    }
}

/// Z-type Pauli fixing the signs of X-check images that land in the
/// stabilizer group with sign `-1`; `None` when no signs are wrong.
fn sign_correction(code: &CssCode, ops: &[PhysOp]) -> Result<Option<Vec<usize>>> {
    let space = StabilizerSpace::new(code);
    let mut eqs: Vec<(BitVec, bool)> = Vec::new();
    for r in 0..code.hx.num_rows() {
        let s = BitVec::from_indices(code.n, code.hx.row(r).iter().copied());
        let mut p = Pauli::x_type(s.clone());
        conjugate_all(ops, &mut p);
        if !space.sx.contains(&p.x) || !space.sz.contains(&p.z) {
            return Err(Error::NotPreserving);
        }
        eqs.push((s, p.r == 2));
    }
    if eqs.iter().all(|e| !e.1) {
        return Ok(None);
    }
    solve_parities(code.n, eqs).map(|c| Some(c.to_indices())).ok_or(Error::NotPreserving)
}

/// Some `c` with `row · c = rhs` for every equation.
fn solve_parities(n: usize, mut eqs: Vec<(BitVec, bool)>) -> Option<BitVec> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(k) = (row..eqs.len()).find(|&k| eqs[k].0.get(col)) else { continue };
        eqs.swap(row, k);
        let (pr, pb) = eqs[row].clone();
        for (k, e) in eqs.iter_mut().enumerate() {
            if k != row && e.0.get(col) {
                e.0.xor_assign(&pr);
                e.1 ^= pb;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if eqs[row..].iter().any(|e| e.1) {
        return None;
    }
    let mut c = BitVec::zeros(n);
    for (i, &col) in pivots.iter().enumerate() {
        c.set(col, eqs[i].1);
    }
    Some(c)
}

/// Every check generator is mapped to a stabilizer with sign `+1`.
pub fn check_preserves(code: &CssCode, ops: &[PhysOp]) -> Result<()> {
    let space = StabilizerSpace::new(code);
    let gens = (0..code.hx.num_rows())
        .map(|r| Pauli::x_type(BitVec::from_indices(code.n, code.hx.row(r).iter().copied())))
        .chain((0..code.hz.num_rows()).map(|r| Pauli::z_type(BitVec::from_indices(code.n, code.hz.row(r).iter().copied()))));
    for mut p in gens {
        conjugate_all(ops, &mut p);
        if !space.is_positive_stabilizer(&p) {
            return Err(Error::NotPreserving);
        }
    }
    Ok(())
}

/// Pauli on the logical qubits: bits `0..6` are X, `6..12` are Z; the
/// operator is `i^r X^x Z^z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LogicalPauli {
    pub v: u16,
    pub r: u8,
}

impl LogicalPauli {
    fn xz(self) -> (u16, u16) {
        (self.v & 0x3f, self.v >> 6)
    }

    pub fn hermitian(v: u16, negative: bool) -> Self {
        let (x, z) = (v & 0x3f, v >> 6);
        Self { v, r: (((x & z).count_ones() as u8) + if negative { 2 } else { 0 }) & 3 }
    }

    pub fn mul(self, o: Self) -> Self {
        let r = self.r + o.r + if ((self.v >> 6) & o.v & 0x3f).count_ones() & 1 == 1 { 2 } else { 0 };
        Self { v: self.v ^ o.v, r: r & 3 }
    }

    /// Sign relative to the Hermitian form, `None` if not Hermitian.
    pub fn sign(self) -> Option<bool> {
        let (x, z) = self.xz();
        match (self.r + 4 - ((x & z).count_ones() as u8 & 3)) & 3 {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }

    pub fn commutes(self, o: Self) -> bool {
        let (x1, z1) = self.xz();
        let (x2, z2) = o.xz();
        ((x1 & z2).count_ones() + (z1 & x2).count_ones()) % 2 == 0
    }
}

/// Images of `X̄_0..X̄_5, Z̄_0..Z̄_5` under conjugation by a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalAction {
    pub images: [LogicalPauli; NG],
}

impl LogicalAction {
    pub fn identity() -> Self {
        let mut images = [LogicalPauli { v: 0, r: 0 }; NG];
        for (g, im) in images.iter_mut().enumerate() {
            im.v = 1 << g;
        }
        Self { images }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn is_symplectic_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(g, im)| im.v == 1 << g)
    }

    pub fn apply(&self, p: LogicalPauli) -> LogicalPauli {
        let mut acc = LogicalPauli { v: 0, r: p.r };
        for g in 0..NG {
            if p.v >> g & 1 == 1 {
                acc = acc.mul(self.images[g]);
            }
        }
        acc
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &LogicalAction) -> LogicalAction {
        let mut images = other.images;
        for im in images.iter_mut() {
            *im = self.apply(*im);
        }
        Self { images }
    }

    /// Commutation relations of the images and Hermiticity.
    pub fn is_symplectic(&self) -> bool {
        for a in 0..NG {
            if self.images[a].sign().is_none() {
                return false;
            }
            for b in (a + 1)..NG {
                let should_anti = a % LOGICAL_QUBITS == b % LOGICAL_QUBITS;
                if self.images[a].commutes(self.images[b]) == should_anti {
                    return false;
                }
            }
        }
        true
    }

    /// Column `g` holds the symplectic image of generator `g`.
    pub fn matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(NG, NG);
        for g in 0..NG {
            for i in 0..NG {
                if self.images[g].v >> i & 1 == 1 {
                    m.set(i, g, true);
                }
            }
        }
        m
    }

    /// Bit `g` set when the image of generator `g` carries a minus sign.
    pub fn phase_bits(&self) -> u16 {
        self.images.iter().enumerate().fold(0, |acc, (g, im)| acc | u16::from(im.sign() == Some(true)) << g)
    }

    pub fn inverse(&self) -> LogicalAction {
        let inv = self.matrix().inverse().expect("symplectic matrices are invertible");
        let mut images = [LogicalPauli { v: 0, r: 0 }; NG];
        for g in 0..NG {
            let v = (0..NG).fold(0u16, |acc, i| acc | u16::from(inv.get(i, g)) << i);
            let cand = LogicalPauli::hermitian(v, false);
            let back = self.apply(cand);
            images[g] = if back.sign() == Some(false) { cand } else { LogicalPauli::hermitian(v, true) };
        }
        Self { images }
    }

    /// Action on signed Hermitian Paulis indexed `2v + sign`.
    pub fn act_point(&self, pt: u16, signed: bool) -> u16 {
        let img = self.apply(LogicalPauli::hermitian(pt >> 1, pt & 1 == 1));
        if signed {
            (img.v << 1) | u16::from(img.sign() == Some(true))
        } else {
            img.v << 1
        }
    }
}

/// Logical action of a physical gate sequence that preserves the code.
pub fn logical_action(code: &CssCode, basis: &LogicalBasis, ops: &[PhysOp]) -> Result<LogicalAction> {
    if basis.k() != LOGICAL_QUBITS {
        return Err(Error::Invalid(format!("logical action needs k = {LOGICAL_QUBITS}, got {}", basis.k())));
    }
    let space = StabilizerSpace::new(code);
    let mut images = [LogicalPauli { v: 0, r: 0 }; NG];
    for (g, image) in images.iter_mut().enumerate() {
        let mut p = if g < LOGICAL_QUBITS { Pauli::x_type(basis.lx[g].clone()) } else { Pauli::z_type(basis.lz[g - LOGICAL_QUBITS].clone()) };
        conjugate_all(ops, &mut p);
        let mut v = 0u16;
        let mut rx = p.x.clone();
        let mut rz = p.z.clone();
        for j in 0..LOGICAL_QUBITS {
            if p.x.dot(&basis.lz[j]) {
                v |= 1 << j;
                rx.xor_assign(&basis.lx[j]);
            }
            if p.z.dot(&basis.lx[j]) {
                v |= 1 << (j + LOGICAL_QUBITS);
                rz.xor_assign(&basis.lz[j]);
            }
        }
        if !space.sx.contains(&rx) || !space.sz.contains(&rz) {
            return Err(Error::NotPreserving);
        }
        // The stabilizer factors act as +1 on the code space.
        *image = LogicalPauli { v, r: p.r };
        if image.sign().is_none() {
            return Err(Error::NotPreserving);
        }
    }
    Ok(LogicalAction { images })
}

/// Result of a stabilizer-chain computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOrder {
    pub order: u128,
    /// False when the budget ran out and `order` is only a lower bound.
    pub exact: bool,
}

struct Level {
    base: u16,
    /// Coset representative mapping `base` to each orbit point.
    transversal: HashMap<u16, LogicalAction>,
}

struct Chain {
    signed: bool,
    strong: Vec<LogicalAction>,
    levels: Vec<Level>,
}

impl Chain {
    fn trivial(&self, g: &LogicalAction) -> bool {
        if self.signed {
            g.is_identity()
        } else {
            g.is_symplectic_identity()
        }
    }

    fn moved_point(&self, g: &LogicalAction) -> u16 {
        let degree = 1u16 << (NG + 1);
        (0..degree).step_by(if self.signed { 1 } else { 2 }).find(|&p| g.act_point(p, self.signed) != p).expect("nontrivial element")
    }

    fn fixes_prefix(&self, g: &LogicalAction, i: usize) -> bool {
        self.levels[..i].iter().all(|l| g.act_point(l.base, self.signed) == l.base)
    }

    fn rebuild(&mut self, i: usize) {
        let gens: Vec<LogicalAction> = self.strong.iter().filter(|g| self.fixes_prefix(g, i)).copied().collect();
        let base = self.levels[i].base;
        let mut transversal = HashMap::new();
        transversal.insert(base, LogicalAction::identity());
        let mut queue = vec![base];
        while let Some(pt) = queue.pop() {
            let u = transversal[&pt];
            for g in &gens {
                let q = g.act_point(pt, self.signed);
                if let std::collections::hash_map::Entry::Vacant(e) = transversal.entry(q) {
                    e.insert(g.compose(&u));
                    queue.push(q);
                }
            }
        }
        self.levels[i].transversal = transversal;
    }

    /// Strips `g` through levels `from..`; returns the residue and the level
    /// where it dropped out.
    fn sift(&self, mut g: LogicalAction, from: usize) -> (LogicalAction, usize) {
        for i in from..self.levels.len() {
            let b = g.act_point(self.levels[i].base, self.signed);
            match self.levels[i].transversal.get(&b) {
                Some(u) => g = u.inverse().compose(&g),
                None => return (g, i),
            }
        }
        (g, self.levels.len())
    }
}

/// Order of the group generated by `generators`, acting on signed logical
/// Paulis (`signed`) or on their symplectic classes. `budget` bounds the
/// number of Schreier generators sifted.
pub fn group_order(generators: &[LogicalAction], signed: bool, budget: usize) -> GroupOrder {
    let mut chain = Chain { signed, strong: Vec::new(), levels: Vec::new() };
    for g in generators {
        if !chain.trivial(g) && !chain.strong.contains(g) {
            chain.strong.push(*g);
        }
    }
    if chain.strong.is_empty() {
        return GroupOrder { order: 1, exact: true };
    }
    let first = chain.moved_point(&chain.strong[0]);
    chain.levels.push(Level { base: first, transversal: HashMap::new() });
    for g in chain.strong.clone() {
        if chain.levels.iter().all(|l| g.act_point(l.base, signed) == l.base) {
            let b = chain.moved_point(&g);
            chain.levels.push(Level { base: b, transversal: HashMap::new() });
        }
    }
    for i in 0..chain.levels.len() {
        chain.rebuild(i);
    }
    let mut sifted = 0usize;
    let mut exact = true;
    let mut i = chain.levels.len() as isize - 1;
    'outer: while i >= 0 {
        let lvl = i as usize;
        let gens: Vec<LogicalAction> = chain.strong.iter().filter(|g| chain.fixes_prefix(g, lvl)).copied().collect();
        let reps: Vec<(u16, LogicalAction)> = chain.levels[lvl].transversal.iter().map(|(&p, &u)| (p, u)).collect();
        for (pt, u) in reps {
            for x in &gens {
                sifted += 1;
                if sifted > budget {
                    exact = false;
                    break 'outer;
                }
                let q = x.act_point(pt, signed);
                let uq = chain.levels[lvl].transversal[&q];
                let h = uq.inverse().compose(&x.compose(&u));
                let (res, drop) = chain.sift(h, lvl + 1);
                if !chain.trivial(&res) {
                    if drop == chain.levels.len() {
                        let b = chain.moved_point(&res);
                        chain.levels.push(Level { base: b, transversal: HashMap::new() });
                    }
                    chain.strong.push(res);
                    for j in (lvl + 1)..=drop {
                        chain.rebuild(j);
                    }
                    i = drop as isize;
                    continue 'outer;
                }
            }
        }
        i -= 1;
    }
    let order = chain.levels.iter().map(|l| l.transversal.len() as u128).product();
    GroupOrder { order, exact }
}

/// Summary of the symmetry analysis of one lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub automorphisms: usize,
    pub distinct_qubit_permutations: usize,
    pub distinct_logical_permutations: usize,
    pub space_group_size: usize,
    pub zx_dualities: usize,
    /// Dualities counted modulo translation (distinct linear parts).
    pub duality_classes: usize,
    /// Point-group automorphisms together with duality classes: the
    /// symmetries of the cell complex modulo translation when the X and Z
    /// checks are allowed to trade places.
    pub extended_point_group: usize,
    pub involutive_dualities: usize,
    pub hadamard_gates: usize,
    pub phase_gates: usize,
    pub group_order_signed: GroupOrder,
    pub group_order_symplectic: GroupOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Permutation,
    HadamardType,
    PhaseType,
}

/// Catalog entry: physical action, logical action and provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogGate {
    pub kind: GateKind,
    pub provenance: Option<SpaceGroupElement>,
    pub ops: Vec<PhysOp>,
    /// Rows of the 12×12 symplectic matrix as bit strings.
    pub logical_matrix: Vec<String>,
    pub phase_bits: u16,
    #[serde(skip)]
    pub action: Option<LogicalAction>,
}

impl CatalogGate {
    fn new(kind: GateKind, provenance: Option<SpaceGroupElement>, ops: Vec<PhysOp>, action: LogicalAction) -> Self {
        let m = action.matrix();
        let logical_matrix =
            (0..NG).map(|i| (0..NG).map(|j| if m.get(i, j) { '1' } else { '0' }).collect()).collect();
        Self { kind, provenance, ops, logical_matrix, phase_bits: action.phase_bits(), action: Some(action) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateCatalog {
    pub hnf: HnfMatrix,
    pub gates: Vec<CatalogGate>,
}

/// Gates with distinct logical actions among automorphism permutations
/// (including translations), Hadamard-type and phase-type folds.
pub fn build_catalog(code: &CssCode, basis: &LogicalBasis) -> Result<(GateCatalog, SymmetryReport)> {
    let h = &code.lattice;
    let autos = lattice_automorphisms(h);
    let point_perms: Vec<Vec<usize>> = autos.iter().map(|g| g.qubit_permutation(h)).collect();
    let distinct_perms: HashSet<&Vec<usize>> = point_perms.iter().collect();
    let mut gates = Vec::new();
    let mut seen: HashSet<(GateKind, LogicalAction)> = HashSet::new();
    let mut point_actions = HashSet::new();
    for (g, perm) in autos.iter().zip(&point_perms) {
        let ops = vec![PhysOp::Permute(perm.clone())];
        let a = logical_action(code, basis, &ops)?;
        point_actions.insert(a.images.map(|im| im.v));
        if seen.insert((GateKind::Permutation, a)) {
            gates.push(CatalogGate::new(GateKind::Permutation, Some(*g), ops, a));
        }
    }
    let group = space_group(h, &autos);
    for g in &group {
        let ops = vec![PhysOp::Permute(g.qubit_permutation(h))];
        let a = logical_action(code, basis, &ops)?;
        if seen.insert((GateKind::Permutation, a)) {
            gates.push(CatalogGate::new(GateKind::Permutation, Some(*g), ops, a));
        }
    }
    let dualities = find_zx_dualities(code, &autos);
    let (mut nh, mut ns) = (0, 0);
    for d in &dualities {
        let hg = fold_gate(code, FoldKind::HadamardType, d)?;
        let a = logical_action(code, basis, &hg.ops)?;
        nh += 1;
        if seen.insert((GateKind::HadamardType, a)) {
            gates.push(CatalogGate::new(GateKind::HadamardType, d.provenance, hg.ops, a));
        }
        if d.order2 {
            match fold_gate(code, FoldKind::PhaseType, d) {
                Ok(sg) => {
                    let a = logical_action(code, basis, &sg.ops)?;
                    ns += 1;
                    if seen.insert((GateKind::PhaseType, a)) {
                        gates.push(CatalogGate::new(GateKind::PhaseType, d.provenance, sg.ops, a));
                    }
                }
                Err(Error::NotPreserving) => log::debug!("phase-type fold does not preserve the stabilizer group"),
                Err(e) => return Err(e),
            }
        }
    }
    let gens: Vec<LogicalAction> = gates.iter().filter_map(|g| g.action).collect();
    let duality_classes = dualities.iter().filter_map(|d| d.provenance.map(|g| g.m)).collect::<HashSet<_>>().len();
    let report = SymmetryReport {
        automorphisms: autos.len(),
        distinct_qubit_permutations: distinct_perms.len(),
        distinct_logical_permutations: point_actions.len(),
        space_group_size: group.len(),
        zx_dualities: dualities.len(),
        duality_classes,
        extended_point_group: autos.len() + duality_classes,
        involutive_dualities: dualities.iter().filter(|d| d.order2).count(),
        hadamard_gates: nh,
        phase_gates: ns,
        group_order_signed: group_order(&gens, true, 2_000_000),
        group_order_symplectic: group_order(&gens, false, 2_000_000),
    };
    Ok((GateCatalog { hnf: *h, gates }, report))
}

/// Re-derives every catalog gate's logical action and checks the stored
/// matrix and phases, plus stabilizer preservation.
pub fn verify_catalog(code: &CssCode, basis: &LogicalBasis, cat: &GateCatalog) -> Result<()> {
    if cat.hnf != code.lattice {
        return Err(Error::Invalid("catalog lattice does not match the code".into()));
    }
    for (i, g) in cat.gates.iter().enumerate() {
        check_preserves(code, &g.ops)?;
        let a = logical_action(code, basis, &g.ops)?;
        let fresh = CatalogGate::new(g.kind, g.provenance, g.ops.clone(), a);
        if fresh.logical_matrix != g.logical_matrix || fresh.phase_bits != g.phase_bits {
            return Err(Error::Invalid(format!("catalog gate {i}: logical action mismatch")));
        }
        if !a.is_symplectic() {
            return Err(Error::Invalid(format!("catalog gate {i}: action is not symplectic")));
        }
    }
    Ok(())
}

/// Face labels `(01, 02, ...)` of the direction pairs, in subset order.
pub fn face_dirs() -> &'static [u8] {
    dir_subsets(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::css_from_lattice;
    use crate::homology::{cup_logical_basis, logical_basis_linear, CupConvention};
    use crate::lattice::named_lattice;

    fn standard2() -> HnfMatrix {
        HnfMatrix::from_upper([2, 0, 0, 0, 2, 0, 0, 2, 0, 2]).unwrap()
    }

    #[test]
    fn signed_permutation_count() {
        let all = signed_permutations();
        assert_eq!(all.len(), 384);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 384);
        assert!(all.iter().all(|&m| SpaceGroupElement { m, b: [0; 4] }.is_signed_permutation()));
    }

    #[test]
    fn automorphisms_contain_identity_and_permute_cells() {
        let h = named_lattice("Det9a").unwrap().hnf();
        let autos = lattice_automorphisms(&h);
        assert!(autos.contains(&SpaceGroupElement::identity()));
        for g in &autos {
            let mut p = g.qubit_permutation(&h);
            p.sort_unstable();
            assert_eq!(p, (0..h.num_points() * 6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn automorphism_permutations_are_code_automorphisms() {
        let h = named_lattice("Hadamard").unwrap().hnf();
        let code = css_from_lattice(&h);
        for g in lattice_automorphisms(&h).iter().take(40) {
            let perm = g.qubit_permutation(&h);
            assert_eq!(row_support_set(&code.hx, Some(&perm)), row_support_set(&code.hx, None));
            assert_eq!(row_support_set(&code.hz, Some(&perm)), row_support_set(&code.hz, None));
        }
    }

    #[test]
    fn standard_lattice_duality() {
        let h = standard2();
        let code = css_from_lattice(&h);
        let delta = face_duality(&h);
        assert!(is_zx_duality(&code, &delta));
        // (1,1,1,1) is not a period here.
        assert!(!is_involution(&delta));
        let duals = find_zx_dualities(&code, &lattice_automorphisms(&h));
        assert!(duals.iter().any(|d| d.tau == delta));
        assert!(duals.iter().any(|d| d.order2));
        for d in duals.iter().filter(|d| d.order2) {
            let twice: Vec<usize> = d.tau.iter().map(|&q| d.tau[q]).collect();
            assert_eq!(twice, (0..code.n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn standard_lattice_permutations_permute_labels() {
        // On the standard lattice logicals are labelled by direction pairs;
        // a point-group element permutes the labels.
        let h = standard2();
        let code = css_from_lattice(&h);
        let basis = cup_logical_basis(&h, &code, CupConvention::TwoPath).unwrap();
        for g in lattice_automorphisms(&h).iter().step_by(7) {
            let a = logical_action(&code, &basis, &[PhysOp::Permute(g.qubit_permutation(&h))]).unwrap();
            assert!(a.is_symplectic());
            for im in &a.images {
                assert_eq!(im.v.count_ones(), 1, "{:?}", g.m);
            }
        }
    }

    #[test]
    fn identity_action_and_inverse() {
        let h = named_lattice("Det3").unwrap().hnf();
        let code = css_from_lattice(&h);
        let basis = logical_basis_linear(&code);
        let id: Vec<usize> = (0..code.n).collect();
        assert!(logical_action(&code, &basis, &[PhysOp::Permute(id)]).unwrap().is_identity());
        for g in lattice_automorphisms(&h) {
            let a = logical_action(&code, &basis, &[PhysOp::Permute(g.qubit_permutation(&h))]).unwrap();
            assert!(a.is_symplectic());
            assert!(a.compose(&a.inverse()).is_identity());
        }
    }

    #[test]
    fn phase_type_needs_involution() {
        let h = named_lattice("Hadamard").unwrap().hnf();
        let code = css_from_lattice(&h);
        let d = ZxDuality { tau: (0..code.n).rev().collect(), order2: false, provenance: None };
        assert!(matches!(fold_gate(&code, FoldKind::PhaseType, &d), Err(Error::NotInvolution)));
    }

    #[test]
    fn small_group_orders() {
        assert_eq!(group_order(&[], true, 1000), GroupOrder { order: 1, exact: true });
        assert_eq!(group_order(&[LogicalAction::identity()], true, 1000).order, 1);
        // Logical Hadamard on qubit 0: X0 <-> Z0.
        let mut hd = LogicalAction::identity();
        hd.images.swap(0, 6);
        assert_eq!(group_order(&[hd], true, 1000), GroupOrder { order: 2, exact: true });
        // Logical S on qubit 0 has order 4; symplectically order 2.
        let mut s = LogicalAction::identity();
        s.images[0] = LogicalPauli::hermitian(1 | 1 << 6, false);
        assert_eq!(group_order(&[s], true, 1000).order, 4);
        assert_eq!(group_order(&[s], false, 1000).order, 2);
        // H and S on one qubit generate the single-qubit Clifford group
        // (24 elements, with signs on Paulis).
        assert_eq!(group_order(&[hd, s], true, 100_000).order, 24);
        assert_eq!(group_order(&[hd, s], false, 100_000).order, 6);
    }
}
