//! Phase-tracked Pauli operators `i^r X^x Z^z` and their conjugation by
//! the Clifford gates used in fold-transversal symmetries.

use serde::{Deserialize, Serialize};

use crate::f2::BitVec;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pauli {
    pub x: BitVec,
    pub z: BitVec,
    /// Power of `i`, mod 4.
    pub r: u8,
}

impl Pauli {
    pub fn identity(n: usize) -> Self {
        Self { x: BitVec::zeros(n), z: BitVec::zeros(n), r: 0 }
    }

    pub fn x_type(x: BitVec) -> Self {
        let n = x.len();
        Self { x, z: BitVec::zeros(n), r: 0 }
    }

    pub fn z_type(z: BitVec) -> Self {
        let n = z.len();
        Self { x: BitVec::zeros(n), z, r: 0 }
    }

    /// Hermitian operator `±i^{|x∧z|} X^x Z^z`.
    pub fn hermitian(x: BitVec, z: BitVec, negative: bool) -> Self {
        let r = ((x.overlap(&z) & 3) as u8 + if negative { 2 } else { 0 }) & 3;
        Self { x, z, r }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.len() == 0
    }

    pub fn is_hermitian(&self) -> bool {
        (self.r & 1) == u8::from(self.x.dot(&self.z))
    }

    /// Sign relative to the Hermitian form `i^{|x∧z|} X^x Z^z`; `None`
    /// when the operator is not Hermitian.
    pub fn sign(&self) -> Option<bool> {
        let d = (self.r + 4 - (self.x.overlap(&self.z) & 3) as u8) & 3;
        match d {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }

    pub fn mul(&self, o: &Pauli) -> Pauli {
        // X^x1 Z^z1 X^x2 Z^z2 = (-1)^{z1·x2} X^{x1+x2} Z^{z1+z2}
        let r = (self.r + o.r + if self.z.dot(&o.x) { 2 } else { 0 }) & 3;
        Pauli { x: self.x.xor(&o.x), z: self.z.xor(&o.z), r }
    }

    pub fn commutes(&self, o: &Pauli) -> bool {
        self.x.dot(&o.z) == self.z.dot(&o.x)
    }

    pub fn conj_h(&mut self, q: usize) {
        let (x, z) = (self.x.get(q), self.z.get(q));
        if x && z {
            self.r = (self.r + 2) & 3;
        }
        self.x.set(q, z);
        self.z.set(q, x);
    }

    pub fn conj_s(&mut self, q: usize) {
        if self.x.get(q) {
            self.r = (self.r + 1) & 3;
            self.z.flip(q);
        }
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let (xa, xb) = (self.x.get(a), self.x.get(b));
        if xa && xb {
            self.r = (self.r + 2) & 3;
        }
        if xb {
            self.z.flip(a);
        }
        if xa {
            self.z.flip(b);
        }
    }

    /// Moves qubit `i` to `perm[i]`.
    pub fn permute(&mut self, perm: &[usize]) {
        let n = self.len();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for i in self.x.ones() {
            x.set(perm[i], true);
        }
        for i in self.z.ones() {
            z.set(perm[i], true);
        }
        self.x = x;
        self.z = z;
    }
}

/// Physical gate layer. Sequences apply left to right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhysOp {
    /// Qubit `i` moves to `perm[i]`.
    Permute(Vec<usize>),
    HadamardAll,
    S(Vec<usize>),
    Cz(Vec<(usize, usize)>),
    /// Pauli Z on the listed qubits (sign correction).
    PauliZ(Vec<usize>),
}

impl PhysOp {
    /// Conjugates `p` by this layer: `p ↦ U p U†`.
    pub fn conjugate(&self, p: &mut Pauli) {
        match self {
            PhysOp::Permute(perm) => p.permute(perm),
            PhysOp::HadamardAll => {
                for q in 0..p.len() {
                    p.conj_h(q);
                }
            }
            PhysOp::S(qs) => {
                for &q in qs {
                    p.conj_s(q);
                }
            }
            PhysOp::Cz(pairs) => {
                for &(a, b) in pairs {
                    p.conj_cz(a, b);
                }
            }
            PhysOp::PauliZ(qs) => {
                if qs.iter().filter(|&&q| p.x.get(q)).count() % 2 == 1 {
                    p.r = (p.r + 2) & 3;
                }
            }
        }
    }
}

pub fn conjugate_all(ops: &[PhysOp], p: &mut Pauli) {
    for op in ops {
        op.conjugate(p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(x: bool, z: bool, negative: bool) -> Pauli {
        Pauli::hermitian(BitVec::from_bools(&[x]), BitVec::from_bools(&[z]), negative)
    }

    #[test]
    fn single_qubit_tables() {
        // H: X<->Z, Y -> -Y
        let mut y = single(true, true, false);
        y.conj_h(0);
        assert_eq!(y, single(true, true, true));
        let mut x = single(true, false, false);
        x.conj_h(0);
        assert_eq!(x, single(false, true, false));
        // S: X -> Y, Y -> -X
        let mut x = single(true, false, false);
        x.conj_s(0);
        assert_eq!(x, single(true, true, false));
        let mut y = single(true, true, false);
        y.conj_s(0);
        assert_eq!(y, single(true, false, true));
    }

    #[test]
    fn cz_maps_xx_to_yy() {
        let mut p = Pauli::hermitian(BitVec::from_bools(&[true, true]), BitVec::zeros(2), false);
        p.conj_cz(0, 1);
        // XX -> (XZ)(ZX) = YY
        assert_eq!(p, Pauli::hermitian(BitVec::from_bools(&[true, true]), BitVec::from_bools(&[true, true]), false));
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = Pauli> {
        (proptest::collection::vec(any::<bool>(), n), proptest::collection::vec(any::<bool>(), n), any::<bool>())
            .prop_map(|(x, z, s)| Pauli::hermitian(BitVec::from_bools(&x), BitVec::from_bools(&z), s))
    }

    proptest! {
        // Conjugation is an automorphism: it respects products.
        #[test]
        fn conjugation_respects_products(a in arb_pauli(4), b in arb_pauli(4), which in 0usize..5) {
            let op = match which {
                0 => PhysOp::HadamardAll,
                1 => PhysOp::S(vec![0, 2]),
                2 => PhysOp::Cz(vec![(0, 1), (2, 3)]),
                3 => PhysOp::PauliZ(vec![1, 2]),
                _ => PhysOp::Permute(vec![2, 0, 3, 1]),
            };
            let mut ab = a.mul(&b);
            op.conjugate(&mut ab);
            let (mut a2, mut b2) = (a.clone(), b.clone());
            op.conjugate(&mut a2);
            op.conjugate(&mut b2);
            prop_assert_eq!(ab, a2.mul(&b2));
            prop_assert!(a2.is_hermitian());
        }
    }
}
