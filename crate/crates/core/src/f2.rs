//! Linear algebra over F2.
//!
//! [`BitVec`] and [`BitMatrix`] are dense, bit-packed and used for ranks,
//! kernels and span tests. [`F2Matrix`] is the sparse row-support form used
//! for check matrices and circuit generation.

use std::fmt;

use serde::{Deserialize, Serialize};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Dense bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        debug_assert_eq!(self.len, other.len);
        BitVec {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    #[inline]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the bitwise AND.
    #[inline]
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        ones & 1 == 1
    }

    pub fn overlap(&self, other: &BitVec) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> Ones<'_> {
        Ones { words: &self.words, word_index: 0, current: self.words.first().copied().unwrap_or(0) }
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.ones().collect()
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[{}]{:?}", self.len, self.to_indices())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for BitVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            len: usize,
            ones: Vec<usize>,
        }
        Repr { len: self.len, ones: self.to_indices() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            len: usize,
            ones: Vec<usize>,
        }
        let r = Repr::deserialize(d)?;
        if let Some(&bad) = r.ones.iter().find(|&&i| i >= r.len) {
            return Err(serde::de::Error::custom(format!("bit index {bad} out of range {}", r.len)));
        }
        Ok(BitVec::from_indices(r.len, r.ones))
    }
}

/// Iterator over set bit positions.
pub struct Ones<'a> {
    words: &'a [u64],
    word_index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_index * WORD + tz);
            }
            self.word_index += 1;
            if self.word_index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_index];
        }
    }
}

/// Dense row-major matrix over F2.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { cols, rows: vec![BitVec::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length mismatch");
        Self { cols, rows }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVec> {
        self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v)
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.num_rows());
        let mut out = BitMatrix::zeros(self.rows.len(), other.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for k in row.ones() {
                out.rows[r].xor_assign(&other.rows[k]);
            }
        }
        out
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVec::zeros(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(r, true);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    /// In-place reduced row echelon form. Returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let order: Vec<usize> = (0..self.cols).collect();
        self.rref_with_order(&order)
    }

    /// Reduced row echelon form choosing pivots in the given column order.
    /// Rows are reordered so that row `i` has pivot `pivots[i]`; zero rows
    /// are dropped.
    pub fn rref_with_order(&mut self, column_order: &[usize]) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for &c in column_order {
            if next == self.rows.len() {
                break;
            }
            let Some(p) = (next..self.rows.len()).find(|&r| self.rows[r].get(c)) else {
                continue;
            };
            self.rows.swap(next, p);
            let pivot_row = self.rows[next].clone();
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r != next && row.get(c) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivots.push(c);
            next += 1;
        }
        self.rows.truncate(next);
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut basis = RowBasis::new(self.cols);
        for row in &self.rows {
            basis.insert(row.clone());
        }
        basis.rank()
    }

    /// Basis of the right kernel `{v : self · v = 0}`.
    pub fn kernel(&self) -> Vec<BitVec> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m.rows[r].get(free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let n = self.rows.len();
        if n != self.cols {
            return None;
        }
        let mut aug: Vec<BitVec> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = BitVec::zeros(2 * n);
                for c in r.ones() {
                    v.set(c, true);
                }
                v.set(n + i, true);
                v
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| aug[r].get(c))?;
            aug.swap(c, p);
            let pivot = aug[c].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != c && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
        }
        let rows = aug
            .into_iter()
            .map(|v| BitVec::from_indices(n, v.ones().filter(|&i| i >= n).map(|i| i - n)))
            .collect();
        Some(BitMatrix::from_rows(n, rows))
    }
}

/// Incrementally built row space in echelon form, keyed by pivot column.
///
/// Supports membership tests and reduction of arbitrary vectors.
#[derive(Clone, Debug)]
pub struct RowBasis {
    len: usize,
    rows: Vec<BitVec>,
    pivot_of_col: Vec<Option<usize>>,
}

impl RowBasis {
    pub fn new(len: usize) -> Self {
        Self { len, rows: Vec::new(), pivot_of_col: vec![None; len] }
    }

    pub fn from_rows<'a, I: IntoIterator<Item = &'a BitVec>>(len: usize, rows: I) -> Self {
        let mut b = Self::new(len);
        for r in rows {
            b.insert(r.clone());
        }
        b
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    /// Reduces `v` against the basis in place; the result is zero iff `v`
    /// was in the span.
    pub fn reduce(&self, v: &mut BitVec) {
        while let Some(c) = self.leading_reducible(v) {
            v.xor_assign(&self.rows[self.pivot_of_col[c].expect("pivot")]);
        }
    }

    fn leading_reducible(&self, v: &BitVec) -> Option<usize> {
        v.ones().find(|&c| self.pivot_of_col[c].is_some())
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Inserts `v`; returns `true` if it increased the rank.
    pub fn insert(&mut self, mut v: BitVec) -> bool {
        assert_eq!(v.len(), self.len);
        self.reduce(&mut v);
        let Some(p) = v.first_one() else {
            return false;
        };
        // Keep every stored row free of the new pivot so reduction stays a
        // single pass over pivots.
        for row in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_assign(&v);
            }
        }
        self.pivot_of_col[p] = Some(self.rows.len());
        self.rows.push(v);
        true
    }
}

/// Sparse F2 matrix stored as sorted row supports.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    supports: Vec<Vec<usize>>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, supports: vec![Vec::new(); rows] }
    }

    /// Builds a matrix from (row, col) incidences; repeated positions cancel.
    pub fn from_incidences<I: IntoIterator<Item = (usize, usize)>>(rows: usize, cols: usize, entries: I) -> Self {
        let mut supports = vec![Vec::new(); rows];
        for (r, c) in entries {
            assert!(r < rows && c < cols, "entry ({r},{c}) out of range {rows}x{cols}");
            supports[r].push(c);
        }
        for s in supports.iter_mut() {
            *s = cancel_pairs(std::mem::take(s));
        }
        Self { rows, cols, supports }
    }

    pub fn from_supports(cols: usize, supports: Vec<Vec<usize>>) -> Self {
        let rows = supports.len();
        Self::from_incidences(rows, cols, supports.into_iter().enumerate().flat_map(|(r, s)| s.into_iter().map(move |c| (r, c))))
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.supports[r]
    }

    pub fn row_supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn nnz(&self) -> usize {
        self.supports.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.supports[r].binary_search(&c).is_ok()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.supports.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for s in &self.supports {
            for &c in s {
                w[c] += 1;
            }
        }
        w
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut supports = vec![Vec::new(); self.cols];
        for (r, s) in self.supports.iter().enumerate() {
            for &c in s {
                supports[c].push(r);
            }
        }
        Self { rows: self.cols, cols: self.rows, supports }
    }

    /// Column supports, i.e. the rows of the transpose.
    pub fn col_supports(&self) -> Vec<Vec<usize>> {
        self.transpose().supports
    }

    pub fn to_dense(&self) -> BitMatrix {
        BitMatrix::from_rows(self.cols, self.supports.iter().map(|s| BitVec::from_indices(self.cols, s.iter().copied())).collect())
    }

    pub fn from_dense(m: &BitMatrix) -> Self {
        Self { rows: m.num_rows(), cols: m.num_cols(), supports: m.rows().iter().map(BitVec::to_indices).collect() }
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVec::zeros(self.rows);
        for (r, s) in self.supports.iter().enumerate() {
            if s.iter().filter(|&&c| v.get(c)).count() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Dense product `self · other^T`.
    pub fn mul_transpose(&self, other: &F2Matrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols);
        let other_dense = other.to_dense();
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for (r, s) in self.supports.iter().enumerate() {
            let v = BitVec::from_indices(self.cols, s.iter().copied());
            for (c, orow) in other_dense.rows().iter().enumerate() {
                if v.dot(orow) {
                    out.set(r, c, true);
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.to_dense().rank()
    }

    /// Plain-text alist format (MacKay), 1-based indices.
    pub fn to_alist(&self) -> String {
        use std::fmt::Write;
        let cols = self.col_supports();
        let col_w: Vec<usize> = cols.iter().map(Vec::len).collect();
        let row_w = self.row_weights();
        let mut out = String::new();
        writeln!(out, "{} {}", self.cols, self.rows).unwrap();
        writeln!(out, "{} {}", col_w.iter().max().copied().unwrap_or(0), row_w.iter().max().copied().unwrap_or(0)).unwrap();
        writeln!(out, "{}", join(col_w.iter())).unwrap();
        writeln!(out, "{}", join(row_w.iter())).unwrap();
        // Lists are zero-padded to the maximum weight, as is conventional.
        let padded = |list: &[usize], width: usize| -> String {
            let mut v: Vec<usize> = list.iter().map(|x| x + 1).collect();
            v.resize(width.max(1), 0);
            join(v.iter())
        };
        let max_col = col_w.iter().max().copied().unwrap_or(0);
        let max_row = row_w.iter().max().copied().unwrap_or(0);
        for c in &cols {
            writeln!(out, "{}", padded(c, max_col)).unwrap();
        }
        for r in &self.supports {
            writeln!(out, "{}", padded(r, max_row)).unwrap();
        }
        out
    }

    pub fn from_alist(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let nums = |line: Option<&str>| -> Result<Vec<usize>, String> {
            line.ok_or_else(|| "truncated alist".to_string())?
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| e.to_string()))
                .collect()
        };
        let dims = nums(lines.next())?;
        if dims.len() != 2 {
            return Err("bad alist header".into());
        }
        let (cols, rows) = (dims[0], dims[1]);
        nums(lines.next())?;
        nums(lines.next())?;
        nums(lines.next())?;
        for _ in 0..cols {
            nums(lines.next())?;
        }
        let mut supports = Vec::with_capacity(rows);
        for _ in 0..rows {
            let s: Vec<usize> = nums(lines.next())?.into_iter().filter(|&x| x > 0).map(|x| x - 1).collect();
            if s.iter().any(|&c| c >= cols) {
                return Err("alist column index out of range".into());
            }
            supports.push(s);
        }
        Ok(Self::from_supports(cols, supports))
    }
}

fn join<T: fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn cancel_pairs(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(v.len());
    for c in v {
        if out.last() == Some(&c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out
}
