//! Cellular chain complex of the 4-torus and the CSS code on its 2-cells.

use serde::Serialize;

use crate::f2::F2Matrix;
use crate::lattice::{enumerate_cells, incident_cells, num_cells, Cell, HnfMatrix};
use crate::{Error, Result};

/// Matrix of ∂_k : C_k → C_{k−1}; rows are (k−1)-cells, columns k-cells.
pub fn boundary_matrix(h: &HnfMatrix, k: usize) -> Result<F2Matrix> {
    if !(1..=4).contains(&k) {
        return Err(Error::DimensionOutOfRange { dim: k });
    }
    let cols = enumerate_cells(h, k)?;
    let mut entries = Vec::with_capacity(cols.len() * 2 * k);
    for (j, c) in cols.iter().enumerate() {
        for f in incident_cells(c, h, -1)? {
            entries.push((f.index(h), j));
        }
    }
    Ok(F2Matrix::from_incidences(num_cells(h, k - 1), cols.len(), entries))
}

/// CSS code with qubits on 2-cells, X checks on 1-cells and Z checks on
/// 3-cells. Redundant check rows are kept.
#[derive(Clone, Debug)]
pub struct CssCode {
    pub lattice: HnfMatrix,
    pub n: usize,
    pub k: usize,
    /// Rows indexed by 1-cells; row `e` is the coboundary of `e`.
    pub hx: F2Matrix,
    /// Rows indexed by 3-cells; row `c` is the boundary of `c`.
    pub hz: F2Matrix,
    pub rank_hx: usize,
    pub rank_hz: usize,
}

impl CssCode {
    pub fn qubit_cell(&self, q: usize) -> Cell {
        Cell::from_index(2, q, &self.lattice)
    }

    pub fn x_check_cell(&self, r: usize) -> Cell {
        Cell::from_index(1, r, &self.lattice)
    }

    pub fn z_check_cell(&self, r: usize) -> Cell {
        Cell::from_index(3, r, &self.lattice)
    }

    pub fn det(&self) -> usize {
        self.lattice.num_points()
    }

    /// Rows or columns whose weight differs from the generic 6 (rows) or
    /// 4 (columns); nonempty only when opposite faces are identified.
    pub fn weight_report(&self) -> WeightReport {
        let collapsed = |w: Vec<usize>, target: usize| -> Vec<(usize, usize)> {
            w.into_iter().enumerate().filter(|&(_, x)| x != target).collect()
        };
        WeightReport {
            hx_rows: collapsed(self.hx.row_weights(), 6),
            hz_rows: collapsed(self.hz.row_weights(), 6),
            hx_cols: collapsed(self.hx.col_weights(), 4),
            hz_cols: collapsed(self.hz.col_weights(), 4),
        }
    }

    /// JSON form `{"hx": [[cols]], "hz": [[cols]]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "hx": self.hx.row_supports(),
            "hz": self.hz.row_supports(),
        })
    }
}

/// Check rows/columns whose weights deviate from the generic values, as
/// `(index, weight)` pairs.
#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct WeightReport {
    pub hx_rows: Vec<(usize, usize)>,
    pub hz_rows: Vec<(usize, usize)>,
    pub hx_cols: Vec<(usize, usize)>,
    pub hz_cols: Vec<(usize, usize)>,
}

impl WeightReport {
    pub fn is_uniform(&self) -> bool {
        self.hx_rows.is_empty() && self.hz_rows.is_empty() && self.hx_cols.is_empty() && self.hz_cols.is_empty()
    }
}

pub fn css_from_lattice(h: &HnfMatrix) -> CssCode {
    let hx = boundary_matrix(h, 2).expect("k in range");
    let hz = boundary_matrix(h, 3).expect("k in range").transpose();
    let n = hx.num_cols();
    let rank_hx = hx.rank();
    let rank_hz = hz.rank();
    let code = CssCode { lattice: *h, n, k: n - rank_hx - rank_hz, hx, hz, rank_hx, rank_hz };
    let report = code.weight_report();
    if !report.is_uniform() {
        log::warn!(
            "lattice {h}: stabilizer weights collapse ({} X rows, {} Z rows below weight 6)",
            report.hx_rows.len(),
            report.hz_rows.len()
        );
    }
    code
}

/// Relations among check rows: `z_relations · hz = 0` (one row per 4-cell)
/// and `x_relations · hx = 0` (one row per 0-cell).
pub fn stabilizer_redundancies(h: &HnfMatrix) -> (F2Matrix, F2Matrix) {
    let z_relations = boundary_matrix(h, 4).expect("k in range").transpose();
    let x_relations = boundary_matrix(h, 1).expect("k in range");
    (z_relations, x_relations)
}
