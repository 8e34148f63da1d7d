//! Sparse LU factorisation of a square basis matrix with product-form updates.
//!
//! Rows of the basis are constraint rows; columns are basis positions.
//! Pivots are chosen by a Markowitz search restricted to the sparsest
//! column (or a row singleton) with threshold partial pivoting.

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;
const ETA_DROP: f64 = 1e-13;

/// Positions that could not be pivoted and rows left without a pivot.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
struct Compressed {
    start: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Compressed {
    fn new() -> Self {
        Compressed { start: vec![0], idx: Vec::new(), val: Vec::new() }
    }

    fn clear(&mut self) {
        self.start.clear();
        self.start.push(0);
        self.idx.clear();
        self.val.clear();
    }

    fn push(&mut self, i: usize, v: f64) {
        self.idx.push(i);
        self.val.push(v);
    }

    fn close(&mut self) {
        self.start.push(self.idx.len());
    }

    fn len(&self) -> usize {
        self.start.len() - 1
    }

    fn entries(&self, k: usize) -> (&[usize], &[f64]) {
        let r = self.start[k]..self.start[k + 1];
        (&self.idx[r.clone()], &self.val[r])
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BasisFactor {
    m: usize,
    piv_row: Vec<usize>,
    piv_col: Vec<usize>,
    piv_val: Vec<f64>,
    /// Row multipliers of each elimination step.
    lower: Compressed,
    /// Off-diagonal entries of each pivot row, indexed by column.
    upper: Compressed,
    eta_pos: Vec<usize>,
    eta_piv: Vec<f64>,
    etas: Compressed,
    scratch: Vec<f64>,
}

impl BasisFactor {
    /// Factor of the identity-like basis `-I`.
    pub(crate) fn negative_identity(m: usize) -> Self {
        let cols: Vec<Vec<(usize, f64)>> = (0..m).map(|i| vec![(i, -1.0)]).collect();
        let mut f = BasisFactor::empty(m);
        f.factorize(&cols).expect("identity is nonsingular");
        f
    }

    fn empty(m: usize) -> Self {
        BasisFactor {
            m,
            piv_row: Vec::with_capacity(m),
            piv_col: Vec::with_capacity(m),
            piv_val: Vec::with_capacity(m),
            lower: Compressed::new(),
            upper: Compressed::new(),
            eta_pos: Vec::new(),
            eta_piv: Vec::new(),
            etas: Compressed::new(),
            scratch: vec![0.0; m],
        }
    }

    pub(crate) fn num_updates(&self) -> usize {
        self.eta_pos.len()
    }

    /// Factor the matrix whose column `c` has the entries `cols[c]`.
    pub(crate) fn factorize(&mut self, cols: &[Vec<(usize, f64)>]) -> Result<(), Singular> {
        let m = self.m;
        debug_assert_eq!(cols.len(), m);
        self.piv_row.clear();
        self.piv_col.clear();
        self.piv_val.clear();
        self.lower.clear();
        self.upper.clear();
        self.eta_pos.clear();
        self.eta_piv.clear();
        self.etas.clear();

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut col_count = vec![0usize; m];
        for (c, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                if v != 0.0 {
                    rows[i].push((c, v));
                    col_rows[c].push(i);
                    col_count[c] += 1;
                }
            }
        }
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut bad_cols = Vec::new();
        let mut work = vec![0.0; m];
        let mut in_pivot_row = vec![false; m];
        let mut seen = vec![usize::MAX; m];
        let mut stamp = 0usize;
        let value_in = |row: &[(usize, f64)], c: usize| row.iter().find(|e| e.0 == c).map_or(0.0, |e| e.1);

        for _ in 0..m {
            // sparsest column, lowest index on ties
            let mut pc = usize::MAX;
            for c in 0..m {
                if !col_done[c] && (pc == usize::MAX || col_count[c] < col_count[pc]) {
                    pc = c;
                    if col_count[c] <= 1 {
                        break;
                    }
                }
            }
            if pc == usize::MAX {
                break;
            }
            let mut pick: Option<(usize, usize, f64)> = None;
            if col_count[pc] > 1 {
                // a row singleton avoids fill as well
                for i in 0..m {
                    if !row_done[i] && rows[i].len() == 1 {
                        let (c, v) = rows[i][0];
                        let cmax = col_rows[c]
                            .iter()
                            .filter(|&&k| !row_done[k])
                            .map(|&k| value_in(&rows[k], c).abs())
                            .fold(0.0, f64::max);
                        if v.abs() >= SINGULAR_TOL && v.abs() >= PIVOT_THRESHOLD * cmax {
                            pick = Some((i, c, v));
                            break;
                        }
                    }
                }
            }
            if pick.is_none() {
                let cmax = col_rows[pc]
                    .iter()
                    .filter(|&&k| !row_done[k])
                    .map(|&k| value_in(&rows[k], pc).abs())
                    .fold(0.0, f64::max);
                if cmax < SINGULAR_TOL {
                    for &i in &col_rows[pc] {
                        rows[i].retain(|e| e.0 != pc);
                    }
                    col_done[pc] = true;
                    bad_cols.push(pc);
                    continue;
                }
                let mut best_len = usize::MAX;
                for &i in &col_rows[pc] {
                    if row_done[i] {
                        continue;
                    }
                    let v = value_in(&rows[i], pc);
                    if v.abs() >= PIVOT_THRESHOLD * cmax && rows[i].len() < best_len {
                        best_len = rows[i].len();
                        pick = Some((i, pc, v));
                    }
                }
            }
            let (pr, pc, pv) = pick.expect("a pivot exists in a nonzero column");

            // eliminate column pc from the other active rows
            for &(j, v) in &rows[pr] {
                work[j] = v;
                in_pivot_row[j] = true;
            }
            let pivot_row = std::mem::take(&mut rows[pr]);
            let others: Vec<usize> = col_rows[pc].iter().copied().filter(|&i| i != pr && !row_done[i]).collect();
            for i in others {
                let a = value_in(&rows[i], pc);
                if a == 0.0 {
                    rows[i].retain(|e| e.0 != pc);
                    continue;
                }
                let l = a / pv;
                self.lower.push(i, l);
                stamp += 1;
                let row = &mut rows[i];
                row.retain(|e| e.0 != pc);
                for e in row.iter_mut() {
                    if in_pivot_row[e.0] {
                        e.1 -= l * work[e.0];
                        seen[e.0] = stamp;
                    }
                }
                for &(j, v) in &pivot_row {
                    if j != pc && seen[j] != stamp {
                        row.push((j, -l * v));
                        col_rows[j].push(i);
                        col_count[j] += 1;
                    }
                }
            }
            self.lower.close();
            for &(j, v) in &pivot_row {
                in_pivot_row[j] = false;
                work[j] = 0.0;
                if j != pc {
                    self.upper.push(j, v);
                    col_count[j] -= 1;
                }
            }
            self.upper.close();
            row_done[pr] = true;
            col_done[pc] = true;
            self.piv_row.push(pr);
            self.piv_col.push(pc);
            self.piv_val.push(pv);
        }

        if bad_cols.is_empty() {
            Ok(())
        } else {
            let rows: Vec<usize> = (0..m).filter(|&i| !row_done[i]).collect();
            Err(Singular { positions: bad_cols, rows })
        }
    }

    /// Solve `B x = b`: `b` is indexed by row on entry and by position on exit.
    pub(crate) fn ftran(&mut self, b: &mut [f64]) {
        for k in 0..self.lower.len() {
            let br = b[self.piv_row[k]];
            if br != 0.0 {
                let (idx, val) = self.lower.entries(k);
                for (&i, &l) in idx.iter().zip(val) {
                    b[i] -= l * br;
                }
            }
        }
        let x = &mut self.scratch;
        for k in (0..self.piv_row.len()).rev() {
            let mut v = b[self.piv_row[k]];
            let (idx, val) = self.upper.entries(k);
            for (&j, &u) in idx.iter().zip(val) {
                v -= u * x[j];
            }
            x[self.piv_col[k]] = v / self.piv_val[k];
        }
        for e in 0..self.eta_pos.len() {
            let p = self.eta_pos[e];
            let xp = x[p] / self.eta_piv[e];
            x[p] = xp;
            if xp != 0.0 {
                let (idx, val) = self.etas.entries(e);
                for (&i, &a) in idx.iter().zip(val) {
                    x[i] -= a * xp;
                }
            }
        }
        b.copy_from_slice(x);
    }

    /// Solve `B^T y = c`: `c` is indexed by position on entry and by row on exit.
    pub(crate) fn btran(&mut self, c: &mut [f64]) {
        for e in (0..self.eta_pos.len()).rev() {
            let p = self.eta_pos[e];
            let (idx, val) = self.etas.entries(e);
            let mut s = c[p];
            for (&i, &a) in idx.iter().zip(val) {
                s -= a * c[i];
            }
            c[p] = s / self.eta_piv[e];
        }
        let w = &mut self.scratch;
        for k in 0..self.piv_row.len() {
            let wr = c[self.piv_col[k]] / self.piv_val[k];
            w[self.piv_row[k]] = wr;
            if wr != 0.0 {
                let (idx, val) = self.upper.entries(k);
                for (&j, &u) in idx.iter().zip(val) {
                    c[j] -= u * wr;
                }
            }
        }
        for k in (0..self.lower.len()).rev() {
            let (idx, val) = self.lower.entries(k);
            let mut s = 0.0;
            for (&i, &l) in idx.iter().zip(val) {
                s += l * w[i];
            }
            w[self.piv_row[k]] -= s;
        }
        c.copy_from_slice(w);
    }

    /// Record that position `r` now holds the column whose ftran result is `alpha`.
    pub(crate) fn update(&mut self, r: usize, alpha: &[f64]) {
        self.eta_pos.push(r);
        self.eta_piv.push(alpha[r]);
        for (i, &a) in alpha.iter().enumerate() {
            if i != r && a.abs() > ETA_DROP {
                self.etas.push(i, a);
            }
        }
        self.etas.close();
    }
}
