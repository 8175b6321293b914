//! Compressed sparse storage on shared sparsity patterns, the space–time
//! block system and its direct solver.
//!
//! Every spatial operator of one discretization lives on the same symmetric
//! pattern, so the `(p+1) x (p+1)` block system has a fixed structure and its
//! symbolic LU factorization is computed once and reused for every Newton
//! iteration and time step.

use std::sync::Arc;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat};

use crate::error::{Error, Result};

/// Symmetric CSR structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// `transpose[k]` is the storage index of the mirror entry of `k`.
    transpose: Vec<usize>,
}

impl SparsityPattern {
    /// Pattern in which all dofs of every clique couple with each other.
    pub fn from_cliques<'a>(n: usize, cliques: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for c in cliques {
            for &i in c {
                rows[i].extend_from_slice(c);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        // every row holds its diagonal so constrained rows can be set to identity
        let mut pattern = Self {
            n,
            row_ptr,
            col_idx,
            transpose: Vec::new(),
        };
        pattern.ensure_diagonal();
        pattern.build_transpose();
        pattern
    }

    fn ensure_diagonal(&mut self) {
        if (0..self.n).all(|i| self.find(i, i).is_some()) {
            return;
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        for i in 0..self.n {
            let mut r = self.row(i).to_vec();
            if r.binary_search(&i).is_err() {
                r.push(i);
                r.sort_unstable();
            }
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
    }

    fn build_transpose(&mut self) {
        let mut t = vec![0; self.col_idx.len()];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                t[k] = self.find(j, i).expect("pattern is not symmetric");
            }
        }
        self.transpose = t;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_range(i);
        self.col_idx[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }
}

/// CSR matrix whose structure is a shared [`SparsityPattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.find(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(i, j)`; panics if the entry is not in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .pattern
            .find(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    /// Scatters a dense row-major local matrix.
    pub fn add_local(&mut self, dofs: &[usize], local: &[f64]) {
        let n = dofs.len();
        for (a, &i) in dofs.iter().enumerate() {
            let row = self.pattern.row_range(i);
            let cols = &self.pattern.col_idx[row.clone()];
            for (b, &j) in dofs.iter().enumerate() {
                let v = local[a * n + b];
                if v != 0.0 {
                    let k = cols.binary_search(&j).expect("local entry outside pattern");
                    self.values[row.start + k] += v;
                }
            }
        }
    }

    /// Scatters a rectangular local block with separate row and column dofs.
    pub fn add_local_rect(&mut self, rows: &[usize], cols: &[usize], local: &[f64]) {
        let nc = cols.len();
        for (a, &i) in rows.iter().enumerate() {
            let row = self.pattern.row_range(i);
            let pc = &self.pattern.col_idx[row.clone()];
            for (b, &j) in cols.iter().enumerate() {
                let v = local[a * nc + b];
                if v != 0.0 {
                    let k = pc.binary_search(&j).expect("local entry outside pattern");
                    self.values[row.start + k] += v;
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.pattern.row_range(i);
            *yi = self.pattern.col_idx[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.matvec(y)).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += s * other`; both must share the pattern.
    pub fn axpy(&mut self, s: f64, other: &SparseMatrix) {
        assert!(Arc::ptr_eq(&self.pattern, &other.pattern) || *self.pattern == *other.pattern);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |a_ij - a_ji|`
    pub fn asymmetry(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.pattern.transpose)
            .map(|(v, &t)| (v - self.values[t]).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            for k in self.pattern.row_range(i) {
                row[self.pattern.col_idx[k]] = self.values[k];
            }
        }
        d
    }

    /// Direct solve through the block machinery with a single block.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut sys = BlockSystem::new(self.pattern.clone(), 1);
        sys.add_block(0, 0, 1.0, self);
        let lu = sys.factor()?;
        lu.solve(rhs)
    }
}

/// Symmetric elimination of Dirichlet dofs: rows and columns are cleared,
/// the diagonal set to one and the right-hand side adjusted for the
/// eliminated columns.
pub fn apply_dirichlet(matrix: &mut SparseMatrix, rhs: &mut [f64], dofs: &[usize], values: &[f64]) -> Result<()> {
    let n = matrix.n();
    if rhs.len() != n || dofs.len() != values.len() {
        return Err(Error::InvalidArgument("dirichlet data size mismatch".into()));
    }
    let mut fixed = vec![None; n];
    for (&d, &v) in dofs.iter().zip(values) {
        if d >= n {
            return Err(Error::DofOutOfRange { index: d, size: n });
        }
        fixed[d] = Some(v);
    }
    let p = matrix.pattern.clone();
    for i in 0..n {
        if fixed[i].is_some() {
            continue;
        }
        for k in p.row_range(i) {
            if let Some(g) = fixed[p.col_idx[k]] {
                rhs[i] -= matrix.values[k] * g;
                matrix.values[k] = 0.0;
            }
        }
    }
    for (&d, &v) in dofs.iter().zip(values) {
        for k in p.row_range(d) {
            matrix.values[k] = if p.col_idx[k] == d { 1.0 } else { 0.0 };
        }
        rhs[d] = v;
    }
    Ok(())
}

/// Conjugate gradients for SPD systems; stops at relative residual `tol`.
pub fn conjugate_gradient(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = tol * tol * rr;
    if rr == 0.0 {
        return Ok(x);
    }
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Solver("conjugate gradient: matrix not positive definite".into()));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new <= target {
            return Ok(x);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!("conjugate gradient did not converge in {max_iter} iterations")))
}

/// `nb x nb` block matrix over a spatial pattern, stored column-compressed
/// for the sparse LU. Unknown `(l, i)` is at global index `l * n + i`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pattern: Arc<SparsityPattern>,
    nb: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    symbolic: Option<SymbolicLu<usize>>,
}

impl BlockSystem {
    pub fn new(pattern: Arc<SparsityPattern>, nb: usize) -> Self {
        let n = pattern.n;
        let mut col_ptr = Vec::with_capacity(nb * n + 1);
        let mut row_idx = Vec::with_capacity(nb * nb * pattern.nnz());
        col_ptr.push(0);
        for _m in 0..nb {
            for j in 0..n {
                for l in 0..nb {
                    row_idx.extend(pattern.row(j).iter().map(|&i| l * n + i));
                }
                col_ptr.push(row_idx.len());
            }
        }
        let values = vec![0.0; row_idx.len()];
        Self {
            pattern,
            nb,
            col_ptr,
            row_idx,
            values,
            symbolic: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.nb * self.pattern.n
    }

    pub fn n_blocks(&self) -> usize {
        self.nb
    }

    pub fn zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn pos(&self, l: usize, m: usize, j: usize, offset: usize) -> usize {
        let len = self.pattern.row_ptr[j + 1] - self.pattern.row_ptr[j];
        self.col_ptr[m * self.pattern.n + j] + l * len + offset
    }

    /// Block `(l, m) += scale * a`.
    pub fn add_block(&mut self, l: usize, m: usize, scale: f64, a: &SparseMatrix) {
        if scale == 0.0 {
            return;
        }
        debug_assert!(*a.pattern == *self.pattern);
        let p = self.pattern.clone();
        for j in 0..p.n {
            let start = self.pos(l, m, j, 0);
            for (off, k) in p.row_range(j).enumerate() {
                // column j, row i = col_idx[k]; value a_ij lives at transpose[k]
                self.values[start + off] += scale * a.values[p.transpose[k]];
            }
        }
    }

    /// Turns unknowns `(l, d)` for every block `l` and listed `d` into
    /// identity rows and columns.
    pub fn constrain(&mut self, dofs: &[usize]) {
        let p = self.pattern.clone();
        let n = p.n;
        let mut fixed = vec![false; n];
        for &d in dofs {
            fixed[d] = true;
        }
        for m in 0..self.nb {
            for j in 0..n {
                for l in 0..self.nb {
                    let start = self.pos(l, m, j, 0);
                    for (off, k) in p.row_range(j).enumerate() {
                        let i = p.col_idx[k];
                        if fixed[i] || fixed[j] {
                            self.values[start + off] = if l == m && i == j { 1.0 } else { 0.0 };
                        }
                    }
                }
            }
        }
    }

    pub fn factor(&mut self) -> Result<BlockLu> {
        let dim = self.dim();
        let sym = SymbolicSparseColMatRef::new_checked(dim, dim, &self.col_ptr, None, &self.row_idx);
        if self.symbolic.is_none() {
            let s = SymbolicLu::try_new(sym).map_err(|e| Error::Solver(format!("symbolic LU: {e:?}")))?;
            self.symbolic = Some(s);
        }
        let symbolic = self.symbolic.clone().expect("symbolic factorization present");
        let mat = SparseColMatRef::new(sym, &self.values);
        let lu = Lu::try_new_with_symbolic(symbolic, mat).map_err(|e| Error::Solver(format!("numeric LU: {e:?}")))?;
        Ok(BlockLu { lu, dim })
    }

    /// Dense copy for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut d = vec![vec![0.0; dim]; dim];
        for c in 0..dim {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                d[self.row_idx[k]][c] = self.values[k];
            }
        }
        d
    }
}

pub struct BlockLu {
    lu: Lu<usize, f64>,
    dim: usize,
}

impl BlockLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim {
            return Err(Error::InvalidArgument("right-hand side length mismatch".into()));
        }
        let mut x = Mat::<f64>::from_fn(self.dim, 1, |i, _| rhs[i]);
        self.lu.solve_in_place_with_conj(Conj::No, x.as_mut());
        let out: Vec<f64> = (0..self.dim).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("singular linear system".into()));
        }
        Ok(out)
    }
}
