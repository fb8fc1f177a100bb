//! Sparse symmetric positive-definite systems: CSR storage, reverse
//! Cuthill-McKee ordering, envelope Cholesky and Jacobi-preconditioned CG.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is singular or indefinite (pivot {pivot:e} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error("solver did not reach the residual target (relative residual {residual:e})")]
    Divergence { residual: f64 },
}

/// Relative residual required of every solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Above this many unknowns the direct factorization is skipped.
pub const DIRECT_MAX_UNKNOWNS: usize = 200_000;

/// Above this many stored envelope entries the direct factorization is
/// skipped as well.
pub const DIRECT_MAX_ENVELOPE: usize = 30_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    /// Principal submatrix on `keep` (sorted, unique) and the coupling block
    /// from `keep` rows to the remaining columns, returned as a closure-free
    /// pair `(A_kk, A_kr)` where `A_kr` is indexed by original column.
    pub fn split(&self, keep: &[usize]) -> (CsrMatrix, CsrMatrix) {
        let mut local = vec![usize::MAX; self.ncols];
        for (a, &i) in keep.iter().enumerate() {
            local[i] = a;
        }
        let mut kk = Vec::new();
        let mut kr = Vec::new();
        for (a, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if local[j] != usize::MAX {
                    kk.push((a, local[j], v));
                } else {
                    kr.push((a, j, v));
                }
            }
        }
        (
            CsrMatrix::from_triplets(keep.len(), keep.len(), kk),
            CsrMatrix::from_triplets(keep.len(), self.ncols, kr),
        )
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn rcm_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows;
    let degree: Vec<usize> = (0..n).map(|i| a.indptr[i + 1] - a.indptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = peripheral(a, seed, &degree, &mut level);
        let begin = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = begin;
        let mut nbrs = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]));
            nbrs.sort_by_key(|&j| (degree[j], j));
            for &j in &nbrs {
                visited[j] = true;
                order.push(j);
            }
        }
    }
    order.reverse();
    order
}

/// George-Liu pseudo-peripheral node search within the component of `seed`.
fn peripheral(a: &CsrMatrix, seed: usize, degree: &[usize], level: &mut [usize]) -> usize {
    let mut root = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let comp = bfs_levels(a, root, level);
        let far = *comp.last().unwrap();
        let dmax = level[far];
        let last_level: Vec<usize> = comp.iter().copied().filter(|&v| level[v] == dmax).collect();
        for &v in &comp {
            level[v] = usize::MAX;
        }
        let cand = *last_level.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        if dmax <= depth {
            break;
        }
        depth = dmax;
        root = cand;
    }
    root
}

fn bfs_levels(a: &CsrMatrix, root: usize, level: &mut [usize]) -> Vec<usize> {
    let mut queue = vec![root];
    level[root] = 0;
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        for (j, _) in a.row(v) {
            if level[j] == usize::MAX {
                level[j] = level[v] + 1;
                queue.push(j);
            }
        }
    }
    queue
}

/// Lower-triangular envelope Cholesky factor of a permuted SPD matrix.
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Envelope size of `a` under `perm` without factoring.
    pub fn envelope_size(a: &CsrMatrix, perm: &[usize]) -> usize {
        let inv = inverse(perm);
        (0..a.nrows)
            .map(|i| {
                let f = a.row(perm[i]).map(|(j, _)| inv[j]).min().unwrap_or(i).min(i);
                i - f + 1
            })
            .sum()
    }

    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, SolveError> {
        let n = a.nrows;
        let inv = inverse(&perm);
        let mut first = vec![0; n];
        let mut offset = vec![0; n + 1];
        for i in 0..n {
            first[i] = a.row(perm[i]).map(|(j, _)| inv[j]).min().unwrap_or(i).min(i);
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; offset[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jn = inv[j];
                if jn <= i {
                    values[offset[i] + jn - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let row_i = offset[i];
            let diag_a = values[row_i + i - fi];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (head, tail) = values.split_at_mut(row_i);
                let lj = &head[offset[j]..offset[j + 1]];
                let li = &mut tail[..i - fi + 1];
                let s: f64 = li[k0 - fi..j - fi]
                    .iter()
                    .zip(&lj[k0 - fj..j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                li[j - fi] = (li[j - fi] - s) / lj[j - fj];
            }
            let li = &values[row_i..row_i + i - fi];
            let d = diag_a - li.iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-12 * diag_a.abs()) || !d.is_finite() {
                return Err(SolveError::Singular { row: perm[i], pivot: d });
            }
            values[row_i + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { perm, first, offset, values })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Jacobi-preconditioned conjugate gradients from `x0`.
pub fn pcg(a: &CsrMatrix, b: &[f64], x0: Vec<f64>, tol: f64, max_iter: usize) -> Result<Vec<f64>, SolveError> {
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .enumerate()
        .map(|(i, &d)| if d > 0.0 { Ok(1.0 / d) } else { Err(SolveError::Singular { row: i, pivot: d }) })
        .collect::<Result<_, _>>()?;
    let mut x = x0;
    let mut r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; b.len()];
    for _ in 0..max_iter {
        if norm(&r) <= tol * bn {
            return Ok(x);
        }
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolveError::Singular { row: 0, pivot: pap });
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..z.len() {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm(&r) / bn;
    if res <= tol {
        Ok(x)
    } else {
        Err(SolveError::Divergence { residual: res })
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` and checks the
/// relative residual against [`RESIDUAL_TOL`].
pub fn solve_spd(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    let n = a.nrows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = None;
    if n <= DIRECT_MAX_UNKNOWNS {
        let perm = rcm_order(a);
        if EnvelopeCholesky::envelope_size(a, &perm) <= DIRECT_MAX_ENVELOPE {
            let f = EnvelopeCholesky::factor(a, perm)?;
            let mut sol = f.solve(b);
            // one step of iterative refinement
            let r: Vec<f64> = a.matvec(&sol).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
            if norm(&r) > 1e-14 * bn {
                let dx = f.solve(&r);
                for (s, d) in sol.iter_mut().zip(&dx) {
                    *s += d;
                }
            }
            x = Some(sol);
        }
    }
    let x = match x {
        Some(x) => x,
        None => pcg(a, b, vec![0.0; n], RESIDUAL_TOL * 0.5, 50 * n + 1000)?,
    };
    let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    let res = norm(&r) / bn;
    if res <= RESIDUAL_TOL && x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(SolveError::Divergence { residual: res })
    }
}
