use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Row-major strides of a tensor-product basis in which mode 0 is the most
/// significant index.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for m in (0..dims.len().saturating_sub(1)).rev() {
        s[m] = s[m + 1] * dims[m + 1];
    }
    s
}

/// Quadrature `q` (even index) or `p` (odd index) of one mode in a Fock
/// basis of dimension `d`.
fn quadrature(d: usize, p: bool) -> DMatrix<C64> {
    let mut x = DMatrix::zeros(d, d);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for n in 1..d {
        let amp = r * (n as f64).sqrt();
        // ⟨n-1|a|n⟩ = √n, ⟨n|a†|n-1⟩ = √n
        if p {
            x[(n - 1, n)] = C64::new(0.0, -amp);
            x[(n, n - 1)] = C64::new(0.0, amp);
        } else {
            x[(n - 1, n)] = C64::new(amp, 0.0);
            x[(n, n - 1)] = C64::new(amp, 0.0);
        }
    }
    x
}

/// Truncation of `x_a x_b` for one mode, built one level larger so the top
/// diagonal entry is that of the untruncated operator.
fn local_product(d: usize, a: usize, b: usize) -> DMatrix<C64> {
    let prod = quadrature(d + 1, a % 2 == 1) * quadrature(d + 1, b % 2 == 1);
    prod.view((0, 0), (d, d)).into_owned()
}

fn local_entries(m: &DMatrix<C64>) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if m[(r, c)] != C64::new(0.0, 0.0) {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

/// Sparse operator on a truncated multi-mode Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl FockOperator {
    /// `Σ_ab G_ab x_a x_b` with `G` the symmetric part of `matrix`.
    /// Phase-space index `a` of `matrix` belongs to mode `modes[a / 2]`.
    pub fn quadratic(dims: &[usize], matrix: &DMatrix<f64>, modes: &[usize]) -> Result<Self> {
        if matrix.nrows() != 2 * modes.len() || matrix.ncols() != 2 * modes.len() {
            return Err(Error::DimensionMismatch {
                expected: 2 * modes.len(),
                got: matrix.nrows(),
            });
        }
        if let Some(&m) = modes.iter().find(|&&m| m >= dims.len()) {
            return Err(Error::ModeOutOfRange {
                index: m,
                n_modes: dims.len(),
            });
        }
        let dim: usize = dims.iter().product();
        let stride = strides(dims);
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        let levels = |idx: usize, m: usize| (idx / stride[m]) % dims[m];
        for a in 0..matrix.nrows() {
            for b in 0..matrix.ncols() {
                let g = 0.5 * (matrix[(a, b)] + matrix[(b, a)]);
                if g == 0.0 {
                    continue;
                }
                let (ma, mb) = (modes[a / 2], modes[b / 2]);
                if ma == mb {
                    let local = local_entries(&local_product(dims[ma], a, b));
                    for idx in 0..dim {
                        let n = levels(idx, ma);
                        for &(r, c, v) in local.iter().filter(|e| e.1 == n) {
                            let row = idx + r * stride[ma] - c * stride[ma];
                            *acc.entry((row, idx)).or_default() += v * g;
                        }
                    }
                } else {
                    let la = local_entries(&quadrature(dims[ma], a % 2 == 1));
                    let lb = local_entries(&quadrature(dims[mb], b % 2 == 1));
                    for idx in 0..dim {
                        let (na, nb) = (levels(idx, ma), levels(idx, mb));
                        for &(ra, ca, va) in la.iter().filter(|e| e.1 == na) {
                            for &(rb, cb, vb) in lb.iter().filter(|e| e.1 == nb) {
                                let row = idx + ra * stride[ma] + rb * stride[mb]
                                    - ca * stride[ma]
                                    - cb * stride[mb];
                                *acc.entry((row, idx)).or_default() += va * vb * g;
                            }
                        }
                    }
                }
            }
        }
        Ok(Self::from_entries(dim, acc))
    }

    fn from_entries(dim: usize, acc: BTreeMap<(usize, usize), C64>) -> Self {
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut vals = Vec::with_capacity(acc.len());
        for ((r, c), v) in acc {
            if v.norm() == 0.0 {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|r| self.cols[self.row_ptr[r]..self.row_ptr[r + 1]].iter().all(|&c| c == r))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[i])] += self.vals[i];
            }
        }
        m
    }

    /// `Σ_k w_k ⟨ψ_k|O|ψ_k⟩` over ensemble columns stored as
    /// `amps[basis * rank + k]`.
    pub(crate) fn ensemble_expectation(&self, amps: &[C64], weights: &[f64]) -> C64 {
        let rank = weights.len();
        let mut total = C64::new(0.0, 0.0);
        for r in 0..self.dim {
            let bra = &amps[r * rank..(r + 1) * rank];
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                let ket = &amps[self.cols[i] * rank..(self.cols[i] + 1) * rank];
                let mut s = C64::new(0.0, 0.0);
                for k in 0..rank {
                    s += bra[k].conj() * ket[k] * weights[k];
                }
                total += self.vals[i] * s;
            }
        }
        total
    }
}

/// `H(χ) = H_0 + χ V` on the union sparsity pattern of both parts.
#[derive(Debug, Clone)]
pub(crate) struct SwitchedOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    free: Vec<C64>,
    interaction: Vec<C64>,
    real: bool,
}

impl SwitchedOperator {
    pub(crate) fn new(free: &FockOperator, interaction: &FockOperator) -> Self {
        let dim = free.dim;
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::new();
        let (mut fv, mut iv) = (Vec::new(), Vec::new());
        for r in 0..dim {
            let mut row: BTreeMap<usize, (C64, C64)> = BTreeMap::new();
            for i in free.row_ptr[r]..free.row_ptr[r + 1] {
                row.entry(free.cols[i]).or_default().0 += free.vals[i];
            }
            for i in interaction.row_ptr[r]..interaction.row_ptr[r + 1] {
                row.entry(interaction.cols[i]).or_default().1 += interaction.vals[i];
            }
            row_ptr[r + 1] = row_ptr[r] + row.len();
            for (c, (f, v)) in row {
                cols.push(c);
                fv.push(f);
                iv.push(v);
            }
        }
        let real = fv.iter().chain(&iv).all(|v| v.im == 0.0);
        Self {
            dim,
            row_ptr,
            cols,
            free: fv,
            interaction: iv,
            real,
        }
    }

    pub(crate) fn values_at(&self, chi: f64) -> Vec<C64> {
        self.free
            .iter()
            .zip(&self.interaction)
            .map(|(f, v)| f + v * chi)
            .collect()
    }

    /// `out = H x` for `rank` stacked columns, with `out` overwritten.
    pub(crate) fn apply(&self, vals: &[C64], x: &[C64], out: &mut [C64], rank: usize) {
        for r in 0..self.dim {
            let o = &mut out[r * rank..(r + 1) * rank];
            o.fill(C64::new(0.0, 0.0));
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                let xs = &x[self.cols[i] * rank..(self.cols[i] + 1) * rank];
                if self.real {
                    let v = vals[i].re;
                    for (oo, xx) in o.iter_mut().zip(xs) {
                        oo.re += v * xx.re;
                        oo.im += v * xx.im;
                    }
                } else {
                    let v = vals[i];
                    for (oo, xx) in o.iter_mut().zip(xs) {
                        *oo += xx * v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_mode_is_number_operator() {
        let w = 1.7;
        let f = DMatrix::from_diagonal_element(2, 2, 0.5 * w);
        let op = FockOperator::quadratic(&[6], &f, &[0]).unwrap();
        assert!(op.is_diagonal());
        let d = op.to_dense();
        for n in 0..6 {
            assert!((d[(n, n)].re - w * (n as f64 + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn position_coupling_connects_neighbouring_levels() {
        // H = q_0 q_1 on two modes with cutoff 3
        let mut f = DMatrix::zeros(4, 4);
        f[(0, 2)] = 1.0;
        let op = FockOperator::quadratic(&[3, 3], &f, &[0, 1]).unwrap();
        let d = op.to_dense();
        // G has 1/2 at (0,2) and (2,0), so the operator is q_0 q_1.
        // ⟨1,1|q q|0,0⟩ = 1/2
        assert!((d[(4, 0)].re - 0.5).abs() < 1e-15);
        assert!((d[(0, 4)].re - 0.5).abs() < 1e-15);
        assert!((d[(1 * 3 + 2, 0 * 3 + 1)].re - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((&d - d.adjoint()).camax() < 1e-15);
        assert_eq!(op.nnz(), 16);
    }

    #[test]
    fn momentum_cross_term_is_hermitian() {
        let mut f = DMatrix::zeros(4, 4);
        f[(1, 2)] = 0.3;
        f[(3, 3)] = 1.0;
        let op = FockOperator::quadratic(&[4, 5], &f, &[0, 1]).unwrap();
        let d = op.to_dense();
        assert!((&d - d.adjoint()).camax() < 1e-15);
        assert!(d.iter().any(|v| v.im != 0.0));
    }

    #[test]
    fn strides_are_row_major() {
        assert_eq!(strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(strides(&[5]), vec![1]);
    }
}
