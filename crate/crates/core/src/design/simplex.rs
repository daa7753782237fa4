//! Dense phase-1 simplex for `A x = b, x ≥ 0` with Bland's rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct PhaseOne {
    /// Optimal sum of artificial variables.
    pub value: f64,
    /// Basic variable per row; indices `≥ n` are artificials.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

/// Minimizes `Σ a` subject to `A x + a = b`, `x, a ≥ 0`, starting from the
/// all-artificial basis. Rows with negative `b` are negated first.
pub(crate) fn phase_one(a: &DMatrix<f64>, b: &DVector<f64>, pivot_tol: f64) -> Result<PhaseOne> {
    let (m, n) = a.shape();
    let width = n + m + 1;
    let rhs = n + m;
    // rows 0..m constraints, row m reduced costs
    let mut tab = DMatrix::<f64>::zeros(m + 1, width);
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[(i, j)] = s * a[(i, j)];
        }
        tab[(i, n + i)] = 1.0;
        tab[(i, rhs)] = s * b[i];
    }
    for j in 0..n {
        tab[(m, j)] = -(0..m).map(|i| tab[(i, j)]).sum::<f64>();
    }
    tab[(m, rhs)] = -(0..m).map(|i| tab[(i, rhs)]).sum::<f64>();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let original = tab.rows(0, m).into_owned();

    let max_pivots = 50 * (n + m) + 1000;
    let mut pivots = 0;
    let mut fresh = true;
    loop {
        let entering = (0..n + m).find(|&j| tab[(m, j)] < -pivot_tol);
        let Some(col) = entering else {
            if fresh {
                break;
            }
            // confirm optimality on a tableau rebuilt from the basis
            tab = reinvert(&original, &basis, n)?;
            fresh = true;
            continue;
        };
        let candidates: Vec<(usize, f64, f64)> = (0..m)
            .filter(|&i| tab[(i, col)] > pivot_tol)
            .map(|i| (i, tab[(i, rhs)].max(0.0) / tab[(i, col)], tab[(i, col)]))
            .collect();
        let min_ratio = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let window = min_ratio + 1e-12 * (1.0 + min_ratio);
        let tied = candidates.iter().filter(|c| c.1 <= window);
        // Degenerate steps follow Bland's rule, which cannot cycle; steps
        // that decrease the objective take the largest pivot in the window.
        let leave = if min_ratio <= 1e-12 {
            tied.min_by_key(|c| basis[c.0])
        } else {
            tied.max_by(|a, b| a.2.total_cmp(&b.2).then(basis[b.0].cmp(&basis[a.0])))
        }
        .map(|c| (c.0, c.1));
        let Some((row, _)) = leave else {
            // the phase-1 objective is bounded below by 0
            return Err(Error::Degenerate("unbounded phase-1 direction".into()));
        };
        pivot(&mut tab, row, col);
        basis[row] = col;
        pivots += 1;
        fresh = false;
        if pivots % REINVERT_EVERY == 0 {
            tab = reinvert(&original, &basis, n)?;
            fresh = true;
        }
        if pivots > max_pivots {
            return Err(Error::Degenerate(format!(
                "no termination after {pivots} pivots"
            )));
        }
    }
    Ok(PhaseOne {
        value: -tab[(m, rhs)],
        basis,
        pivots,
    })
}

const REINVERT_EVERY: usize = 50;

/// Rebuilds the tableau for `basis` from the original rows `[S | I | β₀]`,
/// discarding the rounding accumulated by pivoting.
fn reinvert(full: &DMatrix<f64>, basis: &[usize], n: usize) -> Result<DMatrix<f64>> {
    let m = basis.len();
    let rhs = n + m;
    let cols = DMatrix::from_fn(m, m, |i, k| full[(i, basis[k])]);
    let lu = cols.lu();
    let body = lu
        .solve(full)
        .ok_or_else(|| Error::Degenerate("singular basis during reinversion".into()))?;
    let mut out = DMatrix::zeros(m + 1, rhs + 1);
    out.view_mut((0, 0), (m, rhs + 1)).copy_from(&body);
    for k in 0..m {
        out[(k, basis[k])] = 1.0;
        out[(k, rhs)] = out[(k, rhs)].max(0.0);
    }
    let cb: Vec<f64> = basis.iter().map(|&j| if j >= n { 1.0 } else { 0.0 }).collect();
    for j in 0..=rhs {
        let cost = if (n..rhs).contains(&j) { 1.0 } else { 0.0 };
        let z: f64 = (0..m).map(|k| cb[k] * out[(k, j)]).sum();
        out[(m, j)] = cost - z;
    }
    out[(m, rhs)] = -(0..m).map(|k| cb[k] * out[(k, rhs)]).sum::<f64>();
    Ok(out)
}

fn pivot(tab: &mut DMatrix<f64>, row: usize, col: usize) {
    let p = tab[(row, col)];
    let width = tab.ncols();
    for j in 0..width {
        tab[(row, j)] /= p;
    }
    tab[(row, col)] = 1.0;
    for i in 0..tab.nrows() {
        if i == row {
            continue;
        }
        let f = tab[(i, col)];
        if f == 0.0 {
            continue;
        }
        for j in 0..width {
            let v = tab[(row, j)];
            tab[(i, j)] -= f * v;
        }
        tab[(i, col)] = 0.0;
    }
}

/// Columns of `[A | I]` selected by `basis`.
pub(crate) fn basis_matrix(a: &DMatrix<f64>, basis: &[usize], negate: &[bool]) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut bm = DMatrix::zeros(m, m);
    for (k, &j) in basis.iter().enumerate() {
        for i in 0..m {
            let s = if negate[i] { -1.0 } else { 1.0 };
            bm[(i, k)] = if j < n {
                s * a[(i, j)]
            } else if j - n == i {
                1.0
            } else {
                0.0
            };
        }
    }
    bm
}
