//! Dense revised primal simplex for standard-form problems
//!   minimize c·w  subject to  A w = b,  w ≥ 0,
//! with columns generated on demand. The occupation-measure programs have
//! few rows (normalization plus Fourier closedness constraints) and up to
//! hundreds of thousands of columns, so the solver never materializes A.
//!
//! Anti-cycling is a deterministic right-hand-side perturbation (the
//! occupation LPs are maximally degenerate: b = [1, 0, …, 0]), which makes
//! every pivot strictly improving; entering is Dantzig with smallest-index
//! tie break. Reduced costs do not depend on b, so the optimal basis of the
//! perturbed problem is optimal for the original and the reported objective
//! is computed with the exact right-hand side.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Feasibility and optimality tolerance.
pub const LP_TOL: f64 = 1e-9;

/// Anti-degeneracy RHS perturbation ladder. The occupation LPs are
/// maximally degenerate; a sizable perturbation keeps pivot counts small.
/// The final basis is checked for exact-b primal feasibility (dual
/// feasibility never involves b), retrying with a smaller perturbation in
/// the rare case the large one selects an exactly-infeasible basis.
const PERTURB_LADDER: [f64; 3] = [1e-5, 1e-8, 1e-11];

/// Problem description by column oracle; `column` must fill `out` with the
/// `n_rows` entries of column `j`.
pub trait ColumnOracle: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn cost(&self, j: usize) -> f64;
    fn column(&self, j: usize, out: &mut [f64]);
    fn rhs(&self, out: &mut [f64]);
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub objective: f64,
    /// (column index, value) for the basic variables with nonzero value
    pub support: Vec<(usize, f64)>,
    pub iterations: usize,
    pub phase1_iterations: usize,
}

struct Tableau<'a, O: ColumnOracle> {
    oracle: &'a O,
    m: usize,
    n: usize,
    /// basis column indices; j >= n encodes the artificial for row j − n
    basis: Vec<usize>,
    b: Vec<f64>,
    /// row scaling: +1 or −1 applied so that b ≥ 0
    row_sign: Vec<f64>,
}

impl<'a, O: ColumnOracle> Tableau<'a, O> {
    fn real_column(&self, j: usize, out: &mut DVector<f64>) {
        if j >= self.n {
            out.fill(0.0);
            out[j - self.n] = 1.0;
            return;
        }
        let mut raw = vec![0.0; self.m];
        self.oracle.column(j, &mut raw);
        for i in 0..self.m {
            out[i] = raw[i] * self.row_sign[i];
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let mut bmat = DMatrix::zeros(self.m, self.m);
        let mut col = DVector::zeros(self.m);
        for (k, &j) in self.basis.iter().enumerate() {
            self.real_column(j, &mut col);
            bmat.set_column(k, &col);
        }
        bmat
    }

    /// One simplex phase with the given cost function; artificial variables
    /// priced only when `allow_artificial_entering`.
    fn run_phase<C: Fn(usize) -> f64>(
        &mut self,
        cost: C,
        allow_artificial_entering: bool,
        max_iters: usize,
    ) -> Result<(f64, Vec<f64>, usize)> {
        let m = self.m;
        let mut iters = 0;
        loop {
            iters += 1;
            if iters > max_iters {
                return Err(Error::NotConverged(format!(
                    "simplex exceeded {max_iters} pivots"
                )));
            }
            let bmat = self.basis_matrix();
            let lu = bmat.lu();
            let rhs = DVector::from_column_slice(&self.b);
            let xb = lu
                .solve(&rhs)
                .ok_or_else(|| Error::LpInfeasible("singular basis matrix".into()))?;
            // dual prices: Bᵀ y = c_B
            let cb = DVector::from_iterator(m, self.basis.iter().map(|&j| cost(j)));
            let ylu = self.basis_matrix().transpose().lu();
            let y = ylu
                .solve(&cb)
                .ok_or_else(|| Error::LpInfeasible("singular basis matrix".into()))?;

            // Dantzig: most negative reduced cost, smallest index on ties
            let mut entering = None;
            let mut most_negative = -LP_TOL;
            let mut col = DVector::zeros(m);
            let upper = if allow_artificial_entering { self.n + m } else { self.n };
            for j in 0..upper {
                if self.basis.contains(&j) {
                    continue;
                }
                self.real_column(j, &mut col);
                let reduced = cost(j) - y.dot(&col);
                if reduced < most_negative {
                    most_negative = reduced;
                    entering = Some(j);
                }
            }
            let entering = match entering {
                Some(j) => j,
                None => {
                    let obj = cb.dot(&xb);
                    return Ok((obj, xb.iter().copied().collect(), iters));
                }
            };

            // ratio test
            self.real_column(entering, &mut col);
            let d = lu
                .solve(&col)
                .ok_or_else(|| Error::LpInfeasible("singular basis matrix".into()))?;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if d[i] > LP_TOL {
                    let ratio = xb[i].max(0.0) / d[i];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - LP_TOL
                                || (ratio < lr + LP_TOL && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                Some((i, _)) => self.basis[i] = entering,
                None => {
                    return Err(Error::LpUnbounded(format!(
                        "column {entering} has no blocking row"
                    )))
                }
            }
        }
    }
}

/// Two-phase revised simplex. Returns the optimal support; infeasibility and
/// unboundedness are reported as errors.
pub fn solve<O: ColumnOracle>(oracle: &O) -> Result<LpSolution> {
    let mut last_err = None;
    for (step, eps) in PERTURB_LADDER.iter().enumerate() {
        match solve_with_perturbation(oracle, *eps) {
            Ok(Some(sol)) => return Ok(sol),
            Ok(None) => continue, // basis infeasible for the exact b; retry
            Err(e @ Error::LpInfeasible(_)) | Err(e @ Error::LpUnbounded(_)) => return Err(e),
            Err(e) => {
                last_err = Some(e);
                if step + 1 == PERTURB_LADDER.len() {
                    break;
                }
            }
        }
    }
    Err(last_err
        .unwrap_or_else(|| Error::LpInfeasible("no perturbation level produced a basis".into())))
}

fn solve_with_perturbation<O: ColumnOracle>(oracle: &O, eps: f64) -> Result<Option<LpSolution>> {
    let m = oracle.n_rows();
    let n = oracle.n_cols();
    let mut b = vec![0.0; m];
    oracle.rhs(&mut b);
    let row_sign: Vec<f64> = b.iter().map(|bi| if *bi < 0.0 { -1.0 } else { 1.0 }).collect();
    for (bi, s) in b.iter_mut().zip(&row_sign) {
        *bi *= s;
    }
    let b_exact = b.clone();
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for (i, bi) in b.iter_mut().enumerate() {
        let jitter = 1.0 + ((i as u64).wrapping_mul(2654435761) % 1009) as f64 / 1009.0;
        *bi += eps * scale * jitter;
    }

    let mut tab = Tableau {
        oracle,
        m,
        n,
        basis: (n..n + m).collect(),
        b,
        row_sign,
    };

    // phase 1: drive the artificials to zero
    let max_iters = 20_000 + 100 * m;
    let (obj1, _, it1) = tab.run_phase(|j| if j >= n { 1.0 } else { 0.0 }, true, max_iters)?;
    if obj1 > 1e-7 {
        return Err(Error::LpInfeasible(format!(
            "phase-1 objective {obj1:.3e}; constraints inconsistent on this grid"
        )));
    }
    // pivot leftover artificials out of the basis where possible
    if tab.basis.iter().any(|&j| j >= n) {
        let bmat = tab.basis_matrix();
        let lu = bmat.lu();
        let mut col = DVector::zeros(m);
        for i in 0..m {
            if tab.basis[i] < n {
                continue;
            }
            'search: for j in 0..n {
                if tab.basis.contains(&j) {
                    continue;
                }
                tab.real_column(j, &mut col);
                if let Some(d) = lu.solve(&col) {
                    if d[i].abs() > 1e-7 {
                        tab.basis[i] = j;
                        break 'search;
                    }
                }
            }
        }
        if tab.basis.iter().any(|&j| j >= n) {
            return Err(Error::LpInfeasible(
                "redundant constraint row; could not remove artificial from the basis".into(),
            ));
        }
    }

    // phase 2
    let (_, _, it2) =
        tab.run_phase(|j| if j >= n { 0.0 } else { oracle.cost(j) }, false, max_iters)?;

    // basic solution with the exact right-hand side: the basis stays dual
    // feasible (reduced costs never involve b), so exact primal feasibility
    // certifies exact optimality
    let bmat = tab.basis_matrix();
    let xb = bmat
        .lu()
        .solve(&DVector::from_column_slice(&b_exact))
        .ok_or_else(|| Error::LpInfeasible("singular optimal basis".into()))?;
    if xb.iter().any(|v| *v < -1e-9 * scale) {
        return Ok(None);
    }
    let mut objective = 0.0;
    let mut support: Vec<(usize, f64)> = Vec::new();
    for (&j, &v) in tab.basis.iter().zip(xb.iter()) {
        let v = v.max(0.0);
        if j < n {
            objective += oracle.cost(j) * v;
            if v > LP_TOL {
                support.push((j, v));
            }
        }
    }
    support.sort_by_key(|(j, _)| *j);
    Ok(Some(LpSolution { objective, support, iterations: it1 + it2, phase1_iterations: it1 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// minimize c·w s.t. Aw = b, w ≥ 0 with dense data.
    struct Dense {
        a: Vec<Vec<f64>>, // rows
        b: Vec<f64>,
        c: Vec<f64>,
    }

    impl ColumnOracle for Dense {
        fn n_rows(&self) -> usize {
            self.a.len()
        }
        fn n_cols(&self) -> usize {
            self.c.len()
        }
        fn cost(&self, j: usize) -> f64 {
            self.c[j]
        }
        fn column(&self, j: usize, out: &mut [f64]) {
            for (i, row) in self.a.iter().enumerate() {
                out[i] = row[j];
            }
        }
        fn rhs(&self, out: &mut [f64]) {
            out.copy_from_slice(&self.b);
        }
    }

    #[test]
    fn solves_a_small_lp() {
        // min −x − 2y s.t. x + y + s1 = 4, 2x + y − s2 = 2, all ≥ 0
        // optimum at x = 0, y = 4: objective −8
        let lp = Dense {
            a: vec![vec![1.0, 1.0, 1.0, 0.0], vec![2.0, 1.0, 0.0, -1.0]],
            b: vec![4.0, 2.0],
            c: vec![-1.0, -2.0, 0.0, 0.0],
        };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - (-8.0)).abs() < 1e-9, "objective {}", sol.objective);
    }

    #[test]
    fn detects_infeasible() {
        // x = 1 and x = 2 simultaneously
        let lp = Dense {
            a: vec![vec![1.0], vec![1.0]],
            b: vec![1.0, 2.0],
            c: vec![0.0],
        };
        assert!(matches!(solve(&lp), Err(Error::LpInfeasible(_))));
    }

    #[test]
    fn detects_unbounded() {
        // min −x s.t. x − y = 1: x can grow with y
        let lp = Dense {
            a: vec![vec![1.0, -1.0]],
            b: vec![1.0],
            c: vec![-1.0, 0.0],
        };
        assert!(matches!(solve(&lp), Err(Error::LpUnbounded(_))));
    }

    #[test]
    fn probability_simplex_picks_min_cost_atom() {
        // min c·w s.t. Σw = 1
        let lp = Dense {
            a: vec![vec![1.0; 5]],
            b: vec![1.0],
            c: vec![3.0, 1.0, 4.0, 0.5, 2.0],
        };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 0.5).abs() < 1e-12);
        assert_eq!(sol.support.len(), 1);
        assert_eq!(sol.support[0].0, 3);
    }
}
