use alloc::vec;
use alloc::vec::Vec;

/// `max c·x  s.t.  A x ≤ b,  x ≥ 0` with `b ≥ 0`, so the all-slack basis is
/// a feasible start and no phase one is needed.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("right-hand side must be non-negative")]
    NegativeRhs,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("simplex did not converge within {0} pivots")]
    IterationLimit(usize),
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    /// Adds `Σ coef·x[var] ≤ rhs`.
    pub fn add_le(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push((terms, rhs));
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let n = self.objective.len();
        let m = self.rows.len();
        let width = n + m + 1;
        let mut t = vec![0.0; (m + 1) * width];
        let mut basis: Vec<usize> = (n..n + m).collect();

        for (i, (terms, rhs)) in self.rows.iter().enumerate() {
            if *rhs < 0.0 {
                return Err(LpError::NegativeRhs);
            }
            let row = &mut t[i * width..(i + 1) * width];
            for &(j, a) in terms {
                row[j] += a;
            }
            row[n + i] = 1.0;
            row[width - 1] = *rhs;
            // equilibrate so pivot tolerances mean the same on every row
            let scale = row[..n].iter().fold(0.0f64, |s, a| s.max(a.abs()));
            if scale > 0.0 {
                row.iter_mut().for_each(|a| *a /= scale);
            }
        }
        let cmax = self.objective.iter().fold(0.0f64, |s, c| s.max(c.abs()));
        let cost_tol = 1e-11 * cmax.max(1.0);
        {
            let z = &mut t[m * width..];
            for (j, c) in self.objective.iter().enumerate() {
                z[j] = -c;
            }
        }

        let limit = 50 * (n + m) + 1000;
        let mut degenerate = 0usize;
        for _ in 0..limit {
            let z = &t[m * width..(m + 1) * width - 1];
            // Dantzig's rule, falling back to Bland's after a run of
            // degenerate pivots.
            let entering = if degenerate > 50 {
                z.iter().position(|&r| r < -cost_tol)
            } else {
                z.iter()
                    .enumerate()
                    .filter(|(_, &r)| r < -cost_tol)
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(j, _)| j)
            };
            let Some(col) = entering else {
                let mut x = vec![0.0; n];
                for (i, &b) in basis.iter().enumerate() {
                    if b < n {
                        x[b] = t[i * width + width - 1];
                    }
                }
                let objective = x.iter().zip(&self.objective).map(|(a, c)| a * c).sum();
                return Ok(LpSolution { x, objective });
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = t[i * width + col];
                if a > 1e-12 {
                    let ratio = t[i * width + width - 1] / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[r]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            pivot(&mut t, width, m, row, col);
            basis[row] = col;
        }
        Err(LpError::IterationLimit(limit))
    }
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    let (before, rest) = t.split_at_mut(row * width);
    let (pivot_row, after) = rest.split_at_mut(width);
    pivot_row.iter_mut().for_each(|a| *a /= p);
    pivot_row[col] = 1.0;
    let eliminate = |r: &mut [f64]| {
        let f = r[col];
        if f != 0.0 {
            for (a, &b) in r.iter_mut().zip(pivot_row.iter()) {
                *a -= f * b;
            }
            r[col] = 0.0;
        }
    };
    before.chunks_mut(width).for_each(eliminate);
    after.chunks_mut(width).take(m - row).for_each(eliminate);
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new(vec![3.0, 5.0]);
        lp.add_le(vec![(0, 1.0)], 4.0);
        lp.add_le(vec![(1, 2.0)], 12.0);
        lp.add_le(vec![(0, 3.0), (1, 2.0)], 18.0);
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 36.0, max_relative = 1e-12);
        assert_relative_eq!(s.x[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(s.x[1], 6.0, max_relative = 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add_le(vec![(1, 1.0)], 1.0);
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn negative_rhs_rejected() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![(0, 1.0)], -1.0);
        assert_eq!(lp.solve(), Err(LpError::NegativeRhs));
    }

    #[test]
    fn assignment_relaxation_is_integral() {
        // 2x2 assignment, weights [[4, 1], [3, 3]] → x00 + x11 = 7
        let w = [4.0, 1.0, 3.0, 3.0];
        let mut lp = LinearProgram::new(w.to_vec());
        lp.add_le(vec![(0, 1.0), (1, 1.0)], 1.0);
        lp.add_le(vec![(2, 1.0), (3, 1.0)], 1.0);
        lp.add_le(vec![(0, 1.0), (2, 1.0)], 1.0);
        lp.add_le(vec![(1, 1.0), (3, 1.0)], 1.0);
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 7.0, max_relative = 1e-12);
        for v in s.x {
            assert!(v.abs() < 1e-9 || (v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_costs_stay_at_zero() {
        let mut lp = LinearProgram::new(vec![-1.0, 2.0]);
        lp.add_le(vec![(0, 1.0), (1, 1.0)], 3.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.x[0], 0.0);
        assert_relative_eq!(s.x[1], 3.0);
    }
}
