//! Zero-sum matrix games up to 4x4: exact 2x2 closed form with saddle-point
//! check, square-kernel enumeration above that.

#[derive(Debug, Clone)]
pub struct MatrixGame {
    /// Payoff to the row player (Maximizer), entries in [0,1].
    pub payoff: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix must be between 1x1 and 4x4, got {0}x{1}")]
    Size(usize, usize),
    #[error("entry ({0},{1}) = {2} outside [0,1]")]
    Entry(usize, usize, f64),
    #[error("no optimal kernel found (numerical degeneracy)")]
    NoKernel,
}

impl MatrixGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Result<MatrixGame, MatrixError> {
        let m = payoff.len();
        let n = payoff.first().map_or(0, |r| r.len());
        if m == 0 || n == 0 || m > 4 || n > 4 || payoff.iter().any(|r| r.len() != n) {
            return Err(MatrixError::Size(m, n));
        }
        for (i, row) in payoff.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) || x.is_nan() {
                    return Err(MatrixError::Entry(i, j, x));
                }
            }
        }
        Ok(MatrixGame { payoff })
    }

    pub fn rows(&self) -> usize {
        self.payoff.len()
    }

    pub fn cols(&self) -> usize {
        self.payoff[0].len()
    }
}

const OPT_TOL: f64 = 1e-9;

/// Value and optimal mixed strategies of a zero-sum matrix game.
pub fn matrix_game_value(g: &MatrixGame) -> Result<(f64, Vec<f64>, Vec<f64>), MatrixError> {
    let (m, n) = (g.rows(), g.cols());
    if m == 2 && n == 2 {
        return Ok(solve_2x2([
            [g.payoff[0][0], g.payoff[0][1]],
            [g.payoff[1][0], g.payoff[1][1]],
        ]));
    }
    solve_kernel(g)
}

/// Fast path used by the Bellman operator on 2-action concurrent nodes.
pub fn solve_2x2(a: [[f64; 2]; 2]) -> (f64, Vec<f64>, Vec<f64>) {
    // saddle point check
    for i in 0..2 {
        for j in 0..2 {
            let row_min = a[i][0].min(a[i][1]);
            let col_max = a[0][j].max(a[1][j]);
            if a[i][j] <= row_min + 0.0 && a[i][j] >= col_max - 0.0 {
                let mut x = vec![0.0, 0.0];
                let mut y = vec![0.0, 0.0];
                x[i] = 1.0;
                y[j] = 1.0;
                return (a[i][j], x, y);
            }
        }
    }
    // fully mixed
    let denom = a[0][0] + a[1][1] - a[0][1] - a[1][0];
    debug_assert!(denom.abs() > 0.0, "no saddle implies nonzero denominator");
    let v = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / denom;
    let p0 = (a[1][1] - a[1][0]) / denom;
    let q0 = (a[1][1] - a[0][1]) / denom;
    (
        v,
        vec![p0.clamp(0.0, 1.0), (1.0 - p0).clamp(0.0, 1.0)],
        vec![q0.clamp(0.0, 1.0), (1.0 - q0).clamp(0.0, 1.0)],
    )
}

fn det(b: &[Vec<f64>]) -> f64 {
    match b.len() {
        1 => b[0][0],
        2 => b[0][0] * b[1][1] - b[0][1] * b[1][0],
        k => {
            let mut d = 0.0;
            for j in 0..k {
                let minor: Vec<Vec<f64>> = (1..k)
                    .map(|i| {
                        (0..k)
                            .filter(|&c| c != j)
                            .map(|c| b[i][c])
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                d += sign * b[0][j] * det(&minor);
            }
            d
        }
    }
}

fn cofactor(b: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let k = b.len();
    if k == 1 {
        return 1.0;
    }
    let minor: Vec<Vec<f64>> = (0..k)
        .filter(|&r| r != i)
        .map(|r| {
            (0..k)
                .filter(|&c| c != j)
                .map(|c| b[r][c])
                .collect()
        })
        .collect();
    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
    sign * det(&minor)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Square-kernel enumeration: for every square submatrix, derive the
/// candidate value and mixes from cofactor sums and keep the first pair that
/// verifies as optimal against all pure strategies.
fn solve_kernel(g: &MatrixGame) -> Result<(f64, Vec<f64>, Vec<f64>), MatrixError> {
    let (m, n) = (g.rows(), g.cols());
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                let b: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|&i| cols.iter().map(|&j| g.payoff[i][j]).collect())
                    .collect();
                let cof_sum: f64 = (0..k)
                    .map(|i| (0..k).map(|j| cofactor(&b, i, j)).sum::<f64>())
                    .sum();
                if cof_sum.abs() < 1e-12 {
                    continue;
                }
                let v = det(&b) / cof_sum;
                // row weights from column sums of the adjugate, col weights
                // from row sums
                let mut x = vec![0.0; m];
                let mut y = vec![0.0; n];
                let mut xs = 0.0;
                let mut ys = 0.0;
                for (bi, &i) in rows.iter().enumerate() {
                    let w: f64 = (0..k).map(|j| cofactor(&b, bi, j)).sum();
                    x[i] = w;
                    xs += w;
                }
                for (bj, &j) in cols.iter().enumerate() {
                    let w: f64 = (0..k).map(|i| cofactor(&b, i, bj)).sum();
                    y[j] = w;
                    ys += w;
                }
                if xs.abs() < 1e-12 || ys.abs() < 1e-12 {
                    continue;
                }
                for xi in &mut x {
                    *xi /= xs;
                }
                for yj in &mut y {
                    *yj /= ys;
                }
                if x.iter().any(|&p| p < -1e-9) || y.iter().any(|&p| p < -1e-9) {
                    continue;
                }
                for p in x.iter_mut().chain(y.iter_mut()) {
                    *p = p.max(0.0);
                }
                if verify(g, v, &x, &y) {
                    return Ok((v, x, y));
                }
            }
        }
    }
    Err(MatrixError::NoKernel)
}

fn verify(g: &MatrixGame, v: f64, x: &[f64], y: &[f64]) -> bool {
    let (m, n) = (g.rows(), g.cols());
    // row mix achieves ≥ v against every column
    for j in 0..n {
        let got: f64 = (0..m).map(|i| x[i] * g.payoff[i][j]).sum();
        if got < v - OPT_TOL {
            return false;
        }
    }
    // column mix holds every row to ≤ v
    for i in 0..m {
        let got: f64 = (0..n).map(|j| y[j] * g.payoff[i][j]).sum();
        if got > v + OPT_TOL {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies() {
        let g = MatrixGame::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (v, x, y) = matrix_game_value(&g).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12);
        assert!((y[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dominant_row() {
        let g = MatrixGame::new(vec![vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let (v, x, _) = matrix_game_value(&g).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MatrixGame::new(vec![vec![0.0; 5]; 2]).is_err());
        assert!(MatrixGame::new(vec![vec![2.0]]).is_err());
        assert!(MatrixGame::new(vec![]).is_err());
    }

    #[test]
    fn three_by_three_cycle() {
        // rock-paper-scissors rescaled into [0,1]: value 1/2, uniform mixes
        let g = MatrixGame::new(vec![
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.5, 1.0],
            vec![1.0, 0.0, 0.5],
        ])
        .unwrap();
        let (v, x, y) = matrix_game_value(&g).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
        for p in x.iter().chain(y.iter()) {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }
}
