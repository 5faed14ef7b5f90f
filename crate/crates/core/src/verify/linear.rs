use nalgebra::{DMatrix, DVector};

/// Largest system solved by dense LU; bigger ones use Gauss–Seidel.
pub const DIRECT_LIMIT: usize = 5000;
const RESIDUAL: f64 = 1e-10;

fn residual(rows: &[Vec<(usize, f64)>], b: &[f64], x: &[f64]) -> f64 {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let mx: f64 = row.iter().map(|&(j, p)| p * x[j]).sum();
            (x[i] - mx - b[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves `x = M x + b` for a transient (substochastic, eventually
/// escaping) sparse matrix `M` given by rows.
pub fn solve_transient(rows: &[Vec<(usize, f64)>], b: &[f64]) -> Vec<f64> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let mut x = if n <= DIRECT_LIMIT {
        let mut a = DMatrix::<f64>::identity(n, n);
        for (i, row) in rows.iter().enumerate() {
            for &(j, p) in row {
                a[(i, j)] -= p;
            }
        }
        let lu = a.lu();
        match lu.solve(&DVector::from_column_slice(b)) {
            Some(v) => v.as_slice().to_vec(),
            None => vec![0.0; n],
        }
    } else {
        vec![0.0; n]
    };
    // Gauss–Seidel sweeps: refinement after LU, the whole solve otherwise.
    for _ in 0..1_000_000 {
        if residual(rows, b, &x) < RESIDUAL {
            break;
        }
        for i in 0..n {
            let mut acc = b[i];
            let mut diag = 0.0;
            for &(j, p) in &rows[i] {
                if j == i {
                    diag += p;
                } else {
                    acc += p * x[j];
                }
            }
            x[i] = acc / (1.0 - diag);
        }
    }
    x
}
