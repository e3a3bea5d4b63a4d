use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::dense::Matrix;

type IntMatrix = Matrix<BigInt>;

/// Result of a Smith normal form computation: `u * a * v = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    /// Nonzero diagonal entries d_1 | d_2 | ...
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

fn swap_rows(m: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for c in 0..m.cols() {
        let t = m[(a, c)].clone();
        m[(a, c)] = m[(b, c)].clone();
        m[(b, c)] = t;
    }
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for r in 0..m.rows() {
        let t = m[(r, a)].clone();
        m[(r, a)] = m[(r, b)].clone();
        m[(r, b)] = t;
    }
}

/// row[dst] += k * row[src]
fn add_row(m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for c in 0..m.cols() {
        let v = &m[(dst, c)] + k * &m[(src, c)];
        m[(dst, c)] = v;
    }
}

/// col[dst] += k * col[src]
fn add_col(m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for r in 0..m.rows() {
        let v = &m[(r, dst)] + k * &m[(r, src)];
        m[(r, dst)] = v;
    }
}

fn negate_row(m: &mut IntMatrix, r: usize) {
    for c in 0..m.cols() {
        let v = -&m[(r, c)];
        m[(r, c)] = v;
    }
}

/// Smith normal form by gcd pivoting. `u` and `v` are unimodular.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for r in t..rows {
                for c in t..cols {
                    if d[(r, c)].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(br, bc)| d[(r, c)].abs() < d[(br, bc)].abs()) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = best else {
                return SmithDecomposition { u, d, v };
            };
            swap_rows(&mut d, t, pr);
            swap_rows(&mut u, t, pr);
            swap_cols(&mut d, t, pc);
            swap_cols(&mut v, t, pc);

            let mut clean = true;
            for r in t + 1..rows {
                let q = d[(r, t)].div_floor(&d[(t, t)]);
                if !q.is_zero() {
                    add_row(&mut d, r, t, &-&q);
                    add_row(&mut u, r, t, &-&q);
                }
                if !d[(r, t)].is_zero() {
                    clean = false;
                }
            }
            for c in t + 1..cols {
                let q = d[(t, c)].div_floor(&d[(t, t)]);
                if !q.is_zero() {
                    add_col(&mut d, c, t, &-&q);
                    add_col(&mut v, c, t, &-&q);
                }
                if !d[(t, c)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold a row carrying a non-multiple into the pivot row
            let pivot = d[(t, t)].clone();
            let offender =
                (t + 1..rows).find(|&r| (t + 1..cols).any(|c| !d[(r, c)].is_multiple_of(&pivot)));
            match offender {
                Some(r) => {
                    add_row(&mut d, t, r, &BigInt::one());
                    add_row(&mut u, t, r, &BigInt::one());
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            negate_row(&mut d, t);
            negate_row(&mut u, t);
        }
    }
    SmithDecomposition { u, d, v }
}

/// Row-style Hermite normal form of the row space of `a`: upper echelon,
/// positive pivots, entries above each pivot reduced into `[0, pivot)`.
/// Zero rows are dropped, so the result is canonical for the row lattice.
pub fn hermite_rows(a: &IntMatrix) -> IntMatrix {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if pivot_row == rows {
            break;
        }
        // Euclid down the column until a single nonzero entry remains
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows {
                if m[(r, c)].is_zero() {
                    continue;
                }
                if best.is_none_or(|b| m[(r, c)].abs() < m[(b, c)].abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            swap_rows(&mut m, pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..rows {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let q = m[(r, c)].div_floor(&m[(pivot_row, c)]);
                add_row(&mut m, r, pivot_row, &-&q);
                if !m[(r, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[(pivot_row, c)].is_zero() {
            continue;
        }
        if m[(pivot_row, c)].is_negative() {
            negate_row(&mut m, pivot_row);
        }
        let p = m[(pivot_row, c)].clone();
        for r in 0..pivot_row {
            let q = m[(r, c)].div_floor(&p);
            if !q.is_zero() {
                add_row(&mut m, r, pivot_row, &-&q);
            }
        }
        pivots.push(c);
        pivot_row += 1;
    }
    let kept: Vec<Vec<BigInt>> = (0..pivot_row).map(|r| m.row(r).to_vec()).collect();
    if kept.is_empty() {
        return IntMatrix::zeros(0, cols);
    }
    IntMatrix::from_rows(kept)
}
