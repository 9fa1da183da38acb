use serde::{Deserialize, Serialize};

use crate::polynomials::Scalar;

/// Symmetric matrix stored by structure. The families in this crate only
/// need these shapes; `Dense` is an escape hatch for tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SymMatrix<S> {
    ScaledIdentity {
        dim: usize,
        scale: S,
    },
    /// Leading 2x2 blocks `[[a, b], [b, c]]` on coordinate pairs
    /// `(2m, 2m+1)`, then a diagonal tail.
    Blocks {
        blocks: Vec<[S; 3]>,
        tail: Vec<S>,
    },
    Tridiagonal {
        diag: Vec<S>,
        off: Vec<S>,
    },
    Dense(Vec<Vec<S>>),
}

impl<S: Scalar> SymMatrix<S> {
    pub fn dim(&self) -> usize {
        match self {
            SymMatrix::ScaledIdentity { dim, .. } => *dim,
            SymMatrix::Blocks { blocks, tail } => 2 * blocks.len() + tail.len(),
            SymMatrix::Tridiagonal { diag, .. } => diag.len(),
            SymMatrix::Dense(rows) => rows.len(),
        }
    }

    pub fn diag(&self, i: usize) -> S {
        match self {
            SymMatrix::ScaledIdentity { scale, .. } => scale.clone(),
            SymMatrix::Blocks { blocks, tail } => {
                let nb = 2 * blocks.len();
                if i < nb {
                    let b = &blocks[i / 2];
                    if i.is_multiple_of(2) {
                        b[0].clone()
                    } else {
                        b[2].clone()
                    }
                } else {
                    tail[i - nb].clone()
                }
            }
            SymMatrix::Tridiagonal { diag, .. } => diag[i].clone(),
            SymMatrix::Dense(rows) => rows[i][i].clone(),
        }
    }

    /// Row `i` applied to `w`.
    pub fn row_dot(&self, ctx: &S::Ctx, i: usize, w: &[S]) -> S {
        match self {
            SymMatrix::ScaledIdentity { scale, .. } => scale.mul(&w[i]),
            SymMatrix::Blocks { blocks, tail } => {
                let nb = 2 * blocks.len();
                if i < nb {
                    let b = &blocks[i / 2];
                    let (p, q) = (i - i % 2, i - i % 2 + 1);
                    if i.is_multiple_of(2) {
                        b[0].mul(&w[p]).add(&b[1].mul(&w[q]))
                    } else {
                        b[1].mul(&w[p]).add(&b[2].mul(&w[q]))
                    }
                } else {
                    tail[i - nb].mul(&w[i])
                }
            }
            SymMatrix::Tridiagonal { diag, off } => {
                let mut acc = diag[i].mul(&w[i]);
                if i > 0 {
                    acc = acc.add(&off[i - 1].mul(&w[i - 1]));
                }
                if i + 1 < diag.len() {
                    acc = acc.add(&off[i].mul(&w[i + 1]));
                }
                acc
            }
            SymMatrix::Dense(rows) => rows[i]
                .iter()
                .zip(w)
                .fold(S::zero(ctx), |acc, (a, x)| acc.add(&a.mul(x))),
        }
    }

    pub fn matvec(&self, ctx: &S::Ctx, w: &[S]) -> Vec<S> {
        (0..self.dim()).map(|i| self.row_dot(ctx, i, w)).collect()
    }

    pub fn to_dense(&self, ctx: &S::Ctx) -> Vec<Vec<S>> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let mut e = vec![S::zero(ctx); d];
                        e[j] = S::from_f64(ctx, 1.0);
                        self.row_dot(ctx, i, &e)
                    })
                    .collect()
            })
            .collect()
    }

    /// Entrywise image under `f`, keeping the structure.
    pub fn map<T: Scalar>(&self, f: &impl Fn(&S) -> T) -> SymMatrix<T> {
        let mv = |v: &Vec<S>| v.iter().map(f).collect::<Vec<T>>();
        match self {
            SymMatrix::ScaledIdentity { dim, scale } => SymMatrix::ScaledIdentity {
                dim: *dim,
                scale: f(scale),
            },
            SymMatrix::Blocks { blocks, tail } => SymMatrix::Blocks {
                blocks: blocks
                    .iter()
                    .map(|b| [f(&b[0]), f(&b[1]), f(&b[2])])
                    .collect(),
                tail: mv(tail),
            },
            SymMatrix::Tridiagonal { diag, off } => SymMatrix::Tridiagonal {
                diag: mv(diag),
                off: mv(off),
            },
            SymMatrix::Dense(rows) => SymMatrix::Dense(rows.iter().map(mv).collect()),
        }
    }
}
