//! Exact arithmetic in the free associative algebra on `q` letters over the
//! integers, truncated past a fixed degree. Sending generator `k` to
//! `1 + X_k` embeds the free nilpotent group of matching class faithfully,
//! so multiplication, inversion and arbitrary integer powers of group
//! elements become truncated power-series manipulation with no sign or
//! magnitude restrictions.
//!
//! Reading a normal form back out walks the degrees upward: after stripping
//! the weight-`< w` prefix of an element, its degree-`w` component is an
//! exact integer combination of the Lie monomials of the weight-`w` basic
//! commutators, and those monomials are linearly independent, so the
//! exponents fall out of one exact linear solve per weight. Every solve is
//! verified against the full component and the final residue must be exactly
//! 1; any failure is an internal bug, not an input condition, hence asserts.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hallbasis::BasisTable;
use crate::numtheory::binomial_bigint;

/// Ceiling on the total number of coefficient cells (sum of q^d over the
/// retained degrees) a series context may allocate.
pub(crate) const SERIES_CELL_CAP: usize = 1_000_000;

/// Dimensions for truncated series over `q` letters, degrees `0..=max_deg`.
pub(crate) struct SeriesCtx {
    q: usize,
    max_deg: usize,
    /// dims[d] = q^d.
    dims: Vec<usize>,
}

/// A truncated integer series; `comps[d]` holds the q^d coefficients of the
/// degree-`d` words, indexed by the base-`q` reading of the word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Series {
    comps: Vec<Vec<BigInt>>,
}

impl SeriesCtx {
    pub fn new(q: usize, max_deg: usize) -> Result<Self> {
        let mut dims = Vec::with_capacity(max_deg + 1);
        let mut total: usize = 0;
        let mut d = 1usize;
        for _ in 0..=max_deg {
            dims.push(d);
            total = total.saturating_add(d);
            if total > SERIES_CELL_CAP {
                return Err(Error::ResourceCap(format!(
                    "series context for q={q}, degree {max_deg} needs more than \
                     {SERIES_CELL_CAP} coefficient cells"
                )));
            }
            d = d.saturating_mul(q.max(1));
        }
        Ok(SeriesCtx { q, max_deg, dims })
    }

    fn zero(&self) -> Series {
        Series {
            comps: self.dims.iter().map(|&n| vec![BigInt::zero(); n]).collect(),
        }
    }

    pub fn one(&self) -> Series {
        let mut s = self.zero();
        s.comps[0][0] = BigInt::one();
        s
    }

    pub fn is_one(&self, s: &Series) -> bool {
        s.comps[0][0].is_one()
            && s.comps
                .iter()
                .skip(1)
                .all(|c| c.iter().all(|x| x.is_zero()))
    }

    /// `(1 + X_k)^e` for any integer `e`, via generalized binomials.
    pub fn gen_pow(&self, k: usize, e: &BigInt) -> Series {
        debug_assert!(k < self.q);
        let mut s = self.zero();
        for d in 0..=self.max_deg {
            let mut idx = 0usize;
            for _ in 0..d {
                idx = idx * self.q + k;
            }
            s.comps[d][idx] = binomial_bigint(e, d as u32);
        }
        s
    }

    pub fn mul(&self, a: &Series, b: &Series) -> Series {
        let mut out = self.zero();
        for d1 in 0..=self.max_deg {
            for (i1, c1) in a.comps[d1].iter().enumerate() {
                if c1.is_zero() {
                    continue;
                }
                for d2 in 0..=(self.max_deg - d1) {
                    let stride = self.dims[d2];
                    for (i2, c2) in b.comps[d2].iter().enumerate() {
                        if c2.is_zero() {
                            continue;
                        }
                        out.comps[d1 + d2][i1 * stride + i2] += c1 * c2;
                    }
                }
            }
        }
        out
    }

    /// Inverse of a series with constant term 1: the truncated geometric
    /// series in `-(a - 1)`.
    pub fn inv(&self, a: &Series) -> Series {
        assert!(
            a.comps[0][0].is_one(),
            "only unit-constant series invert here"
        );
        let mut neg = a.clone();
        neg.comps[0][0] = BigInt::zero();
        for comp in neg.comps.iter_mut() {
            for x in comp.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        let mut acc = self.one();
        let mut term = self.one();
        for _ in 1..=self.max_deg {
            term = self.mul(&term, &neg);
            for d in 0..=self.max_deg {
                for (i, x) in term.comps[d].iter().enumerate() {
                    if !x.is_zero() {
                        acc.comps[d][i] += x;
                    }
                }
            }
        }
        acc
    }

    /// `a^e` for any integer `e` (constant term of `a` must be 1).
    pub fn pow(&self, a: &Series, e: &BigInt) -> Series {
        let (sign, mag) = e.clone().into_parts();
        let base = if sign == Sign::Minus {
            self.inv(a)
        } else {
            a.clone()
        };
        let mut acc = self.one();
        let bits = mag.bits();
        for i in (0..bits).rev() {
            acc = self.mul(&acc, &acc);
            if mag.bit(i) {
                acc = self.mul(&acc, &base);
            }
        }
        acc
    }

    pub fn commutator(&self, a: &Series, b: &Series) -> Series {
        let left = self.mul(&self.inv(a), &self.inv(b));
        let right = self.mul(a, b);
        self.mul(&left, &right)
    }
}

/// Exact solver for one weight: find the unique integer coefficients
/// expressing a degree-`w` component in the Lie monomials of the weight-`w`
/// basic commutators.
struct WeightSolver {
    /// Original columns, one per weight-`w` basis entry (length q^w each).
    cols: Vec<Vec<BigInt>>,
    /// Row indices whose restriction of the column matrix is invertible.
    pivot_rows: Vec<usize>,
    /// Inverse of that square restriction.
    p_inv: Vec<Vec<BigRational>>,
}

fn invert_square(mut m: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    let t = m.len();
    let mut inv: Vec<Vec<BigRational>> = (0..t)
        .map(|i| {
            (0..t)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..t {
        let pivot = (col..t)
            .find(|&r| !m[r][col].is_zero())
            .expect("pivot submatrix must be invertible");
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let lead = m[col][col].clone();
        for j in 0..t {
            m[col][j] /= &lead;
            inv[col][j] /= &lead;
        }
        for r in 0..t {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..t {
                let a = &m[col][j] * &f;
                m[r][j] -= a;
                let b = &inv[col][j] * &f;
                inv[r][j] -= b;
            }
        }
    }
    inv
}

impl WeightSolver {
    fn build(cols: Vec<Vec<BigInt>>) -> WeightSolver {
        let t = cols.len();
        let dim = cols.first().map_or(0, Vec::len);
        // Greedy pivot-row selection: keep rows that stay independent in a
        // small rational echelon.
        let mut pivot_rows: Vec<usize> = Vec::with_capacity(t);
        let mut echelon: Vec<(usize, Vec<BigRational>)> = Vec::with_capacity(t);
        for r in 0..dim {
            if pivot_rows.len() == t {
                break;
            }
            let mut row: Vec<BigRational> = cols
                .iter()
                .map(|c| BigRational::from(c[r].clone()))
                .collect();
            for (lead, er) in &echelon {
                if !row[*lead].is_zero() {
                    let f = row[*lead].clone();
                    for j in 0..t {
                        let s = &er[j] * &f;
                        row[j] -= s;
                    }
                }
            }
            if let Some(lead) = (0..t).find(|&j| !row[j].is_zero()) {
                let head = row[lead].clone();
                for x in row.iter_mut() {
                    *x /= &head;
                }
                echelon.push((lead, row));
                pivot_rows.push(r);
            }
        }
        assert_eq!(
            pivot_rows.len(),
            t,
            "Lie monomials of one weight must be linearly independent"
        );
        let square: Vec<Vec<BigRational>> = pivot_rows
            .iter()
            .map(|&r| {
                cols.iter()
                    .map(|c| BigRational::from(c[r].clone()))
                    .collect()
            })
            .collect();
        let p_inv = invert_square(square);
        WeightSolver {
            cols,
            pivot_rows,
            p_inv,
        }
    }

    /// Solve `cols * m = target` for the unique integer vector `m`.
    fn solve(&self, target: &[BigInt]) -> Vec<BigInt> {
        let t = self.cols.len();
        let mut m = Vec::with_capacity(t);
        for row in 0..t {
            let mut acc = BigRational::zero();
            for k in 0..t {
                let term =
                    &self.p_inv[row][k] * BigRational::from(target[self.pivot_rows[k]].clone());
                acc += term;
            }
            assert!(acc.is_integer(), "normal-form exponents must be integers");
            m.push(acc.to_integer());
        }
        // The pivot rows determined m; every remaining row must agree.
        let dim = self.cols.first().map_or(0, Vec::len);
        for r in 0..dim {
            let mut acc = BigInt::zero();
            for (j, col) in self.cols.iter().enumerate() {
                if !m[j].is_zero() && !col[r].is_zero() {
                    acc += &col[r] * &m[j];
                }
            }
            assert_eq!(acc, target[r], "degree component escapes the Lie span");
        }
        m
    }
}

/// Everything needed to do exact free-nilpotent-group arithmetic for one
/// `(q, class)` shape: the series context, the embedded images of the basic
/// commutators, and per-weight solvers for reading normal forms back.
pub(crate) struct FreeCtx {
    sctx: SeriesCtx,
    basis: BasisTable,
    /// Embedded image of each basis entry.
    mu: Vec<Series>,
    solvers: Vec<OnceLock<WeightSolver>>,
}

impl FreeCtx {
    pub fn new(basis: BasisTable) -> Result<FreeCtx> {
        let q = basis.generator_count() as usize;
        let class = basis.max_weight() as usize;
        let sctx = SeriesCtx::new(q, class)?;
        let mut mu: Vec<Series> = Vec::with_capacity(basis.len());
        for i in 0..basis.len() {
            let s = match basis.parts(i) {
                None => sctx.gen_pow(i, &BigInt::one()),
                Some((l, r)) => sctx.commutator(&mu[l], &mu[r]),
            };
            // The image of a weight-w entry is 1 + (terms of degree >= w).
            for d in 1..basis.weight(i) as usize {
                assert!(
                    s.comps[d].iter().all(Zero::is_zero),
                    "embedded basis element has stray low-degree terms"
                );
            }
            mu.push(s);
        }
        let solvers = (0..=class).map(|_| OnceLock::new()).collect();
        Ok(FreeCtx {
            sctx,
            basis,
            mu,
            solvers,
        })
    }

    pub fn sctx(&self) -> &SeriesCtx {
        &self.sctx
    }

    fn solver(&self, w: usize) -> &WeightSolver {
        self.solvers[w].get_or_init(|| {
            let cols: Vec<Vec<BigInt>> = self
                .basis
                .weight_range(w as u32)
                .map(|i| self.mu[i].comps[w].clone())
                .collect();
            WeightSolver::build(cols)
        })
    }

    /// Series of the commutator of two basis entries.
    pub fn basis_commutator_series(&self, a: usize, b: usize) -> Series {
        self.sctx.commutator(&self.mu[a], &self.mu[b])
    }

    /// Series of a word given as `(0-based generator, exponent)` letters.
    pub fn word_series(&self, letters: &[(usize, BigInt)]) -> Series {
        let mut acc = self.sctx.one();
        for (k, e) in letters {
            if e.is_zero() {
                continue;
            }
            acc = self.sctx.mul(&acc, &self.sctx.gen_pow(*k, e));
        }
        acc
    }

    /// Series of the product of basis powers `prod mu(i)^exps[i]`.
    pub fn lift(&self, exps: &[BigInt]) -> Series {
        let mut acc = self.sctx.one();
        for (i, e) in exps.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            acc = self.sctx.mul(&acc, &self.sctx.pow(&self.mu[i], e));
        }
        acc
    }

    /// Normal-form exponents of a group-element series, one per basis entry.
    pub fn extract(&self, s: &Series) -> Vec<BigInt> {
        assert!(
            s.comps[0][0].is_one(),
            "group elements have constant term 1"
        );
        let mut h = s.clone();
        let mut exps = vec![BigInt::zero(); self.basis.len()];
        for w in 1..=self.sctx.max_deg {
            let range = self.basis.weight_range(w as u32);
            if range.is_empty() {
                assert!(
                    h.comps[w].iter().all(Zero::is_zero),
                    "residue has weight-{w} terms but no basis entries exist there"
                );
                continue;
            }
            if h.comps[w].iter().all(Zero::is_zero) {
                continue;
            }
            let m = self.solver(w).solve(&h.comps[w]);
            let mut prefix = self.sctx.one();
            for (off, i) in range.clone().enumerate() {
                if !m[off].is_zero() {
                    prefix = self.sctx.mul(&prefix, &self.sctx.pow(&self.mu[i], &m[off]));
                }
                exps[i] = m[off].clone();
            }
            h = self.sctx.mul(&self.sctx.inv(&prefix), &h);
            assert!(
                h.comps[w].iter().all(Zero::is_zero),
                "stripping weight {w} left residue behind"
            );
        }
        assert!(
            self.sctx.is_one(&h),
            "extraction must consume the whole element"
        );
        exps
    }
}
