//! Hadamard matrices: Sylvester, Paley I/II and Kronecker products.
//!
//! All entries are exact `±1` integers and every constructor validates
//! `H·Hᵀ = n·I` in integer arithmetic before returning. Rows and columns are
//! 0-indexed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numth::{is_prime, legendre};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "HadamardJson", into = "HadamardJson")]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
}

/// On-disk form: `{"order": n, "rows": [[±1, ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HadamardJson {
    pub order: usize,
    pub rows: Vec<Vec<i64>>,
}

impl HadamardMatrix {
    /// Build from explicit rows, rejecting anything that is not Hadamard.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotHadamard("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotHadamard(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            for &v in row {
                match v {
                    1 => entries.push(1),
                    -1 => entries.push(-1),
                    _ => {
                        return Err(Error::NotHadamard(format!(
                            "entry {v} in row {i} is not ±1"
                        )))
                    }
                }
            }
        }
        Self::checked(n, entries)
    }

    fn checked(order: usize, entries: Vec<i8>) -> Result<Self> {
        let h = Self { order, entries };
        if let Some((i, j, v)) = h.first_gram_defect() {
            return Err(Error::NotHadamard(format!(
                "(H·Hᵀ)[{i}][{j}] = {v}, expected {}",
                if i == j { order as i64 } else { 0 }
            )));
        }
        Ok(h)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry `h_{st}` (row `s`, column `t`).
    pub fn get(&self, s: usize, t: usize) -> i8 {
        self.entries[s * self.order + t]
    }

    pub fn row(&self, s: usize) -> &[i8] {
        &self.entries[s * self.order..(s + 1) * self.order]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.order)
            .map(|s| self.row(s).iter().map(|&v| v as i64).collect())
            .collect()
    }

    /// Exact integer product `H·Hᵀ`.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let n = self.order;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.row(i)
                            .iter()
                            .zip(self.row(j))
                            .map(|(&a, &b)| (a as i64) * (b as i64))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    fn first_gram_defect(&self) -> Option<(usize, usize, i64)> {
        let n = self.order as i64;
        for (i, row) in self.gram().into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                let want = if i == j { n } else { 0 };
                if v != want {
                    return Some((i, j, v));
                }
            }
        }
        None
    }

    /// `H·Hᵀ = n·I` and `Hᵀ·H = n·I`, both exactly.
    pub fn is_valid(&self) -> bool {
        self.first_gram_defect().is_none() && self.transpose().first_gram_defect().is_none()
    }

    pub fn transpose(&self) -> Self {
        let n = self.order;
        let mut entries = vec![0i8; n * n];
        for s in 0..n {
            for t in 0..n {
                entries[t * n + s] = self.get(s, t);
            }
        }
        Self { order: n, entries }
    }

    /// Multiply every column `t` by `h_{0t}` so that row 0 is all `+1`.
    ///
    /// Column sign changes preserve the Hadamard property. The
    /// quadratic-residue construction uses rows `1..` only and needs the
    /// unused row 0 to be constant.
    pub fn with_constant_first_row(&self) -> Self {
        let n = self.order;
        let mut entries = self.entries.clone();
        for s in 0..n {
            for t in 0..n {
                entries[s * n + t] *= self.get(0, t);
            }
        }
        Self { order: n, entries }
    }
}

impl fmt::Display for HadamardMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in 0..self.order {
            let line: String = self
                .row(s)
                .iter()
                .map(|&v| if v > 0 { '+' } else { '-' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl TryFrom<HadamardJson> for HadamardMatrix {
    type Error = Error;

    fn try_from(json: HadamardJson) -> Result<Self> {
        if json.rows.len() != json.order {
            return Err(Error::NotHadamard(format!(
                "declared order {} but {} rows",
                json.order,
                json.rows.len()
            )));
        }
        Self::from_rows(&json.rows)
    }
}

impl From<HadamardMatrix> for HadamardJson {
    fn from(h: HadamardMatrix) -> Self {
        HadamardJson {
            order: h.order,
            rows: h.rows(),
        }
    }
}

/// Order `2^k` by repeated doubling `[[H, H], [H, -H]]`.
pub fn sylvester(k: u32) -> HadamardMatrix {
    let mut h = HadamardMatrix {
        order: 1,
        entries: vec![1],
    };
    let base = HadamardMatrix {
        order: 2,
        entries: vec![1, 1, 1, -1],
    };
    for _ in 0..k {
        h = kronecker(&base, &h);
    }
    h
}

fn jacobsthal(q: u64) -> Vec<Vec<i8>> {
    (0..q as i64)
        .map(|i| (0..q as i64).map(|j| legendre(j - i, q)).collect())
        .collect()
}

/// Paley type I: order `q + 1` for a prime `q ≡ 3 mod 4`.
///
/// `H = I + S` with `S = [[0, 1ᵀ], [-1, Q]]` and `Q` the Jacobsthal matrix.
pub fn paley_one(q: u64) -> Result<HadamardMatrix> {
    if !is_prime(q) || q < 3 {
        return Err(Error::NotPrime(q));
    }
    if q % 4 != 3 {
        return Err(Error::BadResidueClass { q, expected: 3 });
    }
    let jac = jacobsthal(q);
    let n = (q + 1) as usize;
    let mut entries = vec![0i8; n * n];
    for i in 0..n {
        for j in 0..n {
            let s = match (i, j) {
                (0, 0) => 0,
                (0, _) => 1,
                (_, 0) => -1,
                _ => jac[i - 1][j - 1],
            };
            entries[i * n + j] = s + i8::from(i == j);
        }
    }
    HadamardMatrix::checked(n, entries)
}

/// Paley type II: order `2(q + 1)` for a prime `q ≡ 1 mod 4`.
///
/// Built from the symmetric conference matrix `S = [[0, 1ᵀ], [1, Q]]` by
/// replacing `0` with `[[1, -1], [-1, -1]]` and `±1` with `±[[1, 1], [1, -1]]`.
pub fn paley_two(q: u64) -> Result<HadamardMatrix> {
    if !is_prime(q) || q < 3 {
        return Err(Error::NotPrime(q));
    }
    if q % 4 != 1 {
        return Err(Error::BadResidueClass { q, expected: 1 });
    }
    let jac = jacobsthal(q);
    let m = (q + 1) as usize;
    let n = 2 * m;
    const ZERO_BLOCK: [[i8; 2]; 2] = [[1, -1], [-1, -1]];
    const ONE_BLOCK: [[i8; 2]; 2] = [[1, 1], [1, -1]];
    let mut entries = vec![0i8; n * n];
    for i in 0..m {
        for j in 0..m {
            let s = match (i, j) {
                (0, 0) => 0,
                (0, _) | (_, 0) => 1,
                _ => jac[i - 1][j - 1],
            };
            for a in 0..2 {
                for b in 0..2 {
                    entries[(2 * i + a) * n + 2 * j + b] = if s == 0 {
                        ZERO_BLOCK[a][b]
                    } else {
                        s * ONE_BLOCK[a][b]
                    };
                }
            }
        }
    }
    HadamardMatrix::checked(n, entries)
}

/// `a ⊗ b`: entry `(i·n_b + s, j·n_b + t) = a_{ij}·b_{st}`.
pub fn kronecker(a: &HadamardMatrix, b: &HadamardMatrix) -> HadamardMatrix {
    let (na, nb) = (a.order, b.order);
    let n = na * nb;
    let mut entries = vec![0i8; n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a.get(i, j);
            for s in 0..nb {
                for t in 0..nb {
                    entries[(i * nb + s) * n + j * nb + t] = aij * b.get(s, t);
                }
            }
        }
    }
    HadamardMatrix { order: n, entries }
}

/// How [`construct`] obtains a given order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Construction {
    Sylvester { k: u32 },
    PaleyOne { q: u64 },
    PaleyTwo { q: u64 },
    Kronecker(Box<Construction>, Box<Construction>),
}

impl Construction {
    pub fn order(&self) -> usize {
        match self {
            Construction::Sylvester { k } => 1 << k,
            Construction::PaleyOne { q } => (q + 1) as usize,
            Construction::PaleyTwo { q } => 2 * (q + 1) as usize,
            Construction::Kronecker(a, b) => a.order() * b.order(),
        }
    }

    pub fn build(&self) -> Result<HadamardMatrix> {
        match self {
            Construction::Sylvester { k } => Ok(sylvester(*k)),
            Construction::PaleyOne { q } => paley_one(*q),
            Construction::PaleyTwo { q } => paley_two(*q),
            Construction::Kronecker(a, b) => Ok(kronecker(&a.build()?, &b.build()?)),
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::Sylvester { k } => write!(f, "Sylvester(2^{k})"),
            Construction::PaleyOne { q } => write!(f, "Paley-I(q={q})"),
            Construction::PaleyTwo { q } => write!(f, "Paley-II(q={q})"),
            Construction::Kronecker(a, b) => write!(f, "{a} ⊗ {b}"),
        }
    }
}

/// Pick a construction for order `n`: Sylvester, then Paley I, then Paley II,
/// then the first Kronecker split `n = a·b` (ascending `a`) with both factors
/// constructible.
pub fn plan(n: usize) -> Option<Construction> {
    if n == 0 || (n > 2 && n % 4 != 0) {
        return None;
    }
    if n.is_power_of_two() {
        return Some(Construction::Sylvester {
            k: n.trailing_zeros(),
        });
    }
    let q = (n - 1) as u64;
    if is_prime(q) && q % 4 == 3 {
        return Some(Construction::PaleyOne { q });
    }
    if n % 2 == 0 && n >= 4 {
        let q = (n / 2 - 1) as u64;
        if is_prime(q) && q % 4 == 1 {
            return Some(Construction::PaleyTwo { q });
        }
    }
    (2..n)
        .filter(|a| n % a == 0)
        .find_map(|a| {
            let left = plan(a)?;
            let right = plan(n / a)?;
            Some(Construction::Kronecker(Box::new(left), Box::new(right)))
        })
}

/// Deterministic Hadamard matrix of order `n`, or `UnsupportedOrder`.
pub fn construct(n: usize) -> Result<HadamardMatrix> {
    plan(n).ok_or(Error::UnsupportedOrder(n))?.build()
}
