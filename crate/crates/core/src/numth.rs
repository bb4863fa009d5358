//! Prime parameters for the quadratic-residue construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic trial division. Intended for desk-scale inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc = 1u128;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol `(a | q)` for an odd prime `q`: 0, 1 or -1.
pub fn legendre(a: i64, q: u64) -> i8 {
    let r = a.rem_euclid(q as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    }
}

/// Whether `a` is a nonzero square modulo the odd prime `p` (Euler's criterion).
pub fn is_quadratic_residue(a: i64, p: u64) -> Result<bool> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if a < 1 || a > p as i64 - 1 {
        return Err(Error::OutOfRange {
            value: a,
            max: p as i64 - 1,
        });
    }
    Ok(legendre(a, p) == 1)
}

/// A prime `p` usable by the construction (`p = 3` or `p ≡ 7 mod 8`), with
/// its residues `Q`, non-residues `R` and the fixed non-residue `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UmebPrime {
    p: u64,
    residues: Vec<u64>,
    nonresidues: Vec<u64>,
    k: u64,
}

impl UmebPrime {
    /// Validate `p`, choosing the smallest non-residue as `k`.
    pub fn new(p: u64) -> Result<Self> {
        Self::build(p, None)
    }

    /// Validate `p` with an explicit non-residue `k`.
    pub fn with_nonresidue(p: u64, k: u64) -> Result<Self> {
        Self::build(p, Some(k))
    }

    fn build(p: u64, k: Option<u64>) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p != 3 && p % 8 != 7 {
            return Err(Error::WrongResidueClass(p));
        }
        let (residues, nonresidues): (Vec<u64>, Vec<u64>) =
            (1..p).partition(|&a| legendre(a as i64, p) == 1);
        let k = match k {
            Some(k) if nonresidues.binary_search(&k).is_ok() => k,
            Some(k) => return Err(Error::NotNonResidue { k, p }),
            None => nonresidues[0],
        };
        Ok(Self {
            p,
            residues,
            nonresidues,
            k,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Nonzero quadratic residues `q_1 < q_2 < ... < q_{(p-1)/2}`.
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn nonresidues(&self) -> &[u64] {
        &self.nonresidues
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `(p - 1) / 2`, the common rank of the projections built from `p`.
    pub fn half(&self) -> usize {
        ((self.p - 1) / 2) as usize
    }

    /// `p = 3` sits outside the `p ≡ -1 mod 8` family and is flagged as a
    /// special small case wherever it is certified.
    pub fn is_small_case(&self) -> bool {
        self.p == 3
    }
}

/// Alias for [`UmebPrime::new`].
pub fn validate_prime(p: u64) -> Result<UmebPrime> {
    UmebPrime::new(p)
}
