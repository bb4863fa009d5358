//! Unitaries `U_i = I − (1 − z)·P_i` from an equiangular family and the
//! certificate that they form an unextendible maximally entangled basis.
//!
//! For rank-`r` projections with common trace `β`,
//! `tr(U_i* U_j) = d + (β − r)(2 − 2·Re z)` when `i ≠ j`, so orthogonality
//! fixes `Re z = (2r(d+1)(d−r) − d(d+2)(d−1)) / (2r(d+1)(d−r))` for the
//! maximal angle. A unit `z` exists iff `Re z ≥ −1`, which for positive
//! integers happens exactly when `2r − 1 ≤ d ≤ 2r + 1`.
//!
//! Unextendibility is certified structurally: the unitaries span the
//! symmetric matrices, so their orthogonal complement is the antisymmetric
//! matrices, and an antisymmetric matrix of odd order is singular.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, Tolerance, ONE};
use crate::packing::{FamilySummary, ProjectionFamily};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub d: u64,
    pub r: u64,
    pub re_z: Rational,
    pub feasible: bool,
    /// `{2r − 1, 2r, 2r + 1}` restricted to positive integers.
    pub allowed_d_for_r: Vec<u64>,
}

fn allowed_dimensions(r: u64) -> Vec<u64> {
    [2 * r as i64 - 1, 2 * r as i64, 2 * r as i64 + 1]
        .into_iter()
        .filter(|&d| d > 0)
        .map(|d| d as u64)
        .collect()
}

/// Exact real part of the common phase and whether it lies on the unit circle.
pub fn feasibility(d: u64, r: u64) -> Result<FeasibilityReport> {
    if r < 1 || r >= d {
        return Err(Error::RankOutOfRange { d, r });
    }
    let (di, ri) = (d as i64, r as i64);
    let denom = 2 * ri * (di + 1) * (di - ri);
    let re_z = Rational::new(denom - di * (di + 2) * (di - 1), denom);
    Ok(FeasibilityReport {
        d,
        r,
        re_z,
        // Re z < 1 always holds, so only the lower bound matters.
        feasible: re_z >= Rational::from_integer(-1),
        allowed_d_for_r: allowed_dimensions(r),
    })
}

/// `z = Re z + i·√(1 − (Re z)²)` on the nonnegative imaginary branch.
pub fn compute_phase(d: u64, r: u64) -> Result<Complex64> {
    let rep = feasibility(d, r)?;
    if !rep.feasible {
        return Err(Error::Infeasible {
            d,
            r,
            re_z: rep.re_z.to_string(),
        });
    }
    Ok(phase_from_real(rep.re_z))
}

fn phase_from_real(re_z: Rational) -> Complex64 {
    let re = re_z.to_f64().expect("small rational");
    // 1 − re² computed exactly before the square root
    let im2 = Rational::from_integer(1) - re_z * re_z;
    Complex64::new(re, im2.to_f64().expect("small rational").sqrt())
}

/// One row of the rank-one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFeasibility {
    pub d: u64,
    pub re_z: Rational,
    pub feasible: bool,
}

/// Equiangular lines: `Re z = 1 − d(d+2)/(2(d+1))` for `d = 1..=d_max`.
/// Only `d ≤ 3` is feasible.
pub fn line_feasibility_sweep(d_max: u64) -> Result<Vec<LineFeasibility>> {
    if d_max < 3 {
        return Err(Error::Invalid(format!("d_max must be at least 3, got {d_max}")));
    }
    Ok((1..=d_max)
        .map(|d| {
            let di = d as i64;
            let re_z = Rational::from_integer(1) - Rational::new(di * (di + 2), 2 * (di + 1));
            LineFeasibility {
                d,
                re_z,
                feasible: re_z >= Rational::from_integer(-1),
            }
        })
        .collect())
}

/// The unitaries `I − (1 − z)·P_i`, which under column-stacking double as
/// the maximally entangled basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UnitaryFamilyJson", into = "UnitaryFamilyJson")]
pub struct UnitaryFamily {
    d: usize,
    z: Complex64,
    re_z: Option<Rational>,
    unitaries: Vec<ComplexMatrix>,
    source: FamilySummary,
}

/// On-disk form of a unitary family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitaryFamilyJson {
    pub d: usize,
    pub z: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re_z_num: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re_z_den: Option<i64>,
    pub source: FamilySummary,
    pub unitaries: Vec<ComplexMatrix>,
}

impl TryFrom<UnitaryFamilyJson> for UnitaryFamily {
    type Error = Error;

    fn try_from(j: UnitaryFamilyJson) -> Result<Self> {
        if let Some(u) = j.unitaries.iter().find(|u| u.shape() != (j.d, j.d)) {
            return Err(Error::ShapeMismatch {
                left: (j.d, j.d),
                right: u.shape(),
            });
        }
        let re_z = match (j.re_z_num, j.re_z_den) {
            (Some(n), Some(d)) if d != 0 => Some(Rational::new(n, d)),
            (None, None) => None,
            _ => return Err(Error::Invalid("re_z_num/re_z_den must be given together".into())),
        };
        Ok(UnitaryFamily {
            d: j.d,
            z: Complex64::new(j.z[0], j.z[1]),
            re_z,
            unitaries: j.unitaries,
            source: j.source,
        })
    }
}

impl From<UnitaryFamily> for UnitaryFamilyJson {
    fn from(u: UnitaryFamily) -> Self {
        UnitaryFamilyJson {
            d: u.d,
            z: [u.z.re, u.z.im],
            re_z_num: u.re_z.map(|r| *r.numer()),
            re_z_den: u.re_z.map(|r| *r.denom()),
            source: u.source,
            unitaries: u.unitaries,
        }
    }
}

impl UnitaryFamily {
    /// Use the exact phase for the family's `(d, r)`.
    pub fn from_family(family: &ProjectionFamily) -> Result<Self> {
        let rep = feasibility(family.d() as u64, family.r() as u64)?;
        if !rep.feasible {
            return Err(Error::Infeasible {
                d: rep.d,
                r: rep.r,
                re_z: rep.re_z.to_string(),
            });
        }
        let mut uf = build_unitaries(family, phase_from_real(rep.re_z));
        uf.re_z = Some(rep.re_z);
        Ok(uf)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn re_z(&self) -> Option<Rational> {
        self.re_z
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn source(&self) -> &FamilySummary {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// Keep only the first `n` unitaries.
    pub fn truncated(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.unitaries.truncate(n);
        out.source.count = out.unitaries.len();
        out
    }
}

/// `U_i = I − (1 − z)·P_i`, one per projection. No checks on `z`.
pub fn build_unitaries(family: &ProjectionFamily, z: Complex64) -> UnitaryFamily {
    let d = family.d();
    let id = ComplexMatrix::identity(d);
    let factor = ONE - z;
    let unitaries = family
        .members()
        .par_iter()
        .map(|m| &id - &m.matrix.scale(factor))
        .collect();
    UnitaryFamily {
        d,
        z,
        re_z: None,
        unitaries,
        source: family.summary(),
    }
}

/// Column-stacked, normalized states `vec(U_i)/√d` with their worst
/// pairwise overlap and norm deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct CjStates {
    pub states: Vec<ComplexMatrix>,
    pub max_overlap: f64,
    pub max_norm_dev: f64,
}

pub fn cj_states(uf: &UnitaryFamily) -> Result<CjStates> {
    let states = uf
        .unitaries
        .iter()
        .map(matcore::cj_vectorize)
        .collect::<Result<Vec<_>>>()?;
    let gram = matcore::gram_matrix(&states)?;
    let n = states.len();
    let mut max_overlap: f64 = 0.0;
    let mut max_norm_dev: f64 = 0.0;
    for i in 0..n {
        max_norm_dev = max_norm_dev.max((gram[(i, i)].re.max(0.0).sqrt() - 1.0).abs());
        for j in i + 1..n {
            max_overlap = max_overlap.max(gram[(i, j)].norm());
        }
    }
    Ok(CjStates {
        states,
        max_overlap,
        max_norm_dev,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmebCertificate {
    pub d: usize,
    pub cardinality: usize,
    pub max_unitarity_dev: f64,
    /// `max |tr(U_i* U_j)|` over `i ≠ j`.
    pub max_orthogonality_dev: f64,
    /// `max |tr(U_i* U_i) − d|`.
    pub max_norm_dev: f64,
    /// `max |(U − Uᵀ)_ab|`.
    pub max_symmetry_dev: f64,
    pub span_rank: usize,
    pub symmetric_span: bool,
    /// Largest norm of the projection of a unit antisymmetric basis matrix
    /// onto the span of the unitaries.
    pub max_complement_overlap: f64,
    pub complement_antisymmetric: bool,
    pub d_odd: bool,
    pub cj_orthonormality_dev: f64,
    /// Unitary and trace-orthogonal within tolerance.
    pub orthonormal_basis: bool,
    pub unextendible_verdict: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl UmebCertificate {
    /// Both an orthonormal maximally entangled basis and unextendible.
    pub fn passed(&self) -> bool {
        self.orthonormal_basis && self.unextendible_verdict
    }
}

/// Certify the family. Every failure is reported as a verdict.
pub fn certify_umeb(uf: &UnitaryFamily, tol: &Tolerance) -> Result<UmebCertificate> {
    let d = uf.d;
    let n = uf.unitaries.len();
    let df = d as f64;

    let per_member: Vec<(f64, f64)> = uf
        .unitaries
        .par_iter()
        .map(|u| {
            let (_, dev) = matcore::is_unitary(u, tol)?;
            Ok((dev, (u - &u.transpose()).max_abs()))
        })
        .collect::<Result<_>>()?;
    let max_unitarity_dev = per_member.iter().map(|x| x.0).fold(0.0, f64::max);
    let max_symmetry_dev = per_member.iter().map(|x| x.1).fold(0.0, f64::max);

    let gram = if n > 0 {
        matcore::gram_matrix(&uf.unitaries)?
    } else {
        ComplexMatrix::zeros(1, 1)
    };
    let mut max_orthogonality_dev: f64 = 0.0;
    let mut max_norm_dev: f64 = 0.0;
    for i in 0..n {
        max_norm_dev = max_norm_dev.max((gram[(i, i)] - df).norm());
        for j in i + 1..n {
            max_orthogonality_dev = max_orthogonality_dev.max(gram[(i, j)].norm());
        }
    }

    let (span_rank, max_complement_overlap) = if n > 0 {
        let (values, vectors) = matcore::hermitian_eigen(&gram)?;
        let rank = matcore::rank_from_eigenvalues(&values, tol);
        let top = values.last().copied().unwrap_or(0.0);
        let kept: Vec<usize> = (0..n).filter(|&k| values[k] > tol.rank_eps * top).collect();
        let pairs: Vec<(usize, usize)> = (0..d)
            .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
            .collect();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        // ‖proj(A)‖² = c* G⁺ c with c_i = ⟨U_i, A⟩, A = (E_ab − E_ba)/√2
        let overlap = pairs
            .par_iter()
            .map(|&(a, b)| {
                let c: Vec<Complex64> = uf
                    .unitaries
                    .iter()
                    .map(|u| (u[(a, b)].conj() - u[(b, a)].conj()) * inv_sqrt2)
                    .collect();
                let norm2: f64 = kept
                    .iter()
                    .map(|&k| {
                        let w: Complex64 = (0..n).map(|i| vectors[(i, k)].conj() * c[i]).sum();
                        w.norm_sqr() / values[k]
                    })
                    .sum();
                norm2.sqrt()
            })
            .reduce(|| 0.0, f64::max);
        (rank, overlap)
    } else {
        (0, 0.0)
    };

    let sym_dim = d * (d + 1) / 2;
    let symmetric_span = span_rank == sym_dim && max_symmetry_dev <= tol.eps;
    let complement_antisymmetric =
        max_complement_overlap <= tol.eps && span_rank + d * (d - 1) / 2 == d * d;
    let d_odd = d % 2 == 1;

    let cj = cj_states(uf)?;
    let cj_orthonormality_dev = cj.max_overlap.max(cj.max_norm_dev);
    let orthonormal_basis = n > 0
        && max_unitarity_dev <= tol.eps
        && max_orthogonality_dev <= tol.eps * df
        && max_norm_dev <= tol.eps * df;

    let mut notes = Vec::new();
    if uf.source.p == Some(3) {
        notes.push("p = 3 is the special small case outside p ≡ 7 (mod 8)".to_string());
    }
    if !d_odd {
        notes.push("even d: antisymmetric unitaries exist, no unextendibility claim".to_string());
    }

    Ok(UmebCertificate {
        d,
        cardinality: n,
        max_unitarity_dev,
        max_orthogonality_dev,
        max_norm_dev,
        max_symmetry_dev,
        span_rank,
        symmetric_span,
        max_complement_overlap,
        complement_antisymmetric,
        d_odd,
        cj_orthonormality_dev,
        orthonormal_basis,
        unextendible_verdict: symmetric_span && complement_antisymmetric && d_odd,
        notes,
    })
}
