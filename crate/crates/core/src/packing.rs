//! Real equiangular projection families.
//!
//! A family of rank-`r` projections `P_i` on `ℝ^d` is equiangular when
//! `tr(P_i P_j) = β` for all `i ≠ j`. A maximal family has `d(d+1)/2`
//! members spanning the symmetric matrices, which forces
//! `β = r(rd + r − 2)/((d+2)(d−1))`.
//!
//! For a prime `p = 3` or `p ≡ 7 mod 8` the quadratic-residue construction
//! gives such a family with `d = p`, `r = (p−1)/2`: with `C = (1+√(p+2))/√(p+1)`
//! and a Hadamard matrix `H` of order `(p+1)/2`, block `t` is spanned by
//! `e_{q_s} + h_{st}·C·e_{k·q_s}` (`s = 1..(p−1)/2`), and each block is
//! cycled through all `p` coordinate shifts.

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hadamard::HadamardMatrix;
use crate::matcore::{self, ComplexMatrix, Tolerance};
use crate::numth::UmebPrime;
use crate::Rational;

/// One member of a family, with its `(t, shift)` origin when built by the
/// quadratic-residue construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub t: Option<usize>,
    pub shift: Option<usize>,
    pub matrix: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson", into = "FamilyJson")]
pub struct ProjectionFamily {
    d: usize,
    r: usize,
    beta_target: Rational,
    c: Option<f64>,
    p: Option<u64>,
    k: Option<u64>,
    members: Vec<Projection>,
}

/// On-disk form of a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub d: usize,
    pub r: usize,
    pub beta_num: i64,
    pub beta_den: i64,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub projections: Vec<Projection>,
}

impl TryFrom<FamilyJson> for ProjectionFamily {
    type Error = Error;

    fn try_from(j: FamilyJson) -> Result<Self> {
        if j.beta_den == 0 {
            return Err(Error::Invalid("beta_den is zero".into()));
        }
        let mut fam = ProjectionFamily::new(
            j.d,
            j.r,
            Rational::new(j.beta_num, j.beta_den),
            j.projections,
        )?;
        fam.c = j.c;
        fam.p = j.p;
        fam.k = j.k;
        Ok(fam)
    }
}

impl From<ProjectionFamily> for FamilyJson {
    fn from(f: ProjectionFamily) -> Self {
        FamilyJson {
            d: f.d,
            r: f.r,
            beta_num: *f.beta_target.numer(),
            beta_den: *f.beta_target.denom(),
            c: f.c,
            p: f.p,
            k: f.k,
            projections: f.members,
        }
    }
}

/// Identifying data of a family, carried along by derived objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub d: usize,
    pub r: usize,
    pub beta_num: i64,
    pub beta_den: i64,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
}

impl ProjectionFamily {
    /// Assemble a family, checking every member is `d×d`.
    pub fn new(d: usize, r: usize, beta_target: Rational, members: Vec<Projection>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        if let Some(m) = members.iter().find(|m| m.matrix.shape() != (d, d)) {
            return Err(Error::ShapeMismatch {
                left: (d, d),
                right: m.matrix.shape(),
            });
        }
        Ok(Self {
            d,
            r,
            beta_target,
            c: None,
            p: None,
            k: None,
            members,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn beta_target(&self) -> Rational {
        self.beta_target
    }

    /// The constant `C` of the quadratic-residue construction, if used.
    pub fn c(&self) -> Option<f64> {
        self.c
    }

    pub fn p(&self) -> Option<u64> {
        self.p
    }

    pub fn k(&self) -> Option<u64> {
        self.k
    }

    pub fn members(&self) -> &[Projection] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn matrices(&self) -> Vec<ComplexMatrix> {
        self.members.iter().map(|m| m.matrix.clone()).collect()
    }

    /// `d(d+1)/2`, the size of a maximal family.
    pub fn maximal_size(&self) -> usize {
        self.d * (self.d + 1) / 2
    }

    /// Copy with the member list replaced (for truncation and negative tests).
    pub fn with_members(&self, members: Vec<Projection>) -> Result<Self> {
        let mut f = Self::new(self.d, self.r, self.beta_target, members)?;
        f.c = self.c;
        f.p = self.p;
        f.k = self.k;
        Ok(f)
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            d: self.d,
            r: self.r,
            beta_num: *self.beta_target.numer(),
            beta_den: *self.beta_target.denom(),
            count: self.members.len(),
            p: self.p,
            k: self.k,
        }
    }
}

/// Common angle `1/√(d+2)` of a maximal set of real equiangular lines.
pub fn beta_lines(d: usize) -> f64 {
    1.0 / ((d + 2) as f64).sqrt()
}

/// `r(rd + r − 2)/((d+2)(d−1))`, exactly.
pub fn beta_projections(d: u64, r: u64) -> Result<Rational> {
    if r < 1 || r >= d {
        return Err(Error::RankOutOfRange { d, r });
    }
    let (d, r) = (d as i64, r as i64);
    Ok(Rational::new(r * (r * d + r - 2), (d + 2) * (d - 1)))
}

/// `C = (1 + √(p+2))/√(p+1)`.
pub fn chrss_constant(p: u64) -> f64 {
    let p = p as f64;
    (1.0 + (p + 2.0).sqrt()) / (p + 1.0).sqrt()
}

/// Unnormalized basis of block `t`: for `s = 1..(p−1)/2` the vector
/// `e_{q_s} + h_{st}·C·e_{k·q_s mod p}`.
///
/// Rows `1..(p−1)/2` of `h` are used as given.
pub fn chrss_base_vectors(prime: &UmebPrime, h: &HadamardMatrix, t: usize) -> Result<Vec<Vec<f64>>> {
    let p = prime.p();
    let m = prime.half();
    if h.order() != m + 1 {
        return Err(Error::HadamardOrderMismatch {
            expected: m + 1,
            found: h.order(),
        });
    }
    if t > m {
        return Err(Error::IndexOutOfRange { index: t, max: m });
    }
    let c = chrss_constant(p);
    let mut used = vec![false; p as usize];
    let mut out = Vec::with_capacity(m);
    for (s, &q) in (1..=m).zip(prime.residues()) {
        let a = q as usize;
        let b = (prime.k() * q % p) as usize;
        for idx in [a, b] {
            if std::mem::replace(&mut used[idx], true) {
                return Err(Error::Invalid(format!(
                    "support collision at index {idx} (s = {s})"
                )));
            }
        }
        let mut v = vec![0.0; p as usize];
        v[a] = 1.0;
        v[b] = h.get(s, t) as f64 * c;
        out.push(v);
    }
    Ok(out)
}

/// Move entry `i` of every vector to index `(i + x) mod len`.
pub fn cyclic_shift(vectors: &[Vec<f64>], x: usize) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|v| {
            let n = v.len();
            let mut w = vec![0.0; n];
            for (i, &val) in v.iter().enumerate() {
                w[(i + x) % n] = val;
            }
            w
        })
        .collect()
}

/// Orthogonal projection `Σ v vᵀ/‖v‖²` onto the span of mutually
/// orthogonal real vectors.
pub fn projection_from_basis(vectors: &[Vec<f64>], tol: &Tolerance) -> Result<ComplexMatrix> {
    let Some(first) = vectors.first() else {
        return Err(Error::Invalid("empty basis".into()));
    };
    let n = first.len();
    if n == 0 || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::Invalid("basis vectors must share a nonzero length".into()));
    }
    let norms: Vec<f64> = vectors.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    if norms.contains(&0.0) {
        return Err(Error::Invalid("zero basis vector".into()));
    }
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            let cos = dot / (norms[i] * norms[j]);
            if cos.abs() > tol.eps {
                return Err(Error::NotOrthogonal { i, j, inner: cos });
            }
        }
    }
    let mut acc = vec![0.0; n * n];
    for (v, norm) in vectors.iter().zip(&norms) {
        let inv = 1.0 / (norm * norm);
        for (a, &va) in v.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            for (b, &vb) in v.iter().enumerate() {
                acc[a * n + b] += va * vb * inv;
            }
        }
    }
    ComplexMatrix::from_real(n, n, &acc)
}

/// All `p(p+1)/2` projections of rank `(p−1)/2`, ordered by `(t, shift)`.
///
/// Columns of `h` are first rescaled so that its unused row 0 is all `+1`;
/// the pairwise traces are only constant when that row is constant.
pub fn build_chrss_family(prime: &UmebPrime, h: &HadamardMatrix) -> Result<ProjectionFamily> {
    let p = prime.p();
    let m = prime.half();
    let h = h.with_constant_first_row();
    let tol = Tolerance::default();
    let bases = (0..=m)
        .map(|t| chrss_base_vectors(prime, &h, t))
        .collect::<Result<Vec<_>>>()?;
    let members = (0..=m)
        .flat_map(|t| (0..p as usize).map(move |x| (t, x)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(t, x)| {
            Ok(Projection {
                t: Some(t),
                shift: Some(x),
                matrix: projection_from_basis(&cyclic_shift(&bases[t], x), &tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut fam = ProjectionFamily::new(p as usize, m, beta_projections(p, m as u64)?, members)?;
    fam.c = Some(chrss_constant(p));
    fam.p = Some(p);
    fam.k = Some(prime.k());
    Ok(fam)
}

/// Numerical checks of an equiangular family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquiangularReport {
    pub d: usize,
    pub r: usize,
    pub count: usize,
    pub pairs: usize,
    pub beta_num: i64,
    pub beta_den: i64,
    /// `max |tr(P_i P_j) − β|` over `i ≠ j`.
    pub max_angle_dev: f64,
    /// `max |(P² − P)_ab|`.
    pub max_idempotency_dev: f64,
    /// `max |(P − P*)_ab|`.
    pub max_hermiticity_dev: f64,
    /// `max |tr(P) − r|`.
    pub max_rank_dev: f64,
    pub max_imag: f64,
    pub gram_rank: usize,
    /// Smallest over largest Gram eigenvalue.
    pub gram_condition: f64,
    pub passed: bool,
}

/// Pairwise traces, idempotency and Gram rank. Failures are verdicts.
pub fn verify_equiangular(family: &ProjectionFamily, tol: &Tolerance) -> Result<EquiangularReport> {
    let mats = family.matrices();
    let n = mats.len();
    let r = family.r as f64;
    let beta = family.beta_target.to_f64().unwrap_or(f64::NAN);
    let gram = matcore::gram_matrix(&mats)?;
    let mut max_angle_dev: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            max_angle_dev = max_angle_dev.max((gram[(i, j)] - beta).norm());
        }
    }
    let per_member: Vec<(f64, f64, f64, f64)> = mats
        .par_iter()
        .map(|pm| {
            let idem = (&(pm * pm) - pm).max_abs();
            let herm = (pm - &pm.adjoint()).max_abs();
            let tr = (pm.trace() - r).norm();
            (idem, herm, tr, pm.max_imag())
        })
        .collect();
    let fold = |f: fn(&(f64, f64, f64, f64)) -> f64| per_member.iter().map(f).fold(0.0, f64::max);
    let eig = if n > 0 { matcore::hermitian_eigenvalues(&gram)? } else { Vec::new() };
    let gram_rank = matcore::rank_from_eigenvalues(&eig, tol);
    let gram_condition = match (eig.first(), eig.last()) {
        (Some(&lo), Some(&hi)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    };
    let mut report = EquiangularReport {
        d: family.d,
        r: family.r,
        count: n,
        pairs: n * n.saturating_sub(1) / 2,
        beta_num: *family.beta_target.numer(),
        beta_den: *family.beta_target.denom(),
        max_angle_dev,
        max_idempotency_dev: fold(|x| x.0),
        max_hermiticity_dev: fold(|x| x.1),
        max_rank_dev: fold(|x| x.2),
        max_imag: fold(|x| x.3),
        gram_rank,
        gram_condition,
        passed: false,
    };
    report.passed = n > 0
        && report.max_angle_dev <= tol.eps
        && report.max_idempotency_dev <= tol.eps
        && report.max_hermiticity_dev <= tol.eps
        && report.max_rank_dev <= tol.eps
        && report.max_imag <= tol.eps
        && report.gram_rank == n;
    Ok(report)
}

/// `x · Σ P_i ≈ I` with `x = (r² − dβ)/(r(r − β))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReconstruction {
    pub x_num: i64,
    pub x_den: i64,
    pub max_dev: f64,
}

pub fn identity_reconstruction(family: &ProjectionFamily) -> Result<IdentityReconstruction> {
    let d = family.d as i64;
    let r = Rational::from_integer(family.r as i64);
    let beta = family.beta_target;
    if r == beta || r.is_zero() {
        return Err(Error::Invalid("identity reconstruction needs β ≠ r and r > 0".into()));
    }
    let x = (r * r - beta * d) / (r * (r - beta));
    let mut sum = ComplexMatrix::zeros(family.d, family.d);
    for m in &family.members {
        sum = &sum + &m.matrix;
    }
    let xf = x.to_f64().unwrap_or(f64::NAN);
    let max_dev = (&sum.scale_real(xf) - &ComplexMatrix::identity(family.d)).max_abs();
    Ok(IdentityReconstruction {
        x_num: *x.numer(),
        x_den: *x.denom(),
        max_dev,
    })
}

/// `Q_i = I − P_i`, of rank `d − r` and angle `β' = (d − r) + (β − r)`.
pub fn dual_family(family: &ProjectionFamily) -> ProjectionFamily {
    let id = ComplexMatrix::identity(family.d);
    let r_dual = family.d - family.r;
    let beta_dual = Rational::from_integer(r_dual as i64) + family.beta_target
        - Rational::from_integer(family.r as i64);
    let members = family
        .members
        .iter()
        .map(|m| Projection {
            t: m.t,
            shift: m.shift,
            matrix: &id - &m.matrix,
        })
        .collect();
    ProjectionFamily {
        d: family.d,
        r: r_dual,
        beta_target: beta_dual,
        c: family.c,
        p: family.p,
        k: family.k,
        members,
    }
}

/// The six diagonals of the regular icosahedron as rank-one projections on
/// `ℝ³`, from `(0, ±1, φ)`, `(±1, φ, 0)`, `(φ, 0, ±1)`.
pub fn icosahedron_lines() -> ProjectionFamily {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [0.0, 1.0, phi],
        [0.0, -1.0, phi],
        [1.0, phi, 0.0],
        [-1.0, phi, 0.0],
        [phi, 0.0, 1.0],
        [phi, 0.0, -1.0],
    ];
    let tol = Tolerance::default();
    let members = raw
        .iter()
        .map(|v| Projection {
            t: None,
            shift: None,
            matrix: projection_from_basis(&[v.to_vec()], &tol).expect("single nonzero vector"),
        })
        .collect();
    ProjectionFamily::new(3, 1, Rational::new(1, 5), members).expect("3x3 members")
}

/// `β − r`, preserved by duality.
pub fn angle_gap(family: &ProjectionFamily) -> Rational {
    family.beta_target - Rational::from_integer(family.r as i64)
}

impl ProjectionFamily {
    /// True when `β` differs from `r`, the condition for linear independence.
    pub fn has_independent_angle(&self) -> bool {
        angle_gap(self) != Rational::zero()
    }
}
