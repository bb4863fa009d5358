//! The symmetric Werner–Holevo channel `X ↦ (tr(X)·I + Xᵀ)/(d+1)` and its
//! mixed-unitary decomposition over a trace-orthogonal unitary basis of the
//! symmetric matrices.
//!
//! Choi matrices are `Σ_ij E_ij ⊗ Φ(E_ij)`, consistent with the
//! column-stacking convention of [`crate::matcore`]: the Choi matrix of
//! `X ↦ U X U*` is `vec(U)·vec(U)*`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, Tolerance, ONE};
use crate::umeb::{UmebCertificate, UnitaryFamily};

/// `(tr(x)·I + xᵀ)/(d+1)`.
pub fn wh_plus_apply(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let d = x.rows();
    let tr = x.trace();
    let mut out = x.transpose();
    for i in 0..d {
        out[(i, i)] += tr;
    }
    Ok(out.scale_real(1.0 / (d as f64 + 1.0)))
}

/// Assemble `Σ_ij E_ij ⊗ Φ(E_ij)` for a linear map on `d×d` matrices.
pub fn choi_of_channel<F>(channel: F, d: usize) -> ComplexMatrix
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let image = channel(&ComplexMatrix::unit(d, i, j));
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] = image[(k, l)];
                }
            }
        }
    }
    choi
}

/// Tensor flip on `ℂ^d ⊗ ℂ^d`: `e_a ⊗ e_b ↦ e_b ⊗ e_a`.
pub fn swap_matrix(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = ONE;
        }
    }
    s
}

/// `(I + SWAP)/(d+1)`, the Choi matrix of the symmetric Werner–Holevo channel.
pub fn wh_plus_choi_reference(d: usize) -> ComplexMatrix {
    (&ComplexMatrix::identity(d * d) + &swap_matrix(d)).scale_real(1.0 / (d as f64 + 1.0))
}

/// Numerical rank of the Choi matrix.
pub fn choi_rank<F>(channel: F, d: usize, tol: &Tolerance) -> Result<usize>
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let choi = choi_of_channel(channel, d);
    Ok(matcore::rank_from_eigenvalues(
        &matcore::hermitian_eigenvalues(&choi)?,
        tol,
    ))
}

/// `X ↦ Σ_j p_j U_j X U_j*`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedUnitaryDecomposition {
    d: usize,
    weights: Vec<f64>,
    unitaries: Vec<ComplexMatrix>,
}

impl MixedUnitaryDecomposition {
    /// Weights must be positive and sum to one within `tol.eps`.
    pub fn new(weights: Vec<f64>, unitaries: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        if weights.is_empty() || weights.len() != unitaries.len() {
            return Err(Error::Invalid(format!(
                "{} weights for {} unitaries",
                weights.len(),
                unitaries.len()
            )));
        }
        if weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::Invalid("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.eps {
            return Err(Error::Invalid(format!("weights sum to {total}, not 1")));
        }
        let d = unitaries[0].rows();
        if let Some(u) = unitaries.iter().find(|u| u.shape() != (d, d)) {
            return Err(Error::ShapeMismatch {
                left: (d, d),
                right: u.shape(),
            });
        }
        Ok(Self {
            d,
            weights,
            unitaries,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            out = &out + &(&(u * x) * &u.adjoint()).scale_real(*w);
        }
        out
    }

    /// `Σ_j p_j vec(U_j)·vec(U_j)*`.
    pub fn choi(&self) -> ComplexMatrix {
        let n = self.d * self.d;
        let mut out = ComplexMatrix::zeros(n, n);
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            let v = matcore::vec_columns(u);
            for a in 0..n {
                let va = v[(a, 0)] * *w;
                for b in 0..n {
                    out[(a, b)] += va * v[(b, 0)].conj();
                }
            }
        }
        out
    }
}

/// Uniform weights `2/(d(d+1))` over a certified symmetric-spanning family.
pub fn umeb_decomposition(uf: &UnitaryFamily, cert: &UmebCertificate) -> Result<MixedUnitaryDecomposition> {
    if !cert.symmetric_span || cert.cardinality != uf.len() || cert.d != uf.d() {
        return Err(Error::NotCertified);
    }
    let d = uf.d() as f64;
    let w = 2.0 / (d * (d + 1.0));
    MixedUnitaryDecomposition::new(vec![w; uf.len()], uf.unitaries().to_vec(), &Tolerance::default())
}

/// Hermitian `(G + G*)/2` with `G` entries uniform on `[0,1) × [0,1)`, from
/// a ChaCha8 stream seeded with `seed`.
pub fn random_hermitian(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.random();
        let im: f64 = rng.random();
        Complex64::new(re, im)
    });
    (&g + &g.adjoint()).scale_real(0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhReport {
    pub d: usize,
    pub terms: usize,
    /// `‖Σ p_j vec(U_j)vec(U_j)* − Choi(WH₊)‖_F`.
    pub choi_dev: f64,
    /// `‖Choi(WH₊) − (I + SWAP)/(d+1)‖_F`, both assembled independently.
    pub choi_reference_dev: f64,
    /// Largest `‖Σ p_j U_j X U_j* − WH₊(X)‖_max / ‖X‖_max` over the trials.
    pub apply_dev_max: f64,
    pub trials: usize,
    pub seed: u64,
    pub choi_verdict: bool,
    pub apply_verdict: bool,
    pub verdict: bool,
}

/// Check the decomposition against the channel two ways: Choi matrices,
/// and action on `trials` random Hermitian inputs (trial `t` uses seed
/// `seed + t`).
pub fn verify_decomposition(
    dec: &MixedUnitaryDecomposition,
    trials: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<WhReport> {
    if trials == 0 {
        return Err(Error::Invalid("at least one trial is required".into()));
    }
    let d = dec.d;
    let choi_wh = choi_of_channel(|x| wh_plus_apply(x).expect("square input"), d);
    let choi_dev = (&dec.choi() - &choi_wh).frobenius_norm();
    let choi_reference_dev = (&choi_wh - &wh_plus_choi_reference(d)).frobenius_norm();

    let apply_dev_max = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = random_hermitian(d, seed.wrapping_add(t as u64));
            let direct = wh_plus_apply(&x).expect("square input");
            (&dec.apply(&x) - &direct).max_abs() / x.max_abs()
        })
        .reduce(|| 0.0, f64::max);

    let dd = (d * d) as f64;
    let choi_verdict = choi_dev <= tol.eps * dd && choi_reference_dev <= tol.eps * dd;
    let apply_verdict = apply_dev_max <= tol.eps;
    Ok(WhReport {
        d,
        terms: dec.len(),
        choi_dev,
        choi_reference_dev,
        apply_dev_max,
        trials,
        seed,
        choi_verdict,
        apply_verdict,
        verdict: choi_verdict && apply_verdict,
    })
}
