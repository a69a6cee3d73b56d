use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{dot, norm, tensor_components, StateVector, Tolerances};
use crate::error::{dim_mismatch, Error, Result};

/// A complete orthonormal family `{|b_i>}`: one measurement context.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<StateVector>,
}

impl OrthonormalBasis {
    /// Validates completeness and `|<b_i|b_j> - delta_ij| <= eps_ortho`.
    pub fn new(vectors: Vec<StateVector>) -> Result<Self> {
        Self::with_tolerances(vectors, &Tolerances::default())
    }

    pub fn with_tolerances(vectors: Vec<StateVector>, tol: &Tolerances) -> Result<Self> {
        let dim = vectors.first().map(StateVector::dim).unwrap_or(0);
        if dim == 0 {
            return Err(Error::Dimension("basis must contain at least one vector".into()));
        }
        if vectors.len() != dim {
            return Err(dim_mismatch("basis vector count", dim, vectors.len()));
        }
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(dim_mismatch("basis vector dimension", dim, v.dim()));
        }
        let residual = gram_residual(&vectors);
        if residual > tol.ortho {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(OrthonormalBasis { vectors })
    }

    /// The computational basis `{e_0, ..., e_{dim-1}}`.
    pub fn standard(dim: usize) -> Result<Self> {
        let vectors = (0..dim)
            .map(|i| StateVector::basis_state(dim, i))
            .collect::<Result<Vec<_>>>()?;
        if vectors.is_empty() {
            return Err(Error::Dimension("dimension must be at least 1".into()));
        }
        Ok(OrthonormalBasis { vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn vector(&self, index: usize) -> &StateVector {
        &self.vectors[index]
    }

    /// `max_{i,j} |<b_i|b_j> - delta_ij|`.
    pub fn max_gram_residual(&self) -> f64 {
        gram_residual(&self.vectors)
    }

    /// `sum_i coeffs[i] |b_i>`, the inverse of [`super::amplitudes`].
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.dim() {
            return Err(dim_mismatch("coefficient count", self.dim(), coeffs.len()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (c, b) in coeffs.iter().zip(&self.vectors) {
            for (o, x) in out.iter_mut().zip(b.components()) {
                *o += c * x;
            }
        }
        Ok(out)
    }

    /// Product basis `{a_i ⊗ b_k}` in row-major order.
    pub fn tensor(&self, other: &OrthonormalBasis) -> OrthonormalBasis {
        let mut vectors = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.vectors {
            for b in &other.vectors {
                vectors.push(StateVector::from_trusted(tensor_components(
                    a.components(),
                    b.components(),
                )));
            }
        }
        OrthonormalBasis { vectors }
    }
}

fn gram_residual(vectors: &[StateVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let mut g = dot(u.components(), v.components());
            if i == j {
                g -= 1.0;
            }
            worst = worst.max(g.norm());
        }
    }
    worst
}

/// Extends `seeds` to a full orthonormal basis of dimension `dim` with
/// default tolerances. See [`orthonormal_complete_with`].
pub fn orthonormal_complete<V: AsRef<[Complex64]>>(seeds: &[V], dim: usize) -> Result<OrthonormalBasis> {
    orthonormal_complete_with(seeds, dim, &Tolerances::default())
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// The seeds are orthonormalized in order, so the first `k` output vectors
/// span the same flag as the first `k` seeds. The remainder is filled from
/// the standard axes `e_0, e_1, ...` in index order, skipping any axis whose
/// residual norm falls below `tol.rank`.
pub fn orthonormal_complete_with<V: AsRef<[Complex64]>>(
    seeds: &[V],
    dim: usize,
    tol: &Tolerances,
) -> Result<OrthonormalBasis> {
    if dim == 0 {
        return Err(Error::Dimension("dimension must be at least 1".into()));
    }
    if seeds.len() > dim {
        return Err(Error::Dimension(format!(
            "{} seed vectors exceed dimension {dim}",
            seeds.len()
        )));
    }
    let mut accepted: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for (index, seed) in seeds.iter().enumerate() {
        let seed = seed.as_ref();
        if seed.len() != dim {
            return Err(dim_mismatch("seed vector dimension", dim, seed.len()));
        }
        if seed.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let scale = norm(seed);
        let mut w = seed.to_vec();
        project_out(&mut w, &accepted);
        let residual = if scale > 0.0 { norm(&w) / scale } else { 0.0 };
        if residual < tol.rank {
            return Err(Error::RankDeficiency { index, residual });
        }
        let n = norm(&w);
        w.iter_mut().for_each(|c| *c /= n);
        accepted.push(w);
    }
    for axis in 0..dim {
        if accepted.len() == dim {
            break;
        }
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        w[axis] = Complex64::new(1.0, 0.0);
        project_out(&mut w, &accepted);
        let n = norm(&w);
        if n < tol.rank {
            continue;
        }
        w.iter_mut().for_each(|c| *c /= n);
        accepted.push(w);
    }
    if accepted.len() != dim {
        return Err(Error::Verification(format!(
            "completion produced {} of {dim} vectors",
            accepted.len()
        )));
    }
    OrthonormalBasis::with_tolerances(accepted.into_iter().map(StateVector::from_trusted).collect(), tol)
}

fn project_out(w: &mut [Complex64], accepted: &[Vec<Complex64>]) {
    for _pass in 0..2 {
        for q in accepted {
            let coeff = dot(q, w);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= coeff * y;
            }
        }
    }
}

/// Haar-distributed basis, deterministic in `seed`.
pub fn haar_basis(dim: usize, seed: u64) -> Result<OrthonormalBasis> {
    haar_basis_from_rng(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// QR of a complex Ginibre matrix, with each column of `Q` rephased so that
/// the matching diagonal entry of `R` is real and positive.
pub fn haar_basis_from_rng<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<OrthonormalBasis> {
    if dim == 0 {
        return Err(Error::Dimension("dimension must be at least 1".into()));
    }
    let entries: Vec<Complex64> = (0..dim * dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let qr = DMatrix::from_vec(dim, dim, entries).qr();
    let q = qr.q();
    let r = qr.r();
    let vectors = (0..dim)
        .map(|j| {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            StateVector::from_trusted(q.column(j).iter().map(|x| x * phase).collect())
        })
        .collect();
    OrthonormalBasis::new(vectors)
}
