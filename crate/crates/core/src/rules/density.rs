use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::FrameRule;
use crate::error::{dim_mismatch, Error, Result};
use crate::state::{orthonormal_complete, StateVector, EPS_NORM, EPS_RANK};

/// Trace-one, positive semidefinite fit of `tr(rho |v><v|) = p` over samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFit {
    pub rho: DMatrix<Complex64>,
    /// Root-mean-square misfit of the projected `rho` over the samples.
    pub residual: f64,
    /// Whether the eigenvalue clipping changed the least-squares solution.
    pub psd_clipped: bool,
}

impl DensityFit {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// `tr(rho |v><v|) = <v|rho|v>`.
    pub fn probability(&self, v: &StateVector) -> f64 {
        expectation(&self.rho, v.components())
    }

    /// Frobenius distance `||rho - |psi><psi| ||_F`.
    pub fn distance_to_pure(&self, psi: &StateVector) -> f64 {
        let c = psi.components();
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += (self.rho[(i, j)] - c[i] * c[j].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

fn expectation(rho: &DMatrix<Complex64>, v: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, vi) in v.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            acc += vi.conj() * rho[(i, j)] * vj;
        }
    }
    acc.re
}

/// Hilbert–Schmidt orthonormal basis of Hermitian `d x d` matrices, indexed
/// diagonal first, then `(E_jk + E_kj)/sqrt2`, then `i(E_kj - E_jk)/sqrt2`.
/// Returns the real coordinates `<v|G_a|v>` for one vector.
fn hermitian_features(v: &[Complex64]) -> Vec<f64> {
    let d = v.len();
    let mut out = Vec::with_capacity(d * d);
    out.extend(v.iter().map(|x| x.norm_sqr()));
    let s = std::f64::consts::SQRT_2;
    for j in 0..d {
        for k in j + 1..d {
            // <v|(E_jk + E_kj)|v> = 2 Re(conj(v_j) v_k)
            out.push(s * (v[j].conj() * v[k]).re);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            // <v| i(E_kj - E_jk) |v> = 2 Im(conj(v_j) v_k)
            out.push(s * (v[j].conj() * v[k]).im);
        }
    }
    out
}

fn assemble(theta: &[f64], d: usize) -> DMatrix<Complex64> {
    let mut rho = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for j in 0..d {
        rho[(j, j)] = Complex64::new(theta[j], 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = d;
    for j in 0..d {
        for k in j + 1..d {
            rho[(j, k)] += Complex64::new(theta[a] * s, 0.0);
            rho[(k, j)] += Complex64::new(theta[a] * s, 0.0);
            a += 1;
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            // i(E_kj - E_jk): entry (j,k) = -i, (k,j) = +i
            rho[(j, k)] += Complex64::new(0.0, -theta[a] * s);
            rho[(k, j)] += Complex64::new(0.0, theta[a] * s);
            a += 1;
        }
    }
    rho
}

/// `n` qubit states whose Bloch vectors form a Fibonacci lattice on the sphere.
pub fn sphere_states(n: usize) -> Vec<StateVector> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let theta = z.acos();
            let phi = i as f64 * golden;
            StateVector::from_trusted(vec![
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ])
        })
        .collect()
}

/// Rule probability of each probe `v` for `psi`, measured in the context
/// `orthonormal_complete([v])`.
pub fn probe_samples(rule: &FrameRule, psi: &StateVector, probes: &[StateVector]) -> Result<Vec<(StateVector, f64)>> {
    probes
        .iter()
        .map(|v| {
            let context = orthonormal_complete(&[v.components()], v.dim())?;
            Ok((v.clone(), rule.evaluate(psi, &context)?[0]))
        })
        .collect()
}

/// Least-squares trace-one Hermitian fit, then eigenvalue clipping to the
/// PSD cone and trace renormalization.
pub fn reconstruct_density(samples: &[(StateVector, f64)]) -> Result<DensityFit> {
    let d = samples
        .first()
        .map(|(v, _)| v.dim())
        .ok_or(Error::SpanDeficiency { rank: 0, required: 1 })?;
    if let Some((v, _)) = samples.iter().find(|(v, _)| v.dim() != d) {
        return Err(dim_mismatch("sample dimension", d, v.dim()));
    }
    let params = d * d;
    let n = samples.len();
    if n < params {
        return Err(Error::SpanDeficiency {
            rank: n,
            required: params,
        });
    }
    let features: Vec<Vec<f64>> = samples
        .iter()
        .map(|(v, _)| hermitian_features(v.components()))
        .collect();
    let design = DMatrix::from_fn(n, params, |r, c| features[r][c]);

    let singular = design.clone().svd(false, false).singular_values;
    let top = singular.iter().copied().fold(0.0, f64::max);
    let rank = singular.iter().filter(|&&s| s > EPS_RANK * top.max(1.0)).count();
    if rank < params {
        return Err(Error::SpanDeficiency { rank, required: params });
    }

    // Trace constraint: theta_0 = 1 - sum_{j=1}^{d-1} theta_j.
    let free = params - 1;
    let reduced = DMatrix::from_fn(n, free, |r, c| {
        let col = c + 1;
        if col < d {
            design[(r, col)] - design[(r, 0)]
        } else {
            design[(r, col)]
        }
    });
    let rhs = DVector::from_iterator(n, samples.iter().enumerate().map(|(r, (_, p))| p - design[(r, 0)]));
    let mut theta = vec![0.0; params];
    if free > 0 {
        let z = reduced
            .svd(true, true)
            .solve(&rhs, f64::EPSILON)
            .map_err(|e| Error::Verification(format!("least-squares solve failed: {e}")))?;
        theta[1..].copy_from_slice(z.as_slice());
    }
    theta[0] = 1.0 - theta[1..d].iter().sum::<f64>();
    let raw = assemble(&theta, d);

    let eig = raw.clone().symmetric_eigen();
    let psd_clipped = eig.eigenvalues.iter().any(|&l| l < -EPS_NORM);
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let trace: f64 = clipped.iter().sum();
    if trace <= 0.0 {
        return Err(Error::Verification("projected density has zero trace".into()));
    }
    let vecs = &eig.eigenvectors;
    let mut rho = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for (k, &l) in clipped.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        rho += (col * col.adjoint()) * Complex64::new(l / trace, 0.0);
    }
    // symmetrize away rounding
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);

    let residual = (samples
        .iter()
        .map(|(v, p)| (expectation(&rho, v.components()) - p).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(DensityFit {
        rho,
        residual,
        psd_clipped,
    })
}
