//! Improper complex Gaussian vectors and the distribution of their
//! quotients.
//!
//! A complex Gaussian C N_n(mu, Gamma, C) is parametrized by its mean,
//! covariance Gamma = E[(Z-mu)(Z-mu)*] and pseudocovariance
//! C = E[(Z-mu)(Z-mu)^T]. The augmented covariance
//! Sigma = [[Gamma, C], [conj C, conj Gamma]] characterizes the law
//! completely; the Schur complement P = conj(Gamma) - conj(C) Gamma^{-1} C
//! and R = conj(C) Gamma^{-1} drive its block inverse.
//!
//! The quotient Q = Z2/Z1 of a bivariate complex Gaussian has density
//!
//! f_Q(q) = e^{-mu_a* Sigma^{-1} mu_a / 2} / (pi^2 sqrt(det Gamma det P))
//!          * int_0^pi 1F1(2; 1/2; B(th,q)^2/A(th,q)) A(th,q)^{-2} dth
//!
//! with A(th,q) = q_a* conj(P^{-1}) q_a - Re(e^{2i th} q_a^T R^T conj(P^{-1}) q_a),
//! B(th,q) = Re(e^{i th} (mu* - mu^T R^T) conj(P^{-1}) q_a) and
//! q_a = (1, q)^T. When C = 0 and mu = 0 this collapses to the closed form
//! f_{Q_circ}(q) = (pi det Gamma)^{-1} (q_a* Gamma^{-1} q_a)^{-2}.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quad;
use crate::special;

const PI: f64 = std::f64::consts::PI;

/// Relative eigenvalue cutoff for positive-definiteness checks.
const PD_RTOL: f64 = 1e-12;

/// Pseudocovariances below this magnitude are treated as exactly proper.
const PROPER_TOL: f64 = 1e-14;

/// An improper complex Gaussian vector (n = 2 or n = 4 in this artifact,
/// any n accepted).
#[derive(Debug, Clone)]
pub struct ComplexGaussian {
    mu: DVector<Complex64>,
    gamma: DMatrix<Complex64>,
    c: DMatrix<Complex64>,
}

/// Augmented covariance algebra of a [`ComplexGaussian`].
#[derive(Debug, Clone)]
pub struct AugmentedForm {
    /// Augmented covariance Sigma = [[Gamma, C], [conj C, conj Gamma]].
    pub sigma: DMatrix<Complex64>,
    /// Block-formula inverse of sigma.
    pub sigma_inv: DMatrix<Complex64>,
    /// Schur complement P = conj(Gamma) - conj(C) Gamma^{-1} C.
    pub schur_p: DMatrix<Complex64>,
    /// R = conj(C) Gamma^{-1}.
    pub matrix_r: DMatrix<Complex64>,
    /// log det Sigma = log det Gamma + log det P.
    pub log_det: f64,
    ln_det_gamma: f64,
    ln_det_p: f64,
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> DVector<f64> {
    m.clone().symmetric_eigen().eigenvalues
}

fn check_pd(m: &DMatrix<Complex64>, name: &'static str) -> Result<()> {
    let ev = hermitian_eigenvalues(m);
    let max = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > PD_RTOL * max.abs()) {
        return Err(Error::DegenerateCovariance {
            matrix: name,
            detail: format!("eigenvalue range [{min:.3e}, {max:.3e}]"),
        });
    }
    Ok(())
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// log of the (real, positive) determinant of a Hermitian PD matrix.
fn ln_det_hermitian(m: &DMatrix<Complex64>, name: &'static str) -> Result<f64> {
    let ev = hermitian_eigenvalues(m);
    let mut acc = 0.0;
    for &l in ev.iter() {
        if !(l > 0.0) {
            return Err(Error::DegenerateCovariance {
                matrix: name,
                detail: format!("nonpositive eigenvalue {l:.3e}"),
            });
        }
        acc += l.ln();
    }
    Ok(acc)
}

impl ComplexGaussian {
    /// Validated constructor. `gamma` must be Hermitian positive definite,
    /// `c` complex symmetric, and the Schur complement positive definite;
    /// inputs within 1e-12 of those symmetries are symmetrized and stored
    /// exactly symmetric.
    pub fn new(
        mu: DVector<Complex64>,
        gamma: DMatrix<Complex64>,
        c: DMatrix<Complex64>,
    ) -> Result<Self> {
        let n = mu.len();
        if gamma.nrows() != n || !gamma.is_square() || c.nrows() != n || !c.is_square() {
            return Err(Error::GridMismatch(format!(
                "mu has dim {n} but gamma is {}x{} and c is {}x{}",
                gamma.nrows(),
                gamma.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        let scale = max_abs(&gamma).max(1e-300);
        if max_abs(&(&gamma - gamma.adjoint())) > 1e-12 * scale {
            return Err(Error::DegenerateCovariance {
                matrix: "gamma",
                detail: "not Hermitian".into(),
            });
        }
        if max_abs(&(&c - c.transpose())) > 1e-12 * scale {
            return Err(Error::DegenerateCovariance {
                matrix: "c",
                detail: "not complex symmetric".into(),
            });
        }
        let gamma = (&gamma + gamma.adjoint()).scale(0.5);
        let c = (&c + c.transpose()).scale(0.5);
        check_pd(&gamma, "gamma")?;
        let g = Self { mu, gamma, c };
        check_pd(&g.schur_complement()?, "schur complement P")?;
        Ok(g)
    }

    /// Proper case C = 0.
    pub fn proper(mu: DVector<Complex64>, gamma: DMatrix<Complex64>) -> Result<Self> {
        let n = mu.len();
        Self::new(mu, gamma, DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<Complex64> {
        &self.mu
    }

    pub fn gamma(&self) -> &DMatrix<Complex64> {
        &self.gamma
    }

    pub fn c(&self) -> &DMatrix<Complex64> {
        &self.c
    }

    pub fn is_proper(&self) -> bool {
        max_abs(&self.c) < PROPER_TOL
    }

    fn gamma_inv(&self) -> Result<DMatrix<Complex64>> {
        self.gamma.clone().try_inverse().ok_or(Error::DegenerateCovariance {
            matrix: "gamma",
            detail: "singular".into(),
        })
    }

    fn schur_complement(&self) -> Result<DMatrix<Complex64>> {
        let gi = self.gamma_inv()?;
        let p = self.gamma.conjugate() - self.c.conjugate() * gi * &self.c;
        Ok((&p + p.adjoint()).scale(0.5))
    }

    /// Augmented covariance, its block-formula inverse, Schur complement P,
    /// R = conj(C) Gamma^{-1}, and log det Sigma.
    pub fn augmented_form(&self) -> Result<AugmentedForm> {
        let n = self.dim();
        let p = self.schur_complement()?;
        check_pd(&p, "schur complement P")?;
        let r = self.c.conjugate() * self.gamma_inv()?;
        let p_inv = p.clone().try_inverse().ok_or(Error::DegenerateCovariance {
            matrix: "schur complement P",
            detail: "singular".into(),
        })?;

        let mut sigma = DMatrix::zeros(2 * n, 2 * n);
        sigma.view_mut((0, 0), (n, n)).copy_from(&self.gamma);
        sigma.view_mut((0, n), (n, n)).copy_from(&self.c);
        sigma.view_mut((n, 0), (n, n)).copy_from(&self.c.conjugate());
        sigma.view_mut((n, n), (n, n)).copy_from(&self.gamma.conjugate());

        // Sigma^{-1} = [[conj(P^{-1}), -conj(P^{-1}) conj(R)],
        //               [-R^T conj(P^{-1}), P^{-1}]]
        let pic = p_inv.conjugate();
        let mut sigma_inv = DMatrix::zeros(2 * n, 2 * n);
        sigma_inv.view_mut((0, 0), (n, n)).copy_from(&pic);
        sigma_inv
            .view_mut((0, n), (n, n))
            .copy_from(&(-(&pic) * r.conjugate()));
        sigma_inv
            .view_mut((n, 0), (n, n))
            .copy_from(&(-(r.transpose()) * &pic));
        sigma_inv.view_mut((n, n), (n, n)).copy_from(&p_inv);

        let ln_det_gamma = ln_det_hermitian(&self.gamma, "gamma")?;
        let ln_det_p = ln_det_hermitian(&p, "schur complement P")?;
        Ok(AugmentedForm {
            sigma,
            sigma_inv,
            schur_p: p,
            matrix_r: r,
            log_det: ln_det_gamma + ln_det_p,
            ln_det_gamma,
            ln_det_p,
        })
    }

    /// Augmented mean [mu; conj mu].
    fn mu_augmented(&self) -> DVector<Complex64> {
        let n = self.dim();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.mu);
        out.rows_mut(n, n).copy_from(&self.mu.conjugate());
        out
    }

    /// Density f_Z(z) = pi^{-n} (det Sigma)^{-1/2}
    /// exp(-(z_a - mu_a)* Sigma^{-1} (z_a - mu_a) / 2).
    pub fn density(&self, z: &DVector<Complex64>) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::GridMismatch(format!(
                "density point has dim {}, distribution has dim {}",
                z.len(),
                self.dim()
            )));
        }
        let aug = self.augmented_form()?;
        let n = self.dim();
        let mut dz = DVector::zeros(2 * n);
        let diff = z - &self.mu;
        dz.rows_mut(0, n).copy_from(&diff);
        dz.rows_mut(n, n).copy_from(&diff.conjugate());
        let quad_form = (dz.adjoint() * &aug.sigma_inv * &dz)[(0, 0)].re;
        Ok((-(n as f64) * PI.ln() - 0.5 * aug.log_det - 0.5 * quad_form).exp())
    }

    /// Real 2n x 2n covariance of (Re Z, Im Z), reconstructed from
    /// (Gamma, C) via V_xx = Re(Gamma+C)/2, V_yy = Re(Gamma-C)/2,
    /// V_yx = Im(Gamma+C)/2, V_xy = Im(C-Gamma)/2.
    pub fn real_covariance(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let g = self.gamma[(i, j)];
                let c = self.c[(i, j)];
                out[(i, j)] = 0.5 * (g.re + c.re);
                out[(i, j + n)] = 0.5 * (c.im - g.im);
                out[(i + n, j)] = 0.5 * (g.im + c.im);
                out[(i + n, j + n)] = 0.5 * (g.re - c.re);
            }
        }
        out
    }

    /// i.i.d. draws. The real 2n-dim covariance is eigen-factored; tiny
    /// negative eigenvalues from roundoff are clamped to zero, genuinely
    /// indefinite reconstructions are an error.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
    ) -> Result<Vec<DVector<Complex64>>> {
        let factor = self.sampling_factor()?;
        Ok((0..count).map(|_| self.sample_one_with(&factor, rng)).collect())
    }

    /// Precomputed factor of the real covariance, for bulk sampling loops.
    pub fn sampling_factor(&self) -> Result<DMatrix<f64>> {
        let cov = self.real_covariance();
        let sym = (&cov + cov.transpose()).scale(0.5);
        let eig = sym.symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let mut factor = eig.eigenvectors;
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l < -1e-10 * max {
                return Err(Error::DegenerateCovariance {
                    matrix: "real covariance",
                    detail: format!("eigenvalue {l:.3e} after reconstruction"),
                });
            }
            let s = l.max(0.0).sqrt();
            factor.column_mut(k).scale_mut(s);
        }
        Ok(factor)
    }

    /// One draw using a precomputed factor from [`Self::sampling_factor`].
    pub fn sample_one_with<R: Rng + ?Sized>(
        &self,
        factor: &DMatrix<f64>,
        rng: &mut R,
    ) -> DVector<Complex64> {
        let n = self.dim();
        let normals = DVector::from_fn(2 * n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let xy = factor * normals;
        DVector::from_fn(n, |i, _| self.mu[i] + Complex64::new(xy[i], xy[i + n]))
    }

    /// Density of the quotient Q = Z2/Z1 (dim-2 distributions only),
    /// computed by Gauss-Legendre quadrature of the theta integral in
    /// log space.
    pub fn quotient_density(&self, q: Complex64) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::GridMismatch(
                "quotient_density requires a 2-dim complex Gaussian".into(),
            ));
        }
        let mu_zero = self.mu.iter().all(|z| z.norm() == 0.0);
        if self.is_proper() && mu_zero {
            return quotient_density_circular(&self.gamma, q);
        }
        let aug = if self.is_proper() {
            // exact proper algebra avoids 0/0 noise in the theta-dependent term
            Self::proper(self.mu.clone(), self.gamma.clone())?.augmented_form()?
        } else {
            self.augmented_form()?
        };
        let mu_a = self.mu_augmented();
        let mu_quad = (mu_a.adjoint() * &aug.sigma_inv * &mu_a)[(0, 0)].re;
        let ln_pref = -0.5 * mu_quad - 2.0 * PI.ln() - 0.5 * (aug.ln_det_gamma + aug.ln_det_p);

        let pic = aug
            .schur_p
            .clone()
            .try_inverse()
            .ok_or(Error::DegenerateCovariance {
                matrix: "schur complement P",
                detail: "singular".into(),
            })?
            .conjugate();
        let qv = DVector::from_column_slice(&[Complex64::new(1.0, 0.0), q]);
        let base = (qv.adjoint() * &pic * &qv)[(0, 0)].re;
        let cross = (qv.transpose() * aug.matrix_r.transpose() * &pic * &qv)[(0, 0)];
        let bvec = ((self.mu.adjoint() - self.mu.transpose() * aug.matrix_r.transpose()) * &pic
            * &qv)[(0, 0)];

        let ln_integral = theta_integral_ln(base, cross, bvec)?;
        Ok((ln_pref + ln_integral).exp())
    }

    /// Lower-bound constant of the density squeeze
    /// f_Q(q) >= const * f_{Q_circ}(q), from the squeezing inequality with
    /// M = P^{-1/2} C* Gamma^{-1/2}, N = conj(Gamma^{-1/2} C P^{-1}) Gamma^{1/2}
    /// and b = |Gamma^{-1/2} mu|.
    pub fn quotient_density_lower_bound(&self) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::GridMismatch(
                "quotient_density_lower_bound requires dim 2".into(),
            ));
        }
        let aug = self.augmented_form()?;
        let g_isqrt = hermitian_power(&self.gamma, -0.5)?;
        let g_sqrt = hermitian_power(&self.gamma, 0.5)?;
        let p_isqrt = hermitian_power(&aug.schur_p, -0.5)?;
        let p_inv = hermitian_power(&aug.schur_p, -1.0)?;
        let m = &p_isqrt * self.c.adjoint() * &g_isqrt;
        let n = (&g_isqrt * &self.c * &p_inv).conjugate() * &g_sqrt;
        let b = (&g_isqrt * &self.mu).norm();
        let kappa = 1.0 + op_norm(&m).powi(2) + op_norm(&n);
        let det_ratio = (aug.ln_det_p - aug.ln_det_gamma).exp();
        let h = special::hermite_neg(-4.0, kappa.sqrt() * b)?;
        Ok(12.0 * (-kappa * b * b).exp() * h / (kappa * kappa * det_ratio.sqrt()))
    }
}

/// ln of int_0^pi 1F1(2; 1/2; B^2/A) / A^2 dtheta with
/// A = base - Re(e^{2i th} cross), B = Re(e^{i th} bvec).
///
/// Fixed 256-node Gauss-Legendre, doubled to 512 when the two results
/// disagree beyond 1e-9 relative. Log-sum-exp keeps large-mean cases finite.
fn theta_integral_ln(base: f64, cross: Complex64, bvec: Complex64) -> Result<f64> {
    static RULES: OnceLock<[(Vec<f64>, Vec<f64>); 2]> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        [
            quad::gauss_legendre_on(256, 0.0, PI),
            quad::gauss_legendre_on(512, 0.0, PI),
        ]
    });
    let eval = |rule: &(Vec<f64>, Vec<f64>)| -> Result<f64> {
        let (nodes, weights) = rule;
        let mut terms = Vec::with_capacity(nodes.len());
        let mut max_t = f64::NEG_INFINITY;
        for (&th, &w) in nodes.iter().zip(weights) {
            let e2 = Complex64::from_polar(1.0, 2.0 * th);
            let a = base - (e2 * cross).re;
            if !(a > 0.0) {
                return Err(Error::Numerical(format!(
                    "quotient integrand A(theta) = {a:.3e} <= 0; degenerate parameters"
                )));
            }
            let b = (Complex64::from_polar(1.0, th) * bvec).re;
            let t = special::ln_confluent_1f1(2.0, 0.5, b * b / a)? - 2.0 * a.ln() + w.ln();
            max_t = max_t.max(t);
            terms.push(t);
        }
        let sum: f64 = terms.iter().map(|t| (t - max_t).exp()).sum();
        Ok(max_t + sum.ln())
    };
    let coarse = eval(&rules[0])?;
    let fine = eval(&rules[1])?;
    if (coarse - fine).abs() > 1e-9 * fine.abs().max(1.0) {
        Ok(fine)
    } else {
        Ok(coarse)
    }
}

/// Closed-form circular quotient density
/// (pi det Gamma)^{-1} (q_a* Gamma^{-1} q_a)^{-2} for C = 0, mu = 0.
pub fn quotient_density_circular(gamma: &DMatrix<Complex64>, q: Complex64) -> Result<f64> {
    if gamma.nrows() != 2 || gamma.ncols() != 2 {
        return Err(Error::GridMismatch("circular quotient needs 2x2 gamma".into()));
    }
    check_pd(gamma, "gamma")?;
    let gi = gamma.clone().try_inverse().ok_or(Error::DegenerateCovariance {
        matrix: "gamma",
        detail: "singular".into(),
    })?;
    let det = gamma.determinant().re;
    let qv = DVector::from_column_slice(&[Complex64::new(1.0, 0.0), q]);
    let s = (qv.adjoint() * gi * qv)[(0, 0)].re;
    Ok(1.0 / (PI * det * s * s))
}

/// Mean of the circular quotient: E Q_circ = Gamma_21 / Gamma_11.
pub fn quotient_mean_circular(gamma: &DMatrix<Complex64>) -> Result<Complex64> {
    if gamma.nrows() != 2 || gamma.ncols() != 2 {
        return Err(Error::GridMismatch("circular quotient needs 2x2 gamma".into()));
    }
    check_pd(gamma, "gamma")?;
    Ok(gamma[(1, 0)] / gamma[(0, 0)])
}

/// Numerical mass of the quotient density: polar quadrature over the disk
/// |q| <= radius plus a tail estimate. The density decays like
/// c4 |q|^{-4}; c4 is calibrated as the directional average of |q|^4 f(q)
/// at the disk boundary, giving tail mass pi c4 / radius^2.
///
/// Meant for validation: the result should be 1 within ~1e-3 for any
/// nondegenerate instance.
pub fn quotient_normalization(g: &ComplexGaussian, radius: f64) -> Result<f64> {
    let (tn, tw) = quad::gauss_legendre_on(128, 0.0, 2.0 * PI);
    // substitute r = e^u - 1 to cluster radial nodes near the origin
    let (un, uw) = quad::gauss_legendre_on(280, 0.0, (1.0 + radius).ln());
    let mut total = 0.0;
    for (&th, &wt) in tn.iter().zip(&tw) {
        let dir = Complex64::from_polar(1.0, th);
        let mut inner = 0.0;
        for (&u, &wu) in un.iter().zip(&uw) {
            let r = u.exp() - 1.0;
            inner += wu * g.quotient_density(dir * r)? * r * u.exp();
        }
        total += wt * inner;
    }
    let mut c4 = 0.0;
    let dirs = 16;
    for k in 0..dirs {
        let q = Complex64::from_polar(radius, 2.0 * PI * k as f64 / dirs as f64);
        c4 += radius.powi(4) * g.quotient_density(q)?;
    }
    c4 /= dirs as f64;
    Ok(total + PI * c4 / (radius * radius))
}

/// Hermitian matrix power via eigendecomposition.
fn hermitian_power(m: &DMatrix<Complex64>, p: f64) -> Result<DMatrix<Complex64>> {
    let eig = m.clone().symmetric_eigen();
    for &l in eig.eigenvalues.iter() {
        if !(l > 0.0) {
            return Err(Error::DegenerateCovariance {
                matrix: "hermitian power",
                detail: format!("nonpositive eigenvalue {l:.3e}"),
            });
        }
    }
    let n = m.nrows();
    let mut d = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = Complex64::new(eig.eigenvalues[i].powf(p), 0.0);
    }
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Operator (spectral) norm of a complex matrix.
fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    let mm = m.adjoint() * m;
    hermitian_eigenvalues(&mm)
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(0.0)
        .sqrt()
}

/// A random nondegenerate improper instance, built from a random real
/// 2n x 2n covariance so validity holds by construction. Used by tests and
/// the CLI demo.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, dim: usize, mean_scale: f64) -> ComplexGaussian {
    let b = DMatrix::<f64>::from_fn(2 * dim, 2 * dim, |_, _| rng.sample(StandardNormal));
    let sr = &b * b.transpose() + DMatrix::identity(2 * dim, 2 * dim).scale(0.1);
    // invert the real-composition map
    let blk = |r0: usize, c0: usize| sr.view((r0, c0), (dim, dim)).clone_owned();
    let (rxx, rxy, ryx, ryy) = (blk(0, 0), blk(0, dim), blk(dim, 0), blk(dim, dim));
    let gamma = DMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(rxx[(i, j)] + ryy[(i, j)], ryx[(i, j)] - rxy[(i, j)])
    });
    let c = DMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(rxx[(i, j)] - ryy[(i, j)], ryx[(i, j)] + rxy[(i, j)])
    });
    let mu = DVector::from_fn(dim, |_, _| {
        Complex64::new(
            mean_scale * rng.sample::<f64, _>(StandardNormal),
            mean_scale * rng.sample::<f64, _>(StandardNormal),
        )
    });
    ComplexGaussian::new(mu, gamma, c).expect("random instance is valid by construction")
}

/// Convenience constructors for fixed-size inputs.
pub fn cg2(
    mu: [Complex64; 2],
    gamma: [[Complex64; 2]; 2],
    c: [[Complex64; 2]; 2],
) -> Result<ComplexGaussian> {
    ComplexGaussian::new(
        DVector::from_column_slice(&mu),
        DMatrix::from_fn(2, 2, |i, j| gamma[i][j]),
        DMatrix::from_fn(2, 2, |i, j| c[i][j]),
    )
}
