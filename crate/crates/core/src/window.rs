//! The Gaussian analysis window, its M-dependent truncation, spectral
//! moment integrals, and the closed-form second-order statistics of white
//! noise seen through the STFT.
//!
//! Window convention: h(x) = (2 pi)^{-1/2} e^{-x^2/2}, hhat(xi) =
//! e^{-2 pi^2 xi^2}. The M-truncated window is the inverse transform of
//! hhat * psi where psi is a fixed smooth bump equal to 1 on [-M, M] and
//! supported on [-2M, 2M], so STFT values at frequencies more than 4M apart
//! are exactly independent.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::ComplexGaussian;
use crate::quad;

const PI: f64 = std::f64::consts::PI;

/// Quadrature truncation: the Gaussian spectral factor is below 1e-300
/// beyond this radius.
const GAUSSIAN_SUPPORT: f64 = 6.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowKind {
    Gaussian,
    /// Spectrally truncated window with plateau half-width `m`.
    MTruncated { m: f64 },
}

/// Analysis window: frequency response plus time samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct WindowSpec {
    kind: WindowKind,
    dt: f64,
    half: usize,
    h: Vec<f64>,
    dh: Vec<f64>,
}

/// Smooth bump: 1 on |t| <= m, 0 beyond 2m, exponential smoothstep between.
pub fn bump_psi(t: f64, m: f64) -> f64 {
    let a = t.abs();
    if a <= m {
        1.0
    } else if a >= 2.0 * m {
        0.0
    } else {
        let b = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
        let up = b((2.0 * m - a) / m);
        up / (up + b((a - m) / m))
    }
}

fn gaussian_h(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn gaussian_hhat(xi: f64) -> f64 {
    (-2.0 * PI * PI * xi * xi).exp()
}

impl WindowSpec {
    /// The Gaussian window sampled at spacing `dt` with half-width
    /// `half_width` seconds (tail mass beyond 8 is below 1e-14).
    pub fn gaussian(dt: f64, half_width: f64) -> Result<Self> {
        if !(dt > 0.0) || !(half_width > 0.0) {
            return Err(Error::domain("WindowSpec::gaussian", "dt and half_width must be > 0"));
        }
        let half = (half_width / dt).round() as usize;
        let mut h = Vec::with_capacity(2 * half + 1);
        let mut dh = Vec::with_capacity(2 * half + 1);
        for k in -(half as isize)..=(half as isize) {
            let x = k as f64 * dt;
            let v = gaussian_h(x);
            h.push(v);
            dh.push(-x * v);
        }
        Ok(Self { kind: WindowKind::Gaussian, dt, half, h, dh })
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Half-width in samples; time samples run k = -half ..= half.
    pub fn half_len(&self) -> usize {
        self.half
    }

    /// h(k dt) for k in [-half, half].
    pub fn h_samples(&self) -> &[f64] {
        &self.h
    }

    /// h'(k dt) for k in [-half, half].
    pub fn dh_samples(&self) -> &[f64] {
        &self.dh
    }

    /// Frequency response: hhat for the Gaussian window, hhat * psi for the
    /// truncated one.
    pub fn freq_response(&self, xi: f64) -> f64 {
        match self.kind {
            WindowKind::Gaussian => gaussian_hhat(xi),
            WindowKind::MTruncated { m } => gaussian_hhat(xi) * bump_psi(xi, m),
        }
    }

    /// Radius beyond which the frequency response is identically zero
    /// (truncated window) or below 1e-300 (Gaussian).
    pub fn freq_support(&self) -> f64 {
        match self.kind {
            WindowKind::Gaussian => GAUSSIAN_SUPPORT,
            WindowKind::MTruncated { m } => 2.0 * m,
        }
    }
}

/// The M-dependent truncated window: inverse Fourier transform of
/// hhat * psi, sampled at spacing `dt` over half-width `half_width` seconds.
///
/// Time samples come from a discrete inverse transform on a power-of-two
/// spectral grid covering [-2M-2, 2M+2] at spacing <= 1/64, which keeps
/// aliasing below 1e-12.
pub fn m_truncated_window(m: f64, dt: f64, half_width: f64) -> Result<WindowSpec> {
    if !(m > 0.0) {
        return Err(Error::domain("m_truncated_window", "M must be > 0"));
    }
    if dt > 1.0 / (8.0 * m) {
        return Err(Error::UnderResolvedGrid(format!(
            "dt = {dt} too coarse for M = {m}; need dt <= 1/(8M) = {}",
            1.0 / (8.0 * m)
        )));
    }
    let span = 4.0 * m + 4.0;
    let mut n = 1usize;
    while (span / n as f64) > 1.0 / 64.0 {
        n *= 2;
    }
    let dxi = span / n as f64;
    // positive-frequency table of hhat * psi
    let table: Vec<(f64, f64)> = (0..=n / 2)
        .map(|i| {
            let xi = i as f64 * dxi;
            (xi, gaussian_hhat(xi) * bump_psi(xi, m))
        })
        .collect();
    let half = (half_width / dt).round() as usize;
    let mut h = Vec::with_capacity(2 * half + 1);
    let mut dh = Vec::with_capacity(2 * half + 1);
    for k in -(half as isize)..=(half as isize) {
        let x = k as f64 * dt;
        let mut sum = table[0].1;
        let mut dsum = 0.0;
        for &(xi, v) in &table[1..] {
            let (s, c) = (2.0 * PI * xi * x).sin_cos();
            sum += 2.0 * v * c;
            dsum -= 4.0 * PI * xi * v * s;
        }
        h.push(sum * dxi);
        dh.push(dsum * dxi);
    }
    Ok(WindowSpec { kind: WindowKind::MTruncated { m }, dt, half, h, dh })
}

/// Moment integral gamma_k(s) = int xi^k hhat(xi - s) hhat(xi) dxi by
/// adaptive quadrature (absolute tolerance 1e-12). Real because both
/// frequency responses here are real and even.
pub fn gamma_k(window: &WindowSpec, s: f64, k: u32) -> Result<f64> {
    if k > 2 {
        return Err(Error::domain("gamma_k", format!("k must be in 0..=2, got {k}")));
    }
    let r = window.freq_support();
    let (lo, hi) = ((s - r).max(-r), (s + r).min(r));
    if lo >= hi {
        return Ok(0.0);
    }
    let panels = ((hi - lo) / 0.4).ceil() as usize;
    Ok(quad::adaptive_panels(
        |xi: f64| xi.powi(k as i32) * window.freq_response(xi - s) * window.freq_response(xi),
        lo,
        hi,
        panels,
        1e-12,
        1e-14,
    ))
}

/// Moment integral nu_k(s) = int xi^k hhat(xi) hhat(s - xi) dxi.
pub fn nu_k(window: &WindowSpec, s: f64, k: u32) -> Result<f64> {
    if k > 2 {
        return Err(Error::domain("nu_k", format!("k must be in 0..=2, got {k}")));
    }
    let r = window.freq_support();
    let (lo, hi) = ((s - r).max(-r), (s + r).min(r));
    if lo >= hi {
        return Ok(0.0);
    }
    let panels = ((hi - lo) / 0.4).ceil() as usize;
    Ok(quad::adaptive_panels(
        |xi: f64| xi.powi(k as i32) * window.freq_response(xi) * window.freq_response(s - xi),
        lo,
        hi,
        panels,
        1e-12,
        1e-14,
    ))
}

/// Closed-form gamma_k for the Gaussian window:
/// gamma_0(s) = e^{-pi^2 s^2}/(2 sqrt pi), gamma_1 = (s/2) gamma_0,
/// gamma_2 = (1/(8 pi^2) + s^2/4) gamma_0. nu_k coincides with gamma_k.
pub fn gaussian_gamma_closed(s: f64, k: u32) -> Result<f64> {
    let g0 = (-PI * PI * s * s).exp() / (2.0 * PI.sqrt());
    match k {
        0 => Ok(g0),
        1 => Ok(0.5 * s * g0),
        2 => Ok((1.0 / (8.0 * PI * PI) + 0.25 * s * s) * g0),
        _ => Err(Error::domain("gaussian_gamma_closed", format!("k must be in 0..=2, got {k}"))),
    }
}

/// Covariance and pseudocovariance of (Phi(h_{t,eta}), Phi((h')_{t,eta}))
/// for white noise.
#[derive(Debug, Clone)]
pub struct NoiseSecondOrder {
    pub gamma: Matrix2<Complex64>,
    pub c: Matrix2<Complex64>,
}

impl NoiseSecondOrder {
    /// As a zero-mean complex Gaussian, ready for sampling.
    pub fn to_complex_gaussian(&self) -> Result<ComplexGaussian> {
        ComplexGaussian::new(
            DVector::zeros(2),
            DMatrix::from_fn(2, 2, |i, j| self.gamma[(i, j)]),
            DMatrix::from_fn(2, 2, |i, j| self.c[(i, j)]),
        )
    }
}

fn second_order_from_moments(
    g0: f64,
    g2: f64,
    n0: f64,
    n1: f64,
    n2: f64,
    eta: f64,
) -> NoiseSecondOrder {
    let z = Complex64::new(0.0, 0.0);
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    let gamma = Matrix2::new(
        Complex64::new(g0, 0.0),
        z,
        z,
        Complex64::new(4.0 * PI * PI * g2, 0.0),
    );
    let off = i2pi * (2.0 * eta * n0 - n1);
    let c = Matrix2::new(
        Complex64::new(n0, 0.0),
        off,
        off,
        Complex64::new(-4.0 * PI * PI * (2.0 * eta * n1 - n2), 0.0),
    );
    NoiseSecondOrder { gamma, c }
}

/// Exact second-order structure at frequency `eta`: the Gaussian window
/// uses the closed forms
/// Gamma_eta = (2 sqrt pi)^{-1} diag(1, 1/2) and
/// C_eta = e^{-4 pi^2 eta^2}/(2 sqrt pi) [[1, 2 pi i eta],
/// [2 pi i eta, 1/2 - 4 pi^2 eta^2]]; truncated windows are assembled from
/// the moment integrals.
pub fn noise_second_order(window: &WindowSpec, eta: f64) -> Result<NoiseSecondOrder> {
    match window.kind() {
        WindowKind::Gaussian => {
            let g = 1.0 / (2.0 * PI.sqrt());
            let e = (-4.0 * PI * PI * eta * eta).exp() * g;
            let z = Complex64::new(0.0, 0.0);
            let gamma = Matrix2::new(
                Complex64::new(g, 0.0),
                z,
                z,
                Complex64::new(0.5 * g, 0.0),
            );
            let off = Complex64::new(0.0, 2.0 * PI * eta * e);
            let c = Matrix2::new(
                Complex64::new(e, 0.0),
                off,
                off,
                Complex64::new(e * (0.5 - 4.0 * PI * PI * eta * eta), 0.0),
            );
            Ok(NoiseSecondOrder { gamma, c })
        }
        WindowKind::MTruncated { .. } => noise_second_order_quadrature(window, eta),
    }
}

/// Oracle path: the same structure assembled entirely from adaptive
/// quadrature of gamma_k / nu_k. Works for any window kind.
pub fn noise_second_order_quadrature(window: &WindowSpec, eta: f64) -> Result<NoiseSecondOrder> {
    let g0 = gamma_k(window, 0.0, 0)?;
    let g2 = gamma_k(window, 0.0, 2)?;
    let s = 2.0 * eta;
    Ok(second_order_from_moments(
        g0,
        g2,
        nu_k(window, s, 0)?,
        nu_k(window, s, 1)?,
        nu_k(window, s, 2)?,
        eta,
    ))
}

/// Full 4x4 law of (Phi(h_eta), Phi(h'_eta), Phi(h_eta2), Phi(h'_eta2)),
/// zero mean, cross blocks by quadrature. `eta != eta2`; the equal case is
/// `noise_second_order`.
pub fn noise_second_order_pair(
    window: &WindowSpec,
    eta: f64,
    eta2: f64,
) -> Result<ComplexGaussian> {
    if eta == eta2 {
        return Err(Error::GridMismatch(
            "noise_second_order_pair requires eta != eta2".into(),
        ));
    }
    let d1 = noise_second_order(window, eta)?;
    let d2 = noise_second_order(window, eta2)?;

    let r = window.freq_support();
    // covariance cross block: integrals of (eta + u)^p (eta2 + u)^q W(u),
    // W(u) = hhat(eta + u) hhat(eta2 + u)
    let (lo, hi) = ((-eta - r).max(-eta2 - r), (-eta + r).min(-eta2 + r));
    let cov_int = |p: u32, q: u32| -> f64 {
        if lo >= hi {
            return 0.0;
        }
        quad::adaptive_panels(
            |u: f64| {
                (eta + u).powi(p as i32)
                    * (eta2 + u).powi(q as i32)
                    * window.freq_response(eta + u)
                    * window.freq_response(eta2 + u)
            },
            lo,
            hi,
            ((hi - lo) / 0.4).ceil() as usize,
            1e-13,
            1e-14,
        )
    };
    let i0 = cov_int(0, 0);
    let ia = cov_int(1, 0);
    let ib = cov_int(0, 1);
    let iab = cov_int(1, 1);
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    let g_cross = Matrix2::new(
        Complex64::new(i0, 0.0),
        -i2pi * ib,
        i2pi * ia,
        Complex64::new(4.0 * PI * PI * iab, 0.0),
    );

    // pseudocovariance cross block with Wt(u) = hhat(eta + u) hhat(eta2 - u)
    let (plo, phi) = ((-eta - r).max(eta2 - r), (-eta + r).min(eta2 + r));
    let pse_int = |p: u32, q: u32| -> f64 {
        if plo >= phi {
            return 0.0;
        }
        quad::adaptive_panels(
            |u: f64| {
                (eta + u).powi(p as i32)
                    * (eta2 - u).powi(q as i32)
                    * window.freq_response(eta + u)
                    * window.freq_response(eta2 - u)
            },
            plo,
            phi,
            ((phi - plo) / 0.4).ceil() as usize,
            1e-13,
            1e-14,
        )
    };
    let j0 = pse_int(0, 0);
    let ja = pse_int(1, 0);
    let jb = pse_int(0, 1);
    let jab = pse_int(1, 1);
    let c_cross = Matrix2::new(
        Complex64::new(j0, 0.0),
        i2pi * jb,
        i2pi * ja,
        Complex64::new(-4.0 * PI * PI * jab, 0.0),
    );

    let mut gamma = DMatrix::<Complex64>::zeros(4, 4);
    let mut c = DMatrix::<Complex64>::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            gamma[(i, j)] = d1.gamma[(i, j)];
            gamma[(i + 2, j + 2)] = d2.gamma[(i, j)];
            gamma[(i, j + 2)] = g_cross[(i, j)];
            gamma[(i + 2, j)] = g_cross[(j, i)].conj();
            c[(i, j)] = d1.c[(i, j)];
            c[(i + 2, j + 2)] = d2.c[(i, j)];
            c[(i, j + 2)] = c_cross[(i, j)];
            c[(i + 2, j)] = c_cross[(j, i)];
        }
    }
    ComplexGaussian::new(DVector::zeros(4), gamma, c)
}
