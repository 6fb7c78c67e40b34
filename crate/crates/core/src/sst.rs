//! Discrete STFT with phase-modulated convention, derivative STFT,
//! reassignment rule, squeezing integrand, and the synchrosqueezing
//! transform on a time-frequency grid.
//!
//! The STFT here is V(t, eta) = sum_s f(s) h(s-t) e^{-2 pi i eta (s-t)} dt,
//! a plain Riemann sum, so the discrete transform and the Riemann-sum SST
//! S(t, xi) = d_eta * sum_l Y_l agree with each other by construction. The
//! e^{-2 pi i eta (s-t)} phase (rather than e^{-2 pi i eta s}) makes the
//! white-noise law of (V, dV) independent of t.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::window::WindowSpec;

const PI: f64 = std::f64::consts::PI;

/// Uniformly sampled complex signal.
#[derive(Debug, Clone)]
pub struct SignalGrid {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    pub t0: f64,
}

impl SignalGrid {
    pub fn new(samples: Vec<Complex64>, dt: f64, t0: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("signal has no samples".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::domain("SignalGrid", format!("dt must be positive, got {dt}")));
        }
        Ok(Self { samples, dt, t0 })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample k.
    pub fn time_at(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Nearest on-grid index of `t`; errors when `t` is off-grid.
    pub fn index_of(&self, t: f64) -> Result<i64> {
        let ft = (t - self.t0) / self.dt;
        let j = ft.round();
        if (ft - j).abs() > 1e-6 {
            return Err(Error::domain(
                "SignalGrid::index_of",
                format!("time {t} is not on the sample grid (offset {} dt)", ft - j),
            ));
        }
        Ok(j as i64)
    }
}

/// What a [`TFR`] matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfrKind {
    Stft,
    /// STFT with the derivative window h'.
    StftDerivWindow,
    Dstft,
    Reassignment,
    Integrand,
    Sst,
}

/// Complex matrix over a time x frequency grid.
#[derive(Debug, Clone)]
pub struct Tfr {
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    /// [time x freq]
    pub values: Array2<Complex64>,
    pub kind: TfrKind,
    /// Present only for reassignment: false marks cells where |V| was below
    /// threshold (the -infinity sentinel of the reassignment rule).
    pub valid: Option<Array2<bool>>,
    /// True when some window support ran past the signal and was zero-padded.
    pub padded: bool,
}

impl Tfr {
    fn same_grid(&self, other: &Tfr) -> bool {
        self.times == other.times && self.freqs == other.freqs
    }

    /// |V| matrix.
    pub fn magnitudes(&self) -> Array2<f64> {
        self.values.map(|z| z.norm())
    }

    /// Root-mean-square of |V| over all cells.
    pub fn rms(&self) -> f64 {
        let n = self.values.len().max(1);
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt()
    }
}

/// Default validity cutoff: 1e-12 times the RMS magnitude of the transform.
pub fn default_v_threshold(v: &Tfr) -> f64 {
    1e-12 * v.rms()
}

/// Parameters of the discretized SST.
#[derive(Debug, Clone)]
pub struct SstParams {
    /// Squeezing kernel bandwidth, g_alpha(z) = (pi alpha)^{-1} e^{-|z|^2/alpha}.
    pub alpha: f64,
    /// Frequency grid spacing of the eta integration grid.
    pub delta_eta: f64,
    /// Number of eta cells; the grid is eta_l = l * delta_eta, l = 1..=n.
    pub eta_count: usize,
    /// Output frequencies.
    pub xi_grid: Vec<f64>,
    /// Reassignment validity cutoff on |V|.
    pub v_threshold: f64,
}

impl SstParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::domain("SstParams", format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.delta_eta > 0.0) {
            return Err(Error::domain(
                "SstParams",
                format!("delta_eta must be > 0, got {}", self.delta_eta),
            ));
        }
        if self.eta_count == 0 || self.xi_grid.is_empty() {
            return Err(Error::EmptyInput("empty eta or xi grid".into()));
        }
        Ok(())
    }

    /// eta_l = l * delta_eta, l = 1..=eta_count.
    pub fn eta_grid(&self) -> Vec<f64> {
        (1..=self.eta_count).map(|l| l as f64 * self.delta_eta).collect()
    }
}

fn check_grids(times: &[f64], etas: &[f64]) -> Result<()> {
    if times.is_empty() || etas.is_empty() {
        return Err(Error::EmptyInput("empty time or frequency grid".into()));
    }
    Ok(())
}

/// Core windowed transform; accumulates the h-window sum and optionally the
/// h'-window sum in the same pass over the samples.
fn windowed_transform(
    signal: &SignalGrid,
    window: &WindowSpec,
    times: &[f64],
    etas: &[f64],
    with_deriv: bool,
) -> Result<(Tfr, Option<Tfr>)> {
    check_grids(times, etas)?;
    if (window.dt() - signal.dt).abs() > 1e-12 * signal.dt {
        return Err(Error::GridMismatch(format!(
            "window sampled at dt = {} but signal has dt = {}",
            window.dt(),
            signal.dt
        )));
    }
    let n = signal.len() as i64;
    let half = window.half_len() as i64;
    let dt = signal.dt;
    let mut v = Array2::<Complex64>::zeros((times.len(), etas.len()));
    let mut vd = if with_deriv {
        Some(Array2::<Complex64>::zeros((times.len(), etas.len())))
    } else {
        None
    };
    let mut padded = false;

    let h = window.h_samples();
    let dh = window.dh_samples();
    for (it, &t) in times.iter().enumerate() {
        let jt = signal.index_of(t)?;
        let lo = (jt - half).max(0);
        let hi = (jt + half).min(n - 1);
        if lo > jt - half || hi < jt + half {
            padded = true;
        }
        if lo > hi {
            continue; // window entirely outside: zero (padded) columns
        }
        let w = &signal.samples[lo as usize..=hi as usize];
        let hoff = (lo - (jt - half)) as usize;
        for (ie, &eta) in etas.iter().enumerate() {
            let step = Complex64::from_polar(1.0, -2.0 * PI * eta * dt);
            let mut phase = Complex64::from_polar(1.0, -2.0 * PI * eta * (lo - jt) as f64 * dt);
            let mut acc = Complex64::default();
            let mut acc_d = Complex64::default();
            for (k, &x) in w.iter().enumerate() {
                if k > 0 {
                    if k % 256 == 0 {
                        // re-anchor the phase recurrence
                        phase = Complex64::from_polar(
                            1.0,
                            -2.0 * PI * eta * (lo - jt + k as i64) as f64 * dt,
                        );
                    } else {
                        phase *= step;
                    }
                }
                let xw = x * phase;
                acc += xw * h[hoff + k];
                if with_deriv {
                    acc_d += xw * dh[hoff + k];
                }
            }
            v[[it, ie]] = acc * dt;
            if let Some(vd) = vd.as_mut() {
                vd[[it, ie]] = acc_d * dt;
            }
        }
    }
    let mk = |values: Array2<Complex64>, kind| Tfr {
        times: times.to_vec(),
        freqs: etas.to_vec(),
        values,
        kind,
        valid: None,
        padded,
    };
    Ok((
        mk(v, TfrKind::Stft),
        vd.map(|m| mk(m, TfrKind::StftDerivWindow)),
    ))
}

/// STFT V(t, eta) over the requested grids.
///
/// The window is truncated at its sampled half-width; requested times whose
/// window support runs past the signal are zero-padded and flagged.
pub fn stft(
    signal: &SignalGrid,
    window: &WindowSpec,
    times: &[f64],
    etas: &[f64],
) -> Result<Tfr> {
    Ok(windowed_transform(signal, window, times, etas, false)?.0)
}

/// Time-derivative STFT: dV = -V^{(h')} + 2 pi i eta V^{(h)}.
pub fn dstft(
    signal: &SignalGrid,
    window: &WindowSpec,
    times: &[f64],
    etas: &[f64],
) -> Result<Tfr> {
    Ok(stft_with_derivative(signal, window, times, etas)?.1)
}

/// V and dV in one pass over the samples.
pub fn stft_with_derivative(
    signal: &SignalGrid,
    window: &WindowSpec,
    times: &[f64],
    etas: &[f64],
) -> Result<(Tfr, Tfr)> {
    let (v, vh) = windowed_transform(signal, window, times, etas, true)?;
    let mut dv = vh.expect("derivative requested");
    for (ie, &eta) in v.freqs.iter().enumerate() {
        let rot = Complex64::new(0.0, 2.0 * PI * eta);
        for it in 0..v.times.len() {
            dv.values[[it, ie]] = -dv.values[[it, ie]] + rot * v.values[[it, ie]];
        }
    }
    dv.kind = TfrKind::Dstft;
    Ok((v, dv))
}

/// Reassignment rule Omega = dV / (2 pi i V) where |V| exceeds the
/// threshold; other cells carry the invalid marker.
pub fn reassignment(v: &Tfr, dv: &Tfr, v_threshold: f64) -> Result<Tfr> {
    if !v.same_grid(dv) {
        return Err(Error::GridMismatch("V and dV grids differ".into()));
    }
    let mut omega = Array2::<Complex64>::zeros(v.values.raw_dim());
    let mut valid = Array2::from_elem(v.values.raw_dim(), false);
    let denom = Complex64::new(0.0, 2.0 * PI);
    for ((idx, &vv), &dd) in v.values.indexed_iter().zip(dv.values.iter()) {
        if vv.norm() > v_threshold {
            omega[idx] = dd / (denom * vv);
            valid[idx] = true;
        }
    }
    Ok(Tfr {
        times: v.times.clone(),
        freqs: v.freqs.clone(),
        values: omega,
        kind: TfrKind::Reassignment,
        valid: Some(valid),
        padded: v.padded || dv.padded,
    })
}

/// Squeezing integrand Y = V (pi alpha)^{-1} e^{-|xi - Omega|^2/alpha}.
///
/// |xi - Omega| is the full complex modulus (Omega is complex under noise);
/// invalid reassignment cells contribute exactly zero.
pub fn sst_integrand(v: &Tfr, omega: &Tfr, xi: f64, alpha: f64) -> Result<Tfr> {
    if !v.same_grid(omega) {
        return Err(Error::GridMismatch("V and Omega grids differ".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain("sst_integrand", format!("alpha must be > 0, got {alpha}")));
    }
    let valid = omega
        .valid
        .as_ref()
        .ok_or_else(|| Error::GridMismatch("omega TFR lacks validity mask".into()))?;
    let norm = 1.0 / (PI * alpha);
    let mut y = Array2::<Complex64>::zeros(v.values.raw_dim());
    for (idx, &vv) in v.values.indexed_iter() {
        if valid[idx] {
            let om = omega.values[idx];
            let dre = xi - om.re;
            let d2 = dre * dre + om.im * om.im;
            y[idx] = vv * (norm * (-d2 / alpha).exp());
        }
    }
    Ok(Tfr {
        times: v.times.clone(),
        freqs: v.freqs.clone(),
        values: y,
        kind: TfrKind::Integrand,
        valid: None,
        padded: v.padded,
    })
}

/// Discretized SST: S(t, xi) = delta_eta * sum_l Y_{alpha, eta_l}(t).
///
/// Requires the eta grid of `v`/`omega` to be uniform with the spacing
/// declared in `params`.
pub fn sst(v: &Tfr, omega: &Tfr, params: &SstParams) -> Result<Tfr> {
    params.validate()?;
    if !v.same_grid(omega) {
        return Err(Error::GridMismatch("V and Omega grids differ".into()));
    }
    let etas = &v.freqs;
    if etas.len() < 2 {
        return Err(Error::GridMismatch("eta grid needs at least 2 cells".into()));
    }
    let d = params.delta_eta;
    for w in etas.windows(2) {
        if ((w[1] - w[0]) - d).abs() > 1e-9 * d {
            return Err(Error::GridMismatch(format!(
                "eta grid spacing {} does not match delta_eta {}",
                w[1] - w[0],
                d
            )));
        }
    }
    let valid = omega
        .valid
        .as_ref()
        .ok_or_else(|| Error::GridMismatch("omega TFR lacks validity mask".into()))?;
    let norm = 1.0 / (PI * params.alpha);
    let mut s = Array2::<Complex64>::zeros((v.times.len(), params.xi_grid.len()));
    for it in 0..v.times.len() {
        for (ix, &xi) in params.xi_grid.iter().enumerate() {
            let mut acc = Complex64::default();
            for ie in 0..etas.len() {
                if valid[[it, ie]] {
                    let om = omega.values[[it, ie]];
                    let dre = xi - om.re;
                    let d2 = dre * dre + om.im * om.im;
                    acc += v.values[[it, ie]] * (norm * (-d2 / params.alpha).exp());
                }
            }
            s[[it, ix]] = acc * d;
        }
    }
    Ok(Tfr {
        times: v.times.clone(),
        freqs: params.xi_grid.clone(),
        values: s,
        kind: TfrKind::Sst,
        valid: None,
        padded: v.padded || omega.padded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn tone(n: usize, fs: f64, xi0: f64, amp: f64) -> SignalGrid {
        let dt = 1.0 / fs;
        let t0 = -(n as f64 / 2.0) * dt;
        let samples = (0..n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                Complex64::from_polar(amp, 2.0 * PI * xi0 * t)
            })
            .collect();
        SignalGrid::new(samples, dt, t0).unwrap()
    }

    fn hhat(xi: f64) -> f64 {
        (-2.0 * PI * PI * xi * xi).exp()
    }

    #[test]
    fn stft_of_zero_signal_is_zero() {
        let sig = SignalGrid::new(vec![Complex64::default(); 4000], 0.005, 0.0).unwrap();
        let w = WindowSpec::gaussian(0.005, 8.0).unwrap();
        let v = stft(&sig, &w, &[10.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(v.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn stft_noiseless_tone_matches_closed_form() {
        // V(t, eta) = A e^{2 pi i xi0 t} hhat(eta - xi0), dt <= 1/(20 xi0)
        let fs = 220.0;
        let sig = tone(6000, fs, 10.0, 1.3);
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        let times = [0.0, sig.time_at(2600)];
        let etas: Vec<f64> = (0..=32).map(|i| 9.2 + 0.05 * i as f64).collect();
        let v = stft(&sig, &w, &times, &etas).unwrap();
        assert!(!v.padded);
        for (it, &t) in times.iter().enumerate() {
            for (ie, &eta) in etas.iter().enumerate() {
                let expect = Complex64::from_polar(1.3, 2.0 * PI * 10.0 * t) * hhat(eta - 10.0);
                let err = (v.values[[it, ie]] - expect).norm() / expect.norm();
                assert!(err < 1e-6, "rel err {err} at t={t} eta={eta}");
            }
        }
    }

    #[test]
    fn stft_linearity_and_two_tones() {
        let fs = 142.02;
        let a = tone(4000, fs, 5.0, 1.0);
        let b = tone(4000, fs, 9.0, 0.7);
        let both = SignalGrid::new(
            a.samples
                .iter()
                .zip(&b.samples)
                .map(|(x, y)| 2.0 * x + 0.5 * y)
                .collect(),
            a.dt,
            a.t0,
        )
        .unwrap();
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        let times = [0.0];
        let etas: Vec<f64> = (0..=60).map(|i| 4.0 + 0.1 * i as f64).collect();
        let va = stft(&a, &w, &times, &etas).unwrap();
        let vb = stft(&b, &w, &times, &etas).unwrap();
        let vboth = stft(&both, &w, &times, &etas).unwrap();
        let scale = vboth.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for ie in 0..etas.len() {
            let lin = 2.0 * va.values[[0, ie]] + 0.5 * vb.values[[0, ie]];
            assert!((vboth.values[[0, ie]] - lin).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn stft_time_covariance() {
        // shifting the signal by k samples shifts the transform in t
        let fs = 142.02;
        let sig = tone(4000, fs, 7.0, 1.0);
        let shifted = SignalGrid::new(sig.samples.clone(), sig.dt, sig.t0 + 25.0 * sig.dt).unwrap();
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        let etas = [6.5, 7.0, 7.5];
        let t = sig.time_at(2000);
        let v = stft(&sig, &w, &[t], &etas).unwrap();
        let vs = stft(&shifted, &w, &[t + 25.0 * sig.dt], &etas).unwrap();
        for ie in 0..etas.len() {
            assert!((v.values[[0, ie]] - vs.values[[0, ie]]).norm() < 1e-12);
        }
    }

    #[test]
    fn stft_flags_padding() {
        let fs = 142.02;
        let sig = tone(1419, fs, 10.0, 1.0);
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        // midpoint of a 10 s segment: +-8 s support exceeds the segment
        let v = stft(&sig, &w, &[sig.time_at(709)], &[10.0]).unwrap();
        assert!(v.padded);
    }

    #[test]
    fn stft_rejects_off_grid_time() {
        let fs = 142.02;
        let sig = tone(1000, fs, 10.0, 1.0);
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        assert!(stft(&sig, &w, &[sig.time_at(10) + 0.3 * sig.dt], &[1.0]).is_err());
    }

    #[test]
    fn stft_rejects_empty_grids() {
        let sig = tone(1000, 142.02, 10.0, 1.0);
        let w = WindowSpec::gaussian(sig.dt, 8.0).unwrap();
        assert!(stft(&sig, &w, &[], &[1.0]).is_err());
        assert!(stft(&sig, &w, &[0.0], &[]).is_err());
    }

    #[test]
    fn dstft_tone_derivative_relation() {
        // f' = 2 pi i xi0 f, so dV = 2 pi i xi0 V for a noiseless tone
        let fs = 142.02;
        let sig = tone(8192, fs, 10.0, 1.0);
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        let etas: Vec<f64> = (0..=16).map(|i| 9.2 + 0.1 * i as f64).collect();
        let (v, dv) = stft_with_derivative(&sig, &w, &[0.0], &etas).unwrap();
        for ie in 0..etas.len() {
            let expect = Complex64::new(0.0, 2.0 * PI * 10.0) * v.values[[0, ie]];
            assert!(
                (dv.values[[0, ie]] - expect).norm() <= 1e-8 * expect.norm(),
                "derivative relation off at eta={}",
                etas[ie]
            );
        }
    }

    #[test]
    fn dstft_zero_signal_is_zero() {
        let sig = SignalGrid::new(vec![Complex64::default(); 3000], 0.007, 0.0).unwrap();
        let w = WindowSpec::gaussian(0.007, 8.0).unwrap();
        let dv = dstft(&sig, &w, &[sig.time_at(1500)], &[2.0]).unwrap();
        assert!(dv.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn dstft_matches_central_difference_oracle() {
        let fs = 142.02;
        let sig = tone(8192, fs, 10.0, 1.0);
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        let etas = [9.6, 10.0, 10.4];
        let t = 0.0;
        let d = sig.dt;
        let dv = dstft(&sig, &w, &[t], &etas).unwrap();
        let vm = stft(&sig, &w, &[t - d], &etas).unwrap();
        let vp = stft(&sig, &w, &[t + d], &etas).unwrap();
        // O(delta^2) truncation: (2 pi xi0 d)^2/6 relative, doubled for slack
        let tol = (2.0 * PI * 10.0 * d).powi(2) / 3.0;
        for ie in 0..etas.len() {
            let fd = (vp.values[[0, ie]] - vm.values[[0, ie]]) / Complex64::new(2.0 * d, 0.0);
            let err = (dv.values[[0, ie]] - fd).norm() / dv.values[[0, ie]].norm();
            assert!(err < tol, "central difference err {err} > {tol}");
        }
    }

    #[test]
    fn reassignment_exact_on_noiseless_tone() {
        let fs = 142.02;
        let sig = tone(8192, fs, 10.0, 1.0);
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        let etas: Vec<f64> = (0..=160).map(|i| 9.2 + 0.01 * i as f64).collect();
        let (v, dv) = stft_with_derivative(&sig, &w, &[0.0], &etas).unwrap();
        let max_v = v.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let om = reassignment(&v, &dv, 1e-6 * max_v).unwrap();
        let valid = om.valid.as_ref().unwrap();
        let mut worst = 0.0f64;
        for ie in 0..etas.len() {
            if valid[[0, ie]] {
                worst = worst.max((om.values[[0, ie]] - Complex64::new(10.0, 0.0)).norm());
            }
        }
        assert!(worst <= 1e-8, "max |Omega - xi0| = {worst}");
    }

    #[test]
    fn reassignment_under_noise_centers_on_eta() {
        // median of Re Omega over noise draws stays within 0.05 of eta = 2
        let fs = 142.02;
        let dt = 1.0 / fs;
        let w = WindowSpec::gaussian(dt, 8.0).unwrap();
        let n = 2 * w.half_len() + 1;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let t_mid = 0.0;
        let t0 = -(w.half_len() as f64) * dt;
        let scale = 1.0 / dt.sqrt();
        let mut med = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            let samples: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0) * scale)
                .collect();
            let sig = SignalGrid::new(samples, dt, t0).unwrap();
            let (v, dv) = stft_with_derivative(&sig, &w, &[t_mid], &[2.0]).unwrap();
            let om = reassignment(&v, &dv, 0.0).unwrap();
            if om.valid.as_ref().unwrap()[[0, 0]] {
                med.push(om.values[[0, 0]].re);
            }
        }
        med.sort_by(f64::total_cmp);
        let median = med[med.len() / 2];
        assert!((median - 2.0).abs() < 0.05, "median Re Omega = {median}");
    }

    #[test]
    fn reassignment_below_threshold_is_invalid() {
        let sig = SignalGrid::new(vec![Complex64::default(); 3000], 0.007, 0.0).unwrap();
        let w = WindowSpec::gaussian(0.007, 8.0).unwrap();
        let (v, dv) = stft_with_derivative(&sig, &w, &[sig.time_at(1500)], &[1.0, 2.0]).unwrap();
        let om = reassignment(&v, &dv, 1e-12).unwrap();
        assert!(om.valid.as_ref().unwrap().iter().all(|&b| !b));
    }

    #[test]
    fn reassignment_rejects_grid_mismatch() {
        let sig = tone(3000, 142.02, 5.0, 1.0);
        let w = WindowSpec::gaussian(sig.dt, 8.0).unwrap();
        let (v, dv) = stft_with_derivative(&sig, &w, &[0.0], &[4.0, 5.0]).unwrap();
        let v2 = stft(&sig, &w, &[0.0], &[4.0, 6.0]).unwrap();
        assert!(reassignment(&v2, &dv, 0.0).is_err());
        let _ = v;
    }

    fn synthetic_pair(om_val: Complex64, v_val: Complex64) -> (Tfr, Tfr) {
        let values = Array2::from_elem((1, 1), v_val);
        let v = Tfr {
            times: vec![0.0],
            freqs: vec![1.0],
            values,
            kind: TfrKind::Stft,
            valid: None,
            padded: false,
        };
        let om = Tfr {
            times: vec![0.0],
            freqs: vec![1.0],
            values: Array2::from_elem((1, 1), om_val),
            kind: TfrKind::Reassignment,
            valid: Some(Array2::from_elem((1, 1), true)),
            padded: false,
        };
        (v, om)
    }

    #[test]
    fn integrand_kernel_peak_and_scale() {
        let alpha = 0.37;
        // Omega = xi exactly, V = 1: Y = 1/(pi alpha)
        let (v, om) = synthetic_pair(Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0));
        let y = sst_integrand(&v, &om, 2.0, alpha).unwrap();
        assert_relative_eq!(y.values[[0, 0]].re, 1.0 / (PI * alpha), max_relative = 1e-14);
        // |xi - Omega|^2 = alpha: Y = V/(pi alpha e)
        let (v, om) = synthetic_pair(
            Complex64::new(2.0 + alpha.sqrt(), 0.0),
            Complex64::new(0.0, 0.7),
        );
        let y = sst_integrand(&v, &om, 2.0, alpha).unwrap();
        let expect = Complex64::new(0.0, 0.7) / (PI * alpha * std::f64::consts::E);
        assert!((y.values[[0, 0]] - expect).norm() < 1e-14);
        // complex modulus: purely imaginary offset of sqrt(alpha) must give
        // the same attenuation
        let (v, om) = synthetic_pair(
            Complex64::new(2.0, alpha.sqrt()),
            Complex64::new(1.0, 0.0),
        );
        let y = sst_integrand(&v, &om, 2.0, alpha).unwrap();
        assert_relative_eq!(
            y.values[[0, 0]].re,
            1.0 / (PI * alpha * std::f64::consts::E),
            max_relative = 1e-14
        );
    }

    #[test]
    fn sst_zero_signal_is_zero() {
        let sig = SignalGrid::new(vec![Complex64::default(); 4000], 0.007, -14.0).unwrap();
        let w = WindowSpec::gaussian(0.007, 8.0).unwrap();
        let params = SstParams {
            alpha: 0.4,
            delta_eta: 0.05,
            eta_count: 200,
            xi_grid: vec![2.0, 5.0],
            v_threshold: 1e-12,
        };
        let etas = params.eta_grid();
        let (v, dv) = stft_with_derivative(&sig, &w, &[0.0], &etas).unwrap();
        let om = reassignment(&v, &dv, params.v_threshold).unwrap();
        let s = sst(&v, &om, &params).unwrap();
        assert!(s.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn sst_noiseless_tone_at_tone_frequency() {
        // With Omega = xi0 on every valid cell the kernel is 1, so
        // S(0, xi0) = (A/(pi alpha)) * delta_eta * sum hhat(eta_l - xi0),
        // which approaches (A/(pi alpha)) int hhat = A/((pi alpha) sqrt(2 pi)).
        let fs = 142.02;
        let amp = 1.0;
        let sig = tone(8192, fs, 10.0, amp);
        let w = WindowSpec::gaussian(1.0 / fs, 8.0).unwrap();
        let alpha = 0.4;
        let delta_eta = 0.02;
        let params = SstParams {
            alpha,
            delta_eta,
            eta_count: 700, // eta in (0, 14]
            xi_grid: vec![10.0, 10.0 + 3.0 * alpha.sqrt()],
            v_threshold: 0.0,
        };
        let etas = params.eta_grid();
        let (v, dv) = stft_with_derivative(&sig, &w, &[0.0], &etas).unwrap();
        let om = reassignment(&v, &dv, default_v_threshold(&v)).unwrap();
        let s = sst(&v, &om, &params).unwrap();
        // independent Riemann oracle
        let riemann: f64 = etas.iter().map(|&e| hhat(e - 10.0)).sum::<f64>() * delta_eta;
        let expect = amp * riemann / (PI * alpha);
        assert_relative_eq!(s.values[[0, 0]].re, expect, max_relative = 1e-6);
        assert!(s.values[[0, 0]].im.abs() < 1e-8 * expect);
        // and the Riemann sum itself approaches int hhat = 1/sqrt(2 pi)
        assert_relative_eq!(riemann, 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-6);
        // kernel decay away from the tone: S(xi) = e^{-(xi-xi0)^2/alpha} S(xi0)
        let decay = s.values[[0, 1]].norm() / s.values[[0, 0]].norm();
        assert_relative_eq!(decay, (-9.0f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn sst_rejects_nonuniform_eta_grid() {
        let sig = tone(3000, 142.02, 5.0, 1.0);
        let w = WindowSpec::gaussian(sig.dt, 8.0).unwrap();
        let etas = [1.0, 2.0, 4.0];
        let (v, dv) = stft_with_derivative(&sig, &w, &[0.0], &etas).unwrap();
        let om = reassignment(&v, &dv, 0.0).unwrap();
        let params = SstParams {
            alpha: 0.4,
            delta_eta: 1.0,
            eta_count: 3,
            xi_grid: vec![2.0],
            v_threshold: 0.0,
        };
        assert!(sst(&v, &om, &params).is_err());
    }
}
