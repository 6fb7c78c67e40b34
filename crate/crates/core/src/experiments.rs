//! Seeded Monte Carlo experiments at the scale of the simulation study:
//! QQ normality of the discretized SST, its moment and variance scaling,
//! and covariance decay across frequency.
//!
//! Discrete white-noise convention: the synthesized noise is real Gaussian
//! with per-sample standard deviation 1/sqrt(dt), so Riemann-sum STFT
//! second-order statistics converge to the continuum white-noise closed
//! forms (per-sample covariance delta_{jk}/dt and pseudocovariance equal to
//! covariance, i.e. maximally improper). Detection experiments override the
//! scale to match the plain unit-variance convention of the simulation
//! protocol.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sst::{self, SignalGrid, SstParams};
use crate::stats;
use crate::window::WindowSpec;

const PI: f64 = std::f64::consts::PI;

/// Parameter schedule of the discretized-SST normal limit:
/// delta_eta = n^{-1/2+beta}, M = sqrt(4 beta ln n), alpha = n^{-2 beta}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltSchedule {
    pub delta_eta: f64,
    pub m: f64,
    pub alpha: f64,
}

pub fn clt_schedule(n: usize, beta: f64) -> Result<CltSchedule> {
    if n < 16 {
        return Err(Error::domain("clt_schedule", format!("n must be >= 16, got {n}")));
    }
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::domain(
            "clt_schedule",
            format!("beta must lie in (0, 1/2), got {beta}"),
        ));
    }
    let nf = n as f64;
    Ok(CltSchedule {
        delta_eta: nf.powf(-0.5 + beta),
        m: (4.0 * beta * nf.ln()).sqrt(),
        alpha: nf.powf(-2.0 * beta),
    })
}

/// A fully serialized description of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Tone amplitude A (0 = null case).
    pub amplitude: f64,
    /// Tone frequency in Hz.
    pub xi0: f64,
    pub alpha_list: Vec<f64>,
    pub xi_list: Vec<f64>,
    pub n_realizations: usize,
    /// Schedule exponent in (0, 1/2).
    pub beta: f64,
    /// Moment order of the schedule validity condition
    /// beta > 1/(2(1+delta)); derived from beta when absent.
    #[serde(default)]
    pub delta: Option<f64>,
    pub sample_rate: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Per-sample noise standard deviation; defaults to 1/sqrt(dt)
    /// (continuum calibration).
    #[serde(default)]
    pub noise_std: Option<f64>,
}

impl ExperimentConfig {
    /// The simulation-study defaults: 142.02 Hz, 8192 samples, beta 0.05,
    /// tone at 10 Hz.
    pub fn study_defaults() -> Self {
        Self {
            amplitude: 0.0,
            xi0: 10.0,
            alpha_list: vec![0.02, 0.1, 0.4, 0.8, 1.5],
            xi_list: vec![0.0, 5.0, 10.0, 15.0],
            n_realizations: 1000,
            beta: 0.05,
            delta: None,
            sample_rate: 142.02,
            n_samples: 8192,
            seed: 0,
            noise_std: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) {
            return Err(Error::domain("ExperimentConfig", "amplitude must be >= 0"));
        }
        if !(self.sample_rate > 0.0) || self.n_samples < 16 {
            return Err(Error::domain(
                "ExperimentConfig",
                "need sample_rate > 0 and n_samples >= 16",
            ));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::domain("ExperimentConfig", "beta must lie in (0, 1/2)"));
        }
        // a delta > 2 with beta > 1/(2(1+delta)) must exist; when given
        // explicitly it must satisfy both.
        let delta = self.delta.unwrap_or_else(|| self.implied_delta());
        if !(delta > 2.0) || self.beta <= 1.0 / (2.0 * (1.0 + delta)) {
            return Err(Error::domain(
                "ExperimentConfig",
                format!(
                    "schedule needs delta > 2 with beta > 1/(2(1+delta)); got beta={}, delta={delta}",
                    self.beta
                ),
            ));
        }
        if self.alpha_list.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::domain("ExperimentConfig", "alphas must be > 0"));
        }
        if self.n_realizations == 0 {
            return Err(Error::EmptyInput("n_realizations must be >= 1".into()));
        }
        Ok(())
    }

    /// Smallest comfortable moment order compatible with beta.
    fn implied_delta(&self) -> f64 {
        (0.5 / self.beta - 1.0).max(2.0) + 0.5
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Per-sample noise standard deviation (continuum calibration default).
    pub fn noise_std(&self) -> f64 {
        self.noise_std.unwrap_or_else(|| 1.0 / self.dt().sqrt())
    }

    pub fn schedule(&self) -> Result<CltSchedule> {
        clt_schedule(self.n_samples, self.beta)
    }

    /// RNG stream for one replicate: one seed, one counter-indexed stream.
    pub fn stream(&self, replicate: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate);
        rng
    }

    /// Synthesize A e^{2 pi i xi0 t} plus real white noise on a grid
    /// centered so the evaluation time t = 0 is the middle sample.
    pub fn synthesize(&self, rng: &mut impl Rng) -> SignalGrid {
        let dt = self.dt();
        let n = self.n_samples;
        let t0 = -((n / 2) as f64) * dt;
        let std = self.noise_std();
        let samples = (0..n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                Complex64::from_polar(self.amplitude, 2.0 * PI * self.xi0 * t)
                    + Complex64::new(std * rng.sample::<f64, _>(StandardNormal), 0.0)
            })
            .collect();
        SignalGrid { samples, dt, t0 }
    }
}

/// Monte Carlo sample of S(0, xi) for one (alpha, xi), with fitted
/// complex-normal parameters and QQ data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSummary {
    pub alpha: f64,
    pub xi: f64,
    pub samples: Vec<Complex64>,
    pub mean: Complex64,
    /// nu-hat = mean |s - mean|^2.
    pub variance: f64,
    /// wp-hat = mean (s - mean)^2.
    pub pseudo_variance: Complex64,
    /// (sorted standardized Re S, normal quantile) pairs.
    pub normal_qq: Vec<(f64, f64)>,
    /// QQ correlation coefficient of Re S.
    pub qq_corr: f64,
    /// KS distance of standardized Re/Im parts against the normal.
    pub fit_stat: f64,
    /// True when the sample cannot support a variance estimate.
    pub degenerate: bool,
}

fn summarize(alpha: f64, xi: f64, samples: Vec<Complex64>) -> SampleSummary {
    let mean = stats::mean(&samples);
    let (variance, pseudo_variance) = stats::complex_variance(&samples);
    let degenerate = samples.len() < 2 || variance == 0.0;
    let re: Vec<f64> = samples.iter().map(|s| s.re).collect();
    let im: Vec<f64> = samples.iter().map(|s| s.im).collect();
    let (normal_qq, qq_corr, fit_stat) = if degenerate {
        (Vec::new(), f64::NAN, f64::NAN)
    } else {
        (
            stats::normal_qq_pairs(&re),
            stats::qq_correlation(&re),
            stats::ks_normal(&re).max(stats::ks_normal(&im)),
        )
    };
    SampleSummary {
        alpha,
        xi,
        samples,
        mean,
        variance,
        pseudo_variance,
        normal_qq,
        qq_corr,
        fit_stat,
        degenerate,
    }
}

/// Monte Carlo of the discretized SST at t = 0 for every (alpha, xi) combo,
/// sharing the per-realization transforms across combos. Replicates run in
/// parallel on deterministic per-replicate streams.
pub fn run_sst_monte_carlo(
    cfg: &ExperimentConfig,
    combos: &[(f64, f64)],
) -> Result<Vec<Vec<Complex64>>> {
    cfg.validate()?;
    let sched = cfg.schedule()?;
    let window = WindowSpec::gaussian(cfg.dt(), 8.0)?;
    let mut alphas: Vec<f64> = combos.iter().map(|c| c.0).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let per_rep: Vec<Vec<Complex64>> = (0..cfg.n_realizations as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Complex64>> {
            let mut rng = cfg.stream(rep);
            let signal = cfg.synthesize(&mut rng);
            let t_eval = signal.time_at(cfg.n_samples / 2);
            let etas: Vec<f64> = (1..=cfg.n_samples)
                .map(|l| l as f64 * sched.delta_eta)
                .collect();
            let (v, dv) = sst::stft_with_derivative(&signal, &window, &[t_eval], &etas)?;
            let omega = sst::reassignment(&v, &dv, sst::default_v_threshold(&v))?;
            let mut out = vec![Complex64::default(); combos.len()];
            for &alpha in &alphas {
                let xi_grid: Vec<f64> = combos
                    .iter()
                    .filter(|c| c.0 == alpha)
                    .map(|c| c.1)
                    .collect();
                let params = SstParams {
                    alpha,
                    delta_eta: sched.delta_eta,
                    eta_count: cfg.n_samples,
                    xi_grid,
                    v_threshold: 0.0,
                };
                let s = sst::sst(&v, &omega, &params)?;
                let mut k = 0;
                for (ci, combo) in combos.iter().enumerate() {
                    if combo.0 == alpha {
                        out[ci] = s.values[[0, k]];
                        k += 1;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_combo = vec![Vec::with_capacity(cfg.n_realizations); combos.len()];
    for rep in per_rep {
        for (ci, s) in rep.into_iter().enumerate() {
            by_combo[ci].push(s);
        }
    }
    Ok(by_combo)
}

/// Monte Carlo summary of S(0, xi) for a single (alpha, xi).
pub fn simulate_sst_samples(
    cfg: &ExperimentConfig,
    alpha: f64,
    xi: f64,
) -> Result<SampleSummary> {
    let samples = run_sst_monte_carlo(cfg, &[(alpha, xi)])?.pop().unwrap();
    Ok(summarize(alpha, xi, samples))
}

/// Full (alpha, xi) grid of summaries.
pub fn qq_experiment(cfg: &ExperimentConfig) -> Result<Vec<SampleSummary>> {
    let combos: Vec<(f64, f64)> = cfg
        .alpha_list
        .iter()
        .flat_map(|&a| cfg.xi_list.iter().map(move |&x| (a, x)))
        .collect();
    let sampled = run_sst_monte_carlo(cfg, &combos)?;
    Ok(combos
        .into_iter()
        .zip(sampled)
        .map(|((a, x), s)| summarize(a, x, s))
        .collect())
}

/// One row of the covariance-decay table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovDecayRow {
    pub eta: f64,
    pub eta2: f64,
    pub gap: f64,
    /// |Corr(V_eta, V_eta2)|
    pub corr_v: f64,
    /// |Corr(Y_eta, Y_eta2)| at xi = (eta + eta2)/2
    pub corr_y: f64,
}

/// Monte Carlo frequency-decorrelation measurement. The squeezing
/// integrand uses xi at the midpoint of each pair.
pub fn covariance_decay_experiment(
    cfg: &ExperimentConfig,
    window: &WindowSpec,
    eta_pairs: &[(f64, f64)],
    alpha: f64,
) -> Result<Vec<CovDecayRow>> {
    cfg.validate()?;
    if eta_pairs.is_empty() {
        return Err(Error::EmptyInput("no eta pairs".into()));
    }
    let per_rep: Vec<Vec<(Complex64, Complex64, Complex64, Complex64)>> =
        (0..cfg.n_realizations as u64)
            .into_par_iter()
            .map(|rep| -> Result<Vec<_>> {
                let mut rng = cfg.stream(rep);
                let signal = cfg.synthesize(&mut rng);
                let t_eval = signal.time_at(cfg.n_samples / 2);
                let mut out = Vec::with_capacity(eta_pairs.len());
                for &(ea, eb) in eta_pairs {
                    let etas = [ea, eb];
                    let (v, dv) =
                        sst::stft_with_derivative(&signal, window, &[t_eval], &etas)?;
                    let omega = sst::reassignment(&v, &dv, 0.0)?;
                    let xi = 0.5 * (ea + eb);
                    let y = sst::sst_integrand(&v, &omega, xi, alpha)?;
                    out.push((
                        v.values[[0, 0]],
                        v.values[[0, 1]],
                        y.values[[0, 0]],
                        y.values[[0, 1]],
                    ));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;

    let mut cols: Vec<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> =
        eta_pairs.iter().map(|_| Default::default()).collect();
    for rep in per_rep {
        for (i, (va, vb, ya, yb)) in rep.into_iter().enumerate() {
            cols[i].0.push(va);
            cols[i].1.push(vb);
            cols[i].2.push(ya);
            cols[i].3.push(yb);
        }
    }
    Ok(eta_pairs
        .iter()
        .zip(cols)
        .map(|(&(ea, eb), (va, vb, ya, yb))| CovDecayRow {
            eta: ea,
            eta2: eb,
            gap: (eb - ea).abs(),
            corr_v: stats::complex_corr(&va, &vb),
            corr_y: stats::complex_corr(&ya, &yb),
        })
        .collect())
}

/// Complex-normal fit (variance, pseudo-variance, KS fit statistic) of a
/// sample; at least 30 samples.
pub fn fit_complex_normal(samples: &[Complex64]) -> Result<(f64, Complex64, f64)> {
    stats::fit_complex_normal(samples)
}
