//! Oscillatory-signal detection: segmentation, overlapping moving-block
//! bootstrap, per-grid-point variance/pseudovariance estimation, and a
//! max-statistic threshold.
//!
//! Per segment: the signal is resampled by the moving-block bootstrap and
//! pushed through the SST on a coarse time-frequency grid chosen so values
//! at distinct grid points are approximately independent. The bootstrap
//! distribution at each grid point yields (nu, wp) estimates of the
//! limiting complex normal; the null law of max |S| over the grid is then
//! drawn parametrically from independent C N(0, nu, wp) variables, and the
//! null is rejected when the observed max exceeds its level-(1-a) quantile.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::experiments::clt_schedule;
use crate::sst::SignalGrid;
use crate::stats;
use crate::window::WindowSpec;

const PI: f64 = std::f64::consts::PI;

/// |I|^{1/3} rounded: the standard moving-block length for a segment of
/// |I| samples.
pub fn default_block_len(segment_len: usize) -> Result<usize> {
    if segment_len < 8 {
        return Err(Error::domain(
            "default_block_len",
            format!("segment must have >= 8 samples, got {segment_len}"),
        ));
    }
    Ok((segment_len as f64).cbrt().round() as usize)
}

/// Moving-block bootstrap: ceil(len/block_len) uniformly chosen overlapping
/// blocks, concatenated and truncated to the segment length.
pub fn block_bootstrap_resample<R: Rng + ?Sized>(
    segment: &SignalGrid,
    block_len: usize,
    rng: &mut R,
) -> Result<SignalGrid> {
    let n = segment.len();
    if block_len == 0 || block_len > n {
        return Err(Error::domain(
            "block_bootstrap_resample",
            format!("block_len {block_len} invalid for segment of {n} samples"),
        ));
    }
    let mut samples = Vec::with_capacity(n);
    let n_starts = n - block_len + 1;
    while samples.len() < n {
        let start = rng.gen_range(0..n_starts);
        let take = block_len.min(n - samples.len());
        samples.extend_from_slice(&segment.samples[start..start + take]);
    }
    Ok(SignalGrid { samples, dt: segment.dt, t0: segment.t0 })
}

/// Detection test configuration. Defaults follow the simulation protocol:
/// segments of 1419 samples, block length 11, one time point per segment
/// (the midpoint), a 2.5 Hz frequency grid, level 0.05.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub segment_len: usize,
    /// Moving-block length; segment_len^{1/3} rounded when absent.
    #[serde(default)]
    pub block_len: Option<usize>,
    /// Per-segment sample offsets of the time grid; midpoint when empty.
    #[serde(default)]
    pub time_offsets: Vec<usize>,
    pub freq_step: f64,
    pub freq_min: f64,
    pub freq_max: f64,
    pub n_bootstrap: usize,
    /// Significance level of the test.
    pub level: f64,
    /// SST bandwidth; the n = 8192, beta = 0.05 schedule value when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Top of the eta integration grid; freq_max + 10 Hz when absent.
    #[serde(default)]
    pub eta_max: Option<f64>,
    /// Draws used for the null max-statistic quantile.
    #[serde(default = "default_max_draws")]
    pub n_max_draws: usize,
    /// Use the empirical bootstrap-max quantile instead of parametric
    /// complex-normal draws (sensitivity alternative).
    #[serde(default)]
    pub empirical_max: bool,
    pub seed: u64,
}

fn default_max_draws() -> usize {
    10_000
}

impl DetectionConfig {
    pub fn study_defaults() -> Self {
        Self {
            segment_len: 1419,
            block_len: None,
            time_offsets: Vec::new(),
            freq_step: 2.5,
            freq_min: 2.5,
            freq_max: 50.0,
            n_bootstrap: 1000,
            level: 0.05,
            alpha: None,
            eta_max: None,
            n_max_draws: default_max_draws(),
            empirical_max: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segment_len < 8 {
            return Err(Error::domain("DetectionConfig", "segment_len must be >= 8"));
        }
        if let Some(b) = self.block_len {
            if b == 0 || b > self.segment_len {
                return Err(Error::domain("DetectionConfig", "block_len out of range"));
            }
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::domain("DetectionConfig", "level must lie in (0, 1)"));
        }
        if !(self.freq_step > 0.0) || self.freq_max < self.freq_min {
            return Err(Error::domain("DetectionConfig", "bad frequency grid"));
        }
        if self.n_bootstrap < 2 || self.n_max_draws < 100 {
            return Err(Error::domain(
                "DetectionConfig",
                "need n_bootstrap >= 2 and n_max_draws >= 100",
            ));
        }
        if self.time_offsets.iter().any(|&o| o >= self.segment_len) {
            return Err(Error::domain("DetectionConfig", "time offset outside segment"));
        }
        Ok(())
    }

    pub fn block_len(&self) -> Result<usize> {
        match self.block_len {
            Some(b) => Ok(b),
            None => default_block_len(self.segment_len),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
            .unwrap_or_else(|| clt_schedule(8192, 0.05).expect("valid schedule").alpha)
    }

    pub fn time_offsets(&self) -> Vec<usize> {
        if self.time_offsets.is_empty() {
            vec![self.segment_len / 2]
        } else {
            self.time_offsets.clone()
        }
    }

    pub fn xi_grid(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let f = self.freq_min + k as f64 * self.freq_step;
            if f > self.freq_max + 1e-9 {
                break;
            }
            out.push(f);
            k += 1;
        }
        out
    }
}

/// Statistics of one detection grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPointStat {
    pub time_offset: usize,
    pub xi: f64,
    /// Bootstrap variance estimate.
    pub nu: f64,
    /// Bootstrap pseudovariance estimate.
    pub wp: Complex64,
    /// |S| of the original signal at this point.
    pub observed: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentReport {
    pub start_index: usize,
    pub grid_stats: Vec<GridPointStat>,
    /// Level-(1-a) quantile of the null max statistic.
    pub threshold: f64,
    pub observed_max: f64,
    pub reject: bool,
    /// True when the segment could not support the test (degenerate
    /// bootstrap variance) and was excluded.
    pub skipped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub per_segment: Vec<SegmentReport>,
    pub overall_reject: bool,
}

/// Fixed-plan SST evaluator on one segment geometry: windowed FFT onto the
/// eta grid l fs/nfft, reassignment, squeeze onto the xi grid. Results are
/// identical to the stft/reassignment/sst chain on the same grids.
pub struct SstGridEvaluator {
    dt: f64,
    seg_len: usize,
    t_offsets: Vec<usize>,
    xis: Vec<f64>,
    alpha: f64,
    nfft: usize,
    l_max: usize,
    delta_eta: f64,
    h: Vec<f64>,
    dh: Vec<f64>,
    half: usize,
    fft: Arc<dyn Fft<f64>>,
}

pub struct EvalScratch {
    wh: Vec<Complex64>,
    whp: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
}

impl SstGridEvaluator {
    pub fn new(
        seg_len: usize,
        sample_rate: f64,
        window: &WindowSpec,
        t_offsets: Vec<usize>,
        xis: Vec<f64>,
        alpha: f64,
        eta_max: f64,
    ) -> Result<Self> {
        if xis.is_empty() || t_offsets.is_empty() {
            return Err(Error::EmptyInput("empty detection grid".into()));
        }
        let half = window.half_len();
        let span = seg_len.min(2 * half + 1);
        let nfft = span.next_power_of_two();
        let delta_eta = sample_rate / nfft as f64;
        let l_max = (eta_max / delta_eta).floor() as usize;
        if l_max < 2 || l_max > nfft / 2 {
            return Err(Error::domain(
                "SstGridEvaluator",
                format!("eta_max {eta_max} gives {l_max} eta cells on nfft {nfft}"),
            ));
        }
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        Ok(Self {
            dt: 1.0 / sample_rate,
            seg_len,
            t_offsets,
            xis,
            alpha,
            nfft,
            l_max,
            delta_eta,
            h: window.h_samples().to_vec(),
            dh: window.dh_samples().to_vec(),
            half,
            fft,
        })
    }

    pub fn scratch(&self) -> EvalScratch {
        EvalScratch {
            wh: vec![Complex64::default(); self.nfft],
            whp: vec![Complex64::default(); self.nfft],
            fft_scratch: vec![Complex64::default(); self.fft.get_inplace_scratch_len()],
        }
    }

    pub fn delta_eta(&self) -> f64 {
        self.delta_eta
    }

    pub fn eta_grid(&self) -> Vec<f64> {
        (1..=self.l_max).map(|l| l as f64 * self.delta_eta).collect()
    }

    pub fn xis(&self) -> &[f64] {
        &self.xis
    }

    pub fn n_grid_points(&self) -> usize {
        self.t_offsets.len() * self.xis.len()
    }

    /// S at every (time offset, xi) grid point, row-major over offsets.
    pub fn eval(&self, samples: &[Complex64], scratch: &mut EvalScratch) -> Result<Vec<Complex64>> {
        if samples.len() != self.seg_len {
            return Err(Error::GridMismatch(format!(
                "segment has {} samples, evaluator planned for {}",
                samples.len(),
                self.seg_len
            )));
        }
        let mut out = Vec::with_capacity(self.n_grid_points());
        for &t in &self.t_offsets {
            let lo = t.saturating_sub(self.half);
            let hi = (t + self.half).min(self.seg_len - 1);
            scratch.wh.fill(Complex64::default());
            scratch.whp.fill(Complex64::default());
            for j in lo..=hi {
                let k = j + self.half - t; // window sample index
                let slot = (j + self.nfft - t % self.nfft) % self.nfft;
                scratch.wh[slot] = samples[j] * self.h[k];
                scratch.whp[slot] = samples[j] * self.dh[k];
            }
            self.fft
                .process_with_scratch(&mut scratch.wh, &mut scratch.fft_scratch);
            self.fft
                .process_with_scratch(&mut scratch.whp, &mut scratch.fft_scratch);

            // reassign and squeeze
            let mut rms = 0.0;
            for l in 1..=self.l_max {
                rms += scratch.wh[l].norm_sqr();
            }
            let thr = 1e-12 * (rms * self.dt * self.dt / self.l_max as f64).sqrt();
            let norm = 1.0 / (PI * self.alpha);
            let mut s = vec![Complex64::default(); self.xis.len()];
            let xi0 = self.xis[0];
            let xi_step = if self.xis.len() > 1 {
                self.xis[1] - self.xis[0]
            } else {
                f64::INFINITY
            };
            // exp(-u) is exactly +0 past u = 745.2; cells and xi columns
            // beyond that radius contribute nothing and are skipped.
            let max_arg = 745.2 * self.alpha;
            for l in 1..=self.l_max {
                let v = scratch.wh[l] * self.dt;
                if v.norm() <= thr {
                    continue;
                }
                let eta = l as f64 * self.delta_eta;
                let vp = scratch.whp[l] * self.dt;
                let dv = -vp + Complex64::new(0.0, 2.0 * PI * eta) * v;
                let om = dv / (Complex64::new(0.0, 2.0 * PI) * v);
                let im2 = om.im * om.im;
                if im2 >= max_arg {
                    continue;
                }
                let r = (max_arg - im2).sqrt();
                let (i0, i1) = if xi_step.is_finite() {
                    let lo = ((om.re - r - xi0) / xi_step).ceil().max(0.0) as usize;
                    let hi = ((om.re + r - xi0) / xi_step).floor();
                    if hi < 0.0 {
                        continue;
                    }
                    (lo, (hi as usize).min(self.xis.len() - 1))
                } else {
                    (0, 0)
                };
                for (i, item) in s.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                    let d = self.xis[i] - om.re;
                    *item += v * (norm * (-(d * d + im2) / self.alpha).exp());
                }
            }
            for item in &mut s {
                out.push(*item * self.delta_eta);
            }
        }
        Ok(out)
    }
}

/// Level-(1-level) quantile of max_g |Z_g| over independent
/// Z_g ~ C N(0, nu_g, wp_g). Indefinite (nu, wp) estimates from Monte
/// Carlo noise are projected to the nearest valid covariance.
pub fn max_stat_threshold<R: Rng + ?Sized>(
    grid_stats: &[(f64, Complex64)],
    level: f64,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if grid_stats.is_empty() {
        return Err(Error::EmptyInput("no grid statistics".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("max_stat_threshold", "level must lie in (0,1)"));
    }
    // 2x2 real covariance factors per point
    let factors: Vec<[f64; 4]> = grid_stats
        .iter()
        .map(|&(nu, wp)| {
            let vx = 0.5 * (nu + wp.re);
            let vy = 0.5 * (nu - wp.re);
            let cxy = 0.5 * wp.im;
            // closed-form symmetric 2x2 eigenfactorization with clamping
            let m = 0.5 * (vx + vy);
            let r = (0.25 * (vx - vy) * (vx - vy) + cxy * cxy).sqrt();
            let (l1, l2) = ((m + r).max(0.0), (m - r).max(0.0));
            let theta = 0.5 * (2.0 * cxy).atan2(vx - vy);
            let (st, ct) = theta.sin_cos();
            let (s1, s2) = (l1.sqrt(), l2.sqrt());
            // columns of U scaled by sqrt(lambda)
            [ct * s1, -st * s2, st * s1, ct * s2]
        })
        .collect();
    let mut maxs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut m = 0.0f64;
        for f in &factors {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            let x = f[0] * n1 + f[1] * n2;
            let y = f[2] * n1 + f[3] * n2;
            m = m.max(x * x + y * y);
        }
        maxs.push(m.sqrt());
    }
    Ok(stats::quantile(&maxs, 1.0 - level))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn stream(seed: u64, hi: u64, lo: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((hi << 32) | (lo & 0xffff_ffff));
    rng
}

/// Run the detection test on every full segment of `signal`.
pub fn detect(signal: &SignalGrid, cfg: &DetectionConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    let n_segments = signal.len() / cfg.segment_len;
    if n_segments == 0 {
        return Err(Error::TooFewSamples { need: cfg.segment_len, got: signal.len() });
    }
    let sample_rate = 1.0 / signal.dt;
    let window = WindowSpec::gaussian(signal.dt, 8.0)?;
    let eta_max = cfg.eta_max.unwrap_or(cfg.freq_max + 10.0);
    let evaluator = SstGridEvaluator::new(
        cfg.segment_len,
        sample_rate,
        &window,
        cfg.time_offsets(),
        cfg.xi_grid(),
        cfg.alpha(),
        eta_max,
    )?;
    let block_len = cfg.block_len()?;

    let mut per_segment = Vec::with_capacity(n_segments);
    for seg in 0..n_segments {
        let start = seg * cfg.segment_len;
        let samples = &signal.samples[start..start + cfg.segment_len];
        if samples.iter().all(|z| z.norm() == 0.0) {
            per_segment.push(SegmentReport {
                start_index: start,
                grid_stats: Vec::new(),
                threshold: f64::NAN,
                observed_max: 0.0,
                reject: false,
                skipped: true,
            });
            continue;
        }
        let segment = SignalGrid {
            samples: samples.to_vec(),
            dt: signal.dt,
            t0: signal.t0 + start as f64 * signal.dt,
        };
        let mut scratch = evaluator.scratch();
        let s_orig = evaluator.eval(&segment.samples, &mut scratch)?;

        let n_points = evaluator.n_grid_points();
        let boots: Vec<Vec<Complex64>> = (0..cfg.n_bootstrap as u64)
            .into_par_iter()
            .map_init(
                || evaluator.scratch(),
                |scr, b| -> Result<Vec<Complex64>> {
                    let mut rng = stream(cfg.seed, seg as u64 + 1, b);
                    let res = block_bootstrap_resample(&segment, block_len, &mut rng)?;
                    evaluator.eval(&res.samples, scr)
                },
            )
            .collect::<Result<Vec<_>>>()?;

        // centered bootstrap moments per grid point
        let nb = cfg.n_bootstrap as f64;
        let mut grid_stats = Vec::with_capacity(n_points);
        let mut degenerate = false;
        let offsets = cfg.time_offsets();
        let xis = cfg.xi_grid();
        for p in 0..n_points {
            let col: Vec<Complex64> = boots.iter().map(|b| b[p]).collect();
            let (nu, wp) = stats::complex_variance(&col);
            if nu <= 0.0 {
                degenerate = true;
            }
            grid_stats.push(GridPointStat {
                time_offset: offsets[p / xis.len()],
                xi: xis[p % xis.len()],
                nu,
                wp,
                observed: s_orig[p].norm(),
            });
            let _ = nb;
        }
        if degenerate {
            per_segment.push(SegmentReport {
                start_index: start,
                grid_stats,
                threshold: f64::NAN,
                observed_max: 0.0,
                reject: false,
                skipped: true,
            });
            continue;
        }

        let mut thr_rng = stream(cfg.seed, seg as u64 + 1, 0xffff_ffff);
        let threshold = if cfg.empirical_max {
            let maxs: Vec<f64> = boots
                .iter()
                .map(|b| {
                    // center by the bootstrap mean before taking the max
                    let means: Vec<Complex64> = (0..n_points)
                        .map(|p| {
                            boots.iter().map(|bb| bb[p]).sum::<Complex64>() / nb
                        })
                        .collect();
                    b.iter()
                        .zip(&means)
                        .map(|(s, m)| (s - m).norm())
                        .fold(0.0, f64::max)
                })
                .collect();
            stats::quantile(&maxs, 1.0 - cfg.level)
        } else {
            let pairs: Vec<(f64, Complex64)> =
                grid_stats.iter().map(|g| (g.nu, g.wp)).collect();
            max_stat_threshold(&pairs, cfg.level, cfg.n_max_draws, &mut thr_rng)?
        };
        let observed_max = grid_stats.iter().map(|g| g.observed).fold(0.0, f64::max);
        per_segment.push(SegmentReport {
            start_index: start,
            grid_stats,
            threshold,
            observed_max,
            reject: observed_max > threshold,
            skipped: false,
        });
    }
    let overall_reject = per_segment.iter().any(|s| !s.skipped && s.reject);
    Ok(DetectionReport { per_segment, overall_reject })
}

/// Synthesis spec for the rejection-rate experiment. The noise is real
/// Gaussian with per-sample deviation `noise_std`; the protocol convention
/// is unit per-sample variance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSynthesis {
    pub xi0: f64,
    pub sample_rate: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    /// Trial signal length; one segment when absent.
    #[serde(default)]
    pub n_samples: Option<usize>,
}

fn default_noise_std() -> f64 {
    1.0
}

impl DetectionSynthesis {
    pub fn study_defaults() -> Self {
        Self { xi0: 10.0, sample_rate: 142.02, noise_std: 1.0, n_samples: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectionRateRow {
    pub amplitude: f64,
    pub n_trials: usize,
    pub n_rejected: usize,
    pub rate: f64,
}

/// Rejection rate of the detection test over synthesized signals
/// A e^{2 pi i xi0 t} + noise for each amplitude in `a_values`.
pub fn rejection_rate_experiment(
    a_values: &[f64],
    n_trials: usize,
    cfg: &DetectionConfig,
    synth: &DetectionSynthesis,
) -> Result<Vec<RejectionRateRow>> {
    if n_trials == 0 || a_values.is_empty() {
        return Err(Error::EmptyInput("need at least one amplitude and one trial".into()));
    }
    cfg.validate()?;
    let n = synth.n_samples.unwrap_or(cfg.segment_len);
    let dt = 1.0 / synth.sample_rate;
    let mut rows = Vec::with_capacity(a_values.len());
    for (ai, &a) in a_values.iter().enumerate() {
        let n_rejected: usize = (0..n_trials as u64)
            .into_par_iter()
            .map(|trial| -> Result<usize> {
                let trial_seed =
                    splitmix64(cfg.seed ^ splitmix64((ai as u64) << 32 | trial));
                let mut rng = stream(trial_seed, 0, 0);
                let t0 = -((n / 2) as f64) * dt;
                let samples: Vec<Complex64> = (0..n)
                    .map(|k| {
                        let t = t0 + k as f64 * dt;
                        Complex64::from_polar(a, 2.0 * PI * synth.xi0 * t)
                            + Complex64::new(
                                synth.noise_std * rng.sample::<f64, _>(StandardNormal),
                                0.0,
                            )
                    })
                    .collect();
                let signal = SignalGrid { samples, dt, t0 };
                let trial_cfg = DetectionConfig { seed: trial_seed, ..cfg.clone() };
                // trial signals are a single segment; bootstraps already
                // parallelize poorly at this size, so run them inline
                let report = detect_serial(&signal, &trial_cfg)?;
                Ok(report.overall_reject as usize)
            })
            .sum::<Result<usize>>()?;
        rows.push(RejectionRateRow {
            amplitude: a,
            n_trials,
            n_rejected,
            rate: n_rejected as f64 / n_trials as f64,
        });
    }
    Ok(rows)
}

/// detect() with sequential bootstraps, used inside trial-level parallelism.
fn detect_serial(signal: &SignalGrid, cfg: &DetectionConfig) -> Result<DetectionReport> {
    // The parallel and serial paths share all numerical code; rayon's
    // par_iter inside an outer par_iter would oversubscribe, so the trial
    // loop owns the parallelism and this wrapper keeps bootstraps inline.
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
        .install(|| detect(signal, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sst;

    fn noise_segment(n: usize, seed: u64, fs: f64, std: f64) -> SignalGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt = 1.0 / fs;
        let samples = (0..n)
            .map(|_| Complex64::new(std * rng.sample::<f64, _>(StandardNormal), 0.0))
            .collect();
        SignalGrid { samples, dt, t0: 0.0 }
    }

    #[test]
    fn block_len_examples() {
        assert_eq!(default_block_len(1419).unwrap(), 11);
        assert_eq!(default_block_len(1000).unwrap(), 10);
        assert_eq!(default_block_len(8).unwrap(), 2);
        assert!(default_block_len(4).is_err());
    }

    #[test]
    fn bootstrap_full_block_is_identity() {
        let seg = noise_segment(64, 1, 100.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let res = block_bootstrap_resample(&seg, 64, &mut rng).unwrap();
        assert_eq!(res.samples, seg.samples);
    }

    #[test]
    fn bootstrap_constant_signal_unchanged() {
        let seg = SignalGrid {
            samples: vec![Complex64::new(3.5, -1.0); 100],
            dt: 0.01,
            t0: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let res = block_bootstrap_resample(&seg, 5, &mut rng).unwrap();
        assert_eq!(res.samples, seg.samples);
    }

    #[test]
    fn bootstrap_preserves_variance() {
        let seg = noise_segment(1419, 4, 142.02, 1.0);
        let orig_var = seg.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
            / seg.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reps = 10_000;
        let mut acc = 0.0;
        for _ in 0..reps {
            let res = block_bootstrap_resample(&seg, 11, &mut rng).unwrap();
            acc += res.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
                / res.len() as f64;
        }
        let mean_var = acc / reps as f64;
        // 3 SE of the resampling average around the plugin variance
        let se = orig_var * (2.0 / (reps as f64 * 11.0)).sqrt() * 3.0;
        assert!(
            (mean_var - orig_var).abs() < 3.0 * se + 0.01 * orig_var,
            "{mean_var} vs {orig_var}"
        );
    }

    #[test]
    fn bootstrap_rejects_oversized_block() {
        let seg = noise_segment(10, 6, 100.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(block_bootstrap_resample(&seg, 11, &mut rng).is_err());
        assert!(block_bootstrap_resample(&seg, 0, &mut rng).is_err());
    }

    #[test]
    fn threshold_monotone_in_variance_and_grid_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z = Complex64::default();
        let t1 =
            max_stat_threshold(&vec![(1.0, z); 10], 0.05, 20_000, &mut rng).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t2 =
            max_stat_threshold(&vec![(2.0, z); 10], 0.05, 20_000, &mut rng).unwrap();
        assert!(t2 > t1, "threshold must grow with variance: {t1} vs {t2}");
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t3 =
            max_stat_threshold(&vec![(1.0, z); 40], 0.05, 20_000, &mut rng).unwrap();
        assert!(t3 > t1, "threshold must grow with grid size: {t1} vs {t3}");
    }

    #[test]
    fn threshold_handles_improper_points() {
        // maximally improper wp = nu (real-only coordinate)
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = max_stat_threshold(
            &[(1.0, Complex64::new(1.0, 0.0)), (1.0, Complex64::new(-0.5, 0.4))],
            0.05,
            20_000,
            &mut rng,
        )
        .unwrap();
        assert!(t.is_finite() && t > 0.0);
        // mildly indefinite estimate (|wp| slightly above nu) gets clamped
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = max_stat_threshold(
            &[(1.0, Complex64::new(1.02, 0.0))],
            0.05,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(t.is_finite() && t > 0.0);
    }

    #[test]
    fn evaluator_matches_public_chain() {
        // dual route: windowed-FFT evaluator vs stft + reassignment + sst
        let fs = 142.02;
        let seg = {
            let mut s = noise_segment(1419, 10, fs, 1.0);
            for (k, z) in s.samples.iter_mut().enumerate() {
                let t = k as f64 * s.dt;
                *z += Complex64::from_polar(0.8, 2.0 * PI * 10.0 * t);
            }
            s
        };
        let window = WindowSpec::gaussian(seg.dt, 8.0).unwrap();
        let xis = vec![5.0, 7.5, 10.0, 12.5];
        let alpha = 0.406;
        let ev = SstGridEvaluator::new(
            1419,
            fs,
            &window,
            vec![709],
            xis.clone(),
            alpha,
            30.0,
        )
        .unwrap();
        let mut scratch = ev.scratch();
        let fast = ev.eval(&seg.samples, &mut scratch).unwrap();

        let etas = ev.eta_grid();
        let t = seg.time_at(709);
        let (v, dv) = sst::stft_with_derivative(&seg, &window, &[t], &etas).unwrap();
        let om = sst::reassignment(&v, &dv, sst::default_v_threshold(&v)).unwrap();
        let params = sst::SstParams {
            alpha,
            delta_eta: ev.delta_eta(),
            eta_count: etas.len(),
            xi_grid: xis,
            v_threshold: 0.0,
        };
        let slow = sst::sst(&v, &om, &params).unwrap();
        for (i, f) in fast.iter().enumerate() {
            let d = (f - slow.values[[0, i]]).norm();
            assert!(
                d <= 1e-10 * slow.values[[0, i]].norm().max(1e-6),
                "evaluator mismatch at xi index {i}: {d}"
            );
        }
    }

    fn quick_cfg() -> DetectionConfig {
        DetectionConfig {
            n_bootstrap: 60,
            n_max_draws: 2000,
            ..DetectionConfig::study_defaults()
        }
    }

    #[test]
    fn detect_is_deterministic() {
        let mut sig = noise_segment(1419, 11, 142.02, 1.0);
        for (k, z) in sig.samples.iter_mut().enumerate() {
            let t = k as f64 * sig.dt;
            *z += Complex64::from_polar(0.5, 2.0 * PI * 10.0 * t);
        }
        let cfg = quick_cfg();
        let r1 = detect(&sig, &cfg).unwrap();
        let r2 = detect(&sig, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
        assert_eq!(r1.per_segment.len(), 1);
        assert!(!r1.per_segment[0].skipped);
        assert!(r1.per_segment[0].threshold > 0.0);
    }

    #[test]
    fn detect_skips_all_zero_segment() {
        let sig = SignalGrid {
            samples: vec![Complex64::default(); 1419],
            dt: 1.0 / 142.02,
            t0: 0.0,
        };
        let report = detect(&sig, &quick_cfg()).unwrap();
        assert!(report.per_segment[0].skipped);
        assert!(!report.overall_reject);
    }

    #[test]
    fn detect_needs_one_full_segment() {
        let sig = noise_segment(1000, 12, 142.02, 1.0);
        assert!(matches!(
            detect(&sig, &quick_cfg()),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn strong_tone_rejects_pure_noise_mostly_does_not() {
        let cfg = DetectionConfig { n_bootstrap: 150, ..quick_cfg() };
        let synth = DetectionSynthesis::study_defaults();
        let rows = rejection_rate_experiment(&[0.0, 0.9], 24, &cfg, &synth).unwrap();
        assert!(rows[0].rate <= 0.25, "null rate {}", rows[0].rate);
        assert!(rows[1].rate >= 0.75, "power at A=0.9 is {}", rows[1].rate);
    }

    #[test]
    fn rejection_experiment_rejects_empty_inputs() {
        let cfg = quick_cfg();
        let synth = DetectionSynthesis::study_defaults();
        assert!(rejection_rate_experiment(&[], 5, &cfg, &synth).is_err());
        assert!(rejection_rate_experiment(&[0.1], 0, &cfg, &synth).is_err());
    }
}
