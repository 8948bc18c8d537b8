//! Photon-counting shot noise for the weak-value estimators.
//!
//! Each trial draws two independent Poisson counts: `n_ref` for a run with
//! no components (expected `n_ref_mean`, standing for the baseline rate
//! `|<phi|psi>|^2`) and `n_exp` for the run with the probe in place. The
//! count ratio replaces the probability ratio in the estimators.
//!
//! Every trial owns a random stream derived from the master seed and its
//! index, so trials can run in parallel and any single trial can be
//! replayed in isolation.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::backaction::{
    estimate_im_weak_value, estimate_re_weak_value, exact_postselection_prob, ComponentSet,
    PathComponent,
};
use crate::error::{Error, Result};
use crate::qstate::{checked_overlap, StateVector};
use crate::qubitmeter::{couple_cnot, normalized_readout, postselect_meter_probs, MeterQubit};

/// Expected baseline photon count used for the reference curves.
pub const FIG3_N_REF_MEAN: f64 = 10_000.0;

/// Deterministic random stream.
#[derive(Clone, Debug)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Stream `index` of the family keyed by `seed`.
    pub fn for_trial(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self(rng)
    }

    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.0
    }
}

/// Draws from `Poisson(mean)`.
pub fn sample_poisson(mean: f64, stream: &mut RandomStream) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::NegativeMean(mean));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| Error::NegativeMean(mean))?;
    let draw: f64 = dist.sample(stream.rng());
    Ok(draw as u64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingPlan {
    pub n_ref_mean: f64,
    pub seed: u64,
    pub trials: usize,
}

impl CountingPlan {
    pub fn new(n_ref_mean: f64, seed: u64, trials: usize) -> Result<Self> {
        if !(n_ref_mean > 0.0 && n_ref_mean.is_finite()) {
            return Err(Error::InvalidPlan(format!(
                "n_ref_mean must be positive, got {n_ref_mean}"
            )));
        }
        if trials == 0 {
            return Err(Error::InvalidPlan("at least one trial is required".into()));
        }
        Ok(Self {
            n_ref_mean,
            seed,
            trials,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    pub n_ref: u64,
    pub n_exp: u64,
    pub estimate: f64,
    /// False when `n_ref = 0`; such trials carry a NaN estimate.
    pub valid: bool,
}

impl TrialResult {
    pub const CSV_HEADER: &'static str = "trial,n_ref,n_exp,estimate,valid";
}

/// What sits between pre- and post-selection during the probe run.
#[derive(Clone, Debug, PartialEq)]
pub enum Probe {
    /// Real-part estimator with attenuation exponent `alpha`.
    Attenuation { components: ComponentSet, alpha: f64 },
    /// Imaginary-part estimator with phase `theta`.
    Phase { components: ComponentSet, theta: f64 },
    /// CNOT meter; `n_ref` counts all post-selected photons and `n_exp`
    /// those with the meter found in `|1>`.
    Meter(MeterQubit),
}

impl Probe {
    /// Single attenuator on `path`, estimator matched to it.
    pub fn attenuator(path: usize, alpha: f64) -> Result<Self> {
        Ok(Probe::Attenuation {
            components: ComponentSet::new().with(PathComponent::attenuator(path, alpha)?)?,
            alpha,
        })
    }

    /// Single phase shifter on `path`, estimator matched to it.
    pub fn phase(path: usize, theta: f64) -> Result<Self> {
        Ok(Probe::Phase {
            components: ComponentSet::new().with(PathComponent::phase(path, theta)?)?,
            theta,
        })
    }
}

/// Expected counts and the estimator map for one configuration.
struct Model {
    /// Expected `n_ref` and `n_exp` (meter: expected meter-0 and meter-1 counts).
    means: (f64, f64),
    kind: ModelKind,
}

enum ModelKind {
    Re(f64),
    Im(f64),
    Meter(MeterQubit),
}

impl Model {
    fn build(pre: &StateVector, post: &StateVector, probe: &Probe, n_ref_mean: f64) -> Result<Self> {
        let baseline = match checked_overlap(pre, post) {
            Ok(ov) => ov.norm_sqr(),
            Err(Error::DegenerateOverlap { .. }) => return Err(Error::DegenerateBaseline),
            Err(e) => return Err(e),
        };
        match probe {
            Probe::Attenuation { components, alpha } => {
                if !(*alpha > 0.0) {
                    return Err(Error::NonpositiveAlpha(*alpha));
                }
                let exact = exact_postselection_prob(pre, post, components)?.exact;
                Ok(Self {
                    means: (n_ref_mean, n_ref_mean * exact / baseline),
                    kind: ModelKind::Re(*alpha),
                })
            }
            Probe::Phase { components, theta } => {
                if *theta == 0.0 {
                    return Err(Error::ZeroTheta);
                }
                let exact = exact_postselection_prob(pre, post, components)?.exact;
                Ok(Self {
                    means: (n_ref_mean, n_ref_mean * exact / baseline),
                    kind: ModelKind::Im(*theta),
                })
            }
            Probe::Meter(meter) => {
                if meter.strength() <= 0.0 {
                    return Err(Error::ZeroStrength);
                }
                let stats = postselect_meter_probs(&couple_cnot(pre, meter)?, post)?;
                let total = n_ref_mean * stats.prob_phi / baseline;
                Ok(Self {
                    means: (
                        total * (1.0 - stats.prob_1_given_phi),
                        total * stats.prob_1_given_phi,
                    ),
                    kind: ModelKind::Meter(*meter),
                })
            }
        }
    }

    /// Count (or probability) ratio to estimate.
    fn estimate_ratio(&self, ratio: f64) -> Result<f64> {
        match self.kind {
            ModelKind::Re(alpha) => estimate_re_weak_value(ratio, 1.0, alpha),
            ModelKind::Im(theta) => estimate_im_weak_value(ratio, 1.0, theta),
            ModelKind::Meter(ref meter) => normalized_readout(ratio, meter),
        }
    }

    fn trial(&self, stream: &mut RandomStream) -> Result<TrialResult> {
        let first = sample_poisson(self.means.0, stream)?;
        let second = sample_poisson(self.means.1, stream)?;
        let (n_ref, n_exp) = match self.kind {
            ModelKind::Meter(_) => (first + second, second),
            _ => (first, second),
        };
        if n_ref == 0 {
            return Ok(TrialResult {
                n_ref,
                n_exp,
                estimate: f64::NAN,
                valid: false,
            });
        }
        Ok(TrialResult {
            n_ref,
            n_exp,
            estimate: self.estimate_ratio(n_exp as f64 / n_ref as f64)?,
            valid: true,
        })
    }
}

/// Runs `plan.trials` independent counting experiments, in trial order.
pub fn simulate_estimator(
    pre: &StateVector,
    post: &StateVector,
    probe: &Probe,
    plan: &CountingPlan,
) -> Result<Vec<TrialResult>> {
    let model = Model::build(pre, post, probe, plan.n_ref_mean)?;
    (0..plan.trials as u64)
        .into_par_iter()
        .map(|i| model.trial(&mut RandomStream::for_trial(plan.seed, i)))
        .collect()
}

/// Estimator value at infinite statistics.
pub fn ideal_estimate(pre: &StateVector, post: &StateVector, probe: &Probe) -> Result<f64> {
    let model = Model::build(pre, post, probe, 1.0)?;
    let (m0, m1) = model.means;
    match model.kind {
        ModelKind::Meter(_) => model.estimate_ratio(m1 / (m0 + m1)),
        _ => model.estimate_ratio(m1 / m0),
    }
}

/// Count, sum and sum of squares over valid trials.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EstimatorStats {
    pub valid: usize,
    pub invalid: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl EstimatorStats {
    pub fn from_trials(trials: &[TrialResult]) -> Self {
        trials.iter().fold(Self::default(), |mut acc, t| {
            if t.valid {
                acc.valid += 1;
                acc.sum += t.estimate;
                acc.sum_sq += t.estimate * t.estimate;
            } else {
                acc.invalid += 1;
            }
            acc
        })
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            valid: self.valid + other.valid,
            invalid: self.invalid + other.invalid,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.valid as f64
    }

    /// Sample standard deviation; NaN with fewer than two valid trials.
    pub fn std(&self) -> f64 {
        if self.valid < 2 {
            return f64::NAN;
        }
        let n = self.valid as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        var.max(0.0).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaKind {
    Re,
    Im,
}

/// First-order standard deviation of the ratio estimators,
/// `(1 / 2|alpha|) r sqrt(1/(N r) + 1/N)` with `r = prob_with / prob_baseline`.
///
/// Both estimators share the same magnitude; `kind` only documents which
/// parameter was passed.
pub fn analytic_sigma(prob_ratio: f64, n_ref_mean: f64, alpha_or_theta: f64, _kind: SigmaKind) -> f64 {
    let rel = (1.0 / (n_ref_mean * prob_ratio) + 1.0 / n_ref_mean).sqrt();
    prob_ratio * rel / (2.0 * alpha_or_theta.abs())
}

/// First-order standard deviation of the normalized readout when
/// `n_post_mean` post-selected photons are split between meter outcomes.
pub fn analytic_sigma_readout(prob_1_given_phi: f64, n_post_mean: f64, meter: &MeterQubit) -> f64 {
    let p = prob_1_given_phi;
    (p * (1.0 - p) / n_post_mean).sqrt() / meter.strength()
}

/// Parameters of the reference estimator curves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig3Config {
    pub n_ref_mean: f64,
    /// Rows per table.
    pub points: usize,
    /// Monte Carlo trials per row; zero omits the Monte Carlo columns.
    pub trials: usize,
    pub seed: u64,
    pub g_min: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            n_ref_mean: FIG3_N_REF_MEAN,
            points: 61,
            trials: 0,
            seed: 0,
            g_min: 1e-3,
            alpha_min: 5e-4,
            alpha_max: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig3Row {
    /// `G` in table (a), `alpha` in table (b).
    pub param: f64,
    pub ideal: f64,
    pub sigma: f64,
    /// Monte Carlo `(mean, std)` when trials were requested.
    pub mc: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig3Tables {
    pub readout: Vec<Fig3Row>,
    pub n_est: Vec<Fig3Row>,
}

impl Fig3Tables {
    pub fn fig3a_csv(&self) -> String {
        render(&self.readout, "G", "readout")
    }

    pub fn fig3b_csv(&self) -> String {
        render(&self.n_est, "alpha", "n_est")
    }
}

fn render(rows: &[Fig3Row], param: &str, value: &str) -> String {
    let with_mc = rows.iter().any(|r| r.mc.is_some());
    let mut out = format!("{param},{value}_ideal,{value}_sigma");
    if with_mc {
        out.push_str(&format!(",{value}_mc_mean,{value}_mc_std"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}", r.param, r.ideal, r.sigma));
        if let Some((m, s)) = r.mc {
            out.push_str(&format!(",{m},{s}"));
        }
        out.push('\n');
    }
    out
}

/// Log-spaced grid from `lo` to `hi` inclusive.
fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// SplitMix64 step, used to give each table row its own seed.
fn derive_seed(seed: u64, row: u64) -> u64 {
    let mut z = seed.wrapping_add(row.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Signal `(1,1)/sqrt 2` post-selected on `(2,-1)/sqrt 5`: `<|1><1|>_w = -1`.
pub fn canonical_instance() -> (StateVector, StateVector) {
    let pre = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)])
        .expect("nonzero");
    let post = StateVector::new(vec![C64::new(2.0, 0.0), C64::new(-1.0, 0.0)])
        .expect("nonzero");
    (pre, post)
}

/// Readout-versus-`G` and estimate-versus-`alpha` tables for the
/// canonical instance, with the attenuator on path 1.
pub fn fig3_dataset(cfg: &Fig3Config) -> Result<Fig3Tables> {
    if cfg.points == 0 {
        return Err(Error::InvalidPlan("at least one row is required".into()));
    }
    let (pre, post) = canonical_instance();
    let baseline = checked_overlap(&pre, &post)?.norm_sqr();

    let mc = |probe: &Probe, row: usize| -> Result<Option<(f64, f64)>> {
        if cfg.trials == 0 {
            return Ok(None);
        }
        let plan = CountingPlan::new(cfg.n_ref_mean, derive_seed(cfg.seed, row as u64), cfg.trials)?;
        let stats = EstimatorStats::from_trials(&simulate_estimator(&pre, &post, probe, &plan)?);
        Ok(Some((stats.mean(), stats.std())))
    };

    let mut readout = Vec::with_capacity(cfg.points);
    for (i, g) in log_grid(cfg.g_min, 1.0, cfg.points).into_iter().enumerate() {
        let meter = MeterQubit::from_strength(g)?;
        let stats = postselect_meter_probs(&couple_cnot(&pre, &meter)?, &post)?;
        let probe = Probe::Meter(meter);
        readout.push(Fig3Row {
            param: g,
            ideal: normalized_readout(stats.prob_1_given_phi, &meter)?,
            sigma: analytic_sigma_readout(
                stats.prob_1_given_phi,
                cfg.n_ref_mean * stats.prob_phi / baseline,
                &meter,
            ),
            mc: mc(&probe, i)?,
        });
    }

    let mut n_est = Vec::with_capacity(cfg.points);
    for (i, alpha) in log_grid(cfg.alpha_min, cfg.alpha_max, cfg.points)
        .into_iter()
        .enumerate()
    {
        let probe = Probe::attenuator(1, alpha)?;
        let Probe::Attenuation { components, .. } = &probe else {
            unreachable!()
        };
        let exact = exact_postselection_prob(&pre, &post, components)?.exact;
        n_est.push(Fig3Row {
            param: alpha,
            ideal: estimate_re_weak_value(exact, baseline, alpha)?,
            sigma: analytic_sigma(exact / baseline, cfg.n_ref_mean, alpha, SigmaKind::Re),
            mc: mc(&probe, cfg.points + i)?,
        });
    }
    Ok(Fig3Tables { readout, n_est })
}
