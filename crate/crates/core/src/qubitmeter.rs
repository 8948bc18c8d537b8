//! CNOT weak measurement of a signal qubit by a meter qubit.
//!
//! The meter starts in `gamma|0> + gamma_bar|1>` with `gamma >= gamma_bar >= 0`
//! and strength `G = gamma^2 - gamma_bar^2`. After the CNOT the joint state is
//!
//! ```text
//! (a gamma |0> + b gamma_bar |1>)_s |0>_m + (a gamma_bar |0> + b gamma |1>)_s |1>_m
//! ```
//!
//! and the normalized readout `(Prob(1|phi) - gamma_bar^2) / G` tends to
//! `Re<|1><1|>_w` as `G -> 0`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qstate::{check_dims, inner_raw, StateVector};

const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeterQubit {
    gamma: f64,
    gamma_bar: f64,
    strength: f64,
}

impl MeterQubit {
    /// Meter prepared for strength `g` in `[0, 1]`.
    pub fn from_strength(g: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::StrengthOutOfRange(g));
        }
        Ok(Self {
            gamma: ((1.0 + g) / 2.0).sqrt(),
            gamma_bar: ((1.0 - g) / 2.0).sqrt(),
            strength: g,
        })
    }

    /// Meter from raw amplitudes, validated.
    pub fn from_amplitudes(gamma: f64, gamma_bar: f64) -> Result<Self> {
        if !(gamma >= gamma_bar && gamma_bar >= 0.0) {
            return Err(Error::InvalidMeter(format!(
                "need gamma >= gamma_bar >= 0, got ({gamma}, {gamma_bar})"
            )));
        }
        if (gamma * gamma + gamma_bar * gamma_bar - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidMeter(format!(
                "gamma^2 + gamma_bar^2 must be 1, got {}",
                gamma * gamma + gamma_bar * gamma_bar
            )));
        }
        Ok(Self {
            gamma,
            gamma_bar,
            strength: gamma * gamma - gamma_bar * gamma_bar,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    /// `G = gamma^2 - gamma_bar^2`.
    pub fn strength(&self) -> f64 {
        self.strength
    }
}

/// `meter_from_strength` under its operation name.
pub fn meter_from_strength(g: f64) -> Result<MeterQubit> {
    MeterQubit::from_strength(g)
}

/// Signal-meter state over `(s, m) = (00, 01, 10, 11)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    state: StateVector,
}

impl JointState {
    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.state.amplitudes()
    }

    /// Unnormalized signal state attached to meter outcome `m`.
    pub fn meter_branch(&self, m: usize) -> [C64; 2] {
        let a = self.amplitudes();
        [a[m], a[2 + m]]
    }
}

pub fn couple_cnot(signal: &StateVector, meter: &MeterQubit) -> Result<JointState> {
    check_dims(2, signal.dim())?;
    let a = signal.amplitude(0);
    let b = signal.amplitude(1);
    let (g, gb) = (meter.gamma, meter.gamma_bar);
    let state = StateVector::new(vec![a * g, a * gb, b * gb, b * g])?;
    Ok(JointState { state })
}

/// Probability of the signal post-selection and of meter `|1>` given it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeterStatistics {
    pub prob_phi: f64,
    pub prob_1_given_phi: f64,
}

pub fn postselect_meter_probs(joint: &JointState, post: &StateVector) -> Result<MeterStatistics> {
    check_dims(2, post.dim())?;
    let c0 = inner_raw(post.amplitudes(), &joint.meter_branch(0));
    let c1 = inner_raw(post.amplitudes(), &joint.meter_branch(1));
    let prob_phi = c0.norm_sqr() + c1.norm_sqr();
    if !(prob_phi > 0.0) {
        return Err(Error::ImpossiblePostselection);
    }
    Ok(MeterStatistics {
        prob_phi,
        prob_1_given_phi: c1.norm_sqr() / prob_phi,
    })
}

/// `(Prob(1|phi) - gamma_bar^2) / G`.
pub fn normalized_readout(prob_1_given_phi: f64, meter: &MeterQubit) -> Result<f64> {
    if meter.strength <= 0.0 {
        return Err(Error::ZeroStrength);
    }
    Ok((prob_1_given_phi - meter.gamma_bar * meter.gamma_bar) / meter.strength)
}

/// One row of a strength sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeterRun {
    pub strength: f64,
    pub stats: MeterStatistics,
    pub readout: f64,
}

impl MeterRun {
    pub const CSV_HEADER: &'static str = "G,prob_phi,prob_1_given_phi,readout";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.strength, self.stats.prob_phi, self.stats.prob_1_given_phi, self.readout
        )
    }
}

/// Couples, post-selects and forms the readout at strength `g > 0`.
pub fn run_meter(signal: &StateVector, post: &StateVector, g: f64) -> Result<MeterRun> {
    let meter = MeterQubit::from_strength(g)?;
    let joint = couple_cnot(signal, &meter)?;
    let stats = postselect_meter_probs(&joint, post)?;
    Ok(MeterRun {
        strength: g,
        stats,
        readout: normalized_readout(stats.prob_1_given_phi, &meter)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus() -> StateVector {
        StateVector::from_real(&[1.0, 1.0]).unwrap()
    }

    fn canonical_post() -> StateVector {
        StateVector::from_real(&[2.0, -1.0]).unwrap()
    }

    #[test]
    fn strength_endpoints() {
        let m = MeterQubit::from_strength(1.0).unwrap();
        assert_eq!((m.gamma(), m.gamma_bar()), (1.0, 0.0));
        let m = MeterQubit::from_strength(0.0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((m.gamma() - h).abs() < 1e-15 && (m.gamma_bar() - h).abs() < 1e-15);
        let m = MeterQubit::from_strength(0.001).unwrap();
        assert!((m.gamma() - 0.7074602).abs() < 1e-7);
        assert!((m.gamma_bar() - 0.7067531).abs() < 1e-7);
        assert!((m.gamma().powi(2) + m.gamma_bar().powi(2) - 1.0).abs() < 1e-12);
        assert!((m.gamma().powi(2) - m.gamma_bar().powi(2) - 0.001).abs() < 1e-12);
    }

    #[test]
    fn strength_validation() {
        assert_eq!(
            MeterQubit::from_strength(1.5),
            Err(Error::StrengthOutOfRange(1.5))
        );
        assert!(MeterQubit::from_strength(-0.1).is_err());
        assert!(MeterQubit::from_amplitudes(0.6, 0.8).is_err());
        assert!(MeterQubit::from_amplitudes(0.9, 0.1).is_err());
        let m = MeterQubit::from_amplitudes(0.8, 0.6).unwrap();
        assert!((m.strength() - 0.28).abs() < 1e-15);
    }

    #[test]
    fn cnot_examples() {
        let m = MeterQubit::from_strength(0.3).unwrap();
        let j = couple_cnot(&StateVector::basis(2, 0).unwrap(), &m).unwrap();
        let want = [m.gamma(), m.gamma_bar(), 0.0, 0.0];
        for (a, w) in j.amplitudes().iter().zip(want) {
            assert!((a - C64::new(w, 0.0)).norm() < 1e-15);
        }

        let sharp = MeterQubit::from_strength(1.0).unwrap();
        let j = couple_cnot(&StateVector::basis(2, 1).unwrap(), &sharp).unwrap();
        assert_eq!(j.amplitudes()[3], C64::new(1.0, 0.0));

        let m = MeterQubit::from_strength(0.001).unwrap();
        let j = couple_cnot(&plus(), &m).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let want = [m.gamma(), m.gamma_bar(), m.gamma_bar(), m.gamma()];
        for (a, w) in j.amplitudes().iter().zip(want) {
            assert!((a.re - w * h).abs() < 1e-15);
        }
        assert!((j.amplitudes()[0].re - 0.50025).abs() < 1e-6);

        assert!(couple_cnot(&StateVector::basis(3, 0).unwrap(), &m).is_err());
    }

    #[test]
    fn postselection_examples() {
        let run = run_meter(&plus(), &canonical_post(), 1.0).unwrap();
        assert!((run.stats.prob_phi - 0.5).abs() < 1e-15);
        assert!((run.stats.prob_1_given_phi - 0.2).abs() < 1e-15);
        assert!((run.readout - 0.2).abs() < 1e-15);

        let m = MeterQubit::from_strength(0.0).unwrap();
        let j = couple_cnot(&plus(), &m).unwrap();
        let s = postselect_meter_probs(&j, &canonical_post()).unwrap();
        assert!((s.prob_1_given_phi - 0.5).abs() < 1e-15);
        assert!((s.prob_phi - 0.1).abs() < 1e-15);
        assert_eq!(normalized_readout(s.prob_1_given_phi, &m), Err(Error::ZeroStrength));

        // gamma gamma_bar = sqrt(1 - g^2) / 2; branch weights follow in closed form.
        let g: f64 = 1e-3;
        let gg = (1.0 - g * g).sqrt() / 2.0;
        let w1 = (4.0 * (1.0 - g) / 2.0 - 4.0 * gg + (1.0 + g) / 2.0) / 10.0;
        let w0 = (4.0 * (1.0 + g) / 2.0 - 4.0 * gg + (1.0 - g) / 2.0) / 10.0;
        let run = run_meter(&plus(), &canonical_post(), g).unwrap();
        assert!((run.stats.prob_1_given_phi - w1 / (w0 + w1)).abs() < 1e-13);
        assert!((run.stats.prob_1_given_phi - 0.4985).abs() < 1e-7);
        assert!((run.readout + 1.0).abs() < 1e-2);
    }

    #[test]
    fn readout_without_signal() {
        let m = MeterQubit::from_strength(0.2).unwrap();
        let r = normalized_readout(m.gamma_bar().powi(2), &m).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn csv_row_layout() {
        let run = run_meter(&plus(), &canonical_post(), 1.0).unwrap();
        assert_eq!(MeterRun::CSV_HEADER, "G,prob_phi,prob_1_given_phi,readout");
        assert_eq!(run.csv_row().split(',').count(), 4);
    }
}
