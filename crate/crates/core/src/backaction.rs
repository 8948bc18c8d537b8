//! Post-selection probabilities under per-path c-number components.
//!
//! An optical element on path `k` multiplies that path's amplitude by a
//! c-number `C_k`: a phase shifter gives `exp(-i theta)`, an attenuator
//! gives `exp(-alpha) = sqrt(T)`. Paths without an element keep `C_k = 1`.
//! The post-selection probability is then
//!
//! ```text
//! Prob(phi) = |<phi|psi>|^2 * |sum_k C_k <|k><k|>_w|^2
//! ```
//!
//! which to first order in `theta`, `alpha` reads
//! `baseline * (1 + sum_k [2 theta_k Im w_k - 2 alpha_k Re w_k])`.
//! The estimators at the bottom of this module invert that relation.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qstate::{
    check_dims, checked_overlap, inner_raw, projector_weak_values, SpectralObservable,
    StateVector,
};

/// First-order results are flagged once any `|theta|` or `|alpha|` exceeds this.
pub const WEAK_CONDITION: f64 = 0.1;

/// Hard limit for the first-order expansion.
pub const FIRST_ORDER_DOMAIN: f64 = 1.0;

const ROUTE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    Phase,
    Attenuator,
    General,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Phase => "phase",
            ComponentKind::Attenuator => "atten",
            ComponentKind::General => "cnum",
        }
    }
}

/// A c-number multiplier attached to one path.
///
/// `c = exp(-alpha - i theta)` holds for every kind. For `General`
/// components built from a raw multiplier, `theta = -arg(c)` and
/// `alpha = -ln|c|`; a negative `alpha` means gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathComponent {
    pub path_index: usize,
    pub kind: ComponentKind,
    pub theta: f64,
    pub alpha: f64,
    pub c: C64,
}

fn multiplier(theta: f64, alpha: f64) -> C64 {
    C64::from_polar((-alpha).exp(), -theta)
}

impl PathComponent {
    pub fn phase(path_index: usize, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidComponent(format!("phase {theta} is not finite")));
        }
        Ok(Self {
            path_index,
            kind: ComponentKind::Phase,
            theta,
            alpha: 0.0,
            c: multiplier(theta, 0.0),
        })
    }

    pub fn attenuator(path_index: usize, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidComponent(format!(
                "attenuation exponent must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(Self {
            path_index,
            kind: ComponentKind::Attenuator,
            theta: 0.0,
            alpha,
            c: C64::new((-alpha).exp(), 0.0),
        })
    }

    /// Attenuator specified by its transmittance `T = exp(-2 alpha)`.
    pub fn from_transmittance(path_index: usize, transmittance: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::InvalidComponent(format!(
                "transmittance must lie in (0, 1], got {transmittance}"
            )));
        }
        Self::attenuator(path_index, -0.5 * transmittance.ln())
    }

    pub fn general(path_index: usize, c: C64) -> Result<Self> {
        if !(c.re.is_finite() && c.im.is_finite()) || c.norm() == 0.0 {
            return Err(Error::InvalidComponent(format!(
                "multiplier must be finite and nonzero, got {c}"
            )));
        }
        Ok(Self {
            path_index,
            kind: ComponentKind::General,
            theta: -c.arg(),
            alpha: -c.norm().ln(),
            c,
        })
    }

    /// Stacks two elements on the same path.
    pub fn compose(&self, other: &PathComponent) -> Result<Self> {
        if self.path_index != other.path_index {
            return Err(Error::InvalidComponent(format!(
                "cannot compose components on paths {} and {}",
                self.path_index, other.path_index
            )));
        }
        let kind = if self.kind == other.kind {
            self.kind
        } else {
            ComponentKind::General
        };
        let theta = self.theta + other.theta;
        let alpha = self.alpha + other.alpha;
        let c = match kind {
            ComponentKind::Attenuator => C64::new((-alpha).exp(), 0.0),
            _ => self.c * other.c,
        };
        Ok(Self {
            path_index: self.path_index,
            kind,
            theta,
            alpha,
            c,
        })
    }

    /// Same element with `theta` and `alpha` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let theta = self.theta * s;
        let alpha = self.alpha * s;
        let c = match self.kind {
            ComponentKind::Attenuator => C64::new((-alpha).exp(), 0.0),
            _ => multiplier(theta, alpha),
        };
        Self {
            theta,
            alpha,
            c,
            ..*self
        }
    }

    /// `T = |c|^2`.
    pub fn transmittance(&self) -> f64 {
        self.c.norm_sqr()
    }

    /// `R = 1 - T`.
    pub fn reflectance(&self) -> f64 {
        1.0 - self.transmittance()
    }

    /// Gain (`|c| > 1`) is algebraically fine but not a passive element.
    pub fn is_physical(&self) -> bool {
        self.c.norm() <= 1.0 + 1e-12
    }

    pub fn within_weak_condition(&self) -> bool {
        self.theta.abs() <= WEAK_CONDITION && self.alpha.abs() <= WEAK_CONDITION
    }
}

/// At most one effective component per path, keyed by path index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComponentSet {
    by_path: BTreeMap<usize, PathComponent>,
}

impl ComponentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a component, multiplying into any element already on that path.
    pub fn insert(&mut self, component: PathComponent) -> Result<()> {
        let merged = match self.by_path.get(&component.path_index) {
            Some(existing) => existing.compose(&component)?,
            None => component,
        };
        self.by_path.insert(merged.path_index, merged);
        Ok(())
    }

    pub fn with(mut self, component: PathComponent) -> Result<Self> {
        self.insert(component)?;
        Ok(self)
    }

    pub fn get(&self, path: usize) -> Option<&PathComponent> {
        self.by_path.get(&path)
    }

    /// Components in ascending path order.
    pub fn iter(&self) -> impl Iterator<Item = &PathComponent> {
        self.by_path.values()
    }

    pub fn len(&self) -> usize {
        self.by_path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_path.is_empty()
    }

    /// `C_k`, one when the path is bare.
    pub fn multiplier(&self, path: usize) -> C64 {
        self.by_path
            .get(&path)
            .map_or(C64::new(1.0, 0.0), |c| c.c)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            by_path: self
                .by_path
                .iter()
                .map(|(&k, c)| (k, c.scaled(s)))
                .collect(),
        }
    }

    pub fn check_paths(&self, dim: usize) -> Result<()> {
        match self.by_path.keys().find(|&&k| k >= dim) {
            Some(&index) => Err(Error::PathOutOfRange { index, dim }),
            None => Ok(()),
        }
    }

    pub fn within_weak_condition(&self) -> bool {
        self.iter().all(PathComponent::within_weak_condition)
    }

    pub fn is_physical(&self) -> bool {
        self.iter().all(PathComponent::is_physical)
    }
}

impl FromIterator<PathComponent> for Result<ComponentSet> {
    fn from_iter<I: IntoIterator<Item = PathComponent>>(iter: I) -> Self {
        let mut set = ComponentSet::new();
        for c in iter {
            set.insert(c)?;
        }
        Ok(set)
    }
}

/// Exact and first-order post-selection probabilities for one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityReport {
    pub exact: f64,
    pub first_order: f64,
    /// `|<post|pre>|^2`.
    pub baseline: f64,
    /// Projector weak value of every path.
    pub weak_values_used: Vec<C64>,
    /// All `|theta|, |alpha| <= WEAK_CONDITION`.
    pub weak_condition_ok: bool,
    /// Some component has gain.
    pub nonphysical: bool,
}

fn first_order_value(baseline: f64, wv: &[C64], components: &ComponentSet) -> f64 {
    let shift: f64 = components
        .iter()
        .map(|c| {
            let w = wv[c.path_index];
            2.0 * c.theta * w.im - 2.0 * c.alpha * w.re
        })
        .sum();
    baseline * (1.0 + shift)
}

/// Exact post-selection probability, evaluated along two independent routes.
///
/// The weak-value sum is reported; the diagonal-operator route
/// `|<post| diag(C) |pre>|^2` must agree with it or
/// [`Error::RouteMismatch`] is returned.
pub fn exact_postselection_prob(
    pre: &StateVector,
    post: &StateVector,
    components: &ComponentSet,
) -> Result<ProbabilityReport> {
    check_dims(pre.dim(), post.dim())?;
    components.check_paths(pre.dim())?;
    let overlap = checked_overlap(pre, post)?;
    let baseline = overlap.norm_sqr();
    let wv = projector_weak_values(pre, post)?;

    let weighted: C64 = wv
        .iter()
        .enumerate()
        .map(|(k, w)| components.multiplier(k) * w)
        .sum();
    let via_weak_values = baseline * weighted.norm_sqr();

    let kicked: Vec<C64> = pre
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| components.multiplier(k) * a)
        .collect();
    let via_operator = inner_raw(post.amplitudes(), &kicked).norm_sqr();

    let scale: f64 = wv
        .iter()
        .enumerate()
        .map(|(k, w)| components.multiplier(k).norm() * w.norm())
        .sum();
    if (via_weak_values - via_operator).abs() > ROUTE_TOL * (1.0 + baseline * scale * scale) {
        return Err(Error::RouteMismatch {
            left: via_weak_values,
            right: via_operator,
        });
    }

    Ok(ProbabilityReport {
        exact: via_weak_values,
        first_order: first_order_value(baseline, &wv, components),
        baseline,
        weak_condition_ok: components.within_weak_condition(),
        nonphysical: !components.is_physical(),
        weak_values_used: wv,
    })
}

/// `|<post| exp(-i theta O) |pre>|^2`, with `theta` a plain parameter.
pub fn unitary_kick_prob(
    pre: &StateVector,
    post: &StateVector,
    obs: &SpectralObservable,
    theta: f64,
) -> Result<f64> {
    check_dims(pre.dim(), post.dim())?;
    check_dims(obs.dim(), pre.dim())?;
    checked_overlap(pre, post)?;
    let amp: C64 = obs
        .eigenpairs()
        .map(|(o, v)| {
            C64::from_polar(1.0, -theta * o)
                * inner_raw(post.amplitudes(), v.amplitudes())
                * inner_raw(v.amplitudes(), pre.amplitudes())
        })
        .sum();
    Ok(amp.norm_sqr())
}

/// First-order post-selection probability.
///
/// Components beyond [`WEAK_CONDITION`] still produce a value; check
/// [`ComponentSet::within_weak_condition`] to see whether it is trustworthy.
pub fn first_order_prob(
    pre: &StateVector,
    post: &StateVector,
    components: &ComponentSet,
) -> Result<f64> {
    check_dims(pre.dim(), post.dim())?;
    components.check_paths(pre.dim())?;
    if let Some(c) = components
        .iter()
        .find(|c| c.theta.abs() >= FIRST_ORDER_DOMAIN || c.alpha.abs() >= FIRST_ORDER_DOMAIN)
    {
        return Err(Error::OutsideFirstOrderDomain {
            path: c.path_index,
            theta: c.theta,
            alpha: c.alpha,
        });
    }
    let baseline = checked_overlap(pre, post)?.norm_sqr();
    let wv = projector_weak_values(pre, post)?;
    Ok(first_order_value(baseline, &wv, components))
}

fn check_baseline(prob_baseline: f64) -> Result<()> {
    if prob_baseline > 0.0 && prob_baseline.is_finite() {
        Ok(())
    } else {
        Err(Error::ZeroBaseline(prob_baseline))
    }
}

/// Reads `Re w` off an attenuated probability:
/// `(1 / 2 alpha) * (1 - prob_with / prob_baseline)`.
pub fn estimate_re_weak_value(prob_with: f64, prob_baseline: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    check_baseline(prob_baseline)?;
    Ok((1.0 - prob_with / prob_baseline) / (2.0 * alpha))
}

/// Reads `Im w` off a phase-shifted probability:
/// `(1 / 2 theta) * (prob_with / prob_baseline - 1)`.
pub fn estimate_im_weak_value(prob_with: f64, prob_baseline: f64, theta: f64) -> Result<f64> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::ZeroTheta);
    }
    check_baseline(prob_baseline)?;
    Ok((prob_with / prob_baseline - 1.0) / (2.0 * theta))
}
