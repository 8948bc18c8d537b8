//! Pure states over a finite basis and their weak values.
//!
//! A [`StateVector`] is normalized when it is built and immutable afterwards,
//! so every function here may assume unit norm. Observables are given in
//! spectral form ([`SpectralObservable`]); no eigensolver is involved.
//!
//! The weak value of `O` between a pre-selection `|psi>` and a
//! post-selection `|phi>` is
//!
//! ```text
//! <O>_w = <phi|O|psi> / <phi|psi>
//! ```
//!
//! and is undefined (an error, never infinity) once `|<phi|psi>|` drops to
//! [`DEGENERATE_OVERLAP`].

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Below this modulus `<post|pre>` is treated as zero.
pub const DEGENERATE_OVERLAP: f64 = 1e-9;

/// Tolerance used when validating norms and orthonormality.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Amplitudes at or below this modulus do not count toward a nonzero vector.
pub const ZERO_AMPLITUDE: f64 = 1e-12;

/// A normalized pure state over a finite computational (path) basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    labels: Option<Vec<String>>,
}

impl StateVector {
    /// Normalizes `raw` by its Euclidean norm.
    pub fn new(raw: Vec<C64>) -> Result<Self> {
        if raw.iter().all(|a| a.norm() <= ZERO_AMPLITUDE) {
            return Err(Error::ZeroVector);
        }
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amplitudes = raw.into_iter().map(|a| a / norm).collect();
        Ok(Self {
            amplitudes,
            labels: None,
        })
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(raw: &[f64]) -> Result<Self> {
        Self::new(raw.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The computational basis state `|k>` of a `dim`-dimensional space.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::PathOutOfRange { index: k, dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Attaches cosmetic basis labels. Semantics stay index-based.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amplitudes[k]
    }
}

/// Checks that two dimensions agree.
pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}

/// `<bra|ket>`, antilinear in the first argument.
pub fn inner(bra: &StateVector, ket: &StateVector) -> Result<C64> {
    check_dims(bra.dim(), ket.dim())?;
    Ok(inner_raw(bra.amplitudes(), ket.amplitudes()))
}

pub(crate) fn inner_raw(bra: &[C64], ket: &[C64]) -> C64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}

/// Tensor product; index `i * b.dim() + j` carries `a_i * b_j`.
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    let amplitudes = a
        .amplitudes()
        .iter()
        .flat_map(|x| b.amplitudes().iter().map(move |y| x * y))
        .collect();
    let labels = match (a.labels(), b.labels()) {
        (Some(la), Some(lb)) => Some(
            la.iter()
                .flat_map(|x| lb.iter().map(move |y| format!("{x}{y}")))
                .collect(),
        ),
        _ => None,
    };
    StateVector { amplitudes, labels }
}

/// An observable in spectral form: real eigenvalues with an orthonormal,
/// complete set of eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralObservable {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<StateVector>,
}

impl SpectralObservable {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Vec<StateVector>) -> Result<Self> {
        if eigenvalues.len() != eigenvectors.len() {
            return Err(Error::InvalidObservable(format!(
                "{} eigenvalues but {} eigenvectors",
                eigenvalues.len(),
                eigenvectors.len()
            )));
        }
        let dim = eigenvectors.first().map(StateVector::dim).ok_or_else(|| {
            Error::InvalidObservable("an observable needs at least one eigenpair".into())
        })?;
        if let Some(bad) = eigenvalues.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidObservable(format!(
                "eigenvalue {bad} is not finite"
            )));
        }
        for v in &eigenvectors {
            check_dims(dim, v.dim())?;
        }
        if eigenvectors.len() != dim {
            return Err(Error::InvalidObservable(format!(
                "{} eigenvectors cannot span a {dim}-dimensional space",
                eigenvectors.len()
            )));
        }
        for (i, u) in eigenvectors.iter().enumerate() {
            for (j, v) in eigenvectors.iter().enumerate().skip(i + 1) {
                let ov = inner_raw(u.amplitudes(), v.amplitudes()).norm();
                if ov > VALIDATION_TOL {
                    return Err(Error::InvalidObservable(format!(
                        "eigenvectors {i} and {j} overlap by {ov:e}"
                    )));
                }
            }
        }
        // Completeness: sum_k |o_k><o_k| = 1 elementwise.
        for r in 0..dim {
            for c in 0..dim {
                let entry: C64 = eigenvectors
                    .iter()
                    .map(|v| v.amplitude(r) * v.amplitude(c).conj())
                    .sum();
                let target = if r == c { 1.0 } else { 0.0 };
                if (entry - target).norm() > VALIDATION_TOL {
                    return Err(Error::InvalidObservable(format!(
                        "eigenvectors are incomplete at entry ({r}, {c})"
                    )));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Diagonal observable in the computational basis.
    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Self> {
        let dim = eigenvalues.len();
        let basis = (0..dim)
            .map(|k| StateVector::basis(dim, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(eigenvalues, basis)
    }

    /// The path projector `|k><k|`.
    pub fn projector(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::PathOutOfRange { index: k, dim });
        }
        Self::diagonal((0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
    }

    /// Same eigenbasis, eigenvalues mapped through `f`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eigenvalues: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        if let Some(bad) = eigenvalues.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidObservable(format!(
                "eigenvalue {bad} is not finite"
            )));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors: self.eigenvectors.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[StateVector] {
        &self.eigenvectors
    }

    /// Iterates `(o_k, |o_k>)`.
    pub fn eigenpairs(&self) -> impl Iterator<Item = (f64, &StateVector)> {
        self.eigenvalues.iter().copied().zip(self.eigenvectors.iter())
    }

    /// `O|state>` as an unnormalized amplitude vector.
    pub fn apply(&self, state: &StateVector) -> Result<Vec<C64>> {
        check_dims(self.dim(), state.dim())?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (o, v) in self.eigenpairs() {
            let c = o * inner_raw(v.amplitudes(), state.amplitudes());
            for (slot, a) in out.iter_mut().zip(v.amplitudes()) {
                *slot += c * a;
            }
        }
        Ok(out)
    }
}

/// A weak value together with the overlap it was normalized by.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakValueResult {
    pub value: C64,
    /// `<post|pre>`.
    pub overlap: C64,
    pub re: f64,
    pub im: f64,
}

impl WeakValueResult {
    fn new(value: C64, overlap: C64) -> Self {
        Self {
            value,
            overlap,
            re: value.re,
            im: value.im,
        }
    }
}

/// `<post|pre>`, rejected when its modulus is at or below the cutoff.
pub fn checked_overlap(pre: &StateVector, post: &StateVector) -> Result<C64> {
    let overlap = inner(post, pre)?;
    if overlap.norm() <= DEGENERATE_OVERLAP {
        return Err(Error::DegenerateOverlap {
            overlap: overlap.norm(),
        });
    }
    Ok(overlap)
}

/// `<post|O|pre> / <post|pre>`.
pub fn weak_value(
    pre: &StateVector,
    post: &StateVector,
    obs: &SpectralObservable,
) -> Result<WeakValueResult> {
    check_dims(obs.dim(), pre.dim())?;
    let overlap = checked_overlap(pre, post)?;
    let o_pre = obs.apply(pre)?;
    let numerator = inner_raw(post.amplitudes(), &o_pre);
    Ok(WeakValueResult::new(numerator / overlap, overlap))
}

/// Weak values of every path projector `|k><k|`; they sum to one.
pub fn projector_weak_values(pre: &StateVector, post: &StateVector) -> Result<Vec<C64>> {
    let overlap = checked_overlap(pre, post)?;
    Ok(post
        .amplitudes()
        .iter()
        .zip(pre.amplitudes())
        .map(|(f, p)| f.conj() * p / overlap)
        .collect())
}

/// `<state|O|state>`.
pub fn expectation(state: &StateVector, obs: &SpectralObservable) -> Result<f64> {
    check_dims(obs.dim(), state.dim())?;
    Ok(obs
        .eigenpairs()
        .map(|(o, v)| o * inner_raw(v.amplitudes(), state.amplitudes()).norm_sqr())
        .sum())
}

/// Renders a complex number as `a+bi` with shortest round-trip decimals.
pub struct DisplayComplex(pub C64);

impl fmt::Display for DisplayComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let C64 { re, im } = self.0;
        if im.is_sign_negative() {
            write!(f, "{re}-{}i", -im)
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus() -> StateVector {
        StateVector::from_real(&[1.0, 1.0]).unwrap()
    }

    fn canonical_post() -> StateVector {
        StateVector::from_real(&[2.0, -1.0]).unwrap()
    }

    #[test]
    fn make_state_normalizes() {
        let s = StateVector::from_real(&[1.0, 0.0]).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        let s = canonical_post();
        assert!((s.amplitude(0).re - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((s.amplitude(1).re + 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((s.amplitude(0).re - 0.894427).abs() < 1e-6);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(
            StateVector::from_real(&[0.0, 0.0]),
            Err(Error::ZeroVector)
        );
        assert_eq!(
            StateVector::new(vec![c(1e-13, 0.0), c(0.0, -1e-13)]),
            Err(Error::ZeroVector)
        );
        assert_eq!(StateVector::new(vec![]), Err(Error::ZeroVector));
    }

    #[test]
    fn inner_examples() {
        let zero = StateVector::basis(2, 0).unwrap();
        assert_eq!(inner(&zero, &zero).unwrap(), c(1.0, 0.0));

        let v = inner(&canonical_post(), &plus()).unwrap();
        assert!((v - c(1.0 / 10f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((v.re - 0.316228).abs() < 1e-6);

        let bra = StateVector::new(vec![c(1.0, 0.0), c(0.0, -1.0)]).unwrap();
        let v = inner(&bra, &plus()).unwrap();
        assert!((v - c(0.5, 0.5)).norm() < 1e-15);
        let swapped = inner(&plus(), &bra).unwrap();
        assert!((v - swapped.conj()).norm() < 1e-15);
    }

    #[test]
    fn inner_dim_mismatch() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(3, 0).unwrap();
        assert_eq!(
            inner(&a, &b),
            Err(Error::DimMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn tensor_examples() {
        let t = tensor(
            &StateVector::basis(2, 0).unwrap(),
            &StateVector::basis(2, 1).unwrap(),
        );
        assert_eq!(t.dim(), 4);
        assert_eq!(t.amplitude(1), c(1.0, 0.0));

        let h = 1.0 / 2f64.sqrt();
        let t = tensor(&plus(), &StateVector::basis(2, 0).unwrap());
        let want = [h, 0.0, h, 0.0];
        for (a, w) in t.amplitudes().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-15);
        }

        let minus = StateVector::from_real(&[1.0, -1.0]).unwrap();
        let t = tensor(&plus(), &minus);
        let want = [0.5, -0.5, 0.5, -0.5];
        for (a, w) in t.amplitudes().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_labels_concatenate() {
        let a = StateVector::basis(2, 0)
            .unwrap()
            .with_labels(vec!["a".into(), "b".into()])
            .unwrap();
        let b = StateVector::basis(2, 1)
            .unwrap()
            .with_labels(vec!["H".into(), "V".into()])
            .unwrap();
        let t = tensor(&a, &b);
        assert_eq!(t.labels().unwrap(), &["aH", "aV", "bH", "bV"]);
    }

    #[test]
    fn weak_value_examples() {
        let p1 = SpectralObservable::projector(2, 1).unwrap();
        let wv = weak_value(&plus(), &canonical_post(), &p1).unwrap();
        assert!((wv.value - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(wv.re, wv.value.re);
        assert_eq!(wv.im, wv.value.im);

        let zero = StateVector::basis(2, 0).unwrap();
        let p0 = SpectralObservable::projector(2, 0).unwrap();
        let wv = weak_value(&zero, &zero, &p0).unwrap();
        assert_eq!(wv.value, c(1.0, 0.0));

        let post = StateVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let wv = weak_value(&plus(), &post, &p1).unwrap();
        assert!((wv.value - c(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn weak_value_degenerate_overlap() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(2, 1).unwrap();
        let p1 = SpectralObservable::projector(2, 1).unwrap();
        assert!(matches!(
            weak_value(&a, &b, &p1),
            Err(Error::DegenerateOverlap { .. })
        ));
        assert!(matches!(
            projector_weak_values(&a, &b),
            Err(Error::DegenerateOverlap { .. })
        ));
    }

    #[test]
    fn projector_weak_value_examples() {
        let wv = projector_weak_values(&plus(), &canonical_post()).unwrap();
        assert!((wv[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((wv[1] - c(-1.0, 0.0)).norm() < 1e-15);

        let post = StateVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let wv = projector_weak_values(&plus(), &post).unwrap();
        assert!((wv[0] - c(0.5, 0.5)).norm() < 1e-15);
        assert!((wv[1] - c(0.5, -0.5)).norm() < 1e-15);

        let wv = projector_weak_values(&plus(), &plus()).unwrap();
        assert!((wv[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((wv[1] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let z = SpectralObservable::diagonal(vec![1.0, -1.0]).unwrap();
        assert!(expectation(&plus(), &z).unwrap().abs() < 1e-15);
        let p1 = SpectralObservable::projector(2, 1).unwrap();
        assert!((expectation(&plus(), &p1).unwrap() - 0.5).abs() < 1e-15);
        let p0 = SpectralObservable::projector(2, 0).unwrap();
        assert!((expectation(&canonical_post(), &p0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn observable_validation() {
        let plus = plus();
        let zero = StateVector::basis(2, 0).unwrap();
        let err = SpectralObservable::new(vec![0.0, 1.0], vec![zero.clone(), plus]);
        assert!(matches!(err, Err(Error::InvalidObservable(_))));
        let err = SpectralObservable::new(vec![0.0], vec![zero.clone()]);
        assert!(matches!(err, Err(Error::InvalidObservable(_))));
        let err = SpectralObservable::new(vec![0.0, 1.0], vec![zero]);
        assert!(matches!(err, Err(Error::InvalidObservable(_))));

        let minus = StateVector::from_real(&[1.0, -1.0]).unwrap();
        let x = SpectralObservable::new(vec![1.0, -1.0], vec![self::plus(), minus]).unwrap();
        assert!((expectation(&self::plus(), &x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_rendering() {
        assert_eq!(DisplayComplex(c(-1.0, 0.0)).to_string(), "-1+0i");
        assert_eq!(DisplayComplex(c(0.5, -0.5)).to_string(), "0.5-0.5i");
        assert_eq!(DisplayComplex(c(0.1, 2.5)).to_string(), "0.1+2.5i");
    }
}
