use std::fmt::Write as _;
use std::path::Path;

use weakval::backaction::{
    estimate_im_weak_value, estimate_re_weak_value, exact_postselection_prob, first_order_prob,
    ComponentKind, ComponentSet, PathComponent,
};
use weakval::pointer::{evolve_and_postselect, predicted_shifts, GaussianPointer};
use weakval::qstate::{checked_overlap, projector_weak_values, weak_value, DisplayComplex, SpectralObservable};
use weakval::qubitmeter::{run_meter, MeterQubit, MeterRun};
use weakval::shotnoise::{
    analytic_sigma, analytic_sigma_readout, fig3_dataset, simulate_estimator, CountingPlan,
    EstimatorStats, Fig3Config, Probe, SigmaKind, TrialResult,
};
use weakval::wvxfmt::{parse_experiment, ExperimentSpec};
use weakval::Error;

use crate::error::CliError;
use crate::{write_file, ComputeArgs, Fig3Args, MeterArgs, PointerArgs, ShotsArgs, SweepArgs, SweepParam};

pub const COMPUTE_HEADER: &str = "quantity,path,value";
pub const SWEEP_ALPHA_HEADER: &str = "alpha,exact,first_order,n_est,n_est_sigma";
pub const SWEEP_THETA_HEADER: &str = "theta,exact,first_order,im_est,im_est_sigma";
pub const SWEEP_G_HEADER: &str = "G,prob_phi,prob_1_given_phi,readout,readout_sigma";
pub const POINTER_HEADER: &str =
    "mean_q,mean_p,var_q,var_p,postselect_prob,dq_predicted,dp_predicted,weak_regime";

/// Reads and parses a `.wvx` file and rejects a vanishing overlap up front.
fn load(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec = parse_experiment(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    checked_overlap(&spec.pre, &spec.post)?;
    Ok(spec)
}

/// `Some(x)` renders as `x`, `None` as an empty field.
fn field(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn only_component(spec: &ExperimentSpec) -> Option<&PathComponent> {
    match spec.components.len() {
        1 => spec.components.iter().next(),
        _ => None,
    }
}

pub fn compute(args: &ComputeArgs, notes: &mut Vec<String>) -> Result<String, CliError> {
    let spec = load(&args.input)?;
    let overlap = checked_overlap(&spec.pre, &spec.post)?;
    let wv = projector_weak_values(&spec.pre, &spec.post)?;
    let report = exact_postselection_prob(&spec.pre, &spec.post, &spec.components)?;

    let mut out = format!("{COMPUTE_HEADER}\n");
    for (k, w) in wv.iter().enumerate() {
        writeln!(out, "weak_value,{k},{}", DisplayComplex(*w)).unwrap();
    }
    writeln!(out, "overlap,,{}", DisplayComplex(overlap)).unwrap();
    writeln!(out, "baseline,,{}", report.baseline).unwrap();
    writeln!(out, "exact,,{}", report.exact).unwrap();
    match first_order_prob(&spec.pre, &spec.post, &spec.components) {
        Ok(p) => writeln!(out, "first_order,,{p}").unwrap(),
        Err(e @ Error::OutsideFirstOrderDomain { .. }) => {
            notes.push(e.to_string());
            writeln!(out, "first_order,,").unwrap();
        }
        Err(e) => return Err(e.into()),
    }
    if !report.weak_condition_ok {
        notes.push("a component exceeds the weak condition |theta|, |alpha| <= 0.1".into());
    }
    if report.nonphysical {
        notes.push("a component has gain (|C| > 1)".into());
    }

    match only_component(&spec) {
        None if spec.components.is_empty() => {
            notes.push("no components; exact equals baseline and estimators are skipped".into())
        }
        None => notes.push("estimators need exactly one component; skipped".into()),
        Some(c) => match c.kind {
            ComponentKind::Attenuator if c.alpha > 0.0 => {
                let est = estimate_re_weak_value(report.exact, report.baseline, c.alpha)?;
                writeln!(out, "re_estimate,{},{est}", c.path_index).unwrap();
            }
            ComponentKind::Phase if c.theta != 0.0 => {
                let est = estimate_im_weak_value(report.exact, report.baseline, c.theta)?;
                writeln!(out, "im_estimate,{},{est}", c.path_index).unwrap();
            }
            _ => notes.push(format!(
                "no estimator applies to the {} component on path {}; skipped",
                c.kind.as_str(),
                c.path_index
            )),
        },
    }
    Ok(out)
}

fn linear_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::BadRange(format!("--steps must be at least 2, got {steps}")));
    }
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(CliError::BadRange(format!("need --from < --to, got {from} and {to}")));
    }
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                to
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

pub fn sweep(args: &SweepArgs, notes: &mut Vec<String>) -> Result<String, CliError> {
    let grid = linear_grid(args.from, args.to, args.steps)?;
    if !(args.n_ref > 0.0 && args.n_ref.is_finite()) {
        return Err(CliError::BadRange(format!("--n-ref must be positive, got {}", args.n_ref)));
    }
    let spec = load(&args.input)?;
    match args.param {
        SweepParam::Alpha | SweepParam::Theta => sweep_component(args, &spec, &grid),
        SweepParam::G => {
            if args.from < 0.0 || args.to > 1.0 {
                return Err(CliError::BadRange(format!(
                    "G must lie in [0, 1], got {} to {}",
                    args.from, args.to
                )));
            }
            if spec.dim != 2 {
                return Err(CliError::InapplicableParam(format!(
                    "a G sweep needs a dim 2 signal, the file has dim {}",
                    spec.dim
                )));
            }
            if !spec.components.is_empty() {
                notes.push("components are ignored by the meter model".into());
            }
            sweep_meter(args, &spec, &grid)
        }
    }
}

fn sweep_component(args: &SweepArgs, spec: &ExperimentSpec, grid: &[f64]) -> Result<String, CliError> {
    let (kind, header, name) = match args.param {
        SweepParam::Alpha => (ComponentKind::Attenuator, SWEEP_ALPHA_HEADER, "alpha"),
        _ => (ComponentKind::Phase, SWEEP_THETA_HEADER, "theta"),
    };
    let path = match only_component(spec) {
        Some(c) if c.kind == kind => c.path_index,
        _ => {
            return Err(CliError::InapplicableParam(format!(
                "{name} sweeps need exactly one {} component in the file",
                kind.as_str()
            )))
        }
    };
    if kind == ComponentKind::Attenuator && args.from < 0.0 {
        return Err(CliError::BadRange(format!("alpha must be nonnegative, got {}", args.from)));
    }

    let mut out = format!("{header}\n");
    for &x in grid {
        let component = match kind {
            ComponentKind::Attenuator => PathComponent::attenuator(path, x)?,
            _ => PathComponent::phase(path, x)?,
        };
        let set = ComponentSet::new().with(component)?;
        let report = exact_postselection_prob(&spec.pre, &spec.post, &set)?;
        let first = match first_order_prob(&spec.pre, &spec.post, &set) {
            Ok(p) => Some(p),
            Err(Error::OutsideFirstOrderDomain { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let estimate = match kind {
            ComponentKind::Attenuator => estimate_re_weak_value(report.exact, report.baseline, x),
            _ => estimate_im_weak_value(report.exact, report.baseline, x),
        }
        .ok();
        let sigma_kind = if kind == ComponentKind::Attenuator { SigmaKind::Re } else { SigmaKind::Im };
        let sigma = estimate.map(|_| analytic_sigma(report.exact / report.baseline, args.n_ref, x, sigma_kind));
        writeln!(out, "{x},{},{},{},{}", report.exact, field(first), field(estimate), field(sigma)).unwrap();
    }
    Ok(out)
}

fn sweep_meter(args: &SweepArgs, spec: &ExperimentSpec, grid: &[f64]) -> Result<String, CliError> {
    let baseline = checked_overlap(&spec.pre, &spec.post)?.norm_sqr();
    let mut out = format!("{SWEEP_G_HEADER}\n");
    for &g in grid {
        let meter = MeterQubit::from_strength(g)?;
        let stats = weakval::qubitmeter::postselect_meter_probs(
            &weakval::qubitmeter::couple_cnot(&spec.pre, &meter)?,
            &spec.post,
        )?;
        let readout = weakval::qubitmeter::normalized_readout(stats.prob_1_given_phi, &meter).ok();
        let sigma = readout.map(|_| {
            analytic_sigma_readout(stats.prob_1_given_phi, args.n_ref * stats.prob_phi / baseline, &meter)
        });
        writeln!(
            out,
            "{g},{},{},{},{}",
            stats.prob_phi,
            stats.prob_1_given_phi,
            field(readout),
            field(sigma)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn pointer(args: &PointerArgs, notes: &mut Vec<String>) -> Result<String, CliError> {
    let spec = load(&args.input)?;
    let path = args.path.unwrap_or(1.min(spec.dim - 1));
    if path >= spec.dim {
        return Err(Error::PathOutOfRange { index: path, dim: spec.dim }.into());
    }
    if !args.g.is_finite() {
        return Err(CliError::BadRange(format!("--G must be finite, got {}", args.g)));
    }
    let obs = SpectralObservable::projector(spec.dim, path)?;
    let pointer = GaussianPointer::with_headroom(args.sigma, args.grid, args.g)?;
    let (evolved, r) = evolve_and_postselect(&spec.pre, &spec.post, &obs, args.g, &pointer)?;
    let shifts = predicted_shifts(&weak_value(&spec.pre, &spec.post, &obs)?, args.g, &pointer);
    if !shifts.weak_regime {
        notes.push(format!(
            "g |w| exceeds 0.1 sigma on path {path}; first-order predictions are unreliable"
        ));
    }
    if let Some(dpath) = &args.density {
        write_file(dpath, &evolved.density().to_csv())?;
    }
    Ok(format!(
        "{POINTER_HEADER}\n{},{},{},{}\n",
        r.csv_row(),
        shifts.dq,
        shifts.dp,
        shifts.weak_regime
    ))
}

pub fn meter(args: &MeterArgs) -> Result<String, CliError> {
    let spec = load(&args.input)?;
    let run = run_meter(&spec.pre, &spec.post, args.g)?;
    Ok(format!("{}\n{}\n", MeterRun::CSV_HEADER, run.csv_row()))
}

pub fn shots(args: &ShotsArgs, notes: &mut Vec<String>) -> Result<String, CliError> {
    let plan = CountingPlan::new(args.n_ref, args.seed, args.trials).map_err(|e| CliError::BadRange(e.to_string()))?;
    let spec = load(&args.input)?;
    let probe = match args.g {
        Some(g) => {
            if !spec.components.is_empty() {
                notes.push("components are ignored by the meter model".into());
            }
            Probe::Meter(MeterQubit::from_strength(g)?)
        }
        None => match only_component(&spec) {
            Some(c) if c.kind == ComponentKind::Attenuator => Probe::Attenuation {
                components: spec.components.clone(),
                alpha: c.alpha,
            },
            Some(c) if c.kind == ComponentKind::Phase => Probe::Phase {
                components: spec.components.clone(),
                theta: c.theta,
            },
            _ => {
                return Err(CliError::InapplicableParam(
                    "shots needs --G or exactly one phase or atten component".into(),
                ))
            }
        },
    };
    let trials = simulate_estimator(&spec.pre, &spec.post, &probe, &plan)?;
    let stats = EstimatorStats::from_trials(&trials);
    notes.push(format!(
        "{} valid trials, {} invalid; mean {}, std {}",
        stats.valid,
        stats.invalid,
        stats.mean(),
        stats.std()
    ));

    let mut out = format!("{}\n", TrialResult::CSV_HEADER);
    for (i, t) in trials.iter().enumerate() {
        let est = if t.valid { t.estimate.to_string() } else { String::new() };
        writeln!(out, "{i},{},{},{est},{}", t.n_ref, t.n_exp, t.valid).unwrap();
    }
    Ok(out)
}

pub fn fig3(args: &Fig3Args, notes: &mut Vec<String>) -> Result<(), CliError> {
    if !(args.n_ref > 0.0 && args.n_ref.is_finite()) {
        return Err(CliError::BadRange(format!("--n-ref must be positive, got {}", args.n_ref)));
    }
    if args.points == 0 {
        return Err(CliError::BadRange("--points must be at least 1".into()));
    }
    let cfg = Fig3Config {
        n_ref_mean: args.n_ref,
        points: args.points,
        trials: args.trials,
        seed: args.seed,
        ..Fig3Config::default()
    };
    let tables = fig3_dataset(&cfg)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    for (name, text) in [("fig3a.csv", tables.fig3a_csv()), ("fig3b.csv", tables.fig3b_csv())] {
        let path = args.out.join(name);
        write_file(&path, &text)?;
        notes.push(format!("wrote {}", path.display()));
    }
    Ok(())
}
