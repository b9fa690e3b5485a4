use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use gsod_core::criticality::{
    audit_critical_points_with, best_rank_one_of, criticality_residual, extrema_split, is_critical_decomposition,
    AuditMethod, CriticalSet, DEFAULT_TOL_CRIT,
};
use gsod_core::oracle::{diagonal_example, make_fixture, paper_example, GroundTruthFixture};
use gsod_core::sod::{reconstruct, validate};
use gsod_core::{gsod, Decomposition, DenseTensor, Error, MultiVector, Shape};
use serde::Serialize;
use serde_json::{json, Value};

use crate::opts::{read_input, solver_options};
use crate::{AuditChoice, Command, Common, ReportFormat};

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Validation(String),
    Infeasible(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Infeasible(_) => 4,
            Failure::Numerical(_) => 5,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::InfeasibleFixture(m) => Failure::Infeasible(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

struct Report {
    json: Value,
    text: String,
}

impl Report {
    fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => pretty(&self.json),
            ReportFormat::Text => self.text.clone(),
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn emit(common: &Common, body: &str) -> Result<(), Failure> {
    match &common.output {
        Some(path) => fs::write(path, body).map_err(|e| Failure::Input(format!("writing {path}: {e}"))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Tensor JSON, or the tensor of a fixture file.
fn load_tensor(path: &str) -> Result<DenseTensor, Failure> {
    let text = read_input(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    if value.get("schema").is_some() {
        return Ok(GroundTruthFixture::from_json(&text)
            .map_err(|e| Failure::Input(format!("{path}: {e}")))?
            .tensor);
    }
    serde_json::from_value(value).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

fn load<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, Failure> {
    serde_json::from_str(&read_input(path)?).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Decompose { tensor, common } => decompose(&tensor, &common),
        Command::Verify {
            tensor,
            decomposition,
            require_critical,
            tol_crit,
            tol_recon,
            common,
        } => verify(&tensor, &decomposition, require_critical, tol_crit, tol_recon, &common),
        Command::Critical {
            tensor,
            audit,
            audit_starts,
            audit_method,
            common,
        } => {
            let method = match audit_method {
                AuditChoice::Power => AuditMethod::PowerIteration,
                AuditChoice::Newton => AuditMethod::Newton,
            };
            critical(&tensor, audit.then_some((audit_starts, method)), &common)
        }
        Command::Bestrank1 { tensor, common } => bestrank1(&tensor, &common),
        Command::Gen {
            shape,
            r,
            paper_example,
            diagonal_example,
            common,
        } => generate(&shape, r, paper_example, diagonal_example, &common),
        Command::Eval {
            tensor,
            point,
            tol_crit,
            common,
        } => eval(&tensor, &point, tol_crit, &common),
    }
}

fn decompose(path: &str, common: &Common) -> Result<(), Failure> {
    let opts = solver_options(common)?;
    let a = load_tensor(path)?;
    let started = Instant::now();
    let res = gsod(&a, &opts)?;
    let elapsed = started.elapsed().as_secs_f64();
    emit(common, &pretty(&res.decomposition))?;

    let residuals = res
        .decomposition
        .terms()
        .iter()
        .map(|t| criticality_residual(&a, &t.factors, DEFAULT_TOL_CRIT).map(|r| r.max_residual))
        .collect::<gsod_core::Result<Vec<f64>>>()?;
    let patterns: usize = res.steps.iter().map(|s| s.patterns_searched).sum();
    let mut text = format!("rank {}\n", res.rank);
    for (k, (t, r)) in res.decomposition.terms().iter().zip(&residuals).enumerate() {
        writeln!(text, "  sigma[{k}] = {:.15}  kkt residual {r:.2e}", t.sigma).unwrap();
    }
    writeln!(text, "patterns searched {patterns}, wall time {elapsed:.3} s").unwrap();
    let report = Report {
        json: json!({
            "rank": res.rank,
            "sigmas": res.decomposition.sigmas(),
            "kkt_residuals": residuals,
            "patterns_searched": patterns,
            "steps": res.steps,
            "converged": res.all_converged(),
            "options": opts,
            "wall_time_s": elapsed,
        }),
        text,
    };
    eprint!("{}", report.render(common.report));
    if !res.all_converged() {
        return Err(Failure::Numerical(
            "a power iteration did not converge on any restart within max_power_iters".into(),
        ));
    }
    Ok(())
}

fn verify(
    tensor: &str,
    decomposition: &str,
    require_critical: bool,
    tol_crit: f64,
    tol_recon: f64,
    common: &Common,
) -> Result<(), Failure> {
    let opts = solver_options(common)?;
    let a = load_tensor(tensor)?;
    let d: Decomposition = load(decomposition)?;
    if d.shape() != a.shape() {
        return Err(Failure::Input(format!(
            "decomposition shape {:?} does not match tensor shape {:?}",
            d.shape().dims(),
            a.dims()
        )));
    }
    let validation = validate(&d, opts.tol_orth);
    let recon = reconstruct(&d).distance(&a)?;
    let recon_ok = recon <= tol_recon * a.frobenius_norm().max(f64::MIN_POSITIVE);
    let critical = if validation.is_sod {
        Some(is_critical_decomposition(&d, &a, tol_crit)?)
    } else {
        None
    };

    let mut failed = None;
    if !validation.is_sod {
        failed = Some("strong-orthogonality");
    } else if !recon_ok {
        failed = Some("reconstruction");
    } else if require_critical && critical != Some(true) {
        failed = Some("criticality");
    }

    let mut text = String::new();
    writeln!(
        text,
        "strong-orthogonality: {} (max violation {:.2e}, max norm error {:.2e}, ordering ok {})",
        pass(validation.is_sod),
        validation.max_pairwise_violation,
        validation.max_norm_error,
        validation.ordering_ok
    )
    .unwrap();
    for pair in &validation.offending_pairs {
        writeln!(text, "  offending pair ({}, {}) mode {:?}: {}", pair.k, pair.l, pair.mode, pair.inner).unwrap();
    }
    writeln!(text, "reconstruction: {} (residual {recon:.2e})", pass(recon_ok)).unwrap();
    match critical {
        Some(c) => writeln!(text, "criticality: {}", pass(c)).unwrap(),
        None => writeln!(text, "criticality: skipped").unwrap(),
    }
    let report = Report {
        json: json!({
            "passed": failed.is_none(),
            "failed_check": failed,
            "validation": validation,
            "reconstruction_residual": recon,
            "critical": critical,
            "tolerances": {
                "tol_orth": opts.tol_orth,
                "tol_recon": tol_recon,
                "tol_crit": tol_crit,
                "require_critical": require_critical,
            },
        }),
        text,
    };
    emit(common, &report.render(common.report))?;
    match failed {
        Some(check) => Err(Failure::Validation(format!("{check} check failed"))),
        None => Ok(()),
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct CriticalOutput<'a> {
    #[serde(flatten)]
    set: &'a CriticalSet,
    maxima: usize,
    minima: usize,
    max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<gsod_core::criticality::AuditReport>,
}

fn critical(path: &str, audit: Option<(usize, AuditMethod)>, common: &Common) -> Result<(), Failure> {
    let opts = solver_options(common)?;
    let a = load_tensor(path)?;
    let d = gsod(&a, &opts)?.decomposition;
    let set = CriticalSet::from_decomposition(&d, &a, DEFAULT_TOL_CRIT)?;
    let (maxima, minima) = extrema_split(&set);
    let audit = audit
        .map(|(starts, method)| audit_critical_points_with(&a, &d, starts, opts.seed, DEFAULT_TOL_CRIT, method))
        .transpose()?;
    let out = CriticalOutput {
        set: &set,
        maxima: maxima.len(),
        minima: minima.len(),
        max_residual: set.max_residual(),
        audit,
    };
    emit(common, &pretty(&out))?;

    let mut text = format!(
        "{} critical points (rank {}, p {}), {} maxima / {} minima, max residual {:.2e}\n",
        set.len(),
        set.rank,
        set.p,
        out.maxima,
        out.minima,
        out.max_residual
    );
    if set.degenerate {
        text.push_str("repeated weights: the finite count is not guaranteed\n");
    }
    if let Some(audit) = &out.audit {
        writeln!(
            text,
            "audit ({:?}): {} starts, {} critical, {} distinct orbits, {} off-set, max span residual {:.2e}",
            audit.method,
            audit.starts,
            audit.critical_runs,
            audit.points.len(),
            audit.off_set,
            audit.max_span_residual
        )
        .unwrap();
    }
    let report = Report {
        json: json!({
            "count": set.len(),
            "maxima": out.maxima,
            "minima": out.minima,
            "degenerate": set.degenerate,
            "off_set": out.audit.as_ref().map(|x| x.off_set),
            "tol_crit": DEFAULT_TOL_CRIT,
        }),
        text,
    };
    eprint!("{}", report.render(common.report));
    Ok(())
}

fn bestrank1(path: &str, common: &Common) -> Result<(), Failure> {
    let opts = solver_options(common)?;
    let a = load_tensor(path)?;
    let best = best_rank_one_of(&gsod(&a, &opts)?.decomposition);
    emit(common, &pretty(&best))?;
    let report = Report {
        json: json!({ "sigma": best.sigma, "count": best.components.len(), "unique": best.unique }),
        text: format!(
            "sigma_1 = {:.15}, {} best rank-one approximation(s), unique: {}\n",
            best.sigma,
            best.components.len(),
            best.unique
        ),
    };
    eprint!("{}", report.render(common.report));
    Ok(())
}

fn generate(
    dims: &[usize],
    r: Option<usize>,
    paper: bool,
    diagonal: bool,
    common: &Common,
) -> Result<(), Failure> {
    let opts = solver_options(common)?;
    let fixture = if paper {
        paper_example()
    } else if diagonal {
        diagonal_example()
    } else {
        let shape = Shape::new(dims.to_vec())?;
        make_fixture(&shape, r.expect("clap requires r"), opts.seed)?
    };
    emit(common, &(fixture.to_json()? + "\n"))?;
    let report = Report {
        json: json!({ "shape": fixture.shape.dims(), "r": fixture.r, "seed": fixture.seed, "sigmas": fixture.truth.sigmas() }),
        text: format!("fixture {:?}, r = {}, seed {}\n", fixture.shape.dims(), fixture.r, fixture.seed),
    };
    eprint!("{}", report.render(common.report));
    Ok(())
}

fn eval(tensor: &str, point: &str, tol_crit: f64, common: &Common) -> Result<(), Failure> {
    let a = load_tensor(tensor)?;
    let u: MultiVector = load(point)?;
    let value = a.evaluate(&u)?;
    let gradient = a.gradient_components(&u)?;
    let crit = criticality_residual(&a, &u, tol_crit).ok();
    let mut text = format!("value {value}\n");
    for (j, z) in gradient.parts().iter().enumerate() {
        writeln!(text, "  z[{j}] = {z:?}").unwrap();
    }
    match &crit {
        Some(c) => writeln!(text, "critical: {} (max residual {:.2e})", c.is_critical, c.max_residual).unwrap(),
        None => writeln!(text, "critical: n/a (point is off the torus)").unwrap(),
    }
    let report = Report {
        json: json!({ "value": value, "gradient": gradient.parts(), "criticality": crit, "tol_crit": tol_crit }),
        text,
    };
    emit(common, &report.render(common.report))
}
