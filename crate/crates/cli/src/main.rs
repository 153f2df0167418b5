use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fmtkit::diffusion::{ks_distance, simulate_run, stein_residual_empirical, wasserstein1_distance, EmpiricalDistribution, SimConfig};
use fmtkit::fmt::{classifier, run_family_diagnostics, KernelFamily};
use fmtkit::gaussian::oracle_check;
use fmtkit::io::{self, TargetSpec};
use fmtkit::stein::{
    dictionary, poly_moments, stein_identity_residual, stein_solution, NamedTarget, PolyCoeff, QuadOptions, TargetMeasure,
    TestFunction,
};
use fmtkit::Error;

#[derive(Parser)]
#[command(name = "fmtkit", version, about = "Fourth-moment and Stein diagnostics on finite Wiener chaos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in targets and their parameters.
    TargetsList,
    /// Diffusion coefficient a(x) = αx² + βx + γ of a built-in target.
    TargetsCoeffs(TargetArgs),
    /// Fourth-moment diagnostics along a kernel family.
    Diagnose(DiagnoseArgs),
    /// Which laws with a given coefficient can be chaos limits.
    Classify(ClassifyArgs),
    /// Simulate the Stein diffusion of a target.
    Simulate(SimulateArgs),
    /// Stein identity and Stein equation checks for a target.
    SteinCheck(SteinCheckArgs),
    /// Randomised check of the moment and product formulas against the oracle.
    OracleCheck(OracleArgs),
}

#[derive(Args, Clone, Default)]
struct TargetArgs {
    /// Target name (see `targets-list`).
    #[arg(long)]
    name: Option<String>,
    /// Alias of --name.
    #[arg(long)]
    target: Option<String>,
    /// Target spec file (named or custom grid density).
    #[arg(long)]
    target_file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long = "a", allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long = "b", allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Variance of the normal target (coefficient γ for `classify`).
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Write the report here instead of standard output (`simulate`: the
    /// sample dump, a `#` header block then one value per line).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// gaussian_clt, gamma_fixed or explicit.
    #[arg(long)]
    family: String,
    /// Member indices, comma separated.
    #[arg(long = "m", value_delimiter = ',')]
    m: Vec<usize>,
    /// Number of squared Gaussians for gamma_fixed.
    #[arg(long)]
    k: Option<usize>,
    /// Kernel files for the explicit family, comma separated (member i is the i-th file).
    #[arg(long, value_delimiter = ',')]
    kernel: Vec<PathBuf>,
    /// Monte Carlo samples per member (0 skips the pathwise estimates).
    #[arg(long, default_value_t = 0)]
    mc: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    dt: f64,
    #[arg(long, default_value_t = 100_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    thinning: u64,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Interior projection margin at finite support ends.
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    epsilon: f64,
}

#[derive(Args)]
struct SteinCheckArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Interior grid size for the Stein-equation residual.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Exact target draws for the empirical identity check (0 skips it).
    #[arg(long, default_value_t = 0)]
    mc: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 400)]
    cases: usize,
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Message plus exit code: 2 for bad input, 1 for numerical failure.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() { 2 } else { 1 };
        let message = match &e {
            Error::InvalidParameter { name, reason } => format!("invalid --{}: {reason}", flag_for(name)),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

fn flag_for(field: &str) -> String {
    match field {
        "boundary_epsilon" => "epsilon".into(),
        "step" => "dt".into(),
        other => other.replace('_', "-"),
    }
}

fn usage(flag: &str, reason: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: format!("invalid --{flag}: {}", reason.into()),
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| usage("seed", format!("required for {what}")))
}

type Outcome = Result<(Value, Option<PathBuf>), Failure>;

impl TargetArgs {
    fn name(&self) -> Result<Option<&str>, Failure> {
        match (&self.name, &self.target) {
            (Some(a), Some(b)) if a != b => Err(usage("target", format!("conflicts with --name {a}"))),
            (Some(a), _) | (None, Some(a)) => Ok(Some(a)),
            (None, None) => Ok(None),
        }
    }

    fn get(&self, p: &str) -> Option<f64> {
        match p {
            "nu" => self.nu,
            "a" => self.a,
            "b" => self.b,
            "lambda" => self.lambda,
            "gamma" => self.gamma,
            "delta" => self.delta,
            _ => None,
        }
    }

    fn spec(&self) -> Result<TargetSpec, Failure> {
        let name = self.name()?;
        if let Some(path) = &self.target_file {
            if name.is_some() {
                return Err(usage("target-file", "give either a target file or --name/--target"));
            }
            return Ok(io::load_target_spec(path)?);
        }
        let name = name.ok_or_else(|| usage("name", "a target is required (--name, --target or --target-file)"))?;
        let t = NamedTarget::from_params(name, |p| self.get(p))?;
        let used: Vec<&str> = t.params().iter().map(|(k, _)| *k).collect();
        for flag in ["nu", "a", "b", "lambda", "gamma", "delta"] {
            if self.get(flag).is_some() && !used.contains(&flag) {
                return Err(usage(flag, format!("not a parameter of target `{name}`")));
            }
        }
        t.validate()?;
        Ok(TargetSpec::Named(t))
    }

    fn named(&self) -> Result<NamedTarget, Failure> {
        match self.spec()? {
            TargetSpec::Named(t) => Ok(t),
            TargetSpec::Custom { .. } => Err(usage("target-file", "this command needs a named target")),
        }
    }
}

fn target_params(t: &NamedTarget) -> Value {
    t.params().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>().into()
}

fn targets_list() -> Outcome {
    let table = [
        ("normal", vec!["gamma"], "centred normal with variance gamma (default 1)"),
        ("student", vec!["nu"], "Student t, nu > 2"),
        ("pareto", vec!["nu"], "Lomax density nu (1+y)^(-nu-1), centred, nu > 2"),
        ("gamma", vec!["a", "lambda"], "Gamma with shape a and rate lambda, centred"),
        ("inverse_gamma", vec!["delta", "lambda"], "inverse Gamma with shape lambda and scale delta, centred, lambda > 2"),
        ("f", vec!["a", "b"], "F distribution with (a, b) degrees of freedom, centred, b > 4"),
        ("uniform", vec![], "uniform on (-1/2, 1/2)"),
        ("beta", vec!["a", "b"], "Beta(a, b), centred"),
    ];
    let targets: Vec<Value> = table
        .iter()
        .map(|(name, params, about)| json!({"name": name, "params": params, "description": about}))
        .collect();
    Ok((json!({ "targets": targets }), None))
}

fn coeff_json(c: &PolyCoeff<f64>) -> Value {
    json!({"alpha": c.alpha, "beta": c.beta, "gamma": c.gamma})
}

fn targets_coeffs(args: &TargetArgs) -> Outcome {
    let t = args.named()?;
    let c = t.coeffs();
    let s = t.support();
    let moments = match poly_moments(&c) {
        Ok((m2, m3, m4)) => json!({"m2": m2, "m3": m3, "m4": m4}),
        Err(_) => Value::Null,
    };
    Ok((
        json!({
            "name": t.name(),
            "params": target_params(&t),
            "alpha": c.alpha,
            "beta": c.beta,
            "gamma": c.gamma,
            "support": [s.lower, s.upper],
            "mean_shift": t.mean_shift(),
            "variance": t.variance(),
            "moment_bound": t.moment_bound(),
            "moments": moments,
        }),
        args.out.clone(),
    ))
}

fn classify(args: &ClassifyArgs) -> Outcome {
    let t = &args.target;
    let explicit = args.alpha.is_some() || args.beta.is_some();
    let (coeff, source) = if explicit {
        if t.name()?.is_some() || t.target_file.is_some() {
            return Err(usage("alpha", "give either --alpha/--beta/--gamma or a target"));
        }
        let get = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(flag, "required with an explicit coefficient"));
        let c = PolyCoeff::new(get(args.alpha, "alpha")?, get(args.beta, "beta")?, get(t.gamma, "gamma")?);
        for (flag, v) in [("alpha", c.alpha), ("beta", c.beta), ("gamma", c.gamma)] {
            if !v.is_finite() {
                return Err(usage(flag, "must be finite"));
            }
        }
        (c, Value::Null)
    } else {
        let named = t.named()?;
        (named.coeffs(), json!({"name": named.name(), "params": target_params(&named)}))
    };
    let report = serde_json::to_value(classifier(&coeff)).expect("serialisable");
    Ok((json!({"target": source, "classifier": report}), t.out.clone()))
}

fn diagnose(args: &DiagnoseArgs) -> Outcome {
    if args.m.is_empty() && args.family != "explicit" {
        return Err(usage("m", "at least one member index is required"));
    }
    let seed = if args.mc > 0 { require_seed(args.seed, "Monte Carlo estimates (--mc > 0)")? } else { args.seed.unwrap_or(0) };
    let (family, ms) = match args.family.as_str() {
        "gaussian_clt" => (KernelFamily::GaussianClt, args.m.clone()),
        "gamma_fixed" => {
            let k = args.k.ok_or_else(|| usage("k", "required for family gamma_fixed"))?;
            (KernelFamily::GammaFixed { k }, args.m.clone())
        }
        "explicit" => {
            if args.kernel.is_empty() {
                return Err(usage("kernel", "the explicit family needs kernel files"));
            }
            let members = args
                .kernel
                .iter()
                .enumerate()
                .map(|(i, p)| Ok((i + 1, io::load_kernel(p)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            let ms = if args.m.is_empty() { (1..=members.len()).collect() } else { args.m.clone() };
            (KernelFamily::Explicit { members }, ms)
        }
        other => return Err(usage("family", format!("unknown family `{other}` (gaussian_clt, gamma_fixed, explicit)"))),
    };
    let target = args.target.named()?;
    let report = run_family_diagnostics(&family, &ms, &target, args.mc, seed)?;
    Ok((serde_json::to_value(report).expect("serialisable"), args.target.out.clone()))
}

fn dictionary_json(e: &EmpiricalDistribution, target: &TargetMeasure, threshold: f64) -> Result<Value, Failure> {
    let mut rows = Vec::new();
    let mut all = true;
    for h in dictionary() {
        let est = stein_residual_empirical(e, target, &h)?;
        let z = est.z_score(0.0);
        all &= z < threshold;
        rows.push(json!({"h": h.name, "mean": est.mean, "stderr": est.stderr, "z": z, "pass": z < threshold}));
    }
    Ok(json!({"threshold_stderr": threshold, "all_pass": all, "tests": rows}))
}

fn simulate(args: &SimulateArgs) -> Outcome {
    let seed = require_seed(args.seed, "simulate")?;
    let spec = args.target.spec()?;
    let target = spec.to_target()?;
    let cfg = SimConfig {
        step: args.dt,
        burn_in: args.burn_in,
        samples: args.samples,
        thinning: args.thinning,
        seed,
        boundary_epsilon: args.epsilon,
        chains: args.chains,
    };
    let run = simulate_run(&target, &cfg)?;
    let ks = ks_distance(&run.samples, &target)?;
    let w1 = match spec.named() {
        Some(t) => {
            let exact = EmpiricalDistribution::new(t.exact_samples(seed ^ 0x5eed, run.samples.len()))?;
            Some(wasserstein1_distance(&run.samples, &exact))
        }
        None => None,
    };
    let mean = run.samples.mean();
    let header = json!({
        "schema_version": io::SCHEMA_VERSION,
        "target": target.label(),
        "config": cfg,
    });
    if let Some(path) = &args.target.out {
        std::fs::write(path, io::sample_dump(&header, &run.path_samples))
            .map_err(|e| usage("out", format!("cannot write {}: {e}", path.display())))?;
    }
    Ok((
        json!({
            "target": target.label(),
            "config": cfg,
            "steps": run.steps,
            "clamped_steps": run.clamped,
            "clamp_fraction": run.clamp_fraction(),
            "clamp_flagged": run.clamp_flagged(),
            "sample_mean": mean,
            "ks_distance": ks,
            "wasserstein1_vs_exact_draws": w1,
            "stein_dictionary": dictionary_json(&run.samples, &target, 5.0)?,
        }),
        None,
    ))
}

fn stein_check(args: &SteinCheckArgs) -> Outcome {
    let spec = args.target.spec()?;
    let target = spec.to_target()?;
    if args.grid < 2 {
        return Err(usage("grid", "need at least 2 points"));
    }
    let mut identity = Vec::new();
    for h in dictionary() {
        let row = match stein_identity_residual(&target, &h) {
            Ok(r) => json!({"h": h.name, "residual": r}),
            Err(e) if e.is_validation() => json!({"h": h.name, "skipped": e.to_string()}),
            Err(e) => return Err(e.into()),
        };
        identity.push(row);
    }
    let mut solutions = Vec::new();
    for f in [TestFunction::monomial(1), TestFunction::monomial(2)] {
        let row = match stein_solution(&target, &f) {
            Ok(s) => json!({"f": f.name, "mean": s.mean(), "max_residual": s.max_residual(args.grid)?}),
            Err(e) if e.is_validation() => json!({"f": f.name, "skipped": e.to_string()}),
            Err(e) => return Err(e.into()),
        };
        solutions.push(row);
    }
    let moments = match target.coeff().polynomial() {
        Some(c) => match poly_moments(c) {
            Ok((m2, m3, m4)) => {
                let q = |k: i32| target.expect(|x| x.powi(k), &QuadOptions::default());
                json!({"recursion": [m2, m3, m4], "quadrature": [q(2)?, q(3)?, q(4)?]})
            }
            Err(e) => json!({"skipped": e.to_string()}),
        },
        None => Value::Null,
    };
    let empirical = if args.mc > 0 {
        let seed = require_seed(args.seed, "the empirical check (--mc > 0)")?;
        let t = spec.named().ok_or_else(|| usage("mc", "exact draws need a named target"))?;
        let e = EmpiricalDistribution::new(t.exact_samples(seed, args.mc))?;
        dictionary_json(&e, &target, 5.0)?
    } else {
        Value::Null
    };
    Ok((
        json!({
            "target": target.label(),
            "coefficient": target.coeff().polynomial().map(coeff_json),
            "identity_residuals": identity,
            "stein_solutions": solutions,
            "moments": moments,
            "empirical": empirical,
        }),
        args.target.out.clone(),
    ))
}

fn oracle(args: &OracleArgs) -> Result<(Value, Option<PathBuf>, bool), Failure> {
    let seed = require_seed(args.seed, "oracle-check")?;
    let r = oracle_check(seed, args.cases, args.pairs, args.points, args.tol)?;
    let passed = r.passed();
    let mut v = serde_json::to_value(&r).expect("serialisable");
    v["passed"] = json!(passed);
    Ok((v, args.out.clone(), passed))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let (name, (value, out), code) = match &cli.command {
        Command::TargetsList => ("targets-list", targets_list()?, 0),
        Command::TargetsCoeffs(a) => ("targets-coeffs", targets_coeffs(a)?, 0),
        Command::Diagnose(a) => ("diagnose", diagnose(a)?, 0),
        Command::Classify(a) => ("classify", classify(a)?, 0),
        Command::Simulate(a) => ("simulate", simulate(a)?, 0),
        Command::SteinCheck(a) => ("stein-check", stein_check(a)?, 0),
        Command::OracleCheck(a) => {
            let (v, out, passed) = oracle(a)?;
            ("oracle-check", (v, out), if passed { 0 } else { 1 })
        }
    };
    let text = io::report(name, &value);
    match out {
        Some(path) => std::fs::write(&path, format!("{text}\n"))
            .map_err(|e| usage("out", format!("cannot write {}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
