use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use condlim_core::asymptotics::{mixture_limits, tail_asymptotic_condition_scaled};
use condlim_core::limitlaw::{pushforward_corollary, CorollaryCase, CorollaryKind, LimitLawOneSided, LimitLawTwoSided, Scaling};
use condlim_core::model::config::ConfigMap;
use condlim_core::model::{build_builtin_model, validate_model, ValidationGrid};
use condlim_core::montecarlo::{
    bivariate_normalized, case_params_from_model, estimate_tail_probability, sample_conditional, SampleOptions,
};
use condlim_core::oracle::{density_normalization, tail_probability_quadrature};
use condlim_core::stats::{convergence_report, ReportCase, ReportOptions};
use condlim_core::{Condition, Error, NormScale, Normalizers, PolarModel, SeedStream, Sign};

use crate::output::{fmt_f, fmt_opt, Csv};
use crate::{Command, Method, RunArgs, EXIT_NUMERIC, EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE};

/// Keys outside the model sections that the tool reads.
const CLI_KEYS: [&str; 10] = [
    "case.kind",
    "case.c",
    "norm.scale",
    "verify.x_grid",
    "verify.n",
    "verify.ks_max",
    "verify.noise",
    "verify.tail_tol",
    "verify.chi2_p_min",
    "verify.chi2_bins",
];
const MODEL_PREFIXES: [&str; 5] = ["model.", "radial.", "angular.", "shape_u.", "shape_v."];

const DEFAULT_N: u64 = 10_000;
const DEFAULT_MC_PROPOSALS: u64 = 1_000_000;
const DEFAULT_DENSITY_GRID: u64 = 50;
const DENSITY_R_MAX: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot {action} `{path}`: {source}")]
    Io { action: &'static str, path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

struct Ctx<'a> {
    command: &'static str,
    args: &'a RunArgs,
    config: ConfigMap,
    model: PolarModel,
    params: Vec<(String, String)>,
}

impl<'a> Ctx<'a> {
    fn load(command: &'static str, args: &'a RunArgs) -> CliResult<Self> {
        let text = fs::read_to_string(&args.config)
            .map_err(|source| CliError::Io { action: "read", path: args.config.clone(), source })?;
        let config = ConfigMap::parse(&text)?;
        for key in config.keys() {
            if !MODEL_PREFIXES.iter().any(|p| key.starts_with(p)) && !CLI_KEYS.contains(&key) {
                return Err(usage(format!("unknown config key `{key}`")));
            }
        }
        let model = build_builtin_model(&config.model_spec()?)?;
        Ok(Self { command, args, config, model, params: Vec::new() })
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    fn csv(&self, seed: Option<u64>) -> Csv {
        Csv::new(self.command, &self.config.canonical(), seed, &self.params)
    }

    fn seed(&self) -> CliResult<u64> {
        self.args.seed.ok_or_else(|| usage(format!("`{}` is stochastic and needs --seed", self.command)))
    }

    fn sampling(&self) -> SampleOptions {
        SampleOptions { workers: self.args.workers.unwrap_or(1).max(1), ..SampleOptions::default() }
    }

    fn x_values(&self) -> CliResult<Vec<f64>> {
        match (&self.args.x, &self.args.x_grid) {
            (Some(_), Some(_)) => Err(usage("give either --x or --x-grid, not both")),
            (Some(x), None) => Ok(vec![*x]),
            (None, Some(g)) if !g.is_empty() => Ok(g.clone()),
            _ => Err(usage(format!("`{}` needs --x or --x-grid", self.command))),
        }
    }

    fn single_x(&self) -> CliResult<f64> {
        match (self.args.x, &self.args.x_grid) {
            (Some(x), None) => Ok(x),
            _ => Err(usage(format!("`{}` needs a single --x", self.command))),
        }
    }

    fn condition(&self) -> CliResult<Condition> {
        match &self.args.condition {
            None => Ok(Condition::RightSided),
            Some(s) => Condition::from_str(s).map_err(|_| usage(format!("unknown condition `{s}`"))),
        }
    }

    fn norm_scale(&self, condition: Condition) -> CliResult<NormScale> {
        Ok(match self.config.get("norm.scale") {
            Some("phi_plus") => NormScale::PlusPhi,
            Some("phi_sign") => NormScale::PerSign,
            Some("phi_star") => NormScale::Star,
            Some(other) => return Err(usage(format!("norm.scale must be phi_plus, phi_sign or phi_star, got `{other}`"))),
            None if condition == Condition::Unrestricted && self.model.is_two_sided() => NormScale::PerSign,
            None => NormScale::PlusPhi,
        })
    }

    fn scaling(&self, condition: Condition) -> CliResult<Scaling> {
        Ok(match self.norm_scale(condition)? {
            NormScale::Star => Scaling::StarNorming,
            _ => Scaling::PerSignNorming,
        })
    }

    fn case(&self) -> CliResult<Option<CorollaryCase>> {
        let name = match (&self.args.case, self.config.get("case.kind")) {
            (Some(flag), _) => flag.as_str(),
            (None, Some(key)) => key,
            (None, None) => return Ok(None),
        };
        let kind = CorollaryKind::from_str(name).map_err(|_| usage(format!("unknown case `{name}`")))?;
        let mut params = case_params_from_model(&self.model)?;
        if let Some(c) = self.config.parse_opt::<f64>("case.c")? {
            params.c = Some(c);
        }
        Ok(Some(CorollaryCase::build(kind, &params)?))
    }

    /// Refuses to sample from a model that fails its assumption checks.
    fn require_valid(&self) -> CliResult<()> {
        let report = validate_model(&self.model, &ValidationGrid::default())?;
        if report.all_passed() {
            return Ok(());
        }
        let names: Vec<&str> = report.failures().map(|e| e.name.as_str()).collect();
        Err(usage(format!("model fails validation ({}); run `condlim validate` for details", names.join(", "))))
    }

    fn emit(&self, text: String) -> CliResult<()> {
        match &self.args.out {
            Some(path) => write_file(path, &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io { action: "write", path: path.to_path_buf(), source })
}

fn count(n: u64, what: &str) -> CliResult<usize> {
    if n == 0 {
        return Err(usage(format!("{what} must be >= 1")));
    }
    usize::try_from(n).map_err(|_| usage(format!("{what} too large")))
}

pub fn dispatch(command: &Command) -> CliResult<i32> {
    match command {
        Command::Validate(a) => validate(Ctx::load("validate", a)?),
        Command::Phi(a) => phi(Ctx::load("phi", a)?),
        Command::Tailprob(a) => tailprob(Ctx::load("tailprob", a)?),
        Command::Simulate(a) => simulate(Ctx::load("simulate", a)?),
        Command::LimitSample(a) => limit_sample(Ctx::load("limit-sample", a)?),
        Command::Density(a) => density(Ctx::load("density", a)?),
        Command::Verify(a) => verify(Ctx::load("verify", a)?),
    }
}

fn validate(ctx: Ctx) -> CliResult<i32> {
    let grid = ValidationGrid::default();
    let report = validate_model(&ctx.model, &grid)?;
    let mut csv = ctx.csv(None);
    csv.meta("points_per_decade", grid.points_per_decade);
    csv.meta("all_passed", report.all_passed());
    csv.row(&["check", "passed", "measured", "expected", "margin", "detail"]);
    for e in &report.entries {
        csv.row(&[
            e.name.clone(),
            e.passed.to_string(),
            fmt_f(e.measured),
            fmt_opt(e.expected),
            fmt_f(e.margin),
            e.detail.replace(',', ";"),
        ]);
    }
    ctx.emit(csv.into_string())?;
    for e in report.failures() {
        eprintln!("FAIL {}: measured {:e}, margin {:e} {}", e.name, e.measured, e.margin, e.detail);
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_THRESHOLD })
}

fn phi(mut ctx: Ctx) -> CliResult<i32> {
    let xs = ctx.x_values()?;
    ctx.param("x_grid", join(&xs));
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        rows.push(Normalizers::compute(&ctx.model, x).map_err(Error::at(x))?);
    }
    let mut csv = ctx.csv(None);
    csv.row(&["x", "psi", "phi_minus", "phi_plus", "phi_star", "residual_minus", "residual_plus"]);
    for n in rows {
        csv.row(&[
            fmt_f(n.x),
            fmt_f(n.psi_x),
            fmt_opt(n.phi(Sign::Minus)),
            fmt_opt(n.phi(Sign::Plus)),
            fmt_f(n.phi_star),
            fmt_opt(n.residual[Sign::Minus.index()]),
            fmt_opt(n.residual[Sign::Plus.index()]),
        ]);
    }
    ctx.emit(csv.into_string())?;
    Ok(EXIT_OK)
}

fn tailprob(mut ctx: Ctx) -> CliResult<i32> {
    let xs = ctx.x_values()?;
    let method = ctx.args.method.unwrap_or(Method::Quad);
    let condition = ctx.condition()?;
    ctx.param("x_grid", join(&xs));
    ctx.param("condition", condition);
    let mut rows = Vec::with_capacity(xs.len());
    let seed = match method {
        Method::Mc => {
            let seed = ctx.seed()?;
            let n = ctx.args.n.unwrap_or(DEFAULT_MC_PROPOSALS);
            count(n, "--n")?;
            ctx.param("method", "mc");
            ctx.param("n_proposals", n);
            ctx.require_valid()?;
            let stream = SeedStream::new(seed);
            for (i, &x) in xs.iter().enumerate() {
                let est = estimate_tail_probability(&ctx.model, x, n, condition, stream.substream(i as u64), &ctx.sampling())
                    .map_err(Error::at(x))?;
                rows.push((x, est.estimate, Some(est.std_error)));
            }
            Some(seed)
        }
        Method::Quad => {
            ctx.param("method", "quad");
            for &x in &xs {
                let q = tail_probability_quadrature(&ctx.model, x, condition).map_err(Error::at(x))?;
                rows.push((x, q.value, None));
            }
            None
        }
        Method::Asym => {
            ctx.param("method", "asym");
            for &x in &xs {
                let a = tail_asymptotic_condition_scaled(&ctx.model, x, condition).map_err(Error::at(x))?;
                rows.push((x, a * ctx.model.radial.survival(x), None));
            }
            None
        }
    };
    let mut csv = ctx.csv(seed);
    csv.row(&["x", "value", "std_error"]);
    for (x, v, se) in rows {
        csv.row(&[fmt_f(x), fmt_f(v), fmt_opt(se)]);
    }
    ctx.emit(csv.into_string())?;
    Ok(EXIT_OK)
}

fn simulate(mut ctx: Ctx) -> CliResult<i32> {
    let x = ctx.single_x()?;
    let seed = ctx.seed()?;
    let n = count(ctx.args.n.unwrap_or(DEFAULT_N), "--n")?;
    let condition = ctx.condition()?;
    let scale = ctx.norm_scale(condition)?;
    let case = ctx.case()?;
    ctx.param("n", n);
    if let Some(c) = &case {
        ctx.param("case", c.kind());
    }
    ctx.require_valid()?;
    let sample = sample_conditional(&ctx.model, x, n, condition, scale, SeedStream::new(seed), &ctx.sampling())
        .map_err(Error::at(x))?;
    let bivariate = match &case {
        Some(c) => Some(bivariate_normalized(&ctx.model, c, &sample)?),
        None => None,
    };
    let norm = &sample.normalizers;
    let phi_used = match scale {
        NormScale::PlusPhi => fmt_opt(norm.phi(Sign::Plus)),
        NormScale::Star => fmt_f(norm.phi_star),
        NormScale::PerSign => format!("minus={} plus={}", fmt_opt(norm.phi(Sign::Minus)), fmt_opt(norm.phi(Sign::Plus))),
    };
    let mut csv = ctx.csv(Some(seed));
    csv.meta("x", fmt_f(x));
    csv.meta("psi", fmt_f(norm.psi_x));
    csv.meta("phi_scale", scale.name());
    csv.meta("phi_used", phi_used);
    csv.meta("condition", condition);
    csv.meta("proposals", sample.acceptance.proposals);
    csv.meta("acceptance_rate", fmt_f(sample.acceptance.acceptance_rate));
    let mut header = vec!["R", "T", "r_norm", "t_norm"];
    if bivariate.is_some() {
        header.extend(["x_norm", "y_norm"]);
    }
    csv.row(&header);
    for (i, (&(r, t), &(rn, tn))) in sample.raw.iter().zip(&sample.normalized).enumerate() {
        let mut cells = vec![fmt_f(r), fmt_f(t), fmt_f(rn), fmt_f(tn)];
        if let Some(b) = &bivariate {
            cells.extend([fmt_f(b[i].0), fmt_f(b[i].1)]);
        }
        csv.row(&cells);
    }
    ctx.emit(csv.into_string())?;
    Ok(EXIT_OK)
}

enum Limit {
    One(LimitLawOneSided),
    Two(LimitLawTwoSided),
}

impl Limit {
    fn from_ctx(ctx: &Ctx, condition: Condition) -> CliResult<Self> {
        let m = &ctx.model;
        match condition {
            Condition::RightSided => {
                Ok(Limit::One(LimitLawOneSided::new(m.shape_u.kappa(Sign::Plus), m.angular.tau(Sign::Plus))?))
            }
            Condition::Unrestricted => {
                if !m.is_two_sided() {
                    return Err(usage("unrestricted limit needs a two-sided model"));
                }
                let lim = mixture_limits(m)?;
                let kappa = [m.shape_u.kappa(Sign::Minus), m.shape_u.kappa(Sign::Plus)];
                let tau = [m.angular.tau(Sign::Minus), m.angular.tau(Sign::Plus)];
                Ok(Limit::Two(LimitLawTwoSided::new(kappa, tau, lim.p, lim.q, ctx.scaling(condition)?)?))
            }
        }
    }

    fn describe(&self, csv: &mut Csv) {
        match self {
            Limit::One(l) => {
                csv.meta("limit", "one_sided");
                csv.meta("kappa", fmt_f(l.kappa));
                csv.meta("tau", fmt_f(l.tau));
            }
            Limit::Two(l) => {
                csv.meta("limit", "two_sided");
                csv.meta("scaling", match l.scaling {
                    Scaling::PerSignNorming => "per_sign",
                    Scaling::StarNorming => "star",
                });
                csv.meta("p", format!("{} {}", fmt_f(l.p[0]), fmt_f(l.p[1])));
                csv.meta("q", format!("{} {}", fmt_f(l.q[0]), fmt_f(l.q[1])));
                csv.meta("sign_prob_plus", fmt_f(l.sign_law.prob_plus));
            }
        }
    }
}

fn limit_sample(mut ctx: Ctx) -> CliResult<i32> {
    let seed = ctx.seed()?;
    let n = count(ctx.args.n.unwrap_or(DEFAULT_N), "--n")?;
    let condition = ctx.condition()?;
    let case = ctx.case()?;
    if case.is_some() && condition == Condition::Unrestricted {
        return Err(usage("corollary pushforwards use the right-sided limit"));
    }
    ctx.param("n", n);
    ctx.param("condition", condition);
    if let Some(c) = &case {
        ctx.param("case", c.kind());
    }
    let limit = Limit::from_ctx(&ctx, condition)?;
    let stream = SeedStream::new(seed);
    let mut pairs = match &limit {
        Limit::One(l) => l.sample(n, stream),
        Limit::Two(l) => l.sample(n, stream),
    };
    let mut csv = ctx.csv(Some(seed));
    limit.describe(&mut csv);
    match &case {
        Some(c) => {
            pairs = pushforward_corollary(c, &pairs);
            csv.row(&["x1", "x2"]);
        }
        None => csv.row(&["r", "t"]),
    }
    for (a, b) in pairs {
        csv.row(&[fmt_f(a), fmt_f(b)]);
    }
    ctx.emit(csv.into_string())?;
    Ok(EXIT_OK)
}

fn density(mut ctx: Ctx) -> CliResult<i32> {
    let condition = ctx.condition()?;
    let m = count(ctx.args.n.unwrap_or(DEFAULT_DENSITY_GRID), "--n")?;
    if ctx.args.case.is_some() {
        return Err(usage("`density` evaluates the (r, t) limit; --case is not supported"));
    }
    ctx.param("grid_points", m);
    ctx.param("condition", condition);
    ctx.param("r_max", fmt_f(DENSITY_R_MAX));
    let limit = Limit::from_ctx(&ctx, condition)?;
    let (f, total): (Box<dyn Fn(f64, f64) -> f64>, f64) = match &limit {
        Limit::One(l) => {
            let l = *l;
            let k = l.kappa;
            let norm = density_normalization(|r, t| l.density(r, t), |r| condlim_core::limitlaw::one_sided_support(k, r))?;
            (Box::new(move |r, t| l.density(r, t)), norm.value)
        }
        Limit::Two(l) => {
            let l = *l;
            let norm = density_normalization(|r, t| l.density(r, t), |r| l.support(r))?;
            (Box::new(move |r, t| l.density(r, t)), norm.value)
        }
    };
    // The t-range covers the support at r_max.
    let (t_lo, t_hi) = match &limit {
        Limit::One(l) => (0.0, DENSITY_R_MAX.powf(1.0 / l.kappa)),
        Limit::Two(l) => l.support(DENSITY_R_MAX).iter().fold((0.0, 0.0), |(lo, hi), &(a, b)| (f64::min(lo, a), f64::max(hi, b))),
    };
    let mut csv = ctx.csv(None);
    limit.describe(&mut csv);
    csv.meta("normalization", fmt_f(total));
    csv.row(&["r", "t", "density"]);
    for i in 1..=m {
        let r = DENSITY_R_MAX * i as f64 / m as f64;
        for j in 0..m {
            // Cell midpoints avoid the t = 0 singularity when tau < 0.
            let t = t_lo + (t_hi - t_lo) * (j as f64 + 0.5) / m as f64;
            csv.row(&[fmt_f(r), fmt_f(t), fmt_f(f(r, t))]);
        }
    }
    ctx.emit(csv.into_string())?;
    Ok(EXIT_OK)
}

struct Threshold {
    name: &'static str,
    measured: f64,
    limit: f64,
    passed: bool,
}

fn verify(mut ctx: Ctx) -> CliResult<i32> {
    let seed = ctx.seed()?;
    let xs = match (&ctx.args.x, &ctx.args.x_grid) {
        (None, None) => match ctx.config.get("verify.x_grid") {
            Some(s) => parse_grid(s)?,
            None => vec![10.0, 25.0, 50.0, 100.0],
        },
        _ => ctx.x_values()?,
    };
    let n = count(ctx.args.n.unwrap_or(ctx.config.parse_or("verify.n", 50_000)?), "sample size")?;
    let ks_max: f64 = ctx.config.parse_or("verify.ks_max", 0.03)?;
    let noise: f64 = ctx.config.parse_or("verify.noise", 0.01)?;
    let tail_tol: f64 = ctx.config.parse_or("verify.tail_tol", 0.05)?;
    let chi2_min: Option<f64> = ctx.config.parse_opt("verify.chi2_p_min")?;
    let chi2_bins: usize = ctx.config.parse_or("verify.chi2_bins", 20)?;
    let condition = ctx.condition()?;
    let case = match ctx.case()? {
        Some(_) if condition == Condition::Unrestricted => {
            return Err(usage("corollary verification uses the right-sided condition"))
        }
        Some(c) => ReportCase::Corollary(c),
        None if condition == Condition::Unrestricted => ReportCase::Unrestricted(ctx.scaling(condition)?),
        None => ReportCase::RightSided,
    };
    ctx.param("x_grid", join(&xs));
    ctx.param("n", n);
    ctx.param("condition", condition);
    if let ReportCase::Corollary(c) = &case {
        ctx.param("case", c.kind());
    }
    ctx.require_valid()?;
    let opts = ReportOptions { sampling: ctx.sampling(), noise, chi2_bins };
    let report = convergence_report(&ctx.model, case, &xs, n, SeedStream::new(seed), &opts)?;
    let last = report.last();
    let mut checks = vec![
        Threshold { name: "ks_r_final", measured: last.ks_r, limit: ks_max, passed: last.ks_r <= ks_max },
        Threshold { name: "ks_t_final", measured: last.ks_t, limit: ks_max, passed: last.ks_t <= ks_max },
        Threshold {
            name: "ks_r_decreasing",
            measured: max_increase(report.rows.iter().map(|r| r.ks_r)),
            limit: noise,
            passed: report.ks_r_decreasing,
        },
        Threshold {
            name: "ks_t_decreasing",
            measured: max_increase(report.rows.iter().map(|r| r.ks_t)),
            limit: noise,
            passed: report.ks_t_decreasing,
        },
        Threshold {
            name: "tail_ratio_final",
            measured: (last.tail_ratio - 1.0).abs(),
            limit: tail_tol,
            passed: (last.tail_ratio - 1.0).abs() <= tail_tol,
        },
        Threshold {
            name: "tail_ratio_improving",
            measured: f64::from(u8::from(report.tail_ratio_improving)),
            limit: 1.0,
            passed: report.tail_ratio_improving,
        },
    ];
    if let (Some(min), Some(p)) = (chi2_min, last.chi2_p) {
        checks.push(Threshold { name: "chi2_p_final", measured: p, limit: min, passed: p >= min });
    }
    let all = checks.iter().all(|c| c.passed);

    let mut csv = ctx.csv(Some(seed));
    for c in &checks {
        csv.meta(
            &format!("threshold {}", c.name),
            format!("{} measured={} limit={}", if c.passed { "PASS" } else { "FAIL" }, fmt_f(c.measured), fmt_f(c.limit)),
        );
    }
    csv.meta("verdict", if all { "PASS" } else { "FAIL" });
    csv.row(&["x", "n", "ks_r", "ks_t", "chi2_p", "acceptance_rate", "tail_ratio"]);
    for r in &report.rows {
        csv.row(&[
            fmt_f(r.x),
            r.n.to_string(),
            fmt_f(r.ks_r),
            fmt_f(r.ks_t),
            fmt_opt(r.chi2_p),
            fmt_f(r.acceptance_rate),
            fmt_f(r.tail_ratio),
        ]);
    }
    ctx.emit(csv.into_string())?;
    for c in &checks {
        eprintln!(
            "{} {:<22} measured {:.6e}  limit {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.limit
        );
    }
    Ok(if all { EXIT_OK } else { EXIT_THRESHOLD })
}

fn max_increase(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| usage(format!("bad number `{p}` in verify.x_grid"))))
        .collect()
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
