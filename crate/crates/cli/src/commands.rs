use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use pacman_core::antichain::{
    self, antichain_probability, lym_sum, max_weight_antichain, parse_configurations,
    set_probability, sperner_bound_iid, sperner_bound_varied, Antichain, BernoulliProfile,
    Configuration,
};
use pacman_core::concentration::{
    self, exact_q_discrete, is_small_discrete, monte_carlo_report, ConcentrationReport,
    DEFAULT_PROBES,
};
use pacman_core::decomposition::{self, beta_plus_by_f, decompose, find_positive_p, gap_report};
use pacman_core::lattice::{parse_stencil, split_potential, verify_split};
use pacman_core::measure::{parse_empirical, parse_measure};
use pacman_core::{Error, ProbabilityMeasure};

use crate::manifest::Manifest;
use crate::{
    AntichainCommand, BetaScanArgs, Command, ConcentrationArgs, DecomposeArgs, DistArgs,
    LatticeArgs, ProfileArgs,
};

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "PACMAN_SEED";

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, msg: String },
    Core(Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, msg } => write!(f, "{}: {msg}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 1 I/O, 2 validation, 3 antichain violation, 4 margin violation,
    /// 5 budget exceeded.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::NotAntichain { .. } => 3,
                Error::MarginViolation(_) => 4,
                Error::TooLarge(_) => 5,
                _ => 2,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::BetaScan(a) => cmd_beta_scan(a),
        Command::Antichain { action } => cmd_antichain(action),
        Command::Concentration(a) => cmd_concentration(a),
        Command::Lattice(a) => cmd_lattice(a),
    }
}

fn read_input(manifest: &mut Manifest, path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    manifest.input(path, &bytes);
    String::from_utf8(bytes).map_err(|_| CliError::Io {
        path: path.to_path_buf(),
        msg: "not valid UTF-8".into(),
    })
}

/// Prefixes parse errors with the file they came from.
fn in_file(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Parse { line, msg } => CliError::Core(Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        }),
        other => CliError::Core(other),
    }
}

fn load_measure(manifest: &mut Manifest, dist: &DistArgs) -> Result<ProbabilityMeasure> {
    let text = read_input(manifest, &dist.dist)?;
    if dist.empirical {
        Ok(parse_empirical(&text)
            .map_err(in_file(&dist.dist))?
            .to_measure()?)
    } else {
        parse_measure(&text).map_err(in_file(&dist.dist))
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            msg: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!("{SEED_ENV}='{v}' is not a non-negative integer"))
        }),
        Err(_) => Ok(0),
    }
}

/// `p` given on the command line, or found by the positive-gap search.
fn resolve_p(mu: &ProbabilityMeasure, p: &str) -> Result<f64> {
    if p == "auto" {
        return Ok(find_positive_p(mu)?.p);
    }
    let v: f64 = p
        .parse()
        .map_err(|_| CliError::Usage(format!("--p must be a number or 'auto', got '{p}'")))?;
    decomposition::validate_p(v)?;
    Ok(v)
}

fn cmd_decompose(a: DecomposeArgs) -> Result<()> {
    let mut m = Manifest::new("decompose");
    m.flag("dist", a.dist.dist.display());
    m.flag("empirical", a.dist.empirical);
    m.flag("p", &a.p);
    m.flag("variant", format!("{:?}", a.variant).to_lowercase());
    m.flag("grid", a.grid);
    let mu = load_measure(&mut m, &a.dist)?;
    let p = resolve_p(&mu, &a.p)?;
    let d = decompose(&mu, p, a.variant.into())?;
    let r = gap_report(&mu, p)?;
    let marg = decomposition::marginals(&d, &mu)?;
    let summary = format!(
        "# p={p}\n# gap beta_plus={} beta_sharp={} chasing_sup={} T1={} T2={} halftime={} diameter={}\n# marginal_residual={}\n",
        r.beta_plus, r.beta_sharp, r.chasing_sup, r.t1, r.t2, r.halftime_lower_bound, r.diameter,
        marg.max_cdf_residual
    );
    let text = m.render() + &summary + &decomposition::decomposition_csv(&d, a.grid)?;
    if a.out.is_some() {
        print!("{summary}");
    }
    write_output(a.out.as_deref(), &text)
}

fn cmd_beta_scan(a: BetaScanArgs) -> Result<()> {
    let mut m = Manifest::new("beta-scan");
    m.flag("dist", a.dist.dist.display());
    m.flag("empirical", a.dist.empirical);
    let ps: Vec<f64> = match &a.p_grid {
        Some(g) => {
            m.flag(
                "p-grid",
                g.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            );
            g.clone()
        }
        None => {
            m.flag("steps", a.steps);
            (1..=a.steps)
                .map(|k| k as f64 / (a.steps + 1) as f64)
                .collect()
        }
    };
    let mu = load_measure(&mut m, &a.dist)?;
    if mu.is_degenerate() {
        return Err(Error::DegenerateMeasure.into());
    }
    let g = mu.quantile();
    let mut text = m.render() + "p,beta_plus,beta_plus_cdf,halftime_bound\n";
    for p in ps {
        let b = decomposition::beta_plus(&mu, p)?;
        let bf = beta_plus_by_f(&mu, p)?;
        let h = decomposition::halftime_lower_bound(&g, p)?;
        text.push_str(&format!("{p},{b},{bf},{h}\n"));
    }
    write_output(a.out.as_deref(), &text)
}

fn load_blocks(m: &mut Manifest, input: &Path) -> Result<Vec<Vec<Configuration>>> {
    let text = read_input(m, input)?;
    parse_configurations(&text).map_err(in_file(input))
}

fn antichain_of(block: Vec<Configuration>) -> Result<Antichain> {
    let n = block[0].len();
    Ok(Antichain::with_n(block, n)?)
}

/// Profile from `--p` or `--profile`, for dimension `n`, and whether it is
/// identically distributed.
fn profile_for(args: &ProfileArgs, n: usize, m: &mut Manifest) -> Result<(BernoulliProfile, bool)> {
    match (&args.p, &args.profile) {
        (Some(p), None) => {
            m.flag("p", p);
            Ok((BernoulliProfile::iid(n, *p)?, true))
        }
        (None, Some(ps)) => {
            m.flag(
                "profile",
                ps.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            );
            if ps.len() != n {
                return Err(Error::MixedDimensions.into());
            }
            let iid = ps.iter().all(|&p| p == ps[0]);
            Ok((BernoulliProfile::new(ps.clone())?, iid))
        }
        _ => Err(CliError::Usage(
            "give exactly one of --p and --profile".into(),
        )),
    }
}

fn bound_of(profile: &BernoulliProfile, iid: bool) -> f64 {
    if iid {
        sperner_bound_iid(profile.len(), profile.ps()[0])
    } else {
        sperner_bound_varied(profile)
    }
}

fn cmd_antichain(action: AntichainCommand) -> Result<()> {
    match action {
        AntichainCommand::Check { input, out } => {
            let mut m = Manifest::new("antichain check");
            m.flag("input", input.display());
            let blocks = load_blocks(&mut m, &input)?;
            let mut text = m.render() + "antichain_id,size,N,K,antichain\n";
            let mut failure = None;
            for (i, block) in blocks.into_iter().enumerate() {
                let n = block[0].len();
                let size = block.len();
                match Antichain::with_n(block, n) {
                    Ok(a) => {
                        text.push_str(&format!("{},{},{},{},true\n", i + 1, a.len(), n, a.k()))
                    }
                    Err(e @ Error::NotAntichain { .. }) => {
                        text.push_str(&format!("{},{size},{n},,false\n", i + 1));
                        failure.get_or_insert((i + 1, e));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            write_output(out.as_deref(), &text)?;
            match failure {
                Some((id, e)) => {
                    eprintln!("antichain {id}: {e}");
                    Err(e.into())
                }
                None => Ok(()),
            }
        }
        AntichainCommand::Lym { input, out } => {
            let mut m = Manifest::new("antichain lym");
            m.flag("input", input.display());
            let blocks = load_blocks(&mut m, &input)?;
            let mut text = m.render() + "antichain_id,size,lym_sum\n";
            for (i, block) in blocks.into_iter().enumerate() {
                let a = antichain_of(block)?;
                text.push_str(&format!("{},{},{}\n", i + 1, a.len(), lym_sum(&a)?));
            }
            write_output(out.as_deref(), &text)
        }
        AntichainCommand::Prob {
            input,
            profile,
            raw,
            out,
        } => {
            let mut m = Manifest::new("antichain prob");
            m.flag("input", input.display());
            m.flag("raw", raw);
            let blocks = load_blocks(&mut m, &input)?;
            let (prof, _) = profile_for(&profile, blocks[0][0].len(), &mut m)?;
            let mut text = m.render() + "antichain_id,probability\n";
            for (i, block) in blocks.into_iter().enumerate() {
                let prob = if raw {
                    set_probability(&block, &prof)?
                } else {
                    antichain_probability(&antichain_of(block)?, &prof)?
                };
                text.push_str(&format!("{},{prob}\n", i + 1));
            }
            write_output(out.as_deref(), &text)
        }
        AntichainCommand::Max {
            n,
            profile,
            members,
            out,
        } => {
            let mut m = Manifest::new("antichain max");
            m.flag("N", n);
            m.flag("members", members);
            if n == 0 {
                return Err(CliError::Usage("N must be at least 1".into()));
            }
            if n > antichain::MAX_FLOW_N {
                return Err(Error::TooLarge(format!(
                    "max-weight antichain supports N <= {}, got {n}",
                    antichain::MAX_FLOW_N
                ))
                .into());
            }
            let (prof, iid) = profile_for(&profile, n, &mut m)?;
            let (a, w) = max_weight_antichain(&prof)?;
            let bound = bound_of(&prof, iid);
            let mut text = m.render() + "N,weight,size,bound,ok\n";
            text.push_str(&format!("{n},{w},{},{bound},{}\n", a.len(), w <= bound));
            if members {
                text.push_str("# members\n");
                for c in a.members() {
                    text.push_str(&format!("{c}\n"));
                }
            }
            write_output(out.as_deref(), &text)
        }
        AntichainCommand::Bounds {
            input,
            profile,
            out,
        } => {
            let mut m = Manifest::new("antichain bounds");
            m.flag("input", input.display());
            let blocks = load_blocks(&mut m, &input)?;
            let (prof, iid) = profile_for(&profile, blocks[0][0].len(), &mut m)?;
            let bound = bound_of(&prof, iid);
            let mut text = m.render() + "antichain_id,probability,bound,ok\n";
            for (i, block) in blocks.into_iter().enumerate() {
                let prob = antichain_probability(&antichain_of(block)?, &prof)?;
                text.push_str(&format!("{},{prob},{bound},{}\n", i + 1, prob <= bound));
            }
            write_output(out.as_deref(), &text)
        }
    }
}

fn cmd_concentration(a: ConcentrationArgs) -> Result<()> {
    let mut m = Manifest::new("concentration");
    m.flag("config", a.config.display());
    let text = read_input(&mut m, &a.config)?;
    let cfg = concentration::parse_config(&text).map_err(in_file(&a.config))?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let files = cfg.coordinate_files().map_err(in_file(&a.config))?;
    let mut mus = Vec::with_capacity(files.len());
    let mut loaded: Vec<(String, ProbabilityMeasure)> = Vec::new();
    for f in &files {
        // each distinct file is read (and digested) once
        if let Some((_, mu)) = loaded.iter().find(|(g, _)| g == f) {
            mus.push(mu.clone());
            continue;
        }
        let path = base.join(f);
        let mu = parse_measure(&read_input(&mut m, &path)?).map_err(in_file(&path))?;
        loaded.push((f.clone(), mu.clone()));
        mus.push(mu);
    }
    let seed = resolve_seed(a.seed, cfg.seed)?;
    m.seed(seed);
    let phi = cfg.gap_function()?;
    let lo = mus
        .iter()
        .map(|mu| mu.support().0)
        .fold(f64::INFINITY, f64::min);
    let hi = mus
        .iter()
        .map(|mu| mu.support().1)
        .fold(f64::NEG_INFINITY, f64::max);
    let cert = phi.certify(mus.len(), lo, hi, DEFAULT_PROBES, seed);
    let mut report: ConcentrationReport =
        monte_carlo_report(&phi, &mus, &cfg.margins, cfg.samples, seed)?;
    if is_small_discrete(&mus) {
        report.exact_q = Some(exact_q_discrete(&phi.phi, &mus, phi.epsilon)?);
    }
    if !cert.passed() {
        log::warn!(
            "gap condition failed on {} of {} probes (smallest gap {})",
            cert.violations,
            cert.probes,
            cert.min_gap
        );
    }
    let out = format!(
        "{}# gap_check probes={} violations={} min_gap={}\n# within_bound={}\n{}\n{}\n",
        m.render(),
        cert.probes,
        cert.violations,
        cert.min_gap,
        report.within_bound(),
        ConcentrationReport::CSV_HEADER,
        report.csv_row()
    );
    write_output(a.out.as_deref(), &out)
}

fn parse_box(s: &str) -> Result<Vec<usize>> {
    s.split(['x', ','])
        .map(|t| t.trim().parse::<usize>().ok().filter(|&n| n > 0))
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| CliError::Usage(format!("--box must look like 32x32, got '{s}'")))
}

fn cmd_lattice(a: LatticeArgs) -> Result<()> {
    let mut m = Manifest::new("lattice");
    m.flag("dist", a.dist.dist.display());
    m.flag("empirical", a.dist.empirical);
    m.flag("p", &a.p);
    m.flag("stencil", a.stencil.display());
    m.flag("box", &a.box_dims);
    if let Some(v) = a.m {
        m.flag("m", v);
    }
    let dims = parse_box(&a.box_dims)?;
    let mu = load_measure(&mut m, &a.dist)?;
    let stencil_text = read_input(&mut m, &a.stencil)?;
    let profile = parse_stencil(&stencil_text).map_err(in_file(&a.stencil))?;
    let seed = resolve_seed(a.seed, None)?;
    m.seed(seed);
    let p = resolve_p(&mu, &a.p)?;
    let top = a.m.unwrap_or(mu.support().1);
    let split = split_potential(&mu, p, top, &profile, &dims, seed)?;
    let r = verify_split(&split, &mu, 1e-9);
    let text = format!(
        "{}# verify passed={} background=[{},{}] delta=[{},{}] reconstruction_error={} ks={} ks_threshold={}\n{}",
        m.render(),
        r.passed(),
        r.min_background,
        r.max_background,
        r.min_delta,
        r.max_delta,
        r.reconstruction_error,
        r.ks,
        r.ks_threshold,
        split.to_csv()
    );
    write_output(a.out.as_deref(), &text)?;
    match r.violations.into_iter().next() {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
