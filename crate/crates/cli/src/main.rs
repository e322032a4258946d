use clap::{Parser, Subcommand, ValueEnum};
use pfg_core::arith::rat;
use pfg_core::climit::{convergence_check, free_kernel, ho_propagator};
use pfg_core::coeffring::ComplexVal;
use pfg_core::dynamics::{check_weyl, free_propagator, sm_transfer, weyl_pair};
use pfg_core::frontend::random::{qe_soundness, RandomConfig};
use pfg_core::frontend::{eliminate, eval, eval_normal_form, parse, Value};
use pfg_core::gauss::sum::Assignment;
use pfg_core::gauss::{gauss_brute_partitioned, gauss_closed, GaussValue};
use pfg_core::hilbert::{apply, compose, inner, GaussState, Ket, Kind, QuadForm, StateDescriptor};
use pfg_core::wick::{check_inner_correspondence, check_intertwining, random_admissible_state, random_transfer};
use pfg_core::{find_params, Backend, Error, GaussCoeff, GaussSumSpec, Mode, ParamSpec, Params, Tag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pfg", version, about = "Exact Gaussian sums, states and limits over a finite parameter tower")]
struct Cli {
    /// TOML file with m_base, k_mult, prime_search_limit, seed.
    #[arg(long)]
    params_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "extended")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "fp")]
    backend: BackendArg,
    /// Emit line-delimited JSON (the only output format; accepted for scripts that pass it).
    #[arg(long)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Extended,
    Strict,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Fp,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum TagArg {
    U,
    V,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    E,
    H,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum SumMethod {
    Brute,
    Closed,
    Both,
}

impl From<TagArg> for Tag {
    fn from(t: TagArg) -> Tag {
        match t {
            TagArg::U => Tag::U,
            TagArg::V => Tag::V,
        }
    }
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::E => Kind::Euclidean,
            KindArg::H => Kind::Hermitian,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the parameter tower.
    Params,
    /// Quadratic Gauss sum (1/|a|) sum_n e((a n^2 + 2 b n)/2M).
    GaussSum {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        b: i64,
        #[arg(long = "M")]
        m: u64,
        #[arg(long, value_enum, default_value = "v")]
        domain: TagArg,
        #[arg(long, value_enum, default_value = "both")]
        mode: SumMethod,
        /// Index chunk length for the parallel brute-force reduction.
        #[arg(long, default_value_t = 4096)]
        chunk: u64,
    },
    /// Formal inner product of two JSON state descriptors.
    Inner {
        #[arg(long)]
        state1: String,
        #[arg(long)]
        state2: String,
        #[arg(long, value_enum, default_value = "h")]
        kind: KindArg,
    },
    /// Apply the free propagator for integer time t.
    Evolve {
        #[arg(long, allow_hyphen_values = true)]
        t: i64,
        #[arg(long)]
        state: String,
    },
    /// Check UV = qVU on every position state.
    WeylCheck {
        #[arg(long, value_enum, default_value = "v")]
        domain: TagArg,
    },
    /// Transfer kernel with phase (A q^2 + 2B q r + C r^2)/2N_u composed with itself.
    SmCompose {
        #[arg(long = "A", allow_hyphen_values = true)]
        a: i64,
        #[arg(long = "B", allow_hyphen_values = true)]
        b: i64,
        #[arg(long = "C", allow_hyphen_values = true)]
        c: i64,
    },
    /// Wick correspondence of inner products and operator action on random admissible pairs.
    WickCheck {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, value_enum, default_value = "e")]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Finite pairings against their continuum value.
    Limit {
        #[arg(long = "A")]
        a: i64,
        #[arg(long = "B", allow_hyphen_values = true, default_value_t = 0.0)]
        b: f64,
        #[arg(long, value_enum, default_value = "e")]
        kind: KindArg,
        #[arg(long = "N-seq", value_delimiter = ',', default_value = "144,576,2304")]
        n_seq: Vec<u64>,
        #[arg(long)]
        quadrature: bool,
    },
    /// Harmonic-oscillator propagator kernel.
    Ho {
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
    },
    /// Quantifier elimination on an expression, or a random soundness sweep.
    Qe {
        #[arg(long, required_unless_present = "random")]
        expr: Option<String>,
        /// Comma-separated var=value pairs.
        #[arg(long, value_delimiter = ',')]
        assign: Vec<String>,
        /// Number of random expressions to check instead of --expr.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 100)]
        assignments: usize,
        #[arg(long, default_value_t = 3)]
        max_quantifiers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Outcome of a subcommand: JSON lines plus whether every check passed.
struct Output {
    lines: Vec<Json>,
    ok: bool,
}

impl Output {
    fn one(v: Json) -> Self {
        Output { lines: vec![v], ok: true }
    }

    fn check(v: Json, ok: bool) -> Self {
        Output { lines: vec![v], ok }
    }
}

fn load_params(path: Option<&PathBuf>) -> Result<Params, String> {
    let spec = match path {
        None => ParamSpec::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            toml::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
    };
    find_params(&spec).map_err(|e| e.to_string())
}

/// A descriptor given inline or as @path.
fn read_state(params: &Params, arg: &str) -> Result<GaussState, String> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => arg.to_string(),
    };
    let d: StateDescriptor = serde_json::from_str(&text).map_err(|e| format!("state descriptor: {e}"))?;
    GaussState::from_descriptor(params, &d).map_err(|e| e.to_string())
}

fn parse_assign(items: &[String]) -> Result<Assignment, String> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| format!("assignment {s:?}: expected var=value"))?;
            let v = v.trim().parse::<i64>().map_err(|e| format!("assignment {s:?}: {e}"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn complex_json(z: ComplexVal) -> Json {
    json!({ "re": z.re, "im": z.im })
}

fn value_json(v: Value) -> Json {
    match v {
        Value::Fp(x) => json!(x.0),
        Value::Complex(z) => complex_json(z.into()),
    }
}

fn coeff_json(params: &Params, c: &GaussCoeff) -> pfg_core::Result<Json> {
    Ok(json!({
        "normal_form": c.to_string(),
        "value_fp": c.to_fp(params)?.0,
        "value_complex": complex_json(c.to_complex(params)?),
    }))
}

fn gauss_sum(
    params: &Params,
    spec: GaussSumSpec,
    method: SumMethod,
    chunk: u64,
    mode: Mode,
) -> pfg_core::Result<Output> {
    let closed = match method {
        SumMethod::Brute => None,
        _ => Some(gauss_closed(params, &spec, mode)?),
    };
    let brute = match method {
        SumMethod::Closed => None,
        _ => Some(gauss_brute_partitioned(params, &spec, chunk)?),
    };
    let closed_fp = closed.as_ref().map(|c| c.to_fp(params)).transpose()?;
    let closed_c = closed.as_ref().map(|c| c.to_complex(params)).transpose()?;
    let (brute_fp, brute_c) = match brute {
        Some(GaussValue::Fp(x)) => (Some(x), None),
        Some(GaussValue::Complex(z)) => (None, Some(z)),
        None => (None, None),
    };
    let agree = match (method, brute) {
        (SumMethod::Both, Some(GaussValue::Fp(x))) => closed_fp == Some(x),
        (SumMethod::Both, Some(GaussValue::Complex(z))) => {
            let c = closed_c.expect("closed form computed").to_c64();
            (c - z.to_c64()).norm() <= 1e-9 * (spec.m as f64).sqrt().max(1.0)
        }
        _ => true,
    };
    let v = json!({
        "inputs": spec,
        "value_fp": closed_fp.or(brute_fp).map(|x| x.0),
        "value_complex": closed_c.or(brute_c).map(complex_json),
        "coeff_normal_form": closed.as_ref().map(|c| c.to_string()),
        "agree": agree,
    });
    Ok(Output::check(v, agree))
}

fn wick_check(params: &Params, pairs: usize, kind: Kind, seed: u64, mode: Mode) -> pfg_core::Result<Output> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let (mut inner_passed, mut inner_rejected) = (0usize, 0usize);
    while checks.len() < pairs {
        let s1 = random_admissible_state(&mut rng, params);
        let s2 = random_admissible_state(&mut rng, params);
        match check_inner_correspondence(params, &s1, &s2, kind, mode) {
            Ok(c) => {
                inner_passed += usize::from(c.passed);
                checks.push(json!({ "s1": s1.descriptor(), "s2": s2.descriptor(), "result": c }));
            }
            Err(Error::Unsupported(_) | Error::NonPeriodic(_)) => inner_rejected += 1,
            Err(e) => return Err(e),
        }
    }
    let (mut tw_passed, mut tw_checked, mut tw_rejected) = (0usize, 0usize, 0usize);
    while tw_checked < pairs {
        let op = random_transfer(&mut rng, params);
        let s = random_admissible_state(&mut rng, params);
        match check_intertwining(params, &op, &s, mode) {
            Ok(ok) => {
                tw_checked += 1;
                tw_passed += usize::from(ok);
            }
            Err(Error::Unsupported(_) | Error::NonPeriodic(_) | Error::InadmissibleResult(_) | Error::BadCoset(_)) => tw_rejected += 1,
            Err(e) => return Err(e),
        }
    }
    let ok = inner_passed == pairs && tw_passed == pairs;
    let v = json!({
        "kind": kind,
        "pairs": pairs,
        "seed": seed,
        "inner_passed": inner_passed,
        "inner_rejected": inner_rejected,
        "intertwining_checked": tw_checked,
        "intertwining_passed": tw_passed,
        "intertwining_rejected": tw_rejected,
        "passed": ok,
        "checks": checks,
    });
    Ok(Output::check(v, ok))
}

fn qe_single(
    params: &Params,
    text: &str,
    assign: &[String],
    mode: Mode,
    backend: Backend,
) -> Result<Output, String> {
    let e = parse(text).map_err(|e| e.to_string())?;
    let nf = eliminate(&e, params, mode).map_err(|e| e.to_string())?;
    let mut v = json!({
        "input": e.to_string(),
        "quantifiers": e.quantifier_count(),
        "normal_form": nf.to_string(),
        "quantifier_free": true,
    });
    let mut ok = true;
    if !assign.is_empty() || e.free_vars().is_empty() {
        let a = parse_assign(assign)?;
        let lhs = eval(&e, params, &a, backend).map_err(|e| e.to_string())?;
        let rhs = eval_normal_form(&nf, params, &a, backend).map_err(|e| e.to_string())?;
        let agree = match (lhs, rhs) {
            (Value::Fp(x), Value::Fp(y)) => x == y,
            (Value::Complex(x), Value::Complex(y)) => (x - y).norm() <= 1e-9 * (1.0 + x.norm()),
            _ => false,
        };
        ok = agree;
        v["eval_expr"] = value_json(lhs);
        v["eval_normal_form"] = value_json(rhs);
        v["agree"] = json!(agree);
    }
    Ok(Output::check(v, ok))
}

fn run(cli: &Cli) -> Result<Output, String> {
    let params = load_params(cli.params_file.as_ref())?;
    let mode = match cli.mode {
        ModeArg::Extended => Mode::Extended,
        ModeArg::Strict => Mode::Strict,
    };
    let backend = match cli.backend {
        BackendArg::Fp => Backend::Fp,
        BackendArg::Complex => Backend::Complex,
    };
    let core = |r: pfg_core::Result<Output>| r.map_err(|e| e.to_string());
    match &cli.cmd {
        Cmd::Params => Ok(Output::one(json!(params))),
        Cmd::GaussSum { a, b, m, domain, mode: method, chunk } => {
            let spec = GaussSumSpec::new(*a, *b, *m).with_domain((*domain).into()).with_backend(backend);
            core(gauss_sum(&params, spec, *method, *chunk, mode))
        }
        Cmd::Inner { state1, state2, kind } => {
            let s1 = read_state(&params, state1)?;
            let s2 = read_state(&params, state2)?;
            core((|| {
                let c = inner(&params, &Ket::Gauss(s1), &Ket::Gauss(s2), (*kind).into(), mode)?;
                let mut v = coeff_json(&params, &c)?;
                v["kind"] = json!(Kind::from(*kind));
                Ok(Output::one(v))
            })())
        }
        Cmd::Evolve { t, state } => {
            let s = read_state(&params, state)?;
            core((|| {
                let op = free_propagator(&params, *t, s.domain.tag)?;
                let out = apply(&params, &op, &Ket::Gauss(s), mode)?;
                Ok(Output::one(json!({ "t": t, "state": out.descriptor() })))
            })())
        }
        Cmd::WeylCheck { domain } => core((|| {
            let rep = check_weyl(&params, &weyl_pair(&params, (*domain).into()), mode)?;
            let ok = rep.passed;
            Ok(Output::check(json!(rep), ok))
        })()),
        Cmd::SmCompose { a, b, c } => core((|| {
            let t = sm_transfer(&params, QuadForm::new(*a, *b, *c))?;
            let tt = compose(&params, &t, &t, mode)?;
            let render = |op: &pfg_core::hilbert::GaussOperator| {
                pfg_core::frontend::NormalForm { tag: Tag::U, terms: vec![op.kernel.clone()] }.to_string()
            };
            Ok(Output::one(json!({
                "form": [a, b, c],
                "transfer": render(&t),
                "composed": render(&tt),
            })))
        })()),
        Cmd::WickCheck { pairs, kind, seed } => core(wick_check(&params, *pairs, (*kind).into(), *seed, mode)),
        Cmd::Limit { a, b, kind, n_seq, quadrature } => core((|| {
            let rep = convergence_check(*a, *b, (*kind).into(), n_seq, *quadrature)?;
            Ok(Output::one(json!(rep)))
        })()),
        Cmd::Ho { omega, t, x, x0, hbar } => core((|| {
            let h = ho_propagator(*omega, *t, *hbar)?;
            Ok(Output::one(json!({
                "omega": omega, "t": t, "x": x, "x0": x0, "hbar": hbar,
                "kernel": complex_json(h.kernel(*x, *x0).into()),
                "free_kernel": complex_json(free_kernel(*t, *hbar, *x, *x0).into()),
            })))
        })()),
        Cmd::Qe { expr: Some(text), assign, random: None, .. } => qe_single(&params, text, assign, mode, backend),
        Cmd::Qe { random, assignments, max_quantifiers, seed, .. } => {
            let count = random.unwrap_or(0);
            let cfg = RandomConfig {
                max_quantifiers: *max_quantifiers,
                radicands: [2i64, 3, 6].into_iter().filter(|&r| params.sqrt_rational(&rat(r, 1)).is_ok()).collect(),
                ..RandomConfig::default()
            };
            if cfg.radicands.is_empty() {
                return Err("no radicand in {2, 3, 6} has a square root mod p".into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            core((|| {
                let rep = qe_soundness(&mut rng, &params, &cfg, count, *assignments)?;
                let ok = rep.passed();
                Ok(Output::check(json!(rep), ok))
            })())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = cli.json;
    match run(&cli) {
        Ok(out) => {
            for line in &out.lines {
                println!("{line}");
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(msg) => {
            println!("{}", json!({ "error": msg }));
            ExitCode::from(1)
        }
    }
}
