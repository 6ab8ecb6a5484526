use crate::{Cli, Command, Format};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use shifted_yangian::cartan::CartanData;
use shifted_yangian::factorize::standard_factorize;
use shifted_yangian::lweight::LWeight;
use shifted_yangian::modules_sl2::{level_dims, make_explicit, make_simple, make_verma, make_weyl, verify_relations, Explicit, Key, Module};
use shifted_yangian::qchar::{jordan_holder_sl2, qc_product, Family};
use shifted_yangian::ratfun::LinRat;
use shifted_yangian::rmatrix::{check_ybe, rhat_findim, rhat_fund_negative_poly};
use shifted_yangian::truncation::{enumerate_truncation_candidates_sl2, fund_ratios, gklo_action, sbar_map, truncation_check, TruncatablePair};
use shifted_yangian::{fmt_q, parse_q, Q};
use std::fmt::Display;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Compute(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn input<E: Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn compute<E: Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

/// A finished report: JSON document, text rendering, verdict.
struct Report {
    json: Map<String, Value>,
    text: Vec<String>,
    ok: bool,
}

impl Report {
    fn new(command: &str) -> Self {
        let mut json = Map::new();
        json.insert("sch".into(), json!(1));
        json.insert("command".into(), json!(command));
        Report { json, text: Vec::new(), ok: true }
    }

    fn set(&mut self, key: &str, v: Value) {
        self.json.insert(key.into(), v);
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    fn verdict(&mut self, ok: bool) {
        self.ok &= ok;
        self.set("pass", json!(self.ok));
    }

    fn render(&self, format: Format) -> String {
        match format {
            // serde_json's default map is ordered, so key order is canonical
            Format::Json => serde_json::to_string_pretty(&Value::Object(self.json.clone())).expect("JSON values serialize") + "\n",
            Format::Text => self.text.iter().map(|l| format!("{l}\n")).collect(),
        }
    }
}

fn q_json(x: &Q) -> Value {
    json!(fmt_q(x))
}

fn key_str(k: &Key) -> String {
    let parts: Vec<String> = k.iter().map(|i| i.to_string()).collect();
    format!("v({})", parts.join(","))
}

fn parse_rat(s: &str) -> Result<Q> {
    parse_q(s).ok_or_else(|| CliError::Input(format!("not a rational number: {s:?}")))
}

fn parse_linrat(s: &str) -> Result<LinRat> {
    LinRat::parse(s).map_err(input)
}

fn explicit(desc: &str, depth: usize) -> Result<Explicit> {
    let fam: Family = desc.parse().map_err(input)?;
    make_explicit(fam, depth).map_err(input)
}

/// `Verma(e)`, `Simple(e)`, `Weyl(r|s)` or a family name.
fn module_from_desc(desc: &str, depth: usize, cap: usize) -> Result<Box<dyn Module>> {
    let desc = desc.trim();
    let arg = |name: &str| desc.strip_prefix(name).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')'));
    if let Some(e) = arg("Verma") {
        return Ok(Box::new(make_verma(&parse_linrat(e)?, depth, cap)));
    }
    if let Some(e) = arg("Simple") {
        return Ok(Box::new(make_simple(&parse_linrat(e)?, depth).map_err(compute)?));
    }
    if let Some(rs) = arg("Weyl") {
        let (r, s) = rs.split_once('|').ok_or_else(|| CliError::Input("Weyl takes \"r|s\"".into()))?;
        return Ok(Box::new(make_weyl(&parse_linrat(r)?, &parse_linrat(s)?, depth).map_err(input)?));
    }
    Ok(Box::new(explicit(desc, depth)?))
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let depth = cli.depth as usize;
    let order = cli.order.unwrap_or(2 * depth as i64);
    if order < depth as i64 {
        return Err(CliError::Input(format!("--order {order} is below --depth {depth}")));
    }
    let mut emit = None;
    let report = match &cli.command {
        Command::Factorize { e } => factorize(e)?,
        Command::Qc { qc, cartan } => qc_cmd(qc, cartan, depth)?,
        Command::Jh { qc } => jh(qc, depth)?,
        Command::Rmatrix { left, right, emit: path } => {
            emit = path.clone();
            rmatrix(left, right, depth)?
        }
        Command::Verify { module, nmax, cap } => verify(module, *nmax, *cap, depth)?,
        Command::Truncate { s } => truncate(s, depth, order)?,
        Command::Sbar { cartan, s } => sbar(cartan, s)?,
        Command::Ybe { cu, cv, module, samples } => ybe(cu, cv, module, *samples, cli.seed, depth)?,
    };
    let out = report.render(cli.format);
    if let Some(path) = emit {
        std::fs::write(path, report.render(Format::Json))?;
    }
    match &cli.output {
        Some(path) => std::fs::write(path, &out)?,
        None => print!("{out}"),
    }
    Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn factorize(e: &str) -> Result<Report> {
    let e = parse_linrat(e)?;
    let f = standard_factorize(&e);
    let mut r = Report::new("factorize");
    r.set("input", json!(e.to_string()));
    r.set("positive", Value::Array(f.positive.iter().map(q_json).collect()));
    r.set("negative", Value::Array(f.negative.iter().map(q_json).collect()));
    r.set("kr_pairs", Value::Array(f.kr_pairs.iter().map(|(y, z)| json!([fmt_q(y), fmt_q(z)])).collect()));
    r.line(format!("e = {e}"));
    r.line(format!("{f}"));
    let back = f.reassemble() == e;
    r.line(format!("reassembles: {back}"));
    r.verdict(back);
    Ok(r)
}

fn qc_cmd(expr: &str, cartan: &str, depth: usize) -> Result<Report> {
    let cd = CartanData::new(cartan).map_err(input)?;
    let x = qc_product(&cd, expr, depth).map_err(input)?;
    let mut r = Report::new("qc");
    r.set("type", json!(cartan));
    r.set("depth", json!(depth));
    r.set("top", json!(x.top.to_string()));
    let terms: Vec<Value> = x.terms.iter().map(|(m, k)| json!({ "mono": m.to_string(), "mult": k })).collect();
    r.set("terms", Value::Array(terms));
    r.line(format!("qc({expr}) to depth {depth}, {} terms", x.terms.len()));
    r.line(x.to_string());
    r.verdict(true);
    Ok(r)
}

fn jh(expr: &str, depth: usize) -> Result<Report> {
    let x = qc_product(&CartanData::sl2(), expr, depth).map_err(input)?;
    let classes = jordan_holder_sl2(&x).map_err(compute)?;
    let mut r = Report::new("jh");
    r.set("depth", json!(depth));
    let list: Vec<Value> = classes.iter().map(|(e, m)| json!({ "class": e.to_string(), "mult": m })).collect();
    r.set("classes", Value::Array(list));
    r.line(format!("{} class(es) in qc({expr}) at depth {depth}", classes.len()));
    for (e, m) in &classes {
        r.line(format!("  L({e}) x {m}"));
    }
    r.verdict(true);
    Ok(r)
}

fn rmatrix(left: &str, right: &str, depth: usize) -> Result<Report> {
    let lf: Family = left.parse().map_err(input)?;
    let mut r = Report::new("rmatrix");
    r.set("left", json!(left));
    r.set("right", json!(right));
    r.set("variable", json!("u"));
    if let (Family::N(0, c), Ok(Family::Lminus(_))) = (&lf, right.parse::<Family>()) {
        let w = explicit(right, depth)?;
        // N(c)(u) = N(c + u)
        let rp = rhat_fund_negative_poly(&w).map_err(compute)?;
        let t: Vec<Vec<_>> = rp.t.iter().map(|row| row.iter().map(|m| m.at_offset(c)).collect()).collect();
        let mut entries = Vec::new();
        r.line(format!("R(e_j ⊗ w) = Σ_i t_ij(w) ⊗ e_i on N({}) ⊗ {right}, exact below level {}", fmt_q(c), rp.valid));
        for (col, key) in rp.keys.iter().enumerate() {
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let m = &t[i][j];
                let image: Vec<(String, String)> = (0..m.rows).filter(|&row| !m.get(row, col).is_zero()).map(|row| (key_str(&rp.keys[row]), m.get(row, col).to_string())).collect();
                if w.level(key) < rp.valid {
                    let shown: Vec<String> = image.iter().map(|(k, p)| format!("({p}) {k}")).collect();
                    r.line(format!("  t{}{}({}) = {}", i + 1, j + 1, key_str(key), if shown.is_empty() { "0".into() } else { shown.join(" + ") }));
                }
                let image: Map<String, Value> = image.into_iter().map(|(k, p)| (k, json!(p))).collect();
                entries.push(json!({ "i": i + 1, "j": j + 1, "w": key_str(key), "image": image }));
            }
        }
        r.set("kind", json!("fundamental"));
        r.set("valid_levels", json!(rp.valid));
        r.set("entries", Value::Array(entries));
        r.verdict(true);
        return Ok(r);
    }
    let u = make_explicit(lf, depth).map_err(input)?;
    let v = explicit(right, depth)?;
    if u.is_truncated() || v.is_truncated() {
        return Err(CliError::Input("need N(c) ⊗ Lminus(b) or two finite-dimensional modules".into()));
    }
    let fr = rhat_findim(&u, &v).map_err(compute)?;
    let mut levels = Vec::new();
    for (k, block) in fr.blocks.iter().enumerate() {
        let src: Vec<String> = fr.src[k].iter().map(key_str).collect();
        let tgt: Vec<String> = fr.tgt[k].iter().map(key_str).collect();
        let n = src.len();
        let rows: Vec<Value> = (0..n).map(|i| Value::Array((0..n).map(|j| json!(block[i * n + j].to_string())).collect())).collect();
        r.line(format!("level {k}: {n}x{n}"));
        for row in &rows {
            r.line(format!("  {row}"));
        }
        levels.push(json!({ "level": k, "source": src, "target": tgt, "matrix": rows }));
    }
    r.set("kind", json!("finite"));
    r.set("levels", Value::Array(levels));
    r.verdict(true);
    Ok(r)
}

fn verify(desc: &str, nmax: i64, cap: usize, depth: usize) -> Result<Report> {
    let m = module_from_desc(desc, depth, cap)?;
    let rep = verify_relations(&*m, nmax);
    let mut r = Report::new("verify");
    r.set("module", json!(m.label()));
    r.set("depth", json!(depth));
    r.set("nmax", json!(nmax));
    r.set("dims", json!(level_dims(&*m)));
    r.set("checked", json!(rep.checked));
    r.set("skipped", json!(rep.skipped));
    r.set("violations", Value::Array(rep.violations.iter().map(|v| json!(v.to_string())).collect()));
    r.line(format!("{}: {rep}", m.label()));
    r.verdict(rep.is_ok());
    Ok(r)
}

fn truncate(s: &str, depth: usize, order: i64) -> Result<Report> {
    let s = parse_linrat(s)?;
    if !s.is_poly() {
        return Err(CliError::Input(format!("s = {s} is not a polynomial")));
    }
    let w = make_simple(&s.inv(), depth).map_err(compute)?;
    let rep = truncation_check(&s, &w, order).map_err(compute)?;
    let pair = TruncatablePair::sl2(-s.degree(), s.shift(&Q::from_integer(1.into()))).map_err(compute)?;
    let cands = enumerate_truncation_candidates_sl2(&pair).map_err(compute)?;
    let g = gklo_action(&pair, &w, order).map_err(compute)?.g;
    let realized: Vec<String> = cands.iter().filter(|c| g.agrees_with(&shifted_yangian::ratfun::Series::from_poly(c, order))).map(|c| c.to_string()).collect();
    let mut r = Report::new("truncate");
    r.set("s", json!(s.to_string()));
    r.set("pair", json!(pair.to_string()));
    r.set("depth", json!(depth));
    r.set("order", json!(order));
    r.set("levels", json!(rep.levels));
    r.set("failures", json!(rep.failures));
    r.set("candidates", Value::Array(cands.iter().map(|c| json!(c.to_string())).collect()));
    r.set("realized_g", json!(realized));
    r.line(format!("L(1/({s})) as truncation of {pair}: {rep}"));
    r.line(format!("candidates for g: {}", cands.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")));
    r.verdict(rep.is_ok() && !realized.is_empty());
    Ok(r)
}

fn sbar(cartan: &str, s: &str) -> Result<Report> {
    let cd = CartanData::new(cartan).map_err(input)?;
    let s = s.trim();
    let sw = match s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        Some(list) => LWeight::from_comps(list.split(';').map(parse_linrat).collect::<Result<_>>()?),
        None => LWeight::parse(&cd, s).map_err(input)?,
    };
    if sw.rank() != cd.rank() {
        return Err(CliError::Input(format!("{} components for rank {}", sw.rank(), cd.rank())));
    }
    let ratios = fund_ratios(&cd).ok_or_else(|| CliError::Input(format!("no shipped fundamental data for {cartan}")))?;
    let bar = sbar_map(&cd, &ratios, &sw).map_err(compute)?;
    let mut r = Report::new("sbar");
    r.set("type", json!(cartan));
    r.set("s", Value::Array(sw.comps().iter().map(|c| json!(c.to_string())).collect()));
    r.set("sbar", Value::Array(bar.comps().iter().map(|c| json!(c.to_string())).collect()));
    r.set("in_d", json!(bar.in_monoid_d()));
    r.line(format!("s = {sw}"));
    r.line(format!("s̄ = {bar}"));
    r.verdict(true);
    Ok(r)
}

fn ybe(cu: &str, cv: &str, module: &str, samples: usize, seed: u64, depth: usize) -> Result<Report> {
    let (cu, cv) = (parse_rat(cu)?, parse_rat(cv)?);
    let w = explicit(module, depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // odd prime denominators stay off the integer pole lattice
    let pts: Vec<(Q, Q)> = (0..samples)
        .map(|_| (Q::new(rng.gen_range(-40..=40).into(), 7.into()), Q::new(rng.gen_range(-40..=40).into(), 11.into())))
        .collect();
    let rep = check_ybe(&cu, &cv, &w, &pts).map_err(compute)?;
    let mut r = Report::new("ybe");
    r.set("cu", q_json(&cu));
    r.set("cv", q_json(&cv));
    r.set("module", json!(module));
    r.set("depth", json!(depth));
    r.set("samples", Value::Array(pts.iter().map(|(a, b)| json!([fmt_q(a), fmt_q(b)])).collect()));
    r.set("checked", json!(rep.checked));
    r.set("failures", json!(rep.failures));
    r.line(format!("N({}) ⊗ N({}) ⊗ {module}: {rep}", fmt_q(&cu), fmt_q(&cv)));
    r.verdict(rep.is_ok());
    Ok(r)
}
