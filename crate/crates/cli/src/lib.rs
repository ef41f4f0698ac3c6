//! Command dispatch and report rendering for `dgepi`.
//!
//! Every command reads one presentation file (several for `consistency`),
//! computes, and renders a report as text or JSON. Exit codes: 0 when the
//! computation finished, whatever the verdict; 1 for invalid input; 2 when
//! the generator cap was hit.

use std::fmt::Write as _;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dgepi::complex::Window;
use dgepi::derived::{derived_tensor, ext_table, rhom, tor_table, Table};
use dgepi::dg::{endomorphism_dga, tensor_over, DgModule, Side};
use dgepi::epi::{
    check_dga_epi, check_dwyer_greenlees, check_ring_epi, consistency_run, generate_test_family, summary_line, AggregateReport, ConditionVerdict,
    ConsistencyReport, CorpusEntry, DwyerGreenleesReport, Status,
};
use dgepi::resolution::{semifree_resolution, verify_build_tree};
use dgepi::text::{parse, validate_file, Decl, Session};
use dgepi::Error;

#[derive(Parser, Debug, Clone)]
#[command(name = "dgepi", version, about = "Homological epimorphism checks for DG algebras")]
pub struct Cli {
    /// Homological degrees to compute, as LO..HI.
    #[arg(long, global = true, default_value = "0..8", value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Window,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "family-size", global = true, default_value_t = 6)]
    pub family_size: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long = "max-generators", global = true, default_value_t = 10_000)]
    pub max_generators: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Auto,
    Ring,
    Dga,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check every declaration against the axioms.
    Validate { file: String },
    /// Homology of an algebra or module.
    Homology { file: String, name: Option<String> },
    /// Semifree resolution of a module on one side.
    Resolve {
        file: String,
        module: Option<String>,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Tor of a right module M and a left module N.
    Tor { file: String, m: String, n: String },
    /// Ext of two left modules.
    Ext { file: String, m: String, n: String },
    /// Homology of the underived tensor product.
    Tensor { file: String, m: String, n: String },
    /// Homology of the derived Hom complex.
    Rhom { file: String, m: String, n: String },
    /// Endomorphism DGA of a left module.
    EndoDga { file: String, module: Option<String> },
    /// Check a build tree against its module.
    WitnessVerify { file: String, witness: Option<String> },
    /// Homological epimorphism check for a morphism.
    CheckEpi {
        file: String,
        morphism: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
    },
    /// Endpoint check for a semifree module and its endomorphism DGA.
    DwyerGreenlees { file: String, witness: Option<String> },
    /// Run every morphism and bimodule of the given files.
    Consistency {
        #[arg(required = true)]
        files: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Homology { .. } => "homology",
            Command::Resolve { .. } => "resolve",
            Command::Tor { .. } => "tor",
            Command::Ext { .. } => "ext",
            Command::Tensor { .. } => "tensor",
            Command::Rhom { .. } => "rhom",
            Command::EndoDga { .. } => "endo-dga",
            Command::WitnessVerify { .. } => "witness-verify",
            Command::CheckEpi { .. } => "check-epi",
            Command::DwyerGreenlees { .. } => "dwyer-greenlees",
            Command::Consistency { .. } => "consistency",
        }
    }

    fn files(&self) -> Vec<String> {
        match self {
            Command::Validate { file }
            | Command::Homology { file, .. }
            | Command::Resolve { file, .. }
            | Command::Tor { file, .. }
            | Command::Ext { file, .. }
            | Command::Tensor { file, .. }
            | Command::Rhom { file, .. }
            | Command::EndoDga { file, .. }
            | Command::WitnessVerify { file, .. }
            | Command::CheckEpi { file, .. }
            | Command::DwyerGreenlees { file, .. } => vec![file.clone()],
            Command::Consistency { files } => files.clone(),
        }
    }
}

pub fn parse_window(s: &str) -> Result<Window, String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    Window::new(lo, hi).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if matches!(e, Error::ResourceBound { .. }) { 2 } else { 1 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

/// A rendered result: text lines, JSON value, and whether the input was
/// found invalid.
struct Rendered {
    text: String,
    json: Value,
    invalid: bool,
}

fn rendered(text: String, json: Value) -> Rendered {
    Rendered {
        text,
        json,
        invalid: false,
    }
}

pub fn run(cli: &Cli) -> Output {
    let files = cli.command.files();
    let result = dispatch(cli);
    let header = format!(
        "# dgepi {} {} window {} seed {} family-size {}\n",
        cli.command.name(),
        files.join(" "),
        cli.window,
        cli.seed,
        cli.family_size
    );
    match result {
        Ok(r) => {
            let stdout = match cli.format {
                Format::Text => format!("{header}{}", r.text),
                Format::Json => {
                    let v = json!({
                        "command": cli.command.name(),
                        "files": files,
                        "window": cli.window.to_string(),
                        "seed": cli.seed,
                        "family_size": cli.family_size,
                        "max_generators": cli.max_generators,
                        "result": r.json,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
                }
            };
            Output {
                stdout,
                stderr: String::new(),
                code: if r.invalid { 1 } else { 0 },
            }
        }
        Err(f) => Output {
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
            code: f.code,
        },
    }
}

fn load(path: &str) -> Result<(dgepi::text::PresentationFile, Session), Failure> {
    let file = load_file(path)?;
    let session = Session::build(&file)?;
    Ok((file, session))
}

fn load_file(path: &str) -> Result<dgepi::text::PresentationFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{path}: {e}")))?;
    parse(&text).map_err(|e| invalid(format!("{path}:{}:{}: expected {}, found {}", e.line, e.column, e.expected, e.found)))
}

/// The named object, or the only one of its kind when no name is given.
fn pick<'a, T>(kind: &str, map: &'a std::collections::BTreeMap<String, T>, name: &Option<String>) -> Result<(&'a String, &'a T), Failure> {
    match name {
        Some(n) => map.get_key_value(n).ok_or_else(|| invalid(format!("no {kind} named `{n}`"))),
        None if map.len() == 1 => Ok(map.iter().next().expect("one entry")),
        None => Err(invalid(format!("give the {kind} name; the file declares {}", map.len()))),
    }
}

fn module(s: &Session, name: &str) -> Result<Arc<DgModule>, Failure> {
    Ok(s.module(name)?)
}

fn dims_text(dims: &std::collections::BTreeMap<i64, usize>) -> String {
    if dims.is_empty() {
        return "(none)".into();
    }
    dims.iter().map(|(i, d)| format!("{i}:{d}")).collect::<Vec<_>>().join(" ")
}

fn dims_json(dims: &std::collections::BTreeMap<i64, usize>) -> Value {
    Value::Object(dims.iter().map(|(i, d)| (i.to_string(), json!(d))).collect())
}

fn opt_window(w: Option<Window>) -> String {
    w.map_or("nothing".into(), |w| w.to_string())
}

fn table_text(label: &str, t: &Table) -> String {
    format!("{label}: {}\ntrusted: {}\n", dims_text(&t.dims), opt_window(t.trusted))
}

fn table_json(t: &Table) -> Value {
    json!({
        "requested": t.requested.to_string(),
        "trusted": t.trusted.map(|w| w.to_string()),
        "dims": dims_json(&t.dims),
    })
}

fn dispatch(cli: &Cli) -> Result<Rendered, Failure> {
    let (w, cap) = (cli.window, cli.max_generators);
    match &cli.command {
        Command::Validate { file } => validate(file),
        Command::Homology { file, name } => {
            let (_, s) = load(file)?;
            let (name, complex) = match name {
                Some(n) if s.algebras.contains_key(n) => (n.clone(), s.algebras[n].complex().clone()),
                Some(n) => (n.clone(), module(&s, n)?.complex().clone()),
                None if s.algebras.len() + s.modules.len() == 1 => match s.algebras.iter().next() {
                    Some((n, a)) => (n.clone(), a.complex().clone()),
                    None => {
                        let (n, m) = s.modules.iter().next().expect("one module");
                        (n.clone(), m.complex().clone())
                    }
                },
                None => return Err(invalid("give the name of an algebra or module")),
            };
            let dims = complex.homology_dims(w);
            Ok(rendered(
                format!("H({name}): {}\n", dims_text(&dims)),
                json!({"name": name, "homology": dims_json(&dims)}),
            ))
        }
        Command::Resolve { file, module: name, side } => {
            let (_, s) = load(file)?;
            let (name, m) = pick("module", &s.modules, name)?;
            let side = match side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let res = semifree_resolution(m, side, w.hi, cap)?;
            let mut text = format!(
                "resolution of {name}: {} generators, {}\nvalid on: {}\n",
                res.generator_count(),
                if res.is_exact() { "exact" } else { "truncated" },
                opt_window(res.validity())
            );
            for g in &res.generators {
                let _ = writeln!(text, "  {} degree {} stage {}", g.label, g.degree, g.stage);
            }
            let gens: Vec<Value> = res
                .generators
                .iter()
                .map(|g| json!({"label": g.label, "degree": g.degree, "stage": g.stage}))
                .collect();
            Ok(rendered(
                text,
                json!({
                    "module": name,
                    "exact": res.is_exact(),
                    "valid_on": res.validity().map(|w| w.to_string()),
                    "generators": gens,
                }),
            ))
        }
        Command::Tor { file, m, n } => {
            let (_, s) = load(file)?;
            let t = tor_table(module(&s, m)?, module(&s, n)?, w, cap)?;
            Ok(rendered(table_text(&format!("Tor({m}, {n})"), &t), json!({"tor": table_json(&t)})))
        }
        Command::Ext { file, m, n } => {
            let (_, s) = load(file)?;
            let t = ext_table(module(&s, m)?, module(&s, n)?, w, cap)?;
            Ok(rendered(table_text(&format!("Ext({m}, {n})"), &t), json!({"ext": table_json(&t)})))
        }
        Command::Tensor { file, m, n } => {
            let (_, s) = load(file)?;
            let t = tensor_over(module(&s, m)?, module(&s, n)?)?;
            let dims = t.module.complex().homology_dims(w);
            let mut text = format!("H({m} ⊗ {n}): {}\n", dims_text(&dims));
            let derived = derived_tensor(module(&s, m)?, module(&s, n)?, w, cap)?.derived();
            let trusted = derived.trusted().restrict(&w);
            let ddims = trusted.map_or_else(Default::default, |tw| derived.homology_dims(tw));
            let _ = writeln!(text, "H({m} ⊗^L {n}): {}\ntrusted: {}", dims_text(&ddims), opt_window(trusted));
            Ok(rendered(
                text,
                json!({
                    "underived": dims_json(&dims),
                    "derived": dims_json(&ddims),
                    "trusted": trusted.map(|w| w.to_string()),
                }),
            ))
        }
        Command::Rhom { file, m, n } => {
            let (_, s) = load(file)?;
            let d = rhom(module(&s, m)?, module(&s, n)?, w, cap)?.derived();
            let trusted = d.trusted().restrict(&w);
            let dims = trusted.map_or_else(Default::default, |tw| d.homology_dims(tw));
            let mut text = format!("H(RHom({m}, {n})): {}\ntrusted: {}\n", dims_text(&dims), opt_window(trusted));
            for p in &d.provenance {
                let _ = writeln!(text, "note: {p}");
            }
            Ok(rendered(
                text,
                json!({"homology": dims_json(&dims), "trusted": trusted.map(|w| w.to_string()), "provenance": d.provenance}),
            ))
        }
        Command::EndoDga { file, module: name } => {
            let (_, s) = load(file)?;
            let (name, m) = pick("module", &s.modules, name)?;
            let end = endomorphism_dga(m)?;
            let dims: std::collections::BTreeMap<i64, usize> = end.algebra.space().support().into_iter().map(|n| (n, end.algebra.dim(n))).collect();
            let hdims = end.algebra.complex().homology_dims(w);
            let violations: Vec<String> = end.algebra.validate().iter().map(|v| v.to_string()).collect();
            let mut text = format!("End({name}) dims: {}\nhomology: {}\n", dims_text(&dims), dims_text(&hdims));
            match violations.is_empty() {
                true => text.push_str("validates: yes\n"),
                false => {
                    for v in &violations {
                        let _ = writeln!(text, "violation: {v}");
                    }
                }
            }
            Ok(rendered(
                text,
                json!({"module": name, "dims": dims_json(&dims), "homology": dims_json(&hdims), "violations": violations}),
            ))
        }
        Command::WitnessVerify { file, witness } => {
            let (_, s) = load(file)?;
            let (name, (mname, wit)) = pick("witness", &s.witnesses, witness)?;
            let m = module(&s, mname)?;
            match verify_build_tree(&m, wit) {
                Ok(()) => Ok(rendered(
                    format!("witness {name} for {mname}: accepted\n"),
                    json!({"witness": name, "module": mname, "accepted": true}),
                )),
                Err(e) => Ok(Rendered {
                    text: format!("witness {name} for {mname}: rejected: {e}\n"),
                    json: json!({"witness": name, "module": mname, "accepted": false, "reason": e.to_string()}),
                    invalid: true,
                }),
            }
        }
        Command::CheckEpi { file, morphism, mode } => {
            let (_, s) = load(file)?;
            let (_, phi) = pick("morphism", &s.morphisms, morphism)?;
            let family = generate_test_family(phi.target.clone(), cli.seed, cli.family_size)?;
            let ring = phi.source.concentrated_in_degree_zero() && phi.target.concentrated_in_degree_zero();
            let r = match (mode, ring) {
                (Mode::Ring, _) | (Mode::Auto, true) => check_ring_epi(phi, w, &family, cap)?,
                (Mode::Dga, _) | (Mode::Auto, false) => check_dga_epi(phi, w, &family, cap)?,
            };
            Ok(rendered(report_text(&r), report_json(&r)))
        }
        Command::DwyerGreenlees { file, witness } => {
            let (_, s) = load(file)?;
            let (_, (mname, wit)) = pick("witness", &s.witnesses, witness)?;
            let m = module(&s, mname)?;
            let r = check_dwyer_greenlees(&m, wit, w, cap)?;
            Ok(rendered(dg_text(&r), serde_json::to_value(&r).expect("json")))
        }
        Command::Consistency { files } => {
            let mut corpus = Vec::new();
            for f in files {
                let (_, s) = load(f)?;
                for name in &s.order {
                    if let Some(phi) = s.morphisms.get(name) {
                        corpus.push(CorpusEntry::Morphism {
                            name: format!("{f}:{name}"),
                            phi: phi.clone(),
                        });
                    }
                }
                for (mname, m) in &s.modules {
                    if m.left_algebra().is_ground() || m.right_algebra().is_ground() {
                        continue;
                    }
                    let witness = s.witnesses.values().find(|(t, w)| t == mname && w.side == Side::Right).map(|(_, w)| w.clone());
                    corpus.push(CorpusEntry::Bimodule {
                        name: format!("{f}:{mname}"),
                        module: m.clone(),
                        witness,
                    });
                }
            }
            let r = consistency_run(&corpus, cli.seed, w, cli.family_size, cap)?;
            Ok(rendered(aggregate_text(&r), serde_json::to_value(&r).expect("json")))
        }
    }
}

fn validate(path: &str) -> Result<Rendered, Failure> {
    let file = load_file(path)?;
    let (session, findings) = validate_file(&file)?;
    let mut text = String::new();
    let mut out = Vec::new();
    let mut bad = !findings.is_empty();
    for d in &file.decls {
        let kind = match d {
            Decl::Algebra(_) => "algebra",
            Decl::Module(_) => "module",
            Decl::Morphism(_) => "morphism",
            Decl::Witness(_) => "witness",
        };
        let mine: Vec<String> = findings.iter().filter(|f| f.decl == d.name()).map(|f| f.violation.to_string()).collect();
        let mut status = if mine.is_empty() { "ok".to_string() } else { mine.join("; ") };
        if let (Decl::Witness(_), Some(s)) = (d, &session) {
            let (mname, w) = &s.witnesses[d.name()];
            if let Err(e) = verify_build_tree(&s.modules[mname], w) {
                status = format!("rejected: {e}");
                bad = true;
            }
        }
        if session.is_none() && mine.is_empty() {
            status = "not built".into();
        }
        let _ = writeln!(text, "{kind} {}: {status}", d.name());
        out.push(json!({"kind": kind, "name": d.name(), "status": status}));
    }
    let axioms: Vec<String> = findings.iter().map(|f| f.violation.axiom.to_string()).collect();
    let _ = writeln!(text, "valid: {}", if bad { "no" } else { "yes" });
    Ok(Rendered {
        text,
        json: json!({"declarations": out, "axioms": axioms, "valid": !bad}),
        invalid: bad,
    })
}

fn status_text(v: &ConditionVerdict) -> String {
    let s = match &v.status {
        Status::HoldsOnWindow => format!("holds on {}", opt_window(v.window)),
        Status::Fails {
            degree,
            source_dim,
            target_dim,
            member,
        } => {
            let m = member.as_ref().map_or(String::new(), |m| format!(", member {m}"));
            format!("fails at degree {degree}, dims {source_dim} vs {target_dim}{m}")
        }
        Status::NotDirectlyCheckable => "not directly checkable".into(),
    };
    match &v.note {
        Some(n) => format!("{s} ({n})"),
        None => s,
    }
}

fn report_text(r: &ConsistencyReport) -> String {
    let mut t = format!("{}\n", summary_line(r));
    let _ = writeln!(t, "subject: {} ({} mode)", r.subject, r.mode);
    let _ = writeln!(t, "window: {} (conditions on {})", r.requested, r.window);
    let _ = writeln!(
        t,
        "family (seed {}): left {}; right {}",
        r.family.seed,
        r.family.left.join(", "),
        r.family.right.join(", ")
    );
    for v in &r.verdicts {
        let _ = writeln!(t, "condition {}: {}", v.condition, status_text(v));
    }
    for (name, table) in &r.tables {
        let _ = writeln!(t, "{name}: {} (trusted {})", dims_text(&table.dims), opt_window(table.trusted));
    }
    let _ = writeln!(t, "agreement: {}", if r.agreement { "yes" } else { "no" });
    if let Some(d) = &r.disagreement {
        let _ = writeln!(t, "disagreement: {d}");
    }
    for n in &r.notes {
        let _ = writeln!(t, "note: {n}");
    }
    t
}

fn report_json(r: &ConsistencyReport) -> Value {
    let mut v = serde_json::to_value(r).expect("json");
    v["summary"] = json!(summary_line(r));
    v
}

fn dg_text(r: &DwyerGreenleesReport) -> String {
    let mut t = format!("module: {}\n", r.module);
    let _ = writeln!(
        t,
        "endomorphism dga: {}",
        if r.endomorphism_violations.is_empty() { "validates".into() } else { r.endomorphism_violations.join("; ") }
    );
    for (n, a, b, ok) in &r.degreewise {
        let _ = writeln!(t, "  degree {n}: S {a}, Hom {b}, {}", if *ok { "bijective" } else { "not bijective" });
    }
    let _ = writeln!(t, "degreewise isomorphism: {}", if r.degreewise_iso { "yes" } else { "no" });
    let _ = writeln!(t, "endpoint: {}", status_text(&r.endpoint));
    t
}

fn aggregate_text(r: &AggregateReport) -> String {
    let mut t = String::new();
    for e in &r.entries {
        let _ = writeln!(t, "{}: agreement {}", e.name, if e.agreement { "yes" } else { "no" });
        if let Some(c) = e.coherent {
            let _ = writeln!(t, "  ring and dga modes coincide: {}", if c { "yes" } else { "no" });
        }
        for rep in &e.reports {
            let _ = writeln!(t, "  {} mode: {}", rep.mode, summary_line(rep));
            for v in &rep.verdicts {
                let _ = writeln!(t, "    condition {}: {}", v.condition, status_text(v));
            }
            if let Some(d) = &rep.disagreement {
                let _ = writeln!(t, "    disagreement: {d}");
            }
        }
    }
    let _ = writeln!(t, "entries: {}", r.entries.len());
    let _ = writeln!(t, "agreement: {}", if r.agreement { "yes" } else { "no" });
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        assert_eq!(parse_window("-2..8").unwrap(), Window { lo: -2, hi: 8 });
        assert!(parse_window("3..1").is_err());
        assert!(parse_window("3").is_err());
    }

    #[test]
    fn flags_default() {
        let cli = Cli::try_parse_from(["dgepi", "validate", "f"]).unwrap();
        assert_eq!(cli.window, Window { lo: 0, hi: 8 });
        assert_eq!((cli.seed, cli.family_size, cli.max_generators), (0, 6, 10_000));
        assert_eq!(cli.format, Format::Text);
        let cli = Cli::try_parse_from(["dgepi", "tor", "f", "a", "b", "--window", "-2..3", "--format", "json"]).unwrap();
        assert_eq!(cli.window, Window { lo: -2, hi: 3 });
    }

    #[test]
    fn missing_file_is_invalid() {
        let cli = Cli::try_parse_from(["dgepi", "validate", "/nonexistent.dga"]).unwrap();
        assert_eq!(run(&cli).code, 1);
    }
}
