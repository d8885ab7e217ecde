use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use toriclab::divisorial::{divisor_string, k_divisoriality, SubsetOutcome, SubsetStatus};
use toriclab::fan::{parse_fan, Fan, ParsedFan};
use toriclab::gale::{shephard_test, support_function_test, ProjectivityVerdict, ProjectivityWitness};
use toriclab::linalg::fmt_vec;
use toriclab::quotient::{
    check_geometric_quotient, cox_lift, kajiwara_presentation, parse_map, LatticeMap, QuotientError,
};
use toriclab::random::kleinschmidt_batch;

mod exit {
    pub const OK: u8 = 0;
    pub const NEGATIVE: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const INCONSISTENT: u8 = 3;
}

#[derive(Parser)]
#[command(name = "toriclab", version, about = "Exact computations on rational polyhedral fans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the fan axioms.
    Validate { fan: PathBuf },
    /// Simpliciality, completeness, projectivity (two independent tests) and Cartier rank.
    Analyze { fan: PathBuf },
    /// Decide k-divisoriality.
    Kdiv {
        fan: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Check that a lattice map is a geometric quotient of fans.
    QuotientCheck { source: PathBuf, map: PathBuf, target: PathBuf },
    /// Cox lift and its projection.
    Cox {
        fan: PathBuf,
        /// Directory for the lifted fan and the map.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quotient presentation from the invariant Cartier divisors.
    Kajiwara {
        fan: PathBuf,
        /// Directory for the presentation fan and the map.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random complete simplicial fans with n+1 or n+2 rays, tested for projectivity.
    RandomFans {
        /// Ambient rank.
        n: usize,
        /// Number of rays.
        d: usize,
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for the generated fans.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: exit::INPUT, message: message.into() }
}

type Outcome = Result<(u8, String), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let f = cli.format;
    let result = match &cli.command {
        Command::Validate { fan } => validate(fan, f),
        Command::Analyze { fan } => analyze(fan, f),
        Command::Kdiv { fan, k } => kdiv(fan, *k, f),
        Command::QuotientCheck { source, map, target } => quotient_check(source, map, target, f),
        Command::Cox { fan, out } => cox(fan, out.as_deref(), f),
        Command::Kajiwara { fan, out } => kajiwara(fan, out.as_deref(), f),
        Command::RandomFans { n, d, count, seed, out } => random_fans(*n, *d, *count, *seed, out.as_deref(), f),
    };
    match result {
        Ok((code, out)) => {
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{}", out.trim_end());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("toriclab: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_fan(path: &Path) -> Result<ParsedFan, Failure> {
    parse_fan(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_map(path: &Path) -> Result<LatticeMap, Failure> {
    parse_map(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Parses a fan and insists it satisfies the fan axioms; a parsed but invalid fan is a negative verdict.
fn load_valid_fan(path: &Path) -> Result<Fan, Failure> {
    let fan = load_fan(path)?.fan;
    let report = fan.validate();
    if !report.is_valid() {
        return Err(Failure { code: exit::NEGATIVE, message: format!("{}: not a fan: {report}", path.display()) });
    }
    Ok(fan)
}

fn json_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn one_based(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn fan_label(fan: &Fan, path: &Path) -> String {
    fan.name().map(str::to_string).unwrap_or_else(|| path.display().to_string())
}

fn validate(path: &Path, format: Format) -> Outcome {
    let parsed = load_fan(path)?;
    let report = parsed.fan.validate();
    let code = if report.is_valid() { exit::OK } else { exit::NEGATIVE };
    let rescaled: Vec<Value> =
        parsed.rescaled_rays().map(|(i, s)| json!({ "ray": i, "divided_by": s.to_string() })).collect();
    let out = match format {
        Format::Json => json_string(&json!({
            "valid": report.is_valid(),
            "violations": report.violations,
            "rescaled_rays": rescaled,
        })),
        Format::Text => {
            let mut s = String::new();
            for (i, g) in parsed.rescaled_rays() {
                s += &format!("note: ray {} was divided by {g} to make it primitive\n", i + 1);
            }
            if report.is_valid() {
                s += "valid fan\n";
            } else {
                s += "invalid fan\n";
                for v in &report.violations {
                    s += &format!("  {v}\n");
                }
            }
            s
        }
    };
    Ok((code, out))
}

fn verdict_json(v: &ProjectivityVerdict, verified: bool) -> Value {
    let mut obj = serde_json::to_value(v).expect("verdict serializes");
    obj["verified"] = json!(verified);
    obj
}

fn verdict_text(label: &str, v: &ProjectivityVerdict, verified: bool) -> String {
    let check = if verified { "verified" } else { "FAILED VERIFICATION" };
    let mut s = format!("strongly polytopal ({label}): {}\n", yes_no(v.is_strongly_polytopal));
    match (&v.witness, &v.certificate) {
        (Some(ProjectivityWitness::Point { point }), _) => {
            s += &format!("  witness point {} [{check}]\n", fmt_vec(point));
        }
        (Some(ProjectivityWitness::SupportFunction { values, .. }), _) => {
            s += &format!("  support function values at the rays {} [{check}]\n", fmt_vec(values));
        }
        (None, Some(c)) => {
            s += &format!("  certificate, strict multipliers {} [{check}]\n", fmt_vec(&c.strict_multipliers));
        }
        (None, None) => {}
    }
    for w in &v.warnings {
        s += &format!("  warning: {w}\n");
    }
    s
}

fn analyze(path: &Path, format: Format) -> Outcome {
    let fan = load_valid_fan(path)?;
    let simplicial = fan.is_simplicial();
    let complete = fan.is_complete();
    let nondegenerate = fan.is_nondegenerate();
    let cartier = fan.cartier_lattice();
    let mut code = exit::OK;
    let projectivity = if complete && nondegenerate {
        let s = shephard_test(&fan).map_err(|e| input_error(e.to_string()))?;
        let t = support_function_test(&fan);
        let (sv, tv) = (s.verify(&fan, None), t.verify(&fan, None));
        let agree = s.is_strongly_polytopal == t.is_strongly_polytopal;
        if !agree || !sv || !tv || !cartier.verify_witnesses(&fan) {
            code = exit::INCONSISTENT;
        }
        Some((s, sv, t, tv, agree))
    } else {
        None
    };
    let out = match format {
        Format::Json => json_string(&json!({
            "name": fan.name(),
            "rank": fan.rank(),
            "rays": fan.ray_count(),
            "max_cones": fan.cone_count(),
            "simplicial": simplicial,
            "complete": complete,
            "nondegenerate": nondegenerate,
            "cartier_rank": cartier.rank(),
            "projectivity": projectivity.as_ref().map(|(s, sv, t, tv, agree)| json!({
                "shephard": verdict_json(s, *sv),
                "support_function": verdict_json(t, *tv),
                "agree": agree,
            })),
        })),
        Format::Text => {
            let mut s = format!(
                "fan: {} (rank {}, {} rays, {} maximal cones)\n",
                fan_label(&fan, path),
                fan.rank(),
                fan.ray_count(),
                fan.cone_count()
            );
            s += &format!("simplicial: {}\n", yes_no(simplicial));
            s += &format!("complete: {}\n", yes_no(complete));
            s += &format!("nondegenerate: {}\n", yes_no(nondegenerate));
            s += &format!("cartier rank: {}\n", cartier.rank());
            match &projectivity {
                Some((sh, sv, t, tv, agree)) => {
                    s += &verdict_text("shephard", sh, *sv);
                    s += &verdict_text("support function", t, *tv);
                    if !agree {
                        s += "error: the two projectivity tests disagree\n";
                    }
                }
                None => s += "strongly polytopal: not decided (needs a complete nondegenerate fan)\n",
            }
            s
        }
    };
    Ok((code, out))
}

fn kdiv(path: &Path, k: usize, format: Format) -> Outcome {
    if k == 0 {
        return Err(input_error("k must be positive"));
    }
    let fan = load_valid_fan(path)?;
    let report = k_divisoriality(&fan, k).map_err(|e| input_error(e.to_string()))?;
    let code = if report.verdict { exit::OK } else { exit::NEGATIVE };
    let out = match format {
        Format::Json => report.to_json(),
        Format::Text => {
            let mut s = format!("fan: {}\n", fan_label(&fan, path));
            s += &format!("{k}-divisorial: {}\n", yes_no(report.verdict));
            if let Some(e) = &report.presentation_error {
                s += &format!("  {e}\n");
            }
            if !report.q1_row_space_saturated {
                s += "  note: the Cartier lattice is not saturated; invariance is tested by orthogonality\n";
            }
            for e in &report.entries {
                match &e.outcome {
                    SubsetOutcome::Feasible(w) => {
                        s += &format!("cones {}: feasible\n", one_based(&e.cones));
                        for (c, u) in e.cones.iter().zip(&w.exponents) {
                            s += &format!("  cone {}: {}\n", c + 1, divisor_string(u));
                        }
                    }
                    SubsetOutcome::Infeasible(c) => {
                        s += &format!("cones {}: infeasible\n", one_based(&e.cones));
                        s += &format!("  relation: {}\n", c.relation);
                    }
                }
            }
            let failing: Vec<String> = report.failing().map(|e| one_based(&e.cones)).collect();
            if !failing.is_empty() && report.entries.iter().any(|e| e.status == SubsetStatus::Feasible) {
                s += &format!("failing subsets: {}\n", failing.join(" "));
            }
            s
        }
    };
    Ok((code, out))
}

fn quotient_check(source: &Path, map: &Path, target: &Path, format: Format) -> Outcome {
    let src = load_valid_fan(source)?;
    let p = load_map(map)?;
    let tgt = load_valid_fan(target)?;
    let diag = check_geometric_quotient(&src, &p, &tgt);
    let code = if diag.is_geometric_quotient() { exit::OK } else { exit::NEGATIVE };
    let out = match format {
        Format::Json => {
            let mut v = serde_json::to_value(&diag).expect("diagram serializes");
            v["geometric_quotient"] = json!(diag.is_geometric_quotient());
            json_string(&v)
        }
        Format::Text => {
            let mut s = format!("geometric quotient: {}\n", yes_no(diag.is_geometric_quotient()));
            s += &format!("injective on all source cones: {}\n", yes_no(diag.cones_injective));
            s += &format!("images are the target cones: {}\n", yes_no(diag.image_is_target));
            s += &format!("bijective on maximal cones: {}\n", yes_no(diag.bijective_on_cones));
            let kernel: Vec<String> = diag.kernel_basis.iter().map(|v| fmt_vec(v)).collect();
            s += &format!("kernel basis: {{{}}}\n", kernel.join(", "));
            for (c, t) in diag.cone_images.iter().enumerate() {
                match t {
                    Some(t) => s += &format!("  source cone {} -> target cone {}\n", c + 1, t + 1),
                    None => s += &format!("  source cone {} -> no target cone\n", c + 1),
                }
            }
            if let Some(f) = &diag.first_failure {
                s += &format!("first failure: {f}\n");
            }
            s
        }
    };
    Ok((code, out))
}

fn stem(path: &Path, fan: &Fan) -> String {
    if let Some(n) = fan.name() {
        return n.to_string();
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("fan");
    name.trim_end_matches(".json").trim_end_matches(".fan").to_string()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, format!("{contents}\n")).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn cox(path: &Path, out: Option<&Path>, format: Format) -> Outcome {
    let fan = load_valid_fan(path)?;
    let lift = cox_lift(&fan).map_err(|e| input_error(e.to_string()))?;
    let base = stem(path, &fan);
    let mut written = Vec::new();
    if let Some(dir) = out {
        written.push(write_file(dir, &format!("{base}-coxlift.fan.json"), &lift.lifted.to_json())?);
        written.push(write_file(dir, &format!("{base}-Q.map.json"), &lift.q.to_json())?);
    }
    let text = match format {
        Format::Json => json_string(&json!({
            "lifted": serde_json::to_value(lift.lifted.to_file()).expect("fan serializes"),
            "map": serde_json::to_value(lift.q.to_file()).expect("map serializes"),
            "kernel_rank": lift.kernel_basis.len(),
            "kernel_basis": lift.kernel_basis.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "exceptional_codim": lift.exceptional_codim,
            "written": written,
        })),
        Format::Text => {
            let mut s = format!(
                "Cox lift of {}: {} cones in Z^{}\n",
                fan_label(&fan, path),
                lift.lifted.cone_count(),
                lift.lifted.rank()
            );
            s += &format!("map Q: Z^{} -> Z^{}\n", lift.q.source_rank(), lift.q.target_rank());
            for r in lift.q.matrix.row_iter() {
                s += &format!("  {}\n", fmt_vec(r));
            }
            s += &format!("kernel rank: {}\n", lift.kernel_basis.len());
            match lift.exceptional_codim {
                Some(c) => s += &format!("removed coordinate subspaces have codimension >= {c}\n"),
                None => s += "no coordinate subspaces are removed\n",
            }
            for p in &written {
                s += &format!("wrote {}\n", p.display());
            }
            s
        }
    };
    Ok((exit::OK, text))
}

fn kajiwara(path: &Path, out: Option<&Path>, format: Format) -> Outcome {
    let fan = load_valid_fan(path)?;
    let pres = match kajiwara_presentation(&fan) {
        Ok(p) => p,
        Err(e @ (QuotientError::NotDivisorial(_) | QuotientError::NoCartierDivisors)) => {
            let msg = e.to_string();
            let text = match format {
                Format::Json => json_string(&json!({ "divisorial": false, "reason": msg })),
                Format::Text => format!("{msg}\n"),
            };
            return Ok((exit::NEGATIVE, text));
        }
        Err(e) => return Err(input_error(e.to_string())),
    };
    let base = stem(path, &fan);
    let mut written = Vec::new();
    if let Some(dir) = out {
        written.push(write_file(dir, &format!("{base}-hat.fan.json"), &pres.hat.to_json())?);
        written.push(write_file(dir, &format!("{base}-Q1.map.json"), &pres.q1.to_json())?);
    }
    let text = match format {
        Format::Json => json_string(&json!({
            "divisorial": true,
            "hat": serde_json::to_value(pres.hat.to_file()).expect("fan serializes"),
            "map": serde_json::to_value(pres.q1.to_file()).expect("map serializes"),
            "cartier_rank": pres.cartier.rank(),
            "kernel_rank": pres.kernel_basis.len(),
            "row_space_saturated": pres.row_space_saturated,
            "written": written,
        })),
        Format::Text => {
            let mut s = format!(
                "Kajiwara presentation of {}: {} cones in Z^{}\n",
                fan_label(&fan, path),
                pres.hat.cone_count(),
                pres.hat.rank()
            );
            s += &format!(
                "map Q1: Z^{} -> Z^{} (rows are a Cartier basis)\n",
                pres.q1.source_rank(),
                pres.q1.target_rank()
            );
            for r in pres.q1.matrix.row_iter() {
                s += &format!("  {}  {}\n", fmt_vec(r), divisor_string(r));
            }
            s += &format!("kernel rank of Q1: {}\n", pres.kernel_basis.len());
            for p in &written {
                s += &format!("wrote {}\n", p.display());
            }
            s
        }
    };
    Ok((exit::OK, text))
}

fn random_fans(n: usize, d: usize, count: usize, seed: u64, out: Option<&Path>, format: Format) -> Outcome {
    let fans = kleinschmidt_batch(n, d, count, seed).map_err(|e| input_error(e.to_string()))?;
    let mut passed = 0;
    let mut inconsistent = 0;
    let mut failures = Vec::new();
    let mut written = Vec::new();
    for (i, f) in fans.iter().enumerate() {
        let v = shephard_test(f).map_err(|e| input_error(e.to_string()))?;
        if !v.verify(f, None) {
            inconsistent += 1;
        }
        if v.is_strongly_polytopal {
            passed += 1;
        } else {
            failures.push(i);
        }
        if let Some(dir) = out {
            written.push(write_file(dir, &format!("random-{n}-{d}-{seed}-{:04}.fan.json", i + 1), &f.to_json())?);
        }
    }
    let code = if inconsistent > 0 {
        exit::INCONSISTENT
    } else if failures.is_empty() {
        exit::OK
    } else {
        exit::NEGATIVE
    };
    let text = match format {
        Format::Json => json_string(&json!({
            "n": n, "d": d, "count": count, "seed": seed,
            "strongly_polytopal": passed,
            "failures": failures,
            "written": written,
        })),
        Format::Text => {
            let mut s = format!(
                "{passed}/{count} random complete simplicial fans in Z^{n} with {d} rays are strongly polytopal (seed {seed})\n"
            );
            for i in &failures {
                s += &format!("  fan {} is not strongly polytopal\n", i + 1);
            }
            if let Some(dir) = out {
                s += &format!("wrote {} fans to {}\n", written.len(), dir.display());
            }
            s
        }
    };
    Ok((code, text))
}
