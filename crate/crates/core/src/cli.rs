//! The `mtl` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    axiom_report_with, decompose_on_basis, extract_delta, independence_rank, AxiomOptions, SampleSpec,
    ValuationOracle,
};
use crate::error::{MtlError, Result};
use crate::io;
use crate::patch::SupportPatch;
use crate::spherical::{ConeConstraint, SphericalRegion};
use crate::tensor::Subspace;
use crate::valuations::{enumerate_basis, BasisDescriptor};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mtl", version, about = "Local tensor valuations on convex polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one valuation on a polytope and patch.
    Compute(ComputeArgs),
    /// Run the randomized axiom checks on an oracle.
    Check(CheckArgs),
    /// List the basis of rank-p valuations in dimension n.
    Basis(BasisArgs),
    /// Certify linear independence of the basis.
    Rank(RankArgs),
    /// Decompose an oracle on the basis.
    Decompose(DecomposeArgs),
    /// Density of an oracle on flat polytopes.
    Delta(DeltaArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Phi,
    Tilde3,
    Tilde2,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    #[arg(long)]
    polytope: PathBuf,
    /// Patch file; the whole of R^n x S^{n-1} when absent.
    #[arg(long)]
    patch: Option<PathBuf>,
    #[arg(long, value_enum)]
    valuation: Kind,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    s: usize,
    #[arg(long)]
    j: Option<usize>,
    /// Power of the metric tensor in front.
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Falls back to MTL_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    oracle: String,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Use orientation-reversing maps in the rotation check.
    #[arg(long)]
    improper: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BasisArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// One JSON descriptor per line instead of the readable names.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, conflicts_with = "recipe", required_unless_present = "recipe")]
    oracle: Option<String>,
    /// JSON recipe `{ "n": .., "terms": [{ "coefficient": .., "descriptor": {..} }] }`.
    #[arg(long)]
    recipe: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DeltaArgs {
    #[arg(long)]
    oracle: String,
    #[arg(long)]
    n: usize,
    /// Spanning vectors of L as JSON, e.g. `[[0,0,1]]`; `[]` for L = {0}.
    #[arg(long)]
    subspace: String,
    /// Inner normals of the region B in the complement of L, as JSON.
    #[arg(long, default_value = "[]")]
    normals: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecipeTerm {
    coefficient: f64,
    descriptor: BasisDescriptor,
}

#[derive(Debug, Serialize, Deserialize)]
struct Recipe {
    n: usize,
    terms: Vec<RecipeTerm>,
}

fn resolve_seed(arg: &SeedArg) -> Result<u64> {
    if let Some(s) = arg.seed {
        return Ok(s);
    }
    match std::env::var("MTL_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| MtlError::Parse(format!("MTL_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn parse_indices(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| MtlError::Parse(format!("bad index {s:?} in {what}")))
        })
        .collect()
}

/// `phi:k,r,s,j[,m]`, `tilde3:r,s,j[,m]` or `tilde2:k,r,s[,m]`.
pub fn parse_descriptor(text: &str) -> Result<BasisDescriptor> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| MtlError::Parse(format!("{text:?} lacks a ':'")))?;
    let ix = parse_indices(rest, text)?;
    let m = |i: usize| ix.get(i).copied().unwrap_or(0);
    let arity = |lo: usize| {
        if ix.len() == lo || ix.len() == lo + 1 {
            Ok(())
        } else {
            Err(MtlError::Parse(format!("{text:?} needs {lo} or {} indices", lo + 1)))
        }
    };
    match kind.trim() {
        "phi" => {
            arity(4)?;
            Ok(BasisDescriptor::phi(ix[0], m(4), ix[1], ix[2], ix[3]))
        }
        "tilde3" => {
            arity(3)?;
            Ok(BasisDescriptor::tilde3(m(3), ix[0], ix[1], ix[2]))
        }
        "tilde2" => {
            arity(3)?;
            Ok(BasisDescriptor::tilde2(ix[0], m(3), ix[1], ix[2]))
        }
        other => Err(MtlError::Parse(format!("unknown valuation kind {other:?}"))),
    }
}

/// `builtin:<descriptor>` or `combo:c1*<descriptor>;c2*<descriptor>;...`.
pub fn parse_oracle(text: &str, n: usize) -> Result<ValuationOracle> {
    if let Some(rest) = text.strip_prefix("builtin:") {
        return ValuationOracle::from_descriptor(n, parse_descriptor(rest)?);
    }
    if let Some(rest) = text.strip_prefix("combo:") {
        let terms = rest
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                let (c, d) = t
                    .split_once('*')
                    .ok_or_else(|| MtlError::Parse(format!("combo term {t:?} is not c*descriptor")))?;
                let c: f64 = c
                    .trim()
                    .parse()
                    .map_err(|_| MtlError::Parse(format!("bad coefficient {c:?}")))?;
                Ok((c, parse_descriptor(d)?))
            })
            .collect::<Result<Vec<_>>>()?;
        return ValuationOracle::linear_combination(n, &terms);
    }
    Err(MtlError::Parse(format!(
        "oracle {text:?} must start with builtin: or combo:"
    )))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| MtlError::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(MtlError::from),
    }
}

fn descriptor_from_flags(a: &ComputeArgs) -> BasisDescriptor {
    match a.valuation {
        Kind::Phi => BasisDescriptor::phi(a.k.unwrap_or(0), a.m, a.r, a.s, a.j.unwrap_or(0)),
        Kind::Tilde3 => BasisDescriptor::tilde3(a.m, a.r, a.s, a.j.unwrap_or(0)),
        Kind::Tilde2 => BasisDescriptor::tilde2(a.k.unwrap_or(0), a.m, a.r, a.s),
    }
}

fn parse_vectors(text: &str, n: usize, what: &str) -> Result<Vec<Vec<f64>>> {
    let v: Vec<Vec<f64>> =
        serde_json::from_str(text).map_err(|e| MtlError::Parse(format!("{what}: {e}")))?;
    if let Some(bad) = v.iter().find(|x| x.len() != n) {
        return Err(MtlError::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    Ok(v)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Compute(a) => {
            let d = descriptor_from_flags(&a);
            if a.valuation == Kind::Tilde3 && a.k.is_some() {
                return Err(MtlError::InvalidIndices("tilde3 takes no k".into()));
            }
            if a.valuation == Kind::Tilde2 && a.j.is_some() {
                return Err(MtlError::InvalidIndices("tilde2 takes no j".into()));
            }
            let p = io::read_polytope(&a.polytope)?;
            d.validate(p.ambient_dim())?;
            let eta = match &a.patch {
                Some(path) => io::read_patch(path)?,
                None => SupportPatch::all(),
            };
            let t = d.evaluate(&p, &eta)?;
            emit(out, a.output.as_deref(), &io::to_json(&t)?)?;
            Ok(EXIT_OK)
        }
        Command::Check(a) => {
            let g = parse_oracle(&a.oracle, a.n)?;
            let opts = AxiomOptions {
                trials: a.trials.max(1),
                tolerance: a.tol,
                improper_rotations: a.improper,
            };
            let rep = axiom_report_with(&g, resolve_seed(&a.seed)?, &opts);
            emit(out, a.output.as_deref(), &io::to_json(&rep)?)?;
            Ok(if rep.passed { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Basis(a) => {
            if a.n < 2 {
                return Err(MtlError::InvalidArgument("n must be at least 2".into()));
            }
            let mut text = String::new();
            for d in enumerate_basis(a.n, a.p) {
                if a.json {
                    text.push_str(&serde_json::to_string(&d)?);
                } else {
                    text.push_str(&d.to_string());
                }
                text.push('\n');
            }
            emit(out, None, &text)?;
            Ok(EXIT_OK)
        }
        Command::Rank(a) => {
            if !(2..=4).contains(&a.n) {
                return Err(MtlError::InvalidArgument("n must be 2, 3 or 4".into()));
            }
            let rep = independence_rank(a.n, a.p, resolve_seed(&a.seed)?)?;
            let verdict = if rep.passed { "PASS" } else { "FAIL" };
            emit(out, None, &format!("rank={} expected={} {verdict}\n", rep.rank, rep.expected))?;
            Ok(if rep.passed { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Decompose(a) => {
            let g = match (&a.oracle, &a.recipe) {
                (Some(spec), _) => {
                    let n = a
                        .n
                        .ok_or_else(|| MtlError::InvalidArgument("--n is required with --oracle".into()))?;
                    parse_oracle(spec, n)?
                }
                (None, Some(path)) => {
                    let r: Recipe = io::read_json(path)?;
                    if a.n.is_some_and(|n| n != r.n) {
                        return Err(MtlError::InvalidArgument("--n disagrees with the recipe".into()));
                    }
                    let terms: Vec<_> = r.terms.iter().map(|t| (t.coefficient, t.descriptor)).collect();
                    ValuationOracle::linear_combination(r.n, &terms)?
                }
                (None, None) => return Err(MtlError::InvalidArgument("--oracle or --recipe is required".into())),
            };
            let res = decompose_on_basis(&g, &SampleSpec::new(resolve_seed(&a.seed)?), a.tol)?;
            emit(out, a.output.as_deref(), &io::to_json(&res)?)?;
            Ok(if res.within_tolerance { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Delta(a) => {
            let g = parse_oracle(&a.oracle, a.n)?;
            let l = Subspace::span(a.n, &parse_vectors(&a.subspace, a.n, "--subspace")?, 1e-12)?;
            let normals = parse_vectors(&a.normals, a.n, "--normals")?;
            let b = SphericalRegion::new(
                l.orthogonal_complement(),
                normals.into_iter().map(ConeConstraint::closed).collect(),
            );
            let t = extract_delta(&g, &l, &b)?;
            emit(out, a.output.as_deref(), &io::to_json(&t)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn exit_code(e: &MtlError) -> i32 {
    match e {
        MtlError::PolytopeDependence { .. }
        | MtlError::RankDeficient { .. }
        | MtlError::IllConditioned { .. }
        | MtlError::InvarianceViolated { .. }
        | MtlError::SampleTooSmall { .. } => EXIT_FAILURE,
        _ => EXIT_INPUT,
    }
}

/// Runs the command line on `argv` (program name first) and returns the
/// process exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
