use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

use parity_kit::chord::{parse_corpus, ChordDiagram, CorpusError, DiagramError, Flavor};
use parity_kit::invariants::{
    l_odd, linking_multiset_raw, linking_multiset_signed, linking_unsigned, oriented_gaussian_z4,
    writhe, InvariantError,
};
use parity_kit::moves::{apply_text, enumerate_moves, random_walk_with, MoveError, WalkOptions};
use parity_kit::oracle::{
    enumerate_diagrams, random_diagram, sweep, verify_class_consistency, verify_record,
    NamedParity, OracleError,
};
use parity_kit::parity::{
    classify_chords, gaussian_parity_assignment, index_parity_assignment, ChordClass, ParityError,
};
use parity_kit::surface::{homological_parity, presentation, trace_faces, Word};

#[derive(Parser)]
#[command(
    name = "parity-kit",
    version,
    about = "Parities and parity invariants of free, flat and virtual knots"
)]
struct Cli {
    /// Indent JSON output
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Diagram flavor of the codes
    #[arg(long, default_value = "virtual")]
    flavor: Flavor,
    /// Gauss codes; `-` reads one code per line from stdin
    #[arg(required = true)]
    codes: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse codes and print them back in canonical form
    Parse(Input),
    /// Writhe, L_odd, index parity, homology and linking multisets
    Invariants(Input),
    /// E0/E1/O'/O'' classes of the chords
    Classes(Input),
    /// Carter surface: faces, genus, presentation, homology
    Surface(Input),
    /// List or apply Reidemeister moves
    Moves {
        #[arg(long, default_value = "virtual")]
        flavor: Flavor,
        /// List every applicable move (the default)
        #[arg(long, conflicts_with = "apply")]
        list: bool,
        /// Apply one move, e.g. "R2_remove 1 2"
        #[arg(long)]
        apply: Option<String>,
        code: String,
    },
    /// Check the parity axioms along random move chains
    Fuzz {
        #[arg(long, default_value = "virtual")]
        flavor: Flavor,
        /// Number of random start diagrams
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Moves per chain
        #[arg(long, default_value_t = 15)]
        len: usize,
        /// Chords in each start diagram
        #[arg(long, default_value_t = 4)]
        chords: usize,
        #[arg(long, env = "PARITY_KIT_SEED", default_value_t = 0)]
        rng_seed: u64,
        /// Worker threads (default: all processors)
        #[arg(long)]
        jobs: Option<usize>,
        /// Parity to check; all applicable ones when omitted
        #[arg(long)]
        parity: Option<NamedParity>,
    },
    /// All diagrams with a given number of chords
    Enumerate {
        #[arg(long)]
        chords: usize,
        #[arg(long, default_value = "free")]
        flavor: Flavor,
    },
    /// Invariants of every entry of a `name<TAB>flavor<TAB>code` file (`-` for stdin)
    Corpus { file: String },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Diagram(#[from] DiagramError),
    #[error("{0}")]
    Corpus(#[from] CorpusError),
    #[error("{0}")]
    Move(#[from] MoveError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Consistency(_) => 2,
            _ => 1,
        }
    }
}

impl From<ParityError> for CliError {
    fn from(e: ParityError) -> Self {
        match e {
            ParityError::Diagram(d) => CliError::Diagram(d),
            other => CliError::Consistency(other.to_string()),
        }
    }
}

impl From<InvariantError> for CliError {
    fn from(e: InvariantError) -> Self {
        match e {
            InvariantError::Diagram(d) => CliError::Diagram(d),
            InvariantError::Parity(p) => p.into(),
            other => CliError::Consistency(other.to_string()),
        }
    }
}

struct Out {
    pretty: bool,
    stdout: io::StdoutLock<'static>,
}

impl Out {
    fn emit(&mut self, mut v: Value) -> io::Result<()> {
        if let Value::Object(m) = &mut v {
            m.insert("schema".into(), json!(1));
        }
        let text = if self.pretty {
            serde_json::to_string_pretty(&v)
        } else {
            serde_json::to_string(&v)
        };
        writeln!(self.stdout, "{}", text.expect("json values serialize"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = Out {
        pretty: cli.pretty,
        stdout: io::stdout().lock(),
    };
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cmd: Command, out: &mut Out) -> Result<(), CliError> {
    match cmd {
        Command::Parse(input) => each(&input, out, |d| {
            Ok(json!({ "flavor": d.flavor(), "chords": d.n_chords(), "code": d.serialize() }))
        }),
        Command::Invariants(input) => each(&input, out, invariants_json),
        Command::Classes(input) => each(&input, out, classes_json),
        Command::Surface(input) => each(&input, out, surface_json),
        Command::Moves {
            flavor,
            list: _,
            apply,
            code,
        } => {
            let d = ChordDiagram::parse(&read_code(&code)?, flavor)?;
            match apply {
                Some(text) => {
                    let r = apply_text(&d, &text)?;
                    let correspondence: Map<String, Value> = d
                        .chord_ids()
                        .filter_map(|c| {
                            r.image(c)
                                .map(|t| (d.label(c).to_string(), json!(r.target.label(t))))
                        })
                        .collect();
                    let vanished: Vec<&str> = r.vanished.iter().map(|&c| d.label(c)).collect();
                    let created: Vec<&str> = r.created.iter().map(|&c| r.target.label(c)).collect();
                    out.emit(json!({
                        "move": r.kind.to_string(),
                        "source": d.serialize(),
                        "target": r.target.serialize(),
                        "inverse": r.inverse.to_string(),
                        "correspondence": correspondence,
                        "vanished": vanished,
                        "created": created,
                    }))?;
                }
                None => {
                    let moves: Vec<String> = enumerate_moves(&d)
                        .iter()
                        .map(ToString::to_string)
                        .collect();
                    out.emit(json!({ "code": d.serialize(), "moves": moves }))?;
                }
            }
            Ok(())
        }
        Command::Fuzz {
            flavor,
            seeds,
            len,
            chords,
            rng_seed,
            jobs,
            parity,
        } => {
            let parities: Vec<NamedParity> = match parity {
                Some(p) => vec![p],
                None if flavor.is_oriented() => vec![
                    NamedParity::Gaussian,
                    NamedParity::Index,
                    NamedParity::OrientedGaussian,
                    NamedParity::Homological,
                ],
                None => vec![NamedParity::Gaussian, NamedParity::OrientedGaussian],
            };
            let job = |i: &usize| {
                fuzz_one(
                    flavor,
                    chords,
                    len,
                    rng_seed.wrapping_add(*i as u64),
                    &parities,
                )
            };
            let idx: Vec<usize> = (0..seeds).collect();
            let results = run_pool(jobs, || sweep(&idx, job));
            let checked: usize = results.iter().map(|r| r.0).sum();
            let failures: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
            let parities: Vec<String> = parities.iter().map(ToString::to_string).collect();
            out.emit(json!({
                "flavor": flavor,
                "seeds": seeds,
                "len": len,
                "chords": chords,
                "rng_seed": rng_seed,
                "parities": parities,
                "checks": checked,
                "failures": failures,
            }))?;
            if !failures.is_empty() {
                return Err(CliError::Consistency(format!(
                    "{} axiom failures",
                    failures.len()
                )));
            }
            Ok(())
        }
        Command::Enumerate { chords, flavor } => {
            let all = enumerate_diagrams(chords, flavor)?;
            let codes: Vec<String> = all.iter().map(ChordDiagram::serialize).collect();
            out.emit(json!({ "flavor": flavor, "chords": chords, "count": codes.len(), "diagrams": codes }))?;
            Ok(())
        }
        Command::Corpus { file } => {
            let text = if file == "-" {
                read_stdin()?
            } else {
                std::fs::read_to_string(&file)?
            };
            let mut first_error = None;
            for entry in parse_corpus(&text)? {
                let result = ChordDiagram::parse(&entry.code, entry.flavor)
                    .map_err(CliError::from)
                    .and_then(|d| invariants_json(&d));
                let v = match result {
                    Ok(mut v) => {
                        v["name"] = json!(entry.name);
                        v
                    }
                    Err(e) => {
                        let v = json!({ "name": entry.name, "line": entry.line, "error": e.to_string() });
                        first_error.get_or_insert(e);
                        v
                    }
                };
                out.emit(v)?;
            }
            first_error.map_or(Ok(()), Err)
        }
    }
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
fn run_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(j) = jobs {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            return pool.install(f);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    f()
}

fn fuzz_one(
    flavor: Flavor,
    chords: usize,
    len: usize,
    seed: u64,
    parities: &[NamedParity],
) -> (usize, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_diagram(chords, flavor, &mut rng);
    let mut opts = WalkOptions::new(len, seed);
    opts.fixed_surface = parities.iter().any(|p| p.needs_fixed_surface());
    let mut checked = 0;
    let mut failures = Vec::new();
    for rec in random_walk_with(&d, opts) {
        for &p in parities {
            checked += 1;
            failures.extend(verify_record(&rec, p).iter().map(|f| format!("{p} {f}")));
        }
    }
    (checked, failures)
}

fn read_stdin() -> io::Result<String> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s)?;
    Ok(s)
}

fn read_code(code: &str) -> io::Result<String> {
    if code == "-" {
        Ok(read_stdin()?.trim().to_string())
    } else {
        Ok(code.to_string())
    }
}

fn each(
    input: &Input,
    out: &mut Out,
    f: impl Fn(&ChordDiagram) -> Result<Value, CliError>,
) -> Result<(), CliError> {
    let mut codes = Vec::new();
    for c in &input.codes {
        if c == "-" {
            codes.extend(
                read_stdin()?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(str::to_string),
            );
        } else {
            codes.push(c.clone());
        }
    }
    for code in codes {
        let d = ChordDiagram::parse(&code, input.flavor)?;
        let mut v = f(&d)?;
        v["code"] = json!(d.serialize());
        out.emit(v)?;
    }
    Ok(())
}

fn by_label<T: serde::Serialize>(
    d: &ChordDiagram,
    values: impl IntoIterator<Item = T>,
) -> Map<String, Value> {
    d.chord_ids()
        .zip(values)
        .map(|(c, v)| (d.label(c).to_string(), json!(v)))
        .collect()
}

fn group_json(g: &parity_kit::group::FgAbelianGroup) -> Value {
    json!({ "rank": g.rank, "torsion": g.torsion, "name": g.to_string() })
}

fn invariants_json(d: &ChordDiagram) -> Result<Value, CliError> {
    let z4 = oriented_gaussian_z4(d)?;
    let unsigned = linking_unsigned(d, &z4)?;
    let mut v = json!({
        "flavor": d.flavor(),
        "chords": d.n_chords(),
        "l_odd": l_odd(d)?,
        "ls_inv": unsigned.ls_inv,
        "ls_ni": unsigned.ls_ni,
    });
    if d.flavor().is_oriented() {
        let hp = homological_parity(d)?;
        let ip = index_parity_assignment(d)?;
        v["writhe"] = json!(writhe(d)?);
        v["genus"] = json!(trace_faces(d)?.genus);
        v["H"] = group_json(&hp.abelian());
        v["index_parity"] = json!(by_label(d, ip.values.iter().map(|x| x[0])));
        v["ls_signed"] = json!(linking_multiset_signed(d, &hp)?);
        v["ls_signed_raw"] = json!(linking_multiset_raw(d, &hp)?);
    }
    Ok(v)
}

fn classes_json(d: &ChordDiagram) -> Result<Value, CliError> {
    let classes = classify_chords(d)?;
    verify_class_consistency(d).map_err(|e| CliError::Consistency(e.to_string()))?;
    let gauss = gaussian_parity_assignment(d);
    let size = |k: ChordClass| classes.iter().filter(|&&c| c == k).count();
    Ok(json!({
        "classes": by_label(d, classes.iter().map(ToString::to_string)),
        "gaussian": by_label(d, gauss.values.iter().map(|x| x[0])),
        "z4": by_label(d, classes.iter().map(|c| c.z4())),
        "sizes": {
            "E0": size(ChordClass::E0),
            "E1": size(ChordClass::E1),
            "O'": size(ChordClass::OPrime),
            "O''": size(ChordClass::ODoublePrime),
        },
        "l_odd": l_odd(d)?,
        "labeling_canonical": false,
    }))
}

fn surface_json(d: &ChordDiagram) -> Result<Value, CliError> {
    let fd = trace_faces(d)?;
    let pres = presentation(d)?;
    let hp = homological_parity(d)?;
    let word = |w: &Word| -> Value {
        json!(w
            .iter()
            .map(|&(c, e)| json!([d.label(c), e]))
            .collect::<Vec<_>>())
    };
    Ok(json!({
        "genus": fd.genus,
        "faces": fd.faces.iter().map(|f| word(&f.word())).collect::<Vec<_>>(),
        "pi_presentation": {
            "generators": pres.generators,
            "relators": pres.relators.iter().map(word).collect::<Vec<_>>(),
        },
        "H": group_json(&hp.abelian()),
        "parities": by_label(d, &hp.values),
    }))
}
