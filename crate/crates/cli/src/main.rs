use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use msrforge::basecode::{
    load_descriptor, make_eigen_base, save_descriptor, verify_access, verify_mds_with, verify_repair,
};
use msrforge::chunk::{chunk_file_name, decode_file, encode_file, repair_chunk};
use msrforge::cluster::cluster_new;
use msrforge::transform::{
    check_full_with_grid, load_bundle, parse_bundle, save_bundle, transform, Blueprint, BundleParts,
    MsrCode, Orientation, PermutationFamily, ThetaTable,
};
use msrforge::{Error, Exec};

#[derive(Parser)]
#[command(name = "msrforge", version, about = "Build, verify and exercise MSR storage codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Base,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a base code with optimal systematic repair.
    GenBase {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transform a base code into a code bundle.
    Transform {
        #[arg(long)]
        base: PathBuf,
        /// `cyclic`, or explicit rows such as `0,1,2;1,2,0;2,0,1`.
        #[arg(long, default_value = "cyclic")]
        perm: String,
        /// Theta coefficient; -1 stands for q-1.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a bundle; exits nonzero on any failed condition.
    Verify {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        level: Level,
        /// Run the sweeps on a single thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Print the symbolic parity layout.
    Blueprint {
        #[arg(long)]
        r: usize,
        #[arg(long, allow_hyphen_values = true, default_value = "a")]
        a: String,
    },
    /// Split a file into per-node chunk files.
    Encode {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        out_dir: PathBuf,
        /// Chunk name prefix; defaults to the input file name.
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Regenerate one node's chunk from all the others.
    Repair {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Rebuild the original file from k chunks.
    Reconstruct {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<usize>,
        #[arg(long)]
        prefix: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a failure/repair script on a simulated cluster.
    Simulate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        stripes: usize,
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print metrics as key=value lines.
        #[arg(long)]
        kv: bool,
    },
}

enum Failure {
    Parse(String),
    Verification(String),
    Io(String),
    Code(Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Io(_) => 3,
            Failure::Code(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::ValueOutOfField { .. } => Failure::Parse(e.to_string()),
            Error::UnverifiedBase(_) => Failure::Verification(e.to_string()),
            e => Failure::Code(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, data: &[u8]) -> CliResult<()> {
    fs::write(path, data).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, data: &[u8]) -> CliResult<()> {
    match output {
        Some(path) => write_bytes(path, data),
        None => io::stdout()
            .write_all(data)
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn load_code(path: &Path) -> CliResult<MsrCode> {
    Ok(load_bundle(&read_text(path)?)?)
}

fn parse_perm(text: &str, r: usize) -> CliResult<PermutationFamily> {
    if text == "cyclic" {
        return Ok(PermutationFamily::cyclic(r));
    }
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Failure::Parse(format!("--perm: cannot parse `{text}`")))?;
    PermutationFamily::explicit(rows).map_err(|e| Failure::Parse(format!("--perm: {e}")))
}

/// Finds `<prefix>` such that `<dir>/<prefix>.node<id>.bin` exists.
fn find_prefix(dir: &Path, prefix: Option<String>) -> CliResult<String> {
    if let Some(p) = prefix {
        return Ok(p);
    }
    let entries = fs::read_dir(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut prefixes: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter_map(|name| {
            let stem = name.strip_suffix(".bin")?;
            let (prefix, id) = stem.rsplit_once(".node")?;
            id.parse::<usize>().ok().map(|_| prefix.to_string())
        })
        .collect();
    prefixes.sort();
    prefixes.dedup();
    match prefixes.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(Failure::Io(format!("{}: no chunk files found", dir.display()))),
        _ => Err(Failure::Parse(format!(
            "{}: several chunk sets ({}); pass --prefix",
            dir.display(),
            prefixes.join(", ")
        ))),
    }
}

fn chunk_path(dir: &Path, prefix: &str, node: usize) -> PathBuf {
    dir.join(chunk_file_name(prefix, node))
}

fn run(cli: Cli) -> CliResult<()> {
    let exec = Exec::Sequential;
    match cli.command {
        Command::GenBase { r, q, seed, output } => {
            let base = make_eigen_base(r, q, seed)?;
            emit(output.as_deref(), save_descriptor(&base).as_bytes())
        }
        Command::Transform {
            base,
            perm,
            a,
            output,
        } => {
            let base = load_descriptor(&read_text(&base)?)?;
            let field = base.field().clone();
            let perms = parse_perm(&perm, base.r())?;
            let a = match a {
                Some(v) => field
                    .elem_from_signed(v)
                    .map_err(|e| Failure::Parse(format!("--a: {e}")))?,
                None => ThetaTable::default_a(&field),
            };
            let theta = ThetaTable::new(&field, base.r(), a)?;
            let msr = transform(base, perms, theta)?;
            emit(output.as_deref(), save_bundle(&msr).as_bytes())
        }
        Command::Verify {
            bundle,
            level,
            sequential,
        } => {
            let pool = if sequential {
                Exec::Sequential
            } else {
                Exec::default()
            };
            let BundleParts { base, perms, theta } = parse_bundle(&read_text(&bundle)?)?;
            let mut report = verify_mds_with(&base, pool);
            if base.repair().is_some() {
                report.merge(verify_repair(&base)?);
                report.merge(verify_access(&base)?);
            }
            if let Level::Full = level {
                let msr = MsrCode::new_unverified(base, perms, theta)?;
                report.merge(check_full_with_grid(&msr, msr.b_grid(), pool));
            }
            let flag = |f: Option<bool>| match f {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "skipped",
            };
            println!("mds: {}", flag(report.mds_ok));
            println!("repair: {}", flag(report.repair_ok));
            if let Level::Full = level {
                println!("structure: {}", flag(report.structure_ok));
            }
            for failure in &report.failures {
                println!("failed {failure}");
            }
            if report.passed() {
                Ok(())
            } else {
                let first = report.failures.first().map_or_else(
                    || "verification failed".to_string(),
                    |f| f.condition.to_string(),
                );
                Err(Failure::Verification(first))
            }
        }
        Command::Blueprint { r, a } => {
            if r < 2 {
                return Err(Failure::Parse("--r must be at least 2".into()));
            }
            let bp = Blueprint::new(&PermutationFamily::cyclic(r), &Orientation::default_for(r));
            emit(None, bp.render(&a).as_bytes())
        }
        Command::Encode {
            bundle,
            input,
            out_dir,
            prefix,
        } => {
            let msr = load_code(&bundle)?;
            let data = read_bytes(&input)?;
            let prefix = match prefix {
                Some(p) => p,
                None => input
                    .file_name()
                    .and_then(|n| n.to_str())
                    .ok_or_else(|| Failure::Parse("cannot derive a prefix; pass --prefix".into()))?
                    .to_string(),
            };
            let chunks = encode_file(&msr, &data, exec)?;
            fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::Io(format!("{}: {e}", out_dir.display())))?;
            for (id, chunk) in chunks.iter().enumerate() {
                let path = chunk_path(&out_dir, &prefix, id);
                write_bytes(&path, chunk)?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Repair {
            bundle,
            dir,
            node,
            prefix,
        } => {
            let msr = load_code(&bundle)?;
            if node >= msr.node_count() {
                return Err(Error::IndexOutOfRange(format!("node {node}")).into());
            }
            let prefix = find_prefix(&dir, prefix)?;
            let mut helpers = Vec::new();
            for id in (0..msr.node_count()).filter(|&id| id != node) {
                helpers.push((id, read_bytes(&chunk_path(&dir, &prefix, id))?));
            }
            let borrowed: Vec<(usize, &[u8])> =
                helpers.iter().map(|(id, b)| (*id, b.as_slice())).collect();
            let (chunk, trace) = repair_chunk(&msr, &borrowed, node, exec)?;
            write_bytes(&chunk_path(&dir, &prefix, node), &chunk)?;
            println!("{trace}");
            Ok(())
        }
        Command::Reconstruct {
            bundle,
            dir,
            nodes,
            prefix,
            output,
        } => {
            let msr = load_code(&bundle)?;
            let prefix = find_prefix(&dir, prefix)?;
            let mut chunks = Vec::with_capacity(nodes.len());
            for &id in &nodes {
                chunks.push((id, read_bytes(&chunk_path(&dir, &prefix, id))?));
            }
            let borrowed: Vec<(usize, &[u8])> =
                chunks.iter().map(|(id, b)| (*id, b.as_slice())).collect();
            let data = decode_file(&msr, &borrowed, exec)?;
            emit(output.as_deref(), &data)
        }
        Command::Simulate {
            bundle,
            stripes,
            script,
            seed,
            kv,
        } => {
            let msr = load_code(&bundle)?;
            let script = read_text(&script)?;
            let mut cluster = cluster_new(&msr, stripes, seed).with_exec(exec);
            for line in cluster.run_script(&script)? {
                println!("{line}");
            }
            if kv {
                print!("{}", cluster.metrics_kv());
            } else {
                print!("{}", cluster.metrics_report());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (class, msg) = match &failure {
                Failure::Parse(m) => ("parse", m.clone()),
                Failure::Verification(m) => ("verification", m.clone()),
                Failure::Io(m) => ("io", m.clone()),
                Failure::Code(e) => ("error", e.to_string()),
            };
            eprintln!("msrforge: {class}: {msg}");
            ExitCode::from(failure.exit_code())
        }
    }
}
