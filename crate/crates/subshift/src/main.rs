//! Command-line interface: analyze substitution manifests, enumerate
//! supertile-shuffling symmetries, compute height lattices and fibre
//! structure, render supertiles, and export graphs.
//!
//! Exit codes: 0 success, 1 input error, 2 hypothesis violation (e.g. a
//! non-trivial height lattice where a trivial one is required), 3 internal
//! verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use itertools::Itertools;
use serde::Serialize;

use subshift::column_algebra::{analyze_columns, CoincidenceGraph};
use subshift::fibres::{
    fibre_cardinality, fibre_spectrum, fixed_point_seeds, pruned_reversed_graph, sofic_export,
    CoordSpec, DerivedSubstitution, FibreError, QadicPoint,
};
use subshift::height::{alphabet_partition, height_lattice, HeightError};
use subshift::manifest::parse_manifest;
use subshift::render::{ascii_render, ppm_render};
use subshift::subst::Substitution;
use subshift::symmetry::{enumerate_supertile_shuffling, SearchOpts, SymmetryError};

#[derive(Parser)]
#[command(name = "subshift", version, about = "Analysis of Z^d substitution subshifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Substitution manifest file.
    manifest: PathBuf,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Primitivity, column number, minimal sets, and realization power.
    Analyze(Common),
    /// Enumerate supertile-shuffling extended symmetries (tau, A).
    Symmetries(Common),
    /// Height lattice, fundamental domain, and alphabet partition.
    Height(Common),
    /// Fibre spectrum over the odometer, or a single-point report.
    Fibres {
        #[command(flatten)]
        common: Common,
        /// Point of the odometer: comma-separated coordinates, each either
        /// `int:<value>` or `[pre:<digits>;]period:<digits>` with digits
        /// least significant first (separate multi-decimal digits with `.`).
        #[arg(long)]
        point: Option<String>,
        /// Export the sofic presentation of the irregular fibres instead.
        #[arg(long)]
        sofic: bool,
        /// Write DOT output (with --sofic) to a file instead of stdout.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Render a supertile as ASCII art or a PPM image.
    Render {
        #[command(flatten)]
        common: Common,
        /// Letter whose supertile is rendered.
        #[arg(long)]
        letter: String,
        /// Substitution power.
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Write a binary PPM image to this file instead of ASCII output.
        #[arg(long, value_name = "FILE")]
        ppm: Option<PathBuf>,
    },
    /// DOT export of the coincidence graph, derived variants, and pruned
    /// reversed graphs.
    Graph {
        #[command(flatten)]
        common: Common,
        /// Derive across supertile boundaries along these axes first
        /// (comma-separated, 0-based).
        #[arg(long, value_delimiter = ',')]
        axes: Option<Vec<usize>>,
        /// Export the pruned reversed graph instead of the full graph.
        #[arg(long)]
        pruned: bool,
        /// Write the DOT output to a file instead of stdout.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

fn height_error(e: &HeightError) -> u8 {
    match e {
        HeightError::SaturationInvalid(_) | HeightError::InconsistentPartition(_) => 3,
        _ => 2,
    }
}

impl From<HeightError> for CliError {
    fn from(e: HeightError) -> Self {
        CliError { code: height_error(&e), message: e.to_string() }
    }
}

impl From<SymmetryError> for CliError {
    fn from(e: SymmetryError) -> Self {
        let code = match &e {
            SymmetryError::OracleMismatch { .. } => 3,
            SymmetryError::Height(h) => height_error(h),
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<FibreError> for CliError {
    fn from(e: FibreError) -> Self {
        let code = match &e {
            FibreError::NotBlock | FibreError::HeightNonTrivial(_) => 2,
            FibreError::Height(h) => height_error(h),
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

fn load(common: &Common) -> Result<Substitution, CliError> {
    let text = std::fs::read_to_string(&common.manifest)
        .map_err(|e| CliError::input(format!("{}: {e}", common.manifest.display())))?;
    let manifest = parse_manifest(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", common.manifest.display())))?;
    manifest
        .substitution()
        .map_err(|e| CliError::input(format!("{}: {e}", common.manifest.display())))
}

fn emit_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError { code: 3, message: e.to_string() })?;
    println!("{text}");
    Ok(())
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    letters: usize,
    dims: usize,
    digits: usize,
    primitivity_witness: Option<usize>,
    column_number: usize,
    minimal_sets: Vec<Vec<String>>,
    realization_power: Option<usize>,
}

fn cmd_analyze(common: &Common) -> Result<(), CliError> {
    let sub = load(common)?;
    let (_, family) = analyze_columns(&sub).map_err(|e| CliError { code: 2, message: e.to_string() })?;
    let report = AnalyzeReport {
        letters: sub.letters(),
        dims: sub.dim(),
        digits: sub.system.size(),
        primitivity_witness: sub.is_primitive(),
        column_number: family.column_number,
        minimal_sets: family
            .sets
            .iter()
            .map(|s| s.iter().map(|&l| sub.alphabet.name(l).to_string()).collect())
            .collect(),
        realization_power: family.realization_power,
    };
    if common.json {
        return emit_json(&report);
    }
    println!("letters:            {}", report.letters);
    println!("dimension:          {}", report.dims);
    println!("digits per tile:    {}", report.digits);
    match report.primitivity_witness {
        Some(k) => println!("primitive:          yes (witness exponent {k})"),
        None => println!("primitive:          no"),
    }
    println!("column number:      {}", report.column_number);
    for set in &report.minimal_sets {
        println!("minimal set:        {{{}}}", set.iter().join(", "));
    }
    match report.realization_power {
        Some(k) => println!("realization power:  {k}"),
        None => println!("realization power:  not realized"),
    }
    Ok(())
}

fn cmd_symmetries(common: &Common) -> Result<(), CliError> {
    let sub = load(common)?;
    let report = enumerate_supertile_shuffling(&sub, &SearchOpts::default())?;
    if common.json {
        return emit_json(&report);
    }
    println!("column number:      {}", report.column_number);
    println!("realization power:  {}", report.realization_power);
    if report.bijective_mode {
        println!("mode:               bijective (c = |alphabet|)");
    }
    for sym in &report.found {
        println!("found:              tau = {}, A = {}", sym.tau_cycles, sym.matrix);
    }
    for (matrix, reason) in &report.rejected {
        println!("rejected:           A = {matrix} ({reason:?})");
    }
    println!("psi image:          {} (order {})", report.psi_group_name, report.psi_image.len());
    if let Some(note) = &report.height_nontrivial_note {
        println!("note:               {note}");
    }
    Ok(())
}

fn cmd_height(common: &Common) -> Result<(), CliError> {
    let sub = load(common)?;
    let gamma = height_lattice(&sub)?;
    let data = alphabet_partition(&sub, &gamma)?;
    if common.json {
        return emit_json(&data);
    }
    println!("height lattice:     {gamma}");
    println!(
        "fundamental domain: [{}]",
        data.fundamental_domain.iter().map(|v| format!("({})", v.iter().join(","))).join(" ")
    );
    for (letter, residue) in data.partition.iter().enumerate() {
        println!(
            "letter {:<8} residue ({})",
            sub.alphabet.name(letter),
            residue.iter().join(",")
        );
    }
    Ok(())
}

fn parse_digits(text: &str, axis: usize) -> Result<Vec<i64>, CliError> {
    let parts: Vec<&str> = if text.contains('.') {
        text.split('.').collect()
    } else {
        // Single-character digits.
        return text
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(i64::from)
                    .ok_or_else(|| CliError::input(format!("axis {axis}: bad digit {c:?}")))
            })
            .collect();
    };
    parts
        .iter()
        .map(|p| {
            p.parse::<i64>()
                .map_err(|_| CliError::input(format!("axis {axis}: bad digit {p:?}")))
        })
        .collect()
}

fn parse_point(text: &str) -> Result<QadicPoint, CliError> {
    let mut coords = Vec::new();
    for (axis, part) in text.split(',').enumerate() {
        let part = part.trim();
        if let Some(value) = part.strip_prefix("int:") {
            let value = value
                .parse::<i64>()
                .map_err(|_| CliError::input(format!("axis {axis}: bad integer {value:?}")))?;
            coords.push(CoordSpec::Integer(value));
            continue;
        }
        let (pre, period) = match part.strip_prefix("pre:") {
            Some(rest) => {
                let (pre, period) = rest.split_once(';').ok_or_else(|| {
                    CliError::input(format!("axis {axis}: expected `pre:<digits>;period:<digits>`"))
                })?;
                let period = period.strip_prefix("period:").ok_or_else(|| {
                    CliError::input(format!("axis {axis}: expected `period:` after `pre:…;`"))
                })?;
                (parse_digits(pre, axis)?, parse_digits(period, axis)?)
            }
            None => {
                let period = part.strip_prefix("period:").ok_or_else(|| {
                    CliError::input(format!(
                        "axis {axis}: expected `int:<v>` or `[pre:<digits>;]period:<digits>`"
                    ))
                })?;
                (Vec::new(), parse_digits(period, axis)?)
            }
        };
        coords.push(CoordSpec::NonInteger { preperiod: pre, period });
    }
    Ok(QadicPoint { coords })
}

fn cmd_fibres(
    common: &Common,
    point: &Option<String>,
    sofic: bool,
    dot: &Option<PathBuf>,
) -> Result<(), CliError> {
    let sub = load(common)?;
    if sofic {
        let export = sofic_export(&sub)?;
        write_output(dot, &export.dot)?;
        if dot.is_some() && !common.json {
            print!("{}", export.edge_list);
        }
        return Ok(());
    }
    match point {
        Some(text) => {
            let point = parse_point(text)?;
            if point.coords.len() != sub.dim() {
                return Err(CliError::input(format!(
                    "point has {} coordinates, substitution has dimension {}",
                    point.coords.len(),
                    sub.dim()
                )));
            }
            if point.coords.iter().all(|c| matches!(c, CoordSpec::Integer(_))) {
                let seeds = fixed_point_seeds(&sub)?;
                if common.json {
                    #[derive(Serialize)]
                    struct SeedReport {
                        periodic_point_count: usize,
                    }
                    return emit_json(&SeedReport { periodic_point_count: seeds.len() });
                }
                println!("fully integer point: {} periodic-point seeds", seeds.len());
                return Ok(());
            }
            let report = fibre_cardinality(&sub, &point)?;
            if common.json {
                return emit_json(&report);
            }
            println!("integer axes:       [{}]", report.integer_axes.iter().join(", "));
            println!("column number:      {}", report.column_number);
            println!("fibre cardinality:  {}", report.cardinality);
            println!("irregular:          {}", report.irregular);
            for w in &report.witness {
                println!("witness vertex:     {w}");
            }
            Ok(())
        }
        None => {
            let spectrum = fibre_spectrum(&sub)?;
            if common.json {
                return emit_json(&spectrum);
            }
            println!("column number:      {}", spectrum.column_number);
            for entry in &spectrum.entries {
                println!(
                    "integer axes {{{}}}: max cardinality {}{}",
                    entry.integer_axes.iter().join(","),
                    entry.max_cardinality,
                    if entry.irregular { " (irregular)" } else { "" }
                );
            }
            println!("periodic-point seeds: {}", spectrum.periodic_point_count);
            Ok(())
        }
    }
}

fn cmd_render(
    common: &Common,
    letter: &str,
    level: usize,
    ppm: &Option<PathBuf>,
) -> Result<(), CliError> {
    let sub = load(common)?;
    let letter = sub
        .alphabet
        .index_of(letter)
        .ok_or_else(|| CliError::input(format!("unknown letter {letter:?}")))?;
    match ppm {
        Some(path) => {
            let bytes = ppm_render(&sub, letter, level);
            std::fs::write(path, bytes)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        }
        None => print!("{}", ascii_render(&sub, letter, level)),
    }
    Ok(())
}

fn cmd_graph(
    common: &Common,
    axes: &Option<Vec<usize>>,
    pruned: bool,
    dot: &Option<PathBuf>,
) -> Result<(), CliError> {
    let sub = load(common)?;
    let axes = axes.clone().unwrap_or_default();
    let content = if pruned {
        let graph = pruned_reversed_graph(&sub, &axes)?;
        graph.to_dot()
    } else if axes.is_empty() {
        CoincidenceGraph::build(&sub).to_dot(&sub, false)
    } else {
        let derived = DerivedSubstitution::new(&sub, &axes)?;
        CoincidenceGraph::build(&derived.sub).to_dot(&derived.sub, false)
    };
    write_output(dot, &content)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Analyze(common) => cmd_analyze(common),
        Command::Symmetries(common) => cmd_symmetries(common),
        Command::Height(common) => cmd_height(common),
        Command::Fibres { common, point, sofic, dot } => cmd_fibres(common, point, *sofic, dot),
        Command::Render { common, letter, level, ppm } => cmd_render(common, letter, *level, ppm),
        Command::Graph { common, axes, pruned, dot } => cmd_graph(common, axes, *pruned, dot),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
