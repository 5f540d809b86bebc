//! Command-line front end. Reads a filtration in the `.flt` text format,
//! reduces its boundary matrix over a prime field with one of the five
//! algorithms, and prints the persistence diagram as TSV, with optional
//! representative chains, decomposition verification, and field-operation
//! tallies. `--bench` instead reduces seeded random filtrations of the
//! requested sizes and reports multiplication counts and their ratios.
//!
//! Results go to standard output, diagnostics (including wall-clock times,
//! which would break byte-for-byte reproducibility) to standard error.
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::fs;
use std::io::Read as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rdv_core::filtration::{boundary_matrix, parse_filtration};
use rdv_core::persistence::{
    cocycles_from_dual, extract_diagram, extract_r_representatives, extract_v_representatives,
    RepresentativeSet,
};
use rdv_core::random::random_filtration;
use rdv_core::reductions::reduce;
use rdv_core::{Algorithm, Chain, FieldContext, PersistencePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Representatives {
    None,
    V,
    R,
    Both,
}

impl Representatives {
    fn wants_v(self) -> bool {
        matches!(self, Representatives::V | Representatives::Both)
    }

    fn wants_r(self) -> bool {
        matches!(self, Representatives::R | Representatives::Both)
    }
}

#[derive(Parser)]
#[command(
    name = "rdv",
    version,
    about = "Persistent homology over prime fields via R = D·V boundary-matrix reduction"
)]
struct Cli {
    /// Input filtration in .flt format; `-` or absent reads standard input
    input: Option<String>,

    /// Reduction algorithm: lazy, exhaustive, row-incremental, fast-column,
    /// or fast-row
    #[arg(long, default_value = "fast-row")]
    algorithm: Algorithm,

    /// Field modulus (a prime below 2^16)
    #[arg(long, default_value_t = 2)]
    field: u32,

    /// Reduce the anti-transposed matrix and report persistent cohomology
    #[arg(long)]
    cohomology: bool,

    /// Representative chains to print alongside the diagram
    #[arg(long, value_enum, default_value_t = Representatives::None)]
    representatives: Representatives,

    /// Check the decomposition invariants; any failure exits nonzero
    #[arg(long)]
    verify: bool,

    /// Print field-operation tallies after the results
    #[arg(long)]
    count_ops: bool,

    /// Block size at which the recursive reducers switch to the
    /// incremental kernel
    #[arg(long, default_value_t = 32)]
    leaf_size: usize,

    /// Matrix size at which products fall back to the schoolbook kernel
    #[arg(long, default_value_t = 64)]
    strassen_cutoff: usize,

    /// Benchmark mode: reduce seeded random filtrations of these sizes
    /// instead of reading input
    #[arg(long, value_delimiter = ',', value_name = "N1,N2,…")]
    bench: Option<Vec<usize>>,

    /// Seed for the benchmark filtrations
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    if cli.leaf_size == 0 {
        return Err("leaf size must be at least 1".into());
    }
    let ctx = FieldContext::new(cli.field).map_err(|e| e.to_string())?;

    if let Some(sizes) = &cli.bench {
        bench(cli, &ctx, sizes)?;
        return Ok(ExitCode::SUCCESS);
    }

    let text = read_input(cli.input.as_deref())?;
    let filtration = parse_filtration(&text).map_err(|e| e.to_string())?;
    let dm = boundary_matrix(&filtration, &ctx);

    // Cohomology reduces the anti-transposed matrix; the decomposition kept
    // here is the one actually computed, so verification and operation
    // counts refer to it directly.
    let reduced = if cli.cohomology {
        dm.antitranspose()
    } else {
        dm.clone()
    };
    let dec = reduce(&reduced, cli.algorithm, cli.leaf_size, cli.strassen_cutoff)
        .map_err(|e| e.to_string())?;

    let (pairs, reps) = if cli.cohomology {
        let (pairs, cocycles) = cocycles_from_dual(&dm, &dec);
        if cli.representatives.wants_r() {
            eprintln!("note: cohomology computes cocycles only; no R chains");
        }
        let v = cli.representatives.wants_v().then_some(cocycles);
        (pairs, (v, None))
    } else {
        let pairs = extract_diagram(&dec, dm.dims());
        let v = cli
            .representatives
            .wants_v()
            .then(|| extract_v_representatives(&dec, dm.dims()));
        let r = cli
            .representatives
            .wants_r()
            .then(|| extract_r_representatives(&dec, dm.dims()));
        (pairs, (v, r))
    };

    let mut out = String::new();
    for pair in &pairs {
        out.push_str(&diagram_line(pair));
        append_rep_lines(&mut out, pair, &reps.0, &reps.1);
    }
    if cli.count_ops {
        let c = &dec.counter;
        out.push_str(&format!(
            "ops: mul={} add={} inv={}\n",
            c.mul_count, c.add_count, c.inv_count
        ));
    }
    print!("{out}");

    if cli.verify {
        let report = rdv_core::persistence::verify_decomposition(&reduced, &dec);
        if !report.all_passed() {
            eprintln!("verification failed: {}", report.failures().join("; "));
            return Ok(ExitCode::from(1));
        }
        eprintln!("verification passed ({} checks)", report.checks.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn read_input(input: Option<&str>) -> Result<String, String> {
    match input {
        None | Some("-") => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| format!("standard input: {e}"))?;
            Ok(text)
        }
        Some(path) => fs::read_to_string(path).map_err(|e| format!("{path}: {e}")),
    }
}

fn diagram_line(pair: &PersistencePair) -> String {
    match pair.death {
        Some(d) => format!("{}\t{}\t{}\n", pair.dim, pair.birth, d),
        None => format!("{}\t{}\tinf\n", pair.dim, pair.birth),
    }
}

fn append_rep_lines(
    out: &mut String,
    pair: &PersistencePair,
    v: &Option<RepresentativeSet>,
    r: &Option<RepresentativeSet>,
) {
    let death = pair
        .death
        .map_or_else(|| "inf".to_string(), |d| d.to_string());
    if let Some(chain) = v.as_ref().and_then(|set| set.v_basis.get(&pair.birth)) {
        out.push_str(&rep_line(pair.birth, &death, chain));
    }
    let death_key = pair.death.unwrap_or(0);
    if let Some(chain) = r.as_ref().and_then(|set| set.r_basis.get(&death_key)) {
        out.push_str(&rep_line(pair.birth, &death, chain));
    }
}

fn rep_line(birth: usize, death: &str, chain: &Chain) -> String {
    let mut line = format!("rep {birth} {death} :");
    for (index, coefficient) in &chain.coefficients {
        line.push_str(&format!(" {}*{}", index, coefficient.value()));
    }
    line.push('\n');
    line
}

fn bench(cli: &Cli, ctx: &FieldContext, sizes: &[usize]) -> Result<(), String> {
    println!(
        "# bench seed={} algorithm={} field={} leaf-size={} strassen-cutoff={}",
        cli.seed,
        cli.algorithm,
        cli.field,
        cli.leaf_size,
        cli.strassen_cutoff
    );
    let mut previous: Option<(usize, u64)> = None;
    for &n in sizes {
        let dm = boundary_matrix(&random_filtration(n, cli.seed), ctx);
        let start = Instant::now();
        let dec = reduce(&dm, cli.algorithm, cli.leaf_size, cli.strassen_cutoff)
            .map_err(|e| e.to_string())?;
        let wall = start.elapsed();
        let c = &dec.counter;
        println!(
            "n={n}\tmul={}\tadd={}\tinv={}",
            c.mul_count, c.add_count, c.inv_count
        );
        eprintln!("# n={n} wall={:.3}ms", wall.as_secs_f64() * 1e3);
        if let Some((pn, pm)) = previous {
            println!(
                "ratio {n}/{pn}\tmul={:.3}",
                c.mul_count as f64 / pm as f64
            );
        }
        previous = Some((n, c.mul_count));
    }
    Ok(())
}
