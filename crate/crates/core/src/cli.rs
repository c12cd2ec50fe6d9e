//! Command-line front end: equivalence checking, the deferred-measurement
//! pass, challenge classification, mutant generation, the teleportation
//! challenge generator, and benchmark runs with JSON reports.
//!
//! Exit codes for `check`: 0 equivalent, 1 not equivalent, 2 inconclusive
//! or timeout, 3 error. Other commands exit 0 on success and 3 on error,
//! except `bench`, which exits 1 when an expected verdict is missed.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::challenge;
use crate::circuit::{classify, HybridCircuit};
use crate::defer::deferred_measurement;
use crate::equiv::{check_hybrid, CheckOptions, StallReason, Verdict};
use crate::pathsum::{separate, PathSum, ReduceStats, Separation};
use crate::qasm::{self, Sidecar};
use crate::report::{parse_manifest, Record, Report};

#[derive(Parser)]
#[command(
    name = "circeq",
    about = "Equivalence checking of hybrid quantum circuits via deferred measurement and path-sums",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check two OpenQASM programs for functional equivalence.
    Check {
        a: PathBuf,
        b: PathBuf,
        /// Timeout in seconds (0 disables).
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
        /// Append the check record to a JSON report file.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print the normal forms behind the verdict.
        #[arg(long)]
        explain: bool,
    },
    /// Rewrite a program into init / unitary / measure normal form.
    Defer {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Report the challenge class (DisFree / Mix / Dis) of a pair.
    Classify { a: PathBuf, b: PathBuf },
    /// Generate mutants confirmed non-equivalent to the input.
    Mutate {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Output directory for mutant programs.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Thread selected wires through the teleportation gadget.
    Teleportify {
        input: PathBuf,
        /// Comma-separated wire indices.
        #[arg(long, value_delimiter = ',')]
        wires: Vec<u32>,
        /// Keep the classically controlled (dynamic) form instead of the
        /// deferred one.
        #[arg(long)]
        dynamic: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a manifest of challenge pairs and write a JSON report.
    Bench {
        /// Directory the manifest's paths are relative to.
        dir: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Report output path.
        #[arg(short, long)]
        output: PathBuf,
        /// Worker threads (1 = fully deterministic order of execution).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
        /// Write wall_ms as 0 for byte-reproducible reports.
        #[arg(long)]
        zero_timings: bool,
    },
}

pub fn run(args: impl Iterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match cli.cmd {
        Cmd::Check { a, b, timeout, json, explain } => {
            cmd_check(&a, &b, timeout, json.as_deref(), explain)
        }
        Cmd::Defer { input, output } => cmd_defer(&input, &output),
        Cmd::Classify { a, b } => cmd_classify(&a, &b),
        Cmd::Mutate { input, seed, count, output } => cmd_mutate(&input, seed, count, &output),
        Cmd::Teleportify { input, wires, dynamic, output } => {
            cmd_teleportify(&input, &wires, dynamic, &output)
        }
        Cmd::Bench { dir, manifest, output, jobs, timeout, zero_timings } => {
            cmd_bench(&dir, &manifest, &output, jobs, timeout, zero_timings)
        }
    }
}

fn load_circuit(path: &Path) -> Result<HybridCircuit, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let sidecar_file = qasm::sidecar_path(path);
    let sidecar: Option<Sidecar> = if sidecar_file.is_file() {
        let raw = std::fs::read_to_string(&sidecar_file)
            .map_err(|e| format!("cannot read {}: {e}", sidecar_file.display()))?;
        Some(
            serde_json::from_str(&raw)
                .map_err(|e| format!("bad sidecar {}: {e}", sidecar_file.display()))?,
        )
    } else {
        None
    };
    qasm::parse(&text, sidecar.as_ref()).map_err(|e| format!("{}: {e}", path.display()))
}

fn options_with_timeout(seconds: f64) -> CheckOptions {
    CheckOptions {
        timeout: if seconds > 0.0 { Some(Duration::from_secs_f64(seconds)) } else { None },
        ..CheckOptions::default()
    }
}

fn explain_pair(c1: &HybridCircuit, c2: &HybridCircuit) {
    for (label, c) in [("first", c1), ("second", c2)] {
        let dm = deferred_measurement(c);
        println!("--- {label} circuit after deferred measurement ---");
        match qasm::emit(&dm) {
            Ok((text, _)) => print!("{text}"),
            Err(e) => println!("(not printable: {e})"),
        }
        let Ok(d) = dm.decompose_ium() else { continue };
        let mut stats = ReduceStats::default();
        let init: BTreeSet<u32> = d.init_order.iter().map(|w| w.0).collect();
        match PathSum::of_circuit_with(
            &crate::circuit::expand_controlled_h(&d.unitary),
            dm.n_qubits as usize,
            1,
            &mut stats,
        ) {
            Ok(ps) => {
                let projected = ps.project(&init).reduce_with(&mut stats);
                println!("reduced path-sum: {projected}");
                let disc: BTreeSet<usize> = dm.discards.iter().map(|w| w.0 as usize).collect();
                if !disc.is_empty() {
                    match separate(&projected, &disc, &mut stats) {
                        Separation::Separated(r) => println!("kept factor:      {}", r.kept),
                        Separation::Fail(f) => println!("separation failed: {f:?}"),
                    }
                }
            }
            Err(e) => println!("(no path-sum: {e})"),
        }
    }
}

fn append_json_record(path: &Path, record: Record) -> Result<(), String> {
    let mut report = if path.is_file() {
        let raw = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        serde_json::from_str::<Report>(&raw).unwrap_or_default()
    } else {
        Report::default()
    };
    report.push(record);
    std::fs::write(path, report.to_json()).map_err(|e| e.to_string())
}

fn cmd_check(a: &Path, b: &Path, timeout: f64, json: Option<&Path>, explain: bool) -> i32 {
    let (c1, c2) = match (load_circuit(a), load_circuit(b)) {
        (Ok(c1), Ok(c2)) => (c1, c2),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let outcome = check_hybrid(&c1, &c2, &options_with_timeout(timeout));
    match &outcome.verdict {
        Verdict::Equivalent => println!("equivalent (class {})", outcome.class),
        Verdict::NotEquivalent(w) => {
            println!("NOT equivalent (class {}): {}", outcome.class, w.description)
        }
        Verdict::Inconclusive(StallReason::Timeout) => {
            println!("inconclusive (class {}): timeout", outcome.class)
        }
        Verdict::Inconclusive(r) => println!("inconclusive (class {}): {r:?}", outcome.class),
        Verdict::Error(e) => eprintln!("error: {e}"),
    }
    println!(
        "wall {} ms, peak {} path vars, {} rule firings",
        outcome.metrics.wall_ms, outcome.metrics.path_var_peak, outcome.metrics.rule_firings
    );
    if explain {
        explain_pair(&c1, &c2);
    }
    if let Some(path) = json {
        let name = format!(
            "{} vs {}",
            a.file_name().unwrap_or_default().to_string_lossy(),
            b.file_name().unwrap_or_default().to_string_lossy()
        );
        if let Err(e) = append_json_record(path, Record::from_outcome(&name, &outcome)) {
            eprintln!("error writing report: {e}");
            return 3;
        }
    }
    outcome.verdict.exit_code()
}

fn write_circuit(c: &HybridCircuit, output: &Path) -> Result<(), String> {
    let (text, sidecar) = qasm::emit(c).map_err(|e| e.to_string())?;
    std::fs::write(output, &text).map_err(|e| format!("cannot write {}: {e}", output.display()))?;
    if !sidecar.is_empty() {
        let path = qasm::sidecar_path(output);
        let body = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
        std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn cmd_defer(input: &Path, output: &Path) -> i32 {
    let c = match load_circuit(input) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    println!("before: l_init = {}, e_meas = {}", c.l_init(), c.e_meas());
    let dm = deferred_measurement(&c);
    println!("after:  l_init = {}, e_meas = {}", dm.l_init(), dm.e_meas());
    match write_circuit(&dm, output) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn cmd_classify(a: &Path, b: &Path) -> i32 {
    match (load_circuit(a), load_circuit(b)) {
        (Ok(c1), Ok(c2)) => {
            println!("{}", classify(&c1, &c2));
            0
        }
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn cmd_mutate(input: &Path, seed: u64, count: usize, output: &Path) -> i32 {
    let c = match load_circuit(input) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let mutants = match challenge::generate_mutants(&c, seed, count) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    if let Err(e) = std::fs::create_dir_all(output) {
        eprintln!("error: cannot create {}: {e}", output.display());
        return 3;
    }
    for (i, m) in mutants.iter().enumerate() {
        let path = output.join(format!("mutant_{i:03}.qasm"));
        if let Err(e) = write_circuit(&m.circuit, &path) {
            eprintln!("error: mutant {i}: {e}");
            return 3;
        }
        println!("{} ({:?}, evidence {:?})", path.display(), m.op.kind, m.evidence);
    }
    0
}

fn cmd_teleportify(input: &Path, wires: &[u32], dynamic: bool, output: &Path) -> i32 {
    let c = match load_circuit(input) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let out = match challenge::teleportify(&c, wires, dynamic) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    match write_circuit(&out, output) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn run_entry(
    dir: &Path,
    entry: &crate::report::ManifestEntry,
    opts: &CheckOptions,
) -> (Record, bool) {
    let a = dir.join(&entry.a);
    let b = dir.join(&entry.b);
    let record = match (load_circuit(&a), load_circuit(&b)) {
        (Ok(c1), Ok(c2)) => {
            let outcome = check_hybrid(&c1, &c2, opts);
            Record::from_outcome(&entry.name, &outcome)
        }
        (Err(e), _) | (_, Err(e)) => Record::error(&entry.name, None, e),
    };
    let matched = entry.expect.as_deref().map_or(true, |want| want == record.verdict);
    (record, matched)
}

fn cmd_bench(
    dir: &Path,
    manifest: &Path,
    output: &Path,
    jobs: usize,
    timeout: f64,
    zero_timings: bool,
) -> i32 {
    let manifest_text = match std::fs::read_to_string(manifest) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", manifest.display());
            return 3;
        }
    };
    let entries = match parse_manifest(&manifest_text) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: bad manifest: {e}");
            return 3;
        }
    };
    let opts = options_with_timeout(timeout);

    let mut slots: Vec<Option<(Record, bool)>> = Vec::new();
    slots.resize_with(entries.len(), || None);
    if jobs <= 1 {
        for (i, entry) in entries.iter().enumerate() {
            slots[i] = Some(run_entry(dir, entry, &opts));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots_mutex = std::sync::Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(entries.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= entries.len() {
                        break;
                    }
                    let result = run_entry(dir, &entries[i], &opts);
                    slots_mutex.lock().expect("no poison")[i] = Some(result);
                });
            }
        });
    }

    let mut report = Report::default();
    let mut mismatches: Vec<String> = Vec::new();
    for (entry, slot) in entries.iter().zip(slots) {
        let (mut record, matched) = slot.expect("every entry ran");
        if zero_timings {
            record.zero_timings();
        }
        if !matched {
            mismatches.push(format!(
                "{}: expected {}, got {}",
                entry.name,
                entry.expect.as_deref().unwrap_or("-"),
                record.verdict
            ));
        }
        report.push(record);
    }
    if let Err(e) = std::fs::write(output, report.to_json()) {
        eprintln!("error: cannot write {}: {e}", output.display());
        return 3;
    }
    println!(
        "{} pairs: {} equivalent, {} not, {} inconclusive, {} timeout, {} error",
        report.records.len(),
        report.totals.equivalent,
        report.totals.not_equivalent,
        report.totals.inconclusive,
        report.totals.timeout,
        report.totals.error
    );
    if mismatches.is_empty() {
        0
    } else {
        for m in &mismatches {
            eprintln!("verdict mismatch: {m}");
        }
        1
    }
}
