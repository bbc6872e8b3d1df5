mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{ConfigArgs, Format};
use v2g_core::bench::manifest::{load_suite, write_suite};
use v2g_core::bench::stats::{bootstrap_ci, mcnemar, McNemar, DEFAULT_LEVEL, DEFAULT_TRIALS};
use v2g_core::bench::{evaluate, generate_suite, EvalResult};
use v2g_core::builder::build;
use v2g_core::pipeline::{audit_document, parse_bytes, Ablation, PipelineConfig};
use v2g_core::planner::{Category, HttpPlannerClient, PlannerClient};
use v2g_core::report::{to_structured, to_text, StatusCounts};

const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Parser)]
#[command(name = "v2g", version, about = "Audit vector schematics against electrical compliance rules")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check one schematic. Exit 0 all pass, 2 any fail, 3 any indeterminate, 1 error.
    Audit {
        schematic: PathBuf,
        /// Report format [default: text, or the config file's value]
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Directory for <name>.report.json / <name>.report.txt instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Switch off one pipeline stage
        #[arg(long)]
        ablate: Option<Ablation>,
    },
    /// Dump the property graph built from a schematic as JSON.
    Graph {
        schematic: PathBuf,
        /// Output file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score the pipeline on a benchmark suite.
    Bench {
        /// Suite manifest written by --write-suite
        #[arg(long, conflicts_with = "generate")]
        manifest: Option<PathBuf>,
        /// Generate the default suite (the default when no manifest is given)
        #[arg(long)]
        generate: bool,
        /// Suite and bootstrap seed
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also score with this stage switched off and compare to the full pipeline (repeatable)
        #[arg(long)]
        ablate: Vec<Ablation>,
        /// Save the generated suite (manifest plus DXF files) to this directory
        #[arg(long)]
        write_suite: Option<PathBuf>,
        /// Write the metrics as JSON to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// 2 if anything failed, else 3 if anything was indeterminate, else 0.
fn exit_code(counts: &StatusCounts) -> u8 {
    if counts.fail > 0 {
        2
    } else if counts.indeterminate > 0 {
        3
    } else {
        0
    }
}

fn read_schematic(path: &Path) -> Result<v2g_core::dxf::Document> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_or_print(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn cmd_audit(
    cli: &ConfigArgs,
    schematic: &Path,
    format: Option<Format>,
    out: Option<&Path>,
    ablate: Option<Ablation>,
) -> Result<u8> {
    let cfg = cli.resolve()?;
    let format = format.or(cfg.format).unwrap_or_default();
    let mut pipeline = cfg.pipeline;
    pipeline.ablation = ablate;
    let client = cfg.planner_endpoint.as_deref().map(HttpPlannerClient::from_env);
    let doc = read_schematic(schematic)?;
    let name = schematic.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let audit = audit_document(&doc, &name, &pipeline, client.as_ref().map(|c| c as &dyn PlannerClient))
        .with_context(|| format!("auditing {}", schematic.display()))?;
    let report = &audit.report;
    let stem = schematic.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let target = |ext: &str| out.map(|dir| dir.join(format!("{stem}.report.{ext}")));
    if matches!(format, Format::Structured | Format::Both) {
        write_or_print(target("json").as_deref(), &to_structured(report))?;
    }
    if matches!(format, Format::Text | Format::Both) {
        write_or_print(target("txt").as_deref(), to_text(report).as_bytes())?;
    }
    for text in &audit.build.orphan_texts {
        eprintln!("warning: annotation {text:?} is not near any component");
    }
    Ok(exit_code(&report.summary.total))
}

fn cmd_graph(cli: &ConfigArgs, schematic: &Path, out: Option<&Path>) -> Result<u8> {
    let cfg = cli.resolve()?;
    let doc = read_schematic(schematic)?;
    let built = build(&doc, &cfg.pipeline.builder).with_context(|| format!("building {}", schematic.display()))?;
    let mut json = built.graph.to_json();
    if !json.ends_with('\n') {
        json.push('\n');
    }
    write_or_print(out, json.as_bytes())?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct ConfigMetrics {
    name: String,
    accuracy: Vec<(String, f64)>,
    overall: f64,
    ci: (f64, f64),
    mcnemar_vs_full: Option<McNemar>,
}

fn metrics(name: &str, r: &EvalResult, seed: u64, full: Option<&EvalResult>) -> Result<ConfigMetrics> {
    let ci = bootstrap_ci(&r.base_bits(), DEFAULT_TRIALS, DEFAULT_LEVEL, seed)?;
    Ok(ConfigMetrics {
        name: name.to_string(),
        accuracy: Category::ALL
            .iter()
            .map(|c| (c.label().to_string(), r.accuracy[c]))
            .collect(),
        overall: r.overall,
        ci,
        // identical predictions leave McNemar undefined
        mcnemar_vs_full: full.and_then(|f| mcnemar(&f.paired(r)).ok()),
    })
}

fn pct(x: f64) -> String {
    format!("{:.1}", x * 100.0)
}

fn cmd_bench(
    cli: &ConfigArgs,
    manifest: Option<&Path>,
    seed: u64,
    ablations: &[Ablation],
    write_to: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    let cfg = cli.resolve()?;
    let suite = match manifest {
        Some(path) => load_suite(path).with_context(|| format!("loading suite {}", path.display()))?,
        None => generate_suite(seed),
    };
    if let Some(dir) = write_to {
        let path = write_suite(&suite, dir)?;
        eprintln!("suite written to {}", path.display());
    }
    let full = evaluate(&suite, &cfg.pipeline);
    let mut rows = vec![metrics("full", &full, seed, None)?];
    for &a in ablations {
        let ablated = PipelineConfig {
            ablation: Some(a),
            ..cfg.pipeline.clone()
        };
        rows.push(metrics(a.name(), &evaluate(&suite, &ablated), seed, Some(&full))?);
    }

    println!(
        "{} base cases, {} variants",
        suite.cases.len(),
        suite.instance_count()
    );
    println!("{:10} {:>7} {:>8} {:>7} {:>8}  95% CI", "config", "Conn.", "Ground.", "Wiring", "Overall");
    for row in &rows {
        let acc: Vec<String> = row.accuracy.iter().map(|(_, a)| pct(*a)).collect();
        println!(
            "{:10} {:>7} {:>8} {:>7} {:>8}  [{}, {}]",
            row.name,
            acc[0],
            acc[1],
            acc[2],
            pct(row.overall),
            pct(row.ci.0),
            pct(row.ci.1)
        );
    }
    for row in rows.iter().skip(1) {
        match &row.mcnemar_vs_full {
            Some(m) => println!(
                "McNemar full vs {}: b={} c={} statistic={:.4} p={:.3e}",
                row.name, m.b, m.c, m.statistic, m.p_value
            ),
            None => println!("McNemar full vs {}: no discordant pairs", row.name),
        }
    }
    if let Some(path) = out {
        let mut json = serde_json::to_vec_pretty(&rows)?;
        json.push(b'\n');
        write_or_print(Some(path), &json)?;
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Audit {
            schematic,
            format,
            out,
            ablate,
        } => cmd_audit(&cli.config, schematic, *format, out.as_deref(), *ablate),
        Command::Graph { schematic, out } => cmd_graph(&cli.config, schematic, out.as_deref()),
        Command::Bench {
            manifest,
            generate: _,
            seed,
            ablate,
            write_suite,
            out,
        } => cmd_bench(&cli.config, manifest.as_deref(), *seed, ablate, write_suite.as_deref(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    // usage errors must not look like a failed audit (exit 2)
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
