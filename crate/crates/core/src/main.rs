use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use getreason::agents::Mode;
use getreason::harness::{
    cmd_compare, cmd_ingest, cmd_report, cmd_run, cmd_score, render_text, write_json, BackendKind,
    Config, HarnessError,
};
use getreason::metrics::{Combo, Profile};

#[derive(Parser)]
#[command(
    name = "getreason",
    version,
    about = "Multi-agent image context extraction and GREAT scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML config; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset JSONL.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Weight profile: tara or wikitilo.
    #[arg(long, global = true)]
    profile: Option<Profile>,
    /// CSV gazetteer replacing the bundled one.
    #[arg(long, global = true)]
    gazetteer: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset and report utilized/excluded counts.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Also write the report as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the pipeline over a dataset.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        run_id: Option<String>,
        #[arg(long)]
        runs_dir: Option<PathBuf>,
        /// Mock backend fixture JSONL (selects the mock backend).
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        max_in_flight: Option<usize>,
        #[arg(long)]
        max_parse_retries: Option<u32>,
        #[arg(long)]
        no_scene_graph: bool,
        #[arg(long)]
        no_abstract: bool,
        #[arg(long)]
        no_prompt_agent: bool,
        #[arg(long)]
        no_image_in_prompt_layer: bool,
        #[arg(long)]
        no_image_in_extraction: bool,
    },
    /// Score a predictions file against dataset ground truth.
    Score {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        predictions: PathBuf,
        /// Output directory; defaults to the predictions file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Row label for reports; defaults to the output directory name.
        #[arg(long)]
        label: Option<String>,
    },
    /// Net error change of run A over run B.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Combination such as TS, GS+ES or All; repeatable.
        #[arg(long = "combo")]
        combos: Vec<Combo>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Render summaries as result tables.
    Report {
        #[command(flatten)]
        common: Common,
        /// summary.json files.
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// Row labels, in summary order.
        #[arg(long = "label")]
        labels: Vec<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<Config, HarnessError> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(d) = &common.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(p) = common.profile {
        cfg.profile = p;
    }
    if let Some(g) = &common.gazetteer {
        cfg.gazetteer = Some(g.clone());
    }
    Ok(cfg)
}

/// Ok(true) when the command finished with warnings.
fn execute(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Ingest { common, json } => {
            let cfg = load_config(&common)?;
            let report = cmd_ingest(cfg.dataset_path()?)?;
            println!(
                "total {}  excluded {}  utilized {}",
                report.total, report.excluded, report.utilized
            );
            for e in &report.exclusions {
                println!(
                    "  line {} {}: {}",
                    e.line,
                    e.id.as_deref().unwrap_or("-"),
                    e.reason
                );
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(p) = json {
                write_json(&p, &report)?;
            }
            Ok(report.excluded > 0 || !report.warnings.is_empty())
        }
        Command::Run {
            common,
            run_id,
            runs_dir,
            fixtures,
            mode,
            workers,
            max_in_flight,
            max_parse_retries,
            no_scene_graph,
            no_abstract,
            no_prompt_agent,
            no_image_in_prompt_layer,
            no_image_in_extraction,
        } => {
            let mut cfg = load_config(&common)?;
            if run_id.is_some() {
                cfg.run_id = run_id;
            }
            if let Some(d) = runs_dir {
                cfg.runs_dir = d;
            }
            if let Some(f) = fixtures {
                cfg.backend.kind = BackendKind::Mock;
                cfg.backend.fixtures = Some(f);
            }
            if let Some(m) = mode {
                cfg.pipeline.mode = m;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(m) = max_in_flight {
                cfg.backend.max_in_flight = m;
            }
            if let Some(r) = max_parse_retries {
                cfg.backend.max_parse_retries = r;
            }
            let p = &mut cfg.pipeline;
            p.enable_scene_graph &= !no_scene_graph;
            p.enable_abstract &= !no_abstract;
            p.enable_prompt_agent &= !no_prompt_agent;
            p.include_image_in_prompt_layer &= !no_image_in_prompt_layer;
            p.include_image_in_extraction &= !no_image_in_extraction;
            let out = cmd_run(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "run {}: {}/{} records completed, {} with degraded stages -> {}",
                out.run_id,
                out.n_completed,
                out.n_records,
                out.n_degraded,
                out.run_dir.display()
            );
            Ok(!out.warnings.is_empty())
        }
        Command::Score {
            common,
            predictions,
            out,
            label,
        } => {
            let cfg = load_config(&common)?;
            let out_dir =
                out.unwrap_or_else(|| predictions.parent().unwrap_or(Path::new(".")).to_path_buf());
            let label = label.unwrap_or_else(|| {
                out_dir
                    .canonicalize()
                    .ok()
                    .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                    .unwrap_or_else(|| "run".into())
            });
            let res = cmd_score(&cfg, &predictions, cfg.dataset_path()?, &out_dir, &label)?;
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            let m = &res.summary.summary.means;
            let event = m.event.map_or("-".to_string(), |e| format!("{e:.1}"));
            println!(
                "{} scored {}/{}: geo {:.1} temp {:.1} event {} overall {:.1} -> {}",
                res.summary.label,
                res.summary.n_scored,
                res.summary.n_predictions,
                m.geo,
                m.temporal,
                event,
                m.overall,
                res.summary_path.display()
            );
            Ok(!res.warnings.is_empty())
        }
        Command::Compare {
            common: _,
            a,
            b,
            combos,
            json,
        } => {
            let table = cmd_compare(&a, &b, &combos)?;
            print!("{}", table.render());
            if let Some(p) = json {
                write_json(&p, &table)?;
            }
            Ok(false)
        }
        Command::Report {
            common: _,
            summaries,
            labels,
            json,
        } => {
            let inputs: Vec<(Option<String>, &Path)> = summaries
                .iter()
                .enumerate()
                .map(|(i, p)| (labels.get(i).cloned(), p.as_path()))
                .collect();
            let report = cmd_report(&inputs)?;
            print!("{}", render_text(&report));
            if let Some(p) = json {
                write_json(&p, &report)?;
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
