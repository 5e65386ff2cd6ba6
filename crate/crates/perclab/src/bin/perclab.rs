//! Command-line front end: simulate realizations, certify angles, replay the
//! inductive argument, sweep angle ranges, run campaigns, render figures.
//!
//! Every run writes `manifest.txt` (the fully resolved configuration, itself
//! a valid config file) into the output directory, so any run is
//! reproducible from its manifest alone.
//!
//! Exit codes: 0 success, 2 configuration error, 3 not-found or negative
//! result, 4 resource budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use perclab::config::Config;
use perclab::error::PerclabError;
use perclab::geometry::radial::{Center, RadialKind};
use perclab::geometry::ProjectionFrame;
use perclab::harness::{campaign_csv, run_campaign, CampaignConfig};
use perclab::operator::certify::{certify_a, tile_angle_range, CertificateA, CertifyOutcome, SearchParams};
use perclab::operator::IntervalPair;
use perclab::render::{render_svg, ShadowSource};
use perclab::replay::{replay_angle_range, replay_single_angle};
use perclab::tree::{parse_dump, sample_tree};

#[derive(Parser)]
#[command(name = "perclab", version, about = "fractal percolation projection laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// configuration file (key=value lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// override a config key (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// sample a realization; write the tree dump and a summary
    Simulate,
    /// certify the covering condition at the configured angles
    Certify,
    /// replay the inductive argument against certificates
    Replay,
    /// cover an angle range by certified closed intervals
    Sweep,
    /// run a Monte Carlo campaign
    Campaign,
    /// render the level set and its shadow as SVG
    Render,
}

fn exit_code_of(err: &PerclabError) -> u8 {
    match err {
        PerclabError::ResourceBudget { .. } => 4,
        PerclabError::EmptySample(_)
        | PerclabError::InsufficientSample { .. }
        | PerclabError::DerivationFailure(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_of(&err))
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, PerclabError> {
    let mut config = match &cli.config {
        Some(path) => Config::parse(&std::fs::read_to_string(path)?)?,
        None => Config::default(),
    };
    for assignment in &cli.overrides {
        config.apply_override(assignment)?;
    }
    Ok(config)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), PerclabError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<u8, PerclabError> {
    let config = load_config(cli)?;
    write_out(&cli.out, "manifest.txt", &config.manifest())?;
    match cli.command {
        Command::Simulate => simulate(&config, &cli.out),
        Command::Certify => certify(&config, &cli.out),
        Command::Replay => replay(&config, &cli.out),
        Command::Sweep => sweep(&config, &cli.out),
        Command::Campaign => campaign(&config, &cli.out),
        Command::Render => render(&config, &cli.out),
    }
}

const MATRIX_KEYS: &[&str] = &["matrix.m", "matrix.p", "matrix.hole"];

fn simulate(config: &Config, out: &Path) -> Result<u8, PerclabError> {
    config.reject_unknown(
        &[MATRIX_KEYS, &["tree.depth", "tree.seed"]].concat(),
        &["matrix.row"],
    )?;
    let matrix = config.matrix()?;
    let depth = config.get_usize("tree.depth", 0)?;
    let seed = config.get_u64("tree.seed", 0)?;
    let tree = sample_tree(&matrix, depth, seed);
    write_out(out, "tree.txt", &tree.dump())?;
    let counts = tree.counts_per_level();
    let mut summary = String::from("# perclab-summary v1\n");
    summary.push_str(&format!("survived={}\n", u8::from(tree.survives())));
    summary.push_str(&format!(
        "supercritical={} dimension_above_one={}\n",
        u8::from(matrix.is_supercritical()),
        u8::from(matrix.exceeds_grid_order())
    ));
    for (n, c) in counts.iter().enumerate() {
        summary.push_str(&format!("count_{n}={c}\n"));
    }
    write_out(out, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(0)
}

fn search_params(config: &Config) -> Result<SearchParams, PerclabError> {
    let mut search = SearchParams {
        pair: None,
        r_max: config.get_usize("certify.r_max", 8)?,
        budget: config.get_u64("certify.budget", 1 << 24)?,
    };
    if let (Some(i1), Some(i2)) = (config.get("certify.i1"), config.get("certify.i2")) {
        let parse_iv = |s: &str| -> Result<(f64, f64), PerclabError> {
            let (a, b) = s
                .split_once(',')
                .ok_or_else(|| PerclabError::Config(format!("bad interval `{s}`")))?;
            Ok((
                a.trim()
                    .parse()
                    .map_err(|_| PerclabError::Config(format!("bad interval `{s}`")))?,
                b.trim()
                    .parse()
                    .map_err(|_| PerclabError::Config(format!("bad interval `{s}`")))?,
            ))
        };
        search.pair = Some(IntervalPair::new(parse_iv(i1)?, parse_iv(i2)?)?);
    }
    Ok(search)
}

fn certify(config: &Config, out: &Path) -> Result<u8, PerclabError> {
    config.reject_unknown(
        &[
            MATRIX_KEYS,
            &[
                "certify.angles",
                "certify.r_max",
                "certify.budget",
                "certify.i1",
                "certify.i2",
            ],
        ]
        .concat(),
        &["matrix.row"],
    )?;
    let matrix = config.matrix()?;
    let angles = config.angles("certify.angles")?;
    if angles.is_empty() {
        return Err(PerclabError::Config("certify.angles is required".into()));
    }
    let search = search_params(config)?;

    let mut lines = vec![json!({"format": "perclab-certificates", "version": 1}).to_string()];
    let mut all_certified = true;
    for &alpha in &angles {
        let frame = ProjectionFrame::from_radians(alpha)?;
        match certify_a(&matrix, &frame, &search)? {
            CertifyOutcome::Certified(cert) => {
                lines.push(
                    json!({"alpha": alpha, "certified": true, "certificate": cert}).to_string(),
                );
            }
            CertifyOutcome::NotFound { r_max, best_min } => {
                all_certified = false;
                lines.push(
                    json!({
                        "alpha": alpha,
                        "certified": false,
                        "r_max": r_max,
                        "best_min": best_min,
                    })
                    .to_string(),
                );
            }
        }
    }
    write_out(out, "certificates.jsonl", &(lines.join("\n") + "\n"))?;
    println!(
        "certified {} of {} angle(s)",
        lines.len() - 1 - usize::from(!all_certified),
        angles.len()
    );
    Ok(if all_certified { 0 } else { 3 })
}

fn read_certificates(path: &str) -> Result<Vec<CertificateA>, PerclabError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap_or("{}"))
        .map_err(|e| PerclabError::Config(format!("bad certificate file header: {e}")))?;
    if header["format"] != "perclab-certificates" {
        return Err(PerclabError::Config(
            "certificate file missing format header".into(),
        ));
    }
    let mut certs = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let record: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| PerclabError::Config(format!("bad certificate record: {e}")))?;
        if record["certified"] == serde_json::Value::Bool(true) {
            let cert: CertificateA = serde_json::from_value(record["certificate"].clone())
                .map_err(|e| PerclabError::Config(format!("bad certificate record: {e}")))?;
            certs.push(cert);
        }
    }
    Ok(certs)
}

fn replay(config: &Config, out: &Path) -> Result<u8, PerclabError> {
    config.reject_unknown(
        &[
            MATRIX_KEYS,
            &["tree.depth", "tree.seed", "replay.cert", "replay.n_max"],
        ]
        .concat(),
        &["matrix.row"],
    )?;
    let matrix = config.matrix()?;
    let depth = config.get_usize("tree.depth", 0)?;
    let seed = config.get_u64("tree.seed", 0)?;
    let n_max = config.get_usize("replay.n_max", 3)?;
    let certs = read_certificates(config.require("replay.cert")?)?;
    if certs.is_empty() {
        return Err(PerclabError::Config(
            "certificate file contains no certificates".into(),
        ));
    }
    let tree = sample_tree(&matrix, depth, seed);

    let mut lines = vec![json!({"format": "perclab-replay", "version": 1}).to_string()];
    let mut all_passed = true;
    for cert in &certs {
        let report = if cert.angle_range.is_some() {
            replay_angle_range(&tree, cert, n_max)?
        } else {
            replay_single_angle(&tree, cert, n_max)?
        };
        all_passed &= report.passed;
        lines.push(serde_json::to_string(&report).expect("report serializes"));
    }
    write_out(out, "replay.jsonl", &(lines.join("\n") + "\n"))?;
    println!(
        "replayed {} certificate(s); all passed: {all_passed}",
        certs.len()
    );
    Ok(if all_passed { 0 } else { 3 })
}

fn sweep(config: &Config, out: &Path) -> Result<u8, PerclabError> {
    config.reject_unknown(
        &[
            MATRIX_KEYS,
            &[
                "sweep.start",
                "sweep.end",
                "certify.r_max",
                "certify.budget",
                "certify.i1",
                "certify.i2",
            ],
        ]
        .concat(),
        &["matrix.row"],
    )?;
    let matrix = config.matrix()?;
    let start = perclab::config::parse_angle(config.require("sweep.start")?)?;
    let end = perclab::config::parse_angle(config.require("sweep.end")?)?;
    let search = search_params(config)?;
    let tiling = tile_angle_range(&matrix, start, end, &search)?;

    let mut lines = vec![json!({"format": "perclab-sweep", "version": 1}).to_string()];
    for cert in &tiling.pieces {
        let (lo, hi) = cert.angle_range.expect("tiling pieces carry ranges");
        lines.push(json!({"j_lo": lo, "j_hi": hi, "certificate": cert}).to_string());
    }
    if let Some(pos) = tiling.failure_at {
        lines.push(json!({"failure_at": pos}).to_string());
    }
    write_out(out, "sweep.jsonl", &(lines.join("\n") + "\n"))?;
    println!(
        "covered [{start}, {end}] with {} piece(s); full: {}",
        tiling.pieces.len(),
        tiling.full()
    );
    Ok(if tiling.full() { 0 } else { 3 })
}

fn campaign(config: &Config, out: &Path) -> Result<u8, PerclabError> {
    config.reject_unknown(
        &[
            MATRIX_KEYS,
            &[
                "campaign.depth",
                "campaign.count_depth",
                "campaign.trials",
                "campaign.seed",
                "campaign.angles",
                "campaign.centers",
                "campaign.min_interval",
                "replay.cert",
                "replay.n_max",
            ],
        ]
        .concat(),
        &["matrix.row"],
    )?;
    let matrix = config.matrix()?;
    let depth = config.get_usize("campaign.depth", 10)?;
    let centers = match config.get("campaign.centers") {
        None => Vec::new(),
        Some(spec) => spec
            .split(';')
            .map(|pair| -> Result<(f64, f64), PerclabError> {
                let (x, y) = pair
                    .split_once(',')
                    .ok_or_else(|| PerclabError::Config(format!("bad center `{pair}`")))?;
                Ok((
                    x.trim()
                        .parse()
                        .map_err(|_| PerclabError::Config(format!("bad center `{pair}`")))?,
                    y.trim()
                        .parse()
                        .map_err(|_| PerclabError::Config(format!("bad center `{pair}`")))?,
                ))
            })
            .collect::<Result<_, _>>()?,
    };
    let certificate = match config.get("replay.cert") {
        None => None,
        Some(path) => read_certificates(path)?.into_iter().next(),
    };
    let campaign_config = CampaignConfig {
        matrix,
        depth,
        count_depth: config.get_usize("campaign.count_depth", depth.min(8))?,
        trials: config.get_u64("campaign.trials", 100)?,
        base_seed: config.get_u64("campaign.seed", 0)?,
        angles: config.angles("campaign.angles")?,
        centers,
        min_interval_length: config.get_f64("campaign.min_interval", 0.2)?,
        certificate,
        replay_n_max: config.get_usize("replay.n_max", 1)?,
    };
    let result = run_campaign(&campaign_config)?;
    write_out(out, "results.csv", &campaign_csv(&result, &campaign_config))?;
    write_out(
        out,
        "aggregates.json",
        &(serde_json::to_string_pretty(&result.aggregates).expect("aggregates serialize") + "\n"),
    )?;
    println!(
        "{} trials, survival frequency {:.4}",
        result.aggregates.trials, result.aggregates.survival_frequency
    );
    Ok(0)
}

fn render(config: &Config, out: &Path) -> Result<u8, PerclabError> {
    config.reject_unknown(
        &[
            MATRIX_KEYS,
            &[
                "tree.depth",
                "tree.seed",
                "tree.dump",
                "render.level",
                "render.angle",
                "render.center",
                "render.kind",
            ],
        ]
        .concat(),
        &["matrix.row"],
    )?;
    // a tree comes either from a dump file or from (matrix, depth, seed)
    let tree = match config.get("tree.dump") {
        Some(path) => {
            let (m, depth, seed, _levels) = parse_dump(&std::fs::read_to_string(path)?)?;
            // dumps are reproducible: resample from the recorded parameters
            let matrix = config.matrix().or_else(|_| {
                Err(PerclabError::Config(
                    "rendering from a dump still needs matrix.* to resample".into(),
                ))
            })?;
            if matrix.m() != m {
                return Err(PerclabError::Config(
                    "matrix.m does not match the dump header".into(),
                ));
            }
            sample_tree(&matrix, depth, seed)
        }
        None => {
            let matrix = config.matrix()?;
            sample_tree(
                &matrix,
                config.get_usize("tree.depth", 4)?,
                config.get_u64("tree.seed", 0)?,
            )
        }
    };
    let level = config.get_usize("render.level", tree.depth())?;
    let source = match (config.get("render.angle"), config.get("render.center")) {
        (Some(a), None) => ShadowSource::Oblique(ProjectionFrame::from_radians(
            perclab::config::parse_angle(a)?,
        )?),
        (None, Some(c)) => {
            let (x, y) = c
                .split_once(',')
                .ok_or_else(|| PerclabError::Config(format!("bad center `{c}`")))?;
            let center = Center::new(
                x.trim()
                    .parse()
                    .map_err(|_| PerclabError::Config(format!("bad center `{c}`")))?,
                y.trim()
                    .parse()
                    .map_err(|_| PerclabError::Config(format!("bad center `{c}`")))?,
            )?;
            let kind = match config.get("render.kind").unwrap_or("radial") {
                "radial" => RadialKind::Radial,
                "coradial" => RadialKind::Coradial,
                other => {
                    return Err(PerclabError::Config(format!(
                        "render.kind must be radial or coradial, got `{other}`"
                    )))
                }
            };
            ShadowSource::Radial(center, kind)
        }
        _ => {
            return Err(PerclabError::Config(
                "render needs exactly one of render.angle or render.center".into(),
            ))
        }
    };
    let svg = render_svg(&tree, level, &source)?;
    write_out(out, "figure.svg", &svg)?;
    println!("wrote figure.svg ({} bytes)", svg.len());
    Ok(0)
}
