use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use coopbasin::basin::{solve_cost, solve_players, BasinReport, CostSolution, PlayerSolution};
use coopbasin::config::{ConfigDocument, ModeName, SessionSection};
use coopbasin::estimation::{
    curve, dummy_decomposition, fit_piecewise_probit_with, predict_rate, read_cell_observations, read_observations,
    render_panel_b, write_observations, DummyDecomposition, PanelBHeader, Prediction, ProbitFit, ProbitOptions,
};
use coopbasin::exact::{self, parse_power, parse_rational, RationalPower};
use coopbasin::game::{Money, Treatment};
use coopbasin::simulator::{
    compute_stats, lengths_from_sidecar, observations, render_panel_a, run_session, CoopStats, Phase, SessionConfig,
    SessionRecord,
};
use coopbasin::Error;
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{Manifest, Outputs};
use crate::{svg, DecomposeArgs, DesignArgs, FitArgs, Format, Mode, PredictArgs, SimulateArgs};

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read(path)?).map_err(|_| CliError::Usage(format!("{}: not UTF-8 text", path.display())))
}

fn json_with_manifest<T: Serialize>(value: &T, manifest: &Manifest) -> serde_json::Value {
    let mut v = serde_json::to_value(value).expect("value serializes");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("manifest".into(), manifest.to_value());
    }
    v
}

fn report_written(paths: &[std::path::PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

pub fn basin(config: &Path, format: Format) -> Result<(), CliError> {
    let doc = ConfigDocument::parse(&read_text(config)?)?;
    let report = BasinReport::new(&doc.treatment);
    match format {
        Format::Table => print!("{}", report.to_table()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    Ok(())
}

fn parse_target(text: &str) -> Result<RationalPower, CliError> {
    parse_power(text).map_err(|e| {
        CliError::Core(Error::InvalidParameter {
            field: "target",
            reason: e.to_string(),
        })
    })
}

fn field(name: &'static str, text: &str) -> Result<exact::Rational, CliError> {
    parse_rational(text).map_err(|e| {
        CliError::Core(Error::InvalidParameter {
            field: name,
            reason: e.to_string(),
        })
    })
}

#[derive(Serialize)]
struct DesignReport {
    target: String,
    target_value: f64,
    delta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost_solution: Option<CostSolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    players_solution: Option<PlayerSolution>,
    /// The solved treatment's basins, when the solution is exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    treatment: Option<BasinReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

pub fn design(args: &DesignArgs) -> Result<(), CliError> {
    let target = parse_target(&args.target)?;
    let delta = field("delta", &args.delta)?;
    let pi0 = Money::new(field("pi0", &args.pi0)?);
    let delta_pi = Money::new(field("delta_pi", &args.delta_pi)?);

    let mut report = DesignReport {
        target: target.to_string(),
        target_value: target.to_f64(),
        delta: exact::format_rational(&delta),
        cost_solution: None,
        players_solution: None,
        treatment: None,
        warning: None,
    };
    let solved: Option<Treatment> = match (args.players, &args.cost) {
        (Some(n), None) => {
            let s = solve_cost(&target, n, &delta)?;
            let t = match &s.cost {
                Some(x) => Some(Treatment::new(n, x.clone(), delta.clone(), pi0, delta_pi)?),
                None => None,
            };
            if s.near_knife_edge {
                report.warning = Some(knife_edge_warning());
            }
            report.cost_solution = Some(s);
            t
        }
        (None, Some(cost)) => {
            let x = field("cost", cost)?;
            let s = solve_players(&target, &x, &delta)?;
            let t = match s.exact {
                Some(n) => Some(Treatment::new(n, x, delta.clone(), pi0, delta_pi)?),
                None => None,
            };
            if s.near_knife_edge {
                report.warning = Some(knife_edge_warning());
            }
            report.players_solution = Some(s);
            t
        }
        _ => return Err(CliError::Usage("pass exactly one of --players or --cost".into())),
    };
    report.treatment = solved.as_ref().map(BasinReport::new);

    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
        Format::Table => print!("{}", design_table(&report)),
    }
    if let Some(dir) = &args.out {
        let mut manifest = Manifest::start("design", &[args.target.as_bytes(), args.delta.as_bytes()], None);
        let mut out = Outputs::default();
        out.add_json("design.json", &json_with_manifest(&report, &manifest));
        if let Some(t) = &solved {
            out.add("treatment.toml", coopbasin::config::treatment_to_toml(t));
        }
        report_written(&out.write(dir, &mut manifest)?);
    }
    Ok(())
}

fn knife_edge_warning() -> String {
    format!(
        "target basin is at least {}; the solution sits next to the knife edge where grim trigger stops being an equilibrium",
        coopbasin::basin::KNIFE_EDGE_WARNING
    )
}

fn design_table(r: &DesignReport) -> String {
    let mut s = String::new();
    writeln!(s, "target basin      {}  ({:.6})", r.target, r.target_value).unwrap();
    writeln!(s, "delta             {}", r.delta).unwrap();
    if let Some(c) = &r.cost_solution {
        let exact = c.cost.as_ref().map_or("irrational".to_string(), exact::format_rational);
        writeln!(s, "cost x            {exact}  ({:.12})", c.cost_f64).unwrap();
        writeln!(s, "verification      {:.12}", c.verification).unwrap();
    }
    if let Some(p) = &r.players_solution {
        writeln!(s, "players N         {:.12}", p.players_real).unwrap();
        match p.exact {
            Some(n) => writeln!(s, "exact integer     {n}").unwrap(),
            None => writeln!(s, "exact integer     none").unwrap(),
        }
        for b in [&p.lower, &p.upper] {
            writeln!(s, "  N = {:<3}  basin {:.6}  [{}]", b.players, b.basin, b.basin_exact).unwrap();
        }
    }
    if let Some(t) = &r.treatment {
        s.push('\n');
        s.push_str(&t.to_table());
    }
    s
}

/// Applies command-line overrides and builds the session.
fn session_config(args: &SimulateArgs, text: &str, schedule: Option<&str>) -> Result<SessionConfig, CliError> {
    let mut doc = ConfigDocument::parse(text)?;
    let mut section = match doc.session.take() {
        Some(s) => s,
        None => {
            let (Some(subjects), Some(p)) = (args.subjects, args.grim_probability) else {
                return Err(Error::Config(
                    "missing table `[session]`; add one or pass --subjects and --grim-probability".into(),
                )
                .into());
            };
            SessionSection {
                session_id: None,
                subjects,
                supergames: coopbasin::simulator::DEFAULT_SUPERGAMES,
                seed: 0,
                mode: ModeName::Static,
                grim_probability: p,
                adaptive_window: None,
                window: None,
                length_schedule: None,
            }
        }
    };
    if let Some(n) = args.subjects {
        section.subjects = n;
    }
    if let Some(p) = args.grim_probability {
        section.grim_probability = p;
    }
    if let Some(m) = args.mode {
        section.mode = match m {
            Mode::Static => ModeName::Static,
            Mode::FixedTypes => ModeName::FixedTypes,
            Mode::Adaptive => ModeName::Adaptive,
        };
    }
    if let Some(n) = args.supergames {
        section.supergames = n;
    }
    if let Some(seed) = args.seed {
        section.seed = seed;
    }
    if let Some(w) = &args.window {
        section.window = Some(w.clone());
    }
    if let Some(json) = schedule {
        let lengths = lengths_from_sidecar(json)?;
        if lengths.len() != section.supergames as usize {
            return Err(Error::Config(format!(
                "--schedule-from holds {} supergame lengths but the session has {} supergames",
                lengths.len(),
                section.supergames
            ))
            .into());
        }
        section.length_schedule = Some(lengths);
    }
    doc.session = Some(section);
    Ok(doc.into_session_config()?)
}

struct Simulation {
    config: SessionConfig,
    record: SessionRecord,
    stats: CoopStats,
    manifest: Manifest,
}

fn run_simulation(command: &str, args: &SimulateArgs) -> Result<Simulation, CliError> {
    let config_bytes = read(&args.config)?;
    let text = String::from_utf8(config_bytes.clone())
        .map_err(|_| CliError::Usage(format!("{}: not UTF-8 text", args.config.display())))?;
    let schedule = match &args.schedule_from {
        Some(p) => Some(read_text(p)?),
        None => None,
    };
    let config = session_config(args, &text, schedule.as_deref())?;
    let mut inputs: Vec<&[u8]> = vec![&config_bytes];
    if let Some(s) = &schedule {
        inputs.push(s.as_bytes());
    }
    let manifest = Manifest::start(command, &inputs, Some(config.seed));
    let record = run_session(&config)?;
    let stats = compute_stats(&record, config.metric_window)?;
    Ok(Simulation {
        config,
        record,
        stats,
        manifest,
    })
}

fn observations_csv(record: &SessionRecord, sim: &SessionConfig, phase: Phase) -> Vec<u8> {
    let mut buf = Vec::new();
    write_observations(&mut buf, &observations(record, sim.metric_window, phase)).expect("writing to memory");
    buf
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut sim = run_simulation("simulate", args)?;
    let panel = render_panel_a(&[(sim.config.treatment.label().to_string(), sim.stats.clone())]);

    let mut out = Outputs::default();
    out.add("session.csv", sim.record.to_csv_string());
    let mut sidecar = sim.record.sidecar();
    sidecar.manifest = Some(sim.manifest.to_value());
    out.add_json("session.json", &sidecar);
    out.add_json("stats.json", &json_with_manifest(&sim.stats, &sim.manifest));
    out.add("stats.txt", panel.clone());
    out.add("observations_initial.csv", observations_csv(&sim.record, &sim.config, Phase::Initial));
    out.add("observations_ongoing.csv", observations_csv(&sim.record, &sim.config, Phase::Ongoing));
    print!("{panel}");
    report_written(&out.write(&args.out.dir, &mut sim.manifest)?);
    Ok(())
}

pub fn report(args: &SimulateArgs) -> Result<(), CliError> {
    let mut sim = run_simulation("report", args)?;
    let basin = BasinReport::new(&sim.config.treatment);
    let label = sim.config.treatment.label().to_string();
    let panel = render_panel_a(&[(label.clone(), sim.stats.clone())]);
    let lengths = sim.record.lengths();

    let mut md = String::new();
    writeln!(md, "# {label}\n").unwrap();
    writeln!(md, "## Basin of attraction\n\n```text\n{}```\n", basin.to_table()).unwrap();
    writeln!(
        md,
        "## Simulated session\n\nSession `{}`, seed {}, {} subjects in groups of {}, {} supergames.\n",
        sim.config.session_id,
        sim.config.seed,
        sim.config.subjects,
        sim.config.treatment.players(),
        sim.config.supergames
    )
    .unwrap();
    let lens: Vec<String> = lengths.iter().map(u32::to_string).collect();
    writeln!(md, "Supergame lengths: {}.\n", lens.join(", ")).unwrap();
    writeln!(md, "```text\n{panel}```").unwrap();

    #[derive(Serialize)]
    struct Report<'a> {
        basin: &'a BasinReport,
        stats: &'a CoopStats,
        lengths: &'a [u32],
        config: &'a SessionConfig,
    }
    let json = json_with_manifest(
        &Report {
            basin: &basin,
            stats: &sim.stats,
            lengths: &lengths,
            config: &sim.config,
        },
        &sim.manifest,
    );
    let mut out = Outputs::default();
    out.add("report.md", md.clone());
    out.add_json("report.json", &json);
    print!("{md}");
    report_written(&out.write(&args.out.dir, &mut sim.manifest)?);
    Ok(())
}

fn fit_table(fit: &ProbitFit) -> String {
    let se = fit.std_errors();
    let mut s = String::new();
    writeln!(s, "{:<12} {:>12} {:>12} {:>9}", "", "coef", "cluster se", "z").unwrap();
    for (j, name) in fit.names.iter().enumerate() {
        let b = fit.coefficients[j];
        writeln!(s, "{name:<12} {b:>12.6} {:>12.6} {:>9.3}", se[j], b / se[j]).unwrap();
    }
    writeln!(
        s,
        "log-likelihood {:.6}; {} observations, {} clusters; {} iterations",
        fit.log_likelihood, fit.n_obs, fit.n_clusters, fit.iterations
    )
    .unwrap();
    s
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let bytes = read(&args.data)?;
    let mut manifest = Manifest::start("fit", &[&bytes], None);
    let data = read_observations(std::io::Cursor::new(bytes))?;
    let options = ProbitOptions {
        small_sample_correction: !args.no_small_sample_correction,
        ..ProbitOptions::default()
    };
    let fit = fit_piecewise_probit_with(&data, &options)?;
    let table = fit_table(&fit);
    let mut out = Outputs::default();
    out.add_json("fit.json", &json_with_manifest(&fit, &manifest));
    out.add("fit.txt", table.clone());
    print!("{table}");
    report_written(&out.write(&args.out.dir, &mut manifest)?);
    Ok(())
}

fn predictions_csv(rows: &[Prediction]) -> String {
    let mut s = String::from("p_star,index,rate,se,lower,upper\n");
    for p in rows {
        writeln!(s, "{},{},{},{},{},{}", p.p_star, p.index, p.rate, p.se, p.lower, p.upper).unwrap();
    }
    s
}

pub fn predict(args: &PredictArgs) -> Result<(), CliError> {
    let bytes = read(&args.fit)?;
    let mut manifest = Manifest::start("predict", &[&bytes], None);
    let fit: ProbitFit = serde_json::from_slice(&bytes)
        .map_err(|e| Error::Parse(format!("{}: {e}", args.fit.display())))?;
    let points: Vec<f64> = match &args.at {
        Some(list) => list
            .split(',')
            .map(|t| parse_target(t.trim()).map(|p| p.to_f64()))
            .collect::<Result<_, _>>()?,
        None => vec![1.0 / 27.0, 1.0 / 3.0, 3f64.powf(-1.0 / 3.0)],
    };
    let at: Vec<Prediction> = points
        .iter()
        .map(|&p| predict_rate(&fit, p))
        .collect::<Result<_, _>>()?;
    let grid = curve(&fit, args.points)?;

    let table = predictions_csv(&at);
    let mut out = Outputs::default();
    out.add("predictions.csv", table.clone());
    out.add("curve.csv", predictions_csv(&grid));
    out.add("curve.svg", svg::render(&grid, &at));
    print!("{table}");
    report_written(&out.write(&args.out.dir, &mut manifest)?);
    Ok(())
}

pub fn decompose(args: &DecomposeArgs) -> Result<(), CliError> {
    let header = match &args.header {
        None => PanelBHeader::reference(),
        Some(text) => {
            let v: Vec<f64> = text
                .split(',')
                .map(|t| parse_target(t.trim()).map(|p| p.to_f64()))
                .collect::<Result<_, _>>()?;
            let [baseline, ind_increase_to, corr_decrease_to] = v[..] else {
                return Err(CliError::Usage("--header needs three comma-separated basins".into()));
            };
            PanelBHeader {
                baseline,
                ind_increase_to,
                corr_decrease_to,
            }
        }
    };
    let initial = read(&args.initial)?;
    let ongoing = match &args.ongoing {
        Some(p) => Some(read(p)?),
        None => None,
    };
    let mut inputs: Vec<&[u8]> = vec![&initial];
    if let Some(o) = &ongoing {
        inputs.push(o);
    }
    let mut manifest = Manifest::start("decompose", &inputs, None);

    let mut rows: Vec<(String, DummyDecomposition)> = Vec::new();
    let data = read_cell_observations(std::io::Cursor::new(initial.clone()))?;
    rows.push(("Initial coop.".into(), dummy_decomposition(&data)?));
    if let Some(o) = &ongoing {
        let data = read_cell_observations(std::io::Cursor::new(o.clone()))?;
        rows.push(("Ongoing coop.".into(), dummy_decomposition(&data)?));
    }
    let table = render_panel_b(&header, &rows);

    #[derive(Serialize)]
    struct Row<'a> {
        outcome: &'a str,
        #[serde(flatten)]
        decomposition: &'a DummyDecomposition,
    }
    let json_rows: Vec<Row> = rows
        .iter()
        .map(|(l, d)| Row {
            outcome: l,
            decomposition: d,
        })
        .collect();
    let mut out = Outputs::default();
    out.add("decomposition.txt", table.clone());
    out.add_json(
        "decomposition.json",
        &serde_json::json!({ "header": header, "rows": json_rows, "manifest": manifest.to_value() }),
    );
    print!("{table}");
    report_written(&out.write(&args.out.dir, &mut manifest)?);
    Ok(())
}
