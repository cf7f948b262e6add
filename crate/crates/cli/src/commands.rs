use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use irradiance_core::daily_fit::write_fit_params_csv;
use irradiance_core::ingest::{parse_dataset, write_gap_report, write_series_csv, Dataset, IngestConfig, YEAR_DAYS};
use irradiance_core::model::ModelFile;
use irradiance_core::pipeline::{
    compare_charges, fit_model, replicate_charges, synthetic_dataset, within_box_rate, write_comparison_csv, AtStage,
    FitConfig, Stage,
};
use irradiance_core::pv::{
    daily_charge_tabulated, read_charges_csv, write_charges_csv, write_statistics_csv, ArraySpec, CurrentTable, PanelSpec,
    PvArray,
};
use irradiance_core::residual_maps::{write_discrete_map_csv, write_scaled_pdm_csv};
use irradiance_core::sim::{replicate_rng, write_curves_csv, write_exposure_csv, Simulator, Stochastic};
use irradiance_core::smoothing::TmaConfig;
use irradiance_core::stats;
use irradiance_core::trends::write_histogram_csv;
use log::{info, warn};
use sha2::{Digest, Sha256};

use crate::config::{load_panel, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::svg;
use crate::{FitArgs, GenerateArgs, PlotArgs, PlotKind, SimulateArgs, ValidateArgs};

const DEFAULT_OUTPUT: &str = "out";
const DEFAULT_VALIDATION_REPLICATES: u32 = 100;
/// Upper end and step of the tabulated maximum-power current, W/m².
const CURRENT_TABLE_MAX: f64 = 2000.0;
const CURRENT_TABLE_STEP: f64 = 1.0;

fn output_dir(flag: &Option<PathBuf>, cfg: &PipelineConfig) -> CliResult<PathBuf> {
    let dir = flag.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

/// Writes `dir/name` through `f`, mapping failures to I/O errors on that path.
fn write_file<F>(dir: &Path, name: &str, f: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> irradiance_core::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| match e {
        irradiance_core::Error::Io(io) => CliError::io(&path, io),
        other => CliError::io(&path, std::io::Error::other(other.to_string())),
    })?;
    w.flush().map_err(|e| CliError::io(&path, e))?;
    info!("wrote {}", path.display());
    Ok(path)
}

fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    write_file(dir, name, |w| Ok(w.write_all(text.as_bytes())?))
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn load_model(flag: &Option<PathBuf>, cfg: &PipelineConfig) -> CliResult<ModelFile> {
    let path = flag
        .clone()
        .or_else(|| cfg.model.clone())
        .ok_or_else(|| CliError::Usage("--model is required".into()))?;
    let bytes = read_bytes(&path)?;
    ModelFile::from_reader(bytes.as_slice()).at(Stage::Model).map_err(Into::into)
}

/// Parses `D` or `A-B` day specifications. Days past the annual cycle are
/// reduced modulo 365.
pub fn parse_days(specs: &[String]) -> CliResult<Vec<u32>> {
    if specs.is_empty() {
        return Ok((0..YEAR_DAYS).collect());
    }
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("invalid day `{s}`")));
    let mut days = Vec::new();
    for spec in specs {
        let (a, b) = match spec.split_once('-') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => {
                let d = num(spec)?;
                (d, d)
            }
        };
        if b < a {
            return Err(CliError::Usage(format!("empty day range `{spec}`")));
        }
        for d in a..=b {
            if d >= YEAR_DAYS {
                warn!("day {d} reduced to {}", d % YEAR_DAYS);
            }
            days.push(d % YEAR_DAYS);
        }
    }
    Ok(days)
}

fn cadence(flag: Option<u32>, cfg: &PipelineConfig) -> CliResult<u32> {
    let c = flag.or(cfg.cadence_min).unwrap_or(10);
    if c == 0 || 1440 % c != 0 {
        return Err(CliError::Usage(format!("cadence {c} min must divide 1440")));
    }
    Ok(c)
}

fn array_spec(panel: &Option<PathBuf>, series: Option<u32>, ambient_c: Option<f64>, cfg: &PipelineConfig) -> CliResult<ArraySpec> {
    let panel = match panel.clone().or_else(|| cfg.panel.clone()) {
        Some(p) => load_panel(&p)?,
        None => PanelSpec::s60pc_250(),
    };
    let series = series.or(cfg.series).unwrap_or(8);
    if series == 0 {
        return Err(CliError::Usage("--series must be positive".into()));
    }
    Ok(ArraySpec { series, panel, ambient_c: ambient_c.or(cfg.ambient_c) })
}

fn current_table(spec: ArraySpec) -> CliResult<CurrentTable> {
    let array = PvArray::new(spec).at(Stage::Pv)?;
    Ok(array.current_table(CURRENT_TABLE_MAX, CURRENT_TABLE_STEP).at(Stage::Pv)?)
}

pub fn fit(args: &FitArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let inputs = if args.input.is_empty() { cfg.input.clone() } else { args.input.clone() };
    if inputs.is_empty() {
        return Err(CliError::Usage("no input files".into()));
    }
    let cadence_min = cadence(args.cadence_min, cfg)?;
    let ingest = IngestConfig { cadence_min, day_offset: args.day_offset.or(cfg.day_offset).unwrap_or(0) };
    let defaults = TmaConfig::default();
    let tma = TmaConfig::new(
        args.tma_n.or(cfg.tma_n).unwrap_or(defaults.half_window),
        args.tma_l.or(cfg.tma_l).unwrap_or(defaults.trimmed),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let m_c = args.m_c.or(cfg.m_c).unwrap_or(irradiance_core::daily_fit::DEFAULT_M_C);
    if !(m_c > 0.0) {
        return Err(CliError::Usage(format!("m_c = {m_c}")));
    }
    let fit_cfg = FitConfig { m_c, tma, cadence_min, seasons: cfg.season_table()? };
    let out = output_dir(&args.output_dir, cfg)?;

    let mut hasher = Sha256::new();
    let mut dataset = Dataset::default();
    for path in &inputs {
        let bytes = read_bytes(path)?;
        hasher.update(&bytes);
        let mut part = parse_dataset(bytes.as_slice(), &ingest).at(Stage::Ingest)?;
        for r in &part.rejected {
            warn!("{}:{}: {}", path.display(), r.line, r.reason);
        }
        if let Some(d) = part.days.iter().find(|d| dataset.days.iter().any(|e| e.day == d.day)) {
            return Err(CliError::stage(
                Stage::Ingest,
                irradiance_core::Error::InvalidInput(format!("day {} appears in more than one input", d.day)),
            ));
        }
        dataset.days.append(&mut part.days);
        dataset.rejected.append(&mut part.rejected);
        dataset.gaps.append(&mut part.gaps);
    }
    dataset.days.sort_by_key(|d| d.day);
    if dataset.days.is_empty() {
        return Err(CliError::stage(Stage::Ingest, irradiance_core::Error::EmptyDataset));
    }

    let mut result = fit_model(&dataset, &fit_cfg)?;
    result.model.provenance.dataset_sha256 =
        Some(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect());

    write_file(&out, "gaps.csv", |w| write_gap_report(w, &dataset.gaps))?;
    write_file(&out, "rejected_rows.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["line", "reason"])?;
        for r in &dataset.rejected {
            c.write_record([r.line.to_string(), r.reason.clone()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    write_file(&out, "skipped_days.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["day", "reason"])?;
        for (d, r) in &result.skipped {
            c.write_record([d.to_string(), r.clone()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    write_file(&out, "fit_params.csv", |w| write_fit_params_csv(w, &result.params))?;
    for (name, hist) in ["A", "B", "C"].iter().zip(&result.histograms) {
        write_file(&out, &format!("histogram_{name}.csv"), |w| write_histogram_csv(w, hist))?;
    }
    let maps = &result.model.maps;
    for s in &maps.seasons {
        write_file(&out, &format!("discrete_map_s{}.csv", s.season), |w| write_discrete_map_csv(w, &s.discrete))?;
        write_file(&out, &format!("pdm_s{}.csv", s.season), |w| {
            write_scaled_pdm_csv(w, &s.rates, maps.binning.lo, maps.binning.hi, 101)
        })?;
    }
    let model_path = write_file(&out, "model.json", |w| result.model.write(w))?;
    println!(
        "fitted {} days ({} skipped), J = {}, h = {:.4}; model written to {}",
        result.params.len(),
        result.skipped.len(),
        result.model.grid().j,
        maps.bandwidth,
        model_path.display()
    );
    Ok(())
}

pub fn simulate(args: &SimulateArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let model = load_model(&args.model, cfg)?;
    let days = parse_days(&args.days)?;
    let replicates = args.replicates.or(cfg.replicates).unwrap_or(1);
    if replicates == 0 {
        return Err(CliError::Usage("--replicates must be positive".into()));
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let cadence_min = cadence(args.cadence_min, cfg)?;
    let out = output_dir(&args.output_dir, cfg)?;
    let mut sim = Simulator::new(&model).at(Stage::Simulation)?;
    if args.deterministic {
        sim = sim.with_stochastic(Stochastic::NONE);
    }

    let mut first = Vec::with_capacity(days.len());
    let mut all_curves = Vec::new();
    let mut exposures = Vec::with_capacity(days.len() * replicates as usize);
    for &d in &days {
        for r in 0..replicates {
            let day = sim.simulate_irradiance(&mut replicate_rng(seed, d, r), d, cadence_min).at(Stage::Simulation)?;
            exposures.push((d, r, day.exposure));
            if r == 0 {
                first.push(day);
            } else {
                all_curves.push((r, day));
            }
        }
    }
    write_file(&out, "irradiance.csv", |w| write_curves_csv(w, &first))?;
    let first_exposure: Vec<(u32, f64)> = first.iter().map(|d| (d.day, d.exposure)).collect();
    write_file(&out, "exposure.csv", |w| write_exposure_csv(w, &first_exposure))?;
    write_file(&out, "expected.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["day", "expected_exposure_whm2"])?;
        for &d in &days {
            c.write_record([d.to_string(), format!("{:.6}", sim.expected_exposure(d))])?;
        }
        c.flush()?;
        Ok(())
    })?;
    if replicates > 1 {
        write_file(&out, "replicates.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["day", "replicate", "exposure_whm2"])?;
            for (d, r, e) in &exposures {
                c.write_record([d.to_string(), r.to_string(), format!("{e:.6}")])?;
            }
            c.flush()?;
            Ok(())
        })?;
        write_file(&out, "irradiance_replicates.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["day", "replicate", "minute", "irradiance_wm2"])?;
            for (r, day) in &all_curves {
                for &(m, e) in day.curve.iter().filter(|p| p.0 < 1440.0) {
                    c.write_record([day.day.to_string(), r.to_string(), (m as u32).to_string(), format!("{e:.6}")])?;
                }
            }
            c.flush()?;
            Ok(())
        })?;
    }
    println!("simulated {} days x {replicates} replicates into {}", days.len(), out.display());
    Ok(())
}

pub fn validate(args: &ValidateArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let model = load_model(&args.model, cfg)?;
    let measured_bytes = read_bytes(&args.measured)?;
    let mut measured = read_charges_csv(measured_bytes.as_slice()).at(Stage::Validation)?;
    measured.sort_by_key(|m| m.0);
    if measured.is_empty() {
        return Err(CliError::stage(
            Stage::Validation,
            irradiance_core::Error::InvalidInput("no measured charges".into()),
        ));
    }
    if measured.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(CliError::stage(
            Stage::Validation,
            irradiance_core::Error::InvalidInput("duplicate days in measured charges".into()),
        ));
    }
    let days: Vec<u32> = measured.iter().map(|m| m.0).collect();
    if !args.days.is_empty() {
        let mut wanted = parse_days(&args.days)?;
        wanted.sort_unstable();
        wanted.dedup();
        if wanted != days {
            return Err(CliError::stage(
                Stage::Validation,
                irradiance_core::Error::InvalidInput(format!(
                    "requested {} days but the measured file covers {}",
                    wanted.len(),
                    days.len()
                )),
            ));
        }
    }
    let replicates = args.replicates.or(cfg.replicates).unwrap_or(DEFAULT_VALIDATION_REPLICATES);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let cadence_min = cadence(args.cadence_min, cfg)?;
    let out = output_dir(&args.output_dir, cfg)?;
    let table = current_table(array_spec(&args.panel, args.series, args.ambient_c, cfg)?)?;
    let sim = Simulator::new(&model).at(Stage::Simulation)?;

    let simulated = replicate_charges(&sim, &table, &days, replicates, cadence_min, seed).at(Stage::Simulation)?;
    let rows = compare_charges(&simulated, &measured).at(Stage::Validation)?;
    let stats: Vec<_> = rows.iter().map(|r| r.stats.clone()).collect();
    write_file(&out, "statistics.csv", |w| write_statistics_csv(w, &stats))?;
    write_file(&out, "comparison.csv", |w| write_comparison_csv(w, &rows))?;
    write_file(&out, "boxes.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["day", "q1", "median", "q3", "whisker_low", "whisker_high", "measured_ah"])?;
        for r in &rows {
            let s = &r.stats;
            let mut rec = vec![s.day.to_string()];
            rec.extend([s.q1, s.median, s.q3, s.whisker_low, s.whisker_high, r.measured].iter().map(|x| format!("{x:.6}")));
            c.write_record(rec)?;
        }
        c.flush()?;
        Ok(())
    })?;
    let rate = within_box_rate(&rows);
    write_text(&out, "summary.txt", &format!("days {}\nreplicates {replicates}\nwithin_box_rate {rate:.6}\n", rows.len()))?;
    println!("within-box rate {:.1}% over {} days", 100.0 * rate, rows.len());
    Ok(())
}

pub fn generate(args: &GenerateArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let mut model = match args.model.clone().or_else(|| cfg.model.clone()) {
        Some(_) => load_model(&args.model, cfg)?,
        None => ModelFile::reference(),
    };
    if let Some(spread) = args.concentrated {
        model = model.with_concentrated_maps(spread).at(Stage::Model)?;
    }
    let days = parse_days(&args.days)?;
    let cadence_min = cadence(args.cadence_min, cfg)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let replicates = args.replicates.or(cfg.replicates).unwrap_or(DEFAULT_VALIDATION_REPLICATES);
    let out = output_dir(&args.output_dir, cfg)?;
    let sim = Simulator::new(&model).at(Stage::Simulation)?;
    let table = current_table(array_spec(&args.panel, args.series, None, cfg)?)?;

    let dataset = synthetic_dataset(&sim, &days, cadence_min, seed).at(Stage::Simulation)?;
    write_file(&out, "dataset.csv", |w| write_series_csv(w, &dataset))?;
    let realized: Vec<(u32, f64)> = dataset
        .iter()
        .map(|d| {
            let curve: Vec<(f64, f64)> = d.samples.iter().map(|s| (s.minute as f64, s.irradiance)).collect();
            (d.day, daily_charge_tabulated(&curve, &table))
        })
        .collect();
    write_file(&out, "charges.csv", |w| write_charges_csv(w, &realized))?;
    if replicates > 0 {
        // an independent stream from the one behind dataset.csv
        let reps = replicate_charges(&sim, &table, &days, replicates, cadence_min, seed ^ 0x6d65_6469_616e).at(Stage::Simulation)?;
        let medians: Vec<(u32, f64)> =
            reps.iter().map(|(d, qs)| (*d, stats::quantile_sorted(&stats::sorted_copy(qs), 0.5))).collect();
        write_file(&out, "median_charges.csv", |w| write_charges_csv(w, &medians))?;
    }
    write_file(&out, "generator_model.json", |w| model.write(w))?;
    println!("generated {} days into {}", days.len(), out.display());
    Ok(())
}

/// CSV table of numbers, looked up by column name.
struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn read(path: &Path) -> CliResult<Self> {
        let bytes = read_bytes(path)?;
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let plot_err = |m: String| CliError::stage(Stage::Plot, irradiance_core::Error::InvalidInput(m));
        let headers: Vec<String> = r
            .headers()
            .map_err(|e| plot_err(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| plot_err(e.to_string()))?;
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|_| plot_err(format!("{}: non-numeric field `{f}`", path.display()))))
                .collect::<CliResult<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    fn col(&self, name: &str) -> CliResult<Vec<f64>> {
        let k = self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::stage(
                Stage::Plot,
                irradiance_core::Error::InvalidInput(format!("missing column `{name}` (have {:?})", self.headers)),
            )
        })?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    fn has(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }
}

fn read_long_map(path: &Path) -> irradiance_core::Result<Vec<(f64, f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut cells = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = rec.iter().filter_map(|f| f.parse().ok()).collect();
        if v.len() == 3 {
            cells.push((v[0], v[1], v[2]));
        }
    }
    Ok(cells)
}

pub fn plot(args: &PlotArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let out = output_dir(&args.output_dir, cfg)?;
    if !args.artifact.exists() {
        return Err(CliError::io(&args.artifact, std::io::Error::from(std::io::ErrorKind::NotFound)));
    }
    match args.kind {
        PlotKind::Pdm | PlotKind::Discrete => {
            let bytes = read_bytes(&args.artifact)?;
            let model = ModelFile::from_reader(bytes.as_slice()).at(Stage::Plot)?;
            let maps = &model.maps;
            let seasons: Vec<_> = maps.seasons.iter().filter(|s| args.season.is_none_or(|id| id == s.season)).collect();
            if seasons.is_empty() {
                return Err(CliError::Usage(format!("no season {:?} in model", args.season)));
            }
            for s in seasons {
                let (stem, title) = match args.kind {
                    PlotKind::Pdm => (format!("pdm_s{}", s.season), format!("Scaled probability map, season {}", s.season)),
                    _ => (format!("discrete_s{}", s.season), format!("Discrete probability map, season {}", s.season)),
                };
                let csv_path = write_file(&out, &format!("{stem}.csv"), |w| match args.kind {
                    PlotKind::Pdm => write_scaled_pdm_csv(w, &s.rates, maps.binning.lo, maps.binning.hi, 101),
                    _ => write_discrete_map_csv(w, &s.discrete),
                })?;
                let cells = read_long_map(&csv_path).at(Stage::Plot)?;
                write_text(&out, &format!("{stem}.svg"), &svg::heatmap(&title, "m*", "r*", &cells))?;
            }
        }
        PlotKind::Exposure => {
            let t = Table::read(&args.artifact)?;
            let pts: Vec<(f64, f64)> = t.col("day")?.into_iter().zip(t.col("exposure_whm2")?).collect();
            write_file(&out, "exposure_plot.csv", |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["day", "exposure_whm2"])?;
                for (d, e) in &pts {
                    c.write_record([d.to_string(), e.to_string()])?;
                }
                c.flush()?;
                Ok(())
            })?;
            let chart = svg::line_chart("Daily radiant exposure", "day", "W·h/m²", &[svg::Series { label: "exposure", points: pts }]);
            write_text(&out, "exposure.svg", &chart)?;
        }
        PlotKind::Boxes => {
            let t = Table::read(&args.artifact)?;
            let marker = if t.has("measured_ah") { Some(t.col("measured_ah")?) } else { None };
            let (day, q1, med, q3) = (t.col("day")?, t.col("q1")?, t.col("median")?, t.col("q3")?);
            let (lo, hi) = if t.has("whisker_low") { (t.col("whisker_low")?, t.col("whisker_high")?) } else { (q1.clone(), q3.clone()) };
            let rows: Vec<svg::BoxRow> = (0..day.len())
                .map(|i| svg::BoxRow {
                    x: day[i],
                    q1: q1[i],
                    median: med[i],
                    q3: q3[i],
                    low: lo[i],
                    high: hi[i],
                    marker: marker.as_ref().map(|m| m[i]),
                })
                .collect();
            write_file(&out, "boxes_plot.csv", |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["day", "q1", "median", "q3", "whisker_low", "whisker_high", "measured_ah"])?;
                for r in &rows {
                    c.write_record([
                        r.x.to_string(),
                        r.q1.to_string(),
                        r.median.to_string(),
                        r.q3.to_string(),
                        r.low.to_string(),
                        r.high.to_string(),
                        r.marker.map(|m| m.to_string()).unwrap_or_default(),
                    ])?;
                }
                c.flush()?;
                Ok(())
            })?;
            write_text(&out, "boxes.svg", &svg::box_chart("Daily PV charge", "day", "A·h", &rows))?;
        }
        PlotKind::Params => {
            let t = Table::read(&args.artifact)?;
            let day = t.col("day")?;
            for name in ["A", "B", "C"] {
                let pts: Vec<(f64, f64)> = day.iter().copied().zip(t.col(name)?).collect();
                let chart = svg::line_chart(&format!("Parameter {name}"), "day", name, &[svg::Series { label: name, points: pts }]);
                write_text(&out, &format!("params_{name}.svg"), &chart)?;
            }
            let bytes = read_bytes(&args.artifact)?;
            write_file(&out, "params_plot.csv", |w| Ok(w.write_all(&bytes)?))?;
        }
        PlotKind::Histogram => {
            let t = Table::read(&args.artifact)?;
            let (l, r, n, p) = (t.col("bin_left")?, t.col("bin_right")?, t.col("count")?, t.col("pdf_scaled")?);
            let bars: Vec<(f64, f64, f64)> = (0..l.len()).map(|i| (l[i], r[i], n[i])).collect();
            let curve: Vec<(f64, f64)> = (0..l.len()).map(|i| (0.5 * (l[i] + r[i]), p[i])).collect();
            let bytes = read_bytes(&args.artifact)?;
            write_file(&out, "histogram_plot.csv", |w| Ok(w.write_all(&bytes)?))?;
            write_text(&out, "histogram.svg", &svg::bar_chart("Residual histogram", "residual", "count", &bars, &curve))?;
        }
        PlotKind::Curves => {
            let t = Table::read(&args.artifact)?;
            let (day, minute, e) = (t.col("day")?, t.col("minute")?, t.col("irradiance_wm2")?);
            let mut ids: Vec<u32> = day.iter().map(|d| *d as u32).collect();
            ids.dedup();
            ids.truncate(12);
            let labels: Vec<String> = ids.iter().map(|d| format!("day {d}")).collect();
            let series: Vec<svg::Series> = ids
                .iter()
                .zip(&labels)
                .map(|(id, label)| svg::Series {
                    label,
                    points: (0..day.len()).filter(|&i| day[i] as u32 == *id).map(|i| (minute[i], e[i])).collect(),
                })
                .collect();
            let bytes = read_bytes(&args.artifact)?;
            write_file(&out, "curves_plot.csv", |w| Ok(w.write_all(&bytes)?))?;
            write_text(&out, "curves.svg", &svg::line_chart("Irradiance", "minute", "W/m²", &series))?;
        }
    }
    println!("plot written to {}", out.display());
    Ok(())
}
