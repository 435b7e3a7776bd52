use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use plcoh::fluctuation::cross_moments;
use plcoh::montecarlo::{write_cells_csv, write_decay_csv, write_series_csv};
use plcoh::{
    analyze, build_profile, run_length_sweep, run_table, ExperimentConfig, HurstEstimate,
    MCArfimaParams, McArfimaGenerator, Method, Preset,
};
use serde_json::json;

use crate::input::{read_pair, write_pair, write_scale_values};
use crate::manifest::{resolve_seed, sidecar_path, unix_now, RunManifest};
use crate::{flag_error, method_config_for, sig6, Component, EstimateArgs, FluctuationArgs, GenerateArgs, McArgs};

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let started = unix_now();
    let (seed, given) = resolve_seed(args.seed);
    let mut params = MCArfimaParams::new([args.d1, args.d2, args.d3, args.d4], args.rho, args.length, seed);
    if let Some(n) = args.ntrunc {
        params = params.with_truncation(n);
    }
    if !(-1.0..=1.0).contains(&args.rho) {
        bail!("--rho: correlation {} is outside [-1, 1]", args.rho);
    }
    params.validate().map_err(flag_error)?;
    let pair = McArfimaGenerator::new(params.clone())
        .map_err(flag_error)?
        .generate(args.rep)?;
    write_pair(&args.out, &pair)?;

    let mut manifest = RunManifest::new(
        "generate",
        json!({ "args": args, "params": params, "implied": params.implied_exponents() }),
        started,
    )
    .with_seed(seed, given);
    manifest.outputs.push(args.out.clone());
    manifest.write(&sidecar_path(&args.out))?;
    eprintln!("wrote {} rows to {} (seed {seed})", pair.len(), args.out.display());
    Ok(())
}

fn describe(est: &Option<HurstEstimate>) -> String {
    match est {
        Some(e) => match &e.fit {
            Some(fit) => format!(
                "{:<12} (slope {}, {} points, residual SSE {})",
                sig6(e.value),
                sig6(fit.slope),
                fit.n_points,
                sig6(fit.residual_sse)
            ),
            None => sig6(e.value),
        },
        None => "n/a (fewer than 3 positive points)".to_string(),
    }
}

pub fn estimate(args: &EstimateArgs) -> Result<()> {
    let pair = read_pair(&args.input)?;
    let config = args.method.config();
    let analysis = analyze(&pair, &config)
        .with_context(|| format!("estimating with {}", config.method()))?;
    let grid = &analysis.profile.meta.grid;

    let mut out = io::stdout().lock();
    writeln!(out, "input      {}", args.input.display())?;
    writeln!(out, "T          {}", pair.len())?;
    writeln!(out, "method     {}", config.method())?;
    writeln!(
        out,
        "grid       {:?} {}..={} ({} scales{})",
        grid.kind(),
        grid.min(),
        grid.max(),
        grid.len(),
        match analysis.profile.meta.box_step {
            Some(step) => format!(", boxes {step}"),
            None => String::new(),
        }
    )?;
    if !analysis.profile.meta.dropped.is_empty() {
        writeln!(out, "dropped    {:?} (zero detrended variance)", analysis.profile.meta.dropped)?;
    }
    match analysis.jackknife {
        Some((fits, skipped)) => writeln!(
            out,
            "H_rho      {:<12} (jackknife over {fits} fit ranges, {skipped} skipped)",
            sig6(analysis.h_rho.value)
        )?,
        None => writeln!(out, "H_rho      {}", describe(&Some(analysis.h_rho.clone())))?,
    }
    writeln!(out, "H_x        {}", describe(&analysis.hx))?;
    writeln!(out, "H_y        {}", describe(&analysis.hy))?;
    writeln!(out, "H_xy       {}", describe(&analysis.hxy))?;

    if let Some(path) = &args.emit_profile {
        let started = unix_now();
        write_scale_values(path, "scale,rho2", &analysis.profile.entries)?;
        let mut manifest = RunManifest::new(
            "estimate",
            json!({ "input": args.input, "method": args.method, "config": config, "analysis": analysis }),
            started,
        );
        manifest.outputs.push(path.clone());
        manifest.write(&sidecar_path(path))?;
        writeln!(out, "profile    {}", path.display())?;
    }
    Ok(())
}

pub fn fluctuation(args: &FluctuationArgs) -> Result<()> {
    let pair = read_pair(&args.input)?;
    let config = args.method.config();
    let grid = config.grid(pair.len())?;
    let moments = cross_moments(
        config.method(),
        &build_profile(pair.x())?,
        &build_profile(pair.y())?,
        &grid,
        config.box_step(),
    )?;
    let entries: Vec<(usize, f64)> = grid
        .scales()
        .iter()
        .zip(&moments)
        .map(|(&s, m)| {
            let v = match args.component {
                Component::Xy => m.xy,
                Component::Xx => m.xx,
                Component::Yy => m.yy,
            };
            (s, v)
        })
        .collect();
    match &args.out {
        Some(path) => {
            let started = unix_now();
            write_scale_values(path, "scale,value", &entries)?;
            let mut manifest = RunManifest::new(
                "fluctuation",
                json!({ "input": args.input, "method": args.method, "component": args.component, "config": config }),
                started,
            );
            manifest.outputs.push(path.clone());
            manifest.write(&sidecar_path(path))?;
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "scale,value")?;
            for (s, v) in entries {
                writeln!(out, "{s},{v}")?;
            }
        }
    }
    Ok(())
}

fn experiment_from(args: &McArgs, preset: Option<Preset>) -> Result<ExperimentConfig> {
    let mut config = match preset {
        Some(p) => p.experiment(args.quick),
        None => {
            let Some(method) = args.method else {
                bail!("--preset or --method with --options is required");
            };
            if args.options.is_empty() {
                bail!("--options is required with --method");
            }
            let method = Method::from(method);
            ExperimentConfig::new(args.options.iter().map(|&o| method_config_for(method, o)).collect())
        }
    };
    if preset.is_some() && (args.method.is_some() || !args.options.is_empty()) {
        let method = args.method.map(Method::from).unwrap_or_else(|| config.options[0].method());
        let options = if args.options.is_empty() {
            config.options.iter().map(|c| c.option_value()).collect()
        } else {
            args.options.clone()
        };
        config.options = options.iter().map(|&o| method_config_for(method, o)).collect();
        config.options_by_length.clear();
    }
    if !args.lengths.is_empty() {
        config.lengths = args.lengths.clone();
    }
    if !args.rho.is_empty() {
        config.rho23 = args.rho.clone();
    }
    if let Some(r) = args.reps {
        config.repetitions = r;
    }
    config.n_trunc = args.ntrunc.or(config.n_trunc);
    config.jobs = args.jobs;
    config.validate().map_err(flag_error)?;
    Ok(config)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub fn monte_carlo(args: &McArgs, sweep_command: bool) -> Result<()> {
    let started = unix_now();
    let preset = match (args.preset, sweep_command) {
        (None, true) if args.method.is_none() => Some(Preset::Figure1),
        (p, _) => p,
    };
    let sweep = sweep_command || preset.is_some_and(Preset::is_sweep);
    let (seed, given) = resolve_seed(args.seed);
    let mut config = experiment_from(args, preset)?;
    config.seed = seed;
    fs::create_dir_all(&args.outdir).with_context(|| format!("creating {}", args.outdir.display()))?;

    let mut outputs: Vec<PathBuf> = Vec::new();
    let mut stdout = io::stdout().lock();
    if sweep {
        let result = run_length_sweep(&config)?;
        let cells_path = args.outdir.join("sweep.csv");
        let mut w = create(&cells_path)?;
        write_cells_csv(&mut w, &result.cells, config.repetitions)?;
        w.flush()?;
        outputs.push(cells_path);

        let decay_path = args.outdir.join("variance_decay.csv");
        let mut w = create(&decay_path)?;
        write_decay_csv(&mut w, &result)?;
        w.flush()?;
        outputs.push(decay_path);

        for method in Method::ALL {
            let cells = result.cells_for(method);
            if cells.is_empty() {
                continue;
            }
            let path = args.outdir.join(format!("figure1_{method}.csv"));
            let mut w = create(&path)?;
            write_series_csv(&mut w, &cells)?;
            w.flush()?;
            outputs.push(path);
        }
        print_cells(&mut stdout, &result.cells)?;
        for d in result.decay.iter().flatten() {
            writeln!(stdout, "{:<5} variance decay exponent {}", d.method, sig6(d.exponent))?;
        }
    } else {
        let cells = run_table(&config)?;
        let name = preset
            .map(|p| p.name().to_string())
            .unwrap_or_else(|| config.options[0].method().to_string());
        let path = args.outdir.join(format!("{name}.csv"));
        let mut w = create(&path)?;
        write_cells_csv(&mut w, &cells, config.repetitions)?;
        w.flush()?;
        outputs.push(path);
        print_cells(&mut stdout, &cells)?;
    }

    let mut manifest = RunManifest::new(
        if sweep { "sweep" } else { "mc" },
        json!({
            "preset": preset.map(Preset::name),
            "quick": args.quick,
            "experiment": config,
            "h_rho_true": config.h_rho_true(),
            "n_trunc_by_length": config.lengths.iter().map(|&t| (t, config.n_trunc_for(t))).collect::<Vec<_>>(),
        }),
        started,
    )
    .with_seed(seed, given);
    manifest.outputs = outputs;
    manifest.write(&args.outdir.join("manifest.json"))?;
    Ok(())
}

fn print_cells(out: &mut impl Write, cells: &[plcoh::montecarlo::CellOutcome]) -> io::Result<()> {
    writeln!(
        out,
        "{:<5} {:>7} {:>6} {:>5} {:>11} {:>11} {:>11} {:>6}",
        "meth", "T", "opt", "rho", "bias", "sd", "mse", "fail"
    )?;
    for cell in cells {
        match cell {
            Ok(c) => writeln!(
                out,
                "{:<5} {:>7} {:>6} {:>5} {:>11} {:>11} {:>11} {:>6}",
                c.method.name(),
                c.length,
                c.option,
                c.rho23,
                sig6(c.bias),
                sig6(c.sd),
                sig6(c.mse),
                c.failures
            )?,
            Err(f) => writeln!(
                out,
                "{:<5} {:>7} {:>6} {:>5} failed: {}",
                f.method.name(),
                f.length,
                f.option,
                f.rho23,
                f.error
            )?,
        }
    }
    Ok(())
}
